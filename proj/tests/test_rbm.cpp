#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <vector>

#include "nrbm/errors.hpp"
#include "nrbm/parallel.hpp"
#include "nrbm/rbm.hpp"
#include "nrbm/reference.hpp"

using namespace nrbm;

namespace {

RbmParams zero_params(std::size_t n, std::size_t k) {
  RbmParams p;
  p.visible_bias.assign(n, 0.0);
  p.hidden_bias.assign(k, 0.0);
  p.weights = Matrix(n, k);
  return p;
}

RbmParams random_params(std::size_t n, std::size_t k, double scale,
                        std::uint64_t seed) {
  RbmParams p = zero_params(n, k);
  RngStream rng(seed, stream_id(StreamKind::generic, n, k));
  for (auto& v : p.visible_bias) v = rng.uniform(-scale, scale);
  for (auto& v : p.hidden_bias) v = rng.uniform(-scale, scale);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      p.weights(i, j) = rng.uniform(-scale, scale);
    }
  }
  return p;
}

DataMatrix random_binary_rows(std::size_t rows, std::size_t cols,
                              std::uint64_t seed) {
  DataMatrix data;
  data.values = Matrix(rows, cols);
  RngStream rng(seed, stream_id(StreamKind::generic, rows, cols));
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      data.values(r, c) = rng.bernoulli(0.5) ? 1.0 : 0.0;
    }
  }
  return data;
}

std::vector<std::size_t> iota_rows(std::size_t m) {
  std::vector<std::size_t> rows(m);
  for (std::size_t i = 0; i < m; ++i) rows[i] = i;
  return rows;
}

}  // namespace

TEST_CASE("energy") {
  SUBCASE("zero parameters give zero energy") {
    const RbmParams p = zero_params(3, 2);
    CHECK(energy(p, std::vector<double>{1, 0, 1},
                 std::vector<double>{1, 1}) == 0.0);
  }
  SUBCASE("hand evaluation") {
    RbmParams p = zero_params(1, 1);
    p.visible_bias[0] = 1.0;
    p.hidden_bias[0] = -2.0;
    p.weights(0, 0) = 3.0;
    CHECK(energy(p, std::vector<double>{1}, std::vector<double>{1}) ==
          doctest::Approx(-2.0).epsilon(1e-15));
  }
  SUBCASE("empty configuration") {
    const RbmParams p = random_params(4, 3, 2.0, 1);
    CHECK(energy(p, std::vector<double>(4, 0.0), std::vector<double>(3, 0.0)) ==
          0.0);
  }
  SUBCASE("dimension mismatch") {
    const RbmParams p = zero_params(3, 2);
    CHECK_THROWS_AS(
        energy(p, std::vector<double>{1, 0}, std::vector<double>{1, 1}),
        DimError);
  }
}

TEST_CASE("sigmoid") {
  CHECK(sigmoid(0.0) == 0.5);
  CHECK(sigmoid(1.0) == doctest::Approx(0.7310585786300049).epsilon(1e-15));
  SUBCASE("saturates without NaN") {
    CHECK(sigmoid(-750.0) == 0.0);
    CHECK(sigmoid(750.0) == 1.0);
    CHECK(std::isfinite(sigmoid(-1000.0)));
  }
  SUBCASE("range and symmetry") {
    // Strict bounds hold wherever float64 can represent them (|x| < 36.7).
    RngStream rng(5, stream_id(StreamKind::generic, 17));
    double prev_x = -36.0, prev_s = sigmoid(prev_x);
    for (int i = 0; i < 200; ++i) {
      const double x = rng.uniform(-36.0, 36.0);
      const double s = sigmoid(x);
      CHECK(s > 0.0);
      CHECK(s < 1.0);
      CHECK(std::abs(sigmoid(-x) - (1.0 - s)) < 1e-12);
      if (x > prev_x) CHECK(s >= prev_s);
      prev_x = x;
      prev_s = s;
    }
  }
}

TEST_CASE("conditionals") {
  SUBCASE("zero parameters give 0.5 everywhere") {
    const RbmParams p = zero_params(3, 2);
    for (double v : hidden_conditional(p, std::vector<double>{1, 0, 1})) {
      CHECK(v == 0.5);
    }
    for (double v : visible_conditional(p, std::vector<double>{1, 0})) {
      CHECK(v == 0.5);
    }
  }
  SUBCASE("hidden hand case: sig(1)") {
    RbmParams p = zero_params(2, 1);
    p.weights(0, 0) = 2.0;
    p.weights(1, 0) = -1.0;
    const auto probs = hidden_conditional(p, std::vector<double>{1, 1});
    CHECK(probs[0] == doctest::Approx(0.7310585786300049).epsilon(1e-14));
  }
  SUBCASE("visible hand case: sig(0)") {
    RbmParams p = zero_params(1, 1);
    p.visible_bias[0] = 1.0;
    p.weights(0, 0) = -1.0;
    const auto probs = visible_conditional(p, std::vector<double>{1});
    CHECK(probs[0] == 0.5);
  }
  SUBCASE("deep saturation is stable") {
    RbmParams p = zero_params(1, 1);
    p.hidden_bias[0] = -750.0;
    const auto probs = hidden_conditional(p, std::vector<double>{0});
    CHECK(probs[0] == 0.0);
  }
  SUBCASE("visible equals hidden on the transposed model") {
    const RbmParams p = random_params(4, 3, 1.5, 2);
    RbmParams pt = zero_params(3, 4);
    pt.visible_bias = p.hidden_bias;
    pt.hidden_bias = p.visible_bias;
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 3; ++j) pt.weights(j, i) = p.weights(i, j);
    }
    const std::vector<double> h = {1, 0, 1};
    const auto a = visible_conditional(p, h);
    const auto b = hidden_conditional(pt, h);
    for (std::size_t i = 0; i < 4; ++i) CHECK(a[i] == b[i]);
  }
}

TEST_CASE("sample_bernoulli") {
  RngStream rng(9, stream_id(StreamKind::generic, 31));
  SUBCASE("degenerate probabilities") {
    const auto zeros = sample_bernoulli(std::vector<double>(16, 0.0), rng);
    for (double v : zeros) CHECK(v == 0.0);
    const auto ones = sample_bernoulli(std::vector<double>(16, 1.0), rng);
    for (double v : ones) CHECK(v == 1.0);
  }
  SUBCASE("law of large numbers at p = 0.3") {
    const std::vector<double> probs(100000, 0.3);
    const auto draws = sample_bernoulli(probs, rng);
    double mean = 0.0;
    for (double v : draws) mean += v;
    mean /= static_cast<double>(draws.size());
    CHECK(std::abs(mean - 0.3) < 0.01);
  }
}

TEST_CASE("exact partition") {
  SUBCASE("zero parameters: 2^(N+K) equal terms") {
    CHECK(exact_partition(zero_params(2, 1)) ==
          doctest::Approx(8.0).epsilon(1e-12));
  }
  SUBCASE("closed-form factorization with a = ln 3") {
    RbmParams p = zero_params(1, 1);
    p.visible_bias[0] = std::log(3.0);
    CHECK(exact_partition(p) == doctest::Approx(8.0).epsilon(1e-12));
  }
  SUBCASE("always positive") {
    for (std::uint64_t s = 0; s < 10; ++s) {
      CHECK(exact_partition(random_params(3, 3, 2.0, s)) > 0.0);
    }
  }
  SUBCASE("size guard") {
    CHECK_THROWS_AS(exact_partition(zero_params(15, 6)), OracleSizeError);
  }
}

TEST_CASE("exact loglik") {
  SUBCASE("uniform model assigns -N log 2 per row") {
    const RbmParams p = zero_params(4, 2);
    const DataMatrix data = random_binary_rows(10, 4, 3);
    CHECK(exact_loglik(p, data) ==
          doctest::Approx(-4.0 * std::log(2.0)).epsilon(1e-12));
  }
  SUBCASE("never positive on binary rows") {
    for (std::uint64_t s = 0; s < 5; ++s) {
      const RbmParams p = random_params(3, 2, 2.0, s);
      const DataMatrix data = random_binary_rows(6, 3, s + 100);
      CHECK(exact_loglik(p, data) <= 0.0);
    }
  }
}

TEST_CASE("analytic gradient matches central finite differences") {
  for (std::uint64_t s = 0; s < 5; ++s) {
    RbmParams p = random_params(3, 2, 1.0, 40 + s);
    const DataMatrix data = random_binary_rows(8, 3, 50 + s);
    const LoglikGradient grad = exact_loglik_gradient(p, data);
    const double h = 1e-5;

    auto fd = [&](double* slot) {
      const double saved = *slot;
      *slot = saved + h;
      const double up = exact_loglik(p, data);
      *slot = saved - h;
      const double dn = exact_loglik(p, data);
      *slot = saved;
      return (up - dn) / (2.0 * h);
    };

    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(fd(&p.visible_bias[i]) - grad.d_visible_bias[i]) < 1e-6);
    }
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(std::abs(fd(&p.hidden_bias[j]) - grad.d_hidden_bias[j]) < 1e-6);
    }
    for (std::size_t i = 0; i < 3; ++i) {
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(std::abs(fd(&p.weights(i, j)) - grad.d_weights(i, j)) < 1e-6);
      }
    }
  }
}

TEST_CASE("exact model expectation") {
  SUBCASE("zero parameters: independent fair bits") {
    const SufficientStats stats = exact_model_expectation(zero_params(3, 2));
    for (double v : stats.v_mean) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
    for (double v : stats.h_mean) CHECK(v == doctest::Approx(0.5).epsilon(1e-12));
    for (double v : stats.vh.values()) {
      CHECK(v == doctest::Approx(0.25).epsilon(1e-12));
    }
  }
  SUBCASE("complement symmetry under bias sign flips") {
    RbmParams p = zero_params(3, 2);
    p.visible_bias = {0.7, -0.2, 1.3};
    p.hidden_bias = {0.5, -1.1};
    const SufficientStats plus = exact_model_expectation(p);
    for (auto& v : p.visible_bias) v = -v;
    for (auto& v : p.hidden_bias) v = -v;
    const SufficientStats minus = exact_model_expectation(p);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(minus.v_mean[i] == doctest::Approx(1.0 - plus.v_mean[i]).epsilon(1e-12));
    }
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(minus.h_mean[j] == doctest::Approx(1.0 - plus.h_mean[j]).epsilon(1e-12));
    }
  }
  SUBCASE("long-chain binary Gibbs sampler agrees within 0.005") {
    // Independent MCMC oracle: both layers sampled binary, single long
    // chain, unlike the mean-field CD path.
    const RbmParams p = random_params(3, 2, 0.8, 77);
    const SufficientStats exact = exact_model_expectation(p);

    RngStream rng(123, stream_id(StreamKind::generic, 555));
    std::vector<double> v(3, 0.0), h(2, 0.0), prob;
    Matrix vh_acc(3, 2);
    std::vector<double> v_acc(3, 0.0), h_acc(2, 0.0);
    const std::size_t burn = 2000;
    const std::size_t samples = 1000000;
    for (std::size_t t = 0; t < burn + samples; ++t) {
      prob = hidden_conditional(p, v);
      for (std::size_t j = 0; j < 2; ++j) {
        h[j] = rng.bernoulli(prob[j]) ? 1.0 : 0.0;
      }
      prob = visible_conditional(p, h);
      for (std::size_t i = 0; i < 3; ++i) {
        v[i] = rng.bernoulli(prob[i]) ? 1.0 : 0.0;
      }
      if (t >= burn) {
        for (std::size_t i = 0; i < 3; ++i) {
          v_acc[i] += v[i];
          for (std::size_t j = 0; j < 2; ++j) vh_acc(i, j) += v[i] * h[j];
        }
        for (std::size_t j = 0; j < 2; ++j) h_acc[j] += h[j];
      }
    }
    const double inv = 1.0 / static_cast<double>(samples);
    for (std::size_t i = 0; i < 3; ++i) {
      CHECK(std::abs(v_acc[i] * inv - exact.v_mean[i]) < 0.005);
      for (std::size_t j = 0; j < 2; ++j) {
        CHECK(std::abs(vh_acc(i, j) * inv - exact.vh(i, j)) < 0.005);
      }
    }
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(std::abs(h_acc[j] * inv - exact.h_mean[j]) < 0.005);
    }
  }
}

TEST_CASE("per-unit conditionals factorize the enumerated joint") {
  const RbmParams p = random_params(3, 3, 1.2, 11);
  const double log_z = exact_log_partition(p);
  std::vector<double> v = {1.0, 0.0, 1.0};

  // p(h | v) from enumeration vs the product of per-unit conditionals.
  const auto unit_probs = hidden_conditional(p, v);
  std::vector<double> h(3);
  double marginal = 0.0;
  std::vector<double> joint;
  for (std::size_t hb = 0; hb < 8; ++hb) {
    for (std::size_t j = 0; j < 3; ++j) h[j] = (hb >> j) & 1u ? 1.0 : 0.0;
    joint.push_back(std::exp(-energy(p, v, h) - log_z));
    marginal += joint.back();
  }
  for (std::size_t hb = 0; hb < 8; ++hb) {
    double product = 1.0;
    for (std::size_t j = 0; j < 3; ++j) {
      const bool on = (hb >> j) & 1u;
      product *= on ? unit_probs[j] : 1.0 - unit_probs[j];
    }
    CHECK(std::abs(joint[hb] / marginal - product) < 1e-10);
  }
}

TEST_CASE("cd statistics") {
  SUBCASE("zero params, all-ones batch: data vh is 0.5") {
    const RbmParams p = zero_params(3, 2);
    DataMatrix data;
    data.values = Matrix(4, 3, 1.0);
    const auto rows = iota_rows(4);
    const StreamFactory streams(1, stream_id(StreamKind::cd_chain, 0, 0));
    const auto [data_stats, model_stats] =
        cd_statistics(p, data, rows, 1, streams);
    for (double v : data_stats.vh.values()) CHECK(v == 0.5);
    for (double v : data_stats.v_mean) CHECK(v == 1.0);
    for (double v : data_stats.h_mean) CHECK(v == 0.5);
    for (double v : model_stats.vh.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  SUBCASE("model stats stay in [0,1] on random models") {
    const RbmParams p = random_params(5, 4, 1.5, 21);
    const DataMatrix data = random_binary_rows(32, 5, 22);
    const auto rows = iota_rows(32);
    const StreamFactory streams(2, stream_id(StreamKind::cd_chain, 0, 0));
    const auto [data_stats, model_stats] =
        cd_statistics(p, data, rows, 3, streams);
    for (double v : model_stats.vh.values()) {
      CHECK(v >= 0.0);
      CHECK(v <= 1.0);
    }
  }
  SUBCASE("k must be positive") {
    const RbmParams p = zero_params(2, 2);
    const DataMatrix data = random_binary_rows(4, 2, 1);
    const auto rows = iota_rows(4);
    const StreamFactory streams(1, 0);
    CHECK_THROWS_AS(cd_statistics(p, data, rows, 0, streams), UsageError);
  }
}

TEST_CASE("parallel cd statistics match the serial reference bitwise") {
  const RbmParams p = random_params(7, 5, 1.0, 33);
  const DataMatrix data = random_binary_rows(64, 7, 34);
  const auto rows = iota_rows(64);
  const StreamFactory streams(9, stream_id(StreamKind::cd_chain, 2, 4));

  const auto serial = reference::cd_statistics(p, data, rows, 2, streams);

  for (int threads : {1, 2, 3}) {
    set_thread_override(threads);
    const auto parallel = cd_statistics(p, data, rows, 2, streams);
    CHECK(parallel.first.vh == serial.first.vh);
    CHECK(parallel.first.v_mean == serial.first.v_mean);
    CHECK(parallel.first.h_mean == serial.first.h_mean);
    CHECK(parallel.second.vh == serial.second.vh);
    CHECK(parallel.second.v_mean == serial.second.v_mean);
    CHECK(parallel.second.h_mean == serial.second.h_mean);
  }
  set_thread_override(0);
}

TEST_CASE("cd statistics converge to the exact expectation") {
  // Smaller sibling of the acceptance run: 2e4 chains of CD-50. The chain
  // keeps mean-field visibles, which carries a small model-dependent bias,
  // so the check uses a fixed weak-weight model.
  RbmParams p = zero_params(3, 2);
  p.visible_bias = {0.4, -0.3, 0.2};
  p.hidden_bias = {-0.35, 0.25};
  p.weights(0, 0) = 0.06;
  p.weights(0, 1) = -0.04;
  p.weights(1, 0) = 0.03;
  p.weights(1, 1) = 0.05;
  p.weights(2, 0) = -0.05;
  p.weights(2, 1) = 0.04;
  const SufficientStats exact = exact_model_expectation(p);

  const std::size_t chains = 20000;
  DataMatrix starts = random_binary_rows(chains, 3, 90);
  const auto rows = iota_rows(chains);
  const StreamFactory streams(4, stream_id(StreamKind::cd_chain, 0, 0));
  const auto [data_stats, model_stats] =
      cd_statistics(p, starts, rows, 50, streams);

  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(std::abs(model_stats.v_mean[i] - exact.v_mean[i]) < 0.02);
    for (std::size_t j = 0; j < 2; ++j) {
      CHECK(std::abs(model_stats.vh(i, j) - exact.vh(i, j)) < 0.02);
    }
  }
}
