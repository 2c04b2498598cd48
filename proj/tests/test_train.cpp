#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <numeric>

#include "nrbm/errors.hpp"
#include "nrbm/parallel.hpp"
#include "nrbm/rbm.hpp"
#include "nrbm/reference.hpp"
#include "nrbm/train.hpp"
#include "support/synthetic.hpp"

using namespace nrbm;
using testsupport::make_parts_data;

namespace {

RbmParams make_params(std::size_t n, std::size_t k) {
  RbmParams p;
  p.visible_bias.assign(n, 0.0);
  p.hidden_bias.assign(k, 0.0);
  p.weights = Matrix(n, k);
  return p;
}

}  // namespace

TEST_CASE("barrier penalty") {
  SUBCASE("piecewise values: f(-2)=4, f(3)=0") {
    Matrix w(1, 2);
    w(0, 0) = -2.0;
    w(0, 1) = 3.0;
    CHECK(barrier_penalty(w, 2.0) == doctest::Approx(4.0).epsilon(1e-15));
  }
  SUBCASE("inactive on nonnegative weights") {
    Matrix w(3, 3, 0.25);
    CHECK(barrier_penalty(w, 5.0) == 0.0);
  }
  SUBCASE("hand evaluation") {
    Matrix w(1, 2);
    w(0, 0) = -1.0;
    w(0, 1) = -2.0;
    CHECK(barrier_penalty(w, 1.0) == doctest::Approx(2.5).epsilon(1e-15));
  }
  SUBCASE("gradient matches finite differences away from zero") {
    RngStream rng(8, stream_id(StreamKind::generic, 3));
    Matrix w(4, 4);
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        double v = rng.uniform(-2.0, 2.0);
        if (std::abs(v) < 0.1) v = v < 0 ? v - 0.1 : v + 0.1;
        w(i, j) = v;
      }
    }
    const double alpha = 0.7;
    const double h = 1e-6;
    for (std::size_t i = 0; i < 4; ++i) {
      for (std::size_t j = 0; j < 4; ++j) {
        const double saved = w(i, j);
        w(i, j) = saved + h;
        const double up = barrier_penalty(w, alpha);
        w(i, j) = saved - h;
        const double dn = barrier_penalty(w, alpha);
        w(i, j) = saved;
        const double fd = (up - dn) / (2.0 * h);
        const double analytic = alpha * std::min(saved, 0.0);
        CHECK(std::abs(fd - analytic) < 1e-6);
      }
    }
  }
}

TEST_CASE("negative part") {
  Matrix w(1, 3);
  w(0, 0) = -0.5;
  w(0, 1) = 0.3;
  w(0, 2) = 0.0;
  const Matrix neg = negative_part(w);
  CHECK(neg(0, 0) == -0.5);
  CHECK(neg(0, 1) == 0.0);
  CHECK(neg(0, 2) == 0.0);
}

TEST_CASE("init params") {
  TrainConfig config;
  config.hidden_count = 3;
  config.seed = 5;

  SUBCASE("column mean 0.5 gives zero bias") {
    DataMatrix data;
    data.values = Matrix(2, 2);
    data.values(0, 0) = 0.0;
    data.values(1, 0) = 1.0;
    data.values(0, 1) = 0.5;
    data.values(1, 1) = 0.5;
    const RbmParams p = init_params(data, config);
    CHECK(p.visible_bias[0] == doctest::Approx(0.0).epsilon(1e-12));
    CHECK(p.visible_bias[1] == doctest::Approx(0.0).epsilon(1e-12));
  }
  SUBCASE("saturated column mean is clamped") {
    DataMatrix data;
    data.values = Matrix(2, 1, 1.0);
    const RbmParams p = init_params(data, config);
    CHECK(p.visible_bias[0] == doctest::Approx(9.21024036697585).epsilon(1e-10));
  }
  SUBCASE("weights are uniform in [0, weight_init_max]") {
    DataMatrix data;
    data.values = Matrix(5, 20, 0.5);
    const RbmParams p = init_params(data, config);
    for (double w : p.weights.values()) {
      CHECK(w >= 0.0);
      CHECK(w <= config.weight_init_max);
    }
    CHECK(p.hidden_bias[0] == -2.0);
  }
}

TEST_CASE("apply_update hand cases") {
  TrainConfig config;
  config.eta = 0.1;
  config.hidden_count = 1;

  RbmParams p = make_params(1, 1);
  p.weights(0, 0) = -0.1;

  SufficientStats stats;
  stats.vh = Matrix(1, 1, 0.4);
  stats.v_mean = {0.5};
  stats.h_mean = {0.5};
  stats.count = 1;

  SUBCASE("zero gradient difference, barrier pushes toward zero") {
    config.alpha = 1.0;
    apply_update(p, stats, stats, config);
    CHECK(p.weights(0, 0) == doctest::Approx(-0.09).epsilon(1e-15));
  }
  SUBCASE("nonnegative weight feels no barrier") {
    config.alpha = 1.0;
    p.weights(0, 0) = 0.2;
    apply_update(p, stats, stats, config);
    CHECK(p.weights(0, 0) == 0.2);
  }
  SUBCASE("alpha zero is the plain rule") {
    config.alpha = 0.0;
    SufficientStats model = stats;
    model.vh(0, 0) = 0.1;
    apply_update(p, stats, model, config);
    CHECK(p.weights(0, 0) == doctest::Approx(-0.1 + 0.1 * 0.3).epsilon(1e-15));
  }
}

TEST_CASE("training is deterministic") {
  const DataMatrix data = make_parts_data(60, 8, 2, 0.5, 0.0, 17);
  TrainConfig config;
  config.hidden_count = 4;
  config.epochs = 3;
  config.batch_size = 16;
  config.seed = 99;
  config.alpha = 0.1;

  auto [p1, t1] = train(data, config);
  auto [p2, t2] = train(data, config);
  CHECK(p1.weights == p2.weights);
  CHECK(p1.visible_bias == p2.visible_bias);
  CHECK(p1.hidden_bias == p2.hidden_bias);
  CHECK(t1.records.size() == config.epochs + 1);
}

TEST_CASE("alpha = 0 training is bit-identical to the plain RBM path") {
  const DataMatrix data = make_parts_data(50, 6, 3, 0.5, 0.02, 23);
  TrainConfig config;
  config.hidden_count = 3;
  config.epochs = 2;
  config.batch_size = 10;
  config.seed = 7;
  config.alpha = 0.0;

  auto [trained, trace] = train(data, config);

  reference::PlainTrainSettings settings;
  settings.eta = config.eta;
  settings.cd_k = config.cd_k;
  settings.batch_size = config.batch_size;
  settings.epochs = config.epochs;
  settings.seed = config.seed;
  const RbmParams plain =
      reference::train_plain_rbm(data, init_params(data, config), settings);

  CHECK(trained.weights == plain.weights);
  CHECK(trained.visible_bias == plain.visible_bias);
  CHECK(trained.hidden_bias == plain.hidden_bias);
}

TEST_CASE("non-finite updates abort with NumericError") {
  const DataMatrix data = make_parts_data(20, 4, 2, 0.5, 0.0, 3);
  TrainConfig config;
  config.hidden_count = 2;
  config.epochs = 50;
  config.batch_size = 10;
  config.eta = 1e155;  // blows up the biases within a few steps
  CHECK_THROWS_AS(train(data, config), NumericError);
}

TEST_CASE("hidden posteriors") {
  const DataMatrix data = make_parts_data(30, 6, 3, 0.5, 0.0, 29);
  SUBCASE("zero-weight model gives sig(b) everywhere") {
    RbmParams p = make_params(6, 2);
    p.hidden_bias = {-1.0, 2.0};
    const Matrix post = hidden_posteriors(p, data);
    for (std::size_t r = 0; r < post.rows(); ++r) {
      CHECK(post(r, 0) == sigmoid(-1.0));
      CHECK(post(r, 1) == sigmoid(2.0));
    }
  }
  SUBCASE("pure map: equal inputs, equal outputs; rows match conditionals") {
    TrainConfig config;
    config.hidden_count = 3;
    config.epochs = 2;
    config.batch_size = 10;
    auto [params, trace] = train(data, config);
    const Matrix a = hidden_posteriors(params, data);
    const Matrix b = hidden_posteriors(params, data);
    CHECK(a == b);
    for (std::size_t r = 0; r < data.rows(); ++r) {
      const auto probs = hidden_conditional(
          params, std::span<const double>(data.values.row(r), data.cols()));
      for (std::size_t j = 0; j < 3; ++j) {
        CHECK(a(r, j) == probs[j]);
        CHECK(a(r, j) > 0.0);
        CHECK(a(r, j) < 1.0);
      }
    }
  }
  SUBCASE("matches the serial reference bitwise") {
    TrainConfig config;
    config.hidden_count = 4;
    config.epochs = 1;
    config.batch_size = 10;
    auto [params, trace] = train(data, config);
    for (int threads : {1, 2, 3}) {
      set_thread_override(threads);
      CHECK(hidden_posteriors(params, data) ==
            reference::hidden_posteriors(params, data));
    }
    set_thread_override(0);
  }
}

TEST_CASE("dead units") {
  SUBCASE("all-zero column is dead under every threshold") {
    RbmParams p = make_params(10, 2);
    for (std::size_t i = 0; i < 10; ++i) p.weights(i, 1) = 0.5;
    DeadUnitConfig config;
    config.n_visible = 10;
    const DeadUnitReport report = dead_units(p, config);
    for (std::size_t t = 0; t < config.thresholds.size(); ++t) {
      CHECK(report.dead_mask_per_threshold[t][0]);
      CHECK_FALSE(report.dead_mask_per_threshold[t][1]);
      CHECK(report.used_per_threshold[t] == 1);
    }
    CHECK(report.averaged_used == 1.0);
  }
  SUBCASE("column of 0.005 entries is dead under the whole default set") {
    RbmParams p = make_params(10, 1);
    for (std::size_t i = 0; i < 10; ++i) p.weights(i, 0) = 0.005;
    DeadUnitConfig config;
    config.n_visible = 10;
    const DeadUnitReport report = dead_units(p, config);
    // l1/N = 0.005 <= tau for every tau in {0.01,...,0.06}
    for (std::size_t used : report.used_per_threshold) CHECK(used == 0);
  }
  SUBCASE("identical columns share their fate") {
    RngStream rng(4, stream_id(StreamKind::generic, 77));
    for (int trial = 0; trial < 10; ++trial) {
      RbmParams p = make_params(6, 4);
      for (std::size_t i = 0; i < 6; ++i) {
        const double v = rng.uniform(0.0, 0.2);
        for (std::size_t j = 0; j < 4; ++j) p.weights(i, j) = v;
      }
      DeadUnitConfig config;
      config.n_visible = 6;
      const DeadUnitReport report = dead_units(p, config);
      for (std::size_t used : report.used_per_threshold) {
        CHECK((used == 0 || used == 4));
      }
    }
  }
  SUBCASE("monotone: larger tau never uses more units") {
    RngStream rng(12, stream_id(StreamKind::generic, 78));
    for (int trial = 0; trial < 25; ++trial) {
      RbmParams p = make_params(8, 5);
      for (std::size_t i = 0; i < 8; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
          p.weights(i, j) = rng.uniform(-0.1, 0.1);
        }
      }
      DeadUnitConfig config;
      config.n_visible = 8;
      const DeadUnitReport report = dead_units(p, config);
      for (std::size_t t = 1; t < report.used_per_threshold.size(); ++t) {
        CHECK(report.used_per_threshold[t] <= report.used_per_threshold[t - 1]);
      }
    }
  }
}

TEST_CASE("weight histogram") {
  SUBCASE("all-zero weights fall into the bin containing zero") {
    RbmParams p = make_params(3, 4);
    const std::vector<double> edges = {-1.0, -0.5, 0.0, 0.5, 1.0};
    const auto counts = weight_histogram(p, edges);
    CHECK(counts == std::vector<std::size_t>{0, 0, 12, 0});
  }
  SUBCASE("counts always sum to N*K, out-of-range clamps to end bins") {
    RngStream rng(6, stream_id(StreamKind::generic, 79));
    const std::vector<double> edges = {-0.1, 0.0, 0.1};
    for (int trial = 0; trial < 20; ++trial) {
      RbmParams p = make_params(5, 5);
      for (std::size_t i = 0; i < 5; ++i) {
        for (std::size_t j = 0; j < 5; ++j) {
          p.weights(i, j) = rng.uniform(-3.0, 3.0);
        }
      }
      const auto counts = weight_histogram(p, edges);
      CHECK(std::accumulate(counts.begin(), counts.end(), std::size_t{0}) ==
            25);
    }
  }
  SUBCASE("edges must increase") {
    RbmParams p = make_params(2, 2);
    CHECK_THROWS_AS(weight_histogram(p, {0.0, 0.0, 1.0}), UsageError);
  }
}

TEST_CASE("trace records initialization plus one record per epoch") {
  const DataMatrix data = make_parts_data(40, 6, 3, 0.5, 0.0, 31);
  TrainConfig config;
  config.hidden_count = 3;
  config.epochs = 4;
  config.batch_size = 20;
  auto [params, trace] = train(data, config);
  REQUIRE(trace.records.size() == 5);
  CHECK(trace.records.front().epoch == 0);
  CHECK(trace.records.back().epoch == 4);
  for (const EpochRecord& rec : trace.records) {
    CHECK(std::accumulate(rec.weight_hist.begin(), rec.weight_hist.end(),
                          std::size_t{0}) == 18);
    CHECK(rec.recon_mse >= 0.0);
  }
}

TEST_CASE("likelihood improves on oracle-sized parts data") {
  // Tiny sibling of the acceptance run: single seed, short training.
  const DataMatrix data = make_parts_data(200, 6, 3, 0.5, 0.02, 41);
  TrainConfig config;
  config.hidden_count = 3;
  config.epochs = 30;
  config.batch_size = 50;
  config.alpha = 0.1;
  config.seed = 2;

  const RbmParams at_init = init_params(data, config);
  auto [trained, trace] = train(data, config);
  CHECK(exact_loglik(trained, data) > exact_loglik(at_init, data));
}
