#include "nrbm/rbm.hpp"

#include <algorithm>
#include <cmath>

#include "nrbm/errors.hpp"
#include "nrbm/parallel.hpp"

namespace nrbm {

void RbmParams::check() const {
  if (n_visible() < 1 || n_hidden() < 1) {
    throw DimError("RbmParams: need at least one visible and one hidden unit");
  }
  if (weights.rows() != n_visible() || weights.cols() != n_hidden()) {
    throw DimError("RbmParams: weight matrix shape does not match biases");
  }
  for (double v : visible_bias) {
    if (!std::isfinite(v)) throw NumericError("RbmParams: non-finite visible bias");
  }
  for (double v : hidden_bias) {
    if (!std::isfinite(v)) throw NumericError("RbmParams: non-finite hidden bias");
  }
  if (!weights.all_finite()) {
    throw NumericError("RbmParams: non-finite weight");
  }
}

double sigmoid(double x) {
  // Exponentiate only negative magnitudes so large |x| saturates cleanly.
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

double energy(const RbmParams& params, std::span<const double> v,
              std::span<const double> h) {
  const std::size_t n = params.n_visible();
  const std::size_t k = params.n_hidden();
  if (v.size() != n || h.size() != k) {
    throw DimError("energy: configuration does not match model dimensions");
  }
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) acc += params.visible_bias[i] * v[i];
  for (std::size_t j = 0; j < k; ++j) acc += params.hidden_bias[j] * h[j];
  for (std::size_t i = 0; i < n; ++i) {
    if (v[i] == 0.0) continue;
    const double* w_row = params.weights.row(i);
    double dot = 0.0;
    for (std::size_t j = 0; j < k; ++j) dot += w_row[j] * h[j];
    acc += v[i] * dot;
  }
  return -acc;
}

void hidden_conditional(const RbmParams& params, const double* v, double* out) {
  const std::size_t n = params.n_visible();
  const std::size_t k = params.n_hidden();
  for (std::size_t j = 0; j < k; ++j) out[j] = params.hidden_bias[j];
  for (std::size_t i = 0; i < n; ++i) {
    const double vi = v[i];
    if (vi == 0.0) continue;
    const double* w_row = params.weights.row(i);
    for (std::size_t j = 0; j < k; ++j) out[j] += vi * w_row[j];
  }
  for (std::size_t j = 0; j < k; ++j) out[j] = sigmoid(out[j]);
}

std::vector<double> hidden_conditional(const RbmParams& params,
                                       std::span<const double> v) {
  if (v.size() != params.n_visible()) {
    throw DimError("hidden_conditional: visible vector length mismatch");
  }
  std::vector<double> out(params.n_hidden());
  hidden_conditional(params, v.data(), out.data());
  return out;
}

void visible_conditional(const RbmParams& params, const double* h, double* out) {
  const std::size_t n = params.n_visible();
  const std::size_t k = params.n_hidden();
  for (std::size_t i = 0; i < n; ++i) {
    const double* w_row = params.weights.row(i);
    double acc = params.visible_bias[i];
    for (std::size_t j = 0; j < k; ++j) acc += w_row[j] * h[j];
    out[i] = sigmoid(acc);
  }
}

std::vector<double> visible_conditional(const RbmParams& params,
                                        std::span<const double> h) {
  if (h.size() != params.n_hidden()) {
    throw DimError("visible_conditional: hidden vector length mismatch");
  }
  std::vector<double> out(params.n_visible());
  visible_conditional(params, h.data(), out.data());
  return out;
}

std::vector<double> sample_bernoulli(std::span<const double> probs,
                                     RngStream& rng) {
  std::vector<double> out(probs.size());
  for (std::size_t i = 0; i < probs.size(); ++i) {
    out[i] = rng.bernoulli(probs[i]) ? 1.0 : 0.0;
  }
  return out;
}

namespace {

// One CD chain for a single row. Writes the data-side hidden probabilities
// and the final-step mean-field (v, h) probabilities.
void cd_chain_row(const RbmParams& params, const double* v0, int k_steps,
                  RngStream rng, double* h_data, double* v_model,
                  double* h_model) {
  const std::size_t k = params.n_hidden();
  hidden_conditional(params, v0, h_data);

  std::vector<double> h_prob(h_data, h_data + k);
  std::vector<double> h_sample(k);
  for (int step = 0; step < k_steps; ++step) {
    for (std::size_t j = 0; j < k; ++j) {
      h_sample[j] = rng.bernoulli(h_prob[j]) ? 1.0 : 0.0;
    }
    visible_conditional(params, h_sample.data(), v_model);
    hidden_conditional(params, v_model, h_prob.data());
  }
  std::copy(h_prob.begin(), h_prob.end(), h_model);
}

SufficientStats make_stats(std::size_t n, std::size_t k, std::size_t count) {
  SufficientStats s;
  s.vh = Matrix(n, k);
  s.v_mean.assign(n, 0.0);
  s.h_mean.assign(k, 0.0);
  s.count = count;
  return s;
}

// stats.vh[n][k] = mean_m v[m][n] * h[m][k], accumulated per entry in row
// order m = 0..B-1 so the result does not depend on the thread partition.
void accumulate_stats(const std::vector<const double*>& v_rows,
                      const Matrix& h_rows, SufficientStats& stats) {
  const std::size_t batch = v_rows.size();
  const std::size_t n = stats.v_mean.size();
  const std::size_t k = stats.h_mean.size();
  const double inv = 1.0 / static_cast<double>(batch);

#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (std::ptrdiff_t i = 0; i < static_cast<std::ptrdiff_t>(n); ++i) {
    double* vh_row = stats.vh.row(static_cast<std::size_t>(i));
    double v_sum = 0.0;
    for (std::size_t m = 0; m < batch; ++m) {
      const double vi = v_rows[m][i];
      v_sum += vi;
      if (vi == 0.0) continue;
      const double* h = h_rows.row(m);
      for (std::size_t j = 0; j < k; ++j) vh_row[j] += vi * h[j];
    }
    for (std::size_t j = 0; j < k; ++j) vh_row[j] *= inv;
    stats.v_mean[static_cast<std::size_t>(i)] = v_sum * inv;
  }

  for (std::size_t j = 0; j < k; ++j) {
    double h_sum = 0.0;
    for (std::size_t m = 0; m < batch; ++m) h_sum += h_rows(m, j);
    stats.h_mean[j] = h_sum * inv;
  }
}

}  // namespace

std::pair<SufficientStats, SufficientStats> cd_statistics(
    const RbmParams& params, const DataMatrix& data,
    std::span<const std::size_t> rows, int k_steps,
    const StreamFactory& streams) {
  params.check();
  if (data.cols() != params.n_visible()) {
    throw DimError("cd_statistics: data width does not match visible layer");
  }
  if (rows.empty()) throw DimError("cd_statistics: empty batch");
  if (k_steps < 1) throw UsageError("cd_statistics: k_steps must be >= 1");

  const std::size_t batch = rows.size();
  const std::size_t n = params.n_visible();
  const std::size_t k = params.n_hidden();

  Matrix h_data(batch, k);
  Matrix v_model(batch, n);
  Matrix h_model(batch, k);

  // Phase 1: independent per-row chains, each on its own stream.
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (std::ptrdiff_t m = 0; m < static_cast<std::ptrdiff_t>(batch); ++m) {
    const std::size_t mi = static_cast<std::size_t>(m);
    cd_chain_row(params, data.values.row(rows[mi]), k_steps,
                 streams.stream(mi), h_data.row(mi), v_model.row(mi),
                 h_model.row(mi));
  }

  // Phase 2: fixed-order reductions.
  SufficientStats data_stats = make_stats(n, k, batch);
  SufficientStats model_stats = make_stats(n, k, batch);

  std::vector<const double*> v_rows(batch);
  for (std::size_t m = 0; m < batch; ++m) v_rows[m] = data.values.row(rows[m]);
  accumulate_stats(v_rows, h_data, data_stats);

  for (std::size_t m = 0; m < batch; ++m) v_rows[m] = v_model.row(m);
  accumulate_stats(v_rows, h_model, model_stats);

  return {std::move(data_stats), std::move(model_stats)};
}

// --- Exact oracles ---

namespace {

void require_oracle_size(const RbmParams& params) {
  if (params.n_visible() + params.n_hidden() > kOracleMaxUnits) {
    throw OracleSizeError("exact oracle requires N+K <= 20");
  }
}

void unpack_bits(std::size_t bits, std::vector<double>& out) {
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = (bits >> i) & 1u ? 1.0 : 0.0;
  }
}

// log sum_h exp(-E(v,h)) by explicit enumeration of the hidden layer.
double log_unnormalized_marginal(const RbmParams& params,
                                 const std::vector<double>& v) {
  const std::size_t k = params.n_hidden();
  std::vector<double> h(k);
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(std::size_t(1) << k);
  for (std::size_t hb = 0; hb < (std::size_t(1) << k); ++hb) {
    unpack_bits(hb, h);
    const double t = -energy(params, v, h);
    terms.push_back(t);
    max_term = std::max(max_term, t);
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  return max_term + std::log(acc);
}

}  // namespace

double exact_log_partition(const RbmParams& params) {
  params.check();
  require_oracle_size(params);
  const std::size_t n = params.n_visible();
  std::vector<double> v(n);
  double max_term = -std::numeric_limits<double>::infinity();
  std::vector<double> terms;
  terms.reserve(std::size_t(1) << n);
  for (std::size_t vb = 0; vb < (std::size_t(1) << n); ++vb) {
    unpack_bits(vb, v);
    terms.push_back(log_unnormalized_marginal(params, v));
    max_term = std::max(max_term, terms.back());
  }
  double acc = 0.0;
  for (double t : terms) acc += std::exp(t - max_term);
  return max_term + std::log(acc);
}

double exact_partition(const RbmParams& params) {
  return std::exp(exact_log_partition(params));
}

double exact_loglik(const RbmParams& params, const DataMatrix& data) {
  params.check();
  require_oracle_size(params);
  if (data.cols() != params.n_visible()) {
    throw DimError("exact_loglik: data width does not match visible layer");
  }
  const double log_z = exact_log_partition(params);
  std::vector<double> v(params.n_visible());
  double acc = 0.0;
  for (std::size_t r = 0; r < data.rows(); ++r) {
    std::copy_n(data.values.row(r), v.size(), v.begin());
    acc += log_unnormalized_marginal(params, v) - log_z;
  }
  return acc / static_cast<double>(data.rows());
}

SufficientStats exact_model_expectation(const RbmParams& params) {
  params.check();
  require_oracle_size(params);
  const std::size_t n = params.n_visible();
  const std::size_t k = params.n_hidden();
  const double log_z = exact_log_partition(params);

  SufficientStats stats = make_stats(n, k, 1);
  std::vector<double> v(n), h(k);
  for (std::size_t vb = 0; vb < (std::size_t(1) << n); ++vb) {
    unpack_bits(vb, v);
    for (std::size_t hb = 0; hb < (std::size_t(1) << k); ++hb) {
      unpack_bits(hb, h);
      const double p = std::exp(-energy(params, v, h) - log_z);
      for (std::size_t i = 0; i < n; ++i) {
        if (v[i] == 0.0) continue;
        stats.v_mean[i] += p;
        double* vh_row = stats.vh.row(i);
        for (std::size_t j = 0; j < k; ++j) vh_row[j] += p * h[j];
      }
      for (std::size_t j = 0; j < k; ++j) stats.h_mean[j] += p * h[j];
    }
  }
  return stats;
}

LoglikGradient exact_loglik_gradient(const RbmParams& params,
                                     const DataMatrix& data) {
  params.check();
  require_oracle_size(params);
  if (data.cols() != params.n_visible()) {
    throw DimError("exact_loglik_gradient: data width mismatch");
  }
  const std::size_t n = params.n_visible();
  const std::size_t k = params.n_hidden();
  const std::size_t m = data.rows();

  LoglikGradient grad;
  grad.d_visible_bias.assign(n, 0.0);
  grad.d_hidden_bias.assign(k, 0.0);
  grad.d_weights = Matrix(n, k);

  std::vector<double> h_prob(k);
  for (std::size_t r = 0; r < m; ++r) {
    const double* v = data.values.row(r);
    hidden_conditional(params, v, h_prob.data());
    for (std::size_t i = 0; i < n; ++i) {
      grad.d_visible_bias[i] += v[i];
      if (v[i] == 0.0) continue;
      double* w_row = grad.d_weights.row(i);
      for (std::size_t j = 0; j < k; ++j) w_row[j] += v[i] * h_prob[j];
    }
    for (std::size_t j = 0; j < k; ++j) grad.d_hidden_bias[j] += h_prob[j];
  }
  const double inv = 1.0 / static_cast<double>(m);
  const SufficientStats model = exact_model_expectation(params);
  for (std::size_t i = 0; i < n; ++i) {
    grad.d_visible_bias[i] = grad.d_visible_bias[i] * inv - model.v_mean[i];
    double* w_row = grad.d_weights.row(i);
    const double* m_row = model.vh.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      w_row[j] = w_row[j] * inv - m_row[j];
    }
  }
  for (std::size_t j = 0; j < k; ++j) {
    grad.d_hidden_bias[j] = grad.d_hidden_bias[j] * inv - model.h_mean[j];
  }
  return grad;
}

}  // namespace nrbm
