#include "nrbm/reference.hpp"

#include <cmath>
#include <vector>

#include "nrbm/errors.hpp"

namespace nrbm::reference {

namespace {

SufficientStats zero_stats(std::size_t n, std::size_t k, std::size_t count) {
  SufficientStats s;
  s.vh = Matrix(n, k);
  s.v_mean.assign(n, 0.0);
  s.h_mean.assign(k, 0.0);
  s.count = count;
  return s;
}

void add_outer(SufficientStats& stats, const double* v, const double* h) {
  const std::size_t n = stats.v_mean.size();
  const std::size_t k = stats.h_mean.size();
  for (std::size_t i = 0; i < n; ++i) {
    stats.v_mean[i] += v[i];
    double* row = stats.vh.row(i);
    for (std::size_t j = 0; j < k; ++j) row[j] += v[i] * h[j];
  }
  for (std::size_t j = 0; j < k; ++j) stats.h_mean[j] += h[j];
}

void scale(SufficientStats& stats, double factor) {
  for (double& x : stats.v_mean) x *= factor;
  for (double& x : stats.h_mean) x *= factor;
  for (std::size_t i = 0; i < stats.v_mean.size(); ++i) {
    double* row = stats.vh.row(i);
    for (std::size_t j = 0; j < stats.h_mean.size(); ++j) row[j] *= factor;
  }
}

}  // namespace

std::pair<SufficientStats, SufficientStats> cd_statistics(
    const RbmParams& params, const DataMatrix& data,
    std::span<const std::size_t> rows, int k_steps,
    const StreamFactory& streams) {
  params.check();
  if (rows.empty()) throw DimError("cd_statistics: empty batch");
  const std::size_t n = params.n_visible();
  const std::size_t k = params.n_hidden();

  SufficientStats data_stats = zero_stats(n, k, rows.size());
  SufficientStats model_stats = zero_stats(n, k, rows.size());

  std::vector<double> h_prob(k), h_sample(k), v_prob(n), h_data(k);
  for (std::size_t m = 0; m < rows.size(); ++m) {
    const double* v0 = data.values.row(rows[m]);
    RngStream rng = streams.stream(m);

    hidden_conditional(params, v0, h_data.data());
    h_prob = h_data;
    for (int step = 0; step < k_steps; ++step) {
      for (std::size_t j = 0; j < k; ++j) {
        h_sample[j] = rng.bernoulli(h_prob[j]) ? 1.0 : 0.0;
      }
      visible_conditional(params, h_sample.data(), v_prob.data());
      hidden_conditional(params, v_prob.data(), h_prob.data());
    }
    add_outer(data_stats, v0, h_data.data());
    add_outer(model_stats, v_prob.data(), h_prob.data());
  }

  const double inv = 1.0 / static_cast<double>(rows.size());
  scale(data_stats, inv);
  scale(model_stats, inv);
  return {std::move(data_stats), std::move(model_stats)};
}

Matrix hidden_posteriors(const RbmParams& params, const DataMatrix& data) {
  params.check();
  if (data.cols() != params.n_visible()) {
    throw DimError("hidden_posteriors: data width does not match model");
  }
  Matrix out(data.rows(), params.n_hidden());
  for (std::size_t r = 0; r < data.rows(); ++r) {
    hidden_conditional(params, data.values.row(r), out.row(r));
  }
  return out;
}

RbmParams train_plain_rbm(const DataMatrix& data, const RbmParams& init,
                          const PlainTrainSettings& settings) {
  RbmParams params = init;
  const std::size_t n = params.n_visible();
  const std::size_t k = params.n_hidden();

  for (std::size_t epoch = 0; epoch < settings.epochs; ++epoch) {
    const BatchPlan plan = make_batches(data.rows(), settings.batch_size,
                                        settings.seed, epoch);
    for (std::size_t b = 0; b < plan.num_batches(); ++b) {
      const StreamFactory streams(
          settings.seed, stream_id(StreamKind::cd_chain, epoch, b));
      auto [data_stats, model_stats] = reference::cd_statistics(
          params, data, plan.batch(b), settings.cd_k, streams);
      for (std::size_t i = 0; i < n; ++i) {
        double* w = params.weights.row(i);
        const double* d = data_stats.vh.row(i);
        const double* m = model_stats.vh.row(i);
        for (std::size_t j = 0; j < k; ++j) {
          w[j] += settings.eta * (d[j] - m[j]);
        }
        params.visible_bias[i] +=
            settings.eta * (data_stats.v_mean[i] - model_stats.v_mean[i]);
      }
      for (std::size_t j = 0; j < k; ++j) {
        params.hidden_bias[j] +=
            settings.eta * (data_stats.h_mean[j] - model_stats.h_mean[j]);
      }
    }
  }
  return params;
}

}  // namespace nrbm::reference
