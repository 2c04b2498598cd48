#include "nrbm/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "nrbm/errors.hpp"
#include "nrbm/parallel.hpp"

namespace nrbm {

void TrainConfig::validate() const {
  if (!(eta > 0.0)) throw UsageError("learning rate must be > 0");
  if (!(alpha >= 0.0)) throw UsageError("barrier strength must be >= 0");
  if (cd_k < 1) throw UsageError("cd_k must be >= 1");
  if (batch_size < 1) throw UsageError("batch size must be >= 1");
  if (epochs < 1) throw UsageError("epochs must be >= 1");
  if (hidden_count < 1) throw UsageError("hidden_count must be >= 1");
  if (!(weight_init_max > 0.0)) throw UsageError("weight_init_max must be > 0");
}

std::vector<double> DeadUnitConfig::default_thresholds() {
  return {0.01, 0.02, 0.03, 0.04, 0.05, 0.06};
}

std::vector<double> default_trace_bin_edges() {
  // 101 bins of width 0.01 spanning [-0.505, 0.505); bin 50 is the
  // near-zero bin [-0.005, 0.005).
  std::vector<double> edges;
  edges.reserve(102);
  for (int i = 0; i <= 101; ++i) edges.push_back(-0.505 + 0.01 * i);
  return edges;
}

double barrier_penalty(const Matrix& weights, double alpha) {
  if (!(alpha >= 0.0)) throw UsageError("barrier strength must be >= 0");
  double acc = 0.0;
  for (double w : weights.values()) {
    if (w < 0.0) acc += w * w;
  }
  return 0.5 * alpha * acc;
}

Matrix negative_part(const Matrix& weights) {
  Matrix out(weights.rows(), weights.cols());
  for (std::size_t i = 0; i < weights.rows(); ++i) {
    const double* src = weights.row(i);
    double* dst = out.row(i);
    for (std::size_t j = 0; j < weights.cols(); ++j) {
      dst[j] = std::min(src[j], 0.0);
    }
  }
  return out;
}

namespace {

double logit(double p) { return std::log(p / (1.0 - p)); }

}  // namespace

RbmParams init_params(const DataMatrix& data, const TrainConfig& config) {
  config.validate();
  if (data.rows() < 1 || data.cols() < 1) {
    throw DimError("init_params: empty data");
  }
  const std::size_t n = data.cols();
  const std::size_t k = config.hidden_count;
  constexpr double kClamp = 1e-4;

  RbmParams params;
  params.visible_bias.resize(n);
  for (std::size_t c = 0; c < n; ++c) {
    double mean = 0.0;
    for (std::size_t r = 0; r < data.rows(); ++r) mean += data.values(r, c);
    mean /= static_cast<double>(data.rows());
    params.visible_bias[c] = logit(std::clamp(mean, kClamp, 1.0 - kClamp));
  }
  params.hidden_bias.assign(k, config.hidden_bias_init);

  params.weights = Matrix(n, k);
  RngStream rng(config.seed, stream_id(StreamKind::init_weights));
  for (std::size_t i = 0; i < n; ++i) {
    double* row = params.weights.row(i);
    for (std::size_t j = 0; j < k; ++j) {
      row[j] = rng.uniform(0.0, config.weight_init_max);
    }
  }
  return params;
}

void apply_update(RbmParams& params, const SufficientStats& data_stats,
                  const SufficientStats& model_stats,
                  const TrainConfig& config) {
  const std::size_t n = params.n_visible();
  const std::size_t k = params.n_hidden();
  const double eta = config.eta;
  const double alpha = config.alpha;

  for (std::size_t i = 0; i < n; ++i) {
    double* w = params.weights.row(i);
    const double* d = data_stats.vh.row(i);
    const double* m = model_stats.vh.row(i);
    if (alpha == 0.0) {
      for (std::size_t j = 0; j < k; ++j) w[j] += eta * (d[j] - m[j]);
    } else {
      for (std::size_t j = 0; j < k; ++j) {
        const double barrier = w[j] < 0.0 ? alpha * w[j] : 0.0;
        w[j] += eta * (d[j] - m[j] - barrier);
      }
    }
    params.visible_bias[i] +=
        eta * (data_stats.v_mean[i] - model_stats.v_mean[i]);
  }
  for (std::size_t j = 0; j < k; ++j) {
    params.hidden_bias[j] +=
        eta * (data_stats.h_mean[j] - model_stats.h_mean[j]);
  }

  for (double v : params.visible_bias) {
    if (!std::isfinite(v)) throw NumericError("update produced non-finite visible bias");
  }
  for (double v : params.hidden_bias) {
    if (!std::isfinite(v)) throw NumericError("update produced non-finite hidden bias");
  }
  if (!params.weights.all_finite()) {
    throw NumericError("update produced non-finite weight");
  }
}

void update_step(RbmParams& params, const DataMatrix& data,
                 std::span<const std::size_t> rows, const TrainConfig& config,
                 const StreamFactory& streams) {
  auto [data_stats, model_stats] =
      cd_statistics(params, data, rows, config.cd_k, streams);
  apply_update(params, data_stats, model_stats, config);
}

namespace {

EpochRecord make_record(std::size_t epoch, const RbmParams& params,
                        const DataMatrix& data, const TrainConfig& config,
                        const std::vector<double>& edges) {
  EpochRecord rec;
  rec.epoch = epoch;
  rec.recon_mse = reconstruction_mse(params, data);
  rec.barrier_penalty = barrier_penalty(params.weights, config.alpha);
  std::size_t negatives = 0;
  for (double w : params.weights.values()) {
    if (w < 0.0) ++negatives;
  }
  rec.negative_fraction =
      static_cast<double>(negatives) / static_cast<double>(params.weights.size());
  DeadUnitConfig dead_cfg;
  dead_cfg.n_visible = params.n_visible();
  rec.used_units = dead_units(params, dead_cfg).averaged_used;
  rec.weight_hist = weight_histogram(params, edges);
  return rec;
}

}  // namespace

std::pair<RbmParams, TrainTrace> train(const DataMatrix& data,
                                       const TrainConfig& config) {
  config.validate();
  data.validate();

  RbmParams params = init_params(data, config);

  TrainTrace trace;
  trace.bin_edges = default_trace_bin_edges();
  trace.records.reserve(config.epochs + 1);
  trace.records.push_back(
      make_record(0, params, data, config, trace.bin_edges));

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    const BatchPlan plan =
        make_batches(data.rows(), config.batch_size, config.seed, epoch);
    for (std::size_t b = 0; b < plan.num_batches(); ++b) {
      const StreamFactory streams(
          config.seed, stream_id(StreamKind::cd_chain, epoch, b));
      update_step(params, data, plan.batch(b), config, streams);
    }
    trace.records.push_back(
        make_record(epoch + 1, params, data, config, trace.bin_edges));
  }
  return {std::move(params), std::move(trace)};
}

Matrix hidden_posteriors(const RbmParams& params, const DataMatrix& data) {
  params.check();
  if (data.cols() != params.n_visible()) {
    throw DimError("hidden_posteriors: data width does not match model");
  }
  Matrix out(data.rows(), params.n_hidden());
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(data.rows());
       ++r) {
    hidden_conditional(params, data.values.row(static_cast<std::size_t>(r)),
                       out.row(static_cast<std::size_t>(r)));
  }
  return out;
}

Matrix reconstruct(const RbmParams& params, const DataMatrix& data) {
  params.check();
  if (data.cols() != params.n_visible()) {
    throw DimError("reconstruct: data width does not match model");
  }
  Matrix out(data.rows(), params.n_visible());
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(data.rows());
       ++r) {
    const std::size_t ri = static_cast<std::size_t>(r);
    std::vector<double> h(params.n_hidden());
    hidden_conditional(params, data.values.row(ri), h.data());
    visible_conditional(params, h.data(), out.row(ri));
  }
  return out;
}

double reconstruction_mse(const RbmParams& params, const DataMatrix& data) {
  const Matrix recon = reconstruct(params, data);
  std::vector<double> row_sums(data.rows(), 0.0);
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(data.rows());
       ++r) {
    const std::size_t ri = static_cast<std::size_t>(r);
    const double* x = data.values.row(ri);
    const double* y = recon.row(ri);
    double acc = 0.0;
    for (std::size_t c = 0; c < data.cols(); ++c) {
      const double diff = x[c] - y[c];
      acc += diff * diff;
    }
    row_sums[ri] = acc;
  }
  double total = 0.0;
  for (double s : row_sums) total += s;
  return total / static_cast<double>(data.rows() * data.cols());
}

DeadUnitReport dead_units(const RbmParams& params,
                          const DeadUnitConfig& config) {
  if (config.thresholds.empty()) {
    throw UsageError("dead_units: threshold set must be non-empty");
  }
  for (double tau : config.thresholds) {
    if (!(tau > 0.0)) throw UsageError("dead_units: thresholds must be > 0");
  }
  const std::size_t n =
      config.n_visible > 0 ? config.n_visible : params.n_visible();
  const std::size_t k = params.n_hidden();

  std::vector<double> column_l1(k, 0.0);
  for (std::size_t i = 0; i < params.n_visible(); ++i) {
    const double* row = params.weights.row(i);
    for (std::size_t j = 0; j < k; ++j) column_l1[j] += std::abs(row[j]);
  }

  DeadUnitReport report;
  report.used_per_threshold.reserve(config.thresholds.size());
  report.dead_mask_per_threshold.reserve(config.thresholds.size());
  double used_acc = 0.0;
  for (double tau : config.thresholds) {
    std::vector<bool> dead(k, false);
    std::size_t used = 0;
    for (std::size_t j = 0; j < k; ++j) {
      dead[j] = column_l1[j] / static_cast<double>(n) <= tau;
      if (!dead[j]) ++used;
    }
    report.used_per_threshold.push_back(used);
    report.dead_mask_per_threshold.push_back(std::move(dead));
    used_acc += static_cast<double>(used);
  }
  report.averaged_used =
      used_acc / static_cast<double>(config.thresholds.size());
  return report;
}

std::vector<std::size_t> weight_histogram(const RbmParams& params,
                                          const std::vector<double>& edges) {
  if (edges.size() < 2) throw UsageError("histogram needs at least two edges");
  for (std::size_t i = 1; i < edges.size(); ++i) {
    if (!(edges[i] > edges[i - 1])) {
      throw UsageError("histogram edges must be strictly increasing");
    }
  }
  const std::size_t bins = edges.size() - 1;
  std::vector<std::size_t> counts(bins, 0);
  for (double w : params.weights.values()) {
    std::size_t bin;
    if (w < edges.front()) {
      bin = 0;
    } else if (w >= edges.back()) {
      bin = bins - 1;
    } else {
      bin = static_cast<std::size_t>(
                std::upper_bound(edges.begin(), edges.end(), w) -
                edges.begin()) -
            1;
    }
    ++counts[bin];
  }
  return counts;
}

void TrainTrace::write_csv(const std::string& path) const {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open file for writing: " + path);
  out << "epoch,recon_mse,barrier_penalty,negative_fraction,used_units";
  for (std::size_t b = 0; b + 1 < bin_edges.size(); ++b) {
    char buf[64];
    std::snprintf(buf, sizeof buf, ",hist_%g", bin_edges[b]);
    out << buf;
  }
  out << '\n';
  char buf[64];
  for (const EpochRecord& rec : records) {
    out << rec.epoch;
    std::snprintf(buf, sizeof buf, ",%.12g", rec.recon_mse);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.12g", rec.barrier_penalty);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.12g", rec.negative_fraction);
    out << buf;
    std::snprintf(buf, sizeof buf, ",%.12g", rec.used_units);
    out << buf;
    for (std::size_t c : rec.weight_hist) out << ',' << c;
    out << '\n';
  }
  if (!out) throw FormatError("write failed: " + path);
}

}  // namespace nrbm
