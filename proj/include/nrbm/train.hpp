#ifndef NRBM_TRAIN_HPP
#define NRBM_TRAIN_HPP

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nrbm/data.hpp"
#include "nrbm/rbm.hpp"

namespace nrbm {

struct TrainConfig {
  double eta = 0.1;    // learning rate, shared by all parameter groups
  double alpha = 0.1;  // barrier strength; 0 reverts to the plain RBM
  int cd_k = 1;
  std::size_t batch_size = 100;
  std::size_t epochs = 100;
  std::uint64_t seed = 0;
  std::size_t hidden_count = 100;
  double hidden_bias_init = -2.0;
  double weight_init_max = 0.01;

  void validate() const;  // UsageError on invalid settings
};

struct DeadUnitConfig {
  std::vector<double> thresholds = default_thresholds();
  std::size_t n_visible = 0;

  static std::vector<double> default_thresholds();  // 0.01 .. 0.06 step 0.01
};

struct DeadUnitReport {
  std::vector<std::size_t> used_per_threshold;
  double averaged_used = 0.0;
  std::vector<std::vector<bool>> dead_mask_per_threshold;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 0 = initialization
  double recon_mse = 0.0;
  double barrier_penalty = 0.0;
  double negative_fraction = 0.0;  // entries with w < 0
  double used_units = 0.0;         // threshold-averaged
  std::vector<std::size_t> weight_hist;
};

struct TrainTrace {
  std::vector<double> bin_edges;
  std::vector<EpochRecord> records;  // epochs + 1 entries, epoch 0 first

  void write_csv(const std::string& path) const;
};

// Fixed bin edges used by the per-epoch trace histogram; the center bin
// [-0.005, 0.005) counts near-zero weights.
std::vector<double> default_trace_bin_edges();

// (alpha/2) * sum f(w), f(x) = x^2 for x < 0 and 0 otherwise.
double barrier_penalty(const Matrix& weights, double alpha);

// Entrywise min(w, 0).
Matrix negative_part(const Matrix& weights);

// Visible biases match the empirical marginals (logit of clamped column
// means), weights are uniform in [0, weight_init_max], hidden biases start
// at hidden_bias_init.
RbmParams init_params(const DataMatrix& data, const TrainConfig& config);

// One gradient step from precomputed statistics:
//   w += eta * (data.vh - model.vh - alpha * min(w, 0))
// with the matching bias updates. Throws NumericError if any parameter
// becomes non-finite.
void apply_update(RbmParams& params, const SufficientStats& data_stats,
                  const SufficientStats& model_stats,
                  const TrainConfig& config);

// cd_statistics + apply_update on one mini-batch.
void update_step(RbmParams& params, const DataMatrix& data,
                 std::span<const std::size_t> rows, const TrainConfig& config,
                 const StreamFactory& streams);

// Stream layout (reproduced by the serial reference trainer):
//   shuffle, epoch e   -> make_batches(M, B, seed, e), e = 0-based
//   CD, epoch e, batch i -> StreamFactory(seed, stream_id(cd_chain, e, i)),
//                           row r of the batch uses child stream r.
std::pair<RbmParams, TrainTrace> train(const DataMatrix& data,
                                       const TrainConfig& config);

// Row m of the result is p(h = 1 | v = row m): the learned representation.
Matrix hidden_posteriors(const RbmParams& params, const DataMatrix& data);

// One-step mean-field reconstruction of every row.
Matrix reconstruct(const RbmParams& params, const DataMatrix& data);

double reconstruction_mse(const RbmParams& params, const DataMatrix& data);

// Unit k is dead under threshold tau iff ||w_.k||_1 / N <= tau.
DeadUnitReport dead_units(const RbmParams& params,
                          const DeadUnitConfig& config);

// Counts of weight entries per bin; out-of-range entries land in the first
// or last bin. Edges must be strictly increasing.
std::vector<std::size_t> weight_histogram(const RbmParams& params,
                                          const std::vector<double>& edges);

}  // namespace nrbm

#endif  // NRBM_TRAIN_HPP
