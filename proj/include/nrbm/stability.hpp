#ifndef NRBM_STABILITY_HPP
#define NRBM_STABILITY_HPP

#include <cstddef>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "nrbm/data.hpp"
#include "nrbm/lasso.hpp"
#include "nrbm/rbm.hpp"
#include "nrbm/train.hpp"

namespace nrbm {

// Stage-2 weights mapped back to the original feature space:
//   w_bar_n = sum_k what_k * w_nk
struct ConjugatedWeights {
  std::vector<double> values;  // length N
};

ConjugatedWeights conjugate_weights(const RbmParams& rbm,
                                    const LassoModel& lasso);

struct FeatureSubset {
  std::vector<std::size_t> indices;  // sorted ascending, distinct
  std::size_t source_replicate = 0;
};

// Indices of the T largest |weight|; ties prefer the lower index.
FeatureSubset select_top(std::span<const double> weights, std::size_t T);

// Mean over unordered pairs of (R*K - T^2) / (T*(K - T)), R = |Si ∩ Sj|.
// All subsets must share the same size T with 0 < T < k_total.
double consistency_index(std::span<const FeatureSubset> subsets,
                         std::size_t k_total);

// Mean over unordered pairs of |Si ∩ Sj| / |Si ∪ Sj|.
double jaccard_index(std::span<const FeatureSubset> subsets);

struct ClassificationMetrics {
  double sensitivity = 0.0;
  double specificity = 0.0;
  double precision = 0.0;
  double f_measure = 0.0;
  std::optional<double> auc;
  std::optional<double> auc_ci_low;
  std::optional<double> auc_ci_high;
};

// Mann-Whitney AUC with ties counted 1/2; exact pair counting in integer
// arithmetic. Throws DegenerateError unless both classes are present.
double mann_whitney_auc(std::span<const double> scores,
                        std::span<const int> labels);

// Point metrics at the given threshold (predicted positive iff score >=
// threshold) plus the AUC and its Hanley-McNeil normal-approximation CI.
// With single-class labels the AUC fields are left empty.
ClassificationMetrics classification_metrics(std::span<const double> scores,
                                             std::span<const int> labels,
                                             double threshold = 0.5);

enum class StabilityMethod { lasso, rbm_lasso, nrbm_lasso };

StabilityMethod parse_stability_method(const std::string& name);
std::string to_string(StabilityMethod method);

struct StabilityConfig {
  StabilityMethod method = StabilityMethod::nrbm_lasso;
  std::vector<std::size_t> subset_sizes = {10, 50, 100, 150, 200};
  std::size_t bootstraps = 10;
  std::uint64_t seed = 0;
  double beta = 0.001;
  TrainConfig stage1;  // hidden_count default 200 set by the CLI
  LassoOptions lasso;
};

struct StabilityReport {
  std::size_t subset_size = 0;  // T
  std::size_t k_total = 0;      // feature-space size the subsets live in
  std::size_t bootstraps = 0;
  double consistency = 0.0;
  double jaccard = 0.0;
  std::vector<FeatureSubset> subsets;  // one per replicate
};

struct StabilityOutcome {
  StabilityMethod method;
  std::vector<StabilityReport> per_size;
  // Plain unweighted mean of the per-replicate feature-space weight
  // vectors and biases; a linear predictor over the original features.
  std::vector<double> final_weights;
  double final_bias = 0.0;
  std::optional<ClassificationMetrics> test_metrics;
};

// Core protocol over precomputed bootstrap samples; exposed so degenerate
// replicate sets can be tested directly.
StabilityOutcome run_stability_protocol(
    const DataMatrix& train_data, std::span<const BootstrapSample> samples,
    const StabilityConfig& config, const DataMatrix* test_data = nullptr);

// Draws config.bootstraps samples from config.seed, then runs the core.
StabilityOutcome run_stability_protocol(const DataMatrix& train_data,
                                        const StabilityConfig& config,
                                        const DataMatrix* test_data = nullptr);

void write_stability_csv(const StabilityOutcome& outcome,
                         const std::string& path);

}  // namespace nrbm

#endif  // NRBM_STABILITY_HPP
