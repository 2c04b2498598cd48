#include "nrbm/stability.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "nrbm/errors.hpp"

namespace nrbm {

ConjugatedWeights conjugate_weights(const RbmParams& rbm,
                                    const LassoModel& lasso) {
  if (lasso.weights.size() != rbm.n_hidden()) {
    throw DimError("conjugate_weights: lasso width does not match hidden layer");
  }
  ConjugatedWeights out;
  out.values.assign(rbm.n_visible(), 0.0);
  for (std::size_t n = 0; n < rbm.n_visible(); ++n) {
    const double* w_row = rbm.weights.row(n);
    double acc = 0.0;
    for (std::size_t k = 0; k < rbm.n_hidden(); ++k) {
      acc += lasso.weights[k] * w_row[k];
    }
    out.values[n] = acc;
  }
  return out;
}

FeatureSubset select_top(std::span<const double> weights, std::size_t T) {
  if (T > weights.size()) {
    throw DimError("select_top: T exceeds the number of features");
  }
  std::vector<std::size_t> idx(weights.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::stable_sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return std::abs(weights[a]) > std::abs(weights[b]);
  });
  FeatureSubset subset;
  subset.indices.assign(idx.begin(), idx.begin() + T);
  std::sort(subset.indices.begin(), subset.indices.end());
  return subset;
}

namespace {

std::size_t intersection_size(const std::vector<std::size_t>& a,
                              const std::vector<std::size_t>& b) {
  std::size_t count = 0;
  auto ia = a.begin();
  auto ib = b.begin();
  while (ia != a.end() && ib != b.end()) {
    if (*ia < *ib) {
      ++ia;
    } else if (*ib < *ia) {
      ++ib;
    } else {
      ++count;
      ++ia;
      ++ib;
    }
  }
  return count;
}

}  // namespace

double consistency_index(std::span<const FeatureSubset> subsets,
                         std::size_t k_total) {
  if (subsets.size() < 2) {
    throw DegenerateError("consistency_index: need at least two subsets");
  }
  const std::size_t t = subsets.front().indices.size();
  if (t == 0) throw DegenerateError("consistency_index: empty subsets");
  if (t >= k_total) {
    throw DegenerateError(
        "consistency_index: undefined at T = K (zero denominator)");
  }
  for (const FeatureSubset& s : subsets) {
    if (s.indices.size() != t) {
      throw DimError("consistency_index: subsets must share one size T");
    }
  }
  const double td = static_cast<double>(t);
  const double kd = static_cast<double>(k_total);
  double acc = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i + 1 < subsets.size(); ++i) {
    for (std::size_t j = i + 1; j < subsets.size(); ++j) {
      const double r = static_cast<double>(
          intersection_size(subsets[i].indices, subsets[j].indices));
      acc += (r * kd - td * td) / (td * (kd - td));
      ++pairs;
    }
  }
  return acc / static_cast<double>(pairs);
}

double jaccard_index(std::span<const FeatureSubset> subsets) {
  if (subsets.size() < 2) {
    throw DegenerateError("jaccard_index: need at least two subsets");
  }
  for (const FeatureSubset& s : subsets) {
    if (s.indices.empty()) {
      throw DegenerateError("jaccard_index: empty subset");
    }
  }
  double acc = 0.0;
  std::size_t pairs = 0;
  for (std::size_t i = 0; i + 1 < subsets.size(); ++i) {
    for (std::size_t j = i + 1; j < subsets.size(); ++j) {
      const double r = static_cast<double>(
          intersection_size(subsets[i].indices, subsets[j].indices));
      const double u = static_cast<double>(subsets[i].indices.size() +
                                           subsets[j].indices.size()) -
                       r;
      acc += r / u;
      ++pairs;
    }
  }
  return acc / static_cast<double>(pairs);
}

double mann_whitney_auc(std::span<const double> scores,
                        std::span<const int> labels) {
  if (scores.size() != labels.size()) {
    throw DimError("mann_whitney_auc: scores and labels differ in length");
  }
  std::vector<std::size_t> idx(scores.size());
  std::iota(idx.begin(), idx.end(), std::size_t{0});
  std::sort(idx.begin(), idx.end(), [&](std::size_t a, std::size_t b) {
    return scores[a] < scores[b];
  });

  std::uint64_t positives = 0, negatives = 0;
  for (int label : labels) {
    if (label == 1) {
      ++positives;
    } else {
      ++negatives;
    }
  }
  if (positives == 0 || negatives == 0) {
    throw DegenerateError("mann_whitney_auc: both classes must be present");
  }

  // Pair counting in integers: wins2 = 2 * #(pos > neg) + #(pos == neg).
  std::uint64_t wins2 = 0;
  std::uint64_t neg_below = 0;
  std::size_t i = 0;
  while (i < idx.size()) {
    std::size_t j = i;
    std::uint64_t group_pos = 0, group_neg = 0;
    while (j < idx.size() && scores[idx[j]] == scores[idx[i]]) {
      if (labels[idx[j]] == 1) {
        ++group_pos;
      } else {
        ++group_neg;
      }
      ++j;
    }
    wins2 += group_pos * (2 * neg_below + group_neg);
    neg_below += group_neg;
    i = j;
  }
  return static_cast<double>(wins2) /
         (2.0 * static_cast<double>(positives) *
          static_cast<double>(negatives));
}

ClassificationMetrics classification_metrics(std::span<const double> scores,
                                             std::span<const int> labels,
                                             double threshold) {
  if (scores.size() != labels.size()) {
    throw DimError("classification_metrics: scores/labels length mismatch");
  }
  if (scores.empty()) {
    throw DimError("classification_metrics: empty input");
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) {
      throw RangeError("classification_metrics: scores must lie in [0,1]");
    }
  }
  std::uint64_t tp = 0, fp = 0, tn = 0, fn = 0;
  for (std::size_t i = 0; i < scores.size(); ++i) {
    const bool predicted = scores[i] >= threshold;
    if (labels[i] == 1) {
      predicted ? ++tp : ++fn;
    } else {
      predicted ? ++fp : ++tn;
    }
  }
  ClassificationMetrics m;
  m.sensitivity = tp + fn > 0 ? double(tp) / double(tp + fn) : 0.0;
  m.specificity = tn + fp > 0 ? double(tn) / double(tn + fp) : 0.0;
  m.precision = tp + fp > 0 ? double(tp) / double(tp + fp) : 0.0;
  m.f_measure = m.precision + m.sensitivity > 0.0
                    ? 2.0 * m.precision * m.sensitivity /
                          (m.precision + m.sensitivity)
                    : 0.0;

  const std::uint64_t positives = tp + fn;
  const std::uint64_t negatives = tn + fp;
  if (positives > 0 && negatives > 0) {
    const double auc = mann_whitney_auc(scores, labels);
    // Hanley-McNeil variance of the Mann-Whitney statistic.
    const double q1 = auc / (2.0 - auc);
    const double q2 = 2.0 * auc * auc / (1.0 + auc);
    const double p = static_cast<double>(positives);
    const double n = static_cast<double>(negatives);
    const double var = (auc * (1.0 - auc) + (p - 1.0) * (q1 - auc * auc) +
                        (n - 1.0) * (q2 - auc * auc)) /
                       (p * n);
    const double se = std::sqrt(std::max(var, 0.0));
    m.auc = auc;
    m.auc_ci_low = std::clamp(auc - 1.959963984540054 * se, 0.0, 1.0);
    m.auc_ci_high = std::clamp(auc + 1.959963984540054 * se, 0.0, 1.0);
  }
  return m;
}

StabilityMethod parse_stability_method(const std::string& name) {
  if (name == "lasso") return StabilityMethod::lasso;
  if (name == "rbm+lasso") return StabilityMethod::rbm_lasso;
  if (name == "nrbm+lasso") return StabilityMethod::nrbm_lasso;
  throw UsageError("unknown stability method: " + name);
}

std::string to_string(StabilityMethod method) {
  switch (method) {
    case StabilityMethod::lasso:
      return "lasso";
    case StabilityMethod::rbm_lasso:
      return "rbm+lasso";
    case StabilityMethod::nrbm_lasso:
      return "nrbm+lasso";
  }
  return "unknown";
}

namespace {

// Feature-space weight vector of one replicate: raw lasso weights for the
// plain method, conjugated stage-1/stage-2 weights otherwise.
struct ReplicateFit {
  std::vector<double> weights;
  double bias = 0.0;
};

ReplicateFit fit_replicate(const DataMatrix& resampled,
                           const StabilityConfig& config,
                           std::size_t replicate_index) {
  ReplicateFit fit;
  if (config.method == StabilityMethod::lasso) {
    const LassoModel lasso =
        fit_lasso(resampled.values, resampled.labels, config.beta,
                  config.lasso);
    fit.weights = lasso.weights;
    fit.bias = lasso.bias;
    return fit;
  }

  TrainConfig stage1 = config.stage1;
  stage1.alpha = config.method == StabilityMethod::rbm_lasso ? 0.0
                                                             : config.stage1.alpha;
  // Per-replicate stream: stage-1 training must not share randomness
  // across replicates.
  stage1.seed = combine_stream(
      stream_id(StreamKind::generic, replicate_index), config.seed);

  DataMatrix unlabeled;
  unlabeled.values = resampled.values;
  auto [rbm, trace] = train(unlabeled, stage1);
  (void)trace;

  DataMatrix posteriors;
  posteriors.values = hidden_posteriors(rbm, unlabeled);
  const LassoModel lasso =
      fit_lasso(posteriors.values, resampled.labels, config.beta,
                config.lasso);
  fit.weights = conjugate_weights(rbm, lasso).values;
  fit.bias = lasso.bias;
  return fit;
}

}  // namespace

StabilityOutcome run_stability_protocol(const DataMatrix& train_data,
                                        std::span<const BootstrapSample> samples,
                                        const StabilityConfig& config,
                                        const DataMatrix* test_data) {
  if (samples.size() < 2) {
    throw UsageError("stability protocol needs at least two bootstraps");
  }
  if (!train_data.has_labels()) {
    throw DimError("stability protocol requires labeled training data");
  }
  for (int label : train_data.labels) {
    if (label != 0 && label != 1) {
      throw RangeError("stability protocol requires binary 0/1 labels");
    }
  }
  const std::size_t n_features = train_data.cols();
  for (std::size_t t : config.subset_sizes) {
    if (t == 0 || t > n_features) {
      throw UsageError("subset size must satisfy 1 <= T <= feature count");
    }
  }

  StabilityOutcome outcome;
  outcome.method = config.method;

  std::vector<ReplicateFit> fits;
  fits.reserve(samples.size());
  for (const BootstrapSample& sample : samples) {
    const DataMatrix resampled = train_data.gather(sample.row_indices);
    fits.push_back(fit_replicate(resampled, config, sample.replicate_index));
    if (fits.back().weights.size() != n_features) {
      throw DimError("stability protocol: replicate weight length mismatch");
    }
  }

  for (std::size_t t : config.subset_sizes) {
    StabilityReport report;
    report.subset_size = t;
    report.k_total = n_features;
    report.bootstraps = samples.size();
    for (std::size_t r = 0; r < fits.size(); ++r) {
      FeatureSubset subset = select_top(fits[r].weights, t);
      subset.source_replicate = samples[r].replicate_index;
      report.subsets.push_back(std::move(subset));
    }
    report.consistency = consistency_index(report.subsets, n_features);
    report.jaccard = jaccard_index(report.subsets);
    outcome.per_size.push_back(std::move(report));
  }

  outcome.final_weights.assign(n_features, 0.0);
  for (const ReplicateFit& fit : fits) {
    for (std::size_t c = 0; c < n_features; ++c) {
      outcome.final_weights[c] += fit.weights[c];
    }
    outcome.final_bias += fit.bias;
  }
  const double inv = 1.0 / static_cast<double>(fits.size());
  for (double& w : outcome.final_weights) w *= inv;
  outcome.final_bias *= inv;

  if (test_data != nullptr) {
    if (!test_data->has_labels()) {
      throw DimError("stability protocol: test data must carry labels");
    }
    const std::vector<double> scores =
        lasso_scores(test_data->values, outcome.final_weights,
                     outcome.final_bias);
    outcome.test_metrics =
        classification_metrics(scores, test_data->labels, 0.5);
  }
  return outcome;
}

StabilityOutcome run_stability_protocol(const DataMatrix& train_data,
                                        const StabilityConfig& config,
                                        const DataMatrix* test_data) {
  if (config.bootstraps < 2) {
    throw UsageError("stability protocol needs at least two bootstraps");
  }
  std::vector<BootstrapSample> samples;
  samples.reserve(config.bootstraps);
  for (std::size_t r = 1; r <= config.bootstraps; ++r) {
    samples.push_back(bootstrap(train_data.rows(), r, config.seed));
  }
  return run_stability_protocol(train_data, samples, config, test_data);
}

void write_stability_csv(const StabilityOutcome& outcome,
                         const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open file for writing: " + path);
  out << "T,C,J\n";
  char buf[96];
  for (const StabilityReport& report : outcome.per_size) {
    std::snprintf(buf, sizeof buf, "%zu,%.12g,%.12g\n", report.subset_size,
                  report.consistency, report.jaccard);
    out << buf;
  }
  if (!out) throw FormatError("write failed: " + path);
}

}  // namespace nrbm
