#include "nrbm/knn.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "nrbm/errors.hpp"
#include "nrbm/parallel.hpp"

namespace nrbm {

KnnMetric parse_knn_metric(const std::string& name) {
  if (name == "cosine") return KnnMetric::cosine;
  if (name == "euclidean") return KnnMetric::euclidean;
  throw UsageError("unknown kNN metric: " + name);
}

namespace {

double cosine_similarity(const double* a, const double* b, std::size_t n) {
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  return dot / std::sqrt(na * nb);
}

double negative_sq_distance(const double* a, const double* b, std::size_t n) {
  double acc = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double d = a[i] - b[i];
    acc += d * d;
  }
  return -acc;
}

int predict_row(const Matrix& train_x, std::span<const int> train_y,
                const double* query, std::size_t k, KnnMetric metric) {
  struct Scored {
    double similarity;
    std::size_t index;
  };
  std::vector<Scored> scored(train_x.rows());
  for (std::size_t r = 0; r < train_x.rows(); ++r) {
    const double sim =
        metric == KnnMetric::cosine
            ? cosine_similarity(train_x.row(r), query, train_x.cols())
            : negative_sq_distance(train_x.row(r), query, train_x.cols());
    scored[r] = {sim, r};
  }
  const std::size_t kk = std::min(k, scored.size());
  std::partial_sort(scored.begin(), scored.begin() + kk, scored.end(),
                    [](const Scored& a, const Scored& b) {
                      if (a.similarity != b.similarity) {
                        return a.similarity > b.similarity;
                      }
                      return a.index < b.index;
                    });
  std::map<int, std::size_t> votes;
  for (std::size_t i = 0; i < kk; ++i) {
    ++votes[train_y[scored[i].index]];
  }
  int best_label = 0;
  std::size_t best_votes = 0;
  for (const auto& [label, count] : votes) {
    if (count > best_votes) {  // map order makes ties pick the smaller label
      best_votes = count;
      best_label = label;
    }
  }
  return best_label;
}

}  // namespace

std::vector<int> knn_predict(const Matrix& train_x,
                             std::span<const int> train_y,
                             const Matrix& test_x, std::size_t k,
                             KnnMetric metric) {
  if (train_y.size() != train_x.rows()) {
    throw DimError("knn: training labels do not match training rows");
  }
  if (train_x.cols() != test_x.cols()) {
    throw DimError("knn: train and test feature widths differ");
  }
  if (k < 1) throw UsageError("knn: k must be >= 1");
  if (train_x.rows() == 0) throw DimError("knn: empty training set");

  std::vector<int> predictions(test_x.rows());
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(test_x.rows());
       ++r) {
    const std::size_t ri = static_cast<std::size_t>(r);
    predictions[ri] = predict_row(train_x, train_y, test_x.row(ri), k, metric);
  }
  return predictions;
}

double knn_error_rate(const Matrix& train_x, std::span<const int> train_y,
                      const Matrix& test_x, std::span<const int> test_y,
                      std::size_t k, KnnMetric metric) {
  if (test_y.size() != test_x.rows()) {
    throw DimError("knn: test labels do not match test rows");
  }
  if (test_x.rows() == 0) throw DimError("knn: empty test set");
  const std::vector<int> predictions =
      knn_predict(train_x, train_y, test_x, k, metric);
  std::size_t wrong = 0;
  for (std::size_t i = 0; i < predictions.size(); ++i) {
    if (predictions[i] != test_y[i]) ++wrong;
  }
  return static_cast<double>(wrong) / static_cast<double>(predictions.size());
}

}  // namespace nrbm
