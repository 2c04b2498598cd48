#ifndef NRBM_KNN_HPP
#define NRBM_KNN_HPP

#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "nrbm/matrix.hpp"

namespace nrbm {

enum class KnnMetric { cosine, euclidean };

KnnMetric parse_knn_metric(const std::string& name);

// Majority vote over the k most similar training rows; similarity ties
// prefer the lower train index, vote ties the smaller label. Multiclass
// labels are allowed.
std::vector<int> knn_predict(const Matrix& train_x,
                             std::span<const int> train_y,
                             const Matrix& test_x, std::size_t k,
                             KnnMetric metric);

double knn_error_rate(const Matrix& train_x, std::span<const int> train_y,
                      const Matrix& test_x, std::span<const int> test_y,
                      std::size_t k, KnnMetric metric);

}  // namespace nrbm

#endif  // NRBM_KNN_HPP
