#ifndef NRBM_MATRIX_HPP
#define NRBM_MATRIX_HPP

#include <cmath>
#include <cstddef>
#include <vector>

namespace nrbm {

// Dense row-major matrix of doubles. Deliberately minimal: the kernels in
// this library are written as explicit loops so they can be parallelized
// deterministically.
class Matrix {
 public:
  Matrix() : rows_(0), cols_(0) {}
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), values_(rows * cols, fill) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return values_.size(); }

  double& operator()(std::size_t r, std::size_t c) {
    return values_[r * cols_ + c];
  }
  double operator()(std::size_t r, std::size_t c) const {
    return values_[r * cols_ + c];
  }

  double* row(std::size_t r) { return values_.data() + r * cols_; }
  const double* row(std::size_t r) const { return values_.data() + r * cols_; }

  double* data() { return values_.data(); }
  const double* data() const { return values_.data(); }

  const std::vector<double>& values() const { return values_; }

  bool all_finite() const {
    for (double v : values_) {
      if (!std::isfinite(v)) return false;
    }
    return true;
  }

  bool operator==(const Matrix& other) const {
    return rows_ == other.rows_ && cols_ == other.cols_ &&
           values_ == other.values_;
  }

 private:
  std::size_t rows_;
  std::size_t cols_;
  std::vector<double> values_;
};

}  // namespace nrbm

#endif  // NRBM_MATRIX_HPP
