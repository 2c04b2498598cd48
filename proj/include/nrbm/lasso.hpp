#ifndef NRBM_LASSO_HPP
#define NRBM_LASSO_HPP

#include <cstddef>
#include <functional>
#include <span>
#include <vector>

#include "nrbm/matrix.hpp"

namespace nrbm {

struct LassoModel {
  std::vector<double> weights;  // length D
  double bias = 0.0;            // unpenalized
  double beta = 0.0;
  bool converged = false;
  std::size_t iterations = 0;
};

struct LassoOptions {
  double tolerance = 1e-6;  // max-abs gradient-map stopping rule
  std::size_t max_iterations = 10000;
  // Observer invoked with (iteration, penalized log-likelihood).
  std::function<void(std::size_t, double)> on_iteration;
};

// Penalized log-likelihood of Bernoulli logistic regression:
//   (1/M) sum_m log p(y_m | x_m ; w, b) - beta * ||w||_1
double lasso_objective(const Matrix& x, std::span<const int> y,
                       std::span<const double> weights, double bias,
                       double beta);

// Maximizes lasso_objective by proximal gradient (iterative
// soft-thresholding) with backtracking line search. Iterates are exactly
// sparse and the objective is non-decreasing.
LassoModel fit_lasso(const Matrix& x, std::span<const int> y, double beta,
                     const LassoOptions& options = {});

// sigmoid(x . w + b) per row.
std::vector<double> lasso_scores(const Matrix& x,
                                 std::span<const double> weights, double bias);

}  // namespace nrbm

#endif  // NRBM_LASSO_HPP
