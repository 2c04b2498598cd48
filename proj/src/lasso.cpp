#include "nrbm/lasso.hpp"

#include <algorithm>
#include <cmath>

#include "nrbm/errors.hpp"
#include "nrbm/parallel.hpp"
#include "nrbm/rbm.hpp"

namespace nrbm {

namespace {

void check_inputs(const Matrix& x, std::span<const int> y, double beta) {
  if (x.rows() < 1 || x.cols() < 1) throw DimError("fit_lasso: empty design");
  if (y.size() != x.rows()) {
    throw DimError("fit_lasso: label count does not match row count");
  }
  if (!(beta >= 0.0)) throw UsageError("fit_lasso: beta must be >= 0");
  for (int label : y) {
    if (label != 0 && label != 1) {
      throw RangeError("fit_lasso: labels must be binary 0/1");
    }
  }
}

// log(sigmoid(s)) without overflow.
double log_sigmoid(double s) {
  if (s >= 0.0) return -std::log1p(std::exp(-s));
  return s - std::log1p(std::exp(s));
}

// Mean negative log-likelihood (the smooth part, to be minimized).
double smooth_loss(const Matrix& x, std::span<const int> y,
                   std::span<const double> w, double bias) {
  const std::size_t m = x.rows();
  const std::size_t d = x.cols();
  std::vector<double> row_loss(m, 0.0);
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(m); ++r) {
    const std::size_t ri = static_cast<std::size_t>(r);
    const double* row = x.row(ri);
    double s = bias;
    for (std::size_t c = 0; c < d; ++c) s += row[c] * w[c];
    row_loss[ri] = y[ri] == 1 ? -log_sigmoid(s) : -log_sigmoid(-s);
  }
  double acc = 0.0;
  for (double v : row_loss) acc += v;
  return acc / static_cast<double>(m);
}

// Gradient of smooth_loss wrt (w, bias): (1/M) X'(p - y), mean(p - y).
void smooth_gradient(const Matrix& x, std::span<const int> y,
                     std::span<const double> w, double bias,
                     std::vector<double>& grad_w, double& grad_bias) {
  const std::size_t m = x.rows();
  const std::size_t d = x.cols();
  std::vector<double> residual(m);
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(m); ++r) {
    const std::size_t ri = static_cast<std::size_t>(r);
    const double* row = x.row(ri);
    double s = bias;
    for (std::size_t c = 0; c < d; ++c) s += row[c] * w[c];
    residual[ri] = sigmoid(s) - static_cast<double>(y[ri]);
  }
  grad_w.assign(d, 0.0);
  const double inv = 1.0 / static_cast<double>(m);
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (std::ptrdiff_t c = 0; c < static_cast<std::ptrdiff_t>(d); ++c) {
    const std::size_t ci = static_cast<std::size_t>(c);
    double acc = 0.0;
    for (std::size_t r = 0; r < m; ++r) acc += x(r, ci) * residual[r];
    grad_w[ci] = acc * inv;
  }
  double acc = 0.0;
  for (double v : residual) acc += v;
  grad_bias = acc * inv;
}

double soft_threshold(double v, double t) {
  if (v > t) return v - t;
  if (v < -t) return v + t;
  return 0.0;
}

}  // namespace

double lasso_objective(const Matrix& x, std::span<const int> y,
                       std::span<const double> weights, double bias,
                       double beta) {
  double l1 = 0.0;
  for (double w : weights) l1 += std::abs(w);
  return -smooth_loss(x, y, weights, bias) - beta * l1;
}

std::vector<double> lasso_scores(const Matrix& x,
                                 std::span<const double> weights, double bias) {
  if (weights.size() != x.cols()) {
    throw DimError("lasso_scores: weight length does not match design width");
  }
  std::vector<double> scores(x.rows());
#pragma omp parallel for schedule(static) num_threads(effective_threads())
  for (std::ptrdiff_t r = 0; r < static_cast<std::ptrdiff_t>(x.rows()); ++r) {
    const std::size_t ri = static_cast<std::size_t>(r);
    const double* row = x.row(ri);
    double s = bias;
    for (std::size_t c = 0; c < x.cols(); ++c) s += row[c] * weights[c];
    scores[ri] = sigmoid(s);
  }
  return scores;
}

LassoModel fit_lasso(const Matrix& x, std::span<const int> y, double beta,
                     const LassoOptions& options) {
  check_inputs(x, y, beta);
  const std::size_t d = x.cols();

  LassoModel model;
  model.weights.assign(d, 0.0);
  model.bias = 0.0;
  model.beta = beta;

  std::vector<double> grad_w(d), next_w(d);
  double step = 1.0;

  for (std::size_t iter = 0; iter < options.max_iterations; ++iter) {
    step = std::min(step * 2.0, 1e3);
    double grad_bias = 0.0;
    smooth_gradient(x, y, model.weights, model.bias, grad_w, grad_bias);
    const double loss = smooth_loss(x, y, model.weights, model.bias);
    if (!std::isfinite(loss)) throw NumericError("fit_lasso: non-finite loss");

    double next_bias = 0.0;
    double next_loss = 0.0;
    for (;;) {
      for (std::size_t c = 0; c < d; ++c) {
        next_w[c] =
            soft_threshold(model.weights[c] - step * grad_w[c], step * beta);
      }
      next_bias = model.bias - step * grad_bias;

      // Backtrack until the quadratic upper bound at this step size holds.
      double dot = 0.0, sq = 0.0;
      for (std::size_t c = 0; c < d; ++c) {
        const double delta = next_w[c] - model.weights[c];
        dot += grad_w[c] * delta;
        sq += delta * delta;
      }
      const double bias_delta = next_bias - model.bias;
      dot += grad_bias * bias_delta;
      sq += bias_delta * bias_delta;

      next_loss = smooth_loss(x, y, next_w, next_bias);
      if (next_loss <= loss + dot + sq / (2.0 * step) + 1e-15 ||
          step < 1e-12) {
        break;
      }
      step *= 0.5;
    }

    double map_norm = 0.0;
    for (std::size_t c = 0; c < d; ++c) {
      map_norm =
          std::max(map_norm, std::abs(next_w[c] - model.weights[c]) / step);
    }
    map_norm = std::max(map_norm, std::abs(next_bias - model.bias) / step);

    model.weights = next_w;
    model.bias = next_bias;
    model.iterations = iter + 1;
    if (options.on_iteration) {
      options.on_iteration(
          iter + 1, lasso_objective(x, y, model.weights, model.bias, beta));
    }
    if (map_norm <= options.tolerance) {
      model.converged = true;
      break;
    }
  }
  return model;
}

}  // namespace nrbm
