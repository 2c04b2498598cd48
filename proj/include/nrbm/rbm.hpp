#ifndef NRBM_RBM_HPP
#define NRBM_RBM_HPP

#include <cstddef>
#include <span>
#include <utility>
#include <vector>

#include "nrbm/data.hpp"
#include "nrbm/matrix.hpp"
#include "nrbm/rng.hpp"

namespace nrbm {

// Energy model over binary visible/hidden layers:
//   E(v,h) = -(a.v + b.h + v'Wh)
struct RbmParams {
  std::vector<double> visible_bias;  // a, length N
  std::vector<double> hidden_bias;   // b, length K
  Matrix weights;                    // W, N x K

  std::size_t n_visible() const { return visible_bias.size(); }
  std::size_t n_hidden() const { return hidden_bias.size(); }

  // DimError on inconsistent shapes, NumericError on NaN/Inf.
  void check() const;
};

struct GibbsState {
  std::vector<double> visible;  // length N, in [0,1]
  std::vector<double> hidden;   // length K, in [0,1]
  std::size_t step = 0;         // completed alternations
};

// Batch averages of <v h>, <v>, <h>.
struct SufficientStats {
  Matrix vh;                    // N x K
  std::vector<double> v_mean;   // N
  std::vector<double> h_mean;   // K
  std::size_t count = 0;
};

double sigmoid(double x);

double energy(const RbmParams& params, std::span<const double> v,
              std::span<const double> h);

// p(h_k = 1 | v) for all k; v entries in [0,1].
void hidden_conditional(const RbmParams& params, const double* v, double* out);
std::vector<double> hidden_conditional(const RbmParams& params,
                                       std::span<const double> v);

// p(v_n = 1 | h) for all n.
void visible_conditional(const RbmParams& params, const double* h, double* out);
std::vector<double> visible_conditional(const RbmParams& params,
                                        std::span<const double> h);

std::vector<double> sample_bernoulli(std::span<const double> probs,
                                     RngStream& rng);

// Contrastive divergence statistics for one mini-batch. The chain keeps
// sampled binary hidden states and probability-valued (mean-field) visible
// states; final-step expectations use probabilities for both layers.
//
// Row i of the batch draws from streams.stream(i), so the result is
// bit-identical for any thread count or schedule.
std::pair<SufficientStats, SufficientStats> cd_statistics(
    const RbmParams& params, const DataMatrix& data,
    std::span<const std::size_t> rows, int k_steps,
    const StreamFactory& streams);

// --- Exact oracles (enumeration over all 2^(N+K) states; N+K <= 20) ---

inline constexpr std::size_t kOracleMaxUnits = 20;

double exact_log_partition(const RbmParams& params);
double exact_partition(const RbmParams& params);

// Mean over rows of log sum_h exp(-E(v,h)) - log Z. Rows should be binary.
double exact_loglik(const RbmParams& params, const DataMatrix& data);

SufficientStats exact_model_expectation(const RbmParams& params);

struct LoglikGradient {
  std::vector<double> d_visible_bias;
  std::vector<double> d_hidden_bias;
  Matrix d_weights;
};

// Analytic gradient of exact_loglik: E_data[.] - E_model[.].
LoglikGradient exact_loglik_gradient(const RbmParams& params,
                                     const DataMatrix& data);

}  // namespace nrbm

#endif  // NRBM_RBM_HPP
