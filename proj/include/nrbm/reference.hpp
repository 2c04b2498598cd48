#ifndef NRBM_REFERENCE_HPP
#define NRBM_REFERENCE_HPP

#include <span>
#include <utility>

#include "nrbm/data.hpp"
#include "nrbm/rbm.hpp"

namespace nrbm::reference {

// Plain serial implementations of the hot kernels. They are the ground
// truth the OpenMP kernels are tested against (bit-identical output) and
// the baseline for the benchmark target.

std::pair<SufficientStats, SufficientStats> cd_statistics(
    const RbmParams& params, const DataMatrix& data,
    std::span<const std::size_t> rows, int k_steps,
    const StreamFactory& streams);

Matrix hidden_posteriors(const RbmParams& params, const DataMatrix& data);

// One epoch-by-epoch training loop with the unregularized update
//   w <- w + eta * (<vh>_data - <vh>_model),
// sharing the stream layout of the main trainer. Used to check that the
// barrier update with alpha = 0 reverts to this path exactly.
struct PlainTrainSettings {
  double eta = 0.1;
  int cd_k = 1;
  std::size_t batch_size = 100;
  std::size_t epochs = 1;
  std::uint64_t seed = 0;
};

RbmParams train_plain_rbm(const DataMatrix& data, const RbmParams& init,
                          const PlainTrainSettings& settings);

}  // namespace nrbm::reference

#endif  // NRBM_REFERENCE_HPP
