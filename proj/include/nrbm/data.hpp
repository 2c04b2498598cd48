#ifndef NRBM_DATA_HPP
#define NRBM_DATA_HPP

#include <cstddef>
#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include "nrbm/matrix.hpp"

namespace nrbm {

// M x N matrix of values in [0,1], treated as empirical probabilities of
// binary visible units. Labels are optional integer class labels (binary
// {0,1} wherever the stability pipeline consumes them; the kNN evaluator
// accepts multiclass). Immutable by convention after construction and safe
// to share across threads.
struct DataMatrix {
  Matrix values;            // M x N
  std::vector<int> labels;  // empty, or one label per row

  std::size_t rows() const { return values.rows(); }
  std::size_t cols() const { return values.cols(); }
  bool has_labels() const { return !labels.empty(); }

  // Throws DimError / RangeError when the invariants do not hold.
  void validate() const;

  // New matrix holding the given rows (with labels, when present).
  DataMatrix gather(std::span<const std::size_t> row_indices) const;
};

// IDX (MNIST convention): big-endian dims, magic 0x00000803 for images.
// Pixels are mapped to [0,1] by the fixed 1/255 rule.
DataMatrix load_idx(const std::string& images_path);
DataMatrix load_idx(const std::string& images_path,
                    const std::string& labels_path);
// Magic 0x00000801.
std::vector<int> load_idx_labels(const std::string& labels_path);

struct CsvOptions {
  bool has_label_col = false;  // last column holds an integer class label
  bool has_header = false;
  bool normalize = false;  // per-column min-max into [0,1]
};

DataMatrix load_dense_csv(const std::string& path, const CsvOptions& opts = {});
void write_dense_csv(const DataMatrix& data, const std::string& path);

// SVMlight-style lines: "label idx:val ...", 1-based indices. Any positive
// value is presence (1.0). vocab_size 0 = take max index seen; a leading
// "# vocab=N" line also declares it. Blank lines are skipped and counted.
DataMatrix load_sparse_bow(const std::string& path, std::size_t vocab_size = 0,
                           std::size_t* blank_lines_skipped = nullptr);

struct BatchPlan {
  std::size_t batch_size = 0;
  std::vector<std::size_t> order;  // permutation of 0..M-1
  std::uint64_t epoch_seed = 0;

  std::size_t num_batches() const {
    return order.empty() ? 0 : (order.size() + batch_size - 1) / batch_size;
  }
  std::span<const std::size_t> batch(std::size_t i) const {
    const std::size_t lo = i * batch_size;
    const std::size_t hi = std::min(lo + batch_size, order.size());
    return {order.data() + lo, hi - lo};
  }
};

BatchPlan make_batches(std::size_t rows, std::size_t batch_size,
                       std::uint64_t seed, std::uint64_t epoch);

struct BootstrapSample {
  std::size_t replicate_index = 0;
  std::vector<std::size_t> row_indices;  // size M, sampled with replacement
};

BootstrapSample bootstrap(std::size_t rows, std::size_t replicate_index,
                          std::uint64_t seed);

}  // namespace nrbm

#endif  // NRBM_DATA_HPP
