#include "nrbm/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <sstream>

#include "nrbm/errors.hpp"
#include "nrbm/rng.hpp"

namespace nrbm {

void DataMatrix::validate() const {
  if (rows() < 1 || cols() < 1) {
    throw DimError("DataMatrix must have at least one row and one column");
  }
  for (double v : values.values()) {
    if (!(v >= 0.0 && v <= 1.0)) {
      throw RangeError("DataMatrix entry outside [0,1]");
    }
  }
  if (!labels.empty() && labels.size() != rows()) {
    throw DimError("label vector length does not match row count");
  }
}

DataMatrix DataMatrix::gather(std::span<const std::size_t> row_indices) const {
  DataMatrix out;
  out.values = Matrix(row_indices.size(), cols());
  if (has_labels()) out.labels.reserve(row_indices.size());
  for (std::size_t i = 0; i < row_indices.size(); ++i) {
    const std::size_t r = row_indices[i];
    if (r >= rows()) throw DimError("gather: row index out of range");
    std::copy_n(values.row(r), cols(), out.values.row(i));
    if (has_labels()) out.labels.push_back(labels[r]);
  }
  return out;
}

namespace {

constexpr std::uint32_t kIdxImagesMagic = 0x00000803;
constexpr std::uint32_t kIdxLabelsMagic = 0x00000801;

std::uint32_t read_be32(std::istream& in, const std::string& what) {
  unsigned char buf[4];
  in.read(reinterpret_cast<char*>(buf), 4);
  if (!in) throw FormatError("IDX: truncated while reading " + what);
  return (std::uint32_t(buf[0]) << 24) | (std::uint32_t(buf[1]) << 16) |
         (std::uint32_t(buf[2]) << 8) | std::uint32_t(buf[3]);
}

std::ifstream open_binary(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("cannot open file: " + path);
  return in;
}

}  // namespace

DataMatrix load_idx(const std::string& images_path) {
  std::ifstream in = open_binary(images_path);
  const std::uint32_t magic = read_be32(in, "magic");
  if (magic != kIdxImagesMagic) {
    std::ostringstream msg;
    msg << "IDX: unsupported magic 0x" << std::hex << magic << " in "
        << images_path;
    throw FormatError(msg.str());
  }
  const std::uint64_t count = read_be32(in, "image count");
  const std::uint64_t height = read_be32(in, "height");
  const std::uint64_t width = read_be32(in, "width");
  if (count == 0 || height == 0 || width == 0) {
    throw FormatError("IDX: zero dimension");
  }
  const std::uint64_t pixels = height * width;
  if (pixels > std::numeric_limits<std::size_t>::max() / count ||
      count * pixels > (std::uint64_t(1) << 40)) {
    throw FormatError("IDX: dimensions overflow");
  }

  std::vector<unsigned char> bytes(count * pixels);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw FormatError("IDX: truncated pixel payload in " + images_path);
  }

  DataMatrix out;
  out.values = Matrix(count, pixels);
  double* dst = out.values.data();
  for (std::size_t i = 0; i < bytes.size(); ++i) {
    dst[i] = static_cast<double>(bytes[i]) / 255.0;
  }
  return out;
}

std::vector<int> load_idx_labels(const std::string& labels_path) {
  std::ifstream in = open_binary(labels_path);
  const std::uint32_t magic = read_be32(in, "magic");
  if (magic != kIdxLabelsMagic) {
    std::ostringstream msg;
    msg << "IDX: unsupported label magic 0x" << std::hex << magic << " in "
        << labels_path;
    throw FormatError(msg.str());
  }
  const std::uint64_t count = read_be32(in, "label count");
  std::vector<unsigned char> bytes(count);
  in.read(reinterpret_cast<char*>(bytes.data()),
          static_cast<std::streamsize>(bytes.size()));
  if (in.gcount() != static_cast<std::streamsize>(bytes.size())) {
    throw FormatError("IDX: truncated label payload in " + labels_path);
  }
  return std::vector<int>(bytes.begin(), bytes.end());
}

DataMatrix load_idx(const std::string& images_path,
                    const std::string& labels_path) {
  DataMatrix data = load_idx(images_path);
  data.labels = load_idx_labels(labels_path);
  if (data.labels.size() != data.rows()) {
    throw DimError("IDX: image and label counts differ");
  }
  return data;
}

namespace {

double parse_double(std::string_view cell, std::size_t line_no) {
  double value = 0.0;
  const char* first = cell.data();
  const char* last = cell.data() + cell.size();
  while (first != last && (*first == ' ' || *first == '\t')) ++first;
  while (last != first && (last[-1] == ' ' || last[-1] == '\t')) --last;
  const auto [ptr, ec] = std::from_chars(first, last, value);
  if (ec != std::errc() || ptr != last || first == last) {
    throw FormatError("CSV: non-numeric cell on line " +
                      std::to_string(line_no));
  }
  return value;
}

int parse_label(double raw, std::size_t line_no) {
  const double rounded = std::nearbyint(raw);
  if (!(std::abs(raw - rounded) < 1e-9) || rounded < 0.0 || rounded > 255.0) {
    throw FormatError("CSV: label is not a small nonnegative integer on line " +
                      std::to_string(line_no));
  }
  return static_cast<int>(rounded);
}

}  // namespace

DataMatrix load_dense_csv(const std::string& path, const CsvOptions& opts) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path);

  std::vector<std::vector<double>> rows;
  std::vector<int> labels;
  std::string line;
  std::size_t line_no = 0;
  std::size_t width = 0;
  bool header_pending = opts.has_header;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    if (header_pending) {
      header_pending = false;
      continue;
    }
    std::vector<double> cells;
    std::size_t start = 0;
    while (true) {
      const std::size_t comma = line.find(',', start);
      const std::string_view cell =
          std::string_view(line).substr(start, comma == std::string::npos
                                                   ? std::string::npos
                                                   : comma - start);
      cells.push_back(parse_double(cell, line_no));
      if (comma == std::string::npos) break;
      start = comma + 1;
    }
    if (width == 0) {
      width = cells.size();
      if (opts.has_label_col && width < 2) {
        throw FormatError("CSV: need at least one feature besides the label");
      }
    } else if (cells.size() != width) {
      throw FormatError("CSV: ragged row on line " + std::to_string(line_no));
    }
    if (opts.has_label_col) {
      labels.push_back(parse_label(cells.back(), line_no));
      cells.pop_back();
    }
    rows.push_back(std::move(cells));
  }
  if (rows.empty()) throw FormatError("CSV: no data rows in " + path);

  const std::size_t n_cols = rows.front().size();
  DataMatrix out;
  out.values = Matrix(rows.size(), n_cols);
  for (std::size_t r = 0; r < rows.size(); ++r) {
    std::copy_n(rows[r].data(), n_cols, out.values.row(r));
  }
  out.labels = std::move(labels);

  if (opts.normalize) {
    // Per-column min-max; a constant column maps to 0.0.
    for (std::size_t c = 0; c < n_cols; ++c) {
      double lo = out.values(0, c), hi = out.values(0, c);
      for (std::size_t r = 1; r < out.rows(); ++r) {
        lo = std::min(lo, out.values(r, c));
        hi = std::max(hi, out.values(r, c));
      }
      const double span = hi - lo;
      for (std::size_t r = 0; r < out.rows(); ++r) {
        out.values(r, c) = span > 0.0 ? (out.values(r, c) - lo) / span : 0.0;
      }
    }
  } else {
    for (double v : out.values.values()) {
      if (!(v >= 0.0 && v <= 1.0)) {
        throw RangeError(
            "CSV: value outside [0,1]; pass normalize to rescale");
      }
    }
  }
  return out;
}

void write_dense_csv(const DataMatrix& data, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot open file for writing: " + path);
  char buf[64];
  for (std::size_t r = 0; r < data.rows(); ++r) {
    for (std::size_t c = 0; c < data.cols(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", data.values(r, c));
      if (c) out << ',';
      out << buf;
    }
    if (data.has_labels()) out << ',' << data.labels[r];
    out << '\n';
  }
  if (!out) throw FormatError("write failed: " + path);
}

DataMatrix load_sparse_bow(const std::string& path, std::size_t vocab_size,
                           std::size_t* blank_lines_skipped) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path);

  struct Doc {
    int label;
    std::vector<std::size_t> present;  // 0-based indices
  };
  std::vector<Doc> docs;
  std::size_t max_index = 0;  // 1-based
  std::size_t blanks = 0;
  std::string line;
  std::size_t line_no = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::istringstream ls(line);
    std::string token;
    if (!(ls >> token)) {
      ++blanks;
      continue;
    }
    if (token[0] == '#') {
      // optional "# vocab=N" declaration
      const std::size_t eq = line.find("vocab=");
      if (eq != std::string::npos && vocab_size == 0) {
        vocab_size = std::strtoull(line.c_str() + eq + 6, nullptr, 10);
      }
      continue;
    }
    Doc doc;
    doc.label = parse_label(parse_double(token, line_no), line_no);
    std::vector<std::size_t> seen;
    while (ls >> token) {
      const std::size_t colon = token.find(':');
      if (colon == std::string::npos) {
        throw FormatError("BOW: expected idx:val on line " +
                          std::to_string(line_no));
      }
      const double idx_raw = parse_double(token.substr(0, colon), line_no);
      const double val = parse_double(token.substr(colon + 1), line_no);
      if (idx_raw < 1.0 || idx_raw != std::floor(idx_raw)) {
        throw FormatError("BOW: index must be a 1-based integer on line " +
                          std::to_string(line_no));
      }
      const std::size_t idx = static_cast<std::size_t>(idx_raw);
      if (std::find(seen.begin(), seen.end(), idx) != seen.end()) {
        throw FormatError("BOW: duplicate index on line " +
                          std::to_string(line_no));
      }
      seen.push_back(idx);
      max_index = std::max(max_index, idx);
      if (val > 0.0) doc.present.push_back(idx - 1);
    }
    docs.push_back(std::move(doc));
  }
  if (blank_lines_skipped != nullptr) *blank_lines_skipped = blanks;
  if (docs.empty()) throw FormatError("BOW: no documents in " + path);

  const std::size_t n_cols = vocab_size > 0 ? vocab_size : max_index;
  if (n_cols == 0) throw FormatError("BOW: empty vocabulary");
  if (max_index > n_cols) {
    throw FormatError("BOW: index exceeds declared vocabulary size");
  }

  DataMatrix out;
  out.values = Matrix(docs.size(), n_cols);
  out.labels.reserve(docs.size());
  for (std::size_t r = 0; r < docs.size(); ++r) {
    for (std::size_t idx : docs[r].present) out.values(r, idx) = 1.0;
    out.labels.push_back(docs[r].label);
  }
  return out;
}

BatchPlan make_batches(std::size_t rows, std::size_t batch_size,
                       std::uint64_t seed, std::uint64_t epoch) {
  if (batch_size < 1) throw UsageError("batch size must be >= 1");
  if (rows < 1) throw DimError("make_batches: need at least one row");

  BatchPlan plan;
  plan.batch_size = std::min(batch_size, rows);
  plan.epoch_seed = stream_id(StreamKind::shuffle, epoch);
  plan.order.resize(rows);
  for (std::size_t i = 0; i < rows; ++i) plan.order[i] = i;

  // Fisher-Yates with an explicit bounded draw; std::shuffle is not
  // reproducible across standard libraries.
  RngStream rng(seed, plan.epoch_seed);
  for (std::size_t i = rows; i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(rng.bounded(i));
    std::swap(plan.order[i - 1], plan.order[j]);
  }
  return plan;
}

BootstrapSample bootstrap(std::size_t rows, std::size_t replicate_index,
                          std::uint64_t seed) {
  if (rows < 1) throw DimError("bootstrap: need at least one row");
  BootstrapSample sample;
  sample.replicate_index = replicate_index;
  sample.row_indices.resize(rows);
  RngStream rng(seed, stream_id(StreamKind::bootstrap, replicate_index));
  for (std::size_t i = 0; i < rows; ++i) {
    sample.row_indices[i] = static_cast<std::size_t>(rng.bounded(rows));
  }
  return sample;
}

}  // namespace nrbm
