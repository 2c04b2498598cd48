#ifndef NRBM_MODEL_IO_HPP
#define NRBM_MODEL_IO_HPP

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include <json.hpp>

#include "nrbm/lasso.hpp"
#include "nrbm/rbm.hpp"

namespace nrbm {

inline constexpr int kModelFormatVersion = 1;

// Versioned on-disk model: JSON with parameters as base64 little-endian
// IEEE-754 float64 arrays and a SHA-256 checksum over the payload.
// Round trips are bit-exact.
struct ModelFile {
  int format_version = kModelFormatVersion;
  std::string kind;  // "rbm" | "nrbm" | "lasso" | "pipeline"
  std::optional<RbmParams> rbm;
  std::optional<LassoModel> lasso;
  nlohmann::json train_config;  // snapshot; may be null
  std::uint64_t master_seed = 0;
};

void save_model(const ModelFile& model, const std::string& path);
ModelFile load_model(const std::string& path);

// base64 (RFC 4648, padded) over the little-endian float64 image.
std::string encode_f64_base64(std::span<const double> values);
std::vector<double> decode_f64_base64(const std::string& text);

}  // namespace nrbm

#endif  // NRBM_MODEL_IO_HPP
