#include "nrbm/model_io.hpp"

#include <bit>
#include <fstream>

#include "nrbm/digest.hpp"
#include "nrbm/errors.hpp"

namespace nrbm {

namespace {

const char kB64Alphabet[] =
    "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";

std::string base64_encode(const std::vector<unsigned char>& bytes) {
  std::string out;
  out.reserve((bytes.size() + 2) / 3 * 4);
  std::size_t i = 0;
  for (; i + 3 <= bytes.size(); i += 3) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8) | bytes[i + 2];
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back(kB64Alphabet[v & 63]);
  }
  const std::size_t rem = bytes.size() - i;
  if (rem == 1) {
    const unsigned v = bytes[i] << 16;
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.append("==");
  } else if (rem == 2) {
    const unsigned v = (bytes[i] << 16) | (bytes[i + 1] << 8);
    out.push_back(kB64Alphabet[(v >> 18) & 63]);
    out.push_back(kB64Alphabet[(v >> 12) & 63]);
    out.push_back(kB64Alphabet[(v >> 6) & 63]);
    out.push_back('=');
  }
  return out;
}

int b64_value(char c) {
  if (c >= 'A' && c <= 'Z') return c - 'A';
  if (c >= 'a' && c <= 'z') return c - 'a' + 26;
  if (c >= '0' && c <= '9') return c - '0' + 52;
  if (c == '+') return 62;
  if (c == '/') return 63;
  return -1;
}

std::vector<unsigned char> base64_decode(const std::string& text) {
  if (text.size() % 4 != 0) {
    throw CorruptError("base64 payload length is not a multiple of 4");
  }
  std::vector<unsigned char> out;
  out.reserve(text.size() / 4 * 3);
  for (std::size_t i = 0; i < text.size(); i += 4) {
    int vals[4];
    int pad = 0;
    for (int j = 0; j < 4; ++j) {
      const char c = text[i + j];
      if (c == '=') {
        if (i + 4 != text.size() || j < 2) {
          throw CorruptError("base64 padding in the middle of the payload");
        }
        vals[j] = 0;
        ++pad;
      } else {
        vals[j] = b64_value(c);
        if (vals[j] < 0) throw CorruptError("invalid base64 character");
        if (pad > 0) throw CorruptError("base64 data after padding");
      }
    }
    const unsigned v = (vals[0] << 18) | (vals[1] << 12) | (vals[2] << 6) |
                       vals[3];
    out.push_back((v >> 16) & 0xff);
    if (pad < 2) out.push_back((v >> 8) & 0xff);
    if (pad < 1) out.push_back(v & 0xff);
  }
  return out;
}

}  // namespace

std::string encode_f64_base64(std::span<const double> values) {
  std::vector<unsigned char> bytes;
  bytes.reserve(values.size() * 8);
  for (double d : values) {
    const std::uint64_t bits = std::bit_cast<std::uint64_t>(d);
    for (int shift = 0; shift < 64; shift += 8) {
      bytes.push_back(static_cast<unsigned char>((bits >> shift) & 0xff));
    }
  }
  return base64_encode(bytes);
}

std::vector<double> decode_f64_base64(const std::string& text) {
  const std::vector<unsigned char> bytes = base64_decode(text);
  if (bytes.size() % 8 != 0) {
    throw CorruptError("float64 payload is not a multiple of 8 bytes");
  }
  std::vector<double> out;
  out.reserve(bytes.size() / 8);
  for (std::size_t i = 0; i < bytes.size(); i += 8) {
    std::uint64_t bits = 0;
    for (int j = 7; j >= 0; --j) {
      bits = (bits << 8) | bytes[i + static_cast<std::size_t>(j)];
    }
    out.push_back(std::bit_cast<double>(bits));
  }
  return out;
}

namespace {

bool known_kind(const std::string& kind) {
  return kind == "rbm" || kind == "nrbm" || kind == "lasso" ||
         kind == "pipeline";
}

nlohmann::json payload_json(const ModelFile& model) {
  nlohmann::json j;
  j["format_version"] = model.format_version;
  j["model_kind"] = model.kind;
  j["master_seed"] = model.master_seed;
  j["train_config"] = model.train_config;

  nlohmann::json dims;
  dims["n_visible"] = model.rbm ? model.rbm->n_visible() : 0;
  dims["n_hidden"] = model.rbm ? model.rbm->n_hidden()
                               : (model.lasso ? model.lasso->weights.size() : 0);
  j["dims"] = dims;

  nlohmann::json params;
  if (model.rbm) {
    params["a"] = encode_f64_base64(model.rbm->visible_bias);
    params["b"] = encode_f64_base64(model.rbm->hidden_bias);
    params["w"] = encode_f64_base64(model.rbm->weights.values());
  }
  if (model.lasso) {
    params["lasso_weights"] = encode_f64_base64(model.lasso->weights);
    params["lasso_bias"] = encode_f64_base64(
        std::span<const double>(&model.lasso->bias, 1));
    params["lasso_beta"] = encode_f64_base64(
        std::span<const double>(&model.lasso->beta, 1));
  }
  j["parameters"] = params;
  return j;
}

}  // namespace

void save_model(const ModelFile& model, const std::string& path) {
  if (!known_kind(model.kind)) {
    throw FormatError("save_model: unknown model kind: " + model.kind);
  }
  if ((model.kind == "rbm" || model.kind == "nrbm" ||
       model.kind == "pipeline") &&
      !model.rbm) {
    throw FormatError("save_model: kind requires RBM parameters");
  }
  if ((model.kind == "lasso" || model.kind == "pipeline") && !model.lasso) {
    throw FormatError("save_model: kind requires lasso parameters");
  }
  nlohmann::json j = payload_json(model);
  j["checksum"] = sha256_hex(j.dump());

  std::ofstream out(path);
  if (!out) throw FormatError("cannot open file for writing: " + path);
  out << j.dump(2) << '\n';
  if (!out) throw FormatError("write failed: " + path);
}

ModelFile load_model(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open file: " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception&) {
    throw CorruptError("model file is not valid JSON (truncated?): " + path);
  }

  if (!j.is_object() || !j.contains("format_version") ||
      !j.contains("model_kind") || !j.contains("parameters") ||
      !j.contains("checksum")) {
    throw FormatError("model file is missing required fields: " + path);
  }
  const int version = j["format_version"].get<int>();
  if (version != kModelFormatVersion) {
    throw VersionError("unsupported model format version " +
                       std::to_string(version));
  }
  const std::string kind = j["model_kind"].get<std::string>();
  if (!known_kind(kind)) {
    throw FormatError("unknown model kind: " + kind);
  }

  const std::string stored_checksum = j["checksum"].get<std::string>();
  nlohmann::json payload = j;
  payload.erase("checksum");
  if (sha256_hex(payload.dump()) != stored_checksum) {
    throw CorruptError("model checksum mismatch: " + path);
  }

  ModelFile model;
  model.format_version = version;
  model.kind = kind;
  model.master_seed = j.value("master_seed", std::uint64_t{0});
  model.train_config = j.value("train_config", nlohmann::json());

  const nlohmann::json& params = j["parameters"];
  if (kind == "rbm" || kind == "nrbm" || kind == "pipeline") {
    if (!params.contains("a") || !params.contains("b") ||
        !params.contains("w")) {
      throw FormatError("model file is missing RBM parameter arrays");
    }
    RbmParams rbm;
    rbm.visible_bias = decode_f64_base64(params["a"].get<std::string>());
    rbm.hidden_bias = decode_f64_base64(params["b"].get<std::string>());
    const std::vector<double> w =
        decode_f64_base64(params["w"].get<std::string>());
    const std::size_t n = rbm.visible_bias.size();
    const std::size_t k = rbm.hidden_bias.size();
    if (w.size() != n * k) {
      throw CorruptError("weight array size does not match dimensions");
    }
    rbm.weights = Matrix(n, k);
    std::copy(w.begin(), w.end(), rbm.weights.data());
    rbm.check();
    model.rbm = std::move(rbm);
  }
  if (kind == "lasso" || kind == "pipeline") {
    if (!params.contains("lasso_weights") || !params.contains("lasso_bias") ||
        !params.contains("lasso_beta")) {
      throw FormatError("model file is missing lasso parameter arrays");
    }
    LassoModel lasso;
    lasso.weights =
        decode_f64_base64(params["lasso_weights"].get<std::string>());
    const std::vector<double> bias =
        decode_f64_base64(params["lasso_bias"].get<std::string>());
    const std::vector<double> beta =
        decode_f64_base64(params["lasso_beta"].get<std::string>());
    if (bias.size() != 1 || beta.size() != 1) {
      throw CorruptError("lasso scalar arrays must hold exactly one value");
    }
    lasso.bias = bias[0];
    lasso.beta = beta[0];
    lasso.converged = true;
    model.lasso = std::move(lasso);
  }
  return model;
}

}  // namespace nrbm
