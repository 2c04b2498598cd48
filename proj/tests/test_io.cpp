#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cstdlib>
#include <fstream>
#include <sstream>
#include <string>

#include <json.hpp>

#include "nrbm/data.hpp"
#include "nrbm/errors.hpp"
#include "nrbm/model_io.hpp"
#include "nrbm/pgm.hpp"
#include "nrbm/rng.hpp"
#include "support/temp_dir.hpp"

using namespace nrbm;
using testsupport::TempDir;

namespace {

RbmParams random_params(std::size_t n, std::size_t k, std::uint64_t seed) {
  RbmParams p;
  p.visible_bias.resize(n);
  p.hidden_bias.resize(k);
  p.weights = Matrix(n, k);
  RngStream rng(seed, stream_id(StreamKind::generic, n, k));
  for (auto& v : p.visible_bias) v = rng.uniform(-5.0, 5.0);
  for (auto& v : p.hidden_bias) v = rng.uniform(-5.0, 5.0);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = 0; j < k; ++j) {
      p.weights(i, j) = rng.uniform(-5.0, 5.0);
    }
  }
  return p;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace

TEST_CASE("base64 float64 round trip is bit exact") {
  RngStream rng(1, stream_id(StreamKind::generic, 61));
  std::vector<double> values(257);
  for (double& v : values) v = rng.uniform(-1e9, 1e9);
  values[0] = 0.0;
  values[1] = -0.0;
  values[2] = 1e-308;
  const std::vector<double> back = decode_f64_base64(encode_f64_base64(values));
  REQUIRE(back.size() == values.size());
  for (std::size_t i = 0; i < values.size(); ++i) {
    CHECK(std::bit_cast<std::uint64_t>(back[i]) ==
          std::bit_cast<std::uint64_t>(values[i]));
  }
}

TEST_CASE("model round trips are bit exact across kinds") {
  TempDir dir;
  RngStream rng(5, stream_id(StreamKind::generic, 62));
  for (int trial = 0; trial < 100; ++trial) {
    ModelFile model;
    const std::size_t n = 1 + rng.bounded(6);
    const std::size_t k = 1 + rng.bounded(5);
    const int kind = static_cast<int>(rng.bounded(4));
    model.kind = kind == 0 ? "rbm" : kind == 1 ? "nrbm" : kind == 2 ? "lasso"
                                                                    : "pipeline";
    model.master_seed = rng.next_u64();
    if (model.kind != "lasso") model.rbm = random_params(n, k, rng.next_u64());
    if (model.kind == "lasso" || model.kind == "pipeline") {
      LassoModel lasso;
      lasso.weights.resize(model.kind == "lasso" ? n : k);
      for (double& w : lasso.weights) w = rng.uniform(-3.0, 3.0);
      lasso.bias = rng.uniform(-3.0, 3.0);
      lasso.beta = 0.001;
      model.lasso = lasso;
    }

    const std::string path = dir.file("model.json");
    save_model(model, path);
    const ModelFile back = load_model(path);
    CHECK(back.kind == model.kind);
    CHECK(back.master_seed == model.master_seed);
    if (model.rbm) {
      REQUIRE(back.rbm.has_value());
      CHECK(back.rbm->visible_bias == model.rbm->visible_bias);
      CHECK(back.rbm->hidden_bias == model.rbm->hidden_bias);
      CHECK(back.rbm->weights == model.rbm->weights);
    }
    if (model.lasso) {
      REQUIRE(back.lasso.has_value());
      CHECK(back.lasso->weights == model.lasso->weights);
      CHECK(back.lasso->bias == model.lasso->bias);
      CHECK(back.lasso->beta == model.lasso->beta);
    }
  }
}

TEST_CASE("corrupted and mismatched model files are rejected") {
  TempDir dir;
  ModelFile model;
  model.kind = "nrbm";
  model.rbm = random_params(3, 2, 9);
  const std::string path = dir.file("model.json");
  save_model(model, path);
  const std::string original = read_file(path);

  SUBCASE("truncation") {
    dir.write("model.json", original.substr(0, original.size() / 2));
    CHECK_THROWS_AS(load_model(path), CorruptError);
  }
  SUBCASE("parameter tampering breaks the checksum") {
    std::string tampered = original;
    const std::size_t pos = tampered.find("\"a\": \"");
    REQUIRE(pos != std::string::npos);
    tampered[pos + 6] = tampered[pos + 6] == 'A' ? 'B' : 'A';
    dir.write("model.json", tampered);
    CHECK_THROWS_AS(load_model(path), CorruptError);
  }
  SUBCASE("version mismatch") {
    nlohmann::json j = nlohmann::json::parse(original);
    j["format_version"] = 2;
    dir.write("model.json", j.dump());
    CHECK_THROWS_AS(load_model(path), VersionError);
  }
  SUBCASE("unknown model kind") {
    nlohmann::json j = nlohmann::json::parse(original);
    j["model_kind"] = "perceptron";
    dir.write("model.json", j.dump());
    CHECK_THROWS_AS(load_model(path), FormatError);
  }
}

TEST_CASE("filter export") {
  TempDir dir;
  SUBCASE("constant column renders mid-gray") {
    RbmParams p;
    p.visible_bias.assign(4, 0.0);
    p.hidden_bias.assign(1, 0.0);
    p.weights = Matrix(4, 1, 0.3);
    const std::string path = dir.file("flat.pgm");
    export_filters(p, 2, 2, 1, path);
    const std::string content = read_file(path);
    const std::string header = "P5\n2 2\n255\n";
    REQUIRE(content.substr(0, header.size()) == header);
    for (char c : content.substr(header.size())) {
      CHECK(static_cast<unsigned char>(c) == 128);
    }
  }
  SUBCASE("max weight maps to the darkest byte") {
    RbmParams p;
    p.visible_bias.assign(2, 0.0);
    p.hidden_bias.assign(1, 0.0);
    p.weights = Matrix(2, 1);
    p.weights(0, 0) = 1.0;
    p.weights(1, 0) = 0.0;
    const std::string path = dir.file("two.pgm");
    export_filters(p, 2, 1, 1, path);
    const std::string content = read_file(path);
    const std::string header = "P5\n2 1\n255\n";
    REQUIRE(content.substr(0, header.size()) == header);
    CHECK(static_cast<unsigned char>(content[header.size()]) == 0);
    CHECK(static_cast<unsigned char>(content[header.size() + 1]) == 255);
  }
  SUBCASE("100 tiles at 10 columns form a 10x10 grid") {
    RbmParams p = random_params(9, 100, 13);
    const std::string path = dir.file("grid.pgm");
    export_filters(p, 3, 3, 10, path);
    const std::string content = read_file(path);
    // 10 tiles of 3px plus 9 separators in each direction.
    const std::string header = "P5\n39 39\n255\n";
    CHECK(content.substr(0, header.size()) == header);
    CHECK(content.size() == header.size() + 39 * 39);
  }
  SUBCASE("byte-identical across runs") {
    RbmParams p = random_params(16, 6, 21);
    const std::string a = dir.file("a.pgm");
    const std::string b = dir.file("b.pgm");
    export_filters(p, 4, 4, 3, a);
    export_filters(p, 4, 4, 3, b);
    CHECK(read_file(a) == read_file(b));
  }
  SUBCASE("wrong geometry is rejected") {
    RbmParams p = random_params(10, 2, 22);
    CHECK_THROWS_AS(export_filters(p, 3, 3, 1, dir.file("x.pgm")), DimError);
  }
}
