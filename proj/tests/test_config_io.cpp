#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "mlgcn/config.hpp"
#include "mlgcn/model_io.hpp"
#include "mlgcn/rng.hpp"
#include "testutil.hpp"

using namespace mlgcn;
namespace fs = std::filesystem;

namespace {

std::string parse_error(const std::string& text) {
  try {
    parse_config_text(text, "cfg");
  } catch (const ConfigError& e) {
    return e.what();
  }
  return "";
}

bool contains(const std::string& haystack, const std::string& needle) {
  return haystack.find(needle) != std::string::npos;
}

}  // namespace

TEST_CASE("empty config resolves to the documented defaults") {
  const RunConfig cfg = parse_config_text("", "cfg").values;
  CHECK(cfg.epochs == 200);
  CHECK(cfg.hidden_dim == 16);
  CHECK(cfg.layers == 2);
  CHECK(cfg.lr == 0.01);
  CHECK(cfg.lambda1 == 0.25);
  CHECK(cfg.lambda2 == 0.25);
  CHECK(cfg.negatives == 5);
  CHECK(cfg.seed == 1);
  CHECK(cfg.propagation == "normalized");
  CHECK(cfg.threshold == 0.5);
  CHECK(cfg.fractions == std::vector<double>{0.1, 0.2, 0.3, 0.4});
  CHECK(cfg.fd_step == 1e-5);
}

TEST_CASE("keys parse, comments and blank lines are skipped") {
  const std::string text =
      "# a comment\n"
      "\n"
      "dataset = data/tiny\n"
      "epochs = 42\n"
      "hidden_dim = 8\n"
      "lr = 0.5\n"
      "lambda1 = 0\n"
      "lambda2 = 0.75\n"
      "negatives = 9\n"
      "seed = 1234\n"
      "propagation = identity\n"
      "threshold = 0.75\n"
      "fractions = 0.5,0.25\n"
      "corr_pairs = 0:1:0.8,2:3:0.5\n";
  const ParsedConfig parsed = parse_config_text(text, "cfg");
  CHECK(parsed.warnings.empty());
  const RunConfig& cfg = parsed.values;
  CHECK(cfg.dataset == "data/tiny");
  CHECK(cfg.epochs == 42);
  CHECK(cfg.hidden_dim == 8);
  CHECK(cfg.lr == 0.5);
  CHECK(cfg.lambda1 == 0.0);
  CHECK(cfg.lambda2 == 0.75);
  CHECK(cfg.negatives == 9);
  CHECK(cfg.seed == 1234);
  CHECK(cfg.propagation == "identity");
  CHECK(cfg.threshold == 0.75);
  CHECK(cfg.fractions == std::vector<double>{0.5, 0.25});

  const TrainConfig train = cfg.train_config();
  CHECK(train.epochs == 42);
  CHECK(train.lambda2 == 0.75);
  CHECK(train.propagation == Propagation::kIdentity);

  const std::vector<CorrPair> pairs = parse_corr_pairs(cfg.corr_pairs);
  REQUIRE(pairs.size() == 2);
  CHECK(pairs[0].primary == 0);
  CHECK(pairs[0].secondary == 1);
  CHECK(pairs[0].rho == 0.8);
  CHECK(pairs[1].rho == 0.5);
}

TEST_CASE("mistyped and repeated keys are named with their line") {
  CHECK(contains(parse_error("lamda1 = 0.5\n"), "unknown key 'lamda1'"));
  CHECK(contains(parse_error("lamda1 = 0.5\n"), "cfg:1"));
  CHECK(contains(parse_error("epochs = 5\nepochs = 6\n"), "duplicate key 'epochs'"));
  CHECK(contains(parse_error("epochs = five\n"), "epochs"));
}

TEST_CASE("range violations are refused") {
  CHECK(contains(parse_error("layers = 3\n"), "must be 2"));
  CHECK(contains(parse_error("propagation = dense\n"), "propagation"));
  CHECK(contains(parse_error("threshold = 1\n"), "threshold"));
  CHECK(contains(parse_error("threshold = 0\n"), "threshold"));
  CHECK(contains(parse_error("lr = 0\n"), "lr"));
  CHECK(contains(parse_error("lr = -0.1\n"), "lr"));
  CHECK(contains(parse_error("epochs = 0\n"), "epochs"));
  CHECK(contains(parse_error("fractions = 0.5,0\n"), "fractions"));
  CHECK(contains(parse_error("fractions = 1.5\n"), "fractions"));
  CHECK(contains(parse_error("fd_step = 0\n"), "fd_step"));
}

TEST_CASE("negative loss weights parse with a warning") {
  const ParsedConfig parsed = parse_config_text("lambda1 = -0.25\n", "cfg");
  CHECK(parsed.values.lambda1 == -0.25);
  REQUIRE_FALSE(parsed.warnings.empty());
  CHECK(contains(parsed.warnings[0], "lambda1"));
}

TEST_CASE("malformed correlation pairs are refused") {
  CHECK_THROWS_AS(parse_corr_pairs("0:1"), ConfigError);
  CHECK_THROWS_AS(parse_corr_pairs("a:b:c"), ConfigError);
  CHECK(parse_corr_pairs("").empty());
}

TEST_CASE("serialize then parse reproduces every field") {
  RunConfig cfg;
  cfg.dataset = "somewhere/data";
  cfg.model = "runs/model.bin";
  cfg.epochs = 77;
  cfg.hidden_dim = 24;
  cfg.lr = 0.005;
  cfg.lambda1 = 0.125;
  cfg.lambda2 = 0.0;
  cfg.negatives = 4;
  cfg.seed = 99;
  cfg.propagation = "identity";
  cfg.threshold = 0.6;
  cfg.fractions = {0.2, 0.4};
  cfg.fd_step = 1e-6;
  cfg.n = 500;
  cfg.classes = 6;
  cfg.corr_pairs = "0:1:0.8";
  cfg.p_in = 0.05;
  cfg.p_out = 0.005;
  cfg.noise_dims = 16;
  cfg.train_fraction = 0.15;

  const ParsedConfig back = parse_config_text(serialize_config(cfg), "roundtrip");
  CHECK(back.values == cfg);
}

TEST_CASE("config files load like inline text and report open failures") {
  const auto dir = testutil::scratch_dir("config");
  {
    std::ofstream out(dir / "run.cfg", std::ios::binary);
    out << "epochs = 3\nseed = 8\n";
  }
  const ParsedConfig parsed = parse_config_file(dir / "run.cfg");
  CHECK(parsed.values.epochs == 3);
  CHECK(parsed.values.seed == 8);
  CHECK_THROWS_AS(parse_config_file(dir / "absent.cfg"), ConfigError);
}

TEST_CASE("model files round trip exactly") {
  SplitMix64 rng(113);
  GcnParams params;
  params.w0 = DenseMatrix(7, 4);
  params.w1 = DenseMatrix(4, 3);
  LabelEmbedding emb;
  emb.z = DenseMatrix(3, 4);
  for (double& v : params.w0.values) v = rng.next_normal();
  for (double& v : params.w1.values) v = rng.next_normal();
  for (double& v : emb.z.values) v = rng.next_normal();

  const auto dir = testutil::scratch_dir("model_io");
  const fs::path path = dir / "model.bin";
  write_model(path, params, emb);
  const ModelFile back = read_model(path);
  CHECK(back.d == 7);
  CHECK(back.h == 4);
  CHECK(back.c == 3);
  CHECK(back.params == params);
  CHECK(back.embedding == emb);
}

TEST_CASE("model reader rejects foreign and damaged files") {
  const auto dir = testutil::scratch_dir("model_errors");
  const fs::path good = dir / "model.bin";
  GcnParams params;
  params.w0 = DenseMatrix(2, 2, 1.0);
  params.w1 = DenseMatrix(2, 2, 2.0);
  LabelEmbedding emb;
  emb.z = DenseMatrix(2, 2, 3.0);
  write_model(good, params, emb);

  SUBCASE("bad magic") {
    testutil::write_file(dir, "bad.bin", "JUNKJUNKJUNKJUNK");
    CHECK_THROWS_AS(read_model(dir / "bad.bin"), ModelIoError);
  }
  SUBCASE("truncated payload") {
    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    testutil::write_file(dir, "short.bin", bytes.substr(0, bytes.size() - 9));
    CHECK_THROWS_AS(read_model(dir / "short.bin"), ModelIoError);
  }
  SUBCASE("trailing garbage") {
    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    testutil::write_file(dir, "long.bin", bytes + "x");
    CHECK_THROWS_AS(read_model(dir / "long.bin"), ModelIoError);
  }
  SUBCASE("unsupported version") {
    std::ifstream in(good, std::ios::binary);
    std::string bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    bytes[4] = 9;  // version byte follows the 4-byte magic
    testutil::write_file(dir, "vers.bin", bytes);
    CHECK_THROWS_AS(read_model(dir / "vers.bin"), ModelIoError);
  }
  SUBCASE("missing file") {
    CHECK_THROWS_AS(read_model(dir / "nope.bin"), ModelIoError);
  }
}
