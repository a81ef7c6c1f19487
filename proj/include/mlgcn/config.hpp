#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "mlgcn/graph.hpp"
#include "mlgcn/trainer.hpp"

namespace mlgcn {

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Every run setting with its default. A parsed config materializes all of
// them, so the manifest written next to a run's outputs is itself a complete
// config file that reproduces the run.
struct RunConfig {
  // run settings
  std::string dataset;  // dataset directory
  std::string model;    // model file, consumed by the eval command
  std::size_t epochs = 200;
  std::size_t hidden_dim = 16;
  std::size_t layers = 2;  // network depth; fixed at two, checked not varied
  double lr = 0.01;
  double lambda1 = 0.25;
  double lambda2 = 0.25;
  std::size_t negatives = 5;
  std::uint64_t seed = 1;
  std::string propagation = "normalized";  // or "identity"
  double threshold = 0.5;
  std::vector<double> fractions = {0.1, 0.2, 0.3, 0.4};
  double fd_step = 1e-5;  // finite-difference step for the gradcheck command

  // synthetic dataset settings (gen command)
  std::size_t n = 0;
  std::size_t classes = 0;
  std::string corr_pairs;  // "a:b:rho,a:b:rho,..."
  double p_in = 0.0;
  double p_out = 0.0;
  std::size_t noise_dims = 0;
  double train_fraction = 0.0;

  TrainConfig train_config() const;
  SyntheticSpec synthetic_spec() const;

  bool operator==(const RunConfig&) const = default;
};

struct ParsedConfig {
  RunConfig values;
  std::vector<std::string> warnings;  // accepted-but-suspicious settings
};

// Flat "key = value" format; blank lines and lines starting with '#' are
// ignored. Unknown or duplicate keys and malformed values are errors naming
// the key and line.
ParsedConfig parse_config_file(const std::filesystem::path& path);
ParsedConfig parse_config_text(const std::string& text, const std::string& origin);

// Emits every key with its resolved value, parseable by parse_config_text.
std::string serialize_config(const RunConfig& cfg);

// Parses the "a:b:rho,..." correlation pair list; empty text gives no pairs.
std::vector<CorrPair> parse_corr_pairs(const std::string& text);

}  // namespace mlgcn
