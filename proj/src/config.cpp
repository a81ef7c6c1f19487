#include "mlgcn/config.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string_view>

namespace mlgcn {

namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

[[noreturn]] void fail(const std::string& origin, std::size_t line, const std::string& msg) {
  throw ConfigError(origin + ":" + std::to_string(line) + ": " + msg);
}

std::uint64_t to_u64(std::string_view value, const std::string& origin, std::size_t line,
                     const std::string& key) {
  std::uint64_t out = 0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    fail(origin, line, "key '" + key + "' expects a non-negative integer, got '" +
                           std::string(value) + "'");
  }
  return out;
}

double to_f64(std::string_view value, const std::string& origin, std::size_t line,
              const std::string& key) {
  double out = 0.0;
  const auto [ptr, ec] = std::from_chars(value.data(), value.data() + value.size(), out);
  if (ec != std::errc() || ptr != value.data() + value.size() || value.empty()) {
    fail(origin, line, "key '" + key + "' expects a number, got '" + std::string(value) + "'");
  }
  return out;
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

TrainConfig RunConfig::train_config() const {
  TrainConfig cfg;
  cfg.epochs = epochs;
  cfg.hidden_dim = hidden_dim;
  cfg.lr = lr;
  cfg.lambda1 = lambda1;
  cfg.lambda2 = lambda2;
  cfg.negatives = negatives;
  cfg.seed = seed;
  cfg.propagation =
      propagation == "identity" ? Propagation::kIdentity : Propagation::kNormalized;
  cfg.threshold = threshold;
  return cfg;
}

SyntheticSpec RunConfig::synthetic_spec() const {
  SyntheticSpec spec;
  spec.nodes = n;
  spec.classes = classes;
  spec.corr_pairs = parse_corr_pairs(corr_pairs);
  spec.p_in = p_in;
  spec.p_out = p_out;
  spec.noise_dims = noise_dims;
  spec.train_fraction = train_fraction;
  spec.seed = seed;
  return spec;
}

std::vector<CorrPair> parse_corr_pairs(const std::string& text) {
  std::vector<CorrPair> pairs;
  const std::string_view view = trim(text);
  if (view.empty()) {
    return pairs;
  }
  std::size_t start = 0;
  while (start <= view.size()) {
    const std::size_t comma = view.find(',', start);
    const std::string_view item =
        trim(view.substr(start, comma == std::string_view::npos ? comma : comma - start));
    const std::size_t first = item.find(':');
    const std::size_t second = first == std::string_view::npos
                                   ? std::string_view::npos
                                   : item.find(':', first + 1);
    if (first == std::string_view::npos || second == std::string_view::npos) {
      throw ConfigError("corr_pairs entry '" + std::string(item) +
                        "' must look like 'primary:secondary:rho'");
    }
    CorrPair pair;
    const std::string origin = "corr_pairs";
    pair.primary = to_u64(trim(item.substr(0, first)), origin, 0, "corr_pairs");
    pair.secondary = to_u64(trim(item.substr(first + 1, second - first - 1)), origin, 0,
                            "corr_pairs");
    pair.rho = to_f64(trim(item.substr(second + 1)), origin, 0, "corr_pairs");
    pairs.push_back(pair);
    if (comma == std::string_view::npos) {
      break;
    }
    start = comma + 1;
  }
  return pairs;
}

ParsedConfig parse_config_text(const std::string& text, const std::string& origin) {
  ParsedConfig parsed;
  RunConfig& cfg = parsed.values;

  using Setter = std::function<void(std::string_view, std::size_t)>;
  const std::map<std::string, Setter, std::less<>> setters = {
      {"dataset", [&](std::string_view v, std::size_t) { cfg.dataset = std::string(v); }},
      {"model", [&](std::string_view v, std::size_t) { cfg.model = std::string(v); }},
      {"epochs",
       [&](std::string_view v, std::size_t line) { cfg.epochs = to_u64(v, origin, line, "epochs"); }},
      {"hidden_dim",
       [&](std::string_view v, std::size_t line) {
         cfg.hidden_dim = to_u64(v, origin, line, "hidden_dim");
       }},
      {"layers",
       [&](std::string_view v, std::size_t line) { cfg.layers = to_u64(v, origin, line, "layers"); }},
      {"lr", [&](std::string_view v, std::size_t line) { cfg.lr = to_f64(v, origin, line, "lr"); }},
      {"lambda1",
       [&](std::string_view v, std::size_t line) { cfg.lambda1 = to_f64(v, origin, line, "lambda1"); }},
      {"lambda2",
       [&](std::string_view v, std::size_t line) { cfg.lambda2 = to_f64(v, origin, line, "lambda2"); }},
      {"negatives",
       [&](std::string_view v, std::size_t line) {
         cfg.negatives = to_u64(v, origin, line, "negatives");
       }},
      {"seed",
       [&](std::string_view v, std::size_t line) { cfg.seed = to_u64(v, origin, line, "seed"); }},
      {"propagation", [&](std::string_view v, std::size_t) { cfg.propagation = std::string(v); }},
      {"threshold",
       [&](std::string_view v, std::size_t line) {
         cfg.threshold = to_f64(v, origin, line, "threshold");
       }},
      {"fractions",
       [&](std::string_view v, std::size_t line) {
         cfg.fractions.clear();
         std::size_t start = 0;
         while (start <= v.size()) {
           const std::size_t comma = v.find(',', start);
           const std::string_view item =
               trim(v.substr(start, comma == std::string_view::npos ? comma : comma - start));
           cfg.fractions.push_back(to_f64(item, origin, line, "fractions"));
           if (comma == std::string_view::npos) {
             break;
           }
           start = comma + 1;
         }
         if (cfg.fractions.empty()) {
           fail(origin, line, "key 'fractions' expects at least one value");
         }
       }},
      {"fd_step",
       [&](std::string_view v, std::size_t line) { cfg.fd_step = to_f64(v, origin, line, "fd_step"); }},
      {"n", [&](std::string_view v, std::size_t line) { cfg.n = to_u64(v, origin, line, "n"); }},
      {"classes",
       [&](std::string_view v, std::size_t line) { cfg.classes = to_u64(v, origin, line, "classes"); }},
      {"corr_pairs", [&](std::string_view v, std::size_t) { cfg.corr_pairs = std::string(v); }},
      {"p_in",
       [&](std::string_view v, std::size_t line) { cfg.p_in = to_f64(v, origin, line, "p_in"); }},
      {"p_out",
       [&](std::string_view v, std::size_t line) { cfg.p_out = to_f64(v, origin, line, "p_out"); }},
      {"noise_dims",
       [&](std::string_view v, std::size_t line) {
         cfg.noise_dims = to_u64(v, origin, line, "noise_dims");
       }},
      {"train_fraction",
       [&](std::string_view v, std::size_t line) {
         cfg.train_fraction = to_f64(v, origin, line, "train_fraction");
       }},
  };

  std::map<std::string, std::size_t> seen;
  std::istringstream in(text);
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view content = trim(raw);
    if (content.empty() || content.front() == '#') {
      continue;
    }
    const std::size_t eq = content.find('=');
    if (eq == std::string_view::npos) {
      fail(origin, line_no, "expected 'key = value', got '" + std::string(content) + "'");
    }
    const std::string key(trim(content.substr(0, eq)));
    const std::string_view value = trim(content.substr(eq + 1));
    const auto it = setters.find(key);
    if (it == setters.end()) {
      fail(origin, line_no, "unknown key '" + key + "'");
    }
    const auto [seen_it, inserted] = seen.emplace(key, line_no);
    if (!inserted) {
      fail(origin, line_no,
           "duplicate key '" + key + "' (first set on line " +
               std::to_string(seen_it->second) + ")");
    }
    it->second(value, line_no);
  }

  // Range checks on the materialized values.
  if (cfg.layers != 2) {
    throw ConfigError(origin + ": key 'layers' must be 2; the architecture is fixed at two "
                               "propagation layers");
  }
  if (cfg.propagation != "normalized" && cfg.propagation != "identity") {
    throw ConfigError(origin + ": key 'propagation' must be 'normalized' or 'identity', got '" +
                      cfg.propagation + "'");
  }
  if (!(cfg.threshold > 0.0 && cfg.threshold < 1.0)) {
    throw ConfigError(origin + ": key 'threshold' must lie in (0, 1)");
  }
  if (!(cfg.lr > 0.0) || !std::isfinite(cfg.lr)) {
    throw ConfigError(origin + ": key 'lr' must be positive");
  }
  if (cfg.epochs == 0) {
    throw ConfigError(origin + ": key 'epochs' must be positive");
  }
  if (cfg.hidden_dim == 0) {
    throw ConfigError(origin + ": key 'hidden_dim' must be positive");
  }
  for (double f : cfg.fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw ConfigError(origin + ": key 'fractions' entries must lie in (0, 1]");
    }
  }
  if (!std::isfinite(cfg.lambda1) || !std::isfinite(cfg.lambda2)) {
    throw ConfigError(origin + ": loss weights must be finite");
  }
  if (!(cfg.fd_step > 0.0)) {
    throw ConfigError(origin + ": key 'fd_step' must be positive");
  }
  parse_corr_pairs(cfg.corr_pairs);  // reject malformed pair syntax up front

  if (cfg.lambda1 < 0.0) {
    parsed.warnings.push_back("lambda1 is negative (" + format_double(cfg.lambda1) +
                              "); the label-label loss will be pushed upward");
  }
  if (cfg.lambda2 < 0.0) {
    parsed.warnings.push_back("lambda2 is negative (" + format_double(cfg.lambda2) +
                              "); the node-label loss will be pushed upward");
  }
  return parsed;
}

ParsedConfig parse_config_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) {
    throw ConfigError("cannot open config file: " + path.string());
  }
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return parse_config_text(buffer.str(), path.filename().string());
}

std::string serialize_config(const RunConfig& cfg) {
  std::string out;
  const auto line = [&out](const std::string& key, const std::string& value) {
    out += key + " = " + value + "\n";
  };
  line("dataset", cfg.dataset);
  line("model", cfg.model);
  line("epochs", std::to_string(cfg.epochs));
  line("hidden_dim", std::to_string(cfg.hidden_dim));
  line("layers", std::to_string(cfg.layers));
  line("lr", format_double(cfg.lr));
  line("lambda1", format_double(cfg.lambda1));
  line("lambda2", format_double(cfg.lambda2));
  line("negatives", std::to_string(cfg.negatives));
  line("seed", std::to_string(cfg.seed));
  line("propagation", cfg.propagation);
  line("threshold", format_double(cfg.threshold));
  std::string fractions;
  for (std::size_t i = 0; i < cfg.fractions.size(); ++i) {
    fractions += (i == 0 ? "" : ",") + format_double(cfg.fractions[i]);
  }
  line("fractions", fractions);
  line("fd_step", format_double(cfg.fd_step));
  line("n", std::to_string(cfg.n));
  line("classes", std::to_string(cfg.classes));
  line("corr_pairs", cfg.corr_pairs);
  line("p_in", format_double(cfg.p_in));
  line("p_out", format_double(cfg.p_out));
  line("noise_dims", std::to_string(cfg.noise_dims));
  line("train_fraction", format_double(cfg.train_fraction));
  return out;
}

}  // namespace mlgcn
