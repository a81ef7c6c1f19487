#include "mlgcn/graph.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <string>
#include <string_view>
#include <utility>

#include "mlgcn/rng.hpp"

namespace mlgcn {

namespace {

namespace fs = std::filesystem;

// Probability that a label-indicator feature column is flipped.
constexpr double kFeatureFlipRate = 0.1;

[[noreturn]] void fail(const fs::path& file, std::size_t line, const std::string& msg) {
  throw DatasetError(file.filename().string() + ":" + std::to_string(line) + ": " + msg);
}

std::string_view trim(std::string_view s) {
  while (!s.empty() && (s.front() == ' ' || s.front() == '\t' || s.front() == '\r')) {
    s.remove_prefix(1);
  }
  while (!s.empty() && (s.back() == ' ' || s.back() == '\t' || s.back() == '\r')) {
    s.remove_suffix(1);
  }
  return s;
}

std::vector<std::string_view> split(std::string_view s, char sep) {
  std::vector<std::string_view> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    const std::size_t pos = s.find(sep, start);
    if (pos == std::string_view::npos) {
      out.push_back(s.substr(start));
      break;
    }
    out.push_back(s.substr(start, pos - start));
    start = pos + 1;
  }
  return out;
}

std::size_t parse_index(std::string_view tok, const fs::path& file, std::size_t line,
                        const std::string& what) {
  tok = trim(tok);
  std::size_t value = 0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    fail(file, line, "expected a non-negative integer for " + what + ", got '" +
                         std::string(tok) + "'");
  }
  return value;
}

double parse_double(std::string_view tok, const fs::path& file, std::size_t line,
                    const std::string& what) {
  tok = trim(tok);
  double value = 0.0;
  const auto [ptr, ec] = std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc() || ptr != tok.data() + tok.size() || tok.empty()) {
    fail(file, line, "expected a number for " + what + ", got '" + std::string(tok) + "'");
  }
  return value;
}

// Reads a file and yields (line number, content) for every line that is not
// blank and not a '#' comment.
std::vector<std::pair<std::size_t, std::string>> read_data_lines(const fs::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw DatasetError("missing file: " + file.string());
  }
  std::vector<std::pair<std::size_t, std::string>> lines;
  std::string raw;
  std::size_t line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const std::string_view content = trim(raw);
    if (content.empty() || content.front() == '#') {
      continue;
    }
    lines.emplace_back(line_no, raw);
  }
  return lines;
}

std::size_t parse_node_id(std::string_view tok, std::size_t n, const fs::path& file,
                          std::size_t line) {
  const std::size_t id = parse_index(tok, file, line, "node id");
  if (id >= n) {
    fail(file, line, "node id " + std::to_string(id) + " out of range (n = " +
                         std::to_string(n) + ")");
  }
  return id;
}

void format_double(std::string& out, double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  out += buf;
}

}  // namespace

std::size_t Graph::train_count() const {
  return static_cast<std::size_t>(std::count(train_mask.begin(), train_mask.end(), 1));
}

std::size_t Graph::test_count() const {
  return static_cast<std::size_t>(std::count(test_mask.begin(), test_mask.end(), 1));
}

void Graph::validate() const {
  if (adjacency.rows != n || adjacency.cols != n) {
    throw DatasetError("graph: adjacency must be n x n");
  }
  adjacency.validate();
  if (features.rows != n || features.cols != d) {
    throw DatasetError("graph: features must be n x d");
  }
  if (labels.rows != n || labels.cols != c) {
    throw DatasetError("graph: labels must be n x c");
  }
  if (train_mask.size() != n || test_mask.size() != n) {
    throw DatasetError("graph: masks must have n entries");
  }
  for (double v : labels.values) {
    if (v != 0.0 && v != 1.0) {
      throw DatasetError("graph: label entries must be 0 or 1");
    }
  }
  // Symmetry with bit-equal weights and an empty diagonal.
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t k = adjacency.row_offsets[i]; k < adjacency.row_offsets[i + 1]; ++k) {
      const std::size_t j = adjacency.col_indices[k];
      if (j == i) {
        throw DatasetError("graph: self-loop stored at node " + std::to_string(i));
      }
      if (adjacency.values[k] <= 0.0) {
        throw DatasetError("graph: edge weights must be positive");
      }
      const auto begin = adjacency.col_indices.begin() + adjacency.row_offsets[j];
      const auto end = adjacency.col_indices.begin() + adjacency.row_offsets[j + 1];
      const auto it = std::lower_bound(begin, end, i);
      if (it == end || *it != i) {
        throw DatasetError("graph: edge " + std::to_string(i) + "-" + std::to_string(j) +
                           " has no mirrored entry");
      }
      const std::size_t mirrored = adjacency.row_offsets[j] +
                                   static_cast<std::size_t>(it - begin);
      if (adjacency.values[mirrored] != adjacency.values[k]) {
        throw DatasetError("graph: edge " + std::to_string(i) + "-" + std::to_string(j) +
                           " has asymmetric weights");
      }
    }
  }
  for (std::size_t i = 0; i < n; ++i) {
    if (train_mask[i] && test_mask[i]) {
      throw DatasetError("graph: node " + std::to_string(i) + " is in both masks");
    }
    if (train_mask[i]) {
      bool labeled = false;
      for (std::size_t y = 0; y < c; ++y) {
        labeled = labeled || labels(i, y) == 1.0;
      }
      if (!labeled) {
        throw DatasetError("graph: train node " + std::to_string(i) + " has no labels");
      }
    }
  }
}

Graph load_dataset(const fs::path& dir) {
  Graph g;

  // meta.tsv: single line "n <tab> d <tab> c".
  const fs::path meta_file = dir / "meta.tsv";
  const auto meta_lines = read_data_lines(meta_file);
  if (meta_lines.size() != 1) {
    throw DatasetError(meta_file.filename().string() + ": expected exactly one data line, got " +
                       std::to_string(meta_lines.size()));
  }
  {
    const auto& [line, content] = meta_lines.front();
    const auto fields = split(content, '\t');
    if (fields.size() != 3) {
      fail(meta_file, line, "expected 3 fields (n, d, c)");
    }
    g.n = parse_index(fields[0], meta_file, line, "node count");
    g.d = parse_index(fields[1], meta_file, line, "feature dimension");
    g.c = parse_index(fields[2], meta_file, line, "class count");
    if (g.n == 0 || g.d == 0 || g.c == 0) {
      fail(meta_file, line, "n, d and c must all be positive");
    }
  }

  // edges.tsv: "u <tab> v <tab> weight", one line per undirected edge.
  const fs::path edges_file = dir / "edges.tsv";
  std::map<std::pair<std::size_t, std::size_t>, double> edges;
  for (const auto& [line, content] : read_data_lines(edges_file)) {
    const auto fields = split(content, '\t');
    if (fields.size() != 3) {
      fail(edges_file, line, "expected 3 fields (u, v, weight)");
    }
    const std::size_t u = parse_node_id(fields[0], g.n, edges_file, line);
    const std::size_t v = parse_node_id(fields[1], g.n, edges_file, line);
    if (u == v) {
      fail(edges_file, line, "self-loop on node " + std::to_string(u) + " is not allowed");
    }
    const double w = parse_double(fields[2], edges_file, line, "edge weight");
    if (!std::isfinite(w) || w <= 0.0) {
      fail(edges_file, line, "edge weight must be finite and positive");
    }
    const auto key = std::minmax(u, v);
    const auto [it, inserted] = edges.emplace(key, w);
    if (!inserted) {
      if (it->second != w) {
        fail(edges_file, line, "conflicting weights for edge " + std::to_string(u) + "-" +
                                   std::to_string(v));
      }
      fail(edges_file, line, "duplicate edge " + std::to_string(u) + "-" + std::to_string(v));
    }
  }
  std::vector<Triplet> triplets;
  triplets.reserve(edges.size() * 2);
  for (const auto& [key, w] : edges) {
    triplets.push_back({key.first, key.second, w});
    triplets.push_back({key.second, key.first, w});
  }
  g.adjacency = sparse_from_triplets(g.n, g.n, std::move(triplets));

  // features.tsv: "id <tab> idx:val idx:val ..."; omitted indices are zero.
  const fs::path features_file = dir / "features.tsv";
  g.features = DenseMatrix(g.n, g.d);
  {
    std::vector<std::uint8_t> seen(g.n, 0);
    for (const auto& [line, content] : read_data_lines(features_file)) {
      const auto fields = split(content, '\t');
      if (fields.empty() || fields.size() > 2) {
        fail(features_file, line, "expected 'id<tab>idx:val ...'");
      }
      const std::size_t id = parse_node_id(fields[0], g.n, features_file, line);
      if (seen[id]) {
        fail(features_file, line, "duplicate feature line for node " + std::to_string(id));
      }
      seen[id] = 1;
      if (fields.size() == 1 || trim(fields[1]).empty()) {
        continue;  // all-zero row
      }
      for (std::string_view pair : split(trim(fields[1]), ' ')) {
        pair = trim(pair);
        if (pair.empty()) {
          continue;
        }
        const std::size_t colon = pair.find(':');
        if (colon == std::string_view::npos) {
          fail(features_file, line, "expected 'idx:val', got '" + std::string(pair) + "'");
        }
        const std::size_t idx =
            parse_index(pair.substr(0, colon), features_file, line, "feature index");
        if (idx >= g.d) {
          fail(features_file, line, "feature index " + std::to_string(idx) +
                                        " out of range (d = " + std::to_string(g.d) + ")");
        }
        if (g.features(id, idx) != 0.0) {
          fail(features_file, line, "duplicate feature index " + std::to_string(idx));
        }
        g.features(id, idx) =
            parse_double(pair.substr(colon + 1), features_file, line, "feature value");
      }
    }
  }

  // labels.tsv: "id <tab> l1,l2,...".
  const fs::path labels_file = dir / "labels.tsv";
  g.labels = DenseMatrix(g.n, g.c);
  {
    std::vector<std::uint8_t> seen(g.n, 0);
    for (const auto& [line, content] : read_data_lines(labels_file)) {
      const auto fields = split(content, '\t');
      if (fields.size() != 2) {
        fail(labels_file, line, "expected 'id<tab>l1,l2,...'");
      }
      const std::size_t id = parse_node_id(fields[0], g.n, labels_file, line);
      if (seen[id]) {
        fail(labels_file, line, "duplicate label line for node " + std::to_string(id));
      }
      seen[id] = 1;
      for (std::string_view tok : split(trim(fields[1]), ',')) {
        const std::size_t label = parse_index(tok, labels_file, line, "label id");
        if (label >= g.c) {
          fail(labels_file, line, "label id " + std::to_string(label) +
                                      " out of range (c = " + std::to_string(g.c) + ")");
        }
        if (g.labels(id, label) != 0.0) {
          fail(labels_file, line, "duplicate label " + std::to_string(label));
        }
        g.labels(id, label) = 1.0;
      }
    }
  }

  // split.tsv: "id <tab> train|test".
  const fs::path split_file = dir / "split.tsv";
  g.train_mask.assign(g.n, 0);
  g.test_mask.assign(g.n, 0);
  std::vector<std::size_t> split_line(g.n, 0);
  for (const auto& [line, content] : read_data_lines(split_file)) {
    const auto fields = split(content, '\t');
    if (fields.size() != 2) {
      fail(split_file, line, "expected 'id<tab>train|test'");
    }
    const std::size_t id = parse_node_id(fields[0], g.n, split_file, line);
    if (g.train_mask[id] || g.test_mask[id]) {
      fail(split_file, line, "duplicate split entry for node " + std::to_string(id));
    }
    const std::string_view role = trim(fields[1]);
    if (role == "train") {
      g.train_mask[id] = 1;
    } else if (role == "test") {
      g.test_mask[id] = 1;
    } else {
      fail(split_file, line, "split role must be 'train' or 'test', got '" + std::string(role) +
                                 "'");
    }
    split_line[id] = line;
  }
  if (g.train_count() == 0) {
    throw DatasetError(split_file.filename().string() + ": no training nodes");
  }
  for (std::size_t i = 0; i < g.n; ++i) {
    if (!g.train_mask[i]) {
      continue;
    }
    bool labeled = false;
    for (std::size_t y = 0; y < g.c; ++y) {
      labeled = labeled || g.labels(i, y) == 1.0;
    }
    if (!labeled) {
      fail(split_file, split_line[i],
           "train node " + std::to_string(i) + " has no labels in labels.tsv");
    }
  }

  g.validate();
  return g;
}

void save_dataset(const Graph& g, const fs::path& dir) {
  g.validate();
  fs::create_directories(dir);

  const auto write_file = [&dir](const char* name, const std::string& body) {
    const fs::path path = dir / name;
    std::ofstream out(path, std::ios::binary);
    if (!out) {
      throw DatasetError("cannot write file: " + path.string());
    }
    out << body;
  };

  std::string meta = std::to_string(g.n) + "\t" + std::to_string(g.d) + "\t" +
                     std::to_string(g.c) + "\n";
  write_file("meta.tsv", meta);

  std::string edges;
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t k = g.adjacency.row_offsets[i]; k < g.adjacency.row_offsets[i + 1]; ++k) {
      const std::size_t j = g.adjacency.col_indices[k];
      if (j <= i) {
        continue;  // each undirected edge written once
      }
      edges += std::to_string(i) + "\t" + std::to_string(j) + "\t";
      format_double(edges, g.adjacency.values[k]);
      edges += "\n";
    }
  }
  write_file("edges.tsv", edges);

  std::string features;
  for (std::size_t i = 0; i < g.n; ++i) {
    bool any = false;
    for (std::size_t k = 0; k < g.d; ++k) {
      any = any || g.features(i, k) != 0.0;
    }
    if (!any) {
      continue;
    }
    features += std::to_string(i) + "\t";
    bool first = true;
    for (std::size_t k = 0; k < g.d; ++k) {
      if (g.features(i, k) == 0.0) {
        continue;
      }
      if (!first) {
        features += " ";
      }
      first = false;
      features += std::to_string(k) + ":";
      format_double(features, g.features(i, k));
    }
    features += "\n";
  }
  write_file("features.tsv", features);

  std::string labels;
  for (std::size_t i = 0; i < g.n; ++i) {
    bool any = false;
    for (std::size_t y = 0; y < g.c; ++y) {
      any = any || g.labels(i, y) == 1.0;
    }
    if (!any) {
      continue;
    }
    labels += std::to_string(i) + "\t";
    bool first = true;
    for (std::size_t y = 0; y < g.c; ++y) {
      if (g.labels(i, y) != 1.0) {
        continue;
      }
      if (!first) {
        labels += ",";
      }
      first = false;
      labels += std::to_string(y);
    }
    labels += "\n";
  }
  write_file("labels.tsv", labels);

  std::string split;
  for (std::size_t i = 0; i < g.n; ++i) {
    if (g.train_mask[i]) {
      split += std::to_string(i) + "\ttrain\n";
    } else if (g.test_mask[i]) {
      split += std::to_string(i) + "\ttest\n";
    }
  }
  write_file("split.tsv", split);
}

SparseMatrix normalize_adjacency(const Graph& g) {
  std::vector<double> deg(g.n, 1.0);  // implicit unit self-loop
  for (std::size_t i = 0; i < g.n; ++i) {
    for (std::size_t k = g.adjacency.row_offsets[i]; k < g.adjacency.row_offsets[i + 1]; ++k) {
      deg[i] += g.adjacency.values[k];
    }
  }
  std::vector<Triplet> triplets;
  triplets.reserve(g.adjacency.nnz() + g.n);
  for (std::size_t i = 0; i < g.n; ++i) {
    // deg_i * deg_j is commutative, so mirrored entries come out bit-equal.
    triplets.push_back({i, i, 1.0 / std::sqrt(deg[i] * deg[i])});
    for (std::size_t k = g.adjacency.row_offsets[i]; k < g.adjacency.row_offsets[i + 1]; ++k) {
      const std::size_t j = g.adjacency.col_indices[k];
      triplets.push_back({i, j, g.adjacency.values[k] / std::sqrt(deg[i] * deg[j])});
    }
  }
  return sparse_from_triplets(g.n, g.n, std::move(triplets));
}

void SyntheticSpec::validate() const {
  if (nodes < 2) {
    throw DatasetError("synthetic spec: need at least 2 nodes");
  }
  if (classes < 2) {
    throw DatasetError("synthetic spec: need at least 2 classes");
  }
  if (!(p_in >= 0.0 && p_in <= 1.0) || !(p_out >= 0.0 && p_out <= 1.0)) {
    throw DatasetError("synthetic spec: p_in and p_out must be in [0, 1]");
  }
  if (!(train_fraction > 0.0 && train_fraction <= 1.0)) {
    throw DatasetError("synthetic spec: train_fraction must be in (0, 1]");
  }
  for (const CorrPair& pair : corr_pairs) {
    if (pair.primary >= classes || pair.secondary >= classes) {
      throw DatasetError("synthetic spec: correlation pair label out of range");
    }
    if (pair.primary == pair.secondary) {
      throw DatasetError("synthetic spec: correlation pair must name two distinct labels");
    }
    if (!(pair.rho >= 0.0 && pair.rho <= 1.0)) {
      throw DatasetError("synthetic spec: correlation strength must be in [0, 1]");
    }
  }
}

Graph generate_synthetic(const SyntheticSpec& spec) {
  spec.validate();
  const std::size_t n = spec.nodes;
  const std::size_t c = spec.classes;
  const std::size_t d = c + spec.noise_dims;

  Graph g;
  g.n = n;
  g.d = d;
  g.c = c;

  // Labels: one uniform primary label per node, plus correlated secondaries.
  SplitMix64 label_rng(derive_stream({spec.seed, kStreamSynthLabels}));
  g.labels = DenseMatrix(n, c);
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t primary = label_rng.next_below(c);
    g.labels(i, primary) = 1.0;
    for (const CorrPair& pair : spec.corr_pairs) {
      if (pair.primary == primary && label_rng.next_unit() < pair.rho) {
        g.labels(i, pair.secondary) = 1.0;
      }
    }
  }

  // Edges: denser between nodes whose label sets intersect.
  SplitMix64 edge_rng(derive_stream({spec.seed, kStreamSynthEdges}));
  std::vector<Triplet> triplets;
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t j = i + 1; j < n; ++j) {
      bool share = false;
      for (std::size_t y = 0; y < c && !share; ++y) {
        share = g.labels(i, y) == 1.0 && g.labels(j, y) == 1.0;
      }
      const double p = share ? spec.p_in : spec.p_out;
      if (edge_rng.next_unit() < p) {
        triplets.push_back({i, j, 1.0});
        triplets.push_back({j, i, 1.0});
      }
    }
  }
  g.adjacency = sparse_from_triplets(n, n, std::move(triplets));

  // Features: label indicators flipped with a fixed rate, then Gaussian noise.
  SplitMix64 feature_rng(derive_stream({spec.seed, kStreamSynthFeatures}));
  g.features = DenseMatrix(n, d);
  for (std::size_t i = 0; i < n; ++i) {
    for (std::size_t y = 0; y < c; ++y) {
      double v = g.labels(i, y);
      if (feature_rng.next_unit() < kFeatureFlipRate) {
        v = 1.0 - v;
      }
      g.features(i, y) = v;
    }
    for (std::size_t k = 0; k < spec.noise_dims; ++k) {
      g.features(i, c + k) = feature_rng.next_normal();
    }
  }

  // Masks: a seeded shuffle; the first round(train_fraction * n) nodes train.
  SplitMix64 mask_rng(derive_stream({spec.seed, kStreamSynthMasks}));
  std::vector<std::size_t> order(n);
  for (std::size_t i = 0; i < n; ++i) {
    order[i] = i;
  }
  for (std::size_t i = 0; i + 1 < n; ++i) {
    const std::size_t j = i + mask_rng.next_below(n - i);
    std::swap(order[i], order[j]);
  }
  std::size_t train_k = static_cast<std::size_t>(std::llround(spec.train_fraction * n));
  train_k = std::clamp<std::size_t>(train_k, 1, n);
  g.train_mask.assign(n, 0);
  g.test_mask.assign(n, 0);
  for (std::size_t i = 0; i < n; ++i) {
    (i < train_k ? g.train_mask : g.test_mask)[order[i]] = 1;
  }

  g.validate();
  return g;
}

}  // namespace mlgcn
