#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <vector>

#include "mlgcn/tensor.hpp"

namespace mlgcn {

// Thrown on malformed dataset files and on graph invariant violations.
// Messages from the loader name the offending file and line.
class DatasetError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// A multi-label node classification problem instance.
struct Graph {
  std::size_t n = 0;  // nodes
  std::size_t d = 0;  // feature dimension
  std::size_t c = 0;  // label classes

  SparseMatrix adjacency;  // n x n, symmetric, no stored diagonal
  DenseMatrix features;    // n x d
  DenseMatrix labels;      // n x c, entries 0/1; unlabeled nodes have all-zero rows
  std::vector<std::uint8_t> train_mask;  // n entries, disjoint from test_mask
  std::vector<std::uint8_t> test_mask;

  std::size_t train_count() const;
  std::size_t test_count() const;

  // Checks structural invariants (symmetry, no self-loops, mask disjointness,
  // every train node labeled); throws DatasetError on violation.
  void validate() const;

  bool operator==(const Graph&) const = default;
};

// Planted label correlation: nodes whose primary label is `primary` also
// receive `secondary` with probability rho.
struct CorrPair {
  std::size_t primary = 0;
  std::size_t secondary = 0;
  double rho = 0.0;
};

struct SyntheticSpec {
  std::size_t nodes = 0;
  std::size_t classes = 0;
  std::vector<CorrPair> corr_pairs;
  double p_in = 0.0;   // edge probability when label sets intersect
  double p_out = 0.0;  // edge probability otherwise
  std::size_t noise_dims = 0;
  double train_fraction = 0.0;
  std::uint64_t seed = 0;

  void validate() const;
};

// Reads a dataset directory (meta.tsv, edges.tsv, features.tsv, labels.tsv,
// split.tsv). Tab-separated, '#' lines ignored, edges listed once per
// undirected pair.
Graph load_dataset(const std::filesystem::path& dir);

// Writes a graph back out in the same five-file layout; load(save(g)) == g.
void save_dataset(const Graph& g, const std::filesystem::path& dir);

// Symmetric normalization with an implicit unit self-loop on every node:
// entry (i, j) of the result is a_ij / sqrt(deg_i * deg_j) where
// deg_i = 1 + sum_j a_ij.
SparseMatrix normalize_adjacency(const Graph& g);

// Planted-correlation community graph: uniform primary labels, correlated
// secondary labels, denser edges between nodes that share a label, and
// label-indicator features corrupted by random flips plus Gaussian noise.
// Deterministic given spec.seed.
Graph generate_synthetic(const SyntheticSpec& spec);

}  // namespace mlgcn
