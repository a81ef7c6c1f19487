#pragma once

#include <cstdint>
#include <vector>

#include "mlgcn/embed_loss.hpp"
#include "mlgcn/gcn.hpp"
#include "mlgcn/graph.hpp"

namespace mlgcn {

enum class Propagation {
  kNormalized,  // degree-normalized adjacency with self-loops
  kIdentity,    // no propagation; the network degenerates to a per-node MLP
};

struct TrainConfig {
  std::size_t epochs = 200;
  std::size_t hidden_dim = 16;
  double lr = 0.01;
  double lambda1 = 0.25;  // weight of the label-label loss
  double lambda2 = 0.25;  // weight of the node-label loss
  std::size_t negatives = 5;
  std::uint64_t seed = 1;
  Propagation propagation = Propagation::kNormalized;
  double threshold = 0.5;

  void validate() const;
};

struct EpochRecord {
  std::size_t epoch = 0;  // 1-based
  double l_ll = 0.0;      // label-label loss
  double l_nl = 0.0;      // node-label loss
  double l_sigmoid = 0.0;
  double l_sum = 0.0;     // lambda1 * l_ll + lambda2 * l_nl + l_sigmoid
  // Mean pairwise cosine distance between hidden rows; logged for inspecting
  // representation collapse, never asserted on.
  double h1_cos_dist = 0.0;
};

struct LossReport {
  std::vector<EpochRecord> epochs;
  double train_micro_f1 = 0.0;
  double test_micro_f1 = 0.0;  // NaN when the test mask is empty
};

struct TrainResult {
  GcnParams params;
  LabelEmbedding embedding;
  LossReport report;
};

// Full-batch joint training of the network weights and the label embedding.
// Deterministic given (g, cfg); negative draws come from substreams keyed by
// (seed, epoch, node, pair), so they are fresh per epoch yet reproducible.
// Throws if the combined loss turns non-finite, naming the epoch.
TrainResult train(const Graph& g, const TrainConfig& cfg);

// Thresholded predictions (strictly greater than), one 0/1 cell per
// (node, class). The label embedding plays no part at inference time.
DenseMatrix predict(const Graph& g, const SparseMatrix& a_hat, const GcnParams& params,
                    double threshold);

// Convenience overload building the propagation matrix from cfg.
DenseMatrix predict(const Graph& g, const TrainConfig& cfg, const GcnParams& params);

struct GradCheckResult {
  double w0_max_rel_err = 0.0;
  double w1_max_rel_err = 0.0;
  double z_max_rel_err = 0.0;

  double max() const;
};

// Compares the analytic gradients of the combined loss at initialization
// against central finite differences, entry by entry. Negative draws are
// frozen (first-epoch substreams are replayed for every evaluation), so the
// objective is a fixed deterministic function during the check.
GradCheckResult gradcheck(const Graph& g, const TrainConfig& cfg, double step);

}  // namespace mlgcn
