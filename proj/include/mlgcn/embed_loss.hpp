#pragma once

#include <cstdint>
#include <functional>
#include <utility>
#include <vector>

#include "mlgcn/graph.hpp"
#include "mlgcn/rng.hpp"
#include "mlgcn/tensor.hpp"

namespace mlgcn {

// Trainable label vectors, one row per class, same width as the hidden layer.
struct LabelEmbedding {
  DenseMatrix z;  // c x h

  bool operator==(const LabelEmbedding&) const = default;
};

// Unigram^(3/4) noise distribution over label classes.
struct NoiseDistribution {
  std::vector<double> probs;
  std::vector<double> cumulative;  // inclusive prefix sums of probs

  // Inverse-transform draw; classes with zero probability are never returned.
  std::size_t sample(SplitMix64& rng) const;
};

// Counts how often each label occurs on train-masked nodes and raises the
// counts to the 3/4 power. Throws unless at least two classes have positive
// count (otherwise negative sampling could not avoid the positive class).
NoiseDistribution build_noise_distribution(const Graph& g);

// Draws k negatives, redrawing any sample that hits `forbidden`. Throws if no
// other class has positive probability.
std::vector<std::size_t> sample_negatives(const NoiseDistribution& dist, std::size_t forbidden,
                                          std::size_t k, SplitMix64& rng);

// Positive training pairs, built once from the train-masked nodes.
struct PairSets {
  struct NodeEntry {
    std::size_t node = 0;
    std::vector<std::size_t> labels;  // ascending label ids of this node
    // All ordered label pairs (context, target) of this node; empty unless the
    // node carries at least two labels.
    std::vector<std::pair<std::size_t, std::size_t>> ordered_pairs;
  };
  std::vector<NodeEntry> entries;       // one per train-masked node, ascending
  std::size_t multi_label_count = 0;    // entries with >= 2 labels
};

PairSets build_pair_sets(const Graph& g);

// Supplies the negative draws for one positive pair. Implementations key
// their randomness by (node, pair_index), which makes a loss evaluation a
// deterministic function of the source, independent of visitation order.
using NegativeSource = std::function<std::vector<std::size_t>(
    std::size_t node, std::size_t pair_index, std::size_t forbidden)>;

// Keyed source for one training epoch: pair (node, pair_index) draws from a
// fresh substream derived from (seed, stream_tag, epoch, node, pair_index).
// Reusing the same epoch value replays identical draws, which is what
// gradient checking relies on.
NegativeSource make_epoch_negative_source(const NoiseDistribution& dist, std::size_t k,
                                          std::uint64_t seed, std::uint64_t epoch,
                                          std::uint64_t stream_tag);

struct NodeLabelResult {
  double loss = 0.0;
  DenseMatrix h1_grad;  // n x h
  DenseMatrix z_grad;   // c x h
};

// Negative-sampled loss tying each labeled node's hidden state to its label
// vectors. Per node the positive terms are averaged over the node's labels;
// the result is the mean over all train-masked nodes.
NodeLabelResult node_label_loss(const DenseMatrix& h1, const LabelEmbedding& emb,
                                const PairSets& pairs, const NegativeSource& negatives);

struct LabelLabelResult {
  double loss = 0.0;
  DenseMatrix z_grad;  // c x h
};

// Negative-sampled loss tying together label vectors that co-occur on a node.
// Per multi-label node the terms are averaged over its ordered label pairs;
// the result is the mean over multi-label nodes, or zero if there are none.
LabelLabelResult label_label_loss(const LabelEmbedding& emb, const PairSets& pairs,
                                  const NegativeSource& negatives);

}  // namespace mlgcn
