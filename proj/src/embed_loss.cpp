#include "mlgcn/embed_loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mlgcn {

namespace {

double dot_rows(const DenseMatrix& a, std::size_t i, const DenseMatrix& b, std::size_t j) {
  const double* x = &a.values[i * a.cols];
  const double* y = &b.values[j * b.cols];
  double acc = 0.0;
  for (std::size_t k = 0; k < a.cols; ++k) {
    acc += x[k] * y[k];
  }
  return acc;
}

// dst row i += alpha * src row j
void axpy_row(DenseMatrix& dst, std::size_t i, const DenseMatrix& src, std::size_t j,
              double alpha) {
  double* d = &dst.values[i * dst.cols];
  const double* s = &src.values[j * src.cols];
  for (std::size_t k = 0; k < dst.cols; ++k) {
    d[k] += alpha * s[k];
  }
}

}  // namespace

std::size_t NoiseDistribution::sample(SplitMix64& rng) const {
  const double u = rng.next_unit();
  const auto it = std::upper_bound(cumulative.begin(), cumulative.end(), u);
  if (it != cumulative.end()) {
    return static_cast<std::size_t>(it - cumulative.begin());
  }
  // u landed beyond the accumulated mass (rounding in the prefix sums);
  // fall back to the last class with positive probability.
  for (std::size_t i = probs.size(); i-- > 0;) {
    if (probs[i] > 0.0) {
      return i;
    }
  }
  throw std::runtime_error("noise distribution: no class has positive probability");
}

NoiseDistribution build_noise_distribution(const Graph& g) {
  std::vector<double> counts(g.c, 0.0);
  for (std::size_t i = 0; i < g.n; ++i) {
    if (!g.train_mask[i]) {
      continue;
    }
    for (std::size_t y = 0; y < g.c; ++y) {
      counts[y] += g.labels(i, y);
    }
  }
  std::size_t positive = 0;
  for (double count : counts) {
    positive += count > 0.0 ? 1 : 0;
  }
  if (positive < 2) {
    throw std::runtime_error(
        "noise distribution: need at least two label classes with positive count on "
        "training nodes, got " +
        std::to_string(positive));
  }
  NoiseDistribution dist;
  dist.probs.resize(g.c);
  double total = 0.0;
  for (std::size_t y = 0; y < g.c; ++y) {
    dist.probs[y] = std::pow(counts[y], 0.75);
    total += dist.probs[y];
  }
  dist.cumulative.resize(g.c);
  double running = 0.0;
  for (std::size_t y = 0; y < g.c; ++y) {
    dist.probs[y] /= total;
    running += dist.probs[y];
    dist.cumulative[y] = running;
  }
  return dist;
}

std::vector<std::size_t> sample_negatives(const NoiseDistribution& dist, std::size_t forbidden,
                                          std::size_t k, SplitMix64& rng) {
  bool escapable = false;
  for (std::size_t y = 0; y < dist.probs.size() && !escapable; ++y) {
    escapable = y != forbidden && dist.probs[y] > 0.0;
  }
  if (!escapable) {
    throw std::runtime_error(
        "sample_negatives: every class except the forbidden one has zero probability");
  }
  std::vector<std::size_t> out(k);
  for (std::size_t t = 0; t < k; ++t) {
    std::size_t y;
    do {
      y = dist.sample(rng);
    } while (y == forbidden);
    out[t] = y;
  }
  return out;
}

PairSets build_pair_sets(const Graph& g) {
  PairSets pairs;
  for (std::size_t i = 0; i < g.n; ++i) {
    if (!g.train_mask[i]) {
      continue;
    }
    PairSets::NodeEntry entry;
    entry.node = i;
    for (std::size_t y = 0; y < g.c; ++y) {
      if (g.labels(i, y) == 1.0) {
        entry.labels.push_back(y);
      }
    }
    if (entry.labels.size() >= 2) {
      pairs.multi_label_count += 1;
      for (std::size_t a : entry.labels) {
        for (std::size_t b : entry.labels) {
          if (a != b) {
            entry.ordered_pairs.emplace_back(a, b);
          }
        }
      }
    }
    pairs.entries.push_back(std::move(entry));
  }
  return pairs;
}

NegativeSource make_epoch_negative_source(const NoiseDistribution& dist, std::size_t k,
                                          std::uint64_t seed, std::uint64_t epoch,
                                          std::uint64_t stream_tag) {
  return [&dist, k, seed, epoch, stream_tag](std::size_t node, std::size_t pair_index,
                                             std::size_t forbidden) {
    SplitMix64 rng(derive_stream({seed, stream_tag, epoch, node, pair_index}));
    return sample_negatives(dist, forbidden, k, rng);
  };
}

NodeLabelResult node_label_loss(const DenseMatrix& h1, const LabelEmbedding& emb,
                                const PairSets& pairs, const NegativeSource& negatives) {
  if (emb.z.cols != h1.cols) {
    throw ShapeError("node_label_loss: embedding width must match the hidden width");
  }
  if (pairs.entries.empty()) {
    throw std::runtime_error("node_label_loss: no training nodes");
  }
  NodeLabelResult result;
  result.h1_grad = DenseMatrix(h1.rows, h1.cols);
  result.z_grad = DenseMatrix(emb.z.rows, emb.z.cols);
  const double node_norm = 1.0 / static_cast<double>(pairs.entries.size());
  for (const PairSets::NodeEntry& entry : pairs.entries) {
    const std::size_t i = entry.node;
    const double w = node_norm / static_cast<double>(entry.labels.size());
    for (std::size_t p = 0; p < entry.labels.size(); ++p) {
      const std::size_t y = entry.labels[p];
      // Positive pair: -log sigmoid(z_y . h_i)
      const double pos_dot = dot_rows(emb.z, y, h1, i);
      result.loss += w * softplus(-pos_dot);
      const double pos_coeff = -(1.0 - sigmoid_scalar(pos_dot)) * w;
      axpy_row(result.h1_grad, i, emb.z, y, pos_coeff);
      axpy_row(result.z_grad, y, h1, i, pos_coeff);
      // Negatives: -log sigmoid(-z_t . h_i) each
      for (std::size_t t : negatives(i, p, y)) {
        const double neg_dot = dot_rows(emb.z, t, h1, i);
        result.loss += w * softplus(neg_dot);
        const double neg_coeff = sigmoid_scalar(neg_dot) * w;
        axpy_row(result.h1_grad, i, emb.z, t, neg_coeff);
        axpy_row(result.z_grad, t, h1, i, neg_coeff);
      }
    }
  }
  return result;
}

LabelLabelResult label_label_loss(const LabelEmbedding& emb, const PairSets& pairs,
                                  const NegativeSource& negatives) {
  LabelLabelResult result;
  result.z_grad = DenseMatrix(emb.z.rows, emb.z.cols);
  if (pairs.multi_label_count == 0) {
    return result;  // no co-occurring labels anywhere; the loss is defined as zero
  }
  const double node_norm = 1.0 / static_cast<double>(pairs.multi_label_count);
  for (const PairSets::NodeEntry& entry : pairs.entries) {
    if (entry.ordered_pairs.empty()) {
      continue;
    }
    const double w = node_norm / static_cast<double>(entry.ordered_pairs.size());
    for (std::size_t q = 0; q < entry.ordered_pairs.size(); ++q) {
      const auto [a, b] = entry.ordered_pairs[q];
      // Positive pair: -log sigmoid(z_b . z_a); both rows receive gradient.
      const double pos_dot = dot_rows(emb.z, b, emb.z, a);
      result.loss += w * softplus(-pos_dot);
      const double pos_coeff = -(1.0 - sigmoid_scalar(pos_dot)) * w;
      axpy_row(result.z_grad, b, emb.z, a, pos_coeff);
      axpy_row(result.z_grad, a, emb.z, b, pos_coeff);
      // Negatives avoid only the target label b; a draw may repeat a.
      for (std::size_t t : negatives(entry.node, q, b)) {
        const double neg_dot = dot_rows(emb.z, t, emb.z, a);
        result.loss += w * softplus(neg_dot);
        const double neg_coeff = sigmoid_scalar(neg_dot) * w;
        axpy_row(result.z_grad, t, emb.z, a, neg_coeff);
        axpy_row(result.z_grad, a, emb.z, t, neg_coeff);
      }
    }
  }
  return result;
}

}  // namespace mlgcn
