#include "mlgcn/trainer.hpp"

#include <algorithm>
#include <cmath>
#include <optional>
#include <stdexcept>
#include <string>

#include "mlgcn/eval.hpp"
#include "mlgcn/optim.hpp"
#include "mlgcn/rng.hpp"

namespace mlgcn {

namespace {

DenseMatrix glorot_uniform(std::size_t rows, std::size_t cols, std::uint64_t stream_seed) {
  SplitMix64 rng(stream_seed);
  const double limit = std::sqrt(6.0 / static_cast<double>(rows + cols));
  DenseMatrix m(rows, cols);
  for (double& v : m.values) {
    v = rng.next_uniform(-limit, limit);
  }
  return m;
}

GcnParams init_params(std::size_t d, std::size_t h, std::size_t c, std::uint64_t seed) {
  GcnParams params;
  params.w0 = glorot_uniform(d, h, derive_stream({seed, kStreamInitW0}));
  params.w1 = glorot_uniform(h, c, derive_stream({seed, kStreamInitW1}));
  return params;
}

LabelEmbedding init_embedding(std::size_t c, std::size_t h, std::uint64_t seed) {
  SplitMix64 rng(derive_stream({seed, kStreamInitZ}));
  const double limit = 0.5 / static_cast<double>(h);
  LabelEmbedding emb;
  emb.z = DenseMatrix(c, h);
  for (double& v : emb.z.values) {
    v = rng.next_uniform(-limit, limit);
  }
  return emb;
}

SparseMatrix build_propagation(const Graph& g, Propagation propagation) {
  return propagation == Propagation::kIdentity ? SparseMatrix::identity(g.n)
                                               : normalize_adjacency(g);
}

// Mean pairwise cosine distance between the rows of h. Uses the identity
// sum_{i != j} u_i . u_j = |sum u|^2 - sum |u|^2 over unit-normalized rows,
// so the cost stays linear in the number of rows. Zero rows are skipped.
double mean_pairwise_cosine_distance(const DenseMatrix& h) {
  std::vector<double> unit_sum(h.cols, 0.0);
  std::size_t m = 0;
  for (std::size_t i = 0; i < h.rows; ++i) {
    double norm_sq = 0.0;
    for (std::size_t k = 0; k < h.cols; ++k) {
      norm_sq += h(i, k) * h(i, k);
    }
    if (norm_sq <= 0.0) {
      continue;
    }
    const double inv = 1.0 / std::sqrt(norm_sq);
    for (std::size_t k = 0; k < h.cols; ++k) {
      unit_sum[k] += h(i, k) * inv;
    }
    ++m;
  }
  if (m < 2) {
    return 0.0;
  }
  double sum_sq = 0.0;
  for (double v : unit_sum) {
    sum_sq += v * v;
  }
  const double mean_sim =
      (sum_sq - static_cast<double>(m)) / (static_cast<double>(m) * static_cast<double>(m - 1));
  return 1.0 - mean_sim;
}

struct LossPieces {
  double l_sigmoid = 0.0;
  double l_nl = 0.0;
  double l_ll = 0.0;
  DenseMatrix logit_grad;   // n x c
  DenseMatrix h1_injected;  // n x h, already scaled by lambda2
  DenseMatrix z_grad;       // c x h, already scaled by lambda1 / lambda2

  double combined(const TrainConfig& cfg) const {
    return cfg.lambda1 * l_ll + cfg.lambda2 * l_nl + l_sigmoid;
  }
};

// Evaluates every loss term at the current parameters. dist and pairs are
// only consulted for terms whose lambda is non-zero, so a zero-lambda run
// never needs the noise distribution to be constructible.
LossPieces compute_losses(const Graph& g, const TrainConfig& cfg, const ForwardCache& cache,
                          const LabelEmbedding& emb, const NoiseDistribution* dist,
                          const PairSets* pairs, std::uint64_t epoch) {
  LossPieces pieces;
  pieces.l_sigmoid = bce_loss(cache.p, g.labels, g.train_mask);
  pieces.logit_grad = bce_logit_grad(cache.p, g.labels, g.train_mask);
  pieces.h1_injected = DenseMatrix(g.n, cache.h1.cols);
  pieces.z_grad = DenseMatrix(emb.z.rows, emb.z.cols);
  if (cfg.lambda2 != 0.0) {
    const auto source = make_epoch_negative_source(*dist, cfg.negatives, cfg.seed, epoch,
                                                   kStreamNodeLabelNegatives);
    NodeLabelResult nl = node_label_loss(cache.h1, emb, *pairs, source);
    pieces.l_nl = nl.loss;
    add_scaled(pieces.h1_injected, nl.h1_grad, cfg.lambda2);
    add_scaled(pieces.z_grad, nl.z_grad, cfg.lambda2);
  }
  if (cfg.lambda1 != 0.0) {
    const auto source = make_epoch_negative_source(*dist, cfg.negatives, cfg.seed, epoch,
                                                   kStreamLabelLabelNegatives);
    LabelLabelResult ll = label_label_loss(emb, *pairs, source);
    pieces.l_ll = ll.loss;
    add_scaled(pieces.z_grad, ll.z_grad, cfg.lambda1);
  }
  return pieces;
}

}  // namespace

void TrainConfig::validate() const {
  if (epochs == 0) {
    throw std::invalid_argument("train config: epochs must be positive");
  }
  if (hidden_dim == 0) {
    throw std::invalid_argument("train config: hidden_dim must be positive");
  }
  if (!(lr > 0.0) || !std::isfinite(lr)) {
    throw std::invalid_argument("train config: lr must be positive");
  }
  if (!std::isfinite(lambda1) || !std::isfinite(lambda2)) {
    throw std::invalid_argument("train config: loss weights must be finite");
  }
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("train config: threshold must lie in (0, 1)");
  }
}

TrainResult train(const Graph& g, const TrainConfig& cfg) {
  cfg.validate();
  g.validate();
  const SparseMatrix a_hat = build_propagation(g, cfg.propagation);

  TrainResult result;
  result.params = init_params(g.d, cfg.hidden_dim, g.c, cfg.seed);
  result.embedding = init_embedding(g.c, cfg.hidden_dim, cfg.seed);

  const bool embeds_active = cfg.lambda1 != 0.0 || cfg.lambda2 != 0.0;
  std::optional<NoiseDistribution> dist;
  std::optional<PairSets> pairs;
  if (embeds_active) {
    dist = build_noise_distribution(g);
    pairs = build_pair_sets(g);
  }

  AdamState adam = AdamState::for_params(
      {&result.params.w0, &result.params.w1, &result.embedding.z});
  AdamConfig adam_cfg;
  adam_cfg.lr = cfg.lr;

  for (std::uint64_t epoch = 1; epoch <= cfg.epochs; ++epoch) {
    const ForwardCache cache = gcn_forward(g, a_hat, result.params);
    LossPieces pieces = compute_losses(g, cfg, cache, result.embedding,
                                       dist ? &*dist : nullptr, pairs ? &*pairs : nullptr,
                                       epoch);
    const double l_sum = pieces.combined(cfg);
    if (!std::isfinite(l_sum)) {
      throw std::runtime_error("training diverged at epoch " + std::to_string(epoch) +
                               ": combined loss is not finite");
    }
    const ParamGrads grads =
        gcn_backward(cache, g, result.params, pieces.logit_grad, pieces.h1_injected);
    adam_step({&result.params.w0, &result.params.w1, &result.embedding.z},
              {&grads.dw0, &grads.dw1, &pieces.z_grad}, adam, adam_cfg);
    result.report.epochs.push_back({epoch, pieces.l_ll, pieces.l_nl, pieces.l_sigmoid, l_sum,
                                    mean_pairwise_cosine_distance(cache.h1)});
  }

  const DenseMatrix pred = predict(g, a_hat, result.params, cfg.threshold);
  result.report.train_micro_f1 = micro_f1(pred, g.labels, g.train_mask).micro_f1;
  result.report.test_micro_f1 = g.test_count() > 0
                                    ? micro_f1(pred, g.labels, g.test_mask).micro_f1
                                    : std::nan("");
  return result;
}

DenseMatrix predict(const Graph& g, const SparseMatrix& a_hat, const GcnParams& params,
                    double threshold) {
  const ForwardCache cache = gcn_forward(g, a_hat, params);
  DenseMatrix pred(g.n, g.c);
  for (std::size_t t = 0; t < cache.p.size(); ++t) {
    pred.values[t] = cache.p.values[t] > threshold ? 1.0 : 0.0;
  }
  return pred;
}

DenseMatrix predict(const Graph& g, const TrainConfig& cfg, const GcnParams& params) {
  return predict(g, build_propagation(g, cfg.propagation), params, cfg.threshold);
}

double GradCheckResult::max() const {
  return std::max({w0_max_rel_err, w1_max_rel_err, z_max_rel_err});
}

GradCheckResult gradcheck(const Graph& g, const TrainConfig& cfg, double step) {
  cfg.validate();
  g.validate();
  if (!(step > 0.0)) {
    throw std::invalid_argument("gradcheck: step must be positive");
  }
  const SparseMatrix a_hat = build_propagation(g, cfg.propagation);
  GcnParams params = init_params(g.d, cfg.hidden_dim, g.c, cfg.seed);
  LabelEmbedding emb = init_embedding(g.c, cfg.hidden_dim, cfg.seed);

  const bool embeds_active = cfg.lambda1 != 0.0 || cfg.lambda2 != 0.0;
  std::optional<NoiseDistribution> dist;
  std::optional<PairSets> pairs;
  if (embeds_active) {
    dist = build_noise_distribution(g);
    pairs = build_pair_sets(g);
  }

  // Every evaluation replays the epoch-1 substreams, freezing the negatives.
  const auto loss_at = [&]() {
    const ForwardCache cache = gcn_forward(g, a_hat, params);
    return compute_losses(g, cfg, cache, emb, dist ? &*dist : nullptr,
                          pairs ? &*pairs : nullptr, 1)
        .combined(cfg);
  };

  const ForwardCache cache = gcn_forward(g, a_hat, params);
  LossPieces pieces = compute_losses(g, cfg, cache, emb, dist ? &*dist : nullptr,
                                     pairs ? &*pairs : nullptr, 1);
  const ParamGrads analytic = gcn_backward(cache, g, params, pieces.logit_grad,
                                           pieces.h1_injected);

  const auto max_rel_err = [&](DenseMatrix& tensor, const DenseMatrix& grad) {
    double worst = 0.0;
    for (std::size_t t = 0; t < tensor.size(); ++t) {
      const double saved = tensor.values[t];
      tensor.values[t] = saved + step;
      const double up = loss_at();
      tensor.values[t] = saved - step;
      const double down = loss_at();
      tensor.values[t] = saved;
      const double numeric = (up - down) / (2.0 * step);
      const double analytic_v = grad.values[t];
      const double rel =
          std::abs(analytic_v - numeric) / (std::abs(analytic_v) + std::abs(numeric) + 1e-8);
      worst = std::max(worst, rel);
    }
    return worst;
  };

  GradCheckResult result;
  result.w0_max_rel_err = max_rel_err(params.w0, analytic.dw0);
  result.w1_max_rel_err = max_rel_err(params.w1, analytic.dw1);
  result.z_max_rel_err = max_rel_err(emb.z, pieces.z_grad);
  return result;
}

}  // namespace mlgcn
