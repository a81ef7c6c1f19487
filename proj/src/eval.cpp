#include "mlgcn/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <stdexcept>
#include <string>

#include "mlgcn/rng.hpp"

namespace mlgcn {

namespace {

MethodResult score(const Graph& g, const TrainConfig& cfg, const std::string& method,
                   double fraction) {
  const TrainResult trained = train(g, cfg);
  const DenseMatrix pred = predict(g, cfg, trained.params);
  MethodResult row;
  row.method = method;
  row.fraction = fraction;
  row.seed = cfg.seed;
  row.metrics = micro_f1(pred, g.labels, g.test_mask);
  return row;
}

}  // namespace

MetricReport micro_f1(const DenseMatrix& pred, const DenseMatrix& truth,
                      const std::vector<std::uint8_t>& mask) {
  if (pred.rows != truth.rows || pred.cols != truth.cols) {
    throw ShapeError("micro_f1: prediction and truth shapes differ");
  }
  if (mask.size() != pred.rows) {
    throw ShapeError("micro_f1: mask length must equal the number of rows");
  }
  bool any = false;
  MetricReport report;
  for (std::size_t i = 0; i < pred.rows; ++i) {
    if (!mask[i]) {
      continue;
    }
    any = true;
    for (std::size_t j = 0; j < pred.cols; ++j) {
      const bool predicted = pred(i, j) == 1.0;
      const bool actual = truth(i, j) == 1.0;
      report.tp += predicted && actual ? 1 : 0;
      report.fp += predicted && !actual ? 1 : 0;
      report.fn += !predicted && actual ? 1 : 0;
    }
  }
  if (!any) {
    throw std::runtime_error("micro_f1: mask selects no nodes");
  }
  const std::size_t denom = 2 * report.tp + report.fp + report.fn;
  // No positives predicted or present anywhere: nothing was missed, score 1.
  report.micro_f1 =
      denom == 0 ? 1.0 : 2.0 * static_cast<double>(report.tp) / static_cast<double>(denom);
  return report;
}

std::vector<MethodResult> run_ablation(const Graph& g, const TrainConfig& base) {
  struct Variant {
    const char* name;
    Propagation propagation;
    double lambda1;
    double lambda2;
  };
  const Variant variants[] = {
      {"MLP", Propagation::kIdentity, 0.0, 0.0},
      {"GCN", Propagation::kNormalized, 0.0, 0.0},
      {"Partly ML-GCN", Propagation::kNormalized, 0.0, base.lambda2},
      {"ML-GCN", Propagation::kNormalized, base.lambda1, base.lambda2},
  };
  std::vector<MethodResult> results;
  for (const Variant& variant : variants) {
    TrainConfig cfg = base;
    cfg.propagation = variant.propagation;
    cfg.lambda1 = variant.lambda1;
    cfg.lambda2 = variant.lambda2;
    results.push_back(score(g, cfg, variant.name, 1.0));
  }
  return results;
}

std::vector<MethodResult> run_size_sweep(const Graph& g, const TrainConfig& base,
                                         const std::vector<double>& fractions) {
  g.validate();
  for (double f : fractions) {
    if (!(f > 0.0 && f <= 1.0)) {
      throw std::invalid_argument("run_size_sweep: fractions must lie in (0, 1]");
    }
  }
  // The pool to draw train nodes from: labeled nodes outside the fixed test set.
  std::vector<std::size_t> pool;
  for (std::size_t i = 0; i < g.n; ++i) {
    if (g.test_mask[i]) {
      continue;
    }
    bool labeled = false;
    for (std::size_t y = 0; y < g.c; ++y) {
      labeled = labeled || g.labels(i, y) == 1.0;
    }
    if (labeled) {
      pool.push_back(i);
    }
  }
  if (pool.empty()) {
    throw std::runtime_error("run_size_sweep: no labeled nodes outside the test mask");
  }

  std::vector<MethodResult> results;
  for (std::size_t fi = 0; fi < fractions.size(); ++fi) {
    const double fraction = fractions[fi];
    std::size_t take = static_cast<std::size_t>(
        std::llround(fraction * static_cast<double>(pool.size())));
    take = std::clamp<std::size_t>(take, 1, pool.size());

    std::vector<std::size_t> order = pool;
    SplitMix64 rng(derive_stream({base.seed, kStreamSweepSubsample, fi}));
    for (std::size_t i = 0; i + 1 < order.size(); ++i) {
      const std::size_t j = i + rng.next_below(order.size() - i);
      std::swap(order[i], order[j]);
    }

    Graph subsampled = g;
    subsampled.train_mask.assign(g.n, 0);
    for (std::size_t i = 0; i < take; ++i) {
      subsampled.train_mask[order[i]] = 1;
    }
    std::vector<std::uint8_t> covered(g.c, 0);
    for (std::size_t i = 0; i < take; ++i) {
      for (std::size_t y = 0; y < g.c; ++y) {
        if (g.labels(order[i], y) == 1.0) {
          covered[y] = 1;
        }
      }
    }
    const std::size_t classes = static_cast<std::size_t>(
        std::count(covered.begin(), covered.end(), 1));
    if (classes < 2) {
      throw std::runtime_error("run_size_sweep: fraction " + std::to_string(fraction) +
                               " leaves fewer than two labeled classes");
    }

    TrainConfig gcn_cfg = base;
    gcn_cfg.propagation = Propagation::kNormalized;
    gcn_cfg.lambda1 = 0.0;
    gcn_cfg.lambda2 = 0.0;
    results.push_back(score(subsampled, gcn_cfg, "GCN", fraction));

    TrainConfig full_cfg = base;
    full_cfg.propagation = Propagation::kNormalized;
    results.push_back(score(subsampled, full_cfg, "ML-GCN", fraction));
  }
  return results;
}

std::string format_table(const std::vector<MethodResult>& results) {
  std::size_t name_width = std::string("method").size();
  for (const MethodResult& row : results) {
    name_width = std::max(name_width, row.method.size());
  }
  const auto pad = [](std::string s, std::size_t width) {
    s.resize(std::max(width, s.size()), ' ');
    return s;
  };
  std::string out = pad("method", name_width) + "  fraction      seed  micro_f1      tp      fp      fn\n";
  char buf[128];
  for (const MethodResult& row : results) {
    std::snprintf(buf, sizeof(buf), "  %8.4f  %8llu    %6.4f  %6zu  %6zu  %6zu\n",
                  row.fraction, static_cast<unsigned long long>(row.seed),
                  row.metrics.micro_f1, row.metrics.tp, row.metrics.fp, row.metrics.fn);
    out += pad(row.method, name_width) + buf;
  }
  return out;
}

}  // namespace mlgcn
