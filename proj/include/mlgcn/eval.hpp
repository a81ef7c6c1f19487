#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "mlgcn/graph.hpp"
#include "mlgcn/tensor.hpp"
#include "mlgcn/trainer.hpp"

namespace mlgcn {

struct MetricReport {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double micro_f1 = 0.0;
};

// Micro-averaged F1 pooled over every masked (node, class) cell:
// 2*tp / (2*tp + fp + fn). The vacuous case (no positives predicted or
// present) scores 1.0. Throws if the mask selects no rows.
MetricReport micro_f1(const DenseMatrix& pred, const DenseMatrix& truth,
                      const std::vector<std::uint8_t>& mask);

// One table row of an ablation or training-size experiment.
struct MethodResult {
  std::string method;
  double fraction = 1.0;  // share of the labeled pool used for training
  std::uint64_t seed = 0;
  MetricReport metrics;
};

// Trains four variants sharing base.seed and scores them on the test mask:
//   MLP            identity propagation, both embedding losses off
//   GCN            normalized propagation, both embedding losses off
//   Partly ML-GCN  normalized propagation, node-label loss only
//   ML-GCN         normalized propagation, both embedding losses on
std::vector<MethodResult> run_ablation(const Graph& g, const TrainConfig& base);

// For each fraction, re-draws that share of the labeled non-test pool as the
// train mask (seeded, test mask untouched) and trains GCN and ML-GCN on it.
// Throws if a fraction leaves fewer than two labeled classes.
std::vector<MethodResult> run_size_sweep(const Graph& g, const TrainConfig& base,
                                         const std::vector<double>& fractions);

// Aligned plain-text table of result rows.
std::string format_table(const std::vector<MethodResult>& results);

}  // namespace mlgcn
