#pragma once

#include <cstdint>
#include <vector>

#include "mlgcn/tensor.hpp"

namespace mlgcn {

struct AdamConfig {
  double lr = 0.01;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Moment buffers for a fixed set of tensors updated together; one shared step
// counter drives the bias correction for all of them.
struct AdamState {
  struct Slot {
    DenseMatrix m;
    DenseMatrix v;
  };
  std::vector<Slot> slots;
  std::uint64_t step = 0;

  static AdamState for_params(const std::vector<const DenseMatrix*>& params);
};

// One Adam update over all parameter tensors. Throws on any non-finite
// gradient entry; parameters are untouched in that case.
void adam_step(const std::vector<DenseMatrix*>& params,
               const std::vector<const DenseMatrix*>& grads, AdamState& state,
               const AdamConfig& cfg);

}  // namespace mlgcn
