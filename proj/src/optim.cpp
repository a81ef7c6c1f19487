#include "mlgcn/optim.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace mlgcn {

AdamState AdamState::for_params(const std::vector<const DenseMatrix*>& params) {
  AdamState state;
  state.slots.reserve(params.size());
  for (const DenseMatrix* p : params) {
    state.slots.push_back({DenseMatrix(p->rows, p->cols), DenseMatrix(p->rows, p->cols)});
  }
  return state;
}

void adam_step(const std::vector<DenseMatrix*>& params,
               const std::vector<const DenseMatrix*>& grads, AdamState& state,
               const AdamConfig& cfg) {
  if (params.size() != grads.size() || params.size() != state.slots.size()) {
    throw ShapeError("adam_step: params, grads and state must line up");
  }
  for (std::size_t s = 0; s < params.size(); ++s) {
    if (params[s]->rows != grads[s]->rows || params[s]->cols != grads[s]->cols ||
        params[s]->rows != state.slots[s].m.rows || params[s]->cols != state.slots[s].m.cols) {
      throw ShapeError("adam_step: tensor " + std::to_string(s) + " shape mismatch");
    }
    if (!all_finite(*grads[s])) {
      throw std::runtime_error("adam_step: non-finite gradient in tensor " + std::to_string(s));
    }
  }
  state.step += 1;
  const double bc1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.step));
  for (std::size_t s = 0; s < params.size(); ++s) {
    DenseMatrix& p = *params[s];
    const DenseMatrix& g = *grads[s];
    AdamState::Slot& slot = state.slots[s];
    for (std::size_t t = 0; t < p.size(); ++t) {
      slot.m.values[t] = cfg.beta1 * slot.m.values[t] + (1.0 - cfg.beta1) * g.values[t];
      slot.v.values[t] =
          cfg.beta2 * slot.v.values[t] + (1.0 - cfg.beta2) * g.values[t] * g.values[t];
      const double m_hat = slot.m.values[t] / bc1;
      const double v_hat = slot.v.values[t] / bc2;
      p.values[t] -= cfg.lr * m_hat / (std::sqrt(v_hat) + cfg.eps);
    }
  }
}

}  // namespace mlgcn
