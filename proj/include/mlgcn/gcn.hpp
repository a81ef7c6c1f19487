#pragma once

#include <cstdint>
#include <vector>

#include "mlgcn/graph.hpp"
#include "mlgcn/tensor.hpp"

namespace mlgcn {

// Weights of the two-layer network: hidden states are
// H1 = relu(A_hat * X * W0) and logits are Z2 = A_hat * H1 * W1.
struct GcnParams {
  DenseMatrix w0;  // d x h
  DenseMatrix w1;  // h x c

  bool operator==(const GcnParams&) const = default;
};

struct ParamGrads {
  DenseMatrix dw0;
  DenseMatrix dw1;
};

// Everything the backward pass needs, kept from the forward pass.
struct ForwardCache {
  SparseMatrix a_hat;  // propagation matrix used for this pass
  DenseMatrix ax;      // A_hat * X
  DenseMatrix z1;      // ax * W0 (pre-activation)
  DenseMatrix h1;      // relu(z1)
  DenseMatrix ah1;     // A_hat * h1
  DenseMatrix z2;      // ah1 * W1 (logits)
  DenseMatrix p;       // sigmoid(z2)
};

ForwardCache gcn_forward(const Graph& g, const SparseMatrix& a_hat, const GcnParams& params);

// Mean binary cross-entropy over the masked (node, class) cells, with
// probabilities clamped to [1e-12, 1 - 1e-12]. Throws if the mask is empty.
double bce_loss(const DenseMatrix& p, const DenseMatrix& y,
                const std::vector<std::uint8_t>& mask);

// Gradient of bce_loss with respect to the logits (sigmoid and BCE fused):
// (P - Y) / #masked_cells on masked rows, zero elsewhere.
DenseMatrix bce_logit_grad(const DenseMatrix& p, const DenseMatrix& y,
                           const std::vector<std::uint8_t>& mask);

// Backpropagates logit_grad (n x c) through both layers. h1_grad_injected
// (n x h) is an extra gradient on the hidden states from losses outside this
// module; it joins the chain before the relu gate, so it reaches W0 but not W1.
ParamGrads gcn_backward(const ForwardCache& cache, const Graph& g, const GcnParams& params,
                        const DenseMatrix& logit_grad, const DenseMatrix& h1_grad_injected);

}  // namespace mlgcn
