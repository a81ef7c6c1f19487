#include "mlgcn/gcn.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace mlgcn {

namespace {

constexpr double kProbClamp = 1e-12;

std::size_t masked_cell_count(const DenseMatrix& y, const std::vector<std::uint8_t>& mask) {
  if (mask.size() != y.rows) {
    throw ShapeError("bce: mask length must equal the number of rows");
  }
  std::size_t rows = 0;
  for (std::uint8_t m : mask) {
    rows += m ? 1 : 0;
  }
  if (rows == 0) {
    throw std::runtime_error("bce: no training nodes");
  }
  return rows * y.cols;
}

}  // namespace

ForwardCache gcn_forward(const Graph& g, const SparseMatrix& a_hat, const GcnParams& params) {
  if (a_hat.rows != g.n || a_hat.cols != g.n) {
    throw ShapeError("gcn_forward: propagation matrix must be n x n");
  }
  if (params.w0.rows != g.d) {
    throw ShapeError("gcn_forward: W0 must have d rows");
  }
  if (params.w1.rows != params.w0.cols || params.w1.cols != g.c) {
    throw ShapeError("gcn_forward: W1 must be h x c");
  }
  ForwardCache cache;
  cache.a_hat = a_hat;
  cache.ax = spmm(a_hat, g.features);
  cache.z1 = matmul(cache.ax, params.w0);
  cache.h1 = relu(cache.z1);
  cache.ah1 = spmm(a_hat, cache.h1);
  cache.z2 = matmul(cache.ah1, params.w1);
  cache.p = sigmoid(cache.z2);
  return cache;
}

double bce_loss(const DenseMatrix& p, const DenseMatrix& y,
                const std::vector<std::uint8_t>& mask) {
  if (p.rows != y.rows || p.cols != y.cols) {
    throw ShapeError("bce_loss: prediction and target shapes differ");
  }
  const std::size_t cells = masked_cell_count(y, mask);
  double total = 0.0;
  for (std::size_t i = 0; i < p.rows; ++i) {
    if (!mask[i]) {
      continue;
    }
    for (std::size_t j = 0; j < p.cols; ++j) {
      const double pc = std::clamp(p(i, j), kProbClamp, 1.0 - kProbClamp);
      total += y(i, j) == 1.0 ? -std::log(pc) : -std::log(1.0 - pc);
    }
  }
  return total / static_cast<double>(cells);
}

DenseMatrix bce_logit_grad(const DenseMatrix& p, const DenseMatrix& y,
                           const std::vector<std::uint8_t>& mask) {
  if (p.rows != y.rows || p.cols != y.cols) {
    throw ShapeError("bce_logit_grad: prediction and target shapes differ");
  }
  const std::size_t cells = masked_cell_count(y, mask);
  DenseMatrix grad(p.rows, p.cols);
  const double scale = 1.0 / static_cast<double>(cells);
  for (std::size_t i = 0; i < p.rows; ++i) {
    if (!mask[i]) {
      continue;
    }
    for (std::size_t j = 0; j < p.cols; ++j) {
      grad(i, j) = (p(i, j) - y(i, j)) * scale;
    }
  }
  return grad;
}

ParamGrads gcn_backward(const ForwardCache& cache, const Graph& g, const GcnParams& params,
                        const DenseMatrix& logit_grad, const DenseMatrix& h1_grad_injected) {
  if (logit_grad.rows != g.n || logit_grad.cols != g.c) {
    throw ShapeError("gcn_backward: logit gradient must be n x c");
  }
  if (h1_grad_injected.rows != g.n || h1_grad_injected.cols != params.w0.cols) {
    throw ShapeError("gcn_backward: injected hidden gradient must be n x h");
  }
  ParamGrads grads;
  grads.dw1 = matmul_tn(cache.ah1, logit_grad);
  // Hidden gradient from the logits; the propagation matrix is symmetric, so
  // multiplying by it stands in for its transpose.
  DenseMatrix dh1 = spmm(cache.a_hat, matmul_nt(logit_grad, params.w1));
  add_scaled(dh1, h1_grad_injected, 1.0);
  const auto gate = relu_mask(cache.z1);
  for (std::size_t t = 0; t < dh1.size(); ++t) {
    if (!gate[t]) {
      dh1.values[t] = 0.0;
    }
  }
  grads.dw0 = matmul_tn(cache.ax, dh1);
  return grads;
}

}  // namespace mlgcn
