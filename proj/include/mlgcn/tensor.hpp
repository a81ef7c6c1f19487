#pragma once

#include <cstddef>
#include <cstdint>
#include <stdexcept>
#include <vector>

namespace mlgcn {

// Thrown on dimension mismatches and malformed sparse structure.
class ShapeError : public std::invalid_argument {
 public:
  using std::invalid_argument::invalid_argument;
};

// Row-major dense matrix of doubles.
struct DenseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<double> values;

  DenseMatrix() = default;
  DenseMatrix(std::size_t r, std::size_t c, double fill = 0.0)
      : rows(r), cols(c), values(r * c, fill) {}

  double& operator()(std::size_t i, std::size_t j) { return values[i * cols + j]; }
  const double& operator()(std::size_t i, std::size_t j) const { return values[i * cols + j]; }

  std::size_t size() const { return values.size(); }

  bool operator==(const DenseMatrix&) const = default;
};

// Compressed sparse row matrix. Column indices are strictly increasing within
// each row, so iteration order (and therefore floating-point accumulation
// order) is fixed by the structure itself.
struct SparseMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> row_offsets;  // rows + 1 entries
  std::vector<std::size_t> col_indices;
  std::vector<double> values;

  static SparseMatrix identity(std::size_t n);

  std::size_t nnz() const { return col_indices.size(); }

  // Checks the CSR invariants; throws ShapeError on violation.
  void validate() const;

  bool operator==(const SparseMatrix&) const = default;
};

struct Triplet {
  std::size_t row = 0;
  std::size_t col = 0;
  double value = 0.0;
};

// Builds a CSR matrix from (row, col, value) entries. Entries are sorted
// internally; duplicate (row, col) pairs are rejected.
SparseMatrix sparse_from_triplets(std::size_t rows, std::size_t cols,
                                  std::vector<Triplet> entries);

// Sparse-dense product. Each output entry accumulates its terms in ascending
// column-index order, so results are bit-stable across runs.
DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d);

// Dense products with a fixed accumulation order over the shared dimension.
DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b);
DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b);  // a^T * b
DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b);  // a * b^T

DenseMatrix relu(const DenseMatrix& x);

// 1 where x > 0 (strictly), 0 elsewhere; the backward gate for relu.
std::vector<std::uint8_t> relu_mask(const DenseMatrix& x);

// Numerically stable elementwise logistic function.
DenseMatrix sigmoid(const DenseMatrix& x);
double sigmoid_scalar(double x);

// log(1 + exp(x)) without overflow; equals -log(sigmoid(-x)).
double softplus(double x);

// dst += alpha * src
void add_scaled(DenseMatrix& dst, const DenseMatrix& src, double alpha);

bool all_finite(const DenseMatrix& m);

}  // namespace mlgcn
