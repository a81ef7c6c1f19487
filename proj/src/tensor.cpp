#include "mlgcn/tensor.hpp"

#include <algorithm>
#include <cmath>
#include <string>

namespace mlgcn {

namespace {

void require(bool ok, const std::string& msg) {
  if (!ok) {
    throw ShapeError(msg);
  }
}

std::string dims(const DenseMatrix& m) {
  return std::to_string(m.rows) + "x" + std::to_string(m.cols);
}

}  // namespace

SparseMatrix SparseMatrix::identity(std::size_t n) {
  SparseMatrix s;
  s.rows = n;
  s.cols = n;
  s.row_offsets.resize(n + 1);
  s.col_indices.resize(n);
  s.values.assign(n, 1.0);
  for (std::size_t i = 0; i < n; ++i) {
    s.row_offsets[i] = i;
    s.col_indices[i] = i;
  }
  s.row_offsets[n] = n;
  return s;
}

void SparseMatrix::validate() const {
  require(row_offsets.size() == rows + 1, "sparse matrix: row_offsets must have rows + 1 entries");
  require(row_offsets.front() == 0, "sparse matrix: row_offsets must start at 0");
  require(row_offsets.back() == col_indices.size(),
          "sparse matrix: row_offsets must end at nnz");
  require(col_indices.size() == values.size(),
          "sparse matrix: col_indices and values must have equal length");
  for (std::size_t i = 0; i < rows; ++i) {
    require(row_offsets[i] <= row_offsets[i + 1],
            "sparse matrix: row_offsets must be non-decreasing");
    for (std::size_t k = row_offsets[i]; k < row_offsets[i + 1]; ++k) {
      require(col_indices[k] < cols, "sparse matrix: column index out of range");
      if (k > row_offsets[i]) {
        require(col_indices[k - 1] < col_indices[k],
                "sparse matrix: column indices must be strictly increasing within a row");
      }
    }
  }
  for (double v : values) {
    require(std::isfinite(v), "sparse matrix: values must be finite");
  }
}

SparseMatrix sparse_from_triplets(std::size_t rows, std::size_t cols,
                                  std::vector<Triplet> entries) {
  for (const Triplet& t : entries) {
    require(t.row < rows && t.col < cols, "sparse_from_triplets: entry out of range");
  }
  std::sort(entries.begin(), entries.end(), [](const Triplet& a, const Triplet& b) {
    return a.row != b.row ? a.row < b.row : a.col < b.col;
  });
  for (std::size_t k = 1; k < entries.size(); ++k) {
    require(entries[k - 1].row != entries[k].row || entries[k - 1].col != entries[k].col,
            "sparse_from_triplets: duplicate entry at (" + std::to_string(entries[k].row) +
                ", " + std::to_string(entries[k].col) + ")");
  }
  SparseMatrix s;
  s.rows = rows;
  s.cols = cols;
  s.row_offsets.assign(rows + 1, 0);
  s.col_indices.reserve(entries.size());
  s.values.reserve(entries.size());
  for (const Triplet& t : entries) {
    s.row_offsets[t.row + 1] += 1;
    s.col_indices.push_back(t.col);
    s.values.push_back(t.value);
  }
  for (std::size_t i = 0; i < rows; ++i) {
    s.row_offsets[i + 1] += s.row_offsets[i];
  }
  return s;
}

DenseMatrix spmm(const SparseMatrix& s, const DenseMatrix& d) {
  require(s.cols == d.rows, "spmm: inner dimensions differ (" + std::to_string(s.cols) +
                                " vs " + std::to_string(d.rows) + ")");
  DenseMatrix out(s.rows, d.cols);
  for (std::size_t i = 0; i < s.rows; ++i) {
    for (std::size_t k = s.row_offsets[i]; k < s.row_offsets[i + 1]; ++k) {
      const std::size_t j = s.col_indices[k];
      const double v = s.values[k];
      const double* src = &d.values[j * d.cols];
      double* dst = &out.values[i * d.cols];
      for (std::size_t t = 0; t < d.cols; ++t) {
        dst[t] += v * src[t];
      }
    }
  }
  return out;
}

DenseMatrix matmul(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols == b.rows, "matmul: inner dimensions differ (" + dims(a) + " * " + dims(b) + ")");
  DenseMatrix out(a.rows, b.cols);
  // i-l-j order: every output entry accumulates over l in ascending order.
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t l = 0; l < a.cols; ++l) {
      const double av = a(i, l);
      if (av == 0.0) {
        continue;
      }
      const double* brow = &b.values[l * b.cols];
      double* orow = &out.values[i * out.cols];
      for (std::size_t j = 0; j < b.cols; ++j) {
        orow[j] += av * brow[j];
      }
    }
  }
  return out;
}

DenseMatrix matmul_tn(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.rows == b.rows, "matmul_tn: row counts differ (" + dims(a) + " vs " + dims(b) + ")");
  DenseMatrix out(a.cols, b.cols);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t l = 0; l < a.cols; ++l) {
      const double av = a(i, l);
      if (av == 0.0) {
        continue;
      }
      const double* brow = &b.values[i * b.cols];
      double* orow = &out.values[l * out.cols];
      for (std::size_t j = 0; j < b.cols; ++j) {
        orow[j] += av * brow[j];
      }
    }
  }
  return out;
}

DenseMatrix matmul_nt(const DenseMatrix& a, const DenseMatrix& b) {
  require(a.cols == b.cols, "matmul_nt: column counts differ (" + dims(a) + " vs " + dims(b) + ")");
  DenseMatrix out(a.rows, b.rows);
  for (std::size_t i = 0; i < a.rows; ++i) {
    for (std::size_t j = 0; j < b.rows; ++j) {
      const double* arow = &a.values[i * a.cols];
      const double* brow = &b.values[j * b.cols];
      double acc = 0.0;
      for (std::size_t l = 0; l < a.cols; ++l) {
        acc += arow[l] * brow[l];
      }
      out(i, j) = acc;
    }
  }
  return out;
}

DenseMatrix relu(const DenseMatrix& x) {
  DenseMatrix out(x.rows, x.cols);
  for (std::size_t t = 0; t < x.size(); ++t) {
    out.values[t] = x.values[t] > 0.0 ? x.values[t] : 0.0;
  }
  return out;
}

std::vector<std::uint8_t> relu_mask(const DenseMatrix& x) {
  std::vector<std::uint8_t> mask(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) {
    mask[t] = x.values[t] > 0.0 ? 1 : 0;
  }
  return mask;
}

double sigmoid_scalar(double x) {
  // Branch on sign so exp never overflows.
  if (x >= 0.0) {
    return 1.0 / (1.0 + std::exp(-x));
  }
  const double e = std::exp(x);
  return e / (1.0 + e);
}

DenseMatrix sigmoid(const DenseMatrix& x) {
  DenseMatrix out(x.rows, x.cols);
  for (std::size_t t = 0; t < x.size(); ++t) {
    out.values[t] = sigmoid_scalar(x.values[t]);
  }
  return out;
}

double softplus(double x) {
  if (x > 0.0) {
    return x + std::log1p(std::exp(-x));
  }
  return std::log1p(std::exp(x));
}

void add_scaled(DenseMatrix& dst, const DenseMatrix& src, double alpha) {
  require(dst.rows == src.rows && dst.cols == src.cols,
          "add_scaled: shapes differ (" + dims(dst) + " vs " + dims(src) + ")");
  for (std::size_t t = 0; t < dst.size(); ++t) {
    dst.values[t] += alpha * src.values[t];
  }
}

bool all_finite(const DenseMatrix& m) {
  for (double v : m.values) {
    if (!std::isfinite(v)) {
      return false;
    }
  }
  return true;
}

}  // namespace mlgcn
