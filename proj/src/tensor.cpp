#include "linksched/tensor.hpp"

#include <algorithm>

#include "linksched/error.hpp"

namespace linksched {

void Matrix::fill(double v) { std::fill(data_.begin(), data_.end(), v); }

void Matrix::resize(std::size_t rows, std::size_t cols, double value) {
  rows_ = rows;
  cols_ = cols;
  data_.assign(rows * cols, value);
}

Matrix& Matrix::operator+=(const Matrix& o) {
  if (!same_shape(o)) throw StateError("matrix shape mismatch in +=");
  for (std::size_t i = 0; i < data_.size(); ++i) data_[i] += o.data_[i];
  return *this;
}

void matmul_abt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  if (a.cols() != b.cols()) throw StateError("matmul_abt: inner dimensions differ");
  if (!accumulate) out.resize(a.rows(), b.rows());
  if (out.rows() != a.rows() || out.cols() != b.rows()) throw StateError("matmul_abt: output shape mismatch");
  const std::size_t k = a.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* ar = a.row(i).data();
    double* o = out.row(i).data();
    for (std::size_t j = 0; j < b.rows(); ++j) {
      const double* br = b.row(j).data();
      double s = 0.0;
      for (std::size_t t = 0; t < k; ++t) s += ar[t] * br[t];
      o[j] += s;
    }
  }
}

void matmul_ab(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  if (a.cols() != b.rows()) throw StateError("matmul_ab: inner dimensions differ");
  if (!accumulate) out.resize(a.rows(), b.cols());
  if (out.rows() != a.rows() || out.cols() != b.cols()) throw StateError("matmul_ab: output shape mismatch");
  const std::size_t k = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    double* o = out.row(i).data();
    for (std::size_t t = 0; t < a.cols(); ++t) {
      const double av = a(i, t);
      if (av == 0.0) continue;
      const double* br = b.row(t).data();
      for (std::size_t j = 0; j < k; ++j) o[j] += av * br[j];
    }
  }
}

void matmul_atb(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate) {
  if (a.rows() != b.rows()) throw StateError("matmul_atb: row counts differ");
  if (!accumulate) out.resize(a.cols(), b.cols());
  if (out.rows() != a.cols() || out.cols() != b.cols()) throw StateError("matmul_atb: output shape mismatch");
  const std::size_t k = b.cols();
  for (std::size_t i = 0; i < a.rows(); ++i) {
    const double* br = b.row(i).data();
    for (std::size_t r = 0; r < a.cols(); ++r) {
      const double av = a(i, r);
      if (av == 0.0) continue;
      double* o = out.row(r).data();
      for (std::size_t j = 0; j < k; ++j) o[j] += av * br[j];
    }
  }
}

void matvec(const Matrix& m, std::span<const double> x, std::span<double> y, bool accumulate) {
  if (x.size() != m.cols() || y.size() != m.rows()) throw StateError("matvec: shape mismatch");
  for (std::size_t i = 0; i < m.rows(); ++i) {
    const double* r = m.row(i).data();
    double s = 0.0;
    for (std::size_t j = 0; j < x.size(); ++j) s += r[j] * x[j];
    y[i] = accumulate ? y[i] + s : s;
  }
}

}  // namespace linksched
