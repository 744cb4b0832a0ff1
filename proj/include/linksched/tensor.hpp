#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace linksched {

// Row-major dense matrix of doubles.
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double value = 0.0) : rows_(rows), cols_(cols), data_(rows * cols, value) {}

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }
  std::size_t size() const { return data_.size(); }
  bool same_shape(const Matrix& o) const { return rows_ == o.rows_ && cols_ == o.cols_; }

  double& operator()(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
  double operator()(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

  std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
  std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

  std::span<double> values() { return data_; }
  std::span<const double> values() const { return data_; }

  void fill(double v);
  void resize(std::size_t rows, std::size_t cols, double value = 0.0);
  Matrix& operator+=(const Matrix& o);

  friend bool operator==(const Matrix&, const Matrix&) = default;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

// out (+)= a * b^T, with a: n x k, b: m x k, out: n x m.
void matmul_abt(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate = false);
// out (+)= a * b, with a: n x m, b: m x k, out: n x k.
void matmul_ab(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate = false);
// out (+)= a^T * b, with a: n x m, b: n x k, out: m x k.
void matmul_atb(const Matrix& a, const Matrix& b, Matrix& out, bool accumulate = false);

// y (+)= m * x for a vector x of length m.cols().
void matvec(const Matrix& m, std::span<const double> x, std::span<double> y, bool accumulate = false);

}  // namespace linksched
