#pragma once

#include <cstddef>
#include <span>
#include <vector>

namespace mfe {

/// Dense row-major matrix. Sized for the small per-cluster kernels (N x N).
class Matrix {
 public:
  Matrix() = default;
  Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
      : rows_(rows), cols_(cols), data_(rows * cols, fill) {}
  Matrix(std::size_t rows, std::size_t cols, std::vector<double> data);

  static Matrix identity(std::size_t n);

  std::size_t rows() const { return rows_; }
  std::size_t cols() const { return cols_; }

  double& operator()(std::size_t i, std::size_t j) { return data_[i * cols_ + j]; }
  double operator()(std::size_t i, std::size_t j) const { return data_[i * cols_ + j]; }

  std::span<const double> row(std::size_t i) const {
    return {data_.data() + i * cols_, cols_};
  }
  std::span<const double> data() const { return data_; }

  Matrix operator*(const Matrix& rhs) const;

 private:
  std::size_t rows_ = 0;
  std::size_t cols_ = 0;
  std::vector<double> data_;
};

/// Row vector times matrix: out_j = sum_i mu_i P_ij.
void left_multiply(std::span<const double> mu, const Matrix& p, std::span<double> out);
std::vector<double> left_multiply(std::span<const double> mu, const Matrix& p);

/// Matrix times column vector.
std::vector<double> right_multiply(const Matrix& p, std::span<const double> v);

double dot(std::span<const double> a, std::span<const double> b);
double sup_distance(std::span<const double> a, std::span<const double> b);

}  // namespace mfe
