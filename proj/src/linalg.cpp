#include "mfe/linalg.hpp"

#include <algorithm>
#include <cmath>

#include "mfe/errors.hpp"

namespace mfe {

Matrix::Matrix(std::size_t rows, std::size_t cols, std::vector<double> data)
    : rows_(rows), cols_(cols), data_(std::move(data)) {
  if (data_.size() != rows_ * cols_)
    throw ParameterError("matrix data size does not match its shape");
}

Matrix Matrix::identity(std::size_t n) {
  Matrix m(n, n);
  for (std::size_t i = 0; i < n; ++i) m(i, i) = 1.0;
  return m;
}

Matrix Matrix::operator*(const Matrix& rhs) const {
  if (cols_ != rhs.rows_) throw ParameterError("matrix product shape mismatch");
  Matrix out(rows_, rhs.cols_);
  for (std::size_t i = 0; i < rows_; ++i)
    for (std::size_t k = 0; k < cols_; ++k) {
      const double a = (*this)(i, k);
      for (std::size_t j = 0; j < rhs.cols_; ++j) out(i, j) += a * rhs(k, j);
    }
  return out;
}

void left_multiply(std::span<const double> mu, const Matrix& p, std::span<double> out) {
  if (mu.size() != p.rows() || out.size() != p.cols())
    throw ParameterError("left_multiply: dimension mismatch");
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t i = 0; i < p.rows(); ++i) {
    const double w = mu[i];
    if (w == 0.0) continue;
    const auto r = p.row(i);
    for (std::size_t j = 0; j < r.size(); ++j) out[j] += w * r[j];
  }
}

std::vector<double> left_multiply(std::span<const double> mu, const Matrix& p) {
  std::vector<double> out(p.cols());
  left_multiply(mu, p, out);
  return out;
}

std::vector<double> right_multiply(const Matrix& p, std::span<const double> v) {
  if (v.size() != p.cols()) throw ParameterError("right_multiply: dimension mismatch");
  std::vector<double> out(p.rows(), 0.0);
  for (std::size_t i = 0; i < p.rows(); ++i) out[i] = dot(p.row(i), v);
  return out;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double sup_distance(std::span<const double> a, std::span<const double> b) {
  double d = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) d = std::max(d, std::abs(a[i] - b[i]));
  return d;
}

}  // namespace mfe
