#pragma once

#include <cstddef>
#include <cstdint>
#include <span>
#include <vector>

#include "mfe/linalg.hpp"

namespace mfe {

/// Point of the probability simplex (or a product of simplices, cluster-major).
using Point = std::vector<double>;

/// Grid vertices and barycentric weights of a point; weights are positive
/// and sum to one.
struct Interpolant {
  std::vector<std::size_t> vertices;
  std::vector<double> weights;
};

/// Regular lattice {c / D : c in N^N, sum c = D} of the simplex, enumerated in
/// ascending lexicographic order of the integer compositions c.
class SimplexGrid {
 public:
  SimplexGrid(int states, int resolution);

  int states() const { return states_; }
  int resolution() const { return resolution_; }
  double step() const { return 1.0 / resolution_; }
  std::size_t size() const { return size_; }

  std::span<const double> point(std::size_t index) const {
    return {points_.data() + index * states_, static_cast<std::size_t>(states_)};
  }
  std::span<const int> composition(std::size_t index) const {
    return {compositions_.data() + index * states_, static_cast<std::size_t>(states_)};
  }

  /// Inverse of composition(); throws ParameterError for an invalid composition.
  std::size_t index_of(std::span<const int> composition) const;

  /// Freudenthal (Kuhn) triangulation of the scaled lattice. Exactly
  /// reproduces mu; a grid point yields a single vertex of weight 1.
  Interpolant interpolate(std::span<const double> mu) const;

  /// Writes at most states() vertices/weights; returns the number written.
  std::size_t interpolate_into(std::span<const double> mu, std::span<std::size_t> vertices,
                               std::span<double> weights) const;

  /// argmin_j ||mu - point(j)||_inf with ties resolved to the smallest index.
  std::size_t nearest_index(std::span<const double> mu) const;

  /// Number of compositions of `total` into `parts` nonnegative integers.
  static std::uint64_t composition_count(int parts, int total);

 private:
  std::uint64_t count(int parts, int total) const;
  std::size_t nearest_index_scaled(std::span<const double> x) const;

  int states_;
  int resolution_;
  std::size_t size_;
  std::vector<int> compositions_;
  std::vector<double> points_;
  // counts_[parts * (D + 1) + total], parts in [0, N + 1]
  std::vector<std::uint64_t> counts_;
};

/// Lexicographic linearisation of K local indices over an M^K product grid.
class ProductGrid {
 public:
  ProductGrid(const SimplexGrid& local, int clusters);

  const SimplexGrid& local() const { return *local_; }
  int clusters() const { return clusters_; }
  std::size_t size() const { return size_; }
  std::size_t stride(int k) const { return strides_[k]; }

  std::size_t local_index(std::size_t node, int k) const {
    return (node / strides_[k]) % local_->size();
  }
  void decode(std::size_t node, std::span<std::size_t> local) const;
  std::size_t encode(std::span<const std::size_t> local) const;

  /// Concatenated coordinates of a node (K * N values).
  Point point(std::size_t node) const;

 private:
  const SimplexGrid* local_;
  int clusters_;
  std::size_t size_;
  std::vector<std::size_t> strides_;
};

/// Clips entries within `tol` of the simplex back onto it; throws DomainError
/// when the point is farther away.
Point project_to_simplex(std::span<const double> mu, double tol = 1e-9);

/// d_H(u, v) = max_{i,j} log(u_i v_j / (v_i u_j)); entries must be positive.
double hilbert_distance(std::span<const double> u, std::span<const double> v);

/// Largest Hilbert distance between two rows of a positive matrix.
double hilbert_diameter(const Matrix& p);

/// Birkhoff coefficient tanh(diam_H(P) / 4) of a positive matrix.
double contraction_coefficient(const Matrix& p);

/// Upsilon(d) = e^d (e^d - 1) / d, with the limit 1 at d = 0.
double metric_comparison_factor(double diameter);

}  // namespace mfe
