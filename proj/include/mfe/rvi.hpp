#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "mfe/model.hpp"
#include "mfe/simplex.hpp"
#include "mfe/solution.hpp"

namespace mfe {

/// Grid Bellman operator
///   (B h)(i) = max_a r(a, mu_i P(a)) + Interp(h)(mu_i P(a)),
/// with the reward taken at the post-transition state and Freudenthal
/// interpolation per cluster, combined across clusters by product weights.
/// Local interpolants and rewards are tabulated per (cluster, node, action).
class GridBellman {
 public:
  GridBellman(const MeanFieldModel& model, const SimplexGrid& grid, int threads = 0);

  const ProductGrid& nodes() const { return product_; }
  std::size_t size() const { return product_.size(); }
  std::size_t action_count() const { return actions_; }

  /// out = B h; policy (optional) receives the argmax, ties to the smallest index.
  void apply(std::span<const double> h, std::span<double> out, std::span<std::uint32_t> policy = {}) const;

  /// Interp(h) at an arbitrary product-simplex point (cluster-major).
  double interpolate(std::span<const double> h, std::span<const double> mu) const;

  /// Bytes held by the tabulated interpolants and rewards.
  std::size_t table_bytes() const;

 private:
  double node_value(std::span<const double> h, std::size_t node, std::uint32_t* best_action) const;

  const MeanFieldModel* model_;
  const SimplexGrid* grid_;
  ProductGrid product_;
  int threads_;
  std::size_t actions_;
  std::size_t width_;                   // N slots per interpolant
  std::vector<std::uint32_t> vertices_; // [k][i][a][slot]
  std::vector<double> weights_;         // [k][i][a][slot], 0 for unused slots
  std::vector<double> rewards_;         // rho_k <theta^k(a), mu_i P^k(a)>, [k][i][a]
};

struct RviOptions {
  double epsilon = 1e-5;
  std::size_t max_iterations = 1000000;
  std::optional<std::vector<double>> initial_bias;  // default: zero
  int threads = 0;
};

/// Relative value iteration with Krasnoselskii-Mann damping:
///   h' = B h; stop when Span(h' - h) <= eps; h <- (h' - max h' + h) / 2.
/// The gain is the midpoint of [min, max] of h' - h. On hitting the iteration
/// cap the last iterate is returned with converged = false.
ErgodicSolution solve_rvi(const MeanFieldModel& model, const SimplexGrid& grid, const RviOptions& options = {});

}  // namespace mfe
