#include "mfe/rvi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfe/errors.hpp"
#include "mfe/parallel.hpp"

namespace mfe {

namespace {
constexpr int kMaxClusters = 16;
}

GridBellman::GridBellman(const MeanFieldModel& model, const SimplexGrid& grid, int threads)
    : model_(&model),
      grid_(&grid),
      product_(grid, model.clusters()),
      threads_(threads),
      actions_(model.action_count()),
      width_(static_cast<std::size_t>(model.states())) {
  if (grid.states() != model.states()) throw ParameterError("grid and model disagree on the state count");
  if (model.clusters() > kMaxClusters) throw ParameterError("too many clusters");
  if (grid.size() > std::numeric_limits<std::uint32_t>::max()) throw ParameterError("grid too large");
  const int n_clusters = model.clusters();
  const std::size_t m = grid.size();
  const std::size_t rows = static_cast<std::size_t>(n_clusters) * m;
  vertices_.assign(rows * actions_ * width_, 0);
  weights_.assign(rows * actions_ * width_, 0.0);
  rewards_.assign(rows * actions_, 0.0);
  parallel_for(rows, threads_, [&](std::size_t begin, std::size_t end) {
    std::vector<double> next(width_);
    std::vector<std::size_t> v(width_);
    std::vector<double> w(width_);
    for (std::size_t row = begin; row < end; ++row) {
      const int k = static_cast<int>(row / m);
      const std::size_t i = row % m;
      for (std::size_t a = 0; a < actions_; ++a) {
        left_multiply(grid.point(i), model.transition(k, a), next);
        const std::size_t base = (row * actions_ + a) * width_;
        const std::size_t count = grid.interpolate_into(next, v, w);
        for (std::size_t s = 0; s < count; ++s) {
          vertices_[base + s] = static_cast<std::uint32_t>(v[s]);
          weights_[base + s] = w[s];
        }
        rewards_[row * actions_ + a] = model.weight(k) * dot(model.unit_reward(k, a), next);
      }
    }
  });
}

std::size_t GridBellman::table_bytes() const {
  return vertices_.size() * sizeof(std::uint32_t) + weights_.size() * sizeof(double) +
         rewards_.size() * sizeof(double);
}

double GridBellman::node_value(std::span<const double> h, std::size_t node, std::uint32_t* best_action) const {
  const int n_clusters = product_.clusters();
  const std::size_t m = grid_->size();
  std::size_t row[kMaxClusters];
  for (int k = 0; k < n_clusters; ++k) row[k] = static_cast<std::size_t>(k) * m + product_.local_index(node, k);

  double best = -std::numeric_limits<double>::infinity();
  std::uint32_t arg = 0;
  for (std::size_t a = 0; a < actions_; ++a) {
    double value = 0.0;
    for (int k = 0; k < n_clusters; ++k) value += rewards_[row[k] * actions_ + a];
    if (n_clusters == 1) {
      const std::size_t base = (row[0] * actions_ + a) * width_;
      for (std::size_t s = 0; s < width_; ++s)
        if (weights_[base + s] != 0.0) value += weights_[base + s] * h[vertices_[base + s]];
    } else {
      // Product weights: iterate over all slot tuples, skipping empty slots.
      std::size_t slot[kMaxClusters] = {};
      while (true) {
        double w = 1.0;
        std::size_t target = 0;
        for (int k = 0; k < n_clusters && w != 0.0; ++k) {
          const std::size_t idx = (row[k] * actions_ + a) * width_ + slot[k];
          w *= weights_[idx];
          target += product_.stride(k) * vertices_[idx];
        }
        if (w != 0.0) value += w * h[target];
        int k = n_clusters - 1;
        while (k >= 0 && ++slot[k] == width_) slot[k--] = 0;
        if (k < 0) break;
      }
    }
    if (value > best) {
      best = value;
      arg = static_cast<std::uint32_t>(a);
    }
  }
  if (best_action) *best_action = arg;
  return best;
}

void GridBellman::apply(std::span<const double> h, std::span<double> out, std::span<std::uint32_t> policy) const {
  const std::size_t n = product_.size();
  if (h.size() != n || out.size() != n) throw ParameterError("bias array has the wrong size");
  if (!policy.empty() && policy.size() != n) throw ParameterError("policy array has the wrong size");
  parallel_for(n, threads_, [&](std::size_t begin, std::size_t end) {
    for (std::size_t node = begin; node < end; ++node)
      out[node] = node_value(h, node, policy.empty() ? nullptr : &policy[node]);
  });
}

double GridBellman::interpolate(std::span<const double> h, std::span<const double> mu) const {
  const int n_clusters = product_.clusters();
  const std::size_t n = width_;
  if (mu.size() != n * n_clusters) throw ParameterError("state has the wrong dimension");
  std::vector<Interpolant> parts;
  for (int k = 0; k < n_clusters; ++k) parts.push_back(grid_->interpolate(mu.subspan(k * n, n)));
  double value = 0.0;
  std::vector<std::size_t> slot(n_clusters, 0);
  while (true) {
    double w = 1.0;
    std::size_t target = 0;
    for (int k = 0; k < n_clusters; ++k) {
      w *= parts[k].weights[slot[k]];
      target += product_.stride(k) * parts[k].vertices[slot[k]];
    }
    value += w * h[target];
    int k = n_clusters - 1;
    while (k >= 0 && ++slot[k] == parts[k].vertices.size()) slot[k--] = 0;
    if (k < 0) break;
  }
  return value;
}

ErgodicSolution solve_rvi(const MeanFieldModel& model, const SimplexGrid& grid, const RviOptions& options) {
  if (!(options.epsilon > 0.0)) throw ParameterError("epsilon must be > 0");
  GridBellman bellman(model, grid, options.threads);
  const std::size_t n = bellman.size();

  std::vector<double> h(n, 0.0);
  if (options.initial_bias) {
    if (options.initial_bias->size() != n) throw ParameterError("initial bias has the wrong size");
    h = *options.initial_bias;
  }
  std::vector<double> next(n);
  ErgodicSolution sol;
  sol.policy.assign(n, 0);
  sol.nodes = n;
  sol.arcs = n * model.action_count();
  sol.transition_bytes = bellman.table_bytes();
  sol.value_bytes = 2 * n * sizeof(double) + n * sizeof(std::uint32_t);
  sol.materialized_bytes = sol.arcs * sizeof(std::uint32_t);

  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    bellman.apply(h, next, sol.policy);
    double lo = std::numeric_limits<double>::infinity();
    double hi = -lo;
    double top = -lo;
    for (std::size_t i = 0; i < n; ++i) {
      const double diff = next[i] - h[i];
      lo = std::min(lo, diff);
      hi = std::max(hi, diff);
      top = std::max(top, next[i]);
    }
    sol.iterations = it;
    sol.sweeps = it;
    sol.span = hi - lo;
    sol.gain_min = lo;
    sol.gain_max = hi;
    sol.gain = 0.5 * (hi + lo);
    if (sol.span <= options.epsilon) {
      sol.converged = true;
      h.swap(next);
      break;
    }
    for (std::size_t i = 0; i < n; ++i) h[i] = 0.5 * (next[i] - top + h[i]);
  }
  const double floor = *std::min_element(h.begin(), h.end());
  for (double& v : h) v -= floor;
  sol.bias = std::move(h);
  return sol;
}

}  // namespace mfe
