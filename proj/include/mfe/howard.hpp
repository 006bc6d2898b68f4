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

/// Per-cluster nearest-neighbour transitions T[k][i][a] = argmin_j
/// ||mu_i P^k(a) - mu_j||_inf, plus the matching reward contributions
/// rho_k <theta^k(a), mu_i P^k(a)>. Global successors are composed on demand.
class LocalTransitionTable {
 public:
  LocalTransitionTable(const MeanFieldModel& model, const SimplexGrid& grid, int threads = 0);

  int clusters() const { return clusters_; }
  std::size_t local_size() const { return local_size_; }
  std::size_t action_count() const { return actions_; }

  std::uint32_t next(int k, std::size_t i, std::size_t a) const {
    return next_[(k * local_size_ + i) * actions_ + a];
  }
  double reward(int k, std::size_t i, std::size_t a) const {
    return reward_[(k * local_size_ + i) * actions_ + a];
  }

  /// Bytes of the index table only (K * M * |A| * 4).
  std::size_t transition_bytes() const { return next_.size() * sizeof(std::uint32_t); }
  std::size_t reward_bytes() const { return reward_.size() * sizeof(double); }

 private:
  int clusters_;
  std::size_t local_size_;
  std::size_t actions_;
  std::vector<std::uint32_t> next_;
  std::vector<double> reward_;
};

LocalTransitionTable build_local_tables(const MeanFieldModel& model, const SimplexGrid& grid, int threads = 0);

/// T(i, a) = (T[k](i_k, a))_k as a linear node index.
std::size_t global_successor(const LocalTransitionTable& tables, const ProductGrid& nodes, std::size_t node,
                             std::size_t action);

/// r(a, mu_i P(a)) = sum_k rho_k <theta^k(a), mu_{i_k} P^k(a)>.
double global_reward(const LocalTransitionTable& tables, const ProductGrid& nodes, std::size_t node,
                     std::size_t action);

struct PolicyEvaluation {
  std::vector<double> gain;               // mean reward of the cycle each node reaches
  std::vector<double> bias;               // h_i = r_i - g_i + h_succ(i), 0 at each cycle anchor
  std::vector<std::uint32_t> component;   // cycle id reached by each node
  std::vector<std::size_t> cycle_anchor;  // smallest node index on each cycle
  std::vector<std::size_t> cycle_length;
};

/// Exact evaluation of a functional graph in linear time.
PolicyEvaluation evaluate_policy(std::span<const std::size_t> successor, std::span<const double> reward);

struct HowardOptions {
  std::size_t max_iterations = 1000;
  std::optional<std::vector<std::uint32_t>> initial_policy;  // default: greedy r(a, mu P(a))
  int threads = 0;
};

/// Multichain policy iteration on the nearest-neighbour discretisation.
/// gain = largest node gain; gain_min / gain_max span the node gains.
ErgodicSolution solve_howard(const MeanFieldModel& model, const SimplexGrid& grid, const HowardOptions& options = {});

/// Successor array of a decision array.
std::vector<std::size_t> policy_successors(const LocalTransitionTable& tables, const ProductGrid& nodes,
                                           std::span<const std::uint32_t> policy);

/// Nodes of the cycle reached from `start`, in visiting order starting at the
/// first cycle node met.
std::vector<std::size_t> limit_cycle(std::span<const std::size_t> successor, std::size_t start);

/// Length of a cycle divided by the number of steps where the provider share
/// (1 minus the outside-option mass, averaged with cluster weights) increases.
/// Returns 0 for a fixed point or a cycle without increases.
double promotion_period(const MeanFieldModel& model, const ProductGrid& nodes, std::span<const std::size_t> cycle);

}  // namespace mfe
