#include "mfe/howard.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "mfe/errors.hpp"
#include "mfe/parallel.hpp"

namespace mfe {

LocalTransitionTable::LocalTransitionTable(const MeanFieldModel& model, const SimplexGrid& grid, int threads)
    : clusters_(model.clusters()), local_size_(grid.size()), actions_(model.action_count()) {
  if (grid.states() != model.states()) throw ParameterError("grid and model disagree on the state count");
  if (grid.size() > std::numeric_limits<std::uint32_t>::max()) throw ParameterError("grid too large");
  const std::size_t rows = static_cast<std::size_t>(clusters_) * local_size_;
  next_.assign(rows * actions_, 0);
  reward_.assign(rows * actions_, 0.0);
  parallel_for(rows, threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> pushed(static_cast<std::size_t>(model.states()));
    for (std::size_t row = begin; row < end; ++row) {
      const int k = static_cast<int>(row / local_size_);
      const std::size_t i = row % local_size_;
      for (std::size_t a = 0; a < actions_; ++a) {
        left_multiply(grid.point(i), model.transition(k, a), pushed);
        next_[row * actions_ + a] = static_cast<std::uint32_t>(grid.nearest_index(pushed));
        reward_[row * actions_ + a] = model.weight(k) * dot(model.unit_reward(k, a), pushed);
      }
    }
  });
}

LocalTransitionTable build_local_tables(const MeanFieldModel& model, const SimplexGrid& grid, int threads) {
  return LocalTransitionTable(model, grid, threads);
}

std::size_t global_successor(const LocalTransitionTable& tables, const ProductGrid& nodes, std::size_t node,
                             std::size_t action) {
  std::size_t out = 0;
  for (int k = 0; k < nodes.clusters(); ++k)
    out += nodes.stride(k) * tables.next(k, nodes.local_index(node, k), action);
  return out;
}

double global_reward(const LocalTransitionTable& tables, const ProductGrid& nodes, std::size_t node,
                     std::size_t action) {
  double r = 0.0;
  for (int k = 0; k < nodes.clusters(); ++k) r += tables.reward(k, nodes.local_index(node, k), action);
  return r;
}

PolicyEvaluation evaluate_policy(std::span<const std::size_t> successor, std::span<const double> reward) {
  const std::size_t n = successor.size();
  if (reward.size() != n) throw ParameterError("successor and reward arrays differ in size");
  for (std::size_t s : successor)
    if (s >= n) throw ParameterError("successor index out of range");

  constexpr std::uint8_t kWhite = 0, kGrey = 1, kBlack = 2;
  PolicyEvaluation ev;
  ev.gain.assign(n, 0.0);
  ev.bias.assign(n, 0.0);
  ev.component.assign(n, 0);
  std::vector<std::uint8_t> color(n, kWhite);
  std::vector<std::size_t> path;

  for (std::size_t start = 0; start < n; ++start) {
    if (color[start] != kWhite) continue;
    path.clear();
    std::size_t x = start;
    while (color[x] == kWhite) {
      color[x] = kGrey;
      path.push_back(x);
      x = successor[x];
    }
    if (color[x] == kGrey) {
      // New cycle: x is on the current path.
      const auto pos = static_cast<std::size_t>(std::find(path.begin(), path.end(), x) - path.begin());
      std::size_t anchor = x;
      double total = 0.0;
      for (std::size_t j = pos; j < path.size(); ++j) {
        anchor = std::min(anchor, path[j]);
        total += reward[path[j]];
      }
      const std::size_t length = path.size() - pos;
      const double g = total / static_cast<double>(length);
      const auto id = static_cast<std::uint32_t>(ev.cycle_anchor.size());
      ev.cycle_anchor.push_back(anchor);
      ev.cycle_length.push_back(length);
      // Walk the cycle once from the anchor, then fill biases backwards.
      std::vector<std::size_t> order;
      order.reserve(length);
      std::size_t y = anchor;
      do {
        order.push_back(y);
        y = successor[y];
      } while (y != anchor);
      ev.bias[anchor] = 0.0;
      for (std::size_t j = order.size(); j-- > 1;) {
        const std::size_t node = order[j];
        ev.bias[node] = reward[node] - g + ev.bias[successor[node]];
      }
      for (std::size_t node : order) {
        ev.gain[node] = g;
        ev.component[node] = id;
        color[node] = kBlack;
      }
      path.resize(pos);
    }
    for (std::size_t j = path.size(); j-- > 0;) {
      const std::size_t node = path[j];
      const std::size_t next = successor[node];
      ev.gain[node] = ev.gain[next];
      ev.component[node] = ev.component[next];
      ev.bias[node] = reward[node] - ev.gain[node] + ev.bias[next];
      color[node] = kBlack;
    }
  }
  return ev;
}

std::vector<std::size_t> policy_successors(const LocalTransitionTable& tables, const ProductGrid& nodes,
                                           std::span<const std::uint32_t> policy) {
  std::vector<std::size_t> succ(policy.size());
  for (std::size_t i = 0; i < policy.size(); ++i) succ[i] = global_successor(tables, nodes, i, policy[i]);
  return succ;
}

ErgodicSolution solve_howard(const MeanFieldModel& model, const SimplexGrid& grid, const HowardOptions& options) {
  const LocalTransitionTable tables(model, grid, options.threads);
  const ProductGrid nodes(grid, model.clusters());
  const std::size_t n = nodes.size();
  const std::size_t n_actions = model.action_count();

  ErgodicSolution sol;
  sol.nodes = n;
  sol.arcs = n * n_actions;
  sol.transition_bytes = tables.transition_bytes();
  sol.materialized_bytes = sol.arcs * sizeof(std::uint32_t);
  // policy, successor, gain, bias, reward, component, color
  sol.value_bytes = n * (2 * sizeof(std::uint32_t) + sizeof(std::size_t) + 3 * sizeof(double) + 1);

  std::vector<std::uint32_t> policy(n, 0);
  if (options.initial_policy) {
    if (options.initial_policy->size() != n) throw ParameterError("initial policy has the wrong size");
    policy = *options.initial_policy;
    for (auto a : policy)
      if (a >= n_actions) throw ParameterError("initial policy uses an unknown action");
  } else {
    parallel_for(n, options.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        double best = -std::numeric_limits<double>::infinity();
        for (std::size_t a = 0; a < n_actions; ++a) {
          const double r = global_reward(tables, nodes, i, a);
          if (r > best) {
            best = r;
            policy[i] = static_cast<std::uint32_t>(a);
          }
        }
      }
    });
  }

  std::vector<std::size_t> succ(n);
  std::vector<double> reward(n);
  PolicyEvaluation ev;
  auto slack = [](double v) { return 1e-12 * (1.0 + std::abs(v)); };

  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    for (std::size_t i = 0; i < n; ++i) {
      succ[i] = global_successor(tables, nodes, i, policy[i]);
      reward[i] = global_reward(tables, nodes, i, policy[i]);
    }
    ev = evaluate_policy(succ, reward);
    sol.iterations = it;
    sol.sweeps = it;

    std::vector<std::uint8_t> changed(n, 0);
    parallel_for(n, options.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t i = begin; i < end; ++i) {
        const std::uint32_t current = policy[i];
        const double g_cur = ev.gain[succ[i]];
        const double v_cur = reward[i] + ev.bias[succ[i]];
        // Stage 1: best reachable gain.
        double g_best = g_cur;
        for (std::size_t a = 0; a < n_actions; ++a)
          g_best = std::max(g_best, ev.gain[global_successor(tables, nodes, i, a)]);
        std::uint32_t choice = current;
        if (g_best > g_cur + slack(g_cur)) {
          double v_best = -std::numeric_limits<double>::infinity();
          for (std::size_t a = 0; a < n_actions; ++a) {
            const std::size_t j = global_successor(tables, nodes, i, a);
            if (ev.gain[j] < g_best - slack(g_best)) continue;
            const double v = global_reward(tables, nodes, i, a) + ev.bias[j];
            if (v > v_best) {
              v_best = v;
              choice = static_cast<std::uint32_t>(a);
            }
          }
        } else {
          // Stage 2: bias improvement among actions keeping the current gain.
          double v_best = v_cur;
          for (std::size_t a = 0; a < n_actions; ++a) {
            const std::size_t j = global_successor(tables, nodes, i, a);
            if (ev.gain[j] < g_cur - slack(g_cur)) continue;
            const double v = global_reward(tables, nodes, i, a) + ev.bias[j];
            if (v > v_best + slack(v_best) && (choice == current || v > v_best)) {
              v_best = v;
              choice = static_cast<std::uint32_t>(a);
            }
          }
        }
        if (choice != current) {
          policy[i] = choice;
          changed[i] = 1;
        }
      }
    });
    if (std::none_of(changed.begin(), changed.end(), [](std::uint8_t c) { return c != 0; })) {
      sol.converged = true;
      break;
    }
  }

  sol.node_gain = ev.gain;
  sol.bias = ev.bias;
  sol.policy = std::move(policy);
  sol.gain_min = *std::min_element(ev.gain.begin(), ev.gain.end());
  sol.gain_max = *std::max_element(ev.gain.begin(), ev.gain.end());
  sol.gain = sol.gain_max;
  return sol;
}

std::vector<std::size_t> limit_cycle(std::span<const std::size_t> successor, std::size_t start) {
  if (start >= successor.size()) throw ParameterError("start node out of range");
  std::vector<std::size_t> seen(successor.size(), std::numeric_limits<std::size_t>::max());
  std::size_t x = start;
  for (std::size_t t = 0; seen[x] == std::numeric_limits<std::size_t>::max(); ++t) {
    seen[x] = t;
    x = successor[x];
  }
  std::vector<std::size_t> cycle{x};
  for (std::size_t y = successor[x]; y != x; y = successor[y]) cycle.push_back(y);
  return cycle;
}

double promotion_period(const MeanFieldModel& model, const ProductGrid& nodes, std::span<const std::size_t> cycle) {
  if (cycle.size() <= 1) return 0.0;
  const int n = model.states();
  auto share = [&](std::size_t node) {
    const Point p = nodes.point(node);
    double s = 0.0;
    for (int k = 0; k < model.clusters(); ++k) s += model.weight(k) * (1.0 - p[k * n + n - 1]);
    return s;
  };
  std::size_t rises = 0;
  for (std::size_t t = 0; t < cycle.size(); ++t)
    if (share(cycle[(t + 1) % cycle.size()]) > share(cycle[t]) + 1e-12) ++rises;
  return rises == 0 ? 0.0 : static_cast<double>(cycle.size()) / static_cast<double>(rises);
}

}  // namespace mfe
