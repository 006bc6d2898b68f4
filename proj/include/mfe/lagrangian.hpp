#pragma once

#include <cstddef>
#include <span>
#include <vector>

#include "mfe/model.hpp"
#include "mfe/simplex.hpp"

namespace mfe {

/// L(a, mu, lambda) = r(a, mu P(a)) + <lambda, phi(mu P(a)) - phi(mu)>, with
/// phi(x) = x^power applied coordinatewise (power in 1..4).
double lagrangian_value(const MeanFieldModel& model, int power, std::size_t action, std::span<const double> mu,
                        std::span<const double> lambda);

struct DualOptions {
  int power = 1;
  std::size_t max_iterations = 2000;
  std::vector<double> initial_multiplier;  // empty: zero
  int threads = 0;
};

struct DualBoundResult {
  int power = 1;
  double bound = 0.0;        // best (smallest) certified inner maximum
  double steady_gain = 0.0;  // g_bar over the action grid, the Polyak target
  std::vector<double> multiplier;  // lambda at the best bound
  std::size_t action = 0;          // inner achiever at the best bound
  Point state;
  bool stationary_achiever = false;  // achiever is a steady-state pair
  std::vector<double> trace;         // running best bound per iteration
  std::size_t iterations = 0;
  bool zero_gap = false;   // bound reached g_bar
  bool diverged = false;   // ||lambda|| exceeded 1e8
};

/// g^(phi) = inf_lambda max_{(a, mu)} L. The inner maximum runs over the action
/// grid times the product state grid, together with the steady-state pairs
/// (a, mu_bar(a)) whose value is r(a, mu_bar(a)). The outer problem uses a
/// subgradient method with Polyak steps towards g_bar.
DualBoundResult dual_bound(const MeanFieldModel& model, const SimplexGrid& grid, const DualOptions& options = {});

}  // namespace mfe
