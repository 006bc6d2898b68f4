#pragma once

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

#include "mfe/model.hpp"

namespace mfe {

/// Closed-form fixed point of the logit kernel:
/// mu_bar^n proportional to eta^n mu_L^n with eta^n = 1 + (e^{beta gamma^n} - 1) mu_L^n.
std::vector<double> stationary_logit(const PricingParams& params, int cluster, const Action& prices);

/// Stationary law of P from the powers P^(2^t), stopping once all rows agree
/// within tol (which bounds the error). P must be row-stochastic and
/// primitive; throws DomainError otherwise or after max_iterations squarings.
Point stationary_power(const Matrix& p, double tol = 1e-12, int max_iterations = 2000);

/// Stationary distribution of every cluster under a constant grid action
/// (cluster-major). Uses the closed form for logit models.
Point stationary_distribution(const MeanFieldModel& model, std::size_t action);
Point stationary_distribution_at(const MeanFieldModel& model, const Action& action);

struct SteadyStateOptions {
  int refine_rounds = 3;  // step-halving rounds around the best grid action
  int threads = 0;
};

struct SteadyStateResult {
  std::size_t action_index = 0;      // best grid action
  Action action;                     // incumbent after refinement
  Point distribution;                // mu_bar(action), cluster-major
  double gain = 0.0;                 // r(action, mu_bar(action))
  double grid_gain = 0.0;            // best value over the grid alone
  std::vector<double> grid_values;   // r(a, mu_bar(a)) for every grid action
  int refinement_evaluations = 0;
};

/// Maximises r(a, mu_bar(a)) over the action grid (ties to the smaller index),
/// then refines by coordinate bisection when the model has a continuous kernel.
SteadyStateResult optimal_steady_state(const MeanFieldModel& model, const SteadyStateOptions& options = {});

/// True iff the descending partial sums of a dominate those of b (within tol).
bool majorizes(std::span<const double> a, std::span<const double> b, double tol = 1e-12);

/// max_{k,n}(R - C) + N / (beta e), valid for switching costs uniform within
/// each cluster; empty otherwise.
std::optional<double> gain_upper_bound(const PricingParams& params);

}  // namespace mfe
