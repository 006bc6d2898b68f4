#pragma once

#include <cstddef>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "mfe/linalg.hpp"
#include "mfe/simplex.hpp"

namespace mfe {

/// A controller decision: one price per offer for the pricing model, a single
/// scalar for the three-state example.
using Action = std::vector<double>;

/// Logit pricing data for one customer segment. Offers are indexed
/// n = 0..N-2; state N-1 is the outside option (zero utility, zero reward).
struct PricingCluster {
  double weight = 1.0;
  std::vector<double> reservation;  // currency
  std::vector<double> consumption;  // quantity bought per period
  std::vector<double> cost;         // currency
  std::vector<double> switching;    // one entry per state (N values)
};

struct PricingParams {
  std::vector<PricingCluster> clusters;
  double rationality = 1.0;  // beta, 1 / currency
  std::vector<double> price_min;
  std::vector<double> price_max;
  int price_steps = 2;  // grid points per offer

  int offers() const { return static_cast<int>(price_min.size()); }
  int states() const { return offers() + 1; }

  /// Throws ParameterError on inconsistent sizes or invalid values.
  void validate() const;

  /// Product grid of prices, last offer varying fastest.
  std::vector<Action> price_grid() const;

  /// U^{kn}(a) = R^{kn} - E^{kn} a^n, with U = 0 for the outside option.
  std::vector<double> utilities(int cluster, const Action& prices) const;

  /// True when every cluster has the same switching cost for all states.
  bool uniform_switching() const;
};

/// [P^k(a)]_{n,m} proportional to exp(beta (U^m + gamma^n 1{m = n})),
/// computed with max-shifted exponentials.
Matrix logit_transition(const PricingParams& params, int cluster, const Action& prices);

/// Softmax of beta U^k(a): the no-switching-cost response.
std::vector<double> instantaneous_logit(const PricingParams& params, int cluster, const Action& prices);

/// theta^{kn}(a) = E^{kn} a^n - C^{kn}; zero for the outside option.
std::vector<double> logit_unit_reward(const PricingParams& params, int cluster, const Action& prices);

/// Controlled population of K independent clusters, each a distribution over
/// N states, with a finite action grid. Transition matrices and unit rewards
/// are evaluated once per grid action and cached; models are immutable.
class MeanFieldModel {
 public:
  using TransitionFn = std::function<Matrix(int cluster, const Action&)>;
  using RewardFn = std::function<std::vector<double>(int cluster, const Action&)>;

  /// Kernel-function model: off-grid actions can be evaluated.
  MeanFieldModel(std::string name, int states, std::vector<double> weights,
                 std::vector<Action> actions, TransitionFn transition, RewardFn reward,
                 int primitivity_power = 1);

  /// Table model: transitions[k][a] and rewards[k][a] for every grid action.
  MeanFieldModel(std::string name, int states, std::vector<double> weights,
                 std::vector<Action> actions, std::vector<std::vector<Matrix>> transitions,
                 std::vector<std::vector<std::vector<double>>> rewards,
                 int primitivity_power = 1);

  const std::string& name() const { return name_; }
  int clusters() const { return static_cast<int>(weights_.size()); }
  int states() const { return states_; }
  std::size_t dimension() const { return weights_.size() * static_cast<std::size_t>(states_); }
  std::span<const double> weights() const { return weights_; }
  double weight(int k) const { return weights_[k]; }

  std::size_t action_count() const { return actions_.size(); }
  const Action& action(std::size_t a) const { return actions_[a]; }
  const std::vector<Action>& actions() const { return actions_; }

  const Matrix& transition(int k, std::size_t a) const { return transitions_[k * actions_.size() + a]; }
  std::span<const double> unit_reward(int k, std::size_t a) const {
    return unit_rewards_[k * actions_.size() + a];
  }

  bool has_continuous_actions() const { return static_cast<bool>(transition_fn_); }
  Matrix transition_at(int k, const Action& a) const;
  std::vector<double> unit_reward_at(int k, const Action& a) const;

  /// Coordinate-wise bounds of the action grid (used for local refinement).
  const Action& action_lower() const { return action_lower_; }
  const Action& action_upper() const { return action_upper_; }

  int primitivity_power() const { return primitivity_power_; }
  /// max |theta^{kn}(a)| over grid actions.
  double reward_bound() const { return reward_bound_; }

  const std::optional<PricingParams>& pricing() const { return pricing_; }
  void set_pricing(PricingParams p) { pricing_ = std::move(p); }

  /// r(a, mu) = sum_k rho_k <theta^k(a), mu^k>; mu is cluster-major (K * N).
  double reward(std::size_t a, std::span<const double> mu) const;
  double reward_at(const Action& a, std::span<const double> mu) const;

  /// mu P(a), applied cluster by cluster.
  Point push_forward(std::size_t a, std::span<const double> mu) const;
  Point push_forward_at(const Action& a, std::span<const double> mu) const;

 private:
  void finish_setup();
  void check_state(std::span<const double> mu) const;

  std::string name_;
  int states_;
  std::vector<double> weights_;
  std::vector<Action> actions_;
  TransitionFn transition_fn_;
  RewardFn reward_fn_;
  std::vector<Matrix> transitions_;
  std::vector<std::vector<double>> unit_rewards_;
  Action action_lower_;
  Action action_upper_;
  int primitivity_power_;
  double reward_bound_ = 0.0;
  std::optional<PricingParams> pricing_;
};

/// Logit pricing model over the price grid of `params`.
MeanFieldModel pricing_model(const PricingParams& params);

/// Three-state example with P(a) rows (1-a, a, 0), (1-a, 0, a), (0, 1-a, a)
/// and theta(a) = (1-a, 0, a) on `action_steps` equally spaced actions of
/// [a0, 1 - a0]. Requires 0 < a0 < 1/2.
MeanFieldModel counterexample_model(double a0, int action_steps = 11);

struct AssumptionOptions {
  int power = 0;                      // 0: use the model's declaration
  std::optional<double> reward_bound; // declared M_r
  std::size_t max_sequences = 20000;  // action sequences checked per cluster
};

struct AssumptionReport {
  bool row_stochastic = true;
  bool nonnegative = true;
  bool primitive = true;
  bool reward_bounded = true;
  bool exhaustive = true;     // all |A|^L products checked
  int power = 1;
  double kappa_max = 0.0;     // worst Birkhoff coefficient over checked products
  double observed_reward_bound = 0.0;
  std::vector<std::string> violations;

  bool ok() const { return row_stochastic && nonnegative && primitive && reward_bounded; }
};

/// Checks stochasticity, positivity of L-fold products and the reward bound.
/// Never throws for malformed kernels; problems are listed in the report.
AssumptionReport check_assumptions(const MeanFieldModel& model, const AssumptionOptions& options = {});

}  // namespace mfe
