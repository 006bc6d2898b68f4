#include "mfe/model.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "mfe/errors.hpp"

namespace mfe {

namespace {

std::vector<double> softmax(std::span<const double> z) {
  const double top = *std::max_element(z.begin(), z.end());
  std::vector<double> out(z.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < z.size(); ++i) {
    out[i] = std::exp(z[i] - top);
    sum += out[i];
  }
  for (double& v : out) v /= sum;
  return out;
}

}  // namespace

void PricingParams::validate() const {
  if (clusters.empty()) throw ParameterError("pricing model needs at least one cluster");
  if (!(rationality > 0.0)) throw ParameterError("rationality beta must be > 0");
  if (price_min.empty() || price_min.size() != price_max.size())
    throw ParameterError("price bounds must be non-empty and of equal length");
  for (std::size_t n = 0; n < price_min.size(); ++n)
    if (!(price_min[n] < price_max[n])) throw ParameterError("price_min must be < price_max");
  if (price_steps < 2) throw ParameterError("price_steps must be >= 2");
  const std::size_t offers = price_min.size();
  double total = 0.0;
  for (const auto& c : clusters) {
    if (c.reservation.size() != offers || c.consumption.size() != offers || c.cost.size() != offers)
      throw ParameterError("R, E and C need one entry per offer");
    if (c.switching.size() != offers + 1)
      throw ParameterError("switching costs need one entry per state (offers + 1)");
    for (double g : c.switching)
      if (!(g >= 0.0)) throw ParameterError("switching costs must be >= 0");
    if (!(c.weight >= 0.0)) throw ParameterError("cluster weight must be >= 0");
    total += c.weight;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError("cluster weights must sum to 1");
}

std::vector<Action> PricingParams::price_grid() const {
  const int offers_n = offers();
  std::vector<std::vector<double>> axes(offers_n);
  for (int n = 0; n < offers_n; ++n) {
    axes[n].resize(price_steps);
    for (int s = 0; s < price_steps; ++s)
      axes[n][s] = price_min[n] + (price_max[n] - price_min[n]) * s / (price_steps - 1);
  }
  std::vector<Action> grid;
  std::vector<int> idx(offers_n, 0);
  while (true) {
    Action a(offers_n);
    for (int n = 0; n < offers_n; ++n) a[n] = axes[n][idx[n]];
    grid.push_back(std::move(a));
    int pos = offers_n - 1;
    while (pos >= 0 && ++idx[pos] == price_steps) idx[pos--] = 0;
    if (pos < 0) break;
  }
  return grid;
}

std::vector<double> PricingParams::utilities(int k, const Action& prices) const {
  const auto& c = clusters.at(k);
  if (prices.size() != static_cast<std::size_t>(offers()))
    throw ParameterError("price vector has wrong length");
  std::vector<double> u(states(), 0.0);
  for (int n = 0; n < offers(); ++n) u[n] = c.reservation[n] - c.consumption[n] * prices[n];
  return u;
}

bool PricingParams::uniform_switching() const {
  for (const auto& c : clusters)
    for (double g : c.switching)
      if (g != c.switching.front()) return false;
  return true;
}

Matrix logit_transition(const PricingParams& params, int k, const Action& prices) {
  const auto u = params.utilities(k, prices);
  const auto& gamma = params.clusters.at(k).switching;
  const int n_states = params.states();
  Matrix p(n_states, n_states);
  std::vector<double> z(n_states);
  for (int n = 0; n < n_states; ++n) {
    for (int m = 0; m < n_states; ++m)
      z[m] = params.rationality * (u[m] + (m == n ? gamma[n] : 0.0));
    const auto row = softmax(z);
    for (int m = 0; m < n_states; ++m) p(n, m) = row[m];
  }
  return p;
}

std::vector<double> instantaneous_logit(const PricingParams& params, int k, const Action& prices) {
  auto u = params.utilities(k, prices);
  for (double& v : u) v *= params.rationality;
  return softmax(u);
}

std::vector<double> logit_unit_reward(const PricingParams& params, int k, const Action& prices) {
  const auto& c = params.clusters.at(k);
  std::vector<double> theta(params.states(), 0.0);
  for (int n = 0; n < params.offers(); ++n) theta[n] = c.consumption[n] * prices[n] - c.cost[n];
  return theta;
}

MeanFieldModel::MeanFieldModel(std::string name, int states, std::vector<double> weights,
                               std::vector<Action> actions, TransitionFn transition, RewardFn reward,
                               int primitivity_power)
    : name_(std::move(name)),
      states_(states),
      weights_(std::move(weights)),
      actions_(std::move(actions)),
      transition_fn_(std::move(transition)),
      reward_fn_(std::move(reward)),
      primitivity_power_(primitivity_power) {
  if (!transition_fn_ || !reward_fn_) throw ParameterError("model kernel functions must be set");
  const std::size_t total = weights_.size() * actions_.size();
  transitions_.reserve(total);
  unit_rewards_.reserve(total);
  for (int k = 0; k < clusters(); ++k)
    for (const auto& a : actions_) {
      transitions_.push_back(transition_fn_(k, a));
      unit_rewards_.push_back(reward_fn_(k, a));
    }
  finish_setup();
}

MeanFieldModel::MeanFieldModel(std::string name, int states, std::vector<double> weights,
                               std::vector<Action> actions,
                               std::vector<std::vector<Matrix>> transitions,
                               std::vector<std::vector<std::vector<double>>> rewards,
                               int primitivity_power)
    : name_(std::move(name)),
      states_(states),
      weights_(std::move(weights)),
      actions_(std::move(actions)),
      primitivity_power_(primitivity_power) {
  if (transitions.size() != weights_.size() || rewards.size() != weights_.size())
    throw ParameterError("need transitions and rewards for every cluster");
  for (std::size_t k = 0; k < weights_.size(); ++k) {
    if (transitions[k].size() != actions_.size() || rewards[k].size() != actions_.size())
      throw ParameterError("need a transition matrix and reward vector for every action");
    for (std::size_t a = 0; a < actions_.size(); ++a) {
      transitions_.push_back(std::move(transitions[k][a]));
      unit_rewards_.push_back(std::move(rewards[k][a]));
    }
  }
  finish_setup();
}

void MeanFieldModel::finish_setup() {
  if (states_ < 2) throw ParameterError("model needs at least 2 states per cluster");
  if (weights_.empty()) throw ParameterError("model needs at least one cluster");
  if (actions_.empty()) throw ParameterError("model needs at least one action");
  if (primitivity_power_ < 1) throw ParameterError("primitivity power must be >= 1");
  double total = 0.0;
  for (double w : weights_) {
    if (!(w >= 0.0)) throw ParameterError("cluster weights must be >= 0");
    total += w;
  }
  if (std::abs(total - 1.0) > 1e-9) throw ParameterError("cluster weights must sum to 1");
  for (const auto& p : transitions_)
    if (p.rows() != static_cast<std::size_t>(states_) || p.cols() != static_cast<std::size_t>(states_))
      throw ParameterError("transition matrix must be N x N");
  for (const auto& t : unit_rewards_) {
    if (t.size() != static_cast<std::size_t>(states_)) throw ParameterError("reward vector must have N entries");
    for (double v : t) reward_bound_ = std::max(reward_bound_, std::abs(v));
  }
  const std::size_t dim = actions_.front().size();
  action_lower_.assign(dim, std::numeric_limits<double>::infinity());
  action_upper_.assign(dim, -std::numeric_limits<double>::infinity());
  for (const auto& a : actions_) {
    if (a.size() != dim) throw ParameterError("all actions must have the same dimension");
    for (std::size_t i = 0; i < dim; ++i) {
      action_lower_[i] = std::min(action_lower_[i], a[i]);
      action_upper_[i] = std::max(action_upper_[i], a[i]);
    }
  }
}

Matrix MeanFieldModel::transition_at(int k, const Action& a) const {
  if (!transition_fn_) throw ParameterError("model has no kernel for off-grid actions");
  return transition_fn_(k, a);
}

std::vector<double> MeanFieldModel::unit_reward_at(int k, const Action& a) const {
  if (!reward_fn_) throw ParameterError("model has no reward function for off-grid actions");
  return reward_fn_(k, a);
}

void MeanFieldModel::check_state(std::span<const double> mu) const {
  if (mu.size() != dimension())
    throw ParameterError("state has " + std::to_string(mu.size()) + " coordinates, expected " +
                         std::to_string(dimension()));
}

double MeanFieldModel::reward(std::size_t a, std::span<const double> mu) const {
  check_state(mu);
  double r = 0.0;
  for (int k = 0; k < clusters(); ++k)
    r += weights_[k] * dot(unit_reward(k, a), mu.subspan(k * states_, states_));
  return r;
}

double MeanFieldModel::reward_at(const Action& a, std::span<const double> mu) const {
  check_state(mu);
  double r = 0.0;
  for (int k = 0; k < clusters(); ++k)
    r += weights_[k] * dot(unit_reward_at(k, a), mu.subspan(k * states_, states_));
  return r;
}

Point MeanFieldModel::push_forward(std::size_t a, std::span<const double> mu) const {
  check_state(mu);
  Point out(dimension());
  for (int k = 0; k < clusters(); ++k)
    left_multiply(mu.subspan(k * states_, states_), transition(k, a),
                  std::span<double>(out).subspan(k * states_, states_));
  return out;
}

Point MeanFieldModel::push_forward_at(const Action& a, std::span<const double> mu) const {
  check_state(mu);
  Point out(dimension());
  for (int k = 0; k < clusters(); ++k)
    left_multiply(mu.subspan(k * states_, states_), transition_at(k, a),
                  std::span<double>(out).subspan(k * states_, states_));
  return out;
}

MeanFieldModel pricing_model(const PricingParams& params) {
  params.validate();
  std::vector<double> weights;
  for (const auto& c : params.clusters) weights.push_back(c.weight);
  auto transition = [params](int k, const Action& a) { return logit_transition(params, k, a); };
  auto reward = [params](int k, const Action& a) { return logit_unit_reward(params, k, a); };
  MeanFieldModel model("pricing", params.states(), std::move(weights), params.price_grid(),
                       transition, reward, 1);
  model.set_pricing(params);
  return model;
}

MeanFieldModel counterexample_model(double a0, int action_steps) {
  if (!(a0 > 0.0 && a0 < 0.5)) throw ParameterError("a0 must lie in (0, 1/2)");
  if (action_steps < 2) throw ParameterError("action_steps must be >= 2");
  const double a1 = 1.0 - a0;
  std::vector<Action> actions;
  for (int s = 0; s < action_steps; ++s) {
    // endpoints are set exactly; the optimum of a convex bias sits there
    const double a = s == 0 ? a0 : s == action_steps - 1 ? a1 : a0 + (a1 - a0) * s / (action_steps - 1);
    actions.push_back({a});
  }
  auto transition = [](int, const Action& act) {
    const double a = act.at(0);
    if (a < 0.0 || a > 1.0) throw ParameterError("example action must lie in [0, 1]");
    return Matrix(3, 3, {1 - a, a, 0.0, 1 - a, 0.0, a, 0.0, 1 - a, a});
  };
  auto reward = [](int, const Action& act) {
    const double a = act.at(0);
    return std::vector<double>{1 - a, 0.0, a};
  };
  return MeanFieldModel("counterexample", 3, {1.0}, std::move(actions), transition, reward, 2);
}

AssumptionReport check_assumptions(const MeanFieldModel& model, const AssumptionOptions& options) {
  AssumptionReport report;
  report.power = options.power > 0 ? options.power : model.primitivity_power();
  const std::size_t n_actions = model.action_count();
  const auto n = static_cast<std::size_t>(model.states());

  auto note = [&report](const std::string& msg) {
    if (report.violations.size() < 50) report.violations.push_back(msg);
  };

  for (int k = 0; k < model.clusters(); ++k)
    for (std::size_t a = 0; a < n_actions; ++a) {
      const Matrix& p = model.transition(k, a);
      for (std::size_t i = 0; i < n; ++i) {
        double sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          const double v = p(i, j);
          if (!(v >= 0.0)) {
            if (report.nonnegative) {
              std::ostringstream os;
              os << "negative transition entry (cluster " << k << ", action " << a << ")";
              note(os.str());
            }
            report.nonnegative = false;
          }
          sum += v;
        }
        if (!(std::abs(sum - 1.0) <= 1e-12)) {
          std::ostringstream os;
          os << "row " << i << " of P (cluster " << k << ", action " << a << ") sums to " << sum;
          note(os.str());
          report.row_stochastic = false;
        }
      }
      for (double t : model.unit_reward(k, a)) report.observed_reward_bound = std::max(report.observed_reward_bound, std::abs(t));
    }

  if (options.reward_bound && report.observed_reward_bound > *options.reward_bound) {
    report.reward_bounded = false;
    std::ostringstream os;
    os << "unit reward magnitude " << report.observed_reward_bound << " exceeds declared bound "
       << *options.reward_bound;
    note(os.str());
  }

  // Positivity of L-fold products over all action sequences, or over constant
  // sequences when the sequence count is too large.
  const int power = report.power;
  double sequences = std::pow(static_cast<double>(n_actions), power);
  report.exhaustive = sequences <= static_cast<double>(options.max_sequences);
  for (int k = 0; k < model.clusters(); ++k) {
    std::vector<std::size_t> seq(power, 0);
    bool done = false;
    while (!done) {
      Matrix q = model.transition(k, seq[0]);
      for (int l = 1; l < power; ++l) q = q * model.transition(k, seq[l]);
      bool positive = true;
      for (double v : q.data())
        if (!(v > 0.0)) positive = false;
      if (!positive) {
        if (report.primitive) {
          std::ostringstream os;
          os << "product of " << power << " transition matrices has a zero entry (cluster " << k
             << ", actions";
          for (auto s : seq) os << ' ' << s;
          os << ")";
          note(os.str());
        }
        report.primitive = false;
      } else {
        report.kappa_max = std::max(report.kappa_max, contraction_coefficient(q));
      }
      if (report.exhaustive) {
        int pos = power - 1;
        while (pos >= 0 && ++seq[pos] == n_actions) seq[pos--] = 0;
        done = pos < 0;
      } else {
        const std::size_t next = seq[0] + 1;
        if (next == n_actions) done = true;
        else std::fill(seq.begin(), seq.end(), next);
      }
    }
  }
  return report;
}

}  // namespace mfe
