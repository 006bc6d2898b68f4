#include "mfe/steady_state.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <numbers>
#include <set>

#include "mfe/errors.hpp"
#include "mfe/parallel.hpp"

namespace mfe {

std::vector<double> stationary_logit(const PricingParams& params, int k, const Action& prices) {
  const auto mu_l = instantaneous_logit(params, k, prices);
  const auto& gamma = params.clusters.at(k).switching;
  std::vector<double> out(mu_l.size());
  double sum = 0.0;
  for (std::size_t n = 0; n < mu_l.size(); ++n) {
    const double eta = 1.0 + std::expm1(params.rationality * gamma[n]) * mu_l[n];
    out[n] = eta * mu_l[n];
    sum += out[n];
  }
  if (!std::isfinite(sum)) {
    // e^{beta gamma} overflowed: work with eta / e^{beta gamma_max}
    double top = 0.0;
    for (double g : gamma) top = std::max(top, params.rationality * g);
    sum = 0.0;
    for (std::size_t n = 0; n < mu_l.size(); ++n) {
      const double scaled = std::exp(-top) + (std::exp(params.rationality * gamma[n] - top) - std::exp(-top)) * mu_l[n];
      out[n] = scaled * mu_l[n];
      sum += out[n];
    }
  }
  for (double& v : out) v /= sum;
  return out;
}

namespace {

bool is_primitive(const Matrix& p) {
  const std::size_t n = p.rows();
  // Wielandt: a primitive matrix has P^m > 0 for m = (n-1)^2 + 1.
  const std::size_t bound = (n - 1) * (n - 1) + 1;
  Matrix pattern(n, n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) pattern(i, j) = p(i, j) > 0.0 ? 1.0 : 0.0;
  Matrix q = pattern;
  for (std::size_t m = 1;; ++m) {
    if (std::all_of(q.data().begin(), q.data().end(), [](double v) { return v > 0.0; })) return true;
    if (m >= bound) return false;
    q = q * pattern;
    for (std::size_t i = 0; i < n; ++i)
      for (std::size_t j = 0; j < n; ++j) q(i, j) = q(i, j) > 0.0 ? 1.0 : 0.0;
  }
}

}  // namespace

Point stationary_power(const Matrix& p, double tol, int max_iterations) {
  const std::size_t n = p.rows();
  if (n == 0 || p.cols() != n) throw DomainError("stationary_power needs a square matrix");
  for (std::size_t i = 0; i < n; ++i) {
    double sum = 0.0;
    for (std::size_t j = 0; j < n; ++j) {
      if (!(p(i, j) >= 0.0)) throw DomainError("transition matrix has a negative entry");
      sum += p(i, j);
    }
    if (std::abs(sum - 1.0) > 1e-9) throw DomainError("transition matrix is not row-stochastic");
  }
  if (!is_primitive(p)) throw DomainError("transition matrix is not primitive");
  // Square P until all rows of P^(2^t) agree within tol. The stationary law
  // lies in the convex hull of the rows, so the row spread bounds the error
  // even for slowly mixing kernels where ||mu - mu P|| is uninformative.
  Matrix q = p;
  for (int it = 0; it < max_iterations; ++it) {
    double spread = 0.0;
    for (std::size_t i = 1; i < n; ++i) spread = std::max(spread, sup_distance(q.row(0), q.row(i)));
    if (spread <= tol) {
      Point mu(n, 0.0);
      for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < n; ++j) mu[j] += q(i, j) / static_cast<double>(n);
      double total = 0.0;
      for (double v : mu) total += v;
      for (double& v : mu) v /= total;
      return mu;
    }
    q = q * q;
    for (std::size_t i = 0; i < n; ++i) {
      double total = 0.0;
      for (std::size_t j = 0; j < n; ++j) total += q(i, j);
      for (std::size_t j = 0; j < n; ++j) q(i, j) /= total;
    }
  }
  throw DomainError("power iteration did not reach the requested tolerance");
}

namespace {

Point stationary_with(const MeanFieldModel& model, const Action& action,
                      const std::function<Matrix(int)>& kernel) {
  const int n = model.states();
  Point out(model.dimension());
  for (int k = 0; k < model.clusters(); ++k) {
    std::vector<double> local;
    if (model.pricing()) local = stationary_logit(*model.pricing(), k, action);
    else local = stationary_power(kernel(k));
    std::copy(local.begin(), local.end(), out.begin() + k * n);
  }
  return out;
}

}  // namespace

Point stationary_distribution(const MeanFieldModel& model, std::size_t a) {
  return stationary_with(model, model.action(a), [&](int k) { return model.transition(k, a); });
}

Point stationary_distribution_at(const MeanFieldModel& model, const Action& action) {
  return stationary_with(model, action, [&](int k) { return model.transition_at(k, action); });
}

SteadyStateResult optimal_steady_state(const MeanFieldModel& model, const SteadyStateOptions& options) {
  SteadyStateResult result;
  const std::size_t n_actions = model.action_count();
  result.grid_values.resize(n_actions);
  parallel_for(n_actions, options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t a = begin; a < end; ++a)
      result.grid_values[a] = model.reward(a, stationary_distribution(model, a));
  });
  std::size_t best = 0;
  for (std::size_t a = 1; a < n_actions; ++a)
    if (result.grid_values[a] > result.grid_values[best]) best = a;
  result.action_index = best;
  result.action = model.action(best);
  result.grid_gain = result.grid_values[best];
  result.gain = result.grid_gain;

  if (options.refine_rounds > 0 && model.has_continuous_actions()) {
    const std::size_t dim = result.action.size();
    std::vector<double> step(dim, 0.0);
    for (std::size_t i = 0; i < dim; ++i) {
      std::set<double> values;
      for (const auto& a : model.actions()) values.insert(a[i]);
      if (values.size() > 1)
        step[i] = (model.action_upper()[i] - model.action_lower()[i]) / static_cast<double>(values.size() - 1);
    }
    for (int round = 0; round < options.refine_rounds; ++round) {
      for (double& s : step) s *= 0.5;
      bool moved = true;
      while (moved) {
        moved = false;
        for (std::size_t i = 0; i < dim; ++i) {
          if (step[i] == 0.0) continue;
          for (double sign : {-1.0, 1.0}) {
            Action trial = result.action;
            trial[i] = std::clamp(trial[i] + sign * step[i], model.action_lower()[i], model.action_upper()[i]);
            if (trial[i] == result.action[i]) continue;
            const double value = model.reward_at(trial, stationary_distribution_at(model, trial));
            ++result.refinement_evaluations;
            if (value > result.gain) {
              result.gain = value;
              result.action = trial;
              moved = true;
            }
          }
        }
      }
    }
  }
  result.distribution = result.refinement_evaluations > 0 ? stationary_distribution_at(model, result.action)
                                                           : stationary_distribution(model, best);
  return result;
}

bool majorizes(std::span<const double> a, std::span<const double> b, double tol) {
  if (a.size() != b.size()) throw ParameterError("majorizes needs vectors of equal length");
  std::vector<double> x(a.begin(), a.end());
  std::vector<double> y(b.begin(), b.end());
  std::sort(x.begin(), x.end(), std::greater<>());
  std::sort(y.begin(), y.end(), std::greater<>());
  double sx = 0.0;
  double sy = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    if (sx < sy - tol) return false;
  }
  return true;
}

std::optional<double> gain_upper_bound(const PricingParams& params) {
  params.validate();
  if (!params.uniform_switching()) return std::nullopt;
  double margin = -std::numeric_limits<double>::infinity();
  for (const auto& c : params.clusters)
    for (int n = 0; n < params.offers(); ++n) margin = std::max(margin, c.reservation[n] - c.cost[n]);
  return margin + params.states() / (params.rationality * std::numbers::e);
}

}  // namespace mfe
