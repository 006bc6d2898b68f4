#include "mfe/lagrangian.hpp"

#include <cmath>
#include <limits>

#include "mfe/errors.hpp"
#include "mfe/parallel.hpp"
#include "mfe/steady_state.hpp"

namespace mfe {

namespace {

void check_power(int power) {
  if (power < 1 || power > 4) throw ParameterError("phi power must be 1, 2, 3 or 4");
}

double phi(double x, int power) {
  double out = x;
  for (int p = 1; p < power; ++p) out *= x;
  return out;
}

}  // namespace

double lagrangian_value(const MeanFieldModel& model, int power, std::size_t action, std::span<const double> mu,
                        std::span<const double> lambda) {
  check_power(power);
  if (lambda.size() != model.dimension()) throw ParameterError("multiplier has the wrong dimension");
  const Point next = model.push_forward(action, mu);
  double value = model.reward(action, next);
  for (std::size_t j = 0; j < next.size(); ++j) value += lambda[j] * (phi(next[j], power) - phi(mu[j], power));
  return value;
}

DualBoundResult dual_bound(const MeanFieldModel& model, const SimplexGrid& grid, const DualOptions& options) {
  check_power(options.power);
  if (grid.states() != model.states()) throw ParameterError("grid and model disagree on the state count");
  const int n_clusters = model.clusters();
  const std::size_t n = static_cast<std::size_t>(model.states());
  const std::size_t m = grid.size();
  const std::size_t n_actions = model.action_count();
  const std::size_t dim = model.dimension();

  DualBoundResult res;
  res.power = options.power;
  const auto steady = optimal_steady_state(model, {.refine_rounds = 0, .threads = options.threads});
  res.steady_gain = steady.grid_gain;

  // Tabulate per (k, a, i): reward contribution and phi(mu P) - phi(mu).
  const std::size_t rows = static_cast<std::size_t>(n_clusters) * n_actions;
  auto slot = [&](int k, std::size_t a, std::size_t i) { return (k * n_actions + a) * m + i; };
  std::vector<double> base(rows * m);
  std::vector<double> delta(rows * m * n);
  parallel_for(rows, options.threads, [&](std::size_t begin, std::size_t end) {
    std::vector<double> next(n);
    for (std::size_t row = begin; row < end; ++row) {
      const int k = static_cast<int>(row / n_actions);
      const std::size_t a = row % n_actions;
      for (std::size_t i = 0; i < m; ++i) {
        const auto mu = grid.point(i);
        left_multiply(mu, model.transition(k, a), next);
        base[slot(k, a, i)] = model.weight(k) * dot(model.unit_reward(k, a), next);
        for (std::size_t j = 0; j < n; ++j)
          delta[slot(k, a, i) * n + j] = phi(next[j], options.power) - phi(mu[j], options.power);
      }
    }
  });

  std::vector<double> lambda = options.initial_multiplier;
  if (lambda.empty()) lambda.assign(dim, 0.0);
  if (lambda.size() != dim) throw ParameterError("initial multiplier has the wrong dimension");

  res.bound = std::numeric_limits<double>::infinity();
  std::vector<double> best_local(n_clusters * n_actions);
  std::vector<std::size_t> arg_local(n_clusters * n_actions);
  std::vector<double> subgradient(dim);

  for (std::size_t it = 1; it <= options.max_iterations; ++it) {
    // max_a sum_k max_i c_k(i, a)
    parallel_for(n_actions, options.threads, [&](std::size_t begin, std::size_t end) {
      for (std::size_t a = begin; a < end; ++a)
        for (int k = 0; k < n_clusters; ++k) {
          double best = -std::numeric_limits<double>::infinity();
          std::size_t arg = 0;
          const double* lam = lambda.data() + k * n;
          for (std::size_t i = 0; i < m; ++i) {
            const std::size_t idx = slot(k, a, i);
            double c = base[idx];
            const double* d = delta.data() + idx * n;
            for (std::size_t j = 0; j < n; ++j) c += lam[j] * d[j];
            if (c > best) {
              best = c;
              arg = i;
            }
          }
          best_local[k * n_actions + a] = best;
          arg_local[k * n_actions + a] = arg;
        }
    });
    double value = -std::numeric_limits<double>::infinity();
    std::size_t a_star = 0;
    for (std::size_t a = 0; a < n_actions; ++a) {
      double v = 0.0;
      for (int k = 0; k < n_clusters; ++k) v += best_local[k * n_actions + a];
      if (v > value) {
        value = v;
        a_star = a;
      }
    }
    const bool stationary = value <= res.steady_gain + 1e-12 * (1.0 + std::abs(res.steady_gain));
    if (stationary) value = res.steady_gain;
    res.iterations = it;
    if (value < res.bound) {
      res.bound = value;
      res.multiplier = lambda;
      res.stationary_achiever = stationary;
      if (stationary) {
        res.action = 0;
        res.state.clear();
      } else {
        res.action = a_star;
        res.state.assign(dim, 0.0);
        for (int k = 0; k < n_clusters; ++k) {
          const auto p = grid.point(arg_local[k * n_actions + a_star]);
          std::copy(p.begin(), p.end(), res.state.begin() + k * n);
        }
      }
    }
    res.trace.push_back(res.bound);
    if (stationary) {
      res.zero_gap = true;
      break;
    }
    double norm2 = 0.0;
    for (int k = 0; k < n_clusters; ++k) {
      const std::size_t idx = slot(k, a_star, arg_local[k * n_actions + a_star]);
      for (std::size_t j = 0; j < n; ++j) {
        subgradient[k * n + j] = delta[idx * n + j];
        norm2 += subgradient[k * n + j] * subgradient[k * n + j];
      }
    }
    if (norm2 == 0.0) break;  // achiever is stationary on the grid: lambda is optimal
    double step = (value - res.steady_gain) / norm2;
    if (!(step > 0.0) || !std::isfinite(step)) step = 1.0 / static_cast<double>(it);
    double lambda_norm2 = 0.0;
    for (std::size_t j = 0; j < dim; ++j) {
      lambda[j] -= step * subgradient[j];
      lambda_norm2 += lambda[j] * lambda[j];
    }
    if (std::sqrt(lambda_norm2) > 1e8) {
      res.diverged = true;
      break;
    }
  }
  if (res.stationary_achiever) {
    res.action = steady.action_index;
    res.state = steady.distribution;
  }
  return res;
}

}  // namespace mfe
