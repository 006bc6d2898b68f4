#include "mfe/cycles.hpp"

#include <cmath>
#include <limits>

#include "mfe/errors.hpp"
#include "mfe/parallel.hpp"

namespace mfe {

double ToyModel::gamma_hat() const { return std::exp(rationality * switching); }

void ToyModel::validate() const {
  if (!(rationality > 0.0)) throw ParameterError("toy model: beta must be > 0");
  if (!(switching >= 0.0)) throw ParameterError("toy model: gamma must be >= 0");
  if (!std::isfinite(gamma_hat() * gamma_hat())) throw ParameterError("toy model: beta * gamma too large");
}

double toy_step(const ToyModel& toy, double mu, double price) {
  const double u = toy.rationality * (toy.reservation - price);
  const double bonus = toy.rationality * toy.switching;
  // stay with the provider: 1 / (1 + e^{-(u + bonus)}); join it: 1 / (1 + e^{bonus - u})
  const double stay = 1.0 / (1.0 + std::exp(-(u + bonus)));
  const double join = 1.0 / (1.0 + std::exp(bonus - u));
  return mu * stay + (1.0 - mu) * join;
}

double price_from_transition(const ToyModel& toy, double mu_prev, double mu_next) {
  if (!(mu_prev > 0.0 && mu_prev < 1.0) || !(mu_next > 0.0 && mu_next < 1.0))
    throw DomainError("shares must lie strictly inside (0, 1)");
  // Quadratic in a_hat scaled by 1 / gamma_hat^2 and solved in log form, so
  // large beta * gamma does not overflow the intermediate terms.
  const double bg = toy.rationality * toy.switching;
  const double inv = std::exp(-2.0 * bg);
  const double b = (2.0 * mu_next - 1.0) * inv - (1.0 - inv) * (mu_prev - mu_next);
  const double root = std::sqrt(b * b + 4.0 * inv * mu_next * (1.0 - mu_next));
  const double log_a_hat = b < 0.0 ? std::log(2.0 * mu_next) - bg - std::log(root - b)
                                   : bg + std::log(b + root) - std::log(2.0 * (1.0 - mu_next));
  return toy.reservation - log_a_hat / toy.rationality;
}

CycleStats cycle_gain(const ToyModel& toy, std::span<const double> traj) {
  if (traj.size() < 2) throw ParameterError("a cycle needs at least two states");
  if (std::abs(traj.front() - traj.back()) > 1e-12) throw ParameterError("cycle must close: mu_0 == mu_tau");
  const std::size_t tau = traj.size() - 1;
  CycleStats st;
  st.prices.reserve(tau);
  for (std::size_t t = 1; t <= tau; ++t) {
    const double a = price_from_transition(toy, traj[t - 1], traj[t]);
    st.prices.push_back(a);
    st.gain += (a - toy.cost) * traj[t];
    st.mean += traj[t];
  }
  st.gain /= static_cast<double>(tau);
  st.mean /= static_cast<double>(tau);
  for (std::size_t t = 1; t <= tau; ++t) st.variance += (traj[t] - st.mean) * (traj[t] - st.mean);
  st.variance /= static_cast<double>(tau);
  return st;
}

std::vector<double> sst_trajectory(double s, double S, int tau) {
  if (!(s > 0.0 && s <= S && S < 1.0)) throw ParameterError("(s,S,tau)-cycle needs 0 < s <= S < 1");
  if (tau < 1) throw ParameterError("(s,S,tau)-cycle needs tau >= 1");
  std::vector<double> traj(tau + 1);
  traj[0] = S;
  for (int t = 1; t < tau; ++t) traj[t] = S + (s - S) * t / tau;
  traj[tau] = S;
  return traj;
}

namespace {

double steady_objective(const ToyModel& toy, double mu) {
  return (price_from_transition(toy, mu, mu) - toy.cost) * mu;
}

}  // namespace

ToySteadyState toy_steady_state(const ToyModel& toy) {
  toy.validate();
  constexpr int kSamples = 10000;
  double best = -std::numeric_limits<double>::infinity();
  int arg = 1;
  for (int j = 1; j < kSamples; ++j) {
    const double v = steady_objective(toy, static_cast<double>(j) / kSamples);
    if (v > best) {
      best = v;
      arg = j;
    }
  }
  // golden-section search on the bracketing cell pair
  double lo = static_cast<double>(arg - 1) / kSamples;
  double hi = static_cast<double>(arg + 1) / kSamples;
  if (lo <= 0.0) lo = 0.5 / kSamples;
  if (hi >= 1.0) hi = 1.0 - 0.5 / kSamples;
  const double ratio = (std::sqrt(5.0) - 1.0) / 2.0;
  double x1 = hi - ratio * (hi - lo);
  double x2 = lo + ratio * (hi - lo);
  double f1 = steady_objective(toy, x1);
  double f2 = steady_objective(toy, x2);
  while (hi - lo > 1e-13) {
    if (f1 < f2) {
      lo = x1;
      x1 = x2;
      f1 = f2;
      x2 = lo + ratio * (hi - lo);
      f2 = steady_objective(toy, x2);
    } else {
      hi = x2;
      x2 = x1;
      f2 = f1;
      x1 = hi - ratio * (hi - lo);
      f1 = steady_objective(toy, x1);
    }
  }
  ToySteadyState out;
  out.share = 0.5 * (lo + hi);
  out.gain = steady_objective(toy, out.share);
  if (best > out.gain) {
    out.share = static_cast<double>(arg) / kSamples;
    out.gain = best;
  }
  out.price = price_from_transition(toy, out.share, out.share);
  return out;
}

namespace {

bool better(const CycleSpec& c, const CycleSpec& incumbent) {
  constexpr double kTol = 1e-12;
  if (c.gain > incumbent.gain + kTol) return true;
  if (c.gain < incumbent.gain - kTol) return false;
  if (c.amplitude() < incumbent.amplitude() - kTol) return true;
  if (c.amplitude() > incumbent.amplitude() + kTol) return false;
  return c.tau < incumbent.tau;
}

}  // namespace

CycleSpec best_sst_cycle(const ToyModel& toy, const CycleScanOptions& options) {
  toy.validate();
  if (!(options.step > 0.0 && options.step < 0.5)) throw ParameterError("share grid step must lie in (0, 0.5)");
  if (options.tau_max < 1) throw ParameterError("tau_max must be >= 1");
  const int count = static_cast<int>(std::floor(1.0 / options.step + 1e-9)) - 1;
  std::vector<double> shares(count);
  for (int j = 0; j < count; ++j) shares[j] = (j + 1) * options.step;

  const ToySteadyState steady = toy_steady_state(toy);
  CycleSpec best{steady.share, steady.share, 1, steady.gain};

  // Per upper level S: best over s <= S and tau.
  std::vector<CycleSpec> per_level(count, best);
  parallel_for(static_cast<std::size_t>(count), options.threads, [&](std::size_t begin, std::size_t end) {
    for (std::size_t hi = begin; hi < end; ++hi) {
      CycleSpec local = best;
      const double S = shares[hi];
      for (std::size_t lo = 0; lo <= hi; ++lo) {
        const double s = shares[lo];
        const int tau_max = lo == hi ? 1 : options.tau_max;
        for (int tau = lo == hi ? 1 : 2; tau <= tau_max; ++tau) {
          const auto traj = sst_trajectory(s, S, tau);
          double gain = 0.0;
          for (int t = 1; t <= tau; ++t) gain += (price_from_transition(toy, traj[t - 1], traj[t]) - toy.cost) * traj[t];
          CycleSpec c{s, S, tau, gain / tau};
          if (better(c, local)) local = c;
        }
      }
      per_level[hi] = local;
    }
  });
  for (const auto& c : per_level)
    if (better(c, best)) best = c;
  return best;
}

std::vector<CycleScanRow> scan_sst(const ToyModel& toy, std::span<const double> gammas,
                                   const CycleScanOptions& options) {
  std::vector<CycleScanRow> rows;
  rows.reserve(gammas.size());
  for (double g : gammas) {
    ToyModel t = toy;
    t.switching = g;
    CycleScanRow row;
    row.gamma = g;
    row.best = best_sst_cycle(t, options);
    row.steady_gain = toy_steady_state(t).gain;
    rows.push_back(row);
  }
  return rows;
}

std::optional<double> locate_kink(std::span<const CycleScanRow> rows, double threshold) {
  for (const auto& r : rows)
    if (r.best.amplitude() > threshold) return r.gamma;
  return std::nullopt;
}

}  // namespace mfe
