#pragma once

#include <optional>
#include <span>
#include <vector>

namespace mfe {

/// One offer against an outside option; mu is the provider's market share.
/// Utility R - a, switching bonus gamma, reward (a - C) mu per step.
struct ToyModel {
  double cost = 2.0;
  double reservation = 3.0;
  double rationality = 3.0;  // beta
  double switching = 0.0;    // gamma >= 0

  double gamma_hat() const;  // e^{beta gamma}
  void validate() const;
};

/// Share after one step at price a from share mu (2x2 logit kernel).
double toy_step(const ToyModel& toy, double mu, double price);

/// The unique price moving the share from mu_prev to mu_next. Both shares must
/// lie in (0, 1); throws DomainError otherwise.
double price_from_transition(const ToyModel& toy, double mu_prev, double mu_next);

struct CycleStats {
  double gain = 0.0;      // (1/tau) sum_t (a_t - C) mu_t
  double mean = 0.0;      // (1/tau) sum_t mu_t, t = 1..tau
  double variance = 0.0;  // (1/tau) sum_t (mu_t - mean)^2
  std::vector<double> prices;  // a_1..a_tau
};

/// Gain of a closed trajectory mu_0..mu_tau (mu_0 == mu_tau).
CycleStats cycle_gain(const ToyModel& toy, std::span<const double> trajectory);

/// mu_0 = S, mu_t = S + (s - S) t / tau for 0 < t < tau, mu_tau = S.
std::vector<double> sst_trajectory(double s, double S, int tau);

struct ToySteadyState {
  double share = 0.0;
  double price = 0.0;
  double gain = 0.0;
};

/// Best constant-share policy over the continuous share interval.
ToySteadyState toy_steady_state(const ToyModel& toy);

struct CycleSpec {
  double s = 0.0;
  double S = 0.0;
  int tau = 1;
  double gain = 0.0;
  double amplitude() const { return S - s; }
};

struct CycleScanOptions {
  double step = 0.01;  // share grid {step, 2 step, ..., 1 - step}
  int tau_max = 20;
  int threads = 0;
};

struct CycleScanRow {
  double gamma = 0.0;
  CycleSpec best;
  double steady_gain = 0.0;
};

/// Best (s, S, tau)-cycle on the share grid. The exact steady state competes
/// as the amplitude-0 candidate; ties go to the smaller amplitude, then the
/// smaller period.
CycleSpec best_sst_cycle(const ToyModel& toy, const CycleScanOptions& options = {});

std::vector<CycleScanRow> scan_sst(const ToyModel& toy, std::span<const double> gammas,
                                   const CycleScanOptions& options = {});

/// Smallest scanned gamma whose best amplitude exceeds `threshold`.
std::optional<double> locate_kink(std::span<const CycleScanRow> rows, double threshold);

}  // namespace mfe
