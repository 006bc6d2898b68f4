#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "mfe/errors.hpp"
#include "mfe/linalg.hpp"
#include "mfe/steady_state.hpp"

using namespace mfe;

namespace {

struct Instance {
  PricingParams params;
  Action prices;
};

// N in {2, 3, 4}; gamma uniform per cluster unless `heterogeneous`.
Instance random_instance(std::mt19937& rng, bool positive_gamma, bool heterogeneous = false) {
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Instance in;
  auto& p = in.params;
  const int offers = 1 + static_cast<int>(rng() % 3);
  p.rationality = 0.05 + 4.95 * u(rng);
  PricingCluster c;
  for (int n = 0; n < offers; ++n) {
    c.reservation.push_back(5.0 + 10.0 * u(rng));
    c.consumption.push_back(1.0 + 9.0 * u(rng));
    c.cost.push_back(2.0 * u(rng));
    p.price_min.push_back(0.0);
    p.price_max.push_back(3.0);
    in.prices.push_back(3.0 * u(rng));
  }
  const double g = positive_gamma ? 0.01 + 29.99 * u(rng) : 30.0 * u(rng);
  c.switching.assign(offers + 1, g);
  if (heterogeneous)
    for (auto& v : c.switching) v = 30.0 * u(rng);
  p.clusters = {c};
  p.price_steps = 3;
  return in;
}

double mu1_hat(double a) { return (1 - a) * (1 - a) / (1 - a * (1 - a)); }

}  // namespace

TEST_CASE("stationary power iteration") {
  Matrix rank1(3, 3);
  for (int i = 0; i < 3; ++i) {
    rank1(i, 0) = 0.2;
    rank1(i, 1) = 0.3;
    rank1(i, 2) = 0.5;
  }
  const auto r = stationary_power(rank1);
  CHECK(r[0] == doctest::Approx(0.2));
  CHECK(r[2] == doctest::Approx(0.5));

  const auto ce = counterexample_model(0.25, 11);
  const auto mu = stationary_power(ce.transition(0, 0));
  CHECK(mu[0] == doctest::Approx(0.6923).epsilon(1e-4));
  CHECK(mu[0] == doctest::Approx(mu1_hat(0.25)).epsilon(1e-10));
  CHECK(mu[2] == doctest::Approx(0.0769).epsilon(1e-3));
  CHECK(mu[2] == doctest::Approx(0.0625 / 0.8125).epsilon(1e-10));

  Matrix identity = Matrix::identity(2);
  CHECK_THROWS_AS(stationary_power(identity), DomainError);
  Matrix negative(2, 2);
  negative(0, 0) = 1.5;
  negative(0, 1) = -0.5;
  negative(1, 0) = negative(1, 1) = 0.5;
  CHECK_THROWS_AS(stationary_power(negative), DomainError);
}

TEST_CASE("closed form agrees with power iteration") {
  std::mt19937 rng(17);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_instance(rng, false, trial % 4 == 0);
    const auto closed = stationary_logit(in.params, 0, in.prices);
    const Matrix p = logit_transition(in.params, 0, in.prices);
    CHECK(std::abs(std::accumulate(closed.begin(), closed.end(), 0.0) - 1.0) <= 1e-12);
    for (double v : closed) CHECK(v > 0.0);
    CHECK(sup_distance(closed, left_multiply(closed, p)) <= 1e-10);
    CHECK(sup_distance(closed, stationary_power(p)) <= 1e-9);
  }
}

TEST_CASE("zero switching cost recovers the instantaneous logit") {
  std::mt19937 rng(19);
  for (int trial = 0; trial < 100; ++trial) {
    auto in = random_instance(rng, false);
    for (auto& g : in.params.clusters[0].switching) g = 0.0;
    CHECK(sup_distance(stationary_logit(in.params, 0, in.prices), instantaneous_logit(in.params, 0, in.prices)) <=
          1e-14);
  }
}

TEST_CASE("majorization") {
  const std::vector<double> vertex{1.0, 0.0, 0.0}, any{0.2, 0.5, 0.3}, uniform{1.0 / 3, 1.0 / 3, 1.0 / 3};
  CHECK(majorizes(vertex, any));
  CHECK_FALSE(majorizes(uniform, any));
  CHECK(majorizes(uniform, uniform));
  CHECK(majorizes(any, uniform));

  std::mt19937 rng(23);
  int failures = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    const auto in = random_instance(rng, true);
    const auto bar = stationary_logit(in.params, 0, in.prices);
    const auto inst = instantaneous_logit(in.params, 0, in.prices);
    if (!majorizes(bar, inst)) ++failures;

    // same sorting order
    std::vector<std::size_t> ob(bar.size()), oi(bar.size());
    std::iota(ob.begin(), ob.end(), 0);
    std::iota(oi.begin(), oi.end(), 0);
    std::stable_sort(ob.begin(), ob.end(), [&](auto x, auto y) { return bar[x] > bar[y]; });
    std::stable_sort(oi.begin(), oi.end(), [&](auto x, auto y) { return inst[x] > inst[y]; });
    CHECK(ob == oi);

    // a majorizes b  =>  a_i <= d b_i
    const double d = static_cast<double>(bar.size());
    for (std::size_t i = 0; i < bar.size(); ++i) CHECK(bar[i] <= d * inst[i] * (1 + 1e-12));
  }
  CHECK(failures == 0);
}

TEST_CASE("optimal steady state") {
  PricingParams p;
  p.rationality = 0.1;
  PricingCluster c;
  c.reservation = {85.0};
  c.consumption = {500.0};
  c.cost = {65.0};
  c.switching = {0.0, 0.0};
  p.clusters = {c};
  p.price_min = {0.08};
  p.price_max = {0.22};
  p.price_steps = 141;
  const auto model = pricing_model(p);
  SteadyStateOptions opt;
  opt.refine_rounds = 0;
  const auto res = optimal_steady_state(model, opt);

  double brute = -1e300;
  for (const auto& a : p.price_grid()) {
    const auto ml = instantaneous_logit(p, 0, a);
    brute = std::max(brute, (500.0 * a[0] - 65.0) * ml[0]);
  }
  CHECK(res.grid_gain == doctest::Approx(brute).epsilon(1e-12));
  CHECK(res.gain == res.grid_gain);

  const auto refined = optimal_steady_state(model);
  CHECK(refined.gain >= refined.grid_gain);
  CHECK(refined.gain == doctest::Approx(model.reward_at(refined.action, refined.distribution)).epsilon(1e-14));

  // margin always negative: the least damaging price sheds the most customers
  auto loss = p;
  loss.clusters[0].cost = {200.0};
  const auto lm = optimal_steady_state(pricing_model(loss), opt);
  CHECK(lm.action_index == model.action_count() - 1);
  CHECK(lm.gain <= 0.0);
}

TEST_CASE("gamma-free steady-state bound") {
  PricingParams p;
  p.rationality = 0.1;
  PricingCluster c;
  c.reservation = {85.0};
  c.consumption = {500.0};
  c.cost = {65.0};
  p.price_min = {0.08};
  p.price_max = {0.22};
  p.price_steps = 57;
  for (double g : {0.0, 5.0, 10.0, 20.0, 40.0}) {
    c.switching = {g, g};
    p.clusters = {c};
    const auto bound = gain_upper_bound(p);
    REQUIRE(bound.has_value());
    CHECK(*bound == doctest::Approx(20.0 + 2.0 / (0.1 * std::exp(1.0))).epsilon(1e-14));
    CHECK(*bound == doctest::Approx(27.36).epsilon(1e-3));
    CHECK(optimal_steady_state(pricing_model(p)).gain <= *bound);
  }
  c.switching = {1.0, 2.0};
  p.clusters = {c};
  CHECK_FALSE(gain_upper_bound(p).has_value());
}
