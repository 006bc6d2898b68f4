#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>

#include "mfe/rvi.hpp"
#include "mfe/steady_state.hpp"

using namespace mfe;

namespace {

// Every action maps any state to the same distribution; rewards differ by action.
MeanFieldModel rank_one_model() {
  Matrix p(3, 3);
  for (int i = 0; i < 3; ++i) {
    p(i, 0) = 0.5;
    p(i, 1) = 0.3;
    p(i, 2) = 0.2;
  }
  std::vector<std::vector<Matrix>> t{{p, p, p}};
  std::vector<std::vector<std::vector<double>>> r{{{1.0, 0.0, 0.0}, {0.0, 2.0, 0.0}, {0.0, 0.0, 4.0}}};
  return MeanFieldModel("rank-one", 3, {1.0}, {Action{0.0}, Action{1.0}, Action{2.0}}, t, r);
}

double span(const std::vector<double>& v) {
  const auto [lo, hi] = std::minmax_element(v.begin(), v.end());
  return *hi - *lo;
}

}  // namespace

TEST_CASE("one-step Bellman values") {
  const auto model = counterexample_model(0.25, 11);
  SimplexGrid grid(3, 10);
  GridBellman b(model, grid);
  std::vector<double> zero(b.size(), 0.0), out(b.size());
  std::vector<std::uint32_t> policy(b.size());
  b.apply(zero, out, policy);
  for (std::size_t i = 0; i < b.size(); ++i) {
    const auto mu = grid.point(i);
    double best = -1e300;
    std::size_t arg = 0;
    for (std::size_t a = 0; a < model.action_count(); ++a) {
      const double v = model.reward(a, model.push_forward(a, mu));
      if (v > best + 1e-15) {
        best = v;
        arg = a;
      }
    }
    CHECK(out[i] == doctest::Approx(best).epsilon(1e-13));
    CHECK(model.reward(policy[i], model.push_forward(policy[i], mu)) == doctest::Approx(best).epsilon(1e-13));
    (void)arg;
  }
}

TEST_CASE("Bellman operator properties") {
  const auto model = counterexample_model(0.2, 7);
  SimplexGrid grid(3, 12);
  GridBellman b(model, grid);
  std::mt19937 rng(31);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  const std::size_t n = b.size();
  for (int trial = 0; trial < 20; ++trial) {
    std::vector<double> h(n), g(n), bh(n), bg(n), shifted(n), bs(n);
    for (std::size_t i = 0; i < n; ++i) {
      h[i] = u(rng);
      g[i] = h[i] + 0.5 * (u(rng) + 1.0);  // g >= h
    }
    b.apply(h, bh);
    b.apply(g, bg);
    for (std::size_t i = 0; i < n; ++i) CHECK(bh[i] <= bg[i] + 1e-14);

    const double c = 3.7 * u(rng);
    for (std::size_t i = 0; i < n; ++i) shifted[i] = h[i] + c;
    b.apply(shifted, bs);
    for (std::size_t i = 0; i < n; ++i) CHECK(std::abs(bs[i] - bh[i] - c) <= 1e-12);

    std::vector<double> dh(n), db(n);
    for (std::size_t i = 0; i < n; ++i) {
      dh[i] = h[i] - g[i];
      db[i] = bh[i] - bg[i];
    }
    CHECK(span(db) <= span(dh) + 1e-12);
  }
}

TEST_CASE("grid operator dominates the exact operator on convex functions") {
  const auto model = counterexample_model(0.25, 5);
  SimplexGrid grid(3, 8);
  GridBellman b(model, grid);
  auto f = [](std::span<const double> mu) { return 3 * mu[0] * mu[0] - mu[1] + 2 * mu[2] * mu[2] + mu[0] * mu[2]; };
  std::vector<double> h(b.size()), out(b.size());
  for (std::size_t i = 0; i < b.size(); ++i) h[i] = f(grid.point(i));
  b.apply(h, out);
  for (std::size_t i = 0; i < b.size(); ++i) {
    double exact = -1e300;
    for (std::size_t a = 0; a < model.action_count(); ++a) {
      const auto next = model.push_forward(a, grid.point(i));
      exact = std::max(exact, model.reward(a, next) + f(next));
    }
    CHECK(out[i] >= exact - 1e-12);
  }
}

TEST_CASE("iterates stay convex along grid lines") {
  const auto model = counterexample_model(0.25, 5);
  SimplexGrid grid(3, 12);
  GridBellman b(model, grid);
  std::vector<double> h(b.size(), 0.0), next(b.size());
  for (int it = 0; it < 6; ++it) {
    b.apply(h, next);
    h.swap(next);
    for (std::size_t i = 0; i < grid.size(); ++i) {
      const auto c = grid.composition(i);
      // move one unit of mass from coordinate p to q in both directions
      for (int p = 0; p < 3; ++p)
        for (int q = 0; q < 3; ++q) {
          if (p == q || c[p] == 0 || c[q] == 0) continue;
          std::vector<int> fwd(c.begin(), c.end()), back(c.begin(), c.end());
          --fwd[p];
          ++fwd[q];
          ++back[p];
          --back[q];
          const double mid = h[i];
          const double lo = h[grid.index_of(fwd)];
          const double hi = h[grid.index_of(back)];
          CHECK(lo + hi - 2 * mid >= -1e-9);
        }
    }
  }
}

TEST_CASE("relative value iteration") {
  const auto r1 = rank_one_model();
  SimplexGrid g5(3, 5);
  const auto s1 = solve_rvi(r1, g5);
  CHECK(s1.converged);
  // post-transition state is (0.5, 0.3, 0.2) whatever the action
  CHECK(s1.gain == doctest::Approx(std::max({0.5, 0.6, 0.8})).epsilon(1e-9));
  CHECK(s1.iterations <= 5);

  const auto model = counterexample_model(0.25, 11);
  SimplexGrid grid(3, 200);
  RviOptions opt;
  opt.epsilon = 1e-5;
  const auto sol = solve_rvi(model, grid, opt);
  const double g_star = 0.4375 / 0.8125;
  CHECK(sol.converged);
  CHECK(std::abs(sol.gain - g_star) <= 1e-2);
  CHECK(sol.span <= 1e-5);
  CHECK(*std::min_element(sol.bias.begin(), sol.bias.end()) == 0.0);
  CHECK(sol.gain >= g_star - 1e-5);

  opt.threads = 1;
  const auto serial = solve_rvi(model, grid, opt);
  opt.threads = 4;
  const auto threaded = solve_rvi(model, grid, opt);
  CHECK(serial.gain == threaded.gain);
  CHECK(serial.bias == threaded.bias);
}

TEST_CASE("iteration cap is reported") {
  const auto model = counterexample_model(0.25, 11);
  SimplexGrid grid(3, 40);
  RviOptions opt;
  opt.epsilon = 1e-14;
  opt.max_iterations = 3;
  const auto sol = solve_rvi(model, grid, opt);
  CHECK_FALSE(sol.converged);
  CHECK(sol.iterations == 3);
}
