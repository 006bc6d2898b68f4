#include <doctest.h>

#include <cmath>
#include <random>

#include "mfe/howard.hpp"
#include "mfe/rvi.hpp"

using namespace mfe;

namespace {

PricingParams small_two_cluster() {
  PricingParams p;
  p.rationality = 0.5;
  PricingCluster a, b;
  a.weight = 0.6;
  a.reservation = {8.0};
  a.consumption = {10.0};
  a.cost = {4.0};
  a.switching = {2.0, 2.0};
  b.weight = 0.4;
  b.reservation = {6.0};
  b.consumption = {8.0};
  b.cost = {3.0};
  b.switching = {1.0, 3.0};
  p.clusters = {a, b};
  p.price_min = {0.5};
  p.price_max = {1.0};
  p.price_steps = 6;
  return p;
}

}  // namespace

TEST_CASE("functional graph evaluation") {
  // 0 <-> 1 with rewards 1, 3; node 2 feeds the cycle
  const std::vector<std::size_t> succ{1, 0, 0};
  const std::vector<double> r{1.0, 3.0, 0.0};
  const auto ev = evaluate_policy(succ, r);
  for (double g : ev.gain) CHECK(g == doctest::Approx(2.0));
  CHECK(ev.bias[0] == 0.0);
  CHECK(ev.bias[1] == doctest::Approx(1.0));   // h1 = r1 - g + h0
  CHECK(ev.bias[2] == doctest::Approx(-2.0));  // h2 = r2 - g + h0
  CHECK(ev.cycle_length[ev.component[0]] == 2);

  // self-loop with reward 5 at node 1, tail node 0 with reward 0
  const std::vector<std::size_t> s2{1, 1};
  const std::vector<double> r2{0.0, 5.0};
  const auto e2 = evaluate_policy(s2, r2);
  CHECK(e2.gain[0] == doctest::Approx(5.0));
  CHECK(e2.gain[1] == doctest::Approx(5.0));
  CHECK(e2.bias[0] - e2.bias[1] == doctest::Approx(-5.0));

  // constant rewards over two components
  const std::vector<std::size_t> s3{1, 2, 0, 4, 3, 3};
  const std::vector<double> r3(6, 1.5);
  const auto e3 = evaluate_policy(s3, r3);
  for (std::size_t i = 0; i < 6; ++i) {
    CHECK(e3.gain[i] == doctest::Approx(1.5));
    CHECK(e3.bias[i] == doctest::Approx(0.0));
  }
  CHECK(e3.cycle_anchor.size() == 2);
  CHECK(e3.component[5] == e3.component[3]);
}

TEST_CASE("random functional graphs satisfy the evaluation equations") {
  std::mt19937 rng(41);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 300;
    std::vector<std::size_t> succ(n);
    std::vector<double> r(n);
    for (std::size_t i = 0; i < n; ++i) {
      succ[i] = rng() % n;
      r[i] = u(rng);
    }
    const auto ev = evaluate_policy(succ, r);
    for (std::size_t i = 0; i < n; ++i) {
      CHECK(ev.gain[i] == ev.gain[succ[i]]);
      CHECK(std::abs(ev.gain[i] + ev.bias[i] - r[i] - ev.bias[succ[i]]) <= 1e-9);
    }
    for (auto anchor : ev.cycle_anchor) CHECK(ev.bias[anchor] == 0.0);
  }
}

TEST_CASE("local tables") {
  const auto model = counterexample_model(0.25, 3);
  SimplexGrid grid(3, 2);
  const auto t = build_local_tables(model, grid);
  const std::vector<int> e1{2, 0, 0};
  const auto i = grid.index_of(e1);
  const auto j = t.next(0, i, 0);  // (1,0,0) P(0.25) = (0.75, 0.25, 0)
  CHECK(grid.point(j)[0] == 0.5);
  CHECK(grid.point(j)[1] == 0.5);
  CHECK(t.transition_bytes() == grid.size() * 3 * 4);

  const auto t1 = build_local_tables(model, SimplexGrid(3, 30), 1);
  const auto t4 = build_local_tables(model, SimplexGrid(3, 30), 4);
  for (std::size_t k = 0; k < SimplexGrid(3, 30).size(); ++k)
    for (std::size_t a = 0; a < 3; ++a) CHECK(t1.next(0, k, a) == t4.next(0, k, a));
}

TEST_CASE("on-the-fly successors match a materialized table") {
  const auto model = pricing_model(small_two_cluster());
  SimplexGrid grid(2, 40);
  ProductGrid nodes(grid, 2);
  REQUIRE(nodes.size() <= 10000);
  const auto t = build_local_tables(model, grid);
  for (std::size_t node = 0; node < nodes.size(); ++node) {
    const auto mu = nodes.point(node);
    for (std::size_t a = 0; a < model.action_count(); ++a) {
      const auto next = model.push_forward(a, mu);
      std::vector<std::size_t> local(2);
      for (int k = 0; k < 2; ++k) local[k] = grid.nearest_index(std::span<const double>(next).subspan(2 * k, 2));
      CHECK(global_successor(t, nodes, node, a) == nodes.encode(local));
      CHECK(global_reward(t, nodes, node, a) == doctest::Approx(model.reward(a, next)).epsilon(1e-12));
    }
  }
}

TEST_CASE("policy iteration") {
  const auto model = counterexample_model(0.25, 11);
  SimplexGrid grid(3, 200);
  const auto pi = solve_howard(model, grid);
  const double g_star = 0.4375 / 0.8125;
  CHECK(pi.converged);
  CHECK(std::abs(pi.gain - g_star) <= 1e-2);
  RviOptions ro;
  const auto vi = solve_rvi(model, grid, ro);
  CHECK(std::abs(pi.gain - vi.gain) <= 2e-2);
  CHECK(pi.materialized_bytes == pi.arcs * 4);

  HowardOptions serial;
  serial.threads = 1;
  const auto p1 = solve_howard(model, grid, serial);
  CHECK(p1.policy == pi.policy);
  CHECK(p1.bias == pi.bias);
}

TEST_CASE("policy iteration on two clusters") {
  const auto model = pricing_model(small_two_cluster());
  SimplexGrid grid(2, 30);
  const auto pi = solve_howard(model, grid);
  CHECK(pi.converged);
  const auto t = build_local_tables(model, grid);
  ProductGrid nodes(grid, 2);
  const auto succ = policy_successors(t, nodes, pi.policy);
  // optimality: no action improves the node gain, nor the bias at equal gain
  for (std::size_t i = 0; i < nodes.size(); ++i) {
    CHECK(std::abs(pi.node_gain[i] + pi.bias[i] - global_reward(t, nodes, i, pi.policy[i]) - pi.bias[succ[i]]) <=
          1e-8);
    for (std::size_t a = 0; a < model.action_count(); ++a) {
      const auto j = global_successor(t, nodes, i, a);
      CHECK(pi.node_gain[j] <= pi.node_gain[i] + 1e-9);
      if (std::abs(pi.node_gain[j] - pi.node_gain[i]) <= 1e-12)
        CHECK(global_reward(t, nodes, i, a) - pi.node_gain[i] + pi.bias[j] <= pi.bias[i] + 1e-8);
    }
  }
  const auto cycle = limit_cycle(succ, 0);
  REQUIRE_FALSE(cycle.empty());
  CHECK(succ[cycle.back()] == cycle.front());
}

TEST_CASE("limit cycles and promotion periods") {
  const std::vector<std::size_t> succ{1, 2, 3, 1};
  const auto c = limit_cycle(succ, 0);
  REQUIRE(c.size() == 3);
  CHECK(c[0] == 1);
  CHECK(c[2] == 3);

  PricingParams p = small_two_cluster();
  p.clusters.resize(1);
  p.clusters[0].weight = 1.0;
  const auto model = pricing_model(p);
  SimplexGrid grid(2, 10);
  ProductGrid nodes(grid, 1);
  // provider share is point[0]; index order puts share 0 first
  std::vector<std::size_t> cyc;
  for (int k = 0; k < 10; ++k) {
    const std::vector<int> comp{9 - k, 1 + k};  // falling share, then a jump back
    cyc.push_back(grid.index_of(comp));
  }
  CHECK(promotion_period(model, nodes, cyc) == doctest::Approx(10.0));
  const std::vector<std::size_t> fixed{cyc[0]};
  CHECK(promotion_period(model, nodes, fixed) == 0.0);
}
