#include <doctest.h>

#include <cstring>
#include <string>
#include <vector>

#include "mfe/mfe.h"

TEST_CASE("C API round trip") {
  CHECK(std::string(mfe_version()).size() > 0);

  mfe_model* model = nullptr;
  REQUIRE(mfe_model_counterexample(0.25, 11, &model) == MFE_OK);
  mfe_model_info info;
  REQUIRE(mfe_model_get_info(model, &info) == MFE_OK);
  CHECK(info.clusters == 1);
  CHECK(info.states == 3);
  CHECK(info.actions == 11);

  mfe_howard_options hopt;
  mfe_howard_options_init(&hopt);
  mfe_solution* sol = nullptr;
  REQUIRE(mfe_solve_howard(model, 50, &hopt, &sol) == MFE_OK);
  mfe_solution_summary s;
  REQUIRE(mfe_solution_get_summary(sol, &s) == MFE_OK);
  CHECK(s.nodes == 1326);
  CHECK(s.converged == 1);
  CHECK(s.gain == doctest::Approx(0.538).epsilon(2e-2));

  // size query, then a full copy
  std::size_t len = 0;
  CHECK(mfe_solution_bias(sol, nullptr, 0, &len) == MFE_OK);
  CHECK(len == s.nodes);
  std::vector<double> bias(len);
  CHECK(mfe_solution_bias(sol, bias.data(), bias.size(), &len) == MFE_OK);
  CHECK(mfe_solution_bias(sol, bias.data(), 3, &len) == MFE_ERR_PARAM);

  std::size_t next = 0;
  CHECK(mfe_solution_successor(sol, 0, &next) == MFE_OK);
  CHECK(next < s.nodes);
  CHECK(mfe_solution_successor(sol, s.nodes, &next) == MFE_ERR_PARAM);
  std::size_t cyc = 0;
  double period = -1.0;
  CHECK(mfe_solution_limit_cycle(sol, 0, nullptr, 0, &cyc, &period) == MFE_OK);
  CHECK(cyc >= 1);

  mfe_solution_free(sol);
  mfe_model_free(model);
}

TEST_CASE("C API error codes") {
  mfe_model* model = nullptr;
  CHECK(mfe_model_counterexample(0.7, 11, &model) == MFE_ERR_PARAM);
  CHECK(model == nullptr);
  CHECK(std::strlen(mfe_last_error()) > 0);

  CHECK(mfe_model_from_json("{\"grid\": {\"bogus\": 1}}", 0, 0.0, &model) == MFE_ERR_CONFIG);
  CHECK(std::string(mfe_last_error()).find("grid.bogus") != std::string::npos);
  CHECK(mfe_model_from_json("not json", 0, 0.0, &model) == MFE_ERR_CONFIG);

  CHECK(mfe_model_get_info(nullptr, nullptr) == MFE_ERR_PARAM);
  mfe_model_free(nullptr);
  mfe_solution_free(nullptr);

  REQUIRE(mfe_model_counterexample(0.25, 5, &model) == MFE_OK);
  mfe_rvi_options opt;
  mfe_rvi_options_init(&opt);
  opt.epsilon = 1e-15;
  opt.max_iterations = 2;
  mfe_solution* sol = nullptr;
  CHECK(mfe_solve_rvi(model, 10, &opt, &sol) == MFE_ERR_UNCONVERGED);
  REQUIRE(sol != nullptr);
  mfe_solution_summary s;
  CHECK(mfe_solution_get_summary(sol, &s) == MFE_OK);
  CHECK(s.converged == 0);
  mfe_solution_free(sol);

  double bound = 0.0;
  CHECK(mfe_gain_upper_bound(model, &bound) == MFE_ERR_PARAM);
  mfe_model_free(model);

  double price = 0.0;
  const mfe_toy toy{2.0, 3.0, 3.0, 0.5};
  CHECK(mfe_toy_price(&toy, 0.0, 0.5, &price) == MFE_ERR_DOMAIN);
  CHECK(mfe_toy_price(&toy, 0.3, 0.5, &price) == MFE_OK);
}

TEST_CASE("C API example checks") {
  double g = 0, alpha = 0, beta = 0;
  REQUIRE(mfe_example_coefficients(0.25, &g, &alpha, &beta) == MFE_OK);
  CHECK(g == doctest::Approx(0.538462).epsilon(1e-6));
  double res = 1.0;
  std::size_t points = 0;
  REQUIRE(mfe_example_residual(0.25, 0.5, 50, &res, &points) == MFE_OK);
  CHECK(res <= 1e-9);
  CHECK(points > 100);

  const mfe_toy toy{2.0, 3.0, 3.0, 0.0};
  const double gammas[] = {0.0, 2.0};
  mfe_cycle_row rows[2];
  REQUIRE(mfe_cycle_scan(&toy, gammas, 2, 0.05, 8, 1, rows) == MFE_OK);
  CHECK(rows[0].amplitude == 0.0);
  CHECK(rows[1].amplitude > 0.0);
  int found = 0;
  double kink = 0.0;
  REQUIRE(mfe_cycle_kink(rows, 2, 0.05, &found, &kink) == MFE_OK);
  CHECK(found == 1);
  CHECK(kink == 2.0);
}
