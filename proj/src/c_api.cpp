#include "mfe/mfe.h"

#include <cmath>
#include <cstring>
#include <memory>
#include <new>
#include <optional>
#include <string>
#include <vector>

#include "mfe/config.hpp"
#include "mfe/cycles.hpp"
#include "mfe/errors.hpp"
#include "mfe/howard.hpp"
#include "mfe/lagrangian.hpp"
#include "mfe/model.hpp"
#include "mfe/rvi.hpp"
#include "mfe/steady_state.hpp"
#include "mfe/verification.hpp"

struct mfe_model {
  mfe::MeanFieldModel model;
};

struct mfe_solution {
  const mfe_model* owner;  // borrowed; must outlive the solution
  std::unique_ptr<mfe::SimplexGrid> grid;
  std::unique_ptr<mfe::ProductGrid> nodes;
  mfe::ErgodicSolution result;
  std::vector<std::size_t> successor;  // policy iteration only
};

namespace {

thread_local std::string g_last_error;

mfe_status fail(mfe_status code, const std::string& msg) {
  g_last_error = msg;
  return code;
}

template <class F>
mfe_status guarded(F&& body) {
  g_last_error.clear();
  try {
    return body();
  } catch (const mfe::ParameterError& e) {
    return fail(MFE_ERR_PARAM, e.what());
  } catch (const mfe::DomainError& e) {
    return fail(MFE_ERR_DOMAIN, e.what());
  } catch (const mfe::ConfigError& e) {
    return fail(MFE_ERR_CONFIG, e.what());
  } catch (const std::bad_alloc&) {
    return fail(MFE_ERR_INTERNAL, "out of memory");
  } catch (const std::exception& e) {
    return fail(MFE_ERR_INTERNAL, e.what());
  } catch (...) {
    return fail(MFE_ERR_INTERNAL, "unknown error");
  }
}

template <class T, class Src>
mfe_status copy_out(const Src& src, T* out, std::size_t cap, std::size_t* len) {
  if (len) *len = src.size();
  if (cap == 0) return MFE_OK;
  if (!out || cap < src.size()) return fail(MFE_ERR_PARAM, "output buffer too small");
  for (std::size_t i = 0; i < src.size(); ++i) out[i] = static_cast<T>(src[i]);
  return MFE_OK;
}

mfe_status need(const void* p, const char* what) {
  return p ? MFE_OK : fail(MFE_ERR_PARAM, std::string(what) + " must not be NULL");
}

mfe::ToyModel to_toy(const mfe_toy& t) { return {t.cost, t.reservation, t.rationality, t.switching}; }

}  // namespace

extern "C" {

const char* mfe_last_error(void) { return g_last_error.c_str(); }
const char* mfe_version(void) { return "1.0.0"; }

mfe_status mfe_parse_settings(const char* json, mfe_run_settings* out, double* gammas, size_t gamma_cap) {
  if (need(json, "json") || need(out, "out")) return MFE_ERR_PARAM;
  return guarded([&] {
    const auto cfg = mfe::parse_config(json);
    if (cfg.output.size() >= sizeof(out->output)) return fail(MFE_ERR_CONFIG, "output path too long");
    mfe_run_settings st{};
    st.resolution = cfg.resolution;
    st.epsilon = cfg.epsilon;
    st.max_iterations = cfg.max_iterations;
    st.max_pi_iterations = cfg.max_pi_iterations;
    st.dual_iterations = cfg.dual_iterations;
    if (cfg.powers.size() > 4) return fail(MFE_ERR_CONFIG, "at most four phi powers");
    st.power_count = static_cast<int>(cfg.powers.size());
    for (std::size_t i = 0; i < cfg.powers.size(); ++i) st.powers[i] = cfg.powers[i];
    st.refine_rounds = cfg.refine_rounds;
    st.share_step = cfg.share_step;
    st.tau_max = cfg.tau_max;
    st.toy_cost = cfg.toy.cost;
    st.toy_reservation = cfg.toy.reservation;
    st.toy_rationality = cfg.toy.rationality;
    st.threads = cfg.threads;
    st.seed = cfg.seed;
    st.gamma_count = cfg.gammas.size();
    std::memcpy(st.output, cfg.output.c_str(), cfg.output.size() + 1);
    if (gammas)
      for (std::size_t i = 0; i < cfg.gammas.size() && i < gamma_cap; ++i) gammas[i] = cfg.gammas[i];
    *out = st;
    return MFE_OK;
  });
}

mfe_status mfe_model_from_json(const char* json, int has_gamma, double gamma, mfe_model** out) {
  if (need(json, "json") || need(out, "out")) return MFE_ERR_PARAM;
  return guarded([&] {
    const auto cfg = mfe::parse_config(json);
    std::optional<double> g;
    if (has_gamma) g = gamma;
    *out = new mfe_model{mfe::build_model(cfg.model, g)};
    return MFE_OK;
  });
}

mfe_status mfe_model_counterexample(double a0, int action_steps, mfe_model** out) {
  if (need(out, "out")) return MFE_ERR_PARAM;
  return guarded([&] {
    *out = new mfe_model{mfe::counterexample_model(a0, action_steps)};
    return MFE_OK;
  });
}

void mfe_model_free(mfe_model* model) { delete model; }

mfe_status mfe_model_get_info(const mfe_model* model, mfe_model_info* out) {
  if (need(model, "model") || need(out, "out")) return MFE_ERR_PARAM;
  const auto& m = model->model;
  *out = {m.clusters(), m.states(), m.action_count(), m.action(0).size(), m.primitivity_power(), m.reward_bound()};
  return MFE_OK;
}

mfe_status mfe_model_action(const mfe_model* model, size_t action, double* out, size_t cap, size_t* len) {
  if (need(model, "model")) return MFE_ERR_PARAM;
  if (action >= model->model.action_count()) return fail(MFE_ERR_PARAM, "action index out of range");
  return copy_out(model->model.action(action), out, cap, len);
}

mfe_status mfe_check_assumptions(const mfe_model* model, int power, double reward_bound,
                                 mfe_assumption_report* out) {
  if (need(model, "model") || need(out, "out")) return MFE_ERR_PARAM;
  return guarded([&] {
    mfe::AssumptionOptions opt;
    opt.power = power;
    if (reward_bound > 0.0) opt.reward_bound = reward_bound;
    const auto r = mfe::check_assumptions(model->model, opt);
    *out = {r.row_stochastic, r.nonnegative, r.primitive,           r.reward_bounded,
            r.exhaustive,     r.power,       r.kappa_max,           r.observed_reward_bound,
            r.violations.size()};
    return MFE_OK;
  });
}

void mfe_rvi_options_init(mfe_rvi_options* options) {
  if (options) *options = {1e-5, 1000000, 0};
}

void mfe_howard_options_init(mfe_howard_options* options) {
  if (options) *options = {1000, 0};
}

mfe_status mfe_solve_rvi(const mfe_model* model, int resolution, const mfe_rvi_options* options,
                         mfe_solution** out) {
  if (need(model, "model") || need(out, "out")) return MFE_ERR_PARAM;
  return guarded([&] {
    mfe_rvi_options opt;
    mfe_rvi_options_init(&opt);
    if (options) opt = *options;
    auto sol = std::make_unique<mfe_solution>();
    sol->owner = model;
    sol->grid = std::make_unique<mfe::SimplexGrid>(model->model.states(), resolution);
    sol->nodes = std::make_unique<mfe::ProductGrid>(*sol->grid, model->model.clusters());
    mfe::RviOptions ro;
    ro.epsilon = opt.epsilon;
    ro.max_iterations = opt.max_iterations;
    ro.threads = opt.threads;
    sol->result = mfe::solve_rvi(model->model, *sol->grid, ro);
    const bool converged = sol->result.converged;
    *out = sol.release();
    return converged ? MFE_OK : fail(MFE_ERR_UNCONVERGED, "iteration cap reached before the span tolerance");
  });
}

mfe_status mfe_solve_howard(const mfe_model* model, int resolution, const mfe_howard_options* options,
                            mfe_solution** out) {
  if (need(model, "model") || need(out, "out")) return MFE_ERR_PARAM;
  return guarded([&] {
    mfe_howard_options opt;
    mfe_howard_options_init(&opt);
    if (options) opt = *options;
    auto sol = std::make_unique<mfe_solution>();
    sol->owner = model;
    sol->grid = std::make_unique<mfe::SimplexGrid>(model->model.states(), resolution);
    sol->nodes = std::make_unique<mfe::ProductGrid>(*sol->grid, model->model.clusters());
    mfe::HowardOptions ho;
    ho.max_iterations = opt.max_iterations;
    ho.threads = opt.threads;
    sol->result = mfe::solve_howard(model->model, *sol->grid, ho);
    const mfe::LocalTransitionTable tables(model->model, *sol->grid, opt.threads);
    sol->successor = mfe::policy_successors(tables, *sol->nodes, sol->result.policy);
    const bool converged = sol->result.converged;
    *out = sol.release();
    return converged ? MFE_OK : fail(MFE_ERR_UNCONVERGED, "policy iteration hit its iteration cap");
  });
}

void mfe_solution_free(mfe_solution* solution) { delete solution; }

mfe_status mfe_solution_get_summary(const mfe_solution* solution, mfe_solution_summary* out) {
  if (need(solution, "solution") || need(out, "out")) return MFE_ERR_PARAM;
  const auto& r = solution->result;
  *out = {r.gain,  r.gain_min,         r.gain_max,    r.span,
          r.iterations, r.sweeps,      r.nodes,       r.arcs,
          r.transition_bytes, r.value_bytes, r.materialized_bytes, r.converged ? 1 : 0};
  return MFE_OK;
}

mfe_status mfe_solution_bias(const mfe_solution* solution, double* out, size_t cap, size_t* len) {
  if (need(solution, "solution")) return MFE_ERR_PARAM;
  return copy_out(solution->result.bias, out, cap, len);
}

mfe_status mfe_solution_policy(const mfe_solution* solution, uint32_t* out, size_t cap, size_t* len) {
  if (need(solution, "solution")) return MFE_ERR_PARAM;
  return copy_out(solution->result.policy, out, cap, len);
}

mfe_status mfe_solution_node_gain(const mfe_solution* solution, double* out, size_t cap, size_t* len) {
  if (need(solution, "solution")) return MFE_ERR_PARAM;
  if (!solution->result.node_gain.empty()) return copy_out(solution->result.node_gain, out, cap, len);
  return copy_out(std::vector<double>(solution->result.nodes, solution->result.gain), out, cap, len);
}

mfe_status mfe_solution_node_point(const mfe_solution* solution, size_t node, double* out, size_t cap,
                                   size_t* len) {
  if (need(solution, "solution")) return MFE_ERR_PARAM;
  if (node >= solution->nodes->size()) return fail(MFE_ERR_PARAM, "node index out of range");
  return copy_out(solution->nodes->point(node), out, cap, len);
}

mfe_status mfe_solution_successor(const mfe_solution* solution, size_t node, size_t* out) {
  if (need(solution, "solution") || need(out, "out")) return MFE_ERR_PARAM;
  if (solution->successor.empty()) return fail(MFE_ERR_PARAM, "successors are only kept for policy iteration");
  if (node >= solution->successor.size()) return fail(MFE_ERR_PARAM, "node index out of range");
  *out = solution->successor[node];
  return MFE_OK;
}

mfe_status mfe_solution_limit_cycle(const mfe_solution* solution, size_t start, size_t* nodes, size_t cap,
                                    size_t* len, double* promotion_period) {
  if (need(solution, "solution")) return MFE_ERR_PARAM;
  if (solution->successor.empty()) return fail(MFE_ERR_PARAM, "successors are only kept for policy iteration");
  return guarded([&] {
    const auto cycle = mfe::limit_cycle(solution->successor, start);
    if (promotion_period) *promotion_period = mfe::promotion_period(solution->owner->model, *solution->nodes, cycle);
    return copy_out(cycle, nodes, cap, len);
  });
}

mfe_status mfe_solution_residual(const mfe_solution* solution, double* out) {
  if (need(solution, "solution") || need(out, "out")) return MFE_ERR_PARAM;
  return guarded([&] {
    *out = mfe::eigen_residual(solution->owner->model, *solution->grid, solution->result.bias, solution->result.gain);
    return MFE_OK;
  });
}

mfe_status mfe_optimal_steady_state(const mfe_model* model, int refine_rounds, int threads, mfe_steady_state* out,
                                    double* action, size_t action_cap, double* distribution,
                                    size_t distribution_cap) {
  if (need(model, "model") || need(out, "out")) return MFE_ERR_PARAM;
  return guarded([&] {
    const auto r = mfe::optimal_steady_state(model->model, {.refine_rounds = refine_rounds, .threads = threads});
    *out = {r.action_index, r.gain, r.grid_gain};
    if (action) {
      const mfe_status s = copy_out(r.action, action, action_cap, nullptr);
      if (s != MFE_OK) return s;
    }
    if (distribution) return copy_out(r.distribution, distribution, distribution_cap, nullptr);
    return MFE_OK;
  });
}

mfe_status mfe_steady_state_values(const mfe_model* model, int threads, double* out, size_t cap, size_t* len) {
  if (need(model, "model")) return MFE_ERR_PARAM;
  return guarded([&] {
    const auto r = mfe::optimal_steady_state(model->model, {.refine_rounds = 0, .threads = threads});
    return copy_out(r.grid_values, out, cap, len);
  });
}

mfe_status mfe_stationary_distribution(const mfe_model* model, size_t action, double* out, size_t cap,
                                       size_t* len) {
  if (need(model, "model")) return MFE_ERR_PARAM;
  if (action >= model->model.action_count()) return fail(MFE_ERR_PARAM, "action index out of range");
  return guarded([&] { return copy_out(mfe::stationary_distribution(model->model, action), out, cap, len); });
}

mfe_status mfe_gain_upper_bound(const mfe_model* model, double* out) {
  if (need(model, "model") || need(out, "out")) return MFE_ERR_PARAM;
  if (!model->model.pricing()) return fail(MFE_ERR_PARAM, "gain bound needs a pricing model");
  return guarded([&] {
    const auto b = mfe::gain_upper_bound(*model->model.pricing());
    if (!b) return fail(MFE_ERR_PARAM, "gain bound needs switching costs uniform within each cluster");
    *out = *b;
    return MFE_OK;
  });
}

mfe_status mfe_dual_bound(const mfe_model* model, int resolution, int power, size_t max_iterations, int threads,
                          mfe_dual_result* out) {
  if (need(model, "model") || need(out, "out")) return MFE_ERR_PARAM;
  return guarded([&] {
    const mfe::SimplexGrid grid(model->model.states(), resolution);
    mfe::DualOptions opt;
    opt.power = power;
    opt.max_iterations = max_iterations;
    opt.threads = threads;
    const auto r = mfe::dual_bound(model->model, grid, opt);
    *out = {r.bound, r.steady_gain, r.iterations, r.zero_gap ? 1 : 0, r.diverged ? 1 : 0};
    return MFE_OK;
  });
}

mfe_status mfe_toy_price(const mfe_toy* toy, double mu_prev, double mu_next, double* price) {
  if (need(toy, "toy") || need(price, "price")) return MFE_ERR_PARAM;
  return guarded([&] {
    const auto t = to_toy(*toy);
    t.validate();
    *price = mfe::price_from_transition(t, mu_prev, mu_next);
    return MFE_OK;
  });
}

mfe_status mfe_cycle_scan(const mfe_toy* toy, const double* gammas, size_t n, double share_step, int tau_max,
                          int threads, mfe_cycle_row* rows) {
  if (need(toy, "toy") || (n > 0 && (need(gammas, "gammas") || need(rows, "rows")))) return MFE_ERR_PARAM;
  return guarded([&] {
    mfe::CycleScanOptions opt{share_step, tau_max, threads};
    const auto out = mfe::scan_sst(to_toy(*toy), std::span<const double>(gammas, n), opt);
    for (std::size_t i = 0; i < n; ++i) {
      const auto& r = out[i];
      rows[i] = {r.gamma, r.best.s, r.best.S, r.best.tau, r.best.gain, r.best.amplitude(), r.steady_gain};
    }
    return MFE_OK;
  });
}

mfe_status mfe_cycle_kink(const mfe_cycle_row* rows, size_t n, double threshold, int* found, double* gamma) {
  if ((n > 0 && need(rows, "rows")) || need(found, "found") || need(gamma, "gamma")) return MFE_ERR_PARAM;
  *found = 0;
  for (std::size_t i = 0; i < n; ++i)
    if (rows[i].amplitude > threshold) {
      *found = 1;
      *gamma = rows[i].gamma;
      break;
    }
  return MFE_OK;
}

mfe_status mfe_example_coefficients(double a, double* gain, double* alpha, double* beta) {
  if (need(gain, "gain") || need(alpha, "alpha") || need(beta, "beta")) return MFE_ERR_PARAM;
  return guarded([&] {
    const auto c = mfe::kolmogorov_coefficients(a);
    *gain = c.gain;
    *alpha = c.alpha;
    *beta = c.beta;
    return MFE_OK;
  });
}

mfe_status mfe_example_eigenvector(double a0, double lambda, double mu1, double mu3, double* value) {
  if (need(value, "value")) return MFE_ERR_PARAM;
  return guarded([&] {
    *value = mfe::AnalyticEigenvector(a0, lambda)(mu1, mu3);
    return MFE_OK;
  });
}

mfe_status mfe_example_residual(double a0, double lambda, int resolution, double* residual, size_t* points) {
  if (need(residual, "residual")) return MFE_ERR_PARAM;
  return guarded([&] {
    const mfe::AnalyticEigenvector v(a0, lambda);
    const auto model = mfe::counterexample_model(a0, 2);
    const auto pts = mfe::invariant_region_sample(a0, resolution);
    *residual = mfe::eigen_residual(model, [&](std::span<const double> x) { return v(x); }, v.gain(), pts);
    if (points) *points = pts.size();
    return MFE_OK;
  });
}

}  // extern "C"
