/* C interface to the mean-field ergodic control library.
 *
 * Objects are opaque handles released with the matching *_free call. Every
 * function returns an mfe_status; on failure mfe_last_error() describes the
 * problem (thread-local, valid until the next call on the same thread).
 * Array getters follow one convention: pass a buffer and its capacity, the
 * required length is written to *len, and MFE_ERR_PARAM is returned when the
 * capacity is too small (pass cap = 0 to query the length). */
#ifndef MFE_MFE_H
#define MFE_MFE_H

#include <stddef.h>
#include <stdint.h>

#if defined(MFE_BUILDING_LIBRARY)
#define MFE_API __attribute__((visibility("default")))
#else
#define MFE_API
#endif

#ifdef __cplusplus
extern "C" {
#endif

typedef enum mfe_status {
  MFE_OK = 0,
  MFE_ERR_PARAM = 1,
  MFE_ERR_DOMAIN = 2,
  MFE_ERR_CONFIG = 3,
  MFE_ERR_UNCONVERGED = 4, /* result handle is still returned */
  MFE_ERR_IO = 5,
  MFE_ERR_INTERNAL = 6
} mfe_status;

typedef struct mfe_model mfe_model;
typedef struct mfe_solution mfe_solution;

MFE_API const char* mfe_last_error(void);
MFE_API const char* mfe_version(void);

/* ---- run configuration ---- */

typedef struct mfe_run_settings {
  int resolution;
  double epsilon;
  size_t max_iterations;
  size_t max_pi_iterations;
  size_t dual_iterations;
  int powers[4];
  int power_count;
  int refine_rounds;
  double share_step;
  int tau_max;
  double toy_cost;
  double toy_reservation;
  double toy_rationality;
  int threads;
  uint64_t seed;
  size_t gamma_count;
  char output[1024];
} mfe_run_settings;

/* Validates a whole JSON config (unknown keys rejected) and returns its
 * non-model settings. gammas may be NULL; at most gamma_cap values are copied. */
MFE_API mfe_status mfe_parse_settings(const char* json, mfe_run_settings* out, double* gammas, size_t gamma_cap);

/* ---- models ---- */

/* Builds the model described by the "model" section of a JSON config.
 * has_gamma != 0 overrides every switching cost of a pricing model. */
MFE_API mfe_status mfe_model_from_json(const char* json, int has_gamma, double gamma, mfe_model** out);
MFE_API mfe_status mfe_model_counterexample(double a0, int action_steps, mfe_model** out);
MFE_API void mfe_model_free(mfe_model* model);

typedef struct mfe_model_info {
  int clusters;
  int states;
  size_t actions;
  size_t action_dim;
  int primitivity_power;
  double reward_bound; /* max |theta| over grid actions */
} mfe_model_info;

MFE_API mfe_status mfe_model_get_info(const mfe_model* model, mfe_model_info* out);
MFE_API mfe_status mfe_model_action(const mfe_model* model, size_t action, double* out, size_t cap, size_t* len);

typedef struct mfe_assumption_report {
  int row_stochastic;
  int nonnegative;
  int primitive;
  int reward_bounded;
  int exhaustive;
  int power;
  double kappa_max;
  double observed_reward_bound;
  size_t violations;
} mfe_assumption_report;

/* power = 0 uses the model's declaration; reward_bound <= 0 skips that check. */
MFE_API mfe_status mfe_check_assumptions(const mfe_model* model, int power, double reward_bound,
                                         mfe_assumption_report* out);

/* ---- ergodic solvers ---- */

typedef struct mfe_rvi_options {
  double epsilon;
  size_t max_iterations;
  int threads;
} mfe_rvi_options;

typedef struct mfe_howard_options {
  size_t max_iterations;
  int threads;
} mfe_howard_options;

MFE_API void mfe_rvi_options_init(mfe_rvi_options* options);
MFE_API void mfe_howard_options_init(mfe_howard_options* options);

/* Solve on the grid of step 1/resolution. MFE_ERR_UNCONVERGED still sets *out. */
MFE_API mfe_status mfe_solve_rvi(const mfe_model* model, int resolution, const mfe_rvi_options* options,
                                 mfe_solution** out);
MFE_API mfe_status mfe_solve_howard(const mfe_model* model, int resolution, const mfe_howard_options* options,
                                    mfe_solution** out);
MFE_API void mfe_solution_free(mfe_solution* solution);

typedef struct mfe_solution_summary {
  double gain;
  double gain_min;
  double gain_max;
  double span;
  size_t iterations;
  size_t sweeps;
  size_t nodes;
  size_t arcs;
  size_t transition_bytes;
  size_t value_bytes;
  size_t materialized_bytes;
  int converged;
} mfe_solution_summary;

MFE_API mfe_status mfe_solution_get_summary(const mfe_solution* solution, mfe_solution_summary* out);
MFE_API mfe_status mfe_solution_bias(const mfe_solution* solution, double* out, size_t cap, size_t* len);
MFE_API mfe_status mfe_solution_policy(const mfe_solution* solution, uint32_t* out, size_t cap, size_t* len);
/* Node gains (policy iteration only; RVI returns the scalar gain per node). */
MFE_API mfe_status mfe_solution_node_gain(const mfe_solution* solution, double* out, size_t cap, size_t* len);
/* Coordinates of a grid node, cluster-major (K * N values). */
MFE_API mfe_status mfe_solution_node_point(const mfe_solution* solution, size_t node, double* out, size_t cap,
                                           size_t* len);
/* Nearest-neighbour successor of a node under the solution's policy. */
MFE_API mfe_status mfe_solution_successor(const mfe_solution* solution, size_t node, size_t* out);
/* Limit cycle of the policy's successor graph reached from `start`, and its
 * promotion period (cycle length / number of provider-share increases). */
MFE_API mfe_status mfe_solution_limit_cycle(const mfe_solution* solution, size_t start, size_t* nodes, size_t cap,
                                            size_t* len, double* promotion_period);
/* max over nodes of |B h - h - g| with the interpolating grid operator. */
MFE_API mfe_status mfe_solution_residual(const mfe_solution* solution, double* out);

/* ---- steady states and bounds ---- */

typedef struct mfe_steady_state {
  size_t action_index; /* best grid action */
  double gain;         /* after refinement */
  double grid_gain;    /* best over the grid */
} mfe_steady_state;

/* action/distribution buffers may be NULL. */
MFE_API mfe_status mfe_optimal_steady_state(const mfe_model* model, int refine_rounds, int threads,
                                            mfe_steady_state* out, double* action, size_t action_cap,
                                            double* distribution, size_t distribution_cap);
/* r(a, mu_bar(a)) for every grid action. */
MFE_API mfe_status mfe_steady_state_values(const mfe_model* model, int threads, double* out, size_t cap,
                                           size_t* len);
MFE_API mfe_status mfe_stationary_distribution(const mfe_model* model, size_t action, double* out, size_t cap,
                                               size_t* len);
/* MFE_ERR_PARAM unless the model is a pricing model with uniform switching costs. */
MFE_API mfe_status mfe_gain_upper_bound(const mfe_model* model, double* out);

typedef struct mfe_dual_result {
  double bound;
  double steady_gain;
  size_t iterations;
  int zero_gap;
  int diverged;
} mfe_dual_result;

MFE_API mfe_status mfe_dual_bound(const mfe_model* model, int resolution, int power, size_t max_iterations,
                                  int threads, mfe_dual_result* out);

/* ---- one-offer toy model and cycles ---- */

typedef struct mfe_toy {
  double cost;
  double reservation;
  double rationality;
  double switching;
} mfe_toy;

typedef struct mfe_cycle_row {
  double gamma;
  double s;
  double S;
  int tau;
  double gain;
  double amplitude;
  double steady_gain;
} mfe_cycle_row;

MFE_API mfe_status mfe_toy_price(const mfe_toy* toy, double mu_prev, double mu_next, double* price);
/* rows must hold n entries; the toy's switching cost is replaced by gammas[i]. */
MFE_API mfe_status mfe_cycle_scan(const mfe_toy* toy, const double* gammas, size_t n, double share_step,
                                  int tau_max, int threads, mfe_cycle_row* rows);
/* *found = 0 when no row exceeds the threshold. */
MFE_API mfe_status mfe_cycle_kink(const mfe_cycle_row* rows, size_t n, double threshold, int* found,
                                  double* gamma);

/* ---- three-state example ---- */

MFE_API mfe_status mfe_example_coefficients(double a, double* gain, double* alpha, double* beta);
MFE_API mfe_status mfe_example_eigenvector(double a0, double lambda, double mu1, double mu3, double* value);
/* Residual of (v^lambda, g*) with exact continuation on lattice points of
 * step 1/resolution inside the invariant region. */
MFE_API mfe_status mfe_example_residual(double a0, double lambda, int resolution, double* residual,
                                        size_t* points);

#ifdef __cplusplus
}
#endif

#endif /* MFE_MFE_H */
