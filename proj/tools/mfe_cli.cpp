// Command-line front end; talks to the library through the C interface only.
#include <chrono>
#include <cstdio>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "mfe/mfe.h"

namespace {

constexpr int kExitOk = 0;
constexpr int kExitError = 1;
constexpr int kExitConfig = 2;
constexpr int kExitUnconverged = 3;

struct Failure : std::runtime_error {
  int code;
  Failure(int c, const std::string& msg) : std::runtime_error(msg), code(c) {}
};

void check(mfe_status s, const char* what) {
  if (s == MFE_OK) return;
  const std::string msg = std::string(what) + ": " + mfe_last_error();
  if (s == MFE_ERR_CONFIG) throw Failure(kExitConfig, msg);
  throw Failure(kExitError, msg);
}

struct ModelDeleter {
  void operator()(mfe_model* m) const { mfe_model_free(m); }
};
struct SolutionDeleter {
  void operator()(mfe_solution* s) const { mfe_solution_free(s); }
};
using ModelPtr = std::unique_ptr<mfe_model, ModelDeleter>;
using SolutionPtr = std::unique_ptr<mfe_solution, SolutionDeleter>;

struct Common {
  std::string config_path;
  std::string out;
  int threads = 0;
  int grid_res = 0;
  int action_res = 0;
  std::vector<double> gammas;
};

struct Loaded {
  std::string json;
  mfe_run_settings settings{};
  std::vector<double> gammas;
};

Loaded load(const Common& c, const char* fallback_model) {
  Loaded l;
  nlohmann::json doc;
  if (c.config_path.empty()) {
    doc = nlohmann::json::parse(fallback_model);
  } else {
    std::ifstream in(c.config_path);
    if (!in) throw Failure(kExitConfig, "cannot open config file '" + c.config_path + "'");
    std::stringstream buf;
    buf << in.rdbuf();
    try {
      doc = nlohmann::json::parse(buf.str());
    } catch (const nlohmann::json::parse_error& e) {
      throw Failure(kExitConfig, std::string(c.config_path) + ": " + e.what());
    }
  }
  if (c.action_res > 0 && doc.contains("model") && doc["model"].is_object()) {
    auto& m = doc["model"];
    const auto type = m.value("type", std::string());
    if (type == "pricing") m["price_steps"] = c.action_res;
    else if (type == "counterexample") m["action_steps"] = c.action_res;
  }
  l.json = doc.dump();
  check(mfe_parse_settings(l.json.c_str(), &l.settings, nullptr, 0), "config");
  l.gammas.resize(l.settings.gamma_count);
  check(mfe_parse_settings(l.json.c_str(), &l.settings, l.gammas.data(), l.gammas.size()), "config");
  if (!c.gammas.empty()) l.gammas = c.gammas;
  if (c.threads > 0) l.settings.threads = c.threads;
  if (c.grid_res > 0) l.settings.resolution = c.grid_res;
  return l;
}

ModelPtr make_model(const Loaded& l, std::optional<double> gamma) {
  mfe_model* m = nullptr;
  check(mfe_model_from_json(l.json.c_str(), gamma ? 1 : 0, gamma.value_or(0.0), &m), "model");
  return ModelPtr(m);
}

class Output {
 public:
  explicit Output(const std::string& path) {
    if (!path.empty()) {
      file_.open(path);
      if (!file_) throw Failure(kExitError, "cannot write '" + path + "'");
    }
  }
  std::ostream& os() { return file_.is_open() ? file_ : std::cout; }

 private:
  std::ofstream file_;
};

std::optional<double> first_gamma(const Common& c) {
  if (c.gammas.empty()) return std::nullopt;
  return c.gammas.front();
}

std::string out_path(const Common& c, const Loaded& l) { return c.out.empty() ? std::string(l.settings.output) : c.out; }

void write_point(std::ostream& os, const mfe_solution* sol, std::size_t node) {
  std::size_t len = 0;
  mfe_solution_node_point(sol, node, nullptr, 0, &len);
  std::vector<double> p(len);
  check(mfe_solution_node_point(sol, node, p.data(), p.size(), &len), "node point");
  for (double v : p) os << v << ',';
}

std::vector<double> bias_of(const mfe_solution* sol) {
  std::size_t len = 0;
  mfe_solution_bias(sol, nullptr, 0, &len);
  std::vector<double> out(len);
  check(mfe_solution_bias(sol, out.data(), out.size(), &len), "bias");
  return out;
}

constexpr const char* kCounterexample = R"({"version":1,"model":{"type":"counterexample","a0":0.25}})";

int cmd_solve_rvi(const Common& c, double eps, std::size_t max_iter, const std::string& dump) {
  const auto l = load(c, kCounterexample);
  auto model = make_model(l, first_gamma(c));
  mfe_rvi_options opt;
  mfe_rvi_options_init(&opt);
  opt.epsilon = eps > 0 ? eps : l.settings.epsilon;
  opt.max_iterations = max_iter > 0 ? max_iter : l.settings.max_iterations;
  opt.threads = l.settings.threads;
  mfe_solution* raw = nullptr;
  const mfe_status st = mfe_solve_rvi(model.get(), l.settings.resolution, &opt, &raw);
  if (st != MFE_OK && st != MFE_ERR_UNCONVERGED) check(st, "solve-rvi");
  SolutionPtr sol(raw);
  mfe_solution_summary s;
  mfe_solution_get_summary(sol.get(), &s);
  Output out(out_path(c, l));
  out.os().precision(10);
  out.os() << "gain,gain_min,gain_max,span,iterations,converged,nodes\n"
           << s.gain << ',' << s.gain_min << ',' << s.gain_max << ',' << s.span << ',' << s.iterations << ','
           << s.converged << ',' << s.nodes << '\n';
  if (!dump.empty()) {
    Output d(dump);
    d.os().precision(12);
    const auto bias = bias_of(sol.get());
    d.os() << "node,coordinates...,bias\n";
    for (std::size_t i = 0; i < bias.size(); ++i) {
      d.os() << i << ',';
      write_point(d.os(), sol.get(), i);
      d.os() << bias[i] << '\n';
    }
  }
  if (!s.converged) {
    std::cerr << "solve-rvi: not converged (span " << s.span << ")\n";
    return kExitUnconverged;
  }
  return kExitOk;
}

int cmd_solve_pi(const Common& c, std::size_t max_iter, const std::string& dump, long start) {
  const auto l = load(c, kCounterexample);
  auto model = make_model(l, first_gamma(c));
  mfe_howard_options opt;
  mfe_howard_options_init(&opt);
  opt.max_iterations = max_iter > 0 ? max_iter : l.settings.max_pi_iterations;
  opt.threads = l.settings.threads;
  mfe_solution* raw = nullptr;
  const mfe_status st = mfe_solve_howard(model.get(), l.settings.resolution, &opt, &raw);
  if (st != MFE_OK && st != MFE_ERR_UNCONVERGED) check(st, "solve-pi");
  SolutionPtr sol(raw);
  mfe_solution_summary s;
  mfe_solution_get_summary(sol.get(), &s);
  const std::size_t from = start >= 0 ? static_cast<std::size_t>(start) : s.nodes / 2;
  std::size_t cycle_len = 0;
  double period = 0.0;
  check(mfe_solution_limit_cycle(sol.get(), from, nullptr, 0, &cycle_len, &period), "limit cycle");
  Output out(out_path(c, l));
  out.os().precision(10);
  out.os() << "gain,gain_min,gain_max,iterations,converged,nodes,arcs,cycle_length,promotion_period\n"
           << s.gain << ',' << s.gain_min << ',' << s.gain_max << ',' << s.iterations << ',' << s.converged << ','
           << s.nodes << ',' << s.arcs << ',' << cycle_len << ',' << period << '\n';
  if (!dump.empty()) {
    Output d(dump);
    d.os().precision(12);
    const auto bias = bias_of(sol.get());
    std::vector<uint32_t> policy(s.nodes);
    std::vector<double> gain(s.nodes);
    std::size_t len = 0;
    check(mfe_solution_policy(sol.get(), policy.data(), policy.size(), &len), "policy");
    check(mfe_solution_node_gain(sol.get(), gain.data(), gain.size(), &len), "node gain");
    d.os() << "node,coordinates...,action,successor,gain,bias\n";
    for (std::size_t i = 0; i < s.nodes; ++i) {
      std::size_t next = 0;
      mfe_solution_successor(sol.get(), i, &next);
      d.os() << i << ',';
      write_point(d.os(), sol.get(), i);
      d.os() << policy[i] << ',' << next << ',' << gain[i] << ',' << bias[i] << '\n';
    }
  }
  if (!s.converged) {
    std::cerr << "solve-pi: iteration cap reached\n";
    return kExitUnconverged;
  }
  return kExitOk;
}

int cmd_steady_state(const Common& c) {
  const auto l = load(c, kCounterexample);
  auto model = make_model(l, first_gamma(c));
  mfe_model_info info;
  check(mfe_model_get_info(model.get(), &info), "model");
  std::vector<double> values(info.actions);
  std::size_t len = 0;
  check(mfe_steady_state_values(model.get(), l.settings.threads, values.data(), values.size(), &len), "steady state");
  Output out(out_path(c, l));
  auto& os = out.os();
  os.precision(10);
  for (std::size_t j = 0; j < info.action_dim; ++j) os << "a" << j << ',';
  os << "gain";
  for (int k = 0; k < info.clusters; ++k)
    for (int n = 0; n < info.states; ++n) os << ",mu" << k << '_' << n;
  os << '\n';
  std::vector<double> action(info.action_dim);
  std::vector<double> mu(static_cast<std::size_t>(info.clusters * info.states));
  for (std::size_t a = 0; a < info.actions; ++a) {
    check(mfe_model_action(model.get(), a, action.data(), action.size(), &len), "action");
    check(mfe_stationary_distribution(model.get(), a, mu.data(), mu.size(), &len), "stationary distribution");
    for (double v : action) os << v << ',';
    os << values[a];
    for (double v : mu) os << ',' << v;
    os << '\n';
  }
  mfe_steady_state best;
  check(mfe_optimal_steady_state(model.get(), l.settings.refine_rounds, l.settings.threads, &best, action.data(),
                                 action.size(), nullptr, 0),
        "steady state");
  std::cerr.precision(10);
  std::cerr << "best grid action " << best.action_index << " gain " << best.grid_gain << "; refined gain "
            << best.gain << " at";
  for (double v : action) std::cerr << ' ' << v;
  double bound = 0.0;
  if (mfe_gain_upper_bound(model.get(), &bound) == MFE_OK) std::cerr << "; gamma-free bound " << bound;
  std::cerr << '\n';
  return kExitOk;
}

int cmd_dual_bound(const Common& c, bool with_solver) {
  const auto l = load(c, kCounterexample);
  std::vector<std::optional<double>> gammas;
  for (double g : l.gammas) gammas.emplace_back(g);
  if (gammas.empty()) gammas.emplace_back(std::nullopt);
  Output out(out_path(c, l));
  auto& os = out.os();
  os.precision(10);
  os << "gamma,g_bar";
  for (int i = 0; i < l.settings.power_count; ++i) os << ",g_phi" << l.settings.powers[i];
  if (with_solver) os << ",g_howard";
  os << '\n';
  int code = kExitOk;
  for (const auto& g : gammas) {
    auto model = make_model(l, g);
    if (g) os << *g;
    bool first = true;
    for (int i = 0; i < l.settings.power_count; ++i) {
      mfe_dual_result r;
      check(mfe_dual_bound(model.get(), l.settings.resolution, l.settings.powers[i], l.settings.dual_iterations,
                           l.settings.threads, &r),
            "dual bound");
      if (first) os << ',' << r.steady_gain;
      first = false;
      os << ',' << r.bound;
    }
    if (with_solver) {
      mfe_howard_options opt;
      mfe_howard_options_init(&opt);
      opt.max_iterations = l.settings.max_pi_iterations;
      opt.threads = l.settings.threads;
      mfe_solution* raw = nullptr;
      const mfe_status st = mfe_solve_howard(model.get(), l.settings.resolution, &opt, &raw);
      if (st != MFE_OK && st != MFE_ERR_UNCONVERGED) check(st, "solve-pi");
      if (st == MFE_ERR_UNCONVERGED) code = kExitUnconverged;
      SolutionPtr sol(raw);
      mfe_solution_summary s;
      mfe_solution_get_summary(sol.get(), &s);
      os << ',' << s.gain;
    }
    os << '\n';
  }
  return code;
}

int cmd_cycle_scan(const Common& c) {
  const auto l = load(c, R"({"version":1})");
  std::vector<double> gammas = l.gammas;
  if (gammas.empty())
    for (int i = 0; i <= 100; ++i) gammas.push_back(i * 0.01);
  const mfe_toy toy{l.settings.toy_cost, l.settings.toy_reservation, l.settings.toy_rationality, 0.0};
  std::vector<mfe_cycle_row> rows(gammas.size());
  check(mfe_cycle_scan(&toy, gammas.data(), gammas.size(), l.settings.share_step, l.settings.tau_max,
                       l.settings.threads, rows.data()),
        "cycle scan");
  Output out(out_path(c, l));
  auto& os = out.os();
  os.precision(10);
  os << "gamma,best_gain,amplitude,tau,s,S,steady_gain\n";
  for (const auto& r : rows)
    os << r.gamma << ',' << r.gain << ',' << r.amplitude << ',' << r.tau << ',' << r.s << ',' << r.S << ','
       << r.steady_gain << '\n';
  int found = 0;
  double kink = 0.0;
  check(mfe_cycle_kink(rows.data(), rows.size(), l.settings.share_step * (1.0 + 1e-9), &found, &kink), "kink");
  if (found) std::cerr << "kink at gamma = " << kink << '\n';
  else std::cerr << "no kink in the scanned range\n";
  return kExitOk;
}

int cmd_verify_example(const Common& c, double a0, const std::vector<double>& lambdas, int sample_res,
                       const std::string& dump) {
  Output out(c.out);
  auto& os = out.os();
  os.precision(10);
  double g = 0, alpha = 0, beta = 0;
  check(mfe_example_coefficients(a0, &g, &alpha, &beta), "coefficients");
  os << "lambda,gain,residual,points\n";
  for (double lam : lambdas) {
    double res = 0.0;
    std::size_t pts = 0;
    check(mfe_example_residual(a0, lam, sample_res, &res, &pts), "residual");
    os << lam << ',' << g << ',' << res << ',' << pts << '\n';
  }
  if (!dump.empty()) {
    Output d(dump);
    d.os().precision(12);
    d.os() << "lambda,mu1,mu3,value\n";
    for (double lam : lambdas)
      for (int i = 0; i <= sample_res; ++i)
        for (int j = 0; i + j <= sample_res; ++j) {
          const double x = static_cast<double>(i) / sample_res;
          const double y = static_cast<double>(j) / sample_res;
          double v = 0.0;
          check(mfe_example_eigenvector(a0, lam, x, y, &v), "eigenvector");
          d.os() << lam << ',' << x << ',' << y << ',' << v << '\n';
        }
  }
  return kExitOk;
}

int cmd_bench(const Common& c, double eps) {
  const auto l = load(c, kCounterexample);
  auto model = make_model(l, first_gamma(c));
  Output out(out_path(c, l));
  auto& os = out.os();
  os.precision(10);
  os << "solver,nodes,arcs,wall_seconds,transition_bytes,value_bytes,materialized_bytes,sweeps,gain,converged\n";
  int code = kExitOk;
  for (const char* name : {"rvi", "howard"}) {
    mfe_solution* raw = nullptr;
    const auto t0 = std::chrono::steady_clock::now();
    mfe_status st;
    if (std::string(name) == "rvi") {
      mfe_rvi_options opt;
      mfe_rvi_options_init(&opt);
      opt.epsilon = eps > 0 ? eps : l.settings.epsilon;
      opt.max_iterations = l.settings.max_iterations;
      opt.threads = l.settings.threads;
      st = mfe_solve_rvi(model.get(), l.settings.resolution, &opt, &raw);
    } else {
      mfe_howard_options opt;
      mfe_howard_options_init(&opt);
      opt.max_iterations = l.settings.max_pi_iterations;
      opt.threads = l.settings.threads;
      st = mfe_solve_howard(model.get(), l.settings.resolution, &opt, &raw);
    }
    const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (st != MFE_OK && st != MFE_ERR_UNCONVERGED) check(st, name);
    if (st == MFE_ERR_UNCONVERGED) code = kExitUnconverged;
    SolutionPtr sol(raw);
    mfe_solution_summary s;
    mfe_solution_get_summary(sol.get(), &s);
    os << name << ',' << s.nodes << ',' << s.arcs << ',' << wall << ',' << s.transition_bytes << ','
       << s.value_bytes << ',' << s.materialized_bytes << ',' << s.sweeps << ',' << s.gain << ',' << s.converged
       << '\n';
  }
  return code;
}

void add_common(CLI::App* sub, Common& c, bool grid = true) {
  sub->add_option("--config", c.config_path, "JSON run configuration")->check(CLI::ExistingFile);
  sub->add_option("--out", c.out, "output CSV (default: config output or stdout)");
  sub->add_option("--threads", c.threads, "worker threads (default: MFE_THREADS or all cores)");
  sub->add_option("--gamma", c.gammas, "switching cost(s); single-model commands use the first")->delimiter(',');
  if (grid) {
    sub->add_option("--grid-res", c.grid_res, "state grid resolution D (step 1/D)");
    sub->add_option("--action-res", c.action_res, "grid points per action coordinate");
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Ergodic control of mean-field Markov decision processes"};
  app.require_subcommand(1);

  Common c;
  double eps = 0.0;
  std::size_t max_iter = 0;
  std::size_t max_pi = 0;
  std::string dump;
  long start = -1;
  bool with_solver = false;
  double a0 = 0.25;
  std::vector<double> lambdas{0.0, 0.5, 1.0};
  int sample_res = 200;

  auto* rvi = app.add_subcommand("solve-rvi", "relative value iteration with Mann damping");
  add_common(rvi, c);
  rvi->add_option("--eps", eps, "span tolerance");
  rvi->add_option("--max-iter", max_iter, "iteration cap");
  rvi->add_option("--dump-bias", dump, "CSV of node coordinates and bias");

  auto* pi = app.add_subcommand("solve-pi", "policy iteration on the nearest-neighbour grid");
  add_common(pi, c);
  pi->add_option("--max-pi-iters", max_pi, "policy iteration cap");
  pi->add_option("--dump-policy", dump, "CSV of node coordinates, action, successor, gain, bias");
  pi->add_option("--start-node", start, "node whose limit cycle is reported (default: middle node)");

  auto* ss = app.add_subcommand("steady-state", "stationary distributions and steady-state gains");
  add_common(ss, c);

  auto* dual = app.add_subcommand("dual-bound", "Lagrangian upper bounds over a switching-cost scan");
  add_common(dual, c);
  dual->add_flag("--with-solver", with_solver, "also report the policy-iteration gain");

  auto* cyc = app.add_subcommand("cycle-scan", "best (s,S,tau)-cycles of the one-offer model");
  add_common(cyc, c, false);

  auto* ver = app.add_subcommand("verify-example", "eigenpair residuals of the three-state example");
  ver->add_option("--out", c.out, "output CSV (default stdout)");
  ver->add_option("--a0", a0, "lower action, in (0, 1/2)");
  ver->add_option("--lambda", lambdas, "max-plus weights in [0, 1]")->delimiter(',');
  ver->add_option("--sample-res", sample_res, "lattice resolution of the residual sample");
  ver->add_option("--dump-grid", dump, "CSV of v^lambda on the lattice");

  auto* bench = app.add_subcommand("bench", "RVI versus policy iteration: time, memory, sweeps");
  add_common(bench, c);
  bench->add_option("--eps", eps, "RVI span tolerance");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (rvi->parsed()) return cmd_solve_rvi(c, eps, max_iter, dump);
    if (pi->parsed()) return cmd_solve_pi(c, max_pi, dump, start);
    if (ss->parsed()) return cmd_steady_state(c);
    if (dual->parsed()) return cmd_dual_bound(c, with_solver);
    if (cyc->parsed()) return cmd_cycle_scan(c);
    if (ver->parsed()) return cmd_verify_example(c, a0, lambdas, sample_res, dump);
    if (bench->parsed()) return cmd_bench(c, eps);
  } catch (const Failure& f) {
    std::cerr << "error: " << f.what() << '\n';
    return f.code;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitError;
  }
  return kExitError;
}
