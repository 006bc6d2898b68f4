#include "mfe/config.hpp"

#include <fstream>
#include <initializer_list>
#include <sstream>

#include <json.hpp>

#include "mfe/errors.hpp"

namespace mfe {

namespace {

using nlohmann::json;

void allow_keys(const json& obj, const std::string& where, std::initializer_list<const char*> keys) {
  if (!obj.is_object()) throw ConfigError(where + ": expected an object");
  for (const auto& item : obj.items()) {
    bool known = false;
    for (const char* k : keys) known = known || item.key() == k;
    if (!known) throw ConfigError("unknown key '" + (where.empty() ? "" : where + ".") + item.key() + "'");
  }
}

template <class T>
T get(const json& obj, const std::string& where, const char* key) {
  if (!obj.contains(key)) throw ConfigError("missing key '" + where + "." + key + "'");
  try {
    return obj.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + where + "." + key + "': " + e.what());
  }
}

template <class T>
void get_opt(const json& obj, const std::string& where, const char* key, T& out) {
  if (obj.contains(key)) out = get<T>(obj, where, key);
}

PricingParams parse_pricing(const json& m) {
  allow_keys(m, "model", {"type", "clusters", "beta", "price_min", "price_max", "price_steps"});
  PricingParams p;
  p.rationality = get<double>(m, "model", "beta");
  p.price_min = get<std::vector<double>>(m, "model", "price_min");
  p.price_max = get<std::vector<double>>(m, "model", "price_max");
  p.price_steps = get<int>(m, "model", "price_steps");
  const auto& clusters = m.at("clusters");
  if (!clusters.is_array() || clusters.empty()) throw ConfigError("'model.clusters' must be a non-empty array");
  for (std::size_t k = 0; k < clusters.size(); ++k) {
    const std::string where = "model.clusters[" + std::to_string(k) + "]";
    const auto& c = clusters[k];
    allow_keys(c, where, {"rho", "R", "E", "C", "gamma"});
    PricingCluster pc;
    pc.weight = clusters.size() == 1 ? 1.0 : get<double>(c, where, "rho");
    get_opt(c, where, "rho", pc.weight);
    pc.reservation = get<std::vector<double>>(c, where, "R");
    pc.consumption = get<std::vector<double>>(c, where, "E");
    pc.cost = get<std::vector<double>>(c, where, "C");
    if (c.contains("gamma") && c.at("gamma").is_number()) {
      pc.switching.assign(pc.reservation.size() + 1, c.at("gamma").get<double>());
    } else {
      pc.switching = get<std::vector<double>>(c, where, "gamma");
    }
    p.clusters.push_back(std::move(pc));
  }
  try {
    p.validate();
  } catch (const ParameterError& e) {
    throw ConfigError(std::string("model: ") + e.what());
  }
  return p;
}

RawModelSpec parse_raw(const json& m) {
  allow_keys(m, "model", {"type", "states", "weights", "actions", "transitions", "rewards", "primitivity_power"});
  RawModelSpec r;
  r.states = get<int>(m, "model", "states");
  r.weights = get<std::vector<double>>(m, "model", "weights");
  r.actions = get<std::vector<Action>>(m, "model", "actions");
  get_opt(m, "model", "primitivity_power", r.primitivity_power);
  const auto mats = get<std::vector<std::vector<std::vector<std::vector<double>>>>>(m, "model", "transitions");
  for (const auto& cluster : mats) {
    std::vector<Matrix> row;
    for (const auto& mat : cluster) {
      std::vector<double> flat;
      for (const auto& line : mat) {
        if (line.size() != static_cast<std::size_t>(r.states))
          throw ConfigError("'model.transitions': every matrix row needs 'states' entries");
        flat.insert(flat.end(), line.begin(), line.end());
      }
      if (mat.size() != static_cast<std::size_t>(r.states))
        throw ConfigError("'model.transitions': every matrix needs 'states' rows");
      row.emplace_back(r.states, r.states, std::move(flat));
    }
    r.transitions.push_back(std::move(row));
  }
  r.rewards = get<std::vector<std::vector<std::vector<double>>>>(m, "model", "rewards");
  return r;
}

}  // namespace

RunConfig parse_config(const std::string& text) {
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  allow_keys(doc, "", {"version", "model", "grid", "solver", "scan", "toy", "threads", "seed", "output"});
  RunConfig cfg;
  get_opt(doc, "", "version", cfg.version);
  if (cfg.version != 1) throw ConfigError("unsupported config version " + std::to_string(cfg.version));

  if (doc.contains("model")) {
    const auto& m = doc.at("model");
    if (!m.is_object()) throw ConfigError("'model' must be an object");
    const std::string type = get<std::string>(m, "model", "type");
    if (type == "pricing") {
      cfg.model.kind = ModelSpec::Kind::pricing;
      cfg.model.pricing = parse_pricing(m);
    } else if (type == "counterexample") {
      allow_keys(m, "model", {"type", "a0", "action_steps"});
      cfg.model.kind = ModelSpec::Kind::counterexample;
      get_opt(m, "model", "a0", cfg.model.a0);
      get_opt(m, "model", "action_steps", cfg.model.action_steps);
      if (!(cfg.model.a0 > 0.0 && cfg.model.a0 < 0.5)) throw ConfigError("'model.a0' must lie in (0, 1/2)");
      if (cfg.model.action_steps < 2) throw ConfigError("'model.action_steps' must be >= 2");
    } else if (type == "raw") {
      cfg.model.kind = ModelSpec::Kind::raw;
      cfg.model.raw = parse_raw(m);
    } else {
      throw ConfigError("unknown model type '" + type + "'");
    }
  }
  if (doc.contains("grid")) {
    const auto& g = doc.at("grid");
    allow_keys(g, "grid", {"resolution"});
    get_opt(g, "grid", "resolution", cfg.resolution);
    if (cfg.resolution < 1) throw ConfigError("'grid.resolution' must be >= 1");
  }
  if (doc.contains("solver")) {
    const auto& s = doc.at("solver");
    allow_keys(s, "solver", {"epsilon", "max_iterations", "max_pi_iterations", "dual_iterations", "powers",
                             "refine_rounds"});
    get_opt(s, "solver", "epsilon", cfg.epsilon);
    get_opt(s, "solver", "max_iterations", cfg.max_iterations);
    get_opt(s, "solver", "max_pi_iterations", cfg.max_pi_iterations);
    get_opt(s, "solver", "dual_iterations", cfg.dual_iterations);
    get_opt(s, "solver", "powers", cfg.powers);
    get_opt(s, "solver", "refine_rounds", cfg.refine_rounds);
    if (!(cfg.epsilon > 0.0)) throw ConfigError("'solver.epsilon' must be > 0");
    for (int p : cfg.powers)
      if (p < 1 || p > 4) throw ConfigError("'solver.powers' entries must be 1..4");
  }
  if (doc.contains("scan")) {
    const auto& s = doc.at("scan");
    allow_keys(s, "scan", {"gamma", "share_step", "tau_max"});
    get_opt(s, "scan", "gamma", cfg.gammas);
    get_opt(s, "scan", "share_step", cfg.share_step);
    get_opt(s, "scan", "tau_max", cfg.tau_max);
    for (double g : cfg.gammas)
      if (!(g >= 0.0)) throw ConfigError("'scan.gamma' entries must be >= 0");
  }
  if (doc.contains("toy")) {
    const auto& t = doc.at("toy");
    allow_keys(t, "toy", {"C", "R", "beta"});
    get_opt(t, "toy", "C", cfg.toy.cost);
    get_opt(t, "toy", "R", cfg.toy.reservation);
    get_opt(t, "toy", "beta", cfg.toy.rationality);
  }
  get_opt(doc, "", "threads", cfg.threads);
  get_opt(doc, "", "seed", cfg.seed);
  get_opt(doc, "", "output", cfg.output);
  return cfg;
}

RunConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

PricingParams with_switching(PricingParams params, double gamma) {
  for (auto& c : params.clusters) std::fill(c.switching.begin(), c.switching.end(), gamma);
  return params;
}

MeanFieldModel build_model(const ModelSpec& spec, std::optional<double> gamma) {
  switch (spec.kind) {
    case ModelSpec::Kind::pricing:
      return pricing_model(gamma ? with_switching(spec.pricing, *gamma) : spec.pricing);
    case ModelSpec::Kind::counterexample:
      return counterexample_model(spec.a0, spec.action_steps);
    case ModelSpec::Kind::raw: {
      const auto& r = spec.raw;
      return MeanFieldModel("raw", r.states, r.weights, r.actions, r.transitions, r.rewards, r.primitivity_power);
    }
  }
  throw ConfigError("unknown model kind");
}

}  // namespace mfe
