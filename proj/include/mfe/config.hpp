#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "mfe/model.hpp"

namespace mfe {

struct RawModelSpec {
  int states = 0;
  std::vector<double> weights;
  std::vector<Action> actions;
  std::vector<std::vector<Matrix>> transitions;              // [cluster][action]
  std::vector<std::vector<std::vector<double>>> rewards;     // [cluster][action]
  int primitivity_power = 1;
};

struct ModelSpec {
  enum class Kind { pricing, counterexample, raw };
  Kind kind = Kind::counterexample;
  PricingParams pricing;
  double a0 = 0.25;
  int action_steps = 11;
  RawModelSpec raw;
};

struct ToySpec {
  double cost = 2.0;
  double reservation = 3.0;
  double rationality = 3.0;
};

/// Validated run configuration. Parsing rejects unknown keys.
struct RunConfig {
  int version = 1;
  ModelSpec model;
  int resolution = 50;

  double epsilon = 1e-5;
  std::size_t max_iterations = 1000000;
  std::size_t max_pi_iterations = 1000;
  std::size_t dual_iterations = 2000;
  std::vector<int> powers{1, 2, 3, 4};
  int refine_rounds = 3;

  std::vector<double> gammas;  // switching-cost scan
  ToySpec toy;
  double share_step = 0.01;
  int tau_max = 20;

  int threads = 0;
  std::uint64_t seed = 1;
  std::string output;  // empty: stdout
};

/// Throws ConfigError naming the offending key (or the parse position).
RunConfig parse_config(const std::string& json_text);
RunConfig load_config(const std::string& path);

/// Builds the model; for pricing models a gamma override sets every
/// switching cost.
MeanFieldModel build_model(const ModelSpec& spec, std::optional<double> gamma = std::nullopt);

PricingParams with_switching(PricingParams params, double gamma);

}  // namespace mfe
