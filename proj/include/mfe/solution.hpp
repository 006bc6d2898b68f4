#pragma once

#include <cstddef>
#include <cstdint>
#include <vector>

namespace mfe {

/// Approximate solution of the ergodic eigenproblem g 1 + h = B h on a grid.
struct ErgodicSolution {
  double gain = 0.0;      // reported scalar gain (reward per step)
  double gain_min = 0.0;  // RVI: min of h' - h; Howard: min node gain
  double gain_max = 0.0;
  std::vector<double> bias;            // min 0 for RVI, anchored per cycle for Howard
  std::vector<std::uint32_t> policy;   // action index per global node
  std::vector<double> node_gain;       // Howard only
  std::size_t iterations = 0;          // RVI steps or policy-iteration rounds
  std::size_t sweeps = 0;              // Bellman-sweep equivalents (|nodes| x |A| arcs each)
  double span = 0.0;                   // RVI: final Span(h' - h)
  bool converged = false;

  std::size_t nodes = 0;
  std::size_t arcs = 0;                // nodes x |A|
  std::size_t transition_bytes = 0;    // accounted transition data
  std::size_t value_bytes = 0;         // accounted per-node arrays
  std::size_t materialized_bytes = 0;  // size of a full global successor table
};

}  // namespace mfe
