#pragma once

#include <vector>

#include "icic/netsim.hpp"
#include "icic/tensor.hpp"

namespace icic {

// What one SBS reports to the controller: its own offered load at index m
// and the aggregate reference-signal power received from every other SBS.
struct PartialObservation {
  std::vector<double> rho;  // length M
};

struct StateMatrix {
  Mat raw;   // M x M, loads on the diagonal, interference elsewhere
  Mat norm;  // same shape, entries in [0, 1]; empty until normalized
};

struct NormalizeConfig {
  double load_ref = 1.0;     // bits/s mapped to a diagonal value of 1
  double dbm_floor = -120.0; // off-diagonal dBm mapped to 0
  double dbm_ceil = 0.0;     // off-diagonal dBm mapped to 1
};

// load_ref = (largest cell population) * rate requirement, so the most
// loaded cell normalizes to 1.
NormalizeConfig default_normalize_config(const Topology& top);

// rho[m] = sum of rate requirements in cell m; rho[k] = sum over cell m's
// users of max-power reference signal received from SBS k.
PartialObservation partial_observation(const Topology& top, int m);

// Row-stacks M partial observations. Throws std::invalid_argument on a
// dimension mismatch.
StateMatrix assemble_state(const std::vector<PartialObservation>& partials);

// Fills `norm`: off-diagonal watts go through an affine dBm rescale onto
// [0, 1] (exact zero stays 0), diagonal loads divide by load_ref; both
// clamped to [0, 1].
StateMatrix normalize_state(StateMatrix s, const NormalizeConfig& cfg);

// partial_observation for every SBS, assembled and normalized with the
// default reference.
StateMatrix observe(const Topology& top);

}  // namespace icic
