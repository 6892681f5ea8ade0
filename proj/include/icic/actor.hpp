#pragma once

#include <cstdint>
#include <utility>

#include "icic/netsim.hpp"
#include "icic/tensor.hpp"

namespace icic {

// Deterministic policy network. It is split lengthwise into L structurally
// identical drawers sharing one input; drawer l produces the power column
// for subframe l through three weighted sums, each followed by a sigmoid:
//   single-feature stage  h1: M x F x L   (per-filter row scan of the state)
//   global stage          h2: M x F x L   (per-SBS combination of filters)
//   output stage          h3: M x M x L   (cross-SBS partial full-connection)
struct ActorWeights {
  int num_sbs = 0;    // M
  int filters = 0;    // F
  int frame_len = 0;  // L
  Tensor3 h1;         // M x F x L
  Tensor3 h2;         // M x F x L
  Tensor3 h3;         // M x M x L
};

// Every pre-activation and activation of one forward pass, kept for the
// backward pass.
struct ForwardTrace {
  Tensor3 h1_in, h1_out;  // M x F x L
  Mat h2_in, h2_out;      // M x L
  Mat h3_in, h3_out;      // M x L
  Mat input;              // the normalized M x M state that was fed in
};

// Uniform init on (-1/sqrt(fan_in), +1/sqrt(fan_in)), fan_in = M for h1 and
// h3, F for h2. Reproducible for a given seed.
ActorWeights init_weights(int num_sbs, int filters, int frame_len,
                          std::uint64_t seed);

double sigmoid(double x);
// Derivative expressed through the activation value y = sigmoid(x).
double sigmoid_deriv(double y);

// Maps a normalized state to an allocation P = p_max * sigmoid(...), along
// with the trace. Throws std::invalid_argument on shape mismatch.
std::pair<PowerAllocation, ForwardTrace> forward(const Mat& s_norm,
                                                 const ActorWeights& w,
                                                 double p_max);

}  // namespace icic
