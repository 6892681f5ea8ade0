#pragma once

#include <optional>
#include <vector>

#include "icic/actor.hpp"
#include "icic/netsim.hpp"
#include "icic/observation.hpp"
#include "icic/tensor.hpp"

namespace icic {

struct LearnerConfig {
  double lr = 0.1;
  double gamma = 0.5;        // reward coefficient
  double kappa = 0.0;        // <= 0: calibrate at iteration 0 so kappa*eta = 1
  int filters = 8;           // F
  int max_iters = 200;
  int stop_window = 10;      // iterations between compared cost samples
  double stop_rel_tol = 1e-4;  // 0 disables the windowed stop rule
  std::optional<double> eps;   // optional raw stop rule: stop once C <= eps
  bool fd_check = false;     // use finite differences instead of grad_ee
};

// Cost gradients for the three weight tensors.
struct GradientSet {
  Tensor3 g1;  // M x F x L
  Tensor3 g2;  // M x F x L
  Tensor3 g3;  // M x M x L
};

struct IterationRecord {
  int iteration = 0;
  double eta = 0.0;
  double reward = 0.0;
  double cost = 0.0;
  double throughput = 0.0;
  double total_power_w = 0.0;
  int violations = 0;
  double grad_norm = 0.0;
  PowerAllocation alloc;  // the allocation this record was measured on
};

struct TrainHistory {
  std::vector<IterationRecord> records;
  double kappa = 0.0;  // the scaling actually used
};

struct TrainResult {
  ActorWeights weights;  // the weights that produced the last record
  TrainHistory history;
};

// r = gamma * exp(kappa * eta). Throws std::overflow_error once the scaled
// exponent exceeds 500, which signals a miscalibrated kappa.
double reward(double eta, double gamma, double kappa);

double cost(double r);

// Output-layer error: dC/dH3o * sigmoid'(H3i), with dC/dH3o obtained from
// the chain through r = gamma*exp(kappa*eta) and P = p_max * H3o.
Mat output_error(const ForwardTrace& trace, const Mat& grad_eta, double eta,
                 const LearnerConfig& cfg, double p_max);

// Propagates the output error through the remaining layers and forms the
// cost gradient of every weight. Throws std::invalid_argument on shape
// mismatch.
GradientSet backward(const ForwardTrace& trace, const ActorWeights& w,
                     const Mat& delta3);

// w' = w - lr * g, tensor by tensor.
ActorWeights apply_update(ActorWeights w, const GradientSet& g, double lr);

double gradient_norm(const GradientSet& g);

// Observe once, then iterate forward / evaluate / reward / backprop /
// update until a stop rule fires or max_iters records exist. The returned
// weights are exactly those that produced the final history record.
TrainResult train(const Topology& top, const LearnerConfig& cfg,
                  ActorWeights w0);

}  // namespace icic
