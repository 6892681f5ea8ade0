#pragma once

#include <cstdint>
#include <vector>

#include "icic/dpt.hpp"
#include "icic/netsim.hpp"
#include "icic/tensor.hpp"

namespace icic {

// Time-domain muting on a checkerboard 2-coloring of the SBS grid. `duty`
// is the fraction of the frame each SBS blanks.
struct AbsConfig {
  double duty = 0.5;
};

// Constant maximum transmit power everywhere (the no-coordination
// reference).
PowerAllocation max_power_policy(int num_sbs, int frame_len, double p_max);

// Checkerboard groups alternate subframes: group A mutes odd subframes,
// group B even ones. A general duty blanks the first ceil(duty*L) slots of
// each group's muting-phase sequence (saturating at the phase length).
PowerAllocation abs_policy(const Topology& top, const AbsConfig& cfg,
                           int frame_len);

// Grid color of an SBS index under the row-major grid layout.
int checkerboard_group(int sbs_index, int grid_side);

struct DdpgConfig {
  int hidden1 = 64;          // first critic hidden width
  int hidden2 = 32;          // second critic hidden width
  double actor_lr = 0.05;
  double critic_lr = 0.01;
  double noise_scale = 0.05;   // uniform action noise, fraction of p_max
  int max_iters = 200;
  int filters = 8;             // actor F
  double gamma = 0.5;          // reward coefficient, shared convention
  double kappa = 0.0;          // <= 0: calibrate at iteration 0
  double critic_init_scale = 1.0;  // 0 gives an all-zero critic
};

// Dense scalar-output value net over the flattened (state, action) pair.
struct CriticWeights {
  Mat w1;                   // hidden1 x input_dim
  std::vector<double> b1;   // hidden1
  Mat w2;                   // hidden2 x hidden1
  std::vector<double> b2;   // hidden2
  std::vector<double> w3;   // hidden2
  double b3 = 0.0;

  std::size_t input_dim() const { return w1.cols(); }
};

struct CriticTrace {
  std::vector<double> x;
  std::vector<double> a1;  // tanh activations, hidden1
  std::vector<double> a2;  // tanh activations, hidden2
  double q = 0.0;
};

struct CriticGradients {
  Mat w1;
  std::vector<double> b1;
  Mat w2;
  std::vector<double> b2;
  std::vector<double> w3;
  double b3 = 0.0;
};

CriticWeights critic_init(int input_dim, int hidden1, int hidden2,
                          std::uint64_t seed, double scale = 1.0);

CriticTrace critic_forward(const CriticWeights& cw,
                           const std::vector<double>& x);

// Backpropagates dLoss/dq through the critic; fills the weight gradients
// and, when dx is non-null, the gradient with respect to the input vector.
CriticGradients critic_backward(const CriticWeights& cw,
                                const CriticTrace& trace, double dq,
                                std::vector<double>* dx = nullptr);

void critic_apply(CriticWeights& cw, const CriticGradients& g, double lr);

// One squared-error step toward `target`; returns the pre-update
// prediction.
double critic_sgd_step(CriticWeights& cw, const std::vector<double>& x,
                       double target, double lr);

// Online actor-critic loop with the same history schema as the policy
// learner: the critic regresses observed rewards of noise-perturbed
// actions (discount 0, no replay, no target network) and the actor follows
// the critic's action gradient. History rows log the noiseless policy.
TrainResult ddpg_train(const Topology& top, const DdpgConfig& cfg,
                       std::uint64_t seed);

}  // namespace icic
