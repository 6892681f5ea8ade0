#include "icic/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <utility>

#include "icic/observation.hpp"

namespace icic {

PowerAllocation max_power_policy(int num_sbs, int frame_len, double p_max) {
  if (num_sbs < 1 || frame_len < 1) {
    throw std::invalid_argument("allocation dimensions must be >= 1");
  }
  return PowerAllocation{Mat(static_cast<std::size_t>(num_sbs),
                             static_cast<std::size_t>(frame_len), p_max)};
}

int checkerboard_group(int sbs_index, int grid_side) {
  const int i = sbs_index / grid_side;
  const int j = sbs_index % grid_side;
  return (i + j) % 2;
}

PowerAllocation abs_policy(const Topology& top, const AbsConfig& cfg,
                           int frame_len) {
  if (!(cfg.duty >= 0.0 && cfg.duty <= 1.0)) {
    throw std::invalid_argument("ABS duty must lie in [0, 1]");
  }
  const int m_count = top.num_sbs();
  const double p_max = top.cfg.max_power_w();
  PowerAllocation alloc = max_power_policy(m_count, frame_len, p_max);

  const int blank_target =
      static_cast<int>(std::ceil(cfg.duty * frame_len - 1e-12));
  for (int m = 0; m < m_count; ++m) {
    const int group = checkerboard_group(m, top.cfg.grid_side);
    // Group 0 mutes within the odd subframes, group 1 within the even ones.
    const int phase_start = group == 0 ? 1 : 0;
    int blanked = 0;
    for (int l = phase_start; l < frame_len && blanked < blank_target;
         l += 2) {
      alloc.p(m, l) = 0.0;
      ++blanked;
    }
  }
  return alloc;
}

CriticWeights critic_init(int input_dim, int hidden1, int hidden2,
                          std::uint64_t seed, double scale) {
  if (input_dim < 1 || hidden1 < 1 || hidden2 < 1) {
    throw std::invalid_argument("critic dimensions must be >= 1");
  }
  CriticWeights cw;
  cw.w1 = Mat(static_cast<std::size_t>(hidden1),
              static_cast<std::size_t>(input_dim));
  cw.b1.assign(static_cast<std::size_t>(hidden1), 0.0);
  cw.w2 = Mat(static_cast<std::size_t>(hidden2),
              static_cast<std::size_t>(hidden1));
  cw.b2.assign(static_cast<std::size_t>(hidden2), 0.0);
  cw.w3.assign(static_cast<std::size_t>(hidden2), 0.0);
  cw.b3 = 0.0;
  if (scale == 0.0) return cw;

  std::mt19937_64 rng(seed);
  auto fill = [&](std::vector<double>& dst, double fan_in) {
    std::uniform_real_distribution<double> dist(-scale / std::sqrt(fan_in),
                                                scale / std::sqrt(fan_in));
    for (double& v : dst) v = dist(rng);
  };
  fill(cw.w1.storage(), static_cast<double>(input_dim));
  fill(cw.w2.storage(), static_cast<double>(hidden1));
  fill(cw.w3, static_cast<double>(hidden1));
  return cw;
}

CriticTrace critic_forward(const CriticWeights& cw,
                           const std::vector<double>& x) {
  if (x.size() != cw.input_dim()) {
    throw std::invalid_argument("critic input size mismatch");
  }
  CriticTrace trace;
  trace.x = x;
  const std::size_t h1 = cw.w1.rows();
  const std::size_t h2 = cw.w2.rows();
  trace.a1.resize(h1);
  for (std::size_t i = 0; i < h1; ++i) {
    double acc = cw.b1[i];
    for (std::size_t j = 0; j < x.size(); ++j) acc += cw.w1(i, j) * x[j];
    trace.a1[i] = std::tanh(acc);
  }
  trace.a2.resize(h2);
  for (std::size_t i = 0; i < h2; ++i) {
    double acc = cw.b2[i];
    for (std::size_t j = 0; j < h1; ++j) acc += cw.w2(i, j) * trace.a1[j];
    trace.a2[i] = std::tanh(acc);
  }
  double q = cw.b3;
  for (std::size_t i = 0; i < h2; ++i) q += cw.w3[i] * trace.a2[i];
  trace.q = q;
  return trace;
}

CriticGradients critic_backward(const CriticWeights& cw,
                                const CriticTrace& trace, double dq,
                                std::vector<double>* dx) {
  const std::size_t h1 = cw.w1.rows();
  const std::size_t h2 = cw.w2.rows();
  const std::size_t din = cw.input_dim();

  CriticGradients g;
  g.b3 = dq;
  g.w3.resize(h2);
  std::vector<double> dz2(h2);
  for (std::size_t i = 0; i < h2; ++i) {
    g.w3[i] = dq * trace.a2[i];
    dz2[i] = dq * cw.w3[i] * (1.0 - trace.a2[i] * trace.a2[i]);
  }

  g.w2 = Mat(h2, h1);
  g.b2 = dz2;
  std::vector<double> dz1(h1, 0.0);
  for (std::size_t i = 0; i < h2; ++i) {
    for (std::size_t j = 0; j < h1; ++j) {
      g.w2(i, j) = dz2[i] * trace.a1[j];
      dz1[j] += dz2[i] * cw.w2(i, j);
    }
  }
  for (std::size_t j = 0; j < h1; ++j) {
    dz1[j] *= 1.0 - trace.a1[j] * trace.a1[j];
  }

  g.w1 = Mat(h1, din);
  g.b1 = dz1;
  for (std::size_t i = 0; i < h1; ++i) {
    for (std::size_t j = 0; j < din; ++j) {
      g.w1(i, j) = dz1[i] * trace.x[j];
    }
  }

  if (dx != nullptr) {
    dx->assign(din, 0.0);
    for (std::size_t i = 0; i < h1; ++i) {
      for (std::size_t j = 0; j < din; ++j) {
        (*dx)[j] += dz1[i] * cw.w1(i, j);
      }
    }
  }
  return g;
}

void critic_apply(CriticWeights& cw, const CriticGradients& g, double lr) {
  for (std::size_t i = 0; i < cw.w1.size(); ++i) {
    cw.w1.storage()[i] -= lr * g.w1.storage()[i];
  }
  for (std::size_t i = 0; i < cw.b1.size(); ++i) cw.b1[i] -= lr * g.b1[i];
  for (std::size_t i = 0; i < cw.w2.size(); ++i) {
    cw.w2.storage()[i] -= lr * g.w2.storage()[i];
  }
  for (std::size_t i = 0; i < cw.b2.size(); ++i) cw.b2[i] -= lr * g.b2[i];
  for (std::size_t i = 0; i < cw.w3.size(); ++i) cw.w3[i] -= lr * g.w3[i];
  cw.b3 -= lr * g.b3;
}

double critic_sgd_step(CriticWeights& cw, const std::vector<double>& x,
                       double target, double lr) {
  const CriticTrace trace = critic_forward(cw, x);
  const CriticGradients g = critic_backward(cw, trace, 2.0 * (trace.q - target));
  critic_apply(cw, g, lr);
  return trace.q;
}

namespace {

std::vector<double> critic_input(const Mat& s_norm,
                                 const PowerAllocation& alloc, double p_max) {
  std::vector<double> x;
  x.reserve(s_norm.size() + alloc.p.size());
  x.insert(x.end(), s_norm.storage().begin(), s_norm.storage().end());
  for (double v : alloc.p.storage()) x.push_back(v / p_max);
  return x;
}

}  // namespace

TrainResult ddpg_train(const Topology& top, const DdpgConfig& cfg,
                       std::uint64_t seed) {
  const int m_count = top.num_sbs();
  const int frame_len = top.cfg.frame_len;
  const double p_max = top.cfg.max_power_w();

  TrainResult result;
  result.weights = init_weights(m_count, cfg.filters, frame_len, seed);
  if (cfg.max_iters == 0) return result;

  const StateMatrix state = observe(top);
  const int input_dim = m_count * m_count + m_count * frame_len;
  CriticWeights critic =
      critic_init(input_dim, cfg.hidden1, cfg.hidden2,
                  seed ^ 0x51a2b3c4d5e6f708ULL, cfg.critic_init_scale);
  std::mt19937_64 noise_rng(seed ^ 0x0f1e2d3c4b5a6978ULL);
  std::uniform_real_distribution<double> noise(-cfg.noise_scale * p_max,
                                               cfg.noise_scale * p_max);

  double kappa = cfg.kappa;
  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    auto [alloc, trace] = forward(state.norm, result.weights, p_max);
    const FrameMetrics metrics = evaluate(top, alloc);
    if (iter == 0 && kappa <= 0.0) {
      kappa = metrics.eta > 0.0 ? 1.0 / metrics.eta : 1.0;
    }
    const double r = reward(metrics.eta, cfg.gamma, kappa);

    const bool last = iter + 1 >= cfg.max_iters;
    if (!last) {
      // Explore around the policy and fit the critic to the observed
      // reward of the executed action.
      PowerAllocation explored = alloc;
      for (double& v : explored.p.storage()) {
        v = std::clamp(v + noise(noise_rng), 0.0, p_max);
      }
      const double explored_reward =
          reward(evaluate(top, explored).eta, cfg.gamma, kappa);
      critic_sgd_step(critic, critic_input(state.norm, explored, p_max),
                      explored_reward, cfg.critic_lr);
    }

    // Deterministic policy gradient: chain the critic's action gradient
    // through the actor. The critic sees actions scaled by 1/p_max, so its
    // input gradient is already d q / d H3o.
    const CriticTrace q_trace =
        critic_forward(critic, critic_input(state.norm, alloc, p_max));
    std::vector<double> dx;
    critic_backward(critic, q_trace, 1.0, &dx);
    Mat delta3(static_cast<std::size_t>(m_count),
               static_cast<std::size_t>(frame_len));
    const std::size_t action_offset =
        static_cast<std::size_t>(m_count) * static_cast<std::size_t>(m_count);
    for (std::size_t m = 0; m < static_cast<std::size_t>(m_count); ++m) {
      for (std::size_t l = 0; l < static_cast<std::size_t>(frame_len); ++l) {
        const double dq_da =
            dx[action_offset + m * static_cast<std::size_t>(frame_len) + l];
        delta3(m, l) = -dq_da * sigmoid_deriv(trace.h3_out(m, l));
      }
    }
    const GradientSet grads = backward(trace, result.weights, delta3);

    IterationRecord rec;
    rec.iteration = iter;
    rec.eta = metrics.eta;
    rec.reward = r;
    rec.cost = cost(r);
    rec.throughput = metrics.throughput;
    rec.total_power_w = metrics.total_power_w;
    rec.violations = metrics.violations;
    rec.grad_norm = gradient_norm(grads);
    rec.alloc = std::move(alloc);
    result.history.records.push_back(std::move(rec));
    result.history.kappa = kappa;

    if (last) break;
    result.weights = apply_update(std::move(result.weights), grads,
                                  cfg.actor_lr);
  }

  return result;
}

}  // namespace icic
