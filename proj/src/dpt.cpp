#include "icic/dpt.hpp"

#include <cmath>
#include <stdexcept>
#include <utility>

namespace icic {

double reward(double eta, double gamma, double kappa) {
  const double scaled = kappa * eta;
  if (scaled > 500.0) {
    throw std::overflow_error("reward exponent kappa*eta exceeds 500; "
                              "kappa is miscalibrated for this scenario");
  }
  return gamma * std::exp(scaled);
}

double cost(double r) { return -r; }

Mat output_error(const ForwardTrace& trace, const Mat& grad_eta, double eta,
                 const LearnerConfig& cfg, double p_max) {
  const std::size_t m_count = trace.h3_in.rows();
  const std::size_t frame_len = trace.h3_in.cols();
  if (grad_eta.rows() != m_count || grad_eta.cols() != frame_len) {
    throw std::invalid_argument("grad_eta shape does not match trace");
  }
  // dC/deta = -gamma*kappa*exp(kappa*eta); P = p_max * H3o.
  const double dc_deta = -cfg.gamma * cfg.kappa * std::exp(cfg.kappa * eta);
  Mat delta3(m_count, frame_len);
  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t l = 0; l < frame_len; ++l) {
      const double dc_dh3o = dc_deta * p_max * grad_eta(m, l);
      delta3(m, l) = dc_dh3o * sigmoid_deriv(trace.h3_out(m, l));
    }
  }
  return delta3;
}

GradientSet backward(const ForwardTrace& trace, const ActorWeights& w,
                     const Mat& delta3) {
  const auto m_count = static_cast<std::size_t>(w.num_sbs);
  const auto filters = static_cast<std::size_t>(w.filters);
  const auto frame_len = static_cast<std::size_t>(w.frame_len);
  if (delta3.rows() != m_count || delta3.cols() != frame_len) {
    throw std::invalid_argument("delta3 shape does not match actor");
  }
  if (trace.h1_in.dim0() != m_count || trace.h1_in.dim1() != filters ||
      trace.h1_in.dim2() != frame_len || trace.input.rows() != m_count) {
    throw std::invalid_argument("trace shape does not match actor");
  }

  Mat delta2(m_count, frame_len);
  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t l = 0; l < frame_len; ++l) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m_count; ++k) {
        acc += delta3(k, l) * w.h3(m, k, l);
      }
      delta2(m, l) = acc * sigmoid_deriv(trace.h2_out(m, l));
    }
  }

  Tensor3 delta1(m_count, filters, frame_len);
  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t f = 0; f < filters; ++f) {
      for (std::size_t l = 0; l < frame_len; ++l) {
        delta1(m, f, l) = delta2(m, l) * w.h2(m, f, l) *
                          sigmoid_deriv(trace.h1_out(m, f, l));
      }
    }
  }

  GradientSet grads;
  grads.g3 = Tensor3(m_count, m_count, frame_len);
  for (std::size_t m1 = 0; m1 < m_count; ++m1) {
    for (std::size_t m2 = 0; m2 < m_count; ++m2) {
      for (std::size_t l = 0; l < frame_len; ++l) {
        grads.g3(m1, m2, l) = delta3(m2, l) * trace.h2_out(m1, l);
      }
    }
  }

  grads.g2 = Tensor3(m_count, filters, frame_len);
  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t f = 0; f < filters; ++f) {
      for (std::size_t l = 0; l < frame_len; ++l) {
        grads.g2(m, f, l) = delta2(m, l) * trace.h1_out(m, f, l);
      }
    }
  }

  // h1(k, f, l) touches node (m, f, l) through input entry (m, k), so its
  // gradient sums the layer errors against column k of the input state.
  grads.g1 = Tensor3(m_count, filters, frame_len);
  for (std::size_t k = 0; k < m_count; ++k) {
    for (std::size_t f = 0; f < filters; ++f) {
      for (std::size_t l = 0; l < frame_len; ++l) {
        double acc = 0.0;
        for (std::size_t m = 0; m < m_count; ++m) {
          acc += delta1(m, f, l) * trace.input(m, k);
        }
        grads.g1(k, f, l) = acc;
      }
    }
  }

  return grads;
}

ActorWeights apply_update(ActorWeights w, const GradientSet& g, double lr) {
  if (!w.h1.same_shape(g.g1) || !w.h2.same_shape(g.g2) ||
      !w.h3.same_shape(g.g3)) {
    throw std::invalid_argument("gradient shapes do not match weights");
  }
  for (std::size_t i = 0; i < w.h1.size(); ++i) {
    w.h1.storage()[i] -= lr * g.g1.storage()[i];
  }
  for (std::size_t i = 0; i < w.h2.size(); ++i) {
    w.h2.storage()[i] -= lr * g.g2.storage()[i];
  }
  for (std::size_t i = 0; i < w.h3.size(); ++i) {
    w.h3.storage()[i] -= lr * g.g3.storage()[i];
  }
  return w;
}

double gradient_norm(const GradientSet& g) {
  double acc = 0.0;
  for (double v : g.g1.storage()) acc += v * v;
  for (double v : g.g2.storage()) acc += v * v;
  for (double v : g.g3.storage()) acc += v * v;
  return std::sqrt(acc);
}

namespace {

// Central finite difference of eta over every power entry; validation
// fallback for the analytic gradient.
Mat fd_grad_ee(const Topology& top, const PowerAllocation& alloc) {
  const double step = 1e-4 * top.cfg.max_power_w();
  Mat grad(alloc.p.rows(), alloc.p.cols());
  PowerAllocation probe = alloc;
  for (std::size_t m = 0; m < alloc.p.rows(); ++m) {
    for (std::size_t l = 0; l < alloc.p.cols(); ++l) {
      const double keep = probe.p(m, l);
      probe.p(m, l) = keep + step;
      const double hi = evaluate(top, probe).eta;
      probe.p(m, l) = keep - step;
      const double lo = evaluate(top, probe).eta;
      probe.p(m, l) = keep;
      grad(m, l) = (hi - lo) / (2.0 * step);
    }
  }
  return grad;
}

bool should_stop(const TrainHistory& history, const LearnerConfig& cfg) {
  const auto& records = history.records;
  if (cfg.eps && records.back().cost <= *cfg.eps) return true;
  if (cfg.stop_rel_tol > 0.0 &&
      records.size() > static_cast<std::size_t>(cfg.stop_window)) {
    const double now = records.back().cost;
    const double then =
        records[records.size() - 1 - static_cast<std::size_t>(cfg.stop_window)]
            .cost;
    if (std::abs(now - then) <= cfg.stop_rel_tol * std::abs(then)) return true;
  }
  return false;
}

}  // namespace

TrainResult train(const Topology& top, const LearnerConfig& cfg,
                  ActorWeights w0) {
  if (cfg.max_iters < 0) throw std::invalid_argument("max_iters must be >= 0");

  TrainResult result;
  result.weights = std::move(w0);
  if (cfg.max_iters == 0) return result;

  const StateMatrix state = observe(top);
  const double p_max = top.cfg.max_power_w();
  LearnerConfig live = cfg;

  for (int iter = 0; iter < cfg.max_iters; ++iter) {
    auto [alloc, trace] = forward(state.norm, result.weights, p_max);
    const FrameMetrics metrics = evaluate(top, alloc);

    if (iter == 0 && live.kappa <= 0.0) {
      live.kappa = metrics.eta > 0.0 ? 1.0 / metrics.eta : 1.0;
    }
    const double r = reward(metrics.eta, live.gamma, live.kappa);

    const Mat grad_eta =
        live.fd_check ? fd_grad_ee(top, alloc) : grad_ee(top, alloc);
    const Mat delta3 = output_error(trace, grad_eta, metrics.eta, live, p_max);
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
    result.history.kappa = live.kappa;

    // Update only when another iteration will run, so the returned weights
    // are the ones behind the last record.
    if (iter + 1 >= cfg.max_iters || should_stop(result.history, live)) break;
    result.weights = apply_update(std::move(result.weights), grads, live.lr);
  }

  return result;
}

}  // namespace icic
