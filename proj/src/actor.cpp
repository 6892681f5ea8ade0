#include "icic/actor.hpp"

#include <cmath>
#include <random>
#include <stdexcept>

namespace icic {

namespace {

void fill_uniform(Tensor3& t, double bound, std::mt19937_64& rng) {
  std::uniform_real_distribution<double> dist(-bound, bound);
  for (double& v : t.storage()) {
    do {
      v = dist(rng);
    } while (std::abs(v) >= bound);  // keep the support strictly open
  }
}

}  // namespace

ActorWeights init_weights(int num_sbs, int filters, int frame_len,
                          std::uint64_t seed) {
  if (num_sbs < 1 || filters < 1 || frame_len < 1) {
    throw std::invalid_argument("actor dimensions must be >= 1");
  }
  ActorWeights w;
  w.num_sbs = num_sbs;
  w.filters = filters;
  w.frame_len = frame_len;
  const auto m = static_cast<std::size_t>(num_sbs);
  const auto f = static_cast<std::size_t>(filters);
  const auto l = static_cast<std::size_t>(frame_len);
  w.h1 = Tensor3(m, f, l);
  w.h2 = Tensor3(m, f, l);
  w.h3 = Tensor3(m, m, l);

  std::mt19937_64 rng(seed);
  fill_uniform(w.h1, 1.0 / std::sqrt(static_cast<double>(num_sbs)), rng);
  fill_uniform(w.h2, 1.0 / std::sqrt(static_cast<double>(filters)), rng);
  fill_uniform(w.h3, 1.0 / std::sqrt(static_cast<double>(num_sbs)), rng);
  return w;
}

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

double sigmoid_deriv(double y) { return y * (1.0 - y); }

std::pair<PowerAllocation, ForwardTrace> forward(const Mat& s_norm,
                                                 const ActorWeights& w,
                                                 double p_max) {
  const auto m_count = static_cast<std::size_t>(w.num_sbs);
  const auto filters = static_cast<std::size_t>(w.filters);
  const auto frame_len = static_cast<std::size_t>(w.frame_len);
  if (s_norm.rows() != m_count || s_norm.cols() != m_count) {
    throw std::invalid_argument("state matrix shape does not match actor");
  }
  if (w.h1.dim0() != m_count || w.h1.dim1() != filters ||
      w.h1.dim2() != frame_len || !w.h1.same_shape(w.h2) ||
      w.h3.dim0() != m_count || w.h3.dim1() != m_count ||
      w.h3.dim2() != frame_len) {
    throw std::invalid_argument("actor weight tensor shapes are inconsistent");
  }

  ForwardTrace trace;
  trace.input = s_norm;
  trace.h1_in = Tensor3(m_count, filters, frame_len);
  trace.h1_out = Tensor3(m_count, filters, frame_len);
  trace.h2_in = Mat(m_count, frame_len);
  trace.h2_out = Mat(m_count, frame_len);
  trace.h3_in = Mat(m_count, frame_len);
  trace.h3_out = Mat(m_count, frame_len);

  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t f = 0; f < filters; ++f) {
      for (std::size_t l = 0; l < frame_len; ++l) {
        double acc = 0.0;
        for (std::size_t k = 0; k < m_count; ++k) {
          acc += w.h1(k, f, l) * s_norm(m, k);
        }
        trace.h1_in(m, f, l) = acc;
        trace.h1_out(m, f, l) = sigmoid(acc);
      }
    }
  }

  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t l = 0; l < frame_len; ++l) {
      double acc = 0.0;
      for (std::size_t f = 0; f < filters; ++f) {
        acc += w.h2(m, f, l) * trace.h1_out(m, f, l);
      }
      trace.h2_in(m, l) = acc;
      trace.h2_out(m, l) = sigmoid(acc);
    }
  }

  // Cross-SBS connection: node (m, l) weighs every SBS's global feature.
  PowerAllocation alloc{Mat(m_count, frame_len)};
  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t l = 0; l < frame_len; ++l) {
      double acc = 0.0;
      for (std::size_t k = 0; k < m_count; ++k) {
        acc += w.h3(k, m, l) * trace.h2_out(k, l);
      }
      trace.h3_in(m, l) = acc;
      trace.h3_out(m, l) = sigmoid(acc);
      alloc.p(m, l) = p_max * trace.h3_out(m, l);
    }
  }

  return {std::move(alloc), std::move(trace)};
}

}  // namespace icic
