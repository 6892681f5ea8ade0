#pragma once

// Shared helpers for the unit and acceptance suites: synthetic topology
// generation, an independently coded scalar reference for the frame
// metrics, and central-difference utilities. The reference implementations
// here deliberately avoid the library's evaluation code paths.

#include <cmath>
#include <random>
#include <vector>

#include "icic/netsim.hpp"

namespace icic::testing {

// A free-form topology (not grid-constrained): random positive gains,
// random association, realistic noise floors.
inline Topology make_random_topology(int num_sbs, int num_users,
                                     int frame_len, std::uint64_t seed) {
  Topology top;
  top.cfg.grid_side = 1;  // unused for synthetic layouts
  top.cfg.num_users = num_users;
  top.cfg.frame_len = frame_len;
  top.cfg.rng_seed = seed;

  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> coord(0.0, 200.0);
  std::uniform_real_distribution<double> log_gain(-13.0, -8.0);
  std::uniform_int_distribution<int> pick_sbs(0, num_sbs - 1);

  for (int m = 0; m < num_sbs; ++m) {
    top.sbs_positions.push_back({coord(rng), coord(rng)});
  }
  for (int n = 0; n < num_users; ++n) {
    top.user_positions.push_back({coord(rng), coord(rng)});
  }
  top.gains = Mat(static_cast<std::size_t>(num_sbs),
                  static_cast<std::size_t>(num_users));
  for (int m = 0; m < num_sbs; ++m) {
    for (int n = 0; n < num_users; ++n) {
      top.gains(m, n) = std::pow(10.0, log_gain(rng));
    }
  }
  top.cell_user_count.assign(static_cast<std::size_t>(num_sbs), 0);
  for (int n = 0; n < num_users; ++n) {
    const int m = pick_sbs(rng);
    top.association.push_back(m);
    ++top.cell_user_count[static_cast<std::size_t>(m)];
  }
  std::uniform_real_distribution<double> noise(5e-14, 5e-13);
  for (int n = 0; n < num_users; ++n) {
    top.noise_w.push_back(noise(rng));
  }
  return top;
}

inline PowerAllocation make_random_interior_allocation(int num_sbs,
                                                       int frame_len,
                                                       double p_max,
                                                       std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> frac(0.05, 0.95);
  PowerAllocation alloc{Mat(static_cast<std::size_t>(num_sbs),
                            static_cast<std::size_t>(frame_len))};
  for (double& v : alloc.p.storage()) v = frac(rng) * p_max;
  return alloc;
}

struct OracleMetrics {
  double throughput = 0.0;
  double total_power = 0.0;
  double eta = 0.0;
  std::vector<double> user_rates;
};

// Scalar re-evaluation of signal, SINR, rate, power model and efficiency,
// written from first principles with explicit loops and natural logs.
inline OracleMetrics oracle_evaluate(const Topology& top,
                                     const PowerAllocation& alloc) {
  OracleMetrics out;
  const int m_count = static_cast<int>(top.sbs_positions.size());
  const int n_count = static_cast<int>(top.user_positions.size());
  const int frame_len = top.cfg.frame_len;
  const double ln2 = std::log(2.0);

  for (int n = 0; n < n_count; ++n) {
    const int serving = top.association[static_cast<std::size_t>(n)];
    int sharing = 0;
    for (int other = 0; other < n_count; ++other) {
      if (top.association[static_cast<std::size_t>(other)] == serving) {
        ++sharing;
      }
    }
    const double per_user_bw = top.cfg.system_bandwidth_hz / sharing;

    double rate_sum = 0.0;
    for (int l = 0; l < frame_len; ++l) {
      const double signal = alloc.p(serving, l) * top.gains(serving, n);
      double interference = 0.0;
      for (int k = 0; k < m_count; ++k) {
        if (k == serving) continue;
        interference += alloc.p(k, l) * top.gains(k, n);
      }
      const double ratio =
          signal / (top.noise_w[static_cast<std::size_t>(n)] + interference);
      if (per_user_bw > 0.0) {
        rate_sum += per_user_bw * std::log(1.0 + ratio) / ln2;
      }
    }
    const double rate = rate_sum / frame_len;
    out.user_rates.push_back(rate);
    out.throughput += rate;
  }

  for (int m = 0; m < m_count; ++m) {
    for (int l = 0; l < frame_len; ++l) {
      out.total_power += top.cfg.delta_p * alloc.p(m, l) + top.cfg.p0_w;
    }
  }
  out.eta = out.total_power > 0.0 ? out.throughput / out.total_power : 0.0;
  return out;
}

// Central difference of f() with respect to one mutable slot.
template <typename F>
double central_diff(F&& f, double& slot, double step) {
  const double keep = slot;
  slot = keep + step;
  const double hi = f();
  slot = keep - step;
  const double lo = f();
  slot = keep;
  return (hi - lo) / (2.0 * step);
}

// Energy efficiency recomputed in extended precision. Needed to
// finite-difference eta to better than 1e-5 relative: eta is of order 1e5+,
// so double-precision differencing leaves ~1e-6 absolute noise on the
// smaller gradient entries.
inline long double eta_long_double(const Topology& top,
                                   const PowerAllocation& alloc) {
  const int m_count = top.num_sbs();
  const int n_count = top.num_users();
  const int frame_len = top.cfg.frame_len;
  const long double ln2 = logl(2.0L);

  long double throughput = 0.0L;
  for (int n = 0; n < n_count; ++n) {
    const int serving = top.association[static_cast<std::size_t>(n)];
    const long double bw =
        static_cast<long double>(top.cfg.system_bandwidth_hz) /
        top.cell_user_count[static_cast<std::size_t>(serving)];
    long double rate = 0.0L;
    for (int l = 0; l < frame_len; ++l) {
      long double interference = 0.0L;
      for (int k = 0; k < m_count; ++k) {
        if (k == serving) continue;
        interference += static_cast<long double>(alloc.p(k, l)) *
                        static_cast<long double>(top.gains(k, n));
      }
      const long double signal =
          static_cast<long double>(alloc.p(serving, l)) *
          static_cast<long double>(top.gains(serving, n));
      const long double denom =
          static_cast<long double>(top.noise_w[static_cast<std::size_t>(n)]) +
          interference;
      rate += bw * log1pl(signal / denom) / ln2;
    }
    throughput += rate / frame_len;
  }

  long double energy = 0.0L;
  for (int m = 0; m < m_count; ++m) {
    for (int l = 0; l < frame_len; ++l) {
      energy += static_cast<long double>(top.cfg.delta_p) *
                    static_cast<long double>(alloc.p(m, l)) +
                static_cast<long double>(top.cfg.p0_w);
    }
  }
  return throughput / energy;
}

// Richardson-extrapolated central difference of eta with respect to one
// power entry, in extended precision.
inline double richardson_grad_eta(const Topology& top, PowerAllocation& alloc,
                                  int m, int l, double step) {
  const double keep = alloc.p(m, l);
  const auto probe = [&](double offset) {
    alloc.p(m, l) = keep + offset;
    const long double v = eta_long_double(top, alloc);
    alloc.p(m, l) = keep;
    return v;
  };
  const long double h = step;
  const long double d_h = (probe(step) - probe(-step)) / (2.0L * h);
  const long double d_half =
      (probe(step / 2.0) - probe(-step / 2.0)) / h;
  return static_cast<double>((4.0L * d_half - d_h) / 3.0L);
}

// True when |a - b| <= rel*max(|a|,|b|), with an absolute comparison below
// `abs_floor`.
inline bool close_rel(double a, double b, double rel, double abs_floor) {
  const double diff = std::abs(a - b);
  const double mag = std::max(std::abs(a), std::abs(b));
  if (mag < abs_floor) return diff <= abs_floor;
  return diff <= rel * mag;
}

}  // namespace icic::testing
