#include "icic/netsim.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>
#include <string>

namespace icic {

namespace {

constexpr double kThermalNoiseDbmPerHz = -174.0;
constexpr double kLn2 = 0.6931471805599453;

// Noise plus aggregate interference seen by user n in subframe l when
// served by SBS `serving`.
double interference_plus_noise(const Topology& top, const PowerAllocation& alloc,
                               int serving, int n, int l) {
  double denom = top.noise_w[static_cast<std::size_t>(n)];
  const int m_count = top.num_sbs();
  for (int k = 0; k < m_count; ++k) {
    if (k == serving) continue;
    denom += alloc.p(k, l) * top.gains(k, n);
  }
  return denom;
}

}  // namespace

double dbm_to_watts(double dbm) { return std::pow(10.0, (dbm - 30.0) / 10.0); }

double watts_to_dbm(double watts) { return 10.0 * std::log10(watts) + 30.0; }

void ScenarioConfig::validate() const {
  if (grid_side < 1) throw std::invalid_argument("grid_side must be >= 1");
  if (num_users < 1) throw std::invalid_argument("num_users must be >= 1");
  if (frame_len < 1) throw std::invalid_argument("frame_len must be >= 1");
  if (!std::isfinite(max_power_dbm))
    throw std::invalid_argument("max_power_dbm must be finite");
  if (!(delta_p > 0.0)) throw std::invalid_argument("delta_p must be > 0");
  if (p0_w < 0.0) throw std::invalid_argument("p0_w must be >= 0");
  if (sbs_spacing_m <= 0.0)
    throw std::invalid_argument("sbs_spacing_m must be > 0");
  if (system_bandwidth_hz < 0.0)
    throw std::invalid_argument("system_bandwidth_hz must be >= 0");
  if (rate_req_bps < 0.0)
    throw std::invalid_argument("rate_req_bps must be >= 0");
}

double Topology::user_bandwidth_hz(int n) const {
  const int cell = association[static_cast<std::size_t>(n)];
  const int count = cell_user_count[static_cast<std::size_t>(cell)];
  return cfg.system_bandwidth_hz / static_cast<double>(count);
}

bool allocation_within_limits(const PowerAllocation& alloc, double p_max_w) {
  for (double v : alloc.p.storage()) {
    if (!(v >= 0.0 && v <= p_max_w)) return false;
  }
  return true;
}

double path_loss_db(double distance_m) {
  const double d_km = std::max(distance_m, 1.0) / 1000.0;
  return 140.7 + 26.7 * std::log10(d_km);
}

double gain_from_distance(double distance_m) {
  return std::pow(10.0, -path_loss_db(distance_m) / 10.0);
}

Topology build_topology(const ScenarioConfig& cfg) {
  cfg.validate();

  Topology top;
  top.cfg = cfg;

  const int side = cfg.grid_side;
  const double spacing = cfg.sbs_spacing_m;
  top.sbs_positions.reserve(static_cast<std::size_t>(side) * side);
  for (int i = 0; i < side; ++i) {
    for (int j = 0; j < side; ++j) {
      top.sbs_positions.push_back({i * spacing, j * spacing});
    }
  }
  const int m_count = top.num_sbs();

  // Users fall uniformly in the grid bounding box expanded by half a
  // spacing on every side.
  const double lo = -spacing / 2.0;
  const double hi = (side - 1) * spacing + spacing / 2.0;
  std::mt19937_64 rng(cfg.rng_seed);
  std::uniform_real_distribution<double> coord(lo, hi);
  top.user_positions.reserve(static_cast<std::size_t>(cfg.num_users));
  for (int n = 0; n < cfg.num_users; ++n) {
    const double x = coord(rng);
    const double y = coord(rng);
    top.user_positions.push_back({x, y});
  }
  const int n_count = cfg.num_users;

  top.gains = Mat(static_cast<std::size_t>(m_count),
                  static_cast<std::size_t>(n_count));
  for (int m = 0; m < m_count; ++m) {
    for (int n = 0; n < n_count; ++n) {
      const double dx = top.sbs_positions[m].x - top.user_positions[n].x;
      const double dy = top.sbs_positions[m].y - top.user_positions[n].y;
      top.gains(m, n) = gain_from_distance(std::hypot(dx, dy));
    }
  }
  if (cfg.shadowing) {
    // Separate stream so user drops match the unshadowed scenario.
    std::mt19937_64 shadow_rng(cfg.rng_seed ^ 0x9e3779b97f4a7c15ULL);
    std::normal_distribution<double> shadow_db(0.0, cfg.shadowing_sigma_db);
    for (int m = 0; m < m_count; ++m) {
      for (int n = 0; n < n_count; ++n) {
        top.gains(m, n) *= std::pow(10.0, shadow_db(shadow_rng) / 10.0);
      }
    }
  }

  top.association.resize(static_cast<std::size_t>(n_count));
  top.cell_user_count.assign(static_cast<std::size_t>(m_count), 0);
  for (int n = 0; n < n_count; ++n) {
    int best = 0;
    for (int m = 1; m < m_count; ++m) {
      if (top.gains(m, n) > top.gains(best, n)) best = m;
    }
    top.association[static_cast<std::size_t>(n)] = best;
    ++top.cell_user_count[static_cast<std::size_t>(best)];
  }

  top.noise_w.resize(static_cast<std::size_t>(n_count));
  for (int n = 0; n < n_count; ++n) {
    const double w_n = std::max(top.user_bandwidth_hz(n), 1.0);
    const double noise_dbm =
        kThermalNoiseDbmPerHz + 10.0 * std::log10(w_n) + cfg.noise_figure_db;
    top.noise_w[static_cast<std::size_t>(n)] = dbm_to_watts(noise_dbm);
  }

  return top;
}

double sinr(const Topology& top, const PowerAllocation& alloc, int m, int n,
            int l) {
  const double signal = alloc.p(m, l) * top.gains(m, n);
  return signal / interference_plus_noise(top, alloc, m, n, l);
}

double user_rate(const Topology& top, const PowerAllocation& alloc, int n) {
  const double w_n = top.user_bandwidth_hz(n);
  if (w_n <= 0.0) return 0.0;
  const int serving = top.association[static_cast<std::size_t>(n)];
  const int frame_len = top.cfg.frame_len;
  double sum = 0.0;
  for (int l = 0; l < frame_len; ++l) {
    sum += w_n * std::log2(1.0 + sinr(top, alloc, serving, n, l));
  }
  return sum / static_cast<double>(frame_len);
}

double power_consumption(const ScenarioConfig& cfg, double p_ml) {
  if (!(p_ml >= 0.0 && p_ml <= cfg.max_power_w())) {
    throw std::invalid_argument("transmit power outside [0, max power]: " +
                                std::to_string(p_ml));
  }
  return cfg.delta_p * p_ml + cfg.p0_w;
}

FrameMetrics evaluate(const Topology& top, const PowerAllocation& alloc) {
  FrameMetrics metrics;
  const int n_count = top.num_users();
  metrics.user_rates.resize(static_cast<std::size_t>(n_count));
  for (int n = 0; n < n_count; ++n) {
    const double rate = user_rate(top, alloc, n);
    metrics.user_rates[static_cast<std::size_t>(n)] = rate;
    metrics.throughput += rate;
    if (rate < top.cfg.rate_req_bps) ++metrics.violations;
  }

  const int m_count = top.num_sbs();
  for (int m = 0; m < m_count; ++m) {
    for (int l = 0; l < top.cfg.frame_len; ++l) {
      metrics.total_power_w +=
          top.cfg.delta_p * alloc.p(m, l) + top.cfg.p0_w;
    }
  }

  metrics.eta = metrics.total_power_w > 0.0
                    ? metrics.throughput / metrics.total_power_w
                    : 0.0;
  return metrics;
}

Mat grad_ee(const Topology& top, const PowerAllocation& alloc) {
  const int m_count = top.num_sbs();
  const int n_count = top.num_users();
  const int frame_len = top.cfg.frame_len;

  // Forward quantities reused by every partial derivative.
  double throughput = 0.0;
  double total_power = 0.0;
  Mat denom(static_cast<std::size_t>(n_count),
            static_cast<std::size_t>(frame_len));
  Mat rate_slope(static_cast<std::size_t>(n_count),
                 static_cast<std::size_t>(frame_len));
  for (int n = 0; n < n_count; ++n) {
    const double w_n = top.user_bandwidth_hz(n);
    const int serving = top.association[static_cast<std::size_t>(n)];
    for (int l = 0; l < frame_len; ++l) {
      const double d = interference_plus_noise(top, alloc, serving, n, l);
      const double s = alloc.p(serving, l) * top.gains(serving, n) / d;
      denom(n, l) = d;
      // d/dx of (W_n / (L ln 2)) * ln(1 + x) at x = SINR.
      rate_slope(n, l) =
          w_n > 0.0 ? w_n / (frame_len * kLn2 * (1.0 + s)) : 0.0;
      if (w_n > 0.0) {
        throughput += w_n * std::log2(1.0 + s) / frame_len;
      }
    }
  }
  for (int m = 0; m < m_count; ++m) {
    for (int l = 0; l < frame_len; ++l) {
      total_power += top.cfg.delta_p * alloc.p(m, l) + top.cfg.p0_w;
    }
  }

  Mat grad(static_cast<std::size_t>(m_count),
           static_cast<std::size_t>(frame_len));
  const double e_sq = total_power * total_power;
  for (int m = 0; m < m_count; ++m) {
    for (int l = 0; l < frame_len; ++l) {
      double d_throughput = 0.0;
      for (int n = 0; n < n_count; ++n) {
        const int serving = top.association[static_cast<std::size_t>(n)];
        const double d = denom(n, l);
        if (serving == m) {
          d_throughput += rate_slope(n, l) * top.gains(m, n) / d;
        } else {
          d_throughput -= rate_slope(n, l) * alloc.p(serving, l) *
                          top.gains(serving, n) * top.gains(m, n) / (d * d);
        }
      }
      grad(m, l) =
          (d_throughput * total_power - throughput * top.cfg.delta_p) / e_sq;
    }
  }
  return grad;
}

}  // namespace icic
