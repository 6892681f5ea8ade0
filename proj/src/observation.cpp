#include "icic/observation.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace icic {

NormalizeConfig default_normalize_config(const Topology& top) {
  NormalizeConfig cfg;
  int max_users = 0;
  for (int c : top.cell_user_count) max_users = std::max(max_users, c);
  cfg.load_ref = std::max(max_users * top.cfg.rate_req_bps, 1.0);
  return cfg;
}

PartialObservation partial_observation(const Topology& top, int m) {
  const int m_count = top.num_sbs();
  const double p_max = top.cfg.max_power_w();
  PartialObservation obs;
  obs.rho.assign(static_cast<std::size_t>(m_count), 0.0);
  for (int n = 0; n < top.num_users(); ++n) {
    if (top.association[static_cast<std::size_t>(n)] != m) continue;
    obs.rho[static_cast<std::size_t>(m)] += top.cfg.rate_req_bps;
    for (int k = 0; k < m_count; ++k) {
      if (k == m) continue;
      obs.rho[static_cast<std::size_t>(k)] += p_max * top.gains(k, n);
    }
  }
  return obs;
}

StateMatrix assemble_state(const std::vector<PartialObservation>& partials) {
  const std::size_t m_count = partials.size();
  if (m_count == 0) throw std::invalid_argument("no partial observations");
  for (const auto& obs : partials) {
    if (obs.rho.size() != m_count) {
      throw std::invalid_argument(
          "partial observation length does not match SBS count");
    }
  }
  StateMatrix state;
  state.raw = Mat(m_count, m_count);
  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t k = 0; k < m_count; ++k) {
      state.raw(m, k) = partials[m].rho[k];
    }
  }
  return state;
}

StateMatrix normalize_state(StateMatrix s, const NormalizeConfig& cfg) {
  const std::size_t m_count = s.raw.rows();
  s.norm = Mat(m_count, m_count);
  const double span = cfg.dbm_ceil - cfg.dbm_floor;
  for (std::size_t m = 0; m < m_count; ++m) {
    for (std::size_t k = 0; k < m_count; ++k) {
      const double v = s.raw(m, k);
      double scaled;
      if (m == k) {
        scaled = v / cfg.load_ref;
      } else if (v <= 0.0) {
        scaled = 0.0;
      } else {
        scaled = (watts_to_dbm(v) - cfg.dbm_floor) / span;
      }
      s.norm(m, k) = std::clamp(scaled, 0.0, 1.0);
    }
  }
  return s;
}

StateMatrix observe(const Topology& top) {
  std::vector<PartialObservation> partials;
  partials.reserve(static_cast<std::size_t>(top.num_sbs()));
  for (int m = 0; m < top.num_sbs(); ++m) {
    partials.push_back(partial_observation(top, m));
  }
  return normalize_state(assemble_state(partials),
                         default_normalize_config(top));
}

}  // namespace icic
