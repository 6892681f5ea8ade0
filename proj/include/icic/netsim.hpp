#pragma once

#include <cstdint>
#include <vector>

#include "icic/tensor.hpp"

namespace icic {

double dbm_to_watts(double dbm);
double watts_to_dbm(double watts);

// Scenario parameters for a square grid of small base stations (SBSs)
// serving uniformly dropped users on a shared downlink carrier.
struct ScenarioConfig {
  int grid_side = 5;                   // SBS rows/cols; M = grid_side^2
  double sbs_spacing_m = 50.0;
  int num_users = 100;
  double max_power_dbm = 30.0;
  double system_bandwidth_hz = 1.0e7;
  int frame_len = 10;                  // subframes per frame (L)
  double subframe_dur_s = 1.0e-3;
  double delta_p = 4.0;                // amplifier slope of the power model
  double p0_w = 6.8;                   // circuit power per SBS per subframe
  double noise_figure_db = 9.0;
  double rate_req_bps = 1.0e6;         // per-user rate requirement
  std::uint64_t rng_seed = 1;
  bool shadowing = false;              // log-normal shadowing, off by default
  double shadowing_sigma_db = 8.0;

  int num_sbs() const { return grid_side * grid_side; }
  double max_power_w() const { return dbm_to_watts(max_power_dbm); }
  // Throws std::invalid_argument when a field is out of range.
  void validate() const;
};

struct Point {
  double x = 0.0;
  double y = 0.0;
};

// Immutable snapshot of one scenario draw: positions, association and
// frame-static channel gains. Carries its config so downstream operations
// are self-contained.
struct Topology {
  ScenarioConfig cfg;
  std::vector<Point> sbs_positions;    // M points
  std::vector<Point> user_positions;   // N points
  std::vector<int> association;        // user -> serving SBS index
  Mat gains;                           // M x N linear channel gains
  std::vector<double> noise_w;         // per-user noise power (watts)
  std::vector<int> cell_user_count;    // users per SBS

  int num_sbs() const { return static_cast<int>(sbs_positions.size()); }
  int num_users() const { return static_cast<int>(user_positions.size()); }
  // Equal split of the system bandwidth among the users of n's cell.
  double user_bandwidth_hz(int n) const;
};

// Per-SBS per-subframe transmit powers in watts, M x L.
struct PowerAllocation {
  Mat p;
};

// Entrywise 0 <= p <= p_max_w.
bool allocation_within_limits(const PowerAllocation& alloc, double p_max_w);

struct FrameMetrics {
  std::vector<double> user_rates;      // bits/s
  double throughput = 0.0;             // bits/s, sum of user rates
  double total_power_w = 0.0;          // sum of the power model over (m, l)
  double eta = 0.0;                    // throughput / total_power_w
  int violations = 0;                  // users below their rate requirement
};

// Path loss in dB at the given distance; distances are clamped below at 1 m
// and the loss law takes its distance in kilometers.
double path_loss_db(double distance_m);
// Linear gain 10^(-PL/10).
double gain_from_distance(double distance_m);

// Places SBSs on the grid, drops users uniformly at random (seeded) in the
// grid bounding box expanded by half a spacing, associates each user to the
// strongest-gain SBS and derives per-user noise power.
Topology build_topology(const ScenarioConfig& cfg);

// SINR of user n served by SBS m in subframe l, Shannon-model denominator
// of noise plus co-channel interference from all other SBSs.
double sinr(const Topology& top, const PowerAllocation& alloc, int m, int n,
            int l);

// Frame-averaged Shannon rate of user n in bits/s.
double user_rate(const Topology& top, const PowerAllocation& alloc, int n);

// Affine power model delta_p * p_ml + p0 for one SBS-subframe entry.
// Throws std::invalid_argument when p_ml is outside [0, max power].
double power_consumption(const ScenarioConfig& cfg, double p_ml);

// Rates, throughput, consumed power, energy efficiency and rate-requirement
// violation count for a full allocation.
FrameMetrics evaluate(const Topology& top, const PowerAllocation& alloc);

// Analytic gradient of energy efficiency with respect to every transmit
// power entry: d(eta)/dP_{m,l}, M x L.
Mat grad_ee(const Topology& top, const PowerAllocation& alloc);

}  // namespace icic
