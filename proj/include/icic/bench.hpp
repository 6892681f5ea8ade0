#pragma once

#include <cstdint>
#include <functional>
#include <stdexcept>
#include <string>
#include <vector>

#include "icic/actor.hpp"
#include "icic/baselines.hpp"
#include "icic/dpt.hpp"
#include "icic/netsim.hpp"

namespace icic {

enum class Scheme { dpt, ddpg, abs, maxpower };

std::string scheme_name(Scheme scheme);
Scheme scheme_from_name(const std::string& name);

struct RunSpec {
  ScenarioConfig scenario;
  LearnerConfig learner;
  DdpgConfig ddpg;
  AbsConfig abs;
  Scheme scheme = Scheme::maxpower;
  std::vector<std::uint64_t> seeds{1};
  std::string output_dir = "out";
};

// One CSV row. Static schemes emit exactly one row with iteration 0.
struct MetricsRecord {
  std::string run_id;
  std::uint64_t seed = 0;
  std::string scheme;
  int iteration = 0;
  double eta = 0.0;
  double reward = 0.0;
  double throughput_mbps = 0.0;
  double power_w = 0.0;
  int violations = 0;

  friend bool operator==(const MetricsRecord&, const MetricsRecord&) = default;
};

class ConfigError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class WeightsIoError : public std::runtime_error {
 public:
  enum class Kind { bad_magic, truncated, dim_overflow, io };
  WeightsIoError(Kind kind, const std::string& what)
      : std::runtime_error(what), kind_(kind) {}
  Kind kind() const { return kind_; }

 private:
  Kind kind_;
};

// Flat `key = value` file with `#` comments. Unknown keys, malformed values
// and a missing scheme raise ConfigError with the offending line number.
RunSpec parse_config(const std::string& path);
RunSpec parse_config_text(const std::string& text);

// The resolved spec rendered back in config-file syntax; parses to an
// equivalent RunSpec.
std::string render_config(const RunSpec& spec);

// render_config written atomically to `path`.
void write_config(const RunSpec& spec, const std::string& path);

struct SeedResult {
  std::uint64_t seed = 0;
  // Final trained weights for learning schemes; empty tensors otherwise.
  ActorWeights weights;
  bool has_weights = false;
};

struct ExperimentResult {
  std::vector<MetricsRecord> records;  // ordered by (seed, iteration)
  std::vector<SeedResult> seed_results;
};

// Runs every seed of the spec, collecting one row per iteration (one row
// total for static schemes). `on_seed_done`, when set, fires after each
// seed with all records so far, so partial results can be flushed.
using SeedCallback = std::function<void(const std::vector<MetricsRecord>&)>;
ExperimentResult run_experiment(const RunSpec& spec,
                                const SeedCallback& on_seed_done = {});

// Exact schema `run_id,seed,scheme,iteration,eta,reward,throughput_mbps,
// power_w,violations`; floats carry 12 significant digits; the file is
// written atomically.
void write_csv(const std::vector<MetricsRecord>& records,
               const std::string& path);
std::vector<MetricsRecord> read_csv(const std::string& path);

// Binary actor-weights file: magic "DPT1", u32 M, F, L, then h1, h2, h3
// row-major as little-endian IEEE-754 doubles.
void save_weights(const ActorWeights& w, const std::string& path);
ActorWeights load_weights(const std::string& path);

// One `(iteration, eta)` series file per (scheme, seed) plus an index file
// listing every series, all under out_dir.
std::vector<std::string> emit_plot_data(
    const std::vector<MetricsRecord>& records, const std::string& out_dir);

// Conventional artifact names inside an output directory.
std::string weights_filename(Scheme scheme, std::uint64_t seed);

// Re-derives the final eta of every run in the CSV from the stored config
// and weight files next to it. Returns the human-readable failures (empty
// means everything checked out).
std::vector<std::string> verify_csv(const std::string& csv_path);

std::string format_g12(double v);

}  // namespace icic
