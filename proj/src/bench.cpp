#include "icic/bench.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <utility>

#include "icic/observation.hpp"

namespace icic {

namespace fs = std::filesystem;

namespace {

constexpr char kCsvHeader[] =
    "run_id,seed,scheme,iteration,eta,reward,throughput_mbps,power_w,"
    "violations";
constexpr char kWeightsMagic[4] = {'D', 'P', 'T', '1'};
constexpr std::uint32_t kMaxWeightsDim = 65535;
constexpr std::uint64_t kMaxWeightsElems = 100'000'000;

std::string trim(const std::string& s) {
  const auto begin = s.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) return "";
  const auto end = s.find_last_not_of(" \t\r\n");
  return s.substr(begin, end - begin + 1);
}

[[noreturn]] void config_fail(int line, const std::string& what) {
  throw ConfigError("config line " + std::to_string(line) + ": " + what);
}

double parse_double(const std::string& text, int line) {
  std::size_t consumed = 0;
  double value = 0.0;
  try {
    value = std::stod(text, &consumed);
  } catch (const std::exception&) {
    config_fail(line, "malformed number '" + text + "'");
  }
  if (consumed != text.size()) {
    config_fail(line, "malformed number '" + text + "'");
  }
  return value;
}

long long parse_int(const std::string& text, int line) {
  std::size_t consumed = 0;
  long long value = 0;
  try {
    value = std::stoll(text, &consumed);
  } catch (const std::exception&) {
    config_fail(line, "malformed integer '" + text + "'");
  }
  if (consumed != text.size()) {
    config_fail(line, "malformed integer '" + text + "'");
  }
  return value;
}

void atomic_write(const std::string& path, const std::string& content,
                  bool binary) {
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, binary ? std::ios::binary | std::ios::trunc
                                  : std::ios::trunc);
    if (!out) throw std::runtime_error("cannot open for write: " + tmp.string());
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) throw std::runtime_error("write failed: " + tmp.string());
  }
  fs::rename(tmp, target);
}

std::string read_file(const std::string& path, bool binary) {
  std::ifstream in(path, binary ? std::ios::binary : std::ios::in);
  if (!in) throw std::runtime_error("cannot open: " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return std::move(buf).str();
}

void put_u32_le(std::string& out, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) {
    out.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
  }
}

void put_f64_le(std::string& out, double v) {
  const auto bits = std::bit_cast<std::uint64_t>(v);
  for (int i = 0; i < 8; ++i) {
    out.push_back(static_cast<char>((bits >> (8 * i)) & 0xff));
  }
}

std::uint32_t get_u32_le(const unsigned char* p) {
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(p[i]) << (8 * i);
  return v;
}

double get_f64_le(const unsigned char* p) {
  std::uint64_t v = 0;
  for (int i = 0; i < 8; ++i) v |= static_cast<std::uint64_t>(p[i]) << (8 * i);
  return std::bit_cast<double>(v);
}

// Reward column for static single-row schemes, using the same calibration
// convention as the learners (kappa * eta = 1 at the measured point).
double static_scheme_reward(double eta, double gamma) {
  const double kappa = eta > 0.0 ? 1.0 / eta : 1.0;
  return reward(eta, gamma, kappa);
}

MetricsRecord make_record(const std::string& run_id, std::uint64_t seed,
                          const std::string& scheme, int iteration, double eta,
                          double rew, double throughput_bps, double power_w,
                          int violations) {
  MetricsRecord rec;
  rec.run_id = run_id;
  rec.seed = seed;
  rec.scheme = scheme;
  rec.iteration = iteration;
  rec.eta = eta;
  rec.reward = rew;
  rec.throughput_mbps = throughput_bps / 1e6;
  rec.power_w = power_w;
  rec.violations = violations;
  return rec;
}

}  // namespace

std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

std::string scheme_name(Scheme scheme) {
  switch (scheme) {
    case Scheme::dpt: return "dpt";
    case Scheme::ddpg: return "ddpg";
    case Scheme::abs: return "abs";
    case Scheme::maxpower: return "maxpower";
  }
  throw std::invalid_argument("unknown scheme");
}

Scheme scheme_from_name(const std::string& name) {
  if (name == "dpt") return Scheme::dpt;
  if (name == "ddpg") return Scheme::ddpg;
  if (name == "abs") return Scheme::abs;
  if (name == "maxpower") return Scheme::maxpower;
  throw ConfigError("unknown scheme '" + name + "'");
}

RunSpec parse_config_text(const std::string& text) {
  RunSpec spec;
  bool scheme_seen = false;

  std::istringstream in(text);
  std::string raw_line;
  int line_no = 0;
  while (std::getline(in, raw_line)) {
    ++line_no;
    std::string line = raw_line;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;

    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      config_fail(line_no, "expected 'key = value'");
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty()) config_fail(line_no, "empty key");
    if (value.empty()) config_fail(line_no, "empty value for '" + key + "'");

    if (key == "grid_side") {
      spec.scenario.grid_side = static_cast<int>(parse_int(value, line_no));
    } else if (key == "num_users") {
      spec.scenario.num_users = static_cast<int>(parse_int(value, line_no));
    } else if (key == "max_power_dbm") {
      spec.scenario.max_power_dbm = parse_double(value, line_no);
    } else if (key == "bandwidth_hz") {
      spec.scenario.system_bandwidth_hz = parse_double(value, line_no);
    } else if (key == "frame_len") {
      spec.scenario.frame_len = static_cast<int>(parse_int(value, line_no));
    } else if (key == "delta_p") {
      spec.scenario.delta_p = parse_double(value, line_no);
    } else if (key == "p0_w") {
      spec.scenario.p0_w = parse_double(value, line_no);
    } else if (key == "noise_figure_db") {
      spec.scenario.noise_figure_db = parse_double(value, line_no);
    } else if (key == "rate_req_bps") {
      spec.scenario.rate_req_bps = parse_double(value, line_no);
    } else if (key == "scheme") {
      try {
        spec.scheme = scheme_from_name(value);
      } catch (const ConfigError& err) {
        config_fail(line_no, err.what());
      }
      scheme_seen = true;
    } else if (key == "seeds") {
      spec.seeds.clear();
      std::istringstream list(value);
      std::string item;
      while (std::getline(list, item, ',')) {
        item = trim(item);
        if (item.empty()) config_fail(line_no, "empty seed entry");
        const long long seed = parse_int(item, line_no);
        if (seed < 0) config_fail(line_no, "seeds must be nonnegative");
        spec.seeds.push_back(static_cast<std::uint64_t>(seed));
      }
      if (spec.seeds.empty()) config_fail(line_no, "seeds list is empty");
    } else if (key == "lr") {
      const double lr = parse_double(value, line_no);
      spec.learner.lr = lr;
      spec.ddpg.actor_lr = lr;
    } else if (key == "gamma") {
      const double gamma = parse_double(value, line_no);
      spec.learner.gamma = gamma;
      spec.ddpg.gamma = gamma;
    } else if (key == "filters") {
      const int filters = static_cast<int>(parse_int(value, line_no));
      spec.learner.filters = filters;
      spec.ddpg.filters = filters;
    } else if (key == "max_iters") {
      const int iters = static_cast<int>(parse_int(value, line_no));
      spec.learner.max_iters = iters;
      spec.ddpg.max_iters = iters;
    } else if (key == "output_dir") {
      spec.output_dir = value;
    } else {
      config_fail(line_no, "unknown key '" + key + "'");
    }
  }

  if (!scheme_seen) throw ConfigError("config is missing required key 'scheme'");
  try {
    spec.scenario.validate();
  } catch (const std::invalid_argument& err) {
    throw ConfigError(std::string("invalid scenario: ") + err.what());
  }
  if (spec.learner.lr <= 0.0) throw ConfigError("lr must be > 0");
  if (spec.learner.gamma <= 0.0) throw ConfigError("gamma must be > 0");
  if (spec.learner.filters < 1) throw ConfigError("filters must be >= 1");
  if (spec.learner.max_iters < 1) throw ConfigError("max_iters must be >= 1");
  return spec;
}

RunSpec parse_config(const std::string& path) {
  std::string text;
  try {
    text = read_file(path, /*binary=*/false);
  } catch (const std::runtime_error& err) {
    throw ConfigError(err.what());
  }
  return parse_config_text(text);
}

std::string render_config(const RunSpec& spec) {
  std::ostringstream out;
  out << "scheme = " << scheme_name(spec.scheme) << "\n";
  out << "grid_side = " << spec.scenario.grid_side << "\n";
  out << "num_users = " << spec.scenario.num_users << "\n";
  out << "max_power_dbm = " << format_g12(spec.scenario.max_power_dbm) << "\n";
  out << "bandwidth_hz = " << format_g12(spec.scenario.system_bandwidth_hz)
      << "\n";
  out << "frame_len = " << spec.scenario.frame_len << "\n";
  out << "delta_p = " << format_g12(spec.scenario.delta_p) << "\n";
  out << "p0_w = " << format_g12(spec.scenario.p0_w) << "\n";
  out << "noise_figure_db = " << format_g12(spec.scenario.noise_figure_db)
      << "\n";
  out << "rate_req_bps = " << format_g12(spec.scenario.rate_req_bps) << "\n";
  out << "lr = " << format_g12(spec.learner.lr) << "\n";
  out << "gamma = " << format_g12(spec.learner.gamma) << "\n";
  out << "filters = " << spec.learner.filters << "\n";
  out << "max_iters = " << spec.learner.max_iters << "\n";
  out << "seeds = ";
  for (std::size_t i = 0; i < spec.seeds.size(); ++i) {
    if (i > 0) out << ",";
    out << spec.seeds[i];
  }
  out << "\n";
  out << "output_dir = " << spec.output_dir << "\n";
  return std::move(out).str();
}

void write_config(const RunSpec& spec, const std::string& path) {
  atomic_write(path, render_config(spec), /*binary=*/false);
}

ExperimentResult run_experiment(const RunSpec& spec,
                                const SeedCallback& on_seed_done) {
  if (spec.seeds.empty()) {
    throw std::invalid_argument("run spec needs at least one seed");
  }
  const std::string scheme = scheme_name(spec.scheme);

  ExperimentResult result;
  for (const std::uint64_t seed : spec.seeds) {
    ScenarioConfig scenario = spec.scenario;
    scenario.rng_seed = seed;
    const Topology top = build_topology(scenario);
    const std::string run_id = scheme + "-s" + std::to_string(seed);

    SeedResult seed_result;
    seed_result.seed = seed;

    switch (spec.scheme) {
      case Scheme::maxpower: {
        const PowerAllocation alloc = max_power_policy(
            top.num_sbs(), scenario.frame_len, scenario.max_power_w());
        const FrameMetrics metrics = evaluate(top, alloc);
        result.records.push_back(make_record(
            run_id, seed, scheme, 0, metrics.eta,
            static_scheme_reward(metrics.eta, spec.learner.gamma),
            metrics.throughput, metrics.total_power_w, metrics.violations));
        break;
      }
      case Scheme::abs: {
        const PowerAllocation alloc =
            abs_policy(top, spec.abs, scenario.frame_len);
        const FrameMetrics metrics = evaluate(top, alloc);
        result.records.push_back(make_record(
            run_id, seed, scheme, 0, metrics.eta,
            static_scheme_reward(metrics.eta, spec.learner.gamma),
            metrics.throughput, metrics.total_power_w, metrics.violations));
        break;
      }
      case Scheme::dpt: {
        ActorWeights w0 = init_weights(top.num_sbs(), spec.learner.filters,
                                       scenario.frame_len, seed);
        TrainResult trained = train(top, spec.learner, std::move(w0));
        for (const IterationRecord& rec : trained.history.records) {
          result.records.push_back(make_record(
              run_id, seed, scheme, rec.iteration, rec.eta, rec.reward,
              rec.throughput, rec.total_power_w, rec.violations));
        }
        seed_result.weights = std::move(trained.weights);
        seed_result.has_weights = true;
        break;
      }
      case Scheme::ddpg: {
        TrainResult trained = ddpg_train(top, spec.ddpg, seed);
        for (const IterationRecord& rec : trained.history.records) {
          result.records.push_back(make_record(
              run_id, seed, scheme, rec.iteration, rec.eta, rec.reward,
              rec.throughput, rec.total_power_w, rec.violations));
        }
        seed_result.weights = std::move(trained.weights);
        seed_result.has_weights = true;
        break;
      }
    }

    result.seed_results.push_back(std::move(seed_result));
    if (on_seed_done) on_seed_done(result.records);
  }

  std::stable_sort(result.records.begin(), result.records.end(),
                   [](const MetricsRecord& a, const MetricsRecord& b) {
                     if (a.seed != b.seed) return a.seed < b.seed;
                     return a.iteration < b.iteration;
                   });
  return result;
}

void write_csv(const std::vector<MetricsRecord>& records,
               const std::string& path) {
  std::vector<MetricsRecord> ordered(records);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const MetricsRecord& a, const MetricsRecord& b) {
                     if (a.seed != b.seed) return a.seed < b.seed;
                     return a.iteration < b.iteration;
                   });
  std::string out(kCsvHeader);
  out.push_back('\n');
  for (const MetricsRecord& rec : ordered) {
    out += rec.run_id;
    out.push_back(',');
    out += std::to_string(rec.seed);
    out.push_back(',');
    out += rec.scheme;
    out.push_back(',');
    out += std::to_string(rec.iteration);
    out.push_back(',');
    out += format_g12(rec.eta);
    out.push_back(',');
    out += format_g12(rec.reward);
    out.push_back(',');
    out += format_g12(rec.throughput_mbps);
    out.push_back(',');
    out += format_g12(rec.power_w);
    out.push_back(',');
    out += std::to_string(rec.violations);
    out.push_back('\n');
  }
  atomic_write(path, out, /*binary=*/false);
}

std::vector<MetricsRecord> read_csv(const std::string& path) {
  const std::string text = read_file(path, /*binary=*/false);
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw std::runtime_error("empty CSV: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) {
    throw std::runtime_error("unexpected CSV header in " + path);
  }

  std::vector<MetricsRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::istringstream row(line);
    std::string field;
    while (std::getline(row, field, ',')) fields.push_back(field);
    if (fields.size() != 9) {
      throw std::runtime_error("CSV row " + std::to_string(line_no) +
                               " has " + std::to_string(fields.size()) +
                               " fields, expected 9");
    }
    MetricsRecord rec;
    rec.run_id = fields[0];
    rec.seed = std::stoull(fields[1]);
    rec.scheme = fields[2];
    rec.iteration = std::stoi(fields[3]);
    rec.eta = std::stod(fields[4]);
    rec.reward = std::stod(fields[5]);
    rec.throughput_mbps = std::stod(fields[6]);
    rec.power_w = std::stod(fields[7]);
    rec.violations = std::stoi(fields[8]);
    records.push_back(std::move(rec));
  }
  return records;
}

void save_weights(const ActorWeights& w, const std::string& path) {
  std::string out;
  out.append(kWeightsMagic, sizeof(kWeightsMagic));
  put_u32_le(out, static_cast<std::uint32_t>(w.num_sbs));
  put_u32_le(out, static_cast<std::uint32_t>(w.filters));
  put_u32_le(out, static_cast<std::uint32_t>(w.frame_len));
  for (double v : w.h1.storage()) put_f64_le(out, v);
  for (double v : w.h2.storage()) put_f64_le(out, v);
  for (double v : w.h3.storage()) put_f64_le(out, v);
  atomic_write(path, out, /*binary=*/true);
}

ActorWeights load_weights(const std::string& path) {
  std::string blob;
  try {
    blob = read_file(path, /*binary=*/true);
  } catch (const std::runtime_error& err) {
    throw WeightsIoError(WeightsIoError::Kind::io, err.what());
  }
  const auto* bytes = reinterpret_cast<const unsigned char*>(blob.data());
  if (blob.size() < 16) {
    throw WeightsIoError(WeightsIoError::Kind::truncated,
                         "weights file shorter than its header: " + path);
  }
  if (std::string_view(blob.data(), 4) !=
      std::string_view(kWeightsMagic, 4)) {
    throw WeightsIoError(WeightsIoError::Kind::bad_magic,
                         "bad magic in weights file: " + path);
  }
  const std::uint32_t m = get_u32_le(bytes + 4);
  const std::uint32_t f = get_u32_le(bytes + 8);
  const std::uint32_t l = get_u32_le(bytes + 12);
  if (m == 0 || f == 0 || l == 0 || m > kMaxWeightsDim || f > kMaxWeightsDim ||
      l > kMaxWeightsDim) {
    throw WeightsIoError(WeightsIoError::Kind::dim_overflow,
                         "weights dimensions out of range: " + path);
  }
  const std::uint64_t elems =
      2ULL * m * f * l + static_cast<std::uint64_t>(m) * m * l;
  if (elems > kMaxWeightsElems) {
    throw WeightsIoError(WeightsIoError::Kind::dim_overflow,
                         "weights payload too large: " + path);
  }
  const std::uint64_t expected = 16 + 8 * elems;
  if (blob.size() < expected) {
    throw WeightsIoError(WeightsIoError::Kind::truncated,
                         "weights payload truncated: " + path);
  }
  if (blob.size() > expected) {
    throw WeightsIoError(WeightsIoError::Kind::truncated,
                         "unexpected trailing bytes: " + path);
  }

  ActorWeights w;
  w.num_sbs = static_cast<int>(m);
  w.filters = static_cast<int>(f);
  w.frame_len = static_cast<int>(l);
  w.h1 = Tensor3(m, f, l);
  w.h2 = Tensor3(m, f, l);
  w.h3 = Tensor3(m, m, l);
  const unsigned char* p = bytes + 16;
  for (double& v : w.h1.storage()) {
    v = get_f64_le(p);
    p += 8;
  }
  for (double& v : w.h2.storage()) {
    v = get_f64_le(p);
    p += 8;
  }
  for (double& v : w.h3.storage()) {
    v = get_f64_le(p);
    p += 8;
  }
  return w;
}

std::string weights_filename(Scheme scheme, std::uint64_t seed) {
  return "weights_" + scheme_name(scheme) + "_s" + std::to_string(seed) +
         ".bin";
}

std::vector<std::string> emit_plot_data(
    const std::vector<MetricsRecord>& records, const std::string& out_dir) {
  if (records.empty()) {
    throw std::invalid_argument("no records to emit plot data from");
  }

  // Group by (scheme, seed), preserving first-appearance order.
  std::vector<std::pair<std::string, std::uint64_t>> keys;
  for (const MetricsRecord& rec : records) {
    const std::pair<std::string, std::uint64_t> key{rec.scheme, rec.seed};
    if (std::find(keys.begin(), keys.end(), key) == keys.end()) {
      keys.push_back(key);
    }
  }

  std::vector<std::string> written;
  std::string index;
  for (const auto& [scheme, seed] : keys) {
    std::string series;
    for (const MetricsRecord& rec : records) {
      if (rec.scheme != scheme || rec.seed != seed) continue;
      series += std::to_string(rec.iteration);
      series.push_back(' ');
      series += format_g12(rec.eta);
      series.push_back('\n');
    }
    const std::string name =
        "eta_" + scheme + "_s" + std::to_string(seed) + ".dat";
    const std::string path = (fs::path(out_dir) / name).string();
    atomic_write(path, series, /*binary=*/false);
    written.push_back(path);
    index += name;
    index.push_back('\n');
  }
  const std::string index_path = (fs::path(out_dir) / "index.txt").string();
  atomic_write(index_path, index, /*binary=*/false);
  written.push_back(index_path);
  return written;
}

std::vector<std::string> verify_csv(const std::string& csv_path) {
  const fs::path dir = fs::path(csv_path).parent_path();
  const std::vector<MetricsRecord> records = read_csv(csv_path);
  const RunSpec spec = parse_config((dir / "config.txt").string());

  // Final row per (scheme, seed).
  std::vector<const MetricsRecord*> finals;
  for (const MetricsRecord& rec : records) {
    auto it = std::find_if(finals.begin(), finals.end(),
                           [&](const MetricsRecord* r) {
                             return r->scheme == rec.scheme &&
                                    r->seed == rec.seed;
                           });
    if (it == finals.end()) {
      finals.push_back(&rec);
    } else if (rec.iteration >= (*it)->iteration) {
      *it = &rec;
    }
  }

  std::vector<std::string> failures;
  for (const MetricsRecord* rec : finals) {
    ScenarioConfig scenario = spec.scenario;
    scenario.rng_seed = rec->seed;
    const Topology top = build_topology(scenario);

    double recomputed = 0.0;
    const Scheme scheme = scheme_from_name(rec->scheme);
    switch (scheme) {
      case Scheme::maxpower:
        recomputed = evaluate(top, max_power_policy(top.num_sbs(),
                                                    scenario.frame_len,
                                                    scenario.max_power_w()))
                         .eta;
        break;
      case Scheme::abs:
        recomputed =
            evaluate(top, abs_policy(top, spec.abs, scenario.frame_len)).eta;
        break;
      case Scheme::dpt:
      case Scheme::ddpg: {
        const std::string weights_path =
            (dir / weights_filename(scheme, rec->seed)).string();
        const ActorWeights w = load_weights(weights_path);
        const StateMatrix state = observe(top);
        const auto [alloc, trace] =
            forward(state.norm, w, scenario.max_power_w());
        recomputed = evaluate(top, alloc).eta;
        break;
      }
    }

    const double tol = 1e-9 * std::max(1.0, std::abs(rec->eta));
    if (std::abs(recomputed - rec->eta) > tol) {
      failures.push_back(rec->run_id + ": recorded eta " +
                         format_g12(rec->eta) + " but recomputed " +
                         format_g12(recomputed));
    }
  }
  return failures;
}

}  // namespace icic
