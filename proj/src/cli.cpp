#include "icic/cli.hpp"

#include <cstdio>
#include <exception>
#include <filesystem>
#include <optional>

#include <CLI11.hpp>

#include "icic/bench.hpp"

namespace icic {

namespace fs = std::filesystem;

namespace {

int do_run(const std::string& config_path, std::optional<std::uint64_t> seed,
           const std::string& out_override) {
  RunSpec spec = parse_config(config_path);
  if (seed) spec.seeds = {*seed};
  if (!out_override.empty()) spec.output_dir = out_override;

  fs::create_directories(spec.output_dir);
  const std::string csv_path =
      (fs::path(spec.output_dir) / "results.csv").string();

  // Flush after every seed so an aborted run still leaves partial results.
  const ExperimentResult result = run_experiment(
      spec, [&](const std::vector<MetricsRecord>& so_far) {
        write_csv(so_far, csv_path);
      });
  write_csv(result.records, csv_path);

  // The resolved configuration lands next to the results so `verify` can
  // rebuild the exact runs.
  write_config(spec, (fs::path(spec.output_dir) / "config.txt").string());

  for (const SeedResult& sr : result.seed_results) {
    if (!sr.has_weights) continue;
    const std::string path =
        (fs::path(spec.output_dir) / weights_filename(spec.scheme, sr.seed))
            .string();
    save_weights(sr.weights, path);
  }

  for (const SeedResult& sr : result.seed_results) {
    const MetricsRecord* final_rec = nullptr;
    for (const MetricsRecord& rec : result.records) {
      if (rec.seed != sr.seed) continue;
      if (final_rec == nullptr || rec.iteration > final_rec->iteration) {
        final_rec = &rec;
      }
    }
    if (final_rec != nullptr) {
      std::printf("%s: final eta %s after %d iteration(s)\n",
                  final_rec->run_id.c_str(),
                  format_g12(final_rec->eta).c_str(),
                  final_rec->iteration + 1);
    }
  }
  std::printf("wrote %s (%zu rows)\n", csv_path.c_str(),
              result.records.size());
  return 0;
}

int do_verify(const std::string& csv_path) {
  const std::vector<std::string> failures = verify_csv(csv_path);
  if (failures.empty()) {
    std::printf("verify OK: %s\n", csv_path.c_str());
    return 0;
  }
  for (const std::string& failure : failures) {
    std::fprintf(stderr, "verify FAILED: %s\n", failure.c_str());
  }
  return 2;
}

int do_plotdata(const std::string& csv_path, const std::string& out_dir) {
  const std::vector<MetricsRecord> records = read_csv(csv_path);
  const std::vector<std::string> written = emit_plot_data(records, out_dir);
  std::printf("wrote %zu plot-data files under %s\n", written.size(),
              out_dir.c_str());
  return 0;
}

}  // namespace

int cli_main(const std::vector<std::string>& args) {
  CLI::App app{"Dense small-cell ICIC power-control benchmark"};
  app.require_subcommand(1);

  std::string config_path;
  std::string out_override;
  std::uint64_t seed_value = 0;
  CLI::App* run_cmd = app.add_subcommand("run", "run an experiment");
  run_cmd->add_option("--config", config_path, "config file")->required();
  CLI::Option* seed_opt =
      run_cmd->add_option("--seed", seed_value, "replace the seeds list");
  run_cmd->add_option("--out", out_override, "output directory override");

  std::string verify_csv_path;
  CLI::App* verify_cmd =
      app.add_subcommand("verify", "recompute final etas from a results CSV");
  verify_cmd->add_option("--csv", verify_csv_path, "results CSV")->required();

  std::string plot_csv_path;
  std::string plot_out_dir;
  CLI::App* plot_cmd =
      app.add_subcommand("plotdata", "emit per-run eta series files");
  plot_cmd->add_option("--csv", plot_csv_path, "results CSV")->required();
  plot_cmd->add_option("--out", plot_out_dir, "output directory")->required();

  std::vector<const char*> argv;
  argv.push_back("icicbench");
  for (const std::string& arg : args) argv.push_back(arg.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? 0 : 1;
  }

  try {
    if (run_cmd->parsed()) {
      std::optional<std::uint64_t> seed_override;
      if (seed_opt->count() > 0) seed_override = seed_value;
      return do_run(config_path, seed_override, out_override);
    }
    if (verify_cmd->parsed()) return do_verify(verify_csv_path);
    if (plot_cmd->parsed()) return do_plotdata(plot_csv_path, plot_out_dir);
  } catch (const ConfigError& err) {
    std::fprintf(stderr, "config error: %s\n", err.what());
    return 1;
  } catch (const std::exception& err) {
    std::fprintf(stderr, "error: %s\n", err.what());
    return 2;
  }
  return 1;
}

}  // namespace icic
