// safeopt: run, compare and inspect safe optimization experiments.

#include "safeopt/errors.hpp"
#include "safeopt/experiment.hpp"
#include "safeopt/logging.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <iostream>
#include <optional>

namespace {

enum ExitCode { kOk = 0, kUsage = 1, kConfig = 2, kRuntime = 3, kIo = 4, kMismatch = 5 };

struct IoError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

safeopt::ExperimentRecord load_record(const std::filesystem::path& path) {
  if (!std::filesystem::exists(path)) throw IoError("no such record: " + path.string());
  try {
    return safeopt::read_record(path);
  } catch (const std::exception& e) {
    throw IoError("cannot read record " + path.string() + ": " + e.what());
  }
}

int cmd_run(const std::string& config_path, std::optional<std::uint64_t> seed,
            std::optional<std::string> out) {
  nlohmann::json doc;
  {
    std::ifstream in(config_path);
    if (!in) throw IoError("cannot open " + config_path);
    try {
      doc = nlohmann::json::parse(in, nullptr, true, true);
    } catch (const nlohmann::json::parse_error& e) {
      throw safeopt::ConfigError("<file>", std::string("malformed configuration: ") + e.what());
    }
  }
  if (seed) doc["seed"] = *seed;
  safeopt::ExperimentConfig cfg = safeopt::parse_config(doc);
  if (out) cfg.output_directory = *out;

  const safeopt::ExperimentRecord record = safeopt::run_experiment(cfg);
  safeopt::RecordPaths paths;
  try {
    paths = safeopt::write_record(record, cfg.output_directory);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
  std::printf("%s seed %llu: %d iterations, stop=%s, best objective %.6g\n", record.algorithm.c_str(),
              static_cast<unsigned long long>(record.seed), record.iterations,
              safeopt::to_string(record.stop_reason).c_str(), record.best_objective);
  if (record.safe_volume) std::printf("safe volume %.6g\n", *record.safe_volume);
  std::printf("wrote %s\n", paths.summary_json.string().c_str());
  if (record.stop_reason == safeopt::StopReason::kAborted) {
    std::fprintf(stderr, "run aborted: %s\n", record.message.c_str());
    return kRuntime;
  }
  return kOk;
}

int cmd_compare(const std::vector<std::string>& inputs, const std::string& out) {
  std::vector<safeopt::ExperimentRecord> records;
  for (const auto& p : inputs) records.push_back(load_record(p));
  safeopt::Comparison cmp;
  try {
    cmp = safeopt::compare_runs(records);
  } catch (const safeopt::ConfigError& e) {
    std::fprintf(stderr, "records are not comparable: %s\n", e.what());
    return kMismatch;
  }
  try {
    safeopt::write_comparison(cmp, records, out);
  } catch (const std::exception& e) {
    throw IoError(e.what());
  }
  std::printf("%-10s %5s %14s %12s %10s\n", "algorithm", "runs", "best (mean)", "std", "wall [s]");
  for (const auto& r : cmp.rows) {
    std::printf("%-10s %5zu %14.6g %12.4g %10.3g\n", r.algorithm.c_str(), r.runs,
                r.best_objective_mean, r.best_objective_std, r.wall_seconds_mean);
  }
  return kOk;
}

int cmd_volume(const std::string& input, long long count, const std::string& sampler) {
  if (count < 1) {
    std::fprintf(stderr, "--count must be positive\n");
    return kUsage;
  }
  const auto record = load_record(input);
  const double v = safeopt::record_safe_volume(record, static_cast<Eigen::Index>(count),
                                               safeopt::sampler_from_string(sampler));
  std::printf("%.6g\n", v);
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Safe Bayesian optimization experiments"};
  app.require_subcommand(1);

  std::string config_path;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> run_out;
  bool verbose = false;
  app.add_flag("-v,--verbose", verbose, "Log progress to stderr");

  auto* run = app.add_subcommand("run", "Run one experiment from a configuration file");
  run->add_option("config", config_path, "Configuration file (JSON)")->required();
  run->add_option("--seed", seed, "Override the master seed");
  run->add_option("--out", run_out, "Output directory");

  std::vector<std::string> records;
  std::string compare_out = ".";
  auto* compare = app.add_subcommand("compare", "Summarize several records of the same plant");
  compare->add_option("records", records, "Record summary files (.json)")->required();
  compare->add_option("--out", compare_out, "Output directory");

  std::string volume_input;
  long long count = 500000;
  std::string sampler = "latin-hypercube";
  auto* volume = app.add_subcommand("volume", "Estimate the final safe-set fraction of a record");
  volume->add_option("record", volume_input, "Record summary file (.json)")->required();
  volume->add_option("--count", count, "Number of sampled points")->required();
  volume->add_option("--sampler", sampler, "latin-hypercube or uniform-random");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kUsage;
  }
  safeopt::set_log_level(verbose ? safeopt::LogLevel::kInfo : safeopt::LogLevel::kWarning);

  try {
    if (*run) return cmd_run(config_path, seed, run_out);
    if (*compare) return cmd_compare(records, compare_out);
    if (*volume) return cmd_volume(volume_input, count, sampler);
  } catch (const safeopt::ConfigError& e) {
    std::fprintf(stderr, "configuration error: %s\n", e.what());
    return kConfig;
  } catch (const IoError& e) {
    std::fprintf(stderr, "I/O error: %s\n", e.what());
    return kIo;
  } catch (const std::exception& e) {
    std::fprintf(stderr, "error: %s\n", e.what());
    return kRuntime;
  }
  return kUsage;
}
