#pragma once

#include "safeopt/gaussian_process.hpp"
#include "safeopt/grid_safeopt.hpp"
#include "safeopt/gridfree_safeopt.hpp"
#include "safeopt/plant.hpp"
#include "safeopt/record.hpp"
#include "safeopt/sampling.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace safeopt {

/// Quadratic objective scale * ||x - center||^2 with linear or ball
/// constraints; handy for toy studies with known answers.
struct SyntheticConstraint {
  enum class Kind { kLinear, kBall };
  Kind kind = Kind::kLinear;
  /// Linear: normal . x - offset. Ball: ||x - center||^2 - radius^2.
  Eigen::VectorXd normal;
  double offset = 0.0;
  Eigen::VectorXd center;
  double radius = 1.0;

  double operator()(const Point& x) const;
};

struct SyntheticPlantConfig {
  Eigen::VectorXd center;
  double scale = 1.0;
  std::vector<SyntheticConstraint> constraints;
  double noise_std = 0.0;

  Eigen::VectorXd exact(const Point& x) const;
};

struct CascadePlantConfig {
  PlantModel model;
  PlantObjectiveConfig objective;
  double noise_std = 0.0;
};

using PlantConfig = std::variant<CascadePlantConfig, SyntheticPlantConfig>;

struct InitialPoint {
  Point x;
  /// Measured outputs; measured through the plant when absent.
  std::optional<Eigen::VectorXd> outputs;
};

struct VolumeConfig {
  Eigen::Index count = 500000;
  SamplerKind sampler = SamplerKind::kLatinHypercube;
};

struct ExperimentConfig {
  std::string algorithm;
  std::uint64_t seed = 0;
  Box box;
  double beta = 3.0;
  std::vector<double> thresholds;
  std::vector<KernelSpec> kernels;
  std::vector<InitialPoint> initial;
  GridSpec grid;
  bool grid_include_initial = true;
  GridRunConfig grid_run;
  GridFreeConfig gridfree;
  PlantConfig plant;
  std::optional<VolumeConfig> volume;
  std::filesystem::path output_directory = ".";
  /// Normalized configuration echoed into the record.
  nlohmann::json echo;

  std::size_t num_outputs() const { return kernels.size(); }
};

/// Parses and validates a configuration document. Unknown keys, missing
/// blocks and bad values raise ConfigError naming the field.
ExperimentConfig parse_config(const nlohmann::json& doc);
ExperimentConfig load_config(const std::filesystem::path& path);

/// Measurement callable for the configured plant, noise seeded from `seed`.
PlantFn make_plant(const PlantConfig& plant, std::uint64_t seed);

/// Measures any initial point lacking outputs and fits the GPs.
SafeOptState initial_state(const ExperimentConfig& cfg, const PlantFn& plant,
                           std::vector<Sample>* measured = nullptr);

/// Runs the configured algorithm end to end.
ExperimentRecord run_experiment(const ExperimentConfig& cfg);

/// Rebuilds the final surrogate state of a recorded run from its config echo.
SafeOptState final_state(const ExperimentRecord& record);

/// Safe-set fraction of the final state of a recorded run.
double record_safe_volume(const ExperimentRecord& record, Eigen::Index count,
                          SamplerKind sampler = SamplerKind::kLatinHypercube);

struct ComparisonRow {
  std::string algorithm;
  std::size_t runs = 0;
  Point best_x;
  double best_objective_mean = 0.0;
  double best_objective_std = 0.0;
  double wall_seconds_mean = 0.0;
  double iterations_mean = 0.0;
};

struct Comparison {
  std::vector<ComparisonRow> rows;
};

/// Groups records by algorithm. Throws ConfigError when the records were
/// produced on different plants or boxes.
Comparison compare_runs(const std::vector<ExperimentRecord>& records);

/// Writes comparison.csv and comparison_timing.csv into `directory`.
void write_comparison(const Comparison& comparison, const std::vector<ExperimentRecord>& records,
                      const std::filesystem::path& directory);

}  // namespace safeopt
