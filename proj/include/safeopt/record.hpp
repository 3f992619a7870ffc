#pragma once

#include "safeopt/types.hpp"

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <limits>
#include <optional>
#include <string>
#include <vector>

namespace safeopt {

/// Measurement device: returns objective followed by every constraint.
using PlantFn = std::function<Eigen::VectorXd(const Point&)>;

enum class StopReason {
  kMaxIterations,
  kTolerance,
  kNoCandidate,
  kWallClock,
  kAborted,
};

std::string to_string(StopReason reason);
StopReason stop_reason_from_string(const std::string& text);

/// One plant measurement. Iteration 0 rows are the initial safe set.
struct IterationRow {
  int iteration = 0;
  Point x;
  Eigen::VectorXd outputs;
  std::string branch;
  double optimizer_seconds = 0.0;
  double expander_seconds = 0.0;
  double total_seconds = 0.0;
  /// Best objective among measured-safe rows so far; NaN before the first.
  double incumbent_best = std::numeric_limits<double>::quiet_NaN();
};

struct ExperimentRecord {
  std::string algorithm;
  std::uint64_t seed = 0;
  std::vector<IterationRow> rows;
  StopReason stop_reason = StopReason::kMaxIterations;
  std::string message;
  double last_point_displacement = std::numeric_limits<double>::quiet_NaN();
  double last_objective_displacement = std::numeric_limits<double>::quiet_NaN();
  Point best_x;
  double best_objective = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  double wall_seconds = 0.0;
  std::optional<double> safe_volume;
  nlohmann::json config = nlohmann::json::object();

  std::size_t plant_calls() const { return rows.size(); }
};

/// Tracks the best measured point whose constraints all met their thresholds.
class IncumbentTracker {
 public:
  explicit IncumbentTracker(std::vector<double> thresholds) : thresholds_(std::move(thresholds)) {}

  void observe(const Point& x, const Eigen::VectorXd& outputs);
  bool has_value() const { return best_x_.size() > 0; }
  const Point& best_x() const { return best_x_; }
  double best_objective() const { return best_; }

 private:
  std::vector<double> thresholds_;
  Point best_x_;
  double best_ = std::numeric_limits<double>::quiet_NaN();
};

/// Appends a row and refreshes the record's incumbent fields.
void append_row(ExperimentRecord& record, IncumbentTracker& tracker, IterationRow row);

/// Logs every initial sample as an iteration-0 row with branch "initial".
void append_initial_rows(ExperimentRecord& record, IncumbentTracker& tracker,
                         const std::vector<Sample>& samples);

struct RecordPaths {
  std::filesystem::path rows_csv;
  std::filesystem::path summary_json;
  std::filesystem::path timing_json;
};

/// `<algorithm>_seed<seed>` inside `directory`.
RecordPaths record_paths(const std::filesystem::path& directory, const std::string& algorithm,
                         std::uint64_t seed);

/// Writes the rows CSV, the summary JSON (with config echo) and a separate
/// timing JSON. The CSV and summary hold no wall-clock data, so identical
/// runs give identical bytes.
RecordPaths write_record(const ExperimentRecord& record, const std::filesystem::path& directory);

/// Loads a record from its summary JSON; sibling CSV and timing files are
/// located through the paths stored in the summary.
ExperimentRecord read_record(const std::filesystem::path& summary_json);

std::string rows_to_csv(const ExperimentRecord& record);
void rows_from_csv(const std::string& text, ExperimentRecord& record);
nlohmann::json summary_to_json(const ExperimentRecord& record);

}  // namespace safeopt
