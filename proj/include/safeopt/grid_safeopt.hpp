#pragma once

#include "safeopt/record.hpp"
#include "safeopt/safe_set.hpp"

#include <optional>
#include <vector>

namespace safeopt {

/// Cartesian lattice over a box plus optional extra points (for example an
/// initial safe set that does not sit on the lattice).
struct GridSpec {
  Box box;
  std::vector<int> counts;
  std::vector<Point> extra_points;

  void validate() const;
  /// Lattice size (product of counts), extras excluded.
  Eigen::Index lattice_size() const;
  /// All points, one per column: the lattice with the last dimension varying
  /// fastest, then the extra points not already on the lattice.
  Eigen::MatrixXd points() const;
};

struct GridDiagnostics {
  std::vector<char> safe;
  std::vector<char> minimizer;
  std::vector<char> expander;
  std::size_t safe_count = 0;
  std::size_t minimizer_count = 0;
  std::size_t expander_count = 0;
  double l_star = 0.0;
  double optimizer_seconds = 0.0;
  double expander_seconds = 0.0;
};

struct GridStepResult {
  /// Empty when the minimizer and expander sets are both empty.
  std::optional<Eigen::Index> index;
  Point next;
  double width = 0.0;
  std::size_t output = 0;
  bool is_minimizer = false;
  bool is_expander = false;
  GridDiagnostics diagnostics;
};

/// One pass of the grid algorithm over precomputed grid points.
/// Throws EmptySafeSetError when no grid point is safe.
GridStepResult grid_step(const SafeOptState& state, const Eigen::MatrixXd& points);
GridStepResult grid_step(const SafeOptState& state, const GridSpec& grid);

struct GridRunConfig {
  int max_iterations = 50;
  /// Stop once the elapsed time passes this many seconds; <= 0 disables.
  double wall_clock_budget = 0.0;
};

ExperimentRecord grid_run(const SafeOptState& initial, const GridSpec& grid,
                          const GridRunConfig& config, const PlantFn& plant);

}  // namespace safeopt
