#pragma once

#include "safeopt/types.hpp"

#include <functional>
#include <vector>

namespace safeopt {

/// Generalized pattern search settings. The poll set is the 2n coordinate
/// directions, visited in the order +e1, -e1, ..., +en, -en.
struct PatternSearchConfig {
  double initial_mesh = 1.0;
  double mesh_tolerance = 0.01;
  /// Polled points with every constraint value <= this count as feasible.
  double constraint_tolerance = 0.01;
  double contraction = 0.5;
  double expansion = 1.0;
  int max_evaluations = 2000;

  void validate() const;
};

/// Objective value and constraint values (c_i(x) <= 0 convention) at a point.
struct Evaluation {
  double value = 0.0;
  std::vector<double> constraints;
};

using Evaluator = std::function<Evaluation(const Point&)>;

struct PatternSearchResult {
  Point x;
  double value = 0.0;
  /// Mesh dropped below the tolerance (as opposed to running out of budget).
  bool converged = false;
  int evaluations = 0;
  int iterations = 0;
  double final_mesh = 0.0;
  /// Objective of every accepted incumbent, starting with x0.
  std::vector<double> accepted_values;
};

bool feasible(const Evaluation& e, double tolerance);

/// Extreme-barrier GPS maximization over `box` starting from a feasible x0.
/// Throws PreconditionError when x0 is outside the box or infeasible.
PatternSearchResult gps_maximize(const Evaluator& evaluate, const Box& box, const Point& x0,
                                 const PatternSearchConfig& config);

/// Same search with separate objective and constraint callables.
PatternSearchResult gps_maximize(const std::function<double(const Point&)>& objective,
                                 const std::vector<std::function<double(const Point&)>>& constraints,
                                 const Box& box, const Point& x0,
                                 const PatternSearchConfig& config);

}  // namespace safeopt
