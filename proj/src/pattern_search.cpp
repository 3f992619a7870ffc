#include "safeopt/pattern_search.hpp"

#include "safeopt/errors.hpp"

#include <cmath>

namespace safeopt {

void PatternSearchConfig::validate() const {
  if (!(initial_mesh > 0.0)) throw InputError("pattern search: initial_mesh must be positive");
  if (!(mesh_tolerance > 0.0) || !(mesh_tolerance < initial_mesh)) {
    throw InputError("pattern search: mesh_tolerance must be in (0, initial_mesh)");
  }
  if (!(constraint_tolerance >= 0.0)) {
    throw InputError("pattern search: constraint_tolerance must be non-negative");
  }
  if (!(contraction > 0.0 && contraction < 1.0)) {
    throw InputError("pattern search: contraction must lie in (0, 1)");
  }
  if (!(expansion >= 1.0)) throw InputError("pattern search: expansion must be >= 1");
  if (max_evaluations < 1) throw InputError("pattern search: max_evaluations must be >= 1");
}

bool feasible(const Evaluation& e, double tolerance) {
  for (double c : e.constraints) {
    if (!(c <= tolerance)) return false;
  }
  return std::isfinite(e.value);
}

PatternSearchResult gps_maximize(const Evaluator& evaluate, const Box& box, const Point& x0,
                                 const PatternSearchConfig& config) {
  config.validate();
  if (!box.contains(x0)) throw PreconditionError("pattern search: start point lies outside the box");

  PatternSearchResult result;
  result.x = x0;
  const Evaluation start = evaluate(x0);
  result.evaluations = 1;
  if (!feasible(start, config.constraint_tolerance)) {
    throw PreconditionError("pattern search: start point is infeasible");
  }
  result.value = start.value;
  result.accepted_values.push_back(start.value);

  double mesh = config.initial_mesh;
  const Eigen::Index n = x0.size();
  while (mesh >= config.mesh_tolerance && result.evaluations < config.max_evaluations) {
    ++result.iterations;
    bool improved = false;
    for (Eigen::Index d = 0; d < n && !improved; ++d) {
      for (double sign : {1.0, -1.0}) {
        if (result.evaluations >= config.max_evaluations) break;
        Point candidate = result.x;
        candidate[d] += sign * mesh;
        candidate = box.clip(candidate);
        if (candidate[d] == result.x[d]) continue;
        const Evaluation e = evaluate(candidate);
        ++result.evaluations;
        if (feasible(e, config.constraint_tolerance) && e.value > result.value) {
          result.x = std::move(candidate);
          result.value = e.value;
          result.accepted_values.push_back(e.value);
          improved = true;
          break;
        }
      }
    }
    mesh *= improved ? config.expansion : config.contraction;
  }
  result.final_mesh = mesh;
  result.converged = mesh < config.mesh_tolerance;
  return result;
}

PatternSearchResult gps_maximize(const std::function<double(const Point&)>& objective,
                                 const std::vector<std::function<double(const Point&)>>& constraints,
                                 const Box& box, const Point& x0,
                                 const PatternSearchConfig& config) {
  const Evaluator combined = [&](const Point& x) {
    Evaluation e;
    e.value = objective(x);
    e.constraints.reserve(constraints.size());
    for (const auto& c : constraints) e.constraints.push_back(c(x));
    return e;
  };
  return gps_maximize(combined, box, x0, config);
}

}  // namespace safeopt
