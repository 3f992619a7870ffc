#pragma once

#include "safeopt/errors.hpp"
#include "safeopt/record.hpp"
#include "safeopt/safe_set.hpp"

#include <chrono>
#include <cmath>

namespace safeopt::detail {

using Clock = std::chrono::steady_clock;

inline double seconds_since(Clock::time_point start) {
  return std::chrono::duration<double>(Clock::now() - start).count();
}

/// Calls the plant and checks the shape and finiteness of its answer.
inline Eigen::VectorXd measure(const PlantFn& plant, const Point& x, std::size_t outputs) {
  Eigen::VectorXd y = plant(x);
  if (y.size() != static_cast<Eigen::Index>(outputs)) {
    throw PlantError("plant returned the wrong number of outputs");
  }
  if (!y.allFinite()) throw PlantError("plant returned a non-finite measurement");
  return y;
}

/// Measured point and objective the first iteration is compared against:
/// the best initial sample.
inline Sample reference_sample(const SafeOptState& state) {
  const auto best = state.incumbent();
  if (!best) throw PreconditionError("initial safe set is empty");
  return state.samples()[*best];
}

inline void finish(ExperimentRecord& record, Clock::time_point start) {
  record.wall_seconds = seconds_since(start);
}

}  // namespace safeopt::detail
