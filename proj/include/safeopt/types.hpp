#pragma once

#include <Eigen/Core>

#include <vector>

namespace safeopt {

using Point = Eigen::VectorXd;

/// Axis-aligned search box A.
struct Box {
  Eigen::VectorXd lower;
  Eigen::VectorXd upper;

  Eigen::Index dim() const { return lower.size(); }
  bool contains(const Point& x, double tol = 0.0) const;
  Point clip(const Point& x) const;
  /// Throws InputError unless lower < upper componentwise and sizes agree.
  void validate() const;
};

/// One measured sample: outputs[0] is the objective, outputs[j] constraint j.
struct Sample {
  Point x;
  Eigen::VectorXd outputs;
};

}  // namespace safeopt
