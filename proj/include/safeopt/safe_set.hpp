#pragma once

#include "safeopt/gaussian_process.hpp"
#include "safeopt/types.hpp"

#include <cstddef>
#include <optional>
#include <span>
#include <vector>

namespace safeopt {

/// Surrogates and data at one SafeOpt iteration.
///
/// Output 0 is the objective, outputs 1..J are constraints; every GP is
/// trained on the same sample inputs. Thresholds are indexed by constraint
/// (threshold(j) for j = 1..J).
class SafeOptState {
 public:
  SafeOptState(std::vector<GaussianProcess> gps, double beta, std::vector<double> thresholds,
               std::vector<Sample> samples, int iteration = 0);

  /// Fits one GP per output to `samples`.
  static SafeOptState from_samples(const std::vector<KernelSpec>& kernels, double beta,
                                   std::vector<double> thresholds, std::vector<Sample> samples);

  std::size_t num_outputs() const { return gps_.size(); }
  std::size_t num_constraints() const { return gps_.size() - 1; }
  Eigen::Index dim() const { return gps_.front().dim(); }

  const GaussianProcess& gp(std::size_t output) const { return gps_.at(output); }
  const std::vector<GaussianProcess>& gps() const { return gps_; }
  double threshold(std::size_t constraint) const { return thresholds_.at(constraint - 1); }
  const std::vector<double>& thresholds() const { return thresholds_; }
  double beta() const { return beta_; }
  const std::vector<Sample>& samples() const { return samples_; }
  int iteration() const { return iteration_; }

  /// Confidence bounds of output j at x.
  ConfidenceBounds output_bounds(std::size_t output, const Point& x) const {
    return gps_.at(output).bounds(x, beta_);
  }

  /// New state with `sample` appended to every GP and the iteration advanced.
  SafeOptState with_sample(const Sample& sample) const;

  /// Index of the sample with the smallest measured objective.
  std::optional<std::size_t> incumbent() const;

 private:
  std::vector<GaussianProcess> gps_;
  double beta_;
  std::vector<double> thresholds_;
  std::vector<Sample> samples_;
  int iteration_;
};

struct SafetyVerdict {
  bool is_safe = false;
  /// max_j (u_n(x, j) - threshold_j); the point is safe iff this is <= 0.
  double worst_margin = 0.0;
};

/// Safe-set membership: u_n(x, j) <= threshold_j for every constraint.
/// The objective GP is never consulted.
SafetyVerdict is_safe(const SafeOptState& state, const Point& x);

/// worst_margin for every column of a dim x N matrix of points.
Eigen::VectorXd safety_margins(const SafeOptState& state, const Eigen::MatrixXd& points);

struct SafeUpperMinimum {
  std::size_t index = 0;
  Point point;
  double value = 0.0;
};

/// Safe candidate with the smallest objective upper bound. Ties keep the
/// first candidate in enumeration order. Throws EmptySafeSetError when no
/// candidate is safe.
SafeUpperMinimum min_safe_upper(const SafeOptState& state, std::span<const Point> candidates);

/// Minimizer test l_n(x, 0) <= l_star; the caller is responsible for safety.
bool is_minimizer(const SafeOptState& state, const Point& x, double l_star);

/// Constraint GPs (index j-1 for constraint j) with the optimistic artificial
/// observation (x, l_n(x, j)) appended.
std::vector<GaussianProcess> auxiliary_constraint_gps(const SafeOptState& state, const Point& x);

/// max_j (u_aux,j(probe) - threshold_j) for auxiliary GPs built at some x.
double hypothetical_margin(const SafeOptState& state, std::span<const GaussianProcess> auxiliary,
                           const Point& probe);

/// True iff observing l_n(x, j) at x for every constraint would certify
/// `probe` safe. Requires x != probe; x safe and probe unsafe are the
/// caller's responsibility.
bool is_expander(const SafeOptState& state, const Point& x, const Point& probe);

struct WidthChoice {
  double width = 0.0;
  std::size_t output = 0;
};

/// max_j w_n(x, j) over all outputs, smallest j on ties.
WidthChoice acquisition_width(const SafeOptState& state, const Point& x);

}  // namespace safeopt
