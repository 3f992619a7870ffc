#pragma once

#include "safeopt/types.hpp"

#include <Eigen/Core>

#include <vector>

namespace safeopt {

/// Squared-exponential (ARD) kernel hyperparameters plus the constant prior
/// mean of one output.
struct KernelSpec {
  Eigen::VectorXd lengthscales;
  double signal_variance = 1.0;
  double noise_variance = 0.0;
  double prior_mean = 0.0;

  Eigen::Index dim() const { return lengthscales.size(); }
  void validate() const;
};

/// signal_variance * exp(-0.5 * sum_d ((a_d - b_d) / lengthscale_d)^2)
double kernel_eval(const KernelSpec& spec, const Point& a, const Point& b);

struct Posterior {
  double mean = 0.0;
  double variance = 0.0;
};

struct ConfidenceBounds {
  double lower = 0.0;
  double upper = 0.0;
  double width = 0.0;
};

struct BatchPosterior {
  Eigen::VectorXd mean;
  Eigen::VectorXd variance;
};

/// Exact GP regression with a cached Cholesky factor of K + noise * I.
///
/// Values are immutable once built: add_observation() and
/// with_artificial_observation() return new processes, so a fitted GP can be
/// queried from several threads at once.
class GaussianProcess {
 public:
  /// Diagonal jitter (relative to the signal variance) used when the kernel
  /// matrix is singular and the noise variance is zero.
  static constexpr double kJitter = 1e-10;
  /// Pivots below this (relative) value count as a failed factorization.
  static constexpr double kPivotFloor = 1e-11;
  /// Negative variances down to -kVarianceFloor * signal_variance are clamped.
  static constexpr double kVarianceFloor = 1e-9;

  explicit GaussianProcess(KernelSpec kernel);
  GaussianProcess(KernelSpec kernel, const std::vector<Point>& inputs,
                  const std::vector<double>& outputs);

  Posterior posterior(const Point& x) const;
  /// Column-wise posterior for a dim x N matrix of query points.
  BatchPosterior posterior(const Eigen::MatrixXd& points) const;

  ConfidenceBounds bounds(const Point& x, double beta) const;

  /// Rank-one extension of the factorization; falls back to a full refit
  /// only when the new pivot breaks down.
  GaussianProcess add_observation(const Point& x, double y) const;

  /// Hypothetical posterior with (x, y) appended. Never touches *this.
  GaussianProcess with_artificial_observation(const Point& x, double y) const {
    return add_observation(x, y);
  }

  const KernelSpec& kernel() const { return kernel_; }
  Eigen::Index dim() const { return kernel_.dim(); }
  Eigen::Index size() const { return outputs_.size(); }
  /// Training inputs, one per column.
  const Eigen::MatrixXd& inputs() const { return inputs_; }
  const Eigen::VectorXd& outputs() const { return outputs_; }
  double jitter() const { return jitter_; }

 private:
  void refit();
  bool try_append(const Point& x, double y);
  Eigen::VectorXd cross_covariance(const Point& x) const;
  double clamp_variance(double variance) const;
  void check_dim(const Point& x) const;

  KernelSpec kernel_;
  Eigen::VectorXd inv_lengthscales_;
  Eigen::MatrixXd inputs_;
  Eigen::MatrixXd scaled_inputs_;
  Eigen::VectorXd outputs_;
  Eigen::MatrixXd chol_;
  Eigen::VectorXd whitened_;  // L^{-1} (y - prior_mean)
  double jitter_ = 0.0;
};

/// l = mu - beta*sigma, u = mu + beta*sigma.
ConfidenceBounds bounds(const GaussianProcess& gp, const Point& x, double beta);
ConfidenceBounds bounds_from(const Posterior& post, double beta);

}  // namespace safeopt
