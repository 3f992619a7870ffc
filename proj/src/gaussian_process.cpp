#include "safeopt/gaussian_process.hpp"

#include "safeopt/errors.hpp"
#include "safeopt/logging.hpp"

#include <Eigen/Dense>

#include <cmath>
#include <sstream>

namespace safeopt {

void KernelSpec::validate() const {
  if (lengthscales.size() == 0) throw InputError("kernel needs at least one lengthscale");
  for (Eigen::Index d = 0; d < lengthscales.size(); ++d) {
    if (!(lengthscales[d] > 0.0) || !std::isfinite(lengthscales[d])) {
      throw InputError("kernel lengthscales must be positive and finite");
    }
  }
  if (!(signal_variance > 0.0) || !std::isfinite(signal_variance)) {
    throw InputError("kernel signal_variance must be positive");
  }
  if (!(noise_variance >= 0.0) || !std::isfinite(noise_variance)) {
    throw InputError("kernel noise_variance must be non-negative");
  }
  if (!std::isfinite(prior_mean)) throw InputError("kernel prior_mean must be finite");
}

double kernel_eval(const KernelSpec& spec, const Point& a, const Point& b) {
  if (a.size() != spec.dim() || b.size() != spec.dim()) {
    std::ostringstream msg;
    msg << "kernel_eval: point dimensions (" << a.size() << ", " << b.size()
        << ") do not match the " << spec.dim() << " lengthscales";
    throw InputError(msg.str());
  }
  const double r2 = ((a - b).array() / spec.lengthscales.array()).square().sum();
  return spec.signal_variance * std::exp(-0.5 * r2);
}

ConfidenceBounds bounds_from(const Posterior& post, double beta) {
  if (!(beta > 0.0)) throw InputError("beta must be positive");
  const double sigma = std::sqrt(post.variance);
  ConfidenceBounds b;
  b.lower = post.mean - beta * sigma;
  b.upper = post.mean + beta * sigma;
  b.width = b.upper - b.lower;
  return b;
}

ConfidenceBounds bounds(const GaussianProcess& gp, const Point& x, double beta) {
  return gp.bounds(x, beta);
}

GaussianProcess::GaussianProcess(KernelSpec kernel) : kernel_(std::move(kernel)) {
  kernel_.validate();
  inv_lengthscales_ = kernel_.lengthscales.cwiseInverse();
  inputs_.resize(kernel_.dim(), 0);
  scaled_inputs_.resize(kernel_.dim(), 0);
  outputs_.resize(0);
  chol_.resize(0, 0);
  whitened_.resize(0);
}

GaussianProcess::GaussianProcess(KernelSpec kernel, const std::vector<Point>& inputs,
                                 const std::vector<double>& outputs)
    : GaussianProcess(std::move(kernel)) {
  if (inputs.size() != outputs.size()) {
    throw InputError("GaussianProcess: inputs and outputs differ in length");
  }
  const auto n = static_cast<Eigen::Index>(inputs.size());
  inputs_.resize(dim(), n);
  outputs_.resize(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    check_dim(inputs[static_cast<std::size_t>(r)]);
    inputs_.col(r) = inputs[static_cast<std::size_t>(r)];
    outputs_[r] = outputs[static_cast<std::size_t>(r)];
  }
  refit();
}

void GaussianProcess::check_dim(const Point& x) const {
  if (x.size() != dim()) {
    std::ostringstream msg;
    msg << "GaussianProcess: point has dimension " << x.size() << ", expected " << dim();
    throw InputError(msg.str());
  }
}

Eigen::VectorXd GaussianProcess::cross_covariance(const Point& x) const {
  const Eigen::VectorXd xs = x.cwiseProduct(inv_lengthscales_);
  const Eigen::Index n = scaled_inputs_.cols();
  Eigen::VectorXd k(n);
  for (Eigen::Index r = 0; r < n; ++r) {
    k[r] = kernel_.signal_variance * std::exp(-0.5 * (scaled_inputs_.col(r) - xs).squaredNorm());
  }
  return k;
}

bool GaussianProcess::try_append(const Point& x, double y) {
  const Eigen::Index n = outputs_.size();
  const Eigen::VectorXd k = cross_covariance(x);
  Eigen::VectorXd row = k;
  if (n > 0) chol_.triangularView<Eigen::Lower>().solveInPlace(row);
  const double pivot2 =
      kernel_.signal_variance + kernel_.noise_variance + jitter_ - row.squaredNorm();
  if (!(pivot2 > kPivotFloor * kernel_.signal_variance)) return false;
  const double pivot = std::sqrt(pivot2);

  Eigen::MatrixXd grown = Eigen::MatrixXd::Zero(n + 1, n + 1);
  grown.topLeftCorner(n, n) = chol_;
  grown.block(n, 0, 1, n) = row.transpose();
  grown(n, n) = pivot;
  chol_.swap(grown);

  const double resid = y - kernel_.prior_mean - (n > 0 ? row.dot(whitened_) : 0.0);
  whitened_.conservativeResize(n + 1);
  whitened_[n] = resid / pivot;

  inputs_.conservativeResize(Eigen::NoChange, n + 1);
  inputs_.col(n) = x;
  scaled_inputs_.conservativeResize(Eigen::NoChange, n + 1);
  scaled_inputs_.col(n) = x.cwiseProduct(inv_lengthscales_);
  outputs_.conservativeResize(n + 1);
  outputs_[n] = y;
  return true;
}

void GaussianProcess::refit() {
  const Eigen::MatrixXd inputs = inputs_;
  const Eigen::VectorXd outputs = outputs_;
  for (int attempt = 0; attempt < 2; ++attempt) {
    inputs_.resize(dim(), 0);
    scaled_inputs_.resize(dim(), 0);
    outputs_.resize(0);
    chol_.resize(0, 0);
    whitened_.resize(0);
    bool ok = true;
    for (Eigen::Index r = 0; r < inputs.cols() && ok; ++r) {
      ok = try_append(inputs.col(r), outputs[r]);
    }
    if (ok) return;
    if (kernel_.noise_variance == 0.0 && jitter_ == 0.0) {
      jitter_ = kJitter * kernel_.signal_variance;
      log_info("kernel matrix is singular with zero noise variance; retrying with diagonal jitter");
      continue;
    }
    break;
  }
  throw NumericalError(
      "kernel matrix is not positive definite: duplicate or near-duplicate training inputs "
      "with zero noise variance");
}

double GaussianProcess::clamp_variance(double variance) const {
  if (variance >= 0.0) return variance;
  if (variance >= -kVarianceFloor * kernel_.signal_variance) return 0.0;
  std::ostringstream msg;
  msg << "posterior variance " << variance << " is negative beyond round-off";
  throw NumericalError(msg.str());
}

Posterior GaussianProcess::posterior(const Point& x) const {
  check_dim(x);
  if (outputs_.size() == 0) return {kernel_.prior_mean, kernel_.signal_variance};
  Eigen::VectorXd v = cross_covariance(x);
  chol_.triangularView<Eigen::Lower>().solveInPlace(v);
  Posterior post;
  post.mean = kernel_.prior_mean + v.dot(whitened_);
  post.variance = clamp_variance(kernel_.signal_variance - v.squaredNorm());
  return post;
}

BatchPosterior GaussianProcess::posterior(const Eigen::MatrixXd& points) const {
  if (points.rows() != dim()) {
    throw InputError("GaussianProcess: query matrix rows do not match the input dimension");
  }
  const Eigen::Index m = points.cols();
  BatchPosterior out;
  if (outputs_.size() == 0) {
    out.mean = Eigen::VectorXd::Constant(m, kernel_.prior_mean);
    out.variance = Eigen::VectorXd::Constant(m, kernel_.signal_variance);
    return out;
  }
  const Eigen::MatrixXd scaled = inv_lengthscales_.asDiagonal() * points;
  const Eigen::Index n = scaled_inputs_.cols();
  Eigen::MatrixXd cross(n, m);
  for (Eigen::Index c = 0; c < m; ++c) {
    for (Eigen::Index r = 0; r < n; ++r) {
      cross(r, c) = kernel_.signal_variance *
                    std::exp(-0.5 * (scaled_inputs_.col(r) - scaled.col(c)).squaredNorm());
    }
  }
  chol_.triangularView<Eigen::Lower>().solveInPlace(cross);
  out.mean = (cross.transpose() * whitened_).array() + kernel_.prior_mean;
  out.variance.resize(m);
  for (Eigen::Index c = 0; c < m; ++c) {
    out.variance[c] = clamp_variance(kernel_.signal_variance - cross.col(c).squaredNorm());
  }
  return out;
}

ConfidenceBounds GaussianProcess::bounds(const Point& x, double beta) const {
  return bounds_from(posterior(x), beta);
}

GaussianProcess GaussianProcess::add_observation(const Point& x, double y) const {
  check_dim(x);
  GaussianProcess next(*this);
  if (next.try_append(x, y)) return next;
  next.inputs_.conservativeResize(Eigen::NoChange, inputs_.cols() + 1);
  next.inputs_.col(inputs_.cols()) = x;
  next.outputs_.conservativeResize(outputs_.size() + 1);
  next.outputs_[outputs_.size()] = y;
  next.refit();
  return next;
}

}  // namespace safeopt
