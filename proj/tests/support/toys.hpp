#pragma once

// Small seeded SafeOpt problems shared by unit and acceptance tests.

#include "safeopt/safe_set.hpp"

#include "oracles.hpp"
#include "random.hpp"

#include <cmath>
#include <random>
#include <vector>

namespace testing {

struct Toy {
  std::vector<safeopt::KernelSpec> kernels;
  std::vector<safeopt::Sample> samples;
  std::vector<double> thresholds;
  double beta = 3.0;

  safeopt::SafeOptState state() const {
    return safeopt::SafeOptState::from_samples(kernels, beta, thresholds, samples);
  }

  oracle::Problem problem() const {
    oracle::Problem p;
    p.kernels = kernels;
    p.thresholds = thresholds;
    p.beta = beta;
    for (const auto& s : samples) {
      p.x.push_back(s.x);
      p.y.push_back(s.outputs);
    }
    return p;
  }
};

/// Quadratic objective around `c`, linear constraint x_0 - b <= 0, samples
/// drawn from [lo, lo + spread]^dim.
inline Toy quadratic_toy(std::uint64_t seed, Eigen::Index dim, int constraints, int count) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Toy t;
  const double ls = 0.8 + u(rng);
  t.kernels.push_back({Eigen::VectorXd::Constant(dim, ls), 4.0, 1e-4, 0.0});
  for (int j = 0; j < constraints; ++j) {
    t.kernels.push_back({Eigen::VectorXd::Constant(dim, 1.0 + u(rng)), 1.0 + u(rng), 1e-4, 0.0});
    t.thresholds.push_back(0.0);
  }
  const safeopt::Point c = uniform_point(rng, dim, 0.0, 4.0);
  std::vector<double> offsets;
  for (int j = 0; j < constraints; ++j) offsets.push_back(1.5 + 2.0 * u(rng));
  for (int i = 0; i < count; ++i) {
    safeopt::Sample s;
    s.x = uniform_point(rng, dim, 0.0, 1.2);
    s.outputs.resize(1 + constraints);
    s.outputs[0] = (s.x - c).squaredNorm() / 4.0;
    for (int j = 0; j < constraints; ++j) {
      const double lin = s.x.sum() / std::sqrt(static_cast<double>(dim)) - offsets[static_cast<std::size_t>(j)];
      s.outputs[1 + j] = j % 2 == 0 ? lin : 0.5 * lin + 0.2 * std::sin(3.0 * s.x[0]);
    }
    t.samples.push_back(s);
  }
  return t;
}

/// 1-D problem on [0, 10]: objective (x - c)^2 / 10, constraint x - b, three
/// samples in [0.5, 2.5] (all safe since b >= 3).
inline Toy scan_toy(std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  Toy t;
  t.kernels.push_back({vec({2.0}), 4.0, 1e-4, 0.0});
  t.kernels.push_back({vec({2.0}), 4.0, 1e-4, 0.0});
  t.thresholds = {0.0};
  const double c = 2.0 + 6.0 * u(rng);
  const double b = 3.0 + 3.0 * u(rng);
  for (int i = 0; i < 3; ++i) {
    const double x = 0.5 + 2.0 * u(rng);
    t.samples.push_back({vec({x}), vec({(x - c) * (x - c) / 10.0, x - b})});
  }
  return t;
}

/// Lattice over [lo, hi]^dim with `per_dim` points per axis, last axis fastest.
inline Eigen::MatrixXd lattice(Eigen::Index dim, int per_dim, double lo, double hi) {
  Eigen::Index n = 1;
  for (Eigen::Index d = 0; d < dim; ++d) n *= per_dim;
  Eigen::MatrixXd pts(dim, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    Eigen::Index rest = i;
    for (Eigen::Index d = dim - 1; d >= 0; --d) {
      const Eigen::Index k = rest % per_dim;
      rest /= per_dim;
      pts(d, i) = lo + (hi - lo) * static_cast<double>(k) / (per_dim - 1);
    }
  }
  return pts;
}

}  // namespace testing
