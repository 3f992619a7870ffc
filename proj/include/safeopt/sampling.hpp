#pragma once

#include "safeopt/safe_set.hpp"
#include "safeopt/types.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace safeopt {

enum class SamplerKind { kLatinHypercube, kUniformRandom };

std::string to_string(SamplerKind kind);
/// Accepts "latin-hypercube" / "lhs" and "uniform-random" / "random".
SamplerKind sampler_from_string(const std::string& text);

struct SampleBatch {
  /// One point per column.
  Eigen::MatrixXd points;
  SamplerKind sampler = SamplerKind::kLatinHypercube;
  std::uint64_t seed = 0;

  Eigen::Index size() const { return points.cols(); }
  Point point(Eigen::Index i) const { return points.col(i); }
};

SampleBatch latin_hypercube(Eigen::Index count, const Box& box, std::uint64_t seed);
SampleBatch uniform_random(Eigen::Index count, const Box& box, std::uint64_t seed);
SampleBatch draw_samples(SamplerKind kind, Eigen::Index count, const Box& box, std::uint64_t seed);

/// Fraction of `count` sampled points of `box` that are safe under `state`.
double safe_volume_estimate(const SafeOptState& state, const Box& box, Eigen::Index count,
                            SamplerKind sampler, std::uint64_t seed);

/// Fraction of columns of `points` that are safe under `state`.
double safe_fraction(const SafeOptState& state, const Eigen::MatrixXd& points);

}  // namespace safeopt
