#include "safeopt/sampling.hpp"

#include "safeopt/errors.hpp"

#include <algorithm>
#include <numeric>
#include <random>

namespace safeopt {

namespace {

constexpr Eigen::Index kVolumeChunk = 4096;

void check_count(Eigen::Index count) {
  if (count < 1) throw InputError("sample count must be at least 1");
}

// Map unit-cube coordinates to the box, never leaving it through round-off.
void scale_to_box(Eigen::MatrixXd& unit, const Box& box) {
  const Eigen::VectorXd span = box.upper - box.lower;
  for (Eigen::Index c = 0; c < unit.cols(); ++c) {
    unit.col(c) = (box.lower + span.cwiseProduct(unit.col(c))).cwiseMax(box.lower).cwiseMin(box.upper);
  }
}

}  // namespace

std::string to_string(SamplerKind kind) {
  return kind == SamplerKind::kLatinHypercube ? "latin-hypercube" : "uniform-random";
}

SamplerKind sampler_from_string(const std::string& text) {
  if (text == "latin-hypercube" || text == "lhs") return SamplerKind::kLatinHypercube;
  if (text == "uniform-random" || text == "random") return SamplerKind::kUniformRandom;
  throw InputError("unknown sampler '" + text + "'");
}

SampleBatch latin_hypercube(Eigen::Index count, const Box& box, std::uint64_t seed) {
  check_count(count);
  box.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd points(box.dim(), count);
  std::vector<Eigen::Index> strata(static_cast<std::size_t>(count));
  const double n = static_cast<double>(count);
  for (Eigen::Index d = 0; d < box.dim(); ++d) {
    std::iota(strata.begin(), strata.end(), Eigen::Index{0});
    std::shuffle(strata.begin(), strata.end(), rng);
    for (Eigen::Index i = 0; i < count; ++i) {
      const double s = static_cast<double>(strata[static_cast<std::size_t>(i)]);
      double v = (s + unit(rng)) / n;
      // Keep the coordinate strictly inside its stratum.
      v = std::min(v, std::nextafter((s + 1.0) / n, 0.0));
      points(d, i) = std::max(v, s / n);
    }
  }
  scale_to_box(points, box);
  return {std::move(points), SamplerKind::kLatinHypercube, seed};
}

SampleBatch uniform_random(Eigen::Index count, const Box& box, std::uint64_t seed) {
  check_count(count);
  box.validate();
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  Eigen::MatrixXd points(box.dim(), count);
  for (Eigen::Index i = 0; i < count; ++i) {
    for (Eigen::Index d = 0; d < box.dim(); ++d) points(d, i) = unit(rng);
  }
  scale_to_box(points, box);
  return {std::move(points), SamplerKind::kUniformRandom, seed};
}

SampleBatch draw_samples(SamplerKind kind, Eigen::Index count, const Box& box,
                         std::uint64_t seed) {
  return kind == SamplerKind::kLatinHypercube ? latin_hypercube(count, box, seed)
                                              : uniform_random(count, box, seed);
}

double safe_fraction(const SafeOptState& state, const Eigen::MatrixXd& points) {
  if (points.cols() == 0) throw InputError("safe_fraction: no points");
  Eigen::Index safe = 0;
  for (Eigen::Index start = 0; start < points.cols(); start += kVolumeChunk) {
    const Eigen::Index len = std::min(kVolumeChunk, points.cols() - start);
    const Eigen::VectorXd margins = safety_margins(state, points.middleCols(start, len));
    safe += (margins.array() <= 0.0).count();
  }
  return static_cast<double>(safe) / static_cast<double>(points.cols());
}

double safe_volume_estimate(const SafeOptState& state, const Box& box, Eigen::Index count,
                            SamplerKind sampler, std::uint64_t seed) {
  if (box.dim() != state.dim()) throw InputError("safe_volume_estimate: box dimension mismatch");
  return safe_fraction(state, draw_samples(sampler, count, box, seed).points);
}

}  // namespace safeopt
