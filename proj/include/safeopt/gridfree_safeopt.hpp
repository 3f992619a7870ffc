#pragma once

#include "safeopt/pattern_search.hpp"
#include "safeopt/record.hpp"
#include "safeopt/safe_set.hpp"
#include "safeopt/sampling.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace safeopt {

struct InitGuessConfig {
  int m0 = 100;
  SamplerKind sampler = SamplerKind::kLatinHypercube;
  std::uint64_t seed = 0;
  /// Also offer the measured samples that are currently safe as safe starts.
  bool seed_with_samples = false;

  void validate() const;
};

struct GridFreeConfig {
  double epsilon1 = 0.1;
  double epsilon2 = 0.1;
  double penalty = 100.0;
  int max_iterations = 50;
  InitGuessConfig init;
  PatternSearchConfig solver;
  /// Cap on the number of expander-search starts per iteration; 0 means all.
  int max_starts = 0;
  /// Restrict the minimizer search to constraint widths only.
  bool p1_constraints_only = false;

  void validate() const;
};

/// Output indices the minimizer and expander searches iterate over.
std::vector<std::size_t> width_outputs(const SafeOptState& state, bool constraints_only);

struct P1Result {
  Point x;
  std::size_t k = 0;
  double w = 0.0;
  double l_star = 0.0;
  Point start;
  /// Per-output solutions, empty entries for discarded sub-problems.
  std::vector<std::optional<PatternSearchResult>> per_output;
};

/// Minimizer search started from the incumbent sample (or, if that is not
/// feasible, from the safe sample with the smallest objective upper bound).
/// Throws EmptySafeSetError when every sub-problem is discarded.
P1Result solve_P1(const SafeOptState& state, const Box& box, const PatternSearchConfig& solver,
                  bool constraints_only = false);

/// w_n(x, k) minus the penalty on the hypothetical constraint violation at
/// `probe` after observing l_n(x, j) at x for every constraint.
double relaxed_q(const SafeOptState& state, const Point& x, const Point& probe, std::size_t k,
                 double penalty);

/// Slack used to turn the strict unsafety constraint into a closed one.
double strictness_slack(double threshold);

using StartPair = std::pair<Point, Point>;

struct P2Result {
  Point x;
  Point probe;
  std::size_t k = 0;
  double q = 0.0;
  double w = 0.0;
  /// Number of starts that passed the feasibility check.
  std::size_t feasible_starts = 0;
};

/// Expander search over the joint variable (x, x'). For each output the best
/// q over all feasible starts is kept; the winner across outputs maximizes
/// w_n(x, k). Returns nullopt when no start is feasible.
std::optional<P2Result> solve_P2(const SafeOptState& state, const Box& box,
                                 const PatternSearchConfig& solver,
                                 const std::vector<StartPair>& starts, double penalty,
                                 bool constraints_only = false);

/// True iff the hypothetical upper bounds at `probe` meet every threshold.
bool expander_gap_check(const SafeOptState& state, const Point& x, const Point& probe);

/// For every column of `safe`, the index of the nearest column of `unsafe`
/// (Euclidean distance, first index on ties).
std::vector<Eigen::Index> pair_nearest(const Eigen::MatrixXd& safe, const Eigen::MatrixXd& unsafe);

struct InitGuesses {
  std::vector<StartPair> pairs;
  std::size_t safe_count = 0;
  std::size_t unsafe_count = 0;
};

/// Samples m0 points, splits them into safe and unsafe under `state`, and
/// pairs every safe point with its nearest unsafe point. An empty pair list
/// with unsafe_count == 0 means no unsafe region was found. Throws
/// InitializationError when no safe point is available.
InitGuesses init_guesses(const SafeOptState& state, const Box& box, const InitGuessConfig& cfg,
                         std::uint64_t draw_seed);

/// Seed for the starting-point draw of iteration n.
std::uint64_t iteration_seed(std::uint64_t seed, int iteration);

struct GridFreeStepResult {
  Point next;
  std::string branch;
  P1Result p1;
  std::optional<P2Result> p2;
  bool gap_check_passed = false;
  InitGuesses init;
  double optimizer_seconds = 0.0;
  double expander_seconds = 0.0;
};

GridFreeStepResult gridfree_step(const SafeOptState& state, const Box& box,
                                 const GridFreeConfig& cfg);

ExperimentRecord gridfree_run(const SafeOptState& initial, const Box& box,
                              const GridFreeConfig& cfg, const PlantFn& plant);

}  // namespace safeopt
