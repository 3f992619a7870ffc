#include "safeopt/gridfree_safeopt.hpp"

#include "driver_util.hpp"
#include "safeopt/errors.hpp"
#include "safeopt/logging.hpp"

#include <cmath>
#include <limits>

namespace safeopt {

namespace {

std::vector<ConfidenceBounds> all_bounds(const SafeOptState& state, const Point& x) {
  std::vector<ConfidenceBounds> b;
  b.reserve(state.num_outputs());
  for (std::size_t j = 0; j < state.num_outputs(); ++j) b.push_back(state.output_bounds(j, x));
  return b;
}

double safety_margin(const SafeOptState& state, const std::vector<ConfidenceBounds>& b) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < b.size(); ++j) worst = std::max(worst, b[j].upper - state.threshold(j));
  return worst;
}

// max_j (u_n(x', j) - threshold_j - slack_j); non-negative iff x' is strictly unsafe.
double unsafety_excess(const SafeOptState& state, const std::vector<ConfidenceBounds>& b) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < b.size(); ++j) {
    const double t = state.threshold(j);
    worst = std::max(worst, b[j].upper - t - strictness_slack(t));
  }
  return worst;
}

Box joint_box(const Box& box) {
  const Eigen::Index n = box.dim();
  Box joint;
  joint.lower.resize(2 * n);
  joint.upper.resize(2 * n);
  joint.lower << box.lower, box.lower;
  joint.upper << box.upper, box.upper;
  return joint;
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

void InitGuessConfig::validate() const {
  if (m0 < 2) throw InputError("m0 must be at least 2");
}

void GridFreeConfig::validate() const {
  if (!(epsilon1 > 0.0) || !(epsilon2 > 0.0)) throw InputError("epsilon1 and epsilon2 must be positive");
  if (!(penalty > 0.0)) throw InputError("penalty weight must be positive");
  if (max_iterations < 0) throw InputError("max_iterations must be non-negative");
  if (max_starts < 0) throw InputError("max_starts must be non-negative");
  init.validate();
  solver.validate();
}

std::vector<std::size_t> width_outputs(const SafeOptState& state, bool constraints_only) {
  std::vector<std::size_t> ks;
  for (std::size_t k = constraints_only ? 1 : 0; k < state.num_outputs(); ++k) ks.push_back(k);
  return ks;
}

P1Result solve_P1(const SafeOptState& state, const Box& box, const PatternSearchConfig& solver,
                  bool constraints_only) {
  if (state.samples().empty()) throw PreconditionError("minimizer search needs at least one sample");
  std::vector<Point> sample_points;
  sample_points.reserve(state.samples().size());
  for (const auto& s : state.samples()) sample_points.push_back(s.x);
  const SafeUpperMinimum best_upper = min_safe_upper(state, sample_points);

  P1Result result;
  result.l_star = best_upper.value;

  auto evaluator = [&](std::size_t k) {
    return [&state, &result, k](const Point& x) {
      const auto b = all_bounds(state, x);
      Evaluation e;
      e.value = b[k].width;
      e.constraints.reserve(b.size());
      for (std::size_t j = 1; j < b.size(); ++j) e.constraints.push_back(b[j].upper - state.threshold(j));
      e.constraints.push_back(b[0].lower - result.l_star);
      return e;
    };
  };

  const Point incumbent = state.samples()[*state.incumbent()].x;
  result.start = incumbent;
  if (!box.contains(incumbent) || !feasible(evaluator(0)(incumbent), solver.constraint_tolerance)) {
    log_info("incumbent is not feasible for the minimizer search; starting from the best safe upper bound");
    result.start = best_upper.point;
  }

  const auto ks = width_outputs(state, constraints_only);
  result.per_output.assign(state.num_outputs(), std::nullopt);
  bool found = false;
  for (std::size_t k : ks) {
    const Evaluator eval = evaluator(k);
    PatternSearchResult r;
    try {
      r = gps_maximize(eval, box, result.start, solver);
    } catch (const PreconditionError&) {
      continue;
    }
    if (!feasible(eval(r.x), solver.constraint_tolerance)) continue;
    if (!found || r.value > result.w) {
      result.x = r.x;
      result.k = k;
      result.w = r.value;
      found = true;
    }
    result.per_output[k] = std::move(r);
  }
  if (!found) throw EmptySafeSetError("every minimizer sub-problem was infeasible");
  return result;
}

double strictness_slack(double threshold) { return 1e-9 * std::abs(threshold) + 1e-12; }

double relaxed_q(const SafeOptState& state, const Point& x, const Point& probe, std::size_t k,
                 double penalty) {
  if (k >= state.num_outputs()) throw InputError("relaxed_q: output index out of range");
  const double w = state.output_bounds(k, x).width;
  const auto aux = auxiliary_constraint_gps(state, x);
  const double excess = hypothetical_margin(state, aux, probe);
  return w - penalty * std::max(0.0, excess);
}

std::optional<P2Result> solve_P2(const SafeOptState& state, const Box& box,
                                 const PatternSearchConfig& solver,
                                 const std::vector<StartPair>& starts, double penalty,
                                 bool constraints_only) {
  if (!(penalty > 0.0)) throw InputError("penalty weight must be positive");
  const Eigen::Index n = state.dim();
  const Box joint = joint_box(box);
  const double tol = solver.constraint_tolerance;

  auto evaluator = [&state, n, penalty, tol](std::size_t k) {
    return [&state, n, penalty, tol, k](const Point& z) {
      const Point x = z.head(n);
      const Point probe = z.tail(n);
      const auto bx = all_bounds(state, x);
      const auto bp = all_bounds(state, probe);
      Evaluation e;
      e.constraints.reserve(state.num_constraints() + 1);
      for (std::size_t j = 1; j < bx.size(); ++j) e.constraints.push_back(bx[j].upper - state.threshold(j));
      // Shifted by the tolerance so that accepted probes are strictly unsafe.
      e.constraints.push_back(tol - unsafety_excess(state, bp));
      if (!feasible({0.0, e.constraints}, tol)) {
        e.value = std::numeric_limits<double>::quiet_NaN();
        return e;
      }
      const auto aux = auxiliary_constraint_gps(state, x);
      const double excess = hypothetical_margin(state, aux, probe);
      e.value = bx[k].width - penalty * std::max(0.0, excess);
      return e;
    };
  };

  std::vector<Point> feasible_starts;
  for (const auto& [x, probe] : starts) {
    if (x.size() != n || probe.size() != n) throw InputError("expander start has the wrong dimension");
    if (!box.contains(x) || !box.contains(probe)) continue;
    if (safety_margin(state, all_bounds(state, x)) > tol) continue;
    if (unsafety_excess(state, all_bounds(state, probe)) < 0.0) continue;
    Point z(2 * n);
    z << x, probe;
    feasible_starts.push_back(std::move(z));
  }
  if (feasible_starts.empty()) return std::nullopt;

  std::optional<P2Result> best;
  for (std::size_t k : width_outputs(state, constraints_only)) {
    const Evaluator eval = evaluator(k);
    std::optional<PatternSearchResult> best_k;
    for (const auto& z0 : feasible_starts) {
      PatternSearchResult r;
      try {
        r = gps_maximize(eval, joint, z0, solver);
      } catch (const PreconditionError&) {
        continue;
      }
      if (!best_k || r.value > best_k->value) best_k = std::move(r);
    }
    if (!best_k) continue;
    const Point x = best_k->x.head(n);
    const double w = state.output_bounds(k, x).width;
    if (!best || w > best->w) {
      best = P2Result{x, best_k->x.tail(n), k, best_k->value, w, feasible_starts.size()};
    }
  }
  return best;
}

bool expander_gap_check(const SafeOptState& state, const Point& x, const Point& probe) {
  const auto aux = auxiliary_constraint_gps(state, x);
  return hypothetical_margin(state, aux, probe) <= 0.0;
}

std::vector<Eigen::Index> pair_nearest(const Eigen::MatrixXd& safe, const Eigen::MatrixXd& unsafe) {
  if (unsafe.cols() == 0) throw InputError("pair_nearest: no unsafe points");
  if (safe.rows() != unsafe.rows()) throw InputError("pair_nearest: dimension mismatch");
  std::vector<Eigen::Index> nearest(static_cast<std::size_t>(safe.cols()));
  for (Eigen::Index i = 0; i < safe.cols(); ++i) {
    Eigen::Index best = 0;
    double best_d = std::numeric_limits<double>::infinity();
    for (Eigen::Index j = 0; j < unsafe.cols(); ++j) {
      const double d = (safe.col(i) - unsafe.col(j)).norm();
      if (d < best_d) {
        best_d = d;
        best = j;
      }
    }
    nearest[static_cast<std::size_t>(i)] = best;
  }
  return nearest;
}

std::uint64_t iteration_seed(std::uint64_t seed, int iteration) {
  return splitmix64(seed ^ splitmix64(static_cast<std::uint64_t>(iteration)));
}

InitGuesses init_guesses(const SafeOptState& state, const Box& box, const InitGuessConfig& cfg,
                         std::uint64_t draw_seed) {
  cfg.validate();
  const SampleBatch batch = draw_samples(cfg.sampler, cfg.m0, box, draw_seed);
  const Eigen::VectorXd margins = safety_margins(state, batch.points);
  std::vector<Eigen::Index> safe_idx;
  std::vector<Eigen::Index> unsafe_idx;
  for (Eigen::Index i = 0; i < batch.size(); ++i) (margins[i] <= 0.0 ? safe_idx : unsafe_idx).push_back(i);

  std::vector<Point> safe_points;
  if (cfg.seed_with_samples) {
    for (const auto& s : state.samples()) {
      if (is_safe(state, s.x).is_safe) safe_points.push_back(s.x);
    }
  }
  for (Eigen::Index i : safe_idx) safe_points.push_back(batch.point(i));

  InitGuesses out;
  out.safe_count = safe_points.size();
  out.unsafe_count = unsafe_idx.size();
  if (safe_points.empty()) {
    throw InitializationError(
        "no sampled starting point is safe; increase m0 or enable seed_with_samples");
  }
  if (unsafe_idx.empty()) return out;

  Eigen::MatrixXd safe(state.dim(), static_cast<Eigen::Index>(safe_points.size()));
  for (std::size_t i = 0; i < safe_points.size(); ++i) safe.col(static_cast<Eigen::Index>(i)) = safe_points[i];
  Eigen::MatrixXd unsafe(state.dim(), static_cast<Eigen::Index>(unsafe_idx.size()));
  for (std::size_t i = 0; i < unsafe_idx.size(); ++i) unsafe.col(static_cast<Eigen::Index>(i)) = batch.points.col(unsafe_idx[i]);
  const auto nearest = pair_nearest(safe, unsafe);
  out.pairs.reserve(safe_points.size());
  for (std::size_t i = 0; i < nearest.size(); ++i) {
    out.pairs.emplace_back(safe_points[i], unsafe.col(nearest[i]));
  }
  return out;
}

GridFreeStepResult gridfree_step(const SafeOptState& state, const Box& box,
                                 const GridFreeConfig& cfg) {
  GridFreeStepResult result;
  const auto opt_start = detail::Clock::now();
  result.p1 = solve_P1(state, box, cfg.solver, cfg.p1_constraints_only);
  result.optimizer_seconds = detail::seconds_since(opt_start);

  const auto exp_start = detail::Clock::now();
  result.init = init_guesses(state, box, cfg.init, iteration_seed(cfg.init.seed, state.iteration()));
  if (!result.init.pairs.empty()) {
    std::vector<StartPair> starts = result.init.pairs;
    if (cfg.max_starts > 0 && starts.size() > static_cast<std::size_t>(cfg.max_starts)) {
      starts.resize(static_cast<std::size_t>(cfg.max_starts));
    }
    result.p2 = solve_P2(state, box, cfg.solver, starts, cfg.penalty, cfg.p1_constraints_only);
    if (result.p2) result.gap_check_passed = expander_gap_check(state, result.p2->x, result.p2->probe);
  }
  result.expander_seconds = detail::seconds_since(exp_start);

  if (result.p2 && result.gap_check_passed && result.p2->w > result.p1.w) {
    result.next = result.p2->x;
    result.branch = "expander";
  } else {
    result.next = result.p1.x;
    result.branch = "minimizer";
  }
  return result;
}

ExperimentRecord gridfree_run(const SafeOptState& initial, const Box& box,
                              const GridFreeConfig& cfg, const PlantFn& plant) {
  cfg.validate();
  const auto start = detail::Clock::now();
  ExperimentRecord record;
  record.algorithm = "grid-free";
  IncumbentTracker tracker(initial.thresholds());
  append_initial_rows(record, tracker, initial.samples());
  record.stop_reason = StopReason::kMaxIterations;

  SafeOptState state = initial;
  Sample previous = detail::reference_sample(initial);
  try {
    for (int n = 1; n <= cfg.max_iterations; ++n) {
      const auto iter_start = detail::Clock::now();
      const GridFreeStepResult step = gridfree_step(state, box, cfg);
      const Eigen::VectorXd y = detail::measure(plant, step.next, state.num_outputs());
      state = state.with_sample({step.next, y});

      IterationRow row;
      row.iteration = n;
      row.x = step.next;
      row.outputs = y;
      row.branch = step.branch;
      row.optimizer_seconds = step.optimizer_seconds;
      row.expander_seconds = step.expander_seconds;
      row.total_seconds = detail::seconds_since(iter_start);
      append_row(record, tracker, std::move(row));
      record.iterations = n;
      record.last_point_displacement = (step.next - previous.x).norm();
      record.last_objective_displacement = std::abs(y[0] - previous.outputs[0]);
      previous = {step.next, y};
      if (record.last_point_displacement <= cfg.epsilon1 &&
          record.last_objective_displacement <= cfg.epsilon2) {
        record.stop_reason = StopReason::kTolerance;
        break;
      }
    }
  } catch (const std::exception& e) {
    record.stop_reason = StopReason::kAborted;
    record.message = e.what();
    log_warning(std::string("grid-free run aborted: ") + e.what());
  }
  detail::finish(record, start);
  return record;
}

}  // namespace safeopt
