#include "safeopt/grid_safeopt.hpp"

#include "driver_util.hpp"
#include "safeopt/errors.hpp"
#include "safeopt/logging.hpp"

#include <algorithm>
#include <limits>

namespace safeopt {

namespace {

constexpr Eigen::Index kProbeChunk = 256;

struct GridBounds {
  Eigen::MatrixXd lower;  // outputs x N
  Eigen::MatrixXd upper;
};

GridBounds grid_bounds(const SafeOptState& state, const Eigen::MatrixXd& points) {
  const auto outputs = static_cast<Eigen::Index>(state.num_outputs());
  GridBounds b{Eigen::MatrixXd(outputs, points.cols()), Eigen::MatrixXd(outputs, points.cols())};
  for (Eigen::Index j = 0; j < outputs; ++j) {
    const BatchPosterior post = state.gp(static_cast<std::size_t>(j)).posterior(points);
    for (Eigen::Index i = 0; i < points.cols(); ++i) {
      const ConfidenceBounds cb = bounds_from({post.mean[i], post.variance[i]}, state.beta());
      b.lower(j, i) = cb.lower;
      b.upper(j, i) = cb.upper;
    }
  }
  return b;
}

// First unsafe probe certified by the auxiliary GPs, if any.
bool certifies_any(const SafeOptState& state, const std::vector<GaussianProcess>& aux,
                   const Eigen::MatrixXd& probes) {
  for (Eigen::Index start = 0; start < probes.cols(); start += kProbeChunk) {
    const Eigen::Index len = std::min(kProbeChunk, probes.cols() - start);
    const Eigen::MatrixXd chunk = probes.middleCols(start, len);
    Eigen::VectorXd worst = Eigen::VectorXd::Constant(len, -std::numeric_limits<double>::infinity());
    for (std::size_t j = 1; j <= aux.size(); ++j) {
      const BatchPosterior post = aux[j - 1].posterior(chunk);
      for (Eigen::Index i = 0; i < len; ++i) {
        const double upper = bounds_from({post.mean[i], post.variance[i]}, state.beta()).upper;
        worst[i] = std::max(worst[i], upper - state.threshold(j));
      }
    }
    if ((worst.array() <= 0.0).any()) return true;
  }
  return false;
}

}  // namespace

void GridSpec::validate() const {
  box.validate();
  if (counts.size() != static_cast<std::size_t>(box.dim())) {
    throw InputError("grid needs one point count per dimension");
  }
  for (int c : counts) {
    if (c < 1) throw InputError("grid point counts must be positive");
  }
  for (const auto& p : extra_points) {
    if (!box.contains(p)) throw InputError("extra grid point lies outside the box");
  }
}

Eigen::Index GridSpec::lattice_size() const {
  Eigen::Index n = 1;
  for (int c : counts) n *= c;
  return n;
}

Eigen::MatrixXd GridSpec::points() const {
  validate();
  const Eigen::Index dim = box.dim();
  const Eigen::Index n = lattice_size();
  std::vector<Eigen::VectorXd> axes(static_cast<std::size_t>(dim));
  for (Eigen::Index d = 0; d < dim; ++d) {
    const int c = counts[static_cast<std::size_t>(d)];
    auto& axis = axes[static_cast<std::size_t>(d)];
    if (c == 1) {
      axis = Eigen::VectorXd::Constant(1, 0.5 * (box.lower[d] + box.upper[d]));
    } else {
      axis = Eigen::VectorXd::LinSpaced(c, box.lower[d], box.upper[d]);
    }
  }
  std::vector<Eigen::VectorXd> cols;
  cols.reserve(static_cast<std::size_t>(n) + extra_points.size());
  std::vector<int> idx(static_cast<std::size_t>(dim), 0);
  for (Eigen::Index k = 0; k < n; ++k) {
    Eigen::VectorXd p(dim);
    for (Eigen::Index d = 0; d < dim; ++d) p[d] = axes[static_cast<std::size_t>(d)][idx[static_cast<std::size_t>(d)]];
    cols.push_back(std::move(p));
    for (Eigen::Index d = dim - 1; d >= 0; --d) {
      auto& i = idx[static_cast<std::size_t>(d)];
      if (++i < counts[static_cast<std::size_t>(d)]) break;
      i = 0;
    }
  }
  for (const auto& extra : extra_points) {
    const bool duplicate = std::any_of(cols.begin(), cols.end(), [&](const Eigen::VectorXd& c) { return c == extra; });
    if (!duplicate) cols.push_back(extra);
  }
  Eigen::MatrixXd out(dim, static_cast<Eigen::Index>(cols.size()));
  for (std::size_t i = 0; i < cols.size(); ++i) out.col(static_cast<Eigen::Index>(i)) = cols[i];
  return out;
}

GridStepResult grid_step(const SafeOptState& state, const GridSpec& grid) {
  return grid_step(state, grid.points());
}

GridStepResult grid_step(const SafeOptState& state, const Eigen::MatrixXd& points) {
  if (points.rows() != state.dim()) throw InputError("grid dimension does not match the state");
  const Eigen::Index n = points.cols();
  GridStepResult result;
  GridDiagnostics& diag = result.diagnostics;

  const auto opt_start = detail::Clock::now();
  const GridBounds b = grid_bounds(state, points);
  diag.safe.assign(static_cast<std::size_t>(n), 0);
  diag.minimizer.assign(static_cast<std::size_t>(n), 0);
  diag.expander.assign(static_cast<std::size_t>(n), 0);
  std::vector<Eigen::Index> unsafe;
  for (Eigen::Index i = 0; i < n; ++i) {
    double worst = -std::numeric_limits<double>::infinity();
    for (std::size_t j = 1; j < state.num_outputs(); ++j) {
      worst = std::max(worst, b.upper(static_cast<Eigen::Index>(j), i) - state.threshold(j));
    }
    if (worst <= 0.0) {
      diag.safe[static_cast<std::size_t>(i)] = 1;
      ++diag.safe_count;
    } else {
      unsafe.push_back(i);
    }
  }
  if (diag.safe_count == 0) throw EmptySafeSetError("no grid point satisfies the safety constraints");

  std::optional<Eigen::Index> best_upper;
  for (Eigen::Index i = 0; i < n; ++i) {
    if (diag.safe[static_cast<std::size_t>(i)] && (!best_upper || b.upper(0, i) < b.upper(0, *best_upper))) {
      best_upper = i;
    }
  }
  diag.l_star = b.upper(0, *best_upper);
  for (Eigen::Index i = 0; i < n; ++i) {
    if (diag.safe[static_cast<std::size_t>(i)] && b.lower(0, i) <= diag.l_star) {
      diag.minimizer[static_cast<std::size_t>(i)] = 1;
      ++diag.minimizer_count;
    }
  }
  diag.optimizer_seconds = detail::seconds_since(opt_start);

  const auto exp_start = detail::Clock::now();
  if (!unsafe.empty()) {
    Eigen::MatrixXd probes(points.rows(), static_cast<Eigen::Index>(unsafe.size()));
    for (std::size_t k = 0; k < unsafe.size(); ++k) probes.col(static_cast<Eigen::Index>(k)) = points.col(unsafe[k]);
    for (Eigen::Index i = 0; i < n; ++i) {
      if (!diag.safe[static_cast<std::size_t>(i)]) continue;
      const Point x = points.col(i);
      std::vector<GaussianProcess> aux;
      aux.reserve(state.num_constraints());
      for (std::size_t j = 1; j < state.num_outputs(); ++j) {
        aux.push_back(state.gp(j).with_artificial_observation(x, b.lower(static_cast<Eigen::Index>(j), i)));
      }
      if (certifies_any(state, aux, probes)) {
        diag.expander[static_cast<std::size_t>(i)] = 1;
        ++diag.expander_count;
      }
    }
  }
  diag.expander_seconds = detail::seconds_since(exp_start);

  const auto pick_start = detail::Clock::now();
  for (Eigen::Index i = 0; i < n; ++i) {
    const auto si = static_cast<std::size_t>(i);
    if (!diag.minimizer[si] && !diag.expander[si]) continue;
    double w = -1.0;
    std::size_t out = 0;
    for (Eigen::Index j = 0; j < b.lower.rows(); ++j) {
      const double wj = b.upper(j, i) - b.lower(j, i);
      if (wj > w) {
        w = wj;
        out = static_cast<std::size_t>(j);
      }
    }
    if (!result.index || w > result.width) {
      result.index = i;
      result.width = w;
      result.output = out;
    }
  }
  if (result.index) {
    result.next = points.col(*result.index);
    result.is_minimizer = diag.minimizer[static_cast<std::size_t>(*result.index)];
    result.is_expander = diag.expander[static_cast<std::size_t>(*result.index)];
  }
  diag.optimizer_seconds += detail::seconds_since(pick_start);
  return result;
}

ExperimentRecord grid_run(const SafeOptState& initial, const GridSpec& grid,
                          const GridRunConfig& config, const PlantFn& plant) {
  if (config.max_iterations < 0) throw InputError("max_iterations must be non-negative");
  const auto start = detail::Clock::now();
  ExperimentRecord record;
  record.algorithm = "grid";
  IncumbentTracker tracker(initial.thresholds());
  append_initial_rows(record, tracker, initial.samples());
  record.stop_reason = StopReason::kMaxIterations;

  const Eigen::MatrixXd points = grid.points();
  SafeOptState state = initial;
  Sample previous = detail::reference_sample(initial);
  try {
    for (int n = 1; n <= config.max_iterations; ++n) {
      if (config.wall_clock_budget > 0.0 && detail::seconds_since(start) > config.wall_clock_budget) {
        record.stop_reason = StopReason::kWallClock;
        break;
      }
      const auto iter_start = detail::Clock::now();
      const GridStepResult step = grid_step(state, points);
      if (!step.index) {
        record.stop_reason = StopReason::kNoCandidate;
        break;
      }
      const Eigen::VectorXd y = detail::measure(plant, step.next, state.num_outputs());
      state = state.with_sample({step.next, y});

      IterationRow row;
      row.iteration = n;
      row.x = step.next;
      row.outputs = y;
      row.branch = step.is_minimizer ? "minimizer" : "expander";
      row.optimizer_seconds = step.diagnostics.optimizer_seconds;
      row.expander_seconds = step.diagnostics.expander_seconds;
      row.total_seconds = detail::seconds_since(iter_start);
      append_row(record, tracker, std::move(row));
      record.iterations = n;
      record.last_point_displacement = (step.next - previous.x).norm();
      record.last_objective_displacement = std::abs(y[0] - previous.outputs[0]);
      previous = {step.next, y};
    }
  } catch (const std::exception& e) {
    record.stop_reason = StopReason::kAborted;
    record.message = e.what();
    log_warning(std::string("grid run aborted: ") + e.what());
  }
  detail::finish(record, start);
  return record;
}

}  // namespace safeopt
