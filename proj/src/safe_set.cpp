#include "safeopt/safe_set.hpp"

#include "safeopt/errors.hpp"

#include <limits>

namespace safeopt {

SafeOptState::SafeOptState(std::vector<GaussianProcess> gps, double beta,
                           std::vector<double> thresholds, std::vector<Sample> samples,
                           int iteration)
    : gps_(std::move(gps)),
      beta_(beta),
      thresholds_(std::move(thresholds)),
      samples_(std::move(samples)),
      iteration_(iteration) {
  if (gps_.size() < 2) throw InputError("SafeOptState needs an objective and at least one constraint");
  if (thresholds_.size() != gps_.size() - 1) {
    throw InputError("SafeOptState: one threshold per constraint is required");
  }
  if (!(beta_ > 0.0)) throw InputError("SafeOptState: beta must be positive");
  if (iteration_ < 0) throw InputError("SafeOptState: iteration must be non-negative");
  for (const auto& gp : gps_) {
    if (gp.dim() != gps_.front().dim()) throw InputError("SafeOptState: GP dimensions differ");
    if (gp.size() != static_cast<Eigen::Index>(samples_.size())) {
      throw InputError("SafeOptState: every GP must be trained on the sample set");
    }
  }
  for (const auto& s : samples_) {
    if (s.x.size() != dim() || s.outputs.size() != static_cast<Eigen::Index>(gps_.size())) {
      throw InputError("SafeOptState: sample has the wrong dimension or output count");
    }
  }
}

SafeOptState SafeOptState::from_samples(const std::vector<KernelSpec>& kernels, double beta,
                                        std::vector<double> thresholds,
                                        std::vector<Sample> samples) {
  std::vector<Point> inputs;
  inputs.reserve(samples.size());
  for (const auto& s : samples) inputs.push_back(s.x);
  std::vector<GaussianProcess> gps;
  gps.reserve(kernels.size());
  for (std::size_t j = 0; j < kernels.size(); ++j) {
    std::vector<double> outputs;
    outputs.reserve(samples.size());
    for (const auto& s : samples) {
      if (s.outputs.size() != static_cast<Eigen::Index>(kernels.size())) {
        throw InputError("sample output count does not match the number of kernels");
      }
      outputs.push_back(s.outputs[static_cast<Eigen::Index>(j)]);
    }
    gps.emplace_back(kernels[j], inputs, outputs);
  }
  return SafeOptState(std::move(gps), beta, std::move(thresholds), std::move(samples), 0);
}

SafeOptState SafeOptState::with_sample(const Sample& sample) const {
  if (sample.outputs.size() != static_cast<Eigen::Index>(gps_.size())) {
    throw InputError("with_sample: output count does not match the number of GPs");
  }
  std::vector<GaussianProcess> gps;
  gps.reserve(gps_.size());
  for (std::size_t j = 0; j < gps_.size(); ++j) {
    gps.push_back(gps_[j].add_observation(sample.x, sample.outputs[static_cast<Eigen::Index>(j)]));
  }
  auto samples = samples_;
  samples.push_back(sample);
  return SafeOptState(std::move(gps), beta_, thresholds_, std::move(samples), iteration_ + 1);
}

std::optional<std::size_t> SafeOptState::incumbent() const {
  std::optional<std::size_t> best;
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    if (!best || samples_[i].outputs[0] < samples_[*best].outputs[0]) best = i;
  }
  return best;
}

SafetyVerdict is_safe(const SafeOptState& state, const Point& x) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j < state.num_outputs(); ++j) {
    worst = std::max(worst, state.output_bounds(j, x).upper - state.threshold(j));
  }
  return {worst <= 0.0, worst};
}

Eigen::VectorXd safety_margins(const SafeOptState& state, const Eigen::MatrixXd& points) {
  Eigen::VectorXd worst =
      Eigen::VectorXd::Constant(points.cols(), -std::numeric_limits<double>::infinity());
  for (std::size_t j = 1; j < state.num_outputs(); ++j) {
    const BatchPosterior post = state.gp(j).posterior(points);
    const Eigen::VectorXd upper =
        post.mean.array() + state.beta() * post.variance.array().sqrt();
    worst = worst.cwiseMax((upper.array() - state.threshold(j)).matrix());
  }
  return worst;
}

SafeUpperMinimum min_safe_upper(const SafeOptState& state, std::span<const Point> candidates) {
  std::optional<SafeUpperMinimum> best;
  for (std::size_t i = 0; i < candidates.size(); ++i) {
    if (!is_safe(state, candidates[i]).is_safe) continue;
    const double upper = state.output_bounds(0, candidates[i]).upper;
    if (!best || upper < best->value) best = SafeUpperMinimum{i, candidates[i], upper};
  }
  if (!best) throw EmptySafeSetError("no candidate point satisfies the safety constraints");
  return *best;
}

bool is_minimizer(const SafeOptState& state, const Point& x, double l_star) {
  return state.output_bounds(0, x).lower <= l_star;
}

std::vector<GaussianProcess> auxiliary_constraint_gps(const SafeOptState& state, const Point& x) {
  std::vector<GaussianProcess> aux;
  aux.reserve(state.num_constraints());
  for (std::size_t j = 1; j < state.num_outputs(); ++j) {
    const double optimistic = state.output_bounds(j, x).lower;
    aux.push_back(state.gp(j).with_artificial_observation(x, optimistic));
  }
  return aux;
}

double hypothetical_margin(const SafeOptState& state, std::span<const GaussianProcess> auxiliary,
                           const Point& probe) {
  double worst = -std::numeric_limits<double>::infinity();
  for (std::size_t j = 1; j <= auxiliary.size(); ++j) {
    const double upper = auxiliary[j - 1].bounds(probe, state.beta()).upper;
    worst = std::max(worst, upper - state.threshold(j));
  }
  return worst;
}

bool is_expander(const SafeOptState& state, const Point& x, const Point& probe) {
  if (x.size() != probe.size()) throw InputError("is_expander: dimension mismatch");
  if (x == probe) throw PreconditionError("is_expander: probe must differ from the candidate");
  const auto aux = auxiliary_constraint_gps(state, x);
  return hypothetical_margin(state, aux, probe) <= 0.0;
}

WidthChoice acquisition_width(const SafeOptState& state, const Point& x) {
  WidthChoice best{-1.0, 0};
  for (std::size_t j = 0; j < state.num_outputs(); ++j) {
    const double w = state.output_bounds(j, x).width;
    if (w > best.width) best = {w, j};
  }
  return best;
}

}  // namespace safeopt
