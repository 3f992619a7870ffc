#include "safeopt/plant.hpp"

#include "safeopt/errors.hpp"

#include <unsupported/Eigen/FFT>

#include <algorithm>
#include <cmath>
#include <complex>
#include <numbers>

namespace safeopt {

double SetpointSpec::at(double t, double timestep) const {
  if (!series.empty()) {
    const auto index = static_cast<std::size_t>(std::max(0.0, std::floor(t / timestep + 1e-9)));
    return series[std::min(index, series.size() - 1)];
  }
  const double tc = std::min(t, duration);
  const double raw = amplitude * std::sin(2.0 * std::numbers::pi * tc / period);
  return std::clamp(raw, low, high);
}

PlantModel PlantModel::second_order(double natural_frequency, double damping) {
  if (!(natural_frequency > 0.0) || !(damping >= 0.0)) {
    throw InputError("second-order drive needs a positive natural frequency and damping >= 0");
  }
  PlantModel m;
  const double w2 = natural_frequency * natural_frequency;
  m.numerator = {w2};
  m.denominator = {1.0, 2.0 * damping * natural_frequency, w2};
  return m;
}

void PlantModel::validate() const {
  if (denominator.empty() || denominator.front() == 0.0) {
    throw InputError("plant denominator needs a nonzero leading coefficient");
  }
  if (numerator.empty() || numerator.size() > denominator.size()) {
    throw InputError("plant transfer function must be proper");
  }
  if (!(timestep > 0.0)) throw InputError("plant timestep must be positive");
  if (!(horizon > 0.0)) throw InputError("plant horizon must be positive");
  if (!(saturation > 0.0)) throw InputError("plant saturation ceiling must be positive");
  if (setpoint.series.empty()) {
    if (!(setpoint.period > 0.0)) throw InputError("setpoint period must be positive");
    if (!(setpoint.duration >= 0.0)) throw InputError("setpoint duration must be non-negative");
    if (!(setpoint.low <= setpoint.high)) throw InputError("setpoint clamp range is empty");
  }
}

std::size_t PlantModel::steps() const {
  return static_cast<std::size_t>(std::llround(horizon / timestep));
}

std::vector<double> Trace::position_error() const {
  std::vector<double> e(position.size());
  for (std::size_t i = 0; i < e.size(); ++i) e[i] = position[i] - setpoint[i];
  return e;
}

namespace {

// Controllable canonical realization of the drive plus the speed integrator
// state and the position state.
struct LoopDynamics {
  Eigen::VectorXd a;  // monic denominator coefficients a1..am
  Eigen::VectorXd c;  // output row, coefficient of state i is the s^i term
  double d = 0.0;
  Gains gains;
  const PlantModel* model = nullptr;

  Eigen::Index order() const { return a.size(); }

  // Speed output and drive input for the given state and setpoint.
  std::pair<double, double> speed_and_input(const Eigen::VectorXd& s, double ps) const {
    const Eigen::Index m = order();
    const double p = s[m + 1];
    const double z = s[m];
    const double cx = m > 0 ? c.dot(s.head(m)) : 0.0;
    const double vref = gains.kp * (ps - p) + model->speed_feedforward;
    const double u = (gains.kv * (vref - cx) + gains.kvi * z) / (1.0 + gains.kv * d);
    return {cx + d * u, u};
  }

  Eigen::VectorXd derivative(const Eigen::VectorXd& s, double t) const {
    const Eigen::Index m = order();
    const double ps = model->setpoint.at(t, model->timestep);
    const auto [speed, u] = speed_and_input(s, ps);
    const double vref = gains.kp * (ps - s[m + 1]) + model->speed_feedforward;
    Eigen::VectorXd ds(m + 2);
    for (Eigen::Index i = 0; i + 1 < m; ++i) ds[i] = s[i + 1];
    if (m > 0) {
      double top = u;
      for (Eigen::Index i = 0; i < m; ++i) top -= a[m - 1 - i] * s[i];
      ds[m - 1] = top;
    }
    ds[m] = vref - speed;
    ds[m + 1] = speed;
    return ds;
  }
};

LoopDynamics realize(const PlantModel& model, const Gains& gains) {
  const double lead = model.denominator.front();
  const auto m = static_cast<Eigen::Index>(model.denominator.size() - 1);
  LoopDynamics dyn;
  dyn.gains = gains;
  dyn.model = &model;
  dyn.a.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) dyn.a[i] = model.denominator[static_cast<std::size_t>(i + 1)] / lead;
  // Numerator padded to degree m.
  Eigen::VectorXd b = Eigen::VectorXd::Zero(m + 1);
  const auto offset = static_cast<Eigen::Index>(model.denominator.size() - model.numerator.size());
  for (std::size_t i = 0; i < model.numerator.size(); ++i) {
    b[offset + static_cast<Eigen::Index>(i)] = model.numerator[i] / lead;
  }
  dyn.d = b[0];
  dyn.c.resize(m);
  for (Eigen::Index i = 0; i < m; ++i) dyn.c[i] = b[m - i] - dyn.d * dyn.a[m - 1 - i];
  if (1.0 + gains.kv * dyn.d == 0.0) throw PlantError("speed loop has an ill-posed algebraic loop");
  return dyn;
}

bool saturate(Eigen::VectorXd& s, double ceiling) {
  bool hit = false;
  for (Eigen::Index i = 0; i < s.size(); ++i) {
    if (std::isnan(s[i])) {
      s[i] = ceiling;
      hit = true;
    } else if (std::abs(s[i]) > ceiling) {
      s[i] = std::copysign(ceiling, s[i]);
      hit = true;
    }
  }
  return hit;
}

}  // namespace

Trace simulate(const PlantModel& model, const Gains& gains) {
  model.validate();
  const LoopDynamics dyn = realize(model, gains);
  const std::size_t steps = model.steps();
  const double h = model.timestep;
  const Eigen::Index m = dyn.order();

  Trace trace;
  trace.time.reserve(steps + 1);
  trace.position.reserve(steps + 1);
  trace.speed.reserve(steps + 1);
  trace.setpoint.reserve(steps + 1);

  Eigen::VectorXd s = Eigen::VectorXd::Zero(m + 2);
  auto record = [&](std::size_t k) {
    const double t = static_cast<double>(k) * h;
    const double ps = model.setpoint.at(t, h);
    const double speed = std::clamp(dyn.speed_and_input(s, ps).first, -model.saturation, model.saturation);
    trace.time.push_back(t);
    trace.position.push_back(s[m + 1]);
    trace.speed.push_back(std::isnan(speed) ? model.saturation : speed);
    trace.setpoint.push_back(ps);
  };

  record(0);
  for (std::size_t k = 0; k < steps; ++k) {
    const double t = static_cast<double>(k) * h;
    const Eigen::VectorXd k1 = dyn.derivative(s, t);
    const Eigen::VectorXd k2 = dyn.derivative(s + 0.5 * h * k1, t + 0.5 * h);
    const Eigen::VectorXd k3 = dyn.derivative(s + 0.5 * h * k2, t + 0.5 * h);
    const Eigen::VectorXd k4 = dyn.derivative(s + h * k3, t + h);
    s += (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    if (saturate(s, model.saturation)) trace.saturated = true;
    record(k + 1);
  }
  return trace;
}

void PlantObjectiveConfig::validate() const {
  if (!(gamma1 > 0.0) || !(gamma2 > 0.0)) throw InputError("gamma1 and gamma2 must be positive");
}

double objective_J(const std::vector<double>& position, const std::vector<double>& setpoint,
                   const std::vector<double>& speed, const PlantObjectiveConfig& cfg,
                   double timestep) {
  if (position.size() != setpoint.size() || position.size() != speed.size()) {
    throw InputError("objective_J: traces differ in length");
  }
  double l1 = 0.0;
  double peak = 0.0;
  for (std::size_t i = 0; i < position.size(); ++i) {
    l1 += std::abs(position[i] - setpoint[i]);
    peak = std::max(peak, std::abs(speed[i]));
  }
  return cfg.gamma1 * timestep * l1 + peak;
}

std::vector<std::size_t> find_peaks(const std::vector<double>& signal, double reference) {
  std::vector<double> a(signal.size());
  for (std::size_t i = 0; i < a.size(); ++i) a[i] = std::abs(signal[i] - reference);
  std::vector<std::size_t> peaks;
  for (std::size_t i = 1; i + 1 < a.size(); ++i) {
    if (!(a[i] > a[i - 1] && a[i] > a[i + 1])) continue;
    // Topographic prominence: drop to the lowest point before reaching
    // higher ground on either side (or the signal end).
    double left_min = a[i];
    for (std::size_t k = i; k-- > 0;) {
      if (a[k] > a[i]) break;
      left_min = std::min(left_min, a[k]);
    }
    double right_min = a[i];
    for (std::size_t k = i + 1; k < a.size(); ++k) {
      if (a[k] > a[i]) break;
      right_min = std::min(right_min, a[k]);
    }
    if (a[i] - std::max(left_min, right_min) > kPeakProminence) peaks.push_back(i);
  }
  return peaks;
}

double peak_slope(const std::vector<double>& signal, double timestep, double reference) {
  if (signal.size() < 3) throw InputError("peak_slope needs at least three samples");
  const auto peaks = find_peaks(signal, reference);
  if (peaks.size() < 2) return 0.0;
  const double n = static_cast<double>(peaks.size());
  double mt = 0.0;
  double ma = 0.0;
  for (std::size_t i : peaks) {
    mt += static_cast<double>(i) * timestep;
    ma += std::abs(signal[i] - reference);
  }
  mt /= n;
  ma /= n;
  double sxy = 0.0;
  double sxx = 0.0;
  for (std::size_t i : peaks) {
    const double dt = static_cast<double>(i) * timestep - mt;
    sxy += dt * (std::abs(signal[i] - reference) - ma);
    sxx += dt * dt;
  }
  return sxy / sxx;
}

double constraint_h(double p1, const PlantObjectiveConfig& cfg) {
  return cfg.gamma2 * (p1 - cfg.margin);
}

void TraceMetricsConfig::validate(std::size_t trace_length) const {
  if (!(n_s < n_p)) throw InputError("trace window needs n_s < n_P");
  if (n_p > trace_length) throw InputError("trace window ends past the trace");
  if (!(sample_rate > 0.0)) throw InputError("sample rate must be positive");
  if (!(f_lo > 0.0 && f_lo < f_hi && f_hi < sample_rate / 2.0)) {
    throw InputError("frequency band must satisfy 0 < f_lo < f_hi < sample_rate/2");
  }
}

double xi(std::size_t i, std::size_t n_s) {
  const double shift = static_cast<double>(i) - static_cast<double>(n_s) - 150.0;
  return 1.0 - 1.0 / (1.0 + std::exp(-shift / 10.0));
}

double e_avg(const std::vector<double>& position_error, const TraceMetricsConfig& cfg) {
  if (!(cfg.n_s < cfg.n_p)) throw InputError("e_avg needs n_s < n_P");
  if (cfg.n_p > position_error.size()) throw InputError("e_avg window ends past the trace");
  double sum = 0.0;
  for (std::size_t i = cfg.n_s; i < cfg.n_p; ++i) {
    sum += std::abs(xi(i, cfg.n_s) * position_error[i]);
  }
  return sum / static_cast<double>(cfg.n_p - cfg.n_s);
}

double fft_max(const std::vector<double>& velocity_error, const TraceMetricsConfig& cfg) {
  cfg.validate(velocity_error.size());
  const std::size_t n = cfg.n_p - cfg.n_s;
  std::vector<double> windowed(n);
  for (std::size_t i = 0; i < n; ++i) {
    windowed[i] = xi(cfg.n_s + i, cfg.n_s) * velocity_error[cfg.n_s + i];
  }
  Eigen::FFT<double> fft;
  fft.SetFlag(Eigen::FFT<double>::HalfSpectrum);
  std::vector<std::complex<double>> spectrum;
  fft.fwd(spectrum, windowed);
  double best = 0.0;
  const double resolution = cfg.sample_rate / static_cast<double>(n);
  for (std::size_t k = 0; k < spectrum.size(); ++k) {
    const double f = static_cast<double>(k) * resolution;
    if (f >= cfg.f_lo && f <= cfg.f_hi) best = std::max(best, std::abs(spectrum[k]));
  }
  return best;
}

CascadePlant::CascadePlant(PlantModel model, PlantObjectiveConfig objective, double noise_std,
                           std::uint64_t noise_seed)
    : model_(std::move(model)), objective_(objective), noise_std_(noise_std), rng_(noise_seed) {
  model_.validate();
  objective_.validate();
  if (!(noise_std_ >= 0.0)) throw InputError("noise standard deviation must be non-negative");
}

CascadeMeasurement CascadePlant::measure_exact(const Point& gains) const {
  if (gains.size() != 3) throw InputError("cascade plant expects (Kp, Kv, Kvi)");
  const Trace trace = simulate(model_, {gains[0], gains[1], gains[2]});
  CascadeMeasurement out;
  out.objective = objective_J(trace.position, trace.setpoint, trace.speed, objective_, model_.timestep);
  out.peak_slope = peak_slope(trace.position_error(), model_.timestep);
  if (trace.saturated) {
    out.peak_slope = std::max(out.peak_slope, model_.saturation / model_.horizon);
  }
  out.constraint = constraint_h(out.peak_slope, objective_);
  out.saturated = trace.saturated;
  return out;
}

Eigen::VectorXd CascadePlant::operator()(const Point& gains) {
  const CascadeMeasurement m = measure_exact(gains);
  Eigen::VectorXd y(2);
  y << m.objective, m.constraint;
  if (noise_std_ > 0.0) {
    std::normal_distribution<double> noise(0.0, noise_std_);
    y[0] += noise(rng_);
    y[1] += noise(rng_);
  }
  return y;
}

PlantFn CascadePlant::as_function() {
  return [this](const Point& x) { return (*this)(x); };
}

}  // namespace safeopt
