#pragma once

#include "safeopt/record.hpp"
#include "safeopt/types.hpp"

#include <cstdint>
#include <optional>
#include <random>
#include <vector>

namespace safeopt {

/// Position setpoint: amplitude*sin(2*pi*t/period) clamped to [low, high]
/// while t < duration, then held at its value at `duration`. A non-empty
/// `series` overrides the generator (one value per timestep, last value held).
struct SetpointSpec {
  double amplitude = 1.0;
  double period = 1.0;
  double duration = 1.0;
  double low = 0.0;
  double high = 0.9;
  std::vector<double> series;

  double at(double t, double timestep) const;
};

/// Cascade loop: P controller on position, PI controller on speed, drive
/// G(s) = numerator(s)/denominator(s) producing speed, integrator to position.
struct PlantModel {
  /// Coefficients in descending powers of s.
  std::vector<double> numerator;
  std::vector<double> denominator;
  double timestep = 1e-3;
  double horizon = 2.0;
  SetpointSpec setpoint;
  double speed_feedforward = 0.0;
  /// States are clamped to +-saturation and the trace flagged.
  double saturation = 10.0;

  /// omega^2 / (s^2 + 2 zeta omega s + omega^2)
  static PlantModel second_order(double natural_frequency, double damping);
  void validate() const;
  std::size_t steps() const;
};

struct Gains {
  double kp = 0.0;
  double kv = 0.0;
  double kvi = 0.0;
};

struct Trace {
  std::vector<double> time;
  std::vector<double> position;
  std::vector<double> speed;
  std::vector<double> setpoint;
  bool saturated = false;

  std::vector<double> position_error() const;
};

/// Fixed-step RK4 simulation of the closed loop from rest.
Trace simulate(const PlantModel& model, const Gains& gains);

struct PlantObjectiveConfig {
  double gamma1 = 1000.0;
  double gamma2 = 100.0;
  double margin = 0.005;

  void validate() const;
};

/// gamma1 * timestep * sum |P - Ps| + max |S|.
double objective_J(const std::vector<double>& position, const std::vector<double>& setpoint,
                   const std::vector<double>& speed, const PlantObjectiveConfig& cfg,
                   double timestep);

/// Least-squares slope of the peak amplitudes of |signal - reference|
/// against peak time. Zero when fewer than two peaks are found.
double peak_slope(const std::vector<double>& signal, double timestep, double reference = 0.0);

/// Strict local maxima of |signal - reference| whose prominence exceeds
/// kPeakProminence.
std::vector<std::size_t> find_peaks(const std::vector<double>& signal, double reference = 0.0);
inline constexpr double kPeakProminence = 1e-9;

/// gamma2 * (p1 - margin)
double constraint_h(double p1, const PlantObjectiveConfig& cfg);

struct TraceMetricsConfig {
  std::size_t n_s = 0;
  std::size_t n_p = 0;
  double f_lo = 140.0;
  double f_hi = 1250.0;
  double sample_rate = 5000.0;

  void validate(std::size_t trace_length) const;
};

/// Right-sided sigmoid window 1 - 1/(1 + exp(-(i - n_s - 150)/10)).
double xi(std::size_t i, std::size_t n_s);

/// Mean of |xi * p_e| over the samples n_s .. n_p - 1.
double e_avg(const std::vector<double>& position_error, const TraceMetricsConfig& cfg);

/// Largest DFT magnitude of xi * v_e (samples n_s .. n_p - 1) over the bins
/// whose frequency lies in [f_lo, f_hi].
double fft_max(const std::vector<double>& velocity_error, const TraceMetricsConfig& cfg);

struct CascadeMeasurement {
  double objective = 0.0;
  double constraint = 0.0;
  double peak_slope = 0.0;
  bool saturated = false;
};

/// The tuning benchmark: x = (Kp, Kv, Kvi) -> (J, h) with optional additive
/// Gaussian measurement noise on both outputs. The peak slope is taken over the
/// whole position error trace; a saturated trace reports at least
/// saturation / horizon.
class CascadePlant {
 public:
  CascadePlant(PlantModel model, PlantObjectiveConfig objective, double noise_std = 0.0,
               std::uint64_t noise_seed = 0);

  CascadeMeasurement measure_exact(const Point& gains) const;
  /// Objective then constraint, noise included.
  Eigen::VectorXd operator()(const Point& gains);
  PlantFn as_function();

  const PlantModel& model() const { return model_; }
  const PlantObjectiveConfig& objective_config() const { return objective_; }

 private:
  PlantModel model_;
  PlantObjectiveConfig objective_;
  double noise_std_;
  std::mt19937_64 rng_;
};

}  // namespace safeopt
