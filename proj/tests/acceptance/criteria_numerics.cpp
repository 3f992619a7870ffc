#include "acceptance.hpp"

#include "safeopt/gaussian_process.hpp"
#include "safeopt/grid_safeopt.hpp"
#include "safeopt/gridfree_safeopt.hpp"
#include "safeopt/plant.hpp"

#include "oracles.hpp"
#include "toys.hpp"

#include <chrono>
#include <cmath>
#include <numbers>
#include <random>
#include <sstream>

namespace acceptance {

namespace {

using safeopt::Point;
using testing::vec;

double seconds_since(std::chrono::steady_clock::time_point t) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t).count();
}

std::string describe(std::initializer_list<std::pair<const char*, double>> items) {
  std::ostringstream s;
  s.precision(3);
  bool first = true;
  for (const auto& [k, v] : items) {
    s << (first ? "" : ", ") << k << "=" << v;
    first = false;
  }
  return s.str();
}

}  // namespace

Outcome gp_numerics() {
  const auto start = std::chrono::steady_clock::now();
  std::mt19937_64 rng(20240101);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double worst_dense = 0.0;
  double worst_refit = 0.0;
  for (int set = 0; set < 200; ++set) {
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng() % 5);
    const int count = 1 + static_cast<int>(rng() % 50);
    safeopt::KernelSpec k;
    k.lengthscales.resize(dim);
    for (Eigen::Index d = 0; d < dim; ++d) k.lengthscales[d] = 0.5 + 1.5 * u(rng);
    k.signal_variance = 0.5 + 2.5 * u(rng);
    k.noise_variance = k.signal_variance * std::pow(10.0, -3.0 + 2.0 * u(rng));
    k.prior_mean = -1.0 + 2.0 * u(rng);

    oracle::Dataset data;
    for (int i = 0; i < count; ++i) {
      data.x.push_back(testing::uniform_point(rng, dim, -2.0, 2.0));
      data.y.push_back(std::sin(data.x.back().sum()) + 0.3 * data.x.back().squaredNorm() + 0.05 * (u(rng) - 0.5));
    }
    const safeopt::GaussianProcess gp(k, data.x, data.y);

    const int split = count / 2;
    safeopt::GaussianProcess grown(k, {data.x.begin(), data.x.begin() + split},
                                   {data.y.begin(), data.y.begin() + split});
    for (int i = split; i < count; ++i) {
      grown = grown.add_observation(data.x[static_cast<std::size_t>(i)], data.y[static_cast<std::size_t>(i)]);
    }

    std::vector<Point> queries(data.x.begin(), data.x.begin() + std::min(count, 5));
    for (int q = 0; q < 20; ++q) queries.push_back(testing::uniform_point(rng, dim, -3.0, 3.0));
    for (const auto& q : queries) {
      const oracle::Moments m = oracle::dense_posterior(k, data, q);
      const safeopt::Posterior p = gp.posterior(q);
      worst_dense = std::max({worst_dense, std::abs(p.mean - m.mean), std::abs(p.variance - m.variance)});
      const safeopt::Posterior g = grown.posterior(q);
      worst_refit = std::max({worst_refit, std::abs(g.mean - p.mean), std::abs(g.variance - p.variance)});
    }
  }
  const double secs = seconds_since(start);
  const bool pass = worst_dense <= 1e-10 && worst_refit <= 1e-8 && secs < 10.0;
  return {pass, describe({{"max |gp - dense|", worst_dense}, {"max |incremental - refit|", worst_refit}, {"seconds", secs}})};
}

Outcome grid_oracle() {
  const auto start = std::chrono::steady_clock::now();
  int matched = 0;
  std::size_t expanders = 0;
  std::size_t minimizers = 0;
  std::ostringstream first_failure;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    const Eigen::Index dim = seed % 2 == 0 ? 2 : 1;
    const int constraints = seed % 3 == 0 ? 2 : 1;
    const testing::Toy toy = testing::quadratic_toy(seed, dim, constraints, 3 + static_cast<int>(seed % 3));
    const Eigen::MatrixXd grid =
        dim == 1 ? testing::lattice(1, 41 + 4 * static_cast<int>(seed), 0.0, 4.0) : testing::lattice(2, 11, 0.0, 4.0);
    const safeopt::GridStepResult r = safeopt::grid_step(toy.state(), grid);
    const oracle::GridIteration o = oracle::literal_grid_iteration(toy.problem(), grid);
    const bool same = r.diagnostics.safe == o.safe && r.diagnostics.minimizer == o.minimizer &&
                      r.diagnostics.expander == o.expander && r.index == o.chosen &&
                      (!r.index || r.next == grid.col(*r.index));
    if (same) {
      ++matched;
    } else if (first_failure.str().empty()) {
      first_failure << " first mismatch at seed " << seed;
    }
    expanders += r.diagnostics.expander_count;
    minimizers += r.diagnostics.minimizer_count;
  }
  const double secs = seconds_since(start);
  std::ostringstream d;
  d << matched << "/20 toys identical (" << minimizers << " minimizers, " << expanders << " expanders in total), "
    << secs << " s" << first_failure.str();
  return {matched == 20 && expanders > 0 && secs < 120.0, d.str()};
}

Outcome dense_scan() {
  const auto start = std::chrono::steady_clock::now();
  const safeopt::Box box{vec({0.0}), vec({10.0})};
  safeopt::PatternSearchConfig solver;
  solver.initial_mesh = 1.0;
  solver.mesh_tolerance = 1e-8;
  solver.constraint_tolerance = 0.0;
  solver.max_evaluations = 20000;
  const double cell = 2.0 * solver.mesh_tolerance;
  const double penalty = 100.0;

  int p1_ok = 0;
  int p2_ok = 0;
  int p2_total = 0;
  double worst_x = 0.0;
  double worst_v = 0.0;
  std::ostringstream misses;
  for (std::uint64_t seed = 1; seed <= 10; ++seed) {
    const testing::Toy toy = testing::scan_toy(seed);
    const safeopt::SafeOptState s = toy.state();
    const oracle::Problem p = toy.problem();

    const safeopt::P1Result r1 = safeopt::solve_P1(s, box, solver);
    const oracle::ScanOptimum o1 = oracle::scan_minimizer_program(p, 0.0, 10.0, solver.constraint_tolerance);
    if (o1.found) {
      const double dx = std::abs(r1.x[0] - o1.x);
      const double dv = std::abs(r1.w - o1.value);
      worst_x = std::max(worst_x, dx);
      worst_v = std::max(worst_v, dv);
      if (dx <= cell && dv <= 1e-6) {
        ++p1_ok;
      } else {
        misses << " P1 seed " << seed << ": x=" << r1.x[0] << " w=" << r1.w << " vs scan x=" << o1.x << " w=" << o1.value << ";";
      }
    }

    safeopt::InitGuessConfig init;
    init.m0 = 100;
    const safeopt::InitGuesses g = safeopt::init_guesses(s, box, init, seed);
    const auto r2 = safeopt::solve_P2(s, box, solver, g.pairs, penalty);
    const oracle::ScanOptimum o2 = oracle::scan_expander_program(p, 0.0, 10.0, solver.constraint_tolerance, penalty);
    if (o2.found || r2) {
      ++p2_total;
      if (o2.found && r2) {
        const double dx = std::abs(r2->x[0] - o2.x);
        const double dv = std::abs(r2->q - o2.value);
        worst_x = std::max(worst_x, dx);
        worst_v = std::max(worst_v, dv);
        if (dx <= cell && dv <= 1e-6) ++p2_ok;
      }
    }
  }
  const double secs = seconds_since(start);
  std::ostringstream d;
  d << "P1 " << p1_ok << "/10, P2 " << p2_ok << "/" << p2_total << ", worst |dx|=" << worst_x
    << " (cell " << cell << "), worst |dvalue|=" << worst_v << ", " << secs << " s" << misses.str();
  return {p1_ok == 10 && p2_total == 10 && p2_ok == 10 && secs < 300.0, d.str()};
}

Outcome pairing() {
  std::mt19937_64 rng(77);
  int exact = 0;
  for (int cloud = 0; cloud < 100; ++cloud) {
    const Eigen::Index dim = 1 + static_cast<Eigen::Index>(rng() % 5);
    const Eigen::Index m = 1 + static_cast<Eigen::Index>(rng() % 80);
    const Eigen::Index l = 1 + static_cast<Eigen::Index>(rng() % 80);
    Eigen::MatrixXd safe(dim, m);
    Eigen::MatrixXd unsafe(dim, l);
    // every fourth cloud lives on an integer lattice so that ties occur
    const bool lattice = cloud % 4 == 0;
    auto fill = [&](Eigen::MatrixXd& pts) {
      for (Eigen::Index i = 0; i < pts.cols(); ++i) {
        for (Eigen::Index d = 0; d < dim; ++d) {
          pts(d, i) = lattice ? static_cast<double>(rng() % 4) : std::uniform_real_distribution<double>(-5.0, 5.0)(rng);
        }
      }
    };
    fill(safe);
    fill(unsafe);
    if (safeopt::pair_nearest(safe, unsafe) == oracle::brute_pairing(safe, unsafe)) ++exact;
  }
  return {exact == 100, std::to_string(exact) + "/100 clouds identical to the brute-force argmin"};
}

Outcome trace_metrics() {
  bool pass = true;
  std::ostringstream d;

  const bool midpoint = safeopt::xi(650, 500) == 0.5 && safeopt::xi(150, 0) == 0.5;
  pass = pass && midpoint;
  d << "xi midpoint " << (midpoint ? "exact" : "WRONG");

  safeopt::TraceMetricsConfig avg;
  avg.n_s = 200;
  avg.n_p = 3200;
  const std::vector<double> ones(4000, 1.0);
  double sum = 0.0;
  for (std::size_t i = avg.n_s; i < avg.n_p; ++i) sum += oracle::sigmoid_window(static_cast<double>(i), 200.0);
  const double e_err = std::abs(safeopt::e_avg(ones, avg) - sum / 3000.0);
  const double e_zero = safeopt::e_avg(std::vector<double>(4000, 0.0), avg);
  pass = pass && e_err <= 1e-9 && e_zero == 0.0;
  d << ", e_avg |err|=" << e_err << ", zero trace " << e_zero;

  auto tone = [](std::size_t n, double f, double fs, double a) {
    std::vector<double> s(n);
    for (std::size_t i = 0; i < n; ++i) s[i] = a * std::sin(2.0 * std::numbers::pi * f * static_cast<double>(i) / fs);
    return s;
  };
  auto windowed = [](const std::vector<double>& s, std::size_t n_s, std::size_t n_p) {
    std::vector<double> w;
    for (std::size_t i = n_s; i < n_p; ++i) w.push_back(oracle::sigmoid_window(static_cast<double>(i), static_cast<double>(n_s)) * s[i]);
    return w;
  };

  safeopt::TraceMetricsConfig in_band;
  in_band.n_s = 0;
  in_band.n_p = 2500;
  in_band.sample_rate = 2500.0;
  in_band.f_lo = 140.0;
  in_band.f_hi = 1200.0;
  const auto s200 = tone(2500, 200.0, 2500.0, 1.3);
  const double want = oracle::direct_dft_max(windowed(s200, 0, 2500), 2500.0, 140.0, 1200.0);
  const double got = safeopt::fft_max(s200, in_band);
  const double rel = std::abs(got - want) / want;
  pass = pass && rel <= 0.05;
  d << ", 200 Hz rel err=" << rel;

  safeopt::TraceMetricsConfig out_band;
  out_band.n_s = 0;
  out_band.n_p = 5000;
  out_band.sample_rate = 5000.0;
  out_band.f_lo = 140.0;
  out_band.f_hi = 1250.0;
  const auto s2000 = tone(5000, 2000.0, 5000.0, 1.3);
  const auto w2000 = windowed(s2000, 0, 5000);
  const double tone_mag = oracle::direct_dft_max(w2000, 5000.0, 1900.0, 2100.0);
  const double leak = safeopt::fft_max(s2000, out_band);
  const double leak_oracle = oracle::direct_dft_max(w2000, 5000.0, 140.0, 1250.0);
  pass = pass && leak <= 0.01 * tone_mag && std::abs(leak - leak_oracle) <= 0.05 * tone_mag;
  d << ", 2000 Hz leakage " << leak / tone_mag << " of tone";
  const double zero = safeopt::fft_max(std::vector<double>(5000, 0.0), out_band);
  pass = pass && zero == 0.0;
  return {pass, d.str()};
}

}  // namespace acceptance
