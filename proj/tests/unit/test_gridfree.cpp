#include "safeopt/errors.hpp"
#include "safeopt/gridfree_safeopt.hpp"

#include "../support/oracles.hpp"
#include "../support/toys.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace safeopt;
using testing::vec;

namespace {

const Box kBox{vec({0.0}), vec({10.0})};

PatternSearchConfig fine_solver() {
  PatternSearchConfig c;
  c.initial_mesh = 1.0;
  c.mesh_tolerance = 1e-8;
  c.constraint_tolerance = 0.0;
  c.max_evaluations = 20000;
  return c;
}

Eigen::MatrixXd columns(std::initializer_list<Point> pts) {
  Eigen::MatrixXd m(pts.begin()->size(), static_cast<Eigen::Index>(pts.size()));
  Eigen::Index i = 0;
  for (const auto& p : pts) m.col(i++) = p;
  return m;
}

// Safe region [0, b] is known; the probe sits beyond it.
std::vector<StartPair> boundary_starts(const SafeOptState& s) {
  double edge = 0.0;
  for (int i = 0; i <= 10000; ++i) {
    if (!is_safe(s, vec({0.001 * i})).is_safe) break;
    edge = 0.001 * i;
  }
  return {{vec({edge}), vec({std::min(10.0, edge + 0.5)})}};
}

}  // namespace

TEST_CASE("pairing") {
  const Eigen::MatrixXd safe = columns({vec({0.0, 0.0}), vec({1.0, 0.0})});
  const Eigen::MatrixXd unsafe = columns({vec({0.9, 0.0}), vec({5.0, 5.0})});
  CHECK(pair_nearest(safe, unsafe) == std::vector<Eigen::Index>{0, 0});
  CHECK(pair_nearest(columns({vec({3.0})}), columns({vec({-2.0})})) == std::vector<Eigen::Index>{0});
  CHECK(pair_nearest(columns({vec({0.0})}), columns({vec({-1.0}), vec({1.0})})) == std::vector<Eigen::Index>{0});
  CHECK_THROWS_AS(pair_nearest(safe, Eigen::MatrixXd(2, 0)), InputError);

  std::mt19937_64 rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    Eigen::MatrixXd a(3, 15);
    Eigen::MatrixXd b(3, 9);
    for (Eigen::Index i = 0; i < a.cols(); ++i) a.col(i) = testing::uniform_point(rng, 3, 0.0, 1.0);
    for (Eigen::Index i = 0; i < b.cols(); ++i) b.col(i) = testing::uniform_point(rng, 3, 0.0, 1.0);
    CHECK(pair_nearest(a, b) == oracle::brute_pairing(a, b));
  }
}

TEST_CASE("init_guesses pairs every safe sample with its nearest unsafe sample") {
  const testing::Toy toy = testing::scan_toy(3);
  const SafeOptState s = toy.state();
  InitGuessConfig cfg;
  cfg.m0 = 60;
  const InitGuesses g = init_guesses(s, kBox, cfg, 77);
  REQUIRE(g.safe_count > 0);
  REQUIRE(g.unsafe_count > 0);
  CHECK(g.pairs.size() == g.safe_count);
  CHECK(g.safe_count + g.unsafe_count == 60);
  const SampleBatch batch = latin_hypercube(60, kBox, 77);
  for (const auto& [x, probe] : g.pairs) {
    CHECK(is_safe(s, x).is_safe);
    CHECK_FALSE(is_safe(s, probe).is_safe);
    for (Eigen::Index i = 0; i < batch.size(); ++i) {
      if (!is_safe(s, batch.point(i)).is_safe) CHECK(std::abs(x[0] - probe[0]) <= std::abs(x[0] - batch.point(i)[0]));
    }
  }

  cfg.seed_with_samples = true;
  CHECK(init_guesses(s, kBox, cfg, 77).safe_count == g.safe_count + 3);

  const KernelSpec k{vec({1.0}), 1.0, 0.0, 5.0};
  const SafeOptState hopeless = SafeOptState::from_samples({k, k}, 3.0, {0.0}, {{vec({0.0}), vec({0.0, 5.0})}});
  cfg.seed_with_samples = false;
  CHECK_THROWS_AS(init_guesses(hopeless, kBox, cfg, 1), InitializationError);

  cfg.m0 = 1;
  CHECK_THROWS_AS(init_guesses(s, kBox, cfg, 1), InputError);
}

TEST_CASE("init_guesses reports when nothing is unsafe") {
  const KernelSpec k{vec({1e3}), 1.0, 1e-8, 0.0};
  const SafeOptState s = SafeOptState::from_samples({k, k}, 3.0, {0.0}, {{vec({5.0}), vec({0.0, -10.0})}});
  InitGuessConfig cfg;
  const InitGuesses g = init_guesses(s, kBox, cfg, 2);
  CHECK(g.unsafe_count == 0);
  CHECK(g.pairs.empty());
  const GridFreeStepResult step = gridfree_step(s, kBox, GridFreeConfig{});
  CHECK_FALSE(step.p2);
  CHECK(step.branch == "minimizer");
  CHECK(step.next == step.p1.x);
}

TEST_CASE("solve_P1") {
  const testing::Toy toy = testing::scan_toy(1);
  const SafeOptState s = toy.state();
  const P1Result r = solve_P1(s, kBox, fine_solver());
  CHECK(r.start == s.samples()[*s.incumbent()].x);
  CHECK(is_safe(s, r.x).is_safe);
  CHECK(s.output_bounds(0, r.x).lower <= r.l_star);
  CHECK(r.w == doctest::Approx(s.output_bounds(r.k, r.x).width).epsilon(1e-12));

  const oracle::ScanOptimum scan = oracle::scan_minimizer_program(toy.problem(), 0.0, 10.0, 0.0);
  REQUIRE(scan.found);
  CHECK(std::abs(r.x[0] - scan.x) <= 2e-6);
  CHECK(std::abs(r.w - scan.value) <= 1e-6);

  const P1Result literal = solve_P1(s, kBox, fine_solver(), true);
  CHECK(literal.k == 1);
}

TEST_CASE("solve_P1 on a converged surrogate") {
  const KernelSpec k{vec({1e9}), 1.0, 0.0, 0.0};
  const SafeOptState s = SafeOptState::from_samples({k, k}, 3.0, {0.0}, {{vec({4.0}), vec({1.0, -1.0})}});
  const P1Result r = solve_P1(s, kBox, fine_solver());
  CHECK(r.w <= 1e-6);
}

TEST_CASE("relaxed_q") {
  const testing::Toy toy = testing::scan_toy(2);
  const SafeOptState s = toy.state();
  const oracle::Problem p = toy.problem();
  for (double x : {0.5, 1.5, 2.5}) {
    for (double probe : {2.8, 3.5, 6.0}) {
      const Point xp = vec({x});
      const Point pp = vec({probe});
      oracle::Dataset d = p.output(1);
      d.x.push_back(xp);
      d.y.push_back(s.gp(1).bounds(xp, 3.0).lower);
      const oracle::Moments m = oracle::dense_posterior(p.kernels[1], d, pp);
      const double excess = m.mean + 3.0 * std::sqrt(m.variance) - p.thresholds[0];
      for (std::size_t k : {0u, 1u}) {
        const double w = s.output_bounds(k, xp).width;
        const double q = relaxed_q(s, xp, pp, k, 50.0);
        CHECK(std::abs(q - (w - 50.0 * std::max(0.0, excess))) <= 1e-8);
        if (excess <= 0.0) CHECK(q == w);
      }
    }
  }
  CHECK_THROWS_AS(relaxed_q(s, vec({1.0}), vec({5.0}), 2, 1.0), InputError);
}

TEST_CASE("gap check on a constructed margin") {
  testing::Toy toy = testing::scan_toy(5);
  const Point x = toy.samples[0].x;
  const Point probe = vec({x[0] + 1.5});
  const SafeOptState base = toy.state();
  const auto aux = auxiliary_constraint_gps(base, x);
  const double u_aux = aux[0].bounds(probe, 3.0).upper;

  toy.thresholds = {u_aux - 1e-3};
  const SafeOptState s = toy.state();
  CHECK_FALSE(expander_gap_check(s, x, probe));
  const double w = s.output_bounds(1, x).width;
  CHECK(w - relaxed_q(s, x, probe, 1, 10.0) == doctest::Approx(1e-2).epsilon(1e-6));
  CHECK(expander_gap_check(s, x, probe) == (hypothetical_margin(s, aux, probe) <= 0.0));

  toy.thresholds = {u_aux};
  const SafeOptState t = toy.state();
  CHECK(expander_gap_check(t, x, probe));
  CHECK(relaxed_q(t, x, probe, 1, 10.0) == t.output_bounds(1, x).width);
}

TEST_CASE("solve_P2") {
  const testing::Toy toy = testing::scan_toy(7);
  const SafeOptState s = toy.state();
  const auto starts = boundary_starts(s);
  const auto r = solve_P2(s, kBox, fine_solver(), starts, 100.0);
  REQUIRE(r);
  CHECK(is_safe(s, r->x).is_safe);
  CHECK_FALSE(is_safe(s, r->probe).is_safe);
  CHECK(r->feasible_starts == 1);
  CHECK(r->w == s.output_bounds(r->k, r->x).width);

  // a start with a safe probe is not feasible
  const std::vector<StartPair> bad{{starts[0].first, starts[0].first}};
  CHECK_FALSE(solve_P2(s, kBox, fine_solver(), bad, 100.0));
  CHECK_THROWS_AS(solve_P2(s, kBox, fine_solver(), starts, 0.0), InputError);

  if (expander_gap_check(s, r->x, r->probe)) CHECK(is_expander(s, r->x, r->probe));
}

TEST_CASE("multi-start dominance") {
  const testing::Toy toy = testing::quadratic_toy(13, 2, 1, 4);
  const SafeOptState s = toy.state();
  const Box box{vec({0.0, 0.0}), vec({4.0, 4.0})};
  InitGuessConfig cfg;
  cfg.m0 = 40;
  const InitGuesses g = init_guesses(s, box, cfg, 9);
  REQUIRE(g.pairs.size() >= 2);
  PatternSearchConfig solver;
  const auto all = solve_P2(s, box, solver, g.pairs, 100.0, true);
  REQUIRE(all);
  for (const auto& pair : g.pairs) {
    const auto one = solve_P2(s, box, solver, {pair}, 100.0, true);
    if (one) CHECK(all->q >= one->q);
  }
}

TEST_CASE("gridfree_step selection rule") {
  for (std::uint64_t seed = 1; seed <= 4; ++seed) {
    const testing::Toy toy = testing::scan_toy(seed);
    const SafeOptState s = toy.state();
    GridFreeConfig cfg;
    cfg.init.m0 = 50;
    cfg.init.seed = seed;
    const GridFreeStepResult step = gridfree_step(s, kBox, cfg);
    CHECK(s.output_bounds(1, step.next).upper <= toy.thresholds[0] + cfg.solver.constraint_tolerance);
    if (step.p2 && step.gap_check_passed && step.p2->w > step.p1.w) {
      CHECK(step.next == step.p2->x);
      CHECK(step.branch == "expander");
      if (step.gap_check_passed) CHECK(is_expander(s, step.p2->x, step.p2->probe));
    } else {
      CHECK(step.next == step.p1.x);
      CHECK(step.branch == "minimizer");
    }
    const double chosen = acquisition_width(s, step.next).width;
    CHECK(chosen >= 0.0);
  }
}

TEST_CASE("iteration seeds differ per iteration and per master seed") {
  CHECK(iteration_seed(1, 0) != iteration_seed(1, 1));
  CHECK(iteration_seed(1, 3) != iteration_seed(2, 3));
  CHECK(iteration_seed(5, 5) == iteration_seed(5, 5));
}

TEST_CASE("gridfree_run") {
  const testing::Toy toy = testing::scan_toy(4);
  const SafeOptState s0 = toy.state();
  auto plant = [](const Point& x) { return vec({(x[0] - 5.0) * (x[0] - 5.0) / 10.0, x[0] - 4.0}); };

  SUBCASE("C == 1") {
    GridFreeConfig cfg;
    cfg.max_iterations = 1;
    int calls = 0;
    const ExperimentRecord r = gridfree_run(s0, kBox, cfg, [&](const Point& x) {
      ++calls;
      return plant(x);
    });
    CHECK(calls == 1);
    CHECK(r.plant_calls() == 4);
    CHECK(r.stop_reason == StopReason::kMaxIterations);
  }

  SUBCASE("repeated recommendation triggers the displacement stop") {
    const KernelSpec k{vec({1e9}), 1.0, 0.0, 0.0};
    const SafeOptState flat = SafeOptState::from_samples({k, k}, 3.0, {0.0}, {{vec({4.0}), vec({1.0, -1.0})}});
    GridFreeConfig cfg;
    cfg.max_iterations = 10;
    const ExperimentRecord r = gridfree_run(flat, kBox, cfg, [](const Point&) { return vec({1.0, -1.0}); });
    CHECK(r.stop_reason == StopReason::kTolerance);
    CHECK(r.iterations < 10);
    CHECK(r.last_point_displacement <= cfg.epsilon1);
    CHECK(r.last_objective_displacement <= cfg.epsilon2);
  }

  SUBCASE("deterministic and safe at selection time") {
    GridFreeConfig cfg;
    cfg.max_iterations = 6;
    cfg.init.m0 = 40;
    cfg.init.seed = 3;
    const ExperimentRecord a = gridfree_run(s0, kBox, cfg, plant);
    const ExperimentRecord b = gridfree_run(s0, kBox, cfg, plant);
    CHECK(rows_to_csv(a) == rows_to_csv(b));

    SafeOptState s = s0;
    for (const auto& row : a.rows) {
      if (row.iteration == 0) continue;
      CHECK(is_safe(s, row.x).worst_margin <= cfg.solver.constraint_tolerance);
      s = s.with_sample({row.x, row.outputs});
    }
  }

  SUBCASE("plant failure keeps the partial record") {
    GridFreeConfig cfg;
    cfg.max_iterations = 5;
    int calls = 0;
    const ExperimentRecord r = gridfree_run(s0, kBox, cfg, [&](const Point& x) -> Eigen::VectorXd {
      if (++calls == 2) throw PlantError("sensor fault");
      return plant(x);
    });
    CHECK(r.stop_reason == StopReason::kAborted);
    CHECK(r.plant_calls() == 4);
  }
}
