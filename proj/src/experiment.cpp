#include "safeopt/experiment.hpp"

#include "safeopt/errors.hpp"

#include <cmath>
#include <fstream>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

namespace safeopt {

namespace {

using nlohmann::json;

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void check_object(const json& j, const std::string& path, std::initializer_list<const char*> allowed) {
  if (!j.is_object()) throw ConfigError(path.empty() ? "<root>" : path, "expected an object");
  const std::set<std::string> keys(allowed.begin(), allowed.end());
  for (const auto& item : j.items()) {
    if (!keys.count(item.key())) throw ConfigError(join(path, item.key()), "unknown key");
  }
}

const json& require(const json& j, const std::string& path, const std::string& key) {
  if (!j.contains(key)) throw ConfigError(join(path, key), "missing required field");
  return j.at(key);
}

double number(const json& j, const std::string& path, const std::string& key,
              std::optional<double> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(join(path, key), "missing required field");
  }
  const auto& v = j.at(key);
  if (!v.is_number()) throw ConfigError(join(path, key), "expected a number");
  const double d = v.get<double>();
  if (!std::isfinite(d)) throw ConfigError(join(path, key), "must be finite");
  return d;
}

long long integer(const json& j, const std::string& path, const std::string& key,
                  std::optional<long long> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(join(path, key), "missing required field");
  }
  const auto& v = j.at(key);
  if (!v.is_number_integer()) throw ConfigError(join(path, key), "expected an integer");
  return v.get<long long>();
}

bool boolean(const json& j, const std::string& path, const std::string& key, bool fallback) {
  if (!j.contains(key)) return fallback;
  if (!j.at(key).is_boolean()) throw ConfigError(join(path, key), "expected true or false");
  return j.at(key).get<bool>();
}

std::string text(const json& j, const std::string& path, const std::string& key,
                 std::optional<std::string> fallback = std::nullopt) {
  if (!j.contains(key)) {
    if (fallback) return *fallback;
    throw ConfigError(join(path, key), "missing required field");
  }
  if (!j.at(key).is_string()) throw ConfigError(join(path, key), "expected a string");
  return j.at(key).get<std::string>();
}

Eigen::VectorXd vector_value(const json& v, const std::string& path) {
  if (!v.is_array() || v.empty()) throw ConfigError(path, "expected a non-empty array of numbers");
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!v[i].is_number()) throw ConfigError(path, "expected a non-empty array of numbers");
    out[static_cast<Eigen::Index>(i)] = v[i].get<double>();
  }
  return out;
}

// A number broadcasts to `size` entries; an array must have exactly `size`.
Eigen::VectorXd broadcast(const json& v, const std::string& path, Eigen::Index size) {
  if (v.is_number()) return Eigen::VectorXd::Constant(size, v.get<double>());
  Eigen::VectorXd out = vector_value(v, path);
  if (out.size() != size) {
    throw ConfigError(path, "expected " + std::to_string(size) + " entries");
  }
  return out;
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.data(), v.data() + v.size()}; }

template <typename Fn>
auto guarded(const std::string& path, Fn&& fn) {
  try {
    return fn();
  } catch (const ConfigError&) {
    throw;
  } catch (const Error& e) {
    throw ConfigError(path, e.what());
  }
}

Box parse_box(const json& j) {
  const std::string path = "box";
  check_object(j, path, {"lower", "upper"});
  Box box{vector_value(require(j, path, "lower"), "box.lower"),
          vector_value(require(j, path, "upper"), "box.upper")};
  guarded(path, [&] { box.validate(); return 0; });
  return box;
}

KernelSpec parse_kernel(const json& j, const std::string& path, Eigen::Index dim) {
  check_object(j, path, {"lengthscales", "signal_variance", "noise_variance", "prior_mean"});
  KernelSpec k;
  k.lengthscales = broadcast(require(j, path, "lengthscales"), join(path, "lengthscales"), dim);
  k.signal_variance = number(j, path, "signal_variance", 1.0);
  k.noise_variance = number(j, path, "noise_variance", 0.0);
  k.prior_mean = number(j, path, "prior_mean", 0.0);
  guarded(path, [&] { k.validate(); return 0; });
  return k;
}

PatternSearchConfig parse_pattern_search(const json& j) {
  const std::string path = "pattern_search";
  PatternSearchConfig c;
  if (j.is_null()) return c;
  check_object(j, path, {"initial_mesh", "mesh_tolerance", "constraint_tolerance", "contraction",
                         "expansion", "max_evaluations"});
  c.initial_mesh = number(j, path, "initial_mesh", c.initial_mesh);
  c.mesh_tolerance = number(j, path, "mesh_tolerance", c.mesh_tolerance);
  c.constraint_tolerance = number(j, path, "constraint_tolerance", c.constraint_tolerance);
  c.contraction = number(j, path, "contraction", c.contraction);
  c.expansion = number(j, path, "expansion", c.expansion);
  c.max_evaluations = static_cast<int>(integer(j, path, "max_evaluations", c.max_evaluations));
  guarded(path, [&] { c.validate(); return 0; });
  return c;
}

SamplerKind parse_sampler(const json& j, const std::string& path, SamplerKind fallback) {
  if (!j.contains("sampler")) return fallback;
  return guarded(join(path, "sampler"), [&] { return sampler_from_string(text(j, path, "sampler")); });
}

GridFreeConfig parse_gridfree(const json& j, std::uint64_t seed) {
  const std::string path = "grid_free";
  check_object(j, path, {"epsilon1", "epsilon2", "penalty", "max_iterations", "max_starts",
                         "p1_constraints_only", "init"});
  GridFreeConfig c;
  c.epsilon1 = number(j, path, "epsilon1", c.epsilon1);
  c.epsilon2 = number(j, path, "epsilon2", c.epsilon2);
  c.penalty = number(j, path, "penalty", c.penalty);
  c.max_iterations = static_cast<int>(integer(j, path, "max_iterations", c.max_iterations));
  c.max_starts = static_cast<int>(integer(j, path, "max_starts", c.max_starts));
  c.p1_constraints_only = boolean(j, path, "p1_constraints_only", c.p1_constraints_only);
  c.init.seed = seed;
  if (j.contains("init")) {
    const std::string ipath = "grid_free.init";
    const auto& init = j.at("init");
    check_object(init, ipath, {"m0", "sampler", "seed_with_samples"});
    c.init.m0 = static_cast<int>(integer(init, ipath, "m0", c.init.m0));
    c.init.sampler = parse_sampler(init, ipath, c.init.sampler);
    c.init.seed_with_samples = boolean(init, ipath, "seed_with_samples", c.init.seed_with_samples);
  }
  if (!(c.epsilon1 > 0.0)) throw ConfigError("grid_free.epsilon1", "must be positive");
  if (!(c.epsilon2 > 0.0)) throw ConfigError("grid_free.epsilon2", "must be positive");
  if (!(c.penalty > 0.0)) throw ConfigError("grid_free.penalty", "must be positive");
  if (c.max_iterations < 0) throw ConfigError("grid_free.max_iterations", "must be non-negative");
  if (c.max_starts < 0) throw ConfigError("grid_free.max_starts", "must be non-negative");
  if (c.init.m0 < 2) throw ConfigError("grid_free.init.m0", "must be at least 2");
  return c;
}

SetpointSpec parse_setpoint(const json& j, const std::string& path) {
  SetpointSpec s;
  if (j.is_array()) {
    s.series = to_std(vector_value(j, path));
    return s;
  }
  check_object(j, path, {"amplitude", "period", "duration", "low", "high"});
  s.amplitude = number(j, path, "amplitude", s.amplitude);
  s.period = number(j, path, "period", s.period);
  s.duration = number(j, path, "duration", s.duration);
  s.low = number(j, path, "low", s.low);
  s.high = number(j, path, "high", s.high);
  return s;
}

CascadePlantConfig parse_cascade(const json& j) {
  const std::string path = "plant";
  check_object(j, path, {"type", "natural_frequency", "damping", "numerator", "denominator",
                         "timestep", "horizon", "setpoint", "speed_feedforward", "saturation",
                         "noise_std", "objective"});
  CascadePlantConfig c;
  const bool coefficients = j.contains("numerator") || j.contains("denominator");
  if (coefficients) {
    if (j.contains("natural_frequency") || j.contains("damping")) {
      throw ConfigError("plant", "give either numerator/denominator or natural_frequency/damping");
    }
    c.model.numerator = to_std(vector_value(require(j, path, "numerator"), "plant.numerator"));
    c.model.denominator = to_std(vector_value(require(j, path, "denominator"), "plant.denominator"));
  } else {
    const double w = number(j, path, "natural_frequency", 55.0);
    const double z = number(j, path, "damping", 1.0);
    c.model = guarded("plant", [&] { return PlantModel::second_order(w, z); });
  }
  c.model.timestep = number(j, path, "timestep", c.model.timestep);
  c.model.horizon = number(j, path, "horizon", c.model.horizon);
  if (j.contains("setpoint")) c.model.setpoint = parse_setpoint(j.at("setpoint"), "plant.setpoint");
  c.model.speed_feedforward = number(j, path, "speed_feedforward", 0.0);
  c.model.saturation = number(j, path, "saturation", c.model.saturation);
  c.noise_std = number(j, path, "noise_std", 0.0);
  if (!(c.noise_std >= 0.0)) throw ConfigError("plant.noise_std", "must be non-negative");
  if (j.contains("objective")) {
    const auto& o = j.at("objective");
    const std::string opath = "plant.objective";
    check_object(o, opath, {"gamma1", "gamma2", "margin"});
    c.objective.gamma1 = number(o, opath, "gamma1", c.objective.gamma1);
    c.objective.gamma2 = number(o, opath, "gamma2", c.objective.gamma2);
    c.objective.margin = number(o, opath, "margin", c.objective.margin);
    guarded(opath, [&] { c.objective.validate(); return 0; });
  }
  guarded("plant", [&] { c.model.validate(); return 0; });
  return c;
}

SyntheticPlantConfig parse_synthetic(const json& j, Eigen::Index dim) {
  const std::string path = "plant";
  check_object(j, path, {"type", "center", "scale", "constraints", "noise_std"});
  SyntheticPlantConfig c;
  c.center = broadcast(require(j, path, "center"), "plant.center", dim);
  c.scale = number(j, path, "scale", 1.0);
  c.noise_std = number(j, path, "noise_std", 0.0);
  if (!(c.noise_std >= 0.0)) throw ConfigError("plant.noise_std", "must be non-negative");
  const auto& list = require(j, path, "constraints");
  if (!list.is_array() || list.empty()) throw ConfigError("plant.constraints", "expected a non-empty array");
  for (std::size_t i = 0; i < list.size(); ++i) {
    const std::string cpath = "plant.constraints[" + std::to_string(i) + "]";
    const auto& item = list[i];
    check_object(item, cpath, {"kind", "normal", "offset", "center", "radius"});
    SyntheticConstraint sc;
    const std::string kind = text(item, cpath, "kind");
    if (kind == "linear") {
      sc.kind = SyntheticConstraint::Kind::kLinear;
      sc.normal = broadcast(require(item, cpath, "normal"), join(cpath, "normal"), dim);
      sc.offset = number(item, cpath, "offset", 0.0);
    } else if (kind == "ball") {
      sc.kind = SyntheticConstraint::Kind::kBall;
      sc.center = broadcast(require(item, cpath, "center"), join(cpath, "center"), dim);
      sc.radius = number(item, cpath, "radius");
      if (!(sc.radius > 0.0)) throw ConfigError(join(cpath, "radius"), "must be positive");
    } else {
      throw ConfigError(join(cpath, "kind"), "expected 'linear' or 'ball'");
    }
    c.constraints.push_back(std::move(sc));
  }
  return c;
}

std::uint64_t noise_seed(std::uint64_t seed) { return iteration_seed(seed, -1); }

double mean_of(const std::vector<double>& v) {
  return v.empty() ? std::numeric_limits<double>::quiet_NaN()
                   : std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double stddev_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

double SyntheticConstraint::operator()(const Point& x) const {
  if (kind == Kind::kLinear) return normal.dot(x) - offset;
  return (x - center).squaredNorm() - radius * radius;
}

Eigen::VectorXd SyntheticPlantConfig::exact(const Point& x) const {
  if (x.size() != center.size()) throw PlantError("synthetic plant: wrong input dimension");
  Eigen::VectorXd y(static_cast<Eigen::Index>(constraints.size() + 1));
  y[0] = scale * (x - center).squaredNorm();
  for (std::size_t i = 0; i < constraints.size(); ++i) {
    y[static_cast<Eigen::Index>(i + 1)] = constraints[i](x);
  }
  return y;
}

ExperimentConfig parse_config(const json& doc) {
  check_object(doc, "", {"algorithm", "seed", "box", "beta", "thresholds", "kernels",
                         "initial_safe_set", "grid", "grid_free", "pattern_search", "plant",
                         "volume", "output"});
  ExperimentConfig cfg;
  cfg.algorithm = text(doc, "", "algorithm");
  if (cfg.algorithm != "grid" && cfg.algorithm != "grid-free") {
    throw ConfigError("algorithm", "expected 'grid' or 'grid-free'");
  }
  if (doc.contains("seed") &&
      !(doc.at("seed").is_number_unsigned() ||
        (doc.at("seed").is_number_integer() && doc.at("seed").get<long long>() >= 0))) {
    throw ConfigError("seed", "expected a non-negative integer");
  }
  cfg.seed = doc.value("seed", std::uint64_t{0});
  cfg.box = parse_box(require(doc, "", "box"));
  const Eigen::Index dim = cfg.box.dim();

  cfg.beta = number(doc, "", "beta", 3.0);
  if (!(cfg.beta > 0.0)) throw ConfigError("beta", "must be positive");

  const auto& kernels = require(doc, "", "kernels");
  if (!kernels.is_array() || kernels.size() < 2) {
    throw ConfigError("kernels", "expected one block per output (objective first, then constraints)");
  }
  for (std::size_t i = 0; i < kernels.size(); ++i) {
    cfg.kernels.push_back(parse_kernel(kernels[i], "kernels[" + std::to_string(i) + "]", dim));
  }
  const auto constraints = static_cast<Eigen::Index>(cfg.kernels.size() - 1);
  cfg.thresholds = to_std(broadcast(require(doc, "", "thresholds"), "thresholds", constraints));

  const auto& s0 = require(doc, "", "initial_safe_set");
  if (!s0.is_array() || s0.empty()) throw ConfigError("initial_safe_set", "expected a non-empty array");
  for (std::size_t i = 0; i < s0.size(); ++i) {
    const std::string path = "initial_safe_set[" + std::to_string(i) + "]";
    InitialPoint p;
    if (s0[i].is_array()) {
      p.x = vector_value(s0[i], path);
    } else {
      check_object(s0[i], path, {"x", "outputs"});
      p.x = vector_value(require(s0[i], path, "x"), join(path, "x"));
      if (s0[i].contains("outputs")) {
        p.outputs = vector_value(s0[i].at("outputs"), join(path, "outputs"));
        if (p.outputs->size() != static_cast<Eigen::Index>(cfg.kernels.size())) {
          throw ConfigError(join(path, "outputs"), "expected one value per output");
        }
      }
    }
    if (p.x.size() != dim) throw ConfigError(path, "point dimension does not match the box");
    if (!cfg.box.contains(p.x)) throw ConfigError(path, "initial point lies outside the box");
    cfg.initial.push_back(std::move(p));
  }

  const auto& plant = require(doc, "", "plant");
  if (!plant.is_object()) throw ConfigError("plant", "expected an object");
  const std::string type = text(plant, "plant", "type");
  if (type == "cascade-pid") {
    if (dim != 3) throw ConfigError("box", "the cascade-pid plant tunes three gains");
    if (cfg.kernels.size() != 2) throw ConfigError("kernels", "the cascade-pid plant has two outputs");
    cfg.plant = parse_cascade(plant);
  } else if (type == "synthetic") {
    auto synth = parse_synthetic(plant, dim);
    if (synth.constraints.size() + 1 != cfg.kernels.size()) {
      throw ConfigError("kernels", "expected one block per synthetic output");
    }
    cfg.plant = std::move(synth);
  } else {
    throw ConfigError("plant.type", "expected 'cascade-pid' or 'synthetic'");
  }

  cfg.gridfree.solver = parse_pattern_search(doc.contains("pattern_search") ? doc.at("pattern_search") : json());
  if (cfg.algorithm == "grid") {
    const auto& g = require(doc, "", "grid");
    check_object(g, "grid", {"counts", "include_initial", "max_iterations", "wall_clock_budget"});
    const Eigen::VectorXd counts = broadcast(require(g, "grid", "counts"), "grid.counts", dim);
    cfg.grid.box = cfg.box;
    for (Eigen::Index d = 0; d < dim; ++d) {
      if (!(counts[d] >= 1.0) || counts[d] != std::floor(counts[d])) {
        throw ConfigError("grid.counts", "counts must be positive integers");
      }
      cfg.grid.counts.push_back(static_cast<int>(counts[d]));
    }
    cfg.grid_include_initial = boolean(g, "grid", "include_initial", true);
    cfg.grid_run.max_iterations = static_cast<int>(integer(g, "grid", "max_iterations", 50));
    cfg.grid_run.wall_clock_budget = number(g, "grid", "wall_clock_budget", 0.0);
    if (cfg.grid_run.max_iterations < 0) throw ConfigError("grid.max_iterations", "must be non-negative");
    if (cfg.grid_include_initial) {
      for (const auto& p : cfg.initial) cfg.grid.extra_points.push_back(p.x);
    }
  } else {
    cfg.gridfree = [&] {
      auto solver = cfg.gridfree.solver;
      auto gf = parse_gridfree(require(doc, "", "grid_free"), cfg.seed);
      gf.solver = solver;
      return gf;
    }();
  }

  if (doc.contains("volume")) {
    const auto& v = doc.at("volume");
    check_object(v, "volume", {"count", "sampler"});
    VolumeConfig vc;
    vc.count = static_cast<Eigen::Index>(integer(v, "volume", "count", vc.count));
    if (vc.count < 1) throw ConfigError("volume.count", "must be positive");
    vc.sampler = parse_sampler(v, "volume", vc.sampler);
    cfg.volume = vc;
  }
  if (doc.contains("output")) {
    const auto& o = doc.at("output");
    check_object(o, "output", {"directory"});
    cfg.output_directory = text(o, "output", "directory", ".");
  }

  cfg.echo = doc;
  cfg.echo.erase("output");
  cfg.echo["seed"] = cfg.seed;
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("<file>", "cannot open " + path.string());
  json doc;
  try {
    doc = json::parse(in, nullptr, true, true);
  } catch (const json::parse_error& e) {
    throw ConfigError("<file>", std::string("malformed configuration: ") + e.what());
  }
  return parse_config(doc);
}

PlantFn make_plant(const PlantConfig& plant, std::uint64_t seed) {
  if (const auto* c = std::get_if<CascadePlantConfig>(&plant)) {
    auto device = std::make_shared<CascadePlant>(c->model, c->objective, c->noise_std, noise_seed(seed));
    return [device](const Point& x) { return (*device)(x); };
  }
  const auto& s = std::get<SyntheticPlantConfig>(plant);
  auto rng = std::make_shared<std::mt19937_64>(noise_seed(seed));
  return [s, rng](const Point& x) {
    Eigen::VectorXd y = s.exact(x);
    if (s.noise_std > 0.0) {
      std::normal_distribution<double> noise(0.0, s.noise_std);
      for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += noise(*rng);
    }
    return y;
  };
}

SafeOptState initial_state(const ExperimentConfig& cfg, const PlantFn& plant,
                           std::vector<Sample>* measured) {
  std::vector<Sample> samples;
  for (const auto& p : cfg.initial) {
    Sample s{p.x, p.outputs ? *p.outputs : plant(p.x)};
    if (s.outputs.size() != static_cast<Eigen::Index>(cfg.num_outputs())) {
      throw PlantError("plant returned the wrong number of outputs for an initial point");
    }
    samples.push_back(std::move(s));
  }
  if (measured) *measured = samples;
  return SafeOptState::from_samples(cfg.kernels, cfg.beta, cfg.thresholds, std::move(samples));
}

ExperimentRecord run_experiment(const ExperimentConfig& cfg) {
  const PlantFn plant = make_plant(cfg.plant, cfg.seed);
  const SafeOptState state = initial_state(cfg, plant);
  ExperimentRecord record;
  if (cfg.algorithm == "grid") {
    record = grid_run(state, cfg.grid, cfg.grid_run, plant);
  } else {
    GridFreeConfig gf = cfg.gridfree;
    gf.init.seed = cfg.seed;
    record = gridfree_run(state, cfg.box, gf, plant);
  }
  record.seed = cfg.seed;
  record.config = cfg.echo;
  if (cfg.volume) {
    record.safe_volume = safe_volume_estimate(final_state(record), cfg.box, cfg.volume->count,
                                              cfg.volume->sampler, cfg.seed);
  }
  return record;
}

SafeOptState final_state(const ExperimentRecord& record) {
  const ExperimentConfig cfg = parse_config(record.config);
  std::vector<Sample> samples;
  samples.reserve(record.rows.size());
  for (const auto& row : record.rows) samples.push_back({row.x, row.outputs});
  return SafeOptState::from_samples(cfg.kernels, cfg.beta, cfg.thresholds, std::move(samples));
}

double record_safe_volume(const ExperimentRecord& record, Eigen::Index count, SamplerKind sampler) {
  const ExperimentConfig cfg = parse_config(record.config);
  return safe_volume_estimate(final_state(record), cfg.box, count, sampler, record.seed);
}

Comparison compare_runs(const std::vector<ExperimentRecord>& records) {
  if (records.size() < 2) throw InputError("compare needs at least two records");
  const auto& ref = records.front().config;
  for (std::size_t i = 1; i < records.size(); ++i) {
    for (const char* block : {"plant", "box"}) {
      const json a = ref.value(block, json());
      const json b = records[i].config.value(block, json());
      if (a == b) continue;
      std::ostringstream msg;
      msg << "record " << i << " (" << records[i].algorithm << ", seed " << records[i].seed
          << ") differs from record 0 in";
      for (const auto& op : json::diff(a, b)) msg << ' ' << block << op.at("path").get<std::string>();
      throw ConfigError(block, msg.str());
    }
  }

  std::vector<std::string> order;
  std::map<std::string, std::vector<const ExperimentRecord*>> groups;
  for (const auto& r : records) {
    if (!groups.count(r.algorithm)) order.push_back(r.algorithm);
    groups[r.algorithm].push_back(&r);
  }
  Comparison out;
  for (const auto& alg : order) {
    ComparisonRow row;
    row.algorithm = alg;
    std::vector<double> best;
    std::vector<double> wall;
    std::vector<double> iters;
    const ExperimentRecord* winner = nullptr;
    for (const auto* r : groups[alg]) {
      ++row.runs;
      wall.push_back(r->wall_seconds);
      iters.push_back(r->iterations);
      if (!std::isfinite(r->best_objective)) continue;
      best.push_back(r->best_objective);
      if (!winner || r->best_objective < winner->best_objective) winner = r;
    }
    row.best_objective_mean = mean_of(best);
    row.best_objective_std = stddev_of(best);
    row.wall_seconds_mean = mean_of(wall);
    row.iterations_mean = mean_of(iters);
    if (winner) row.best_x = winner->best_x;
    out.rows.push_back(std::move(row));
  }
  return out;
}

void write_comparison(const Comparison& comparison, const std::vector<ExperimentRecord>& records,
                      const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  std::ofstream table(directory / "comparison.csv", std::ios::trunc);
  if (!table) throw InputError("cannot write " + (directory / "comparison.csv").string());
  table << "algorithm,runs,best_objective_mean,best_objective_std,wall_seconds_mean,iterations_mean,best_x\n";
  for (const auto& r : comparison.rows) {
    table << r.algorithm << ',' << r.runs << ',' << fmt(r.best_objective_mean) << ','
          << fmt(r.best_objective_std) << ',' << fmt(r.wall_seconds_mean) << ','
          << fmt(r.iterations_mean) << ',';
    for (Eigen::Index d = 0; d < r.best_x.size(); ++d) table << (d ? " " : "") << fmt(r.best_x[d]);
    table << '\n';
  }
  std::ofstream timing(directory / "comparison_timing.csv", std::ios::trunc);
  if (!timing) throw InputError("cannot write " + (directory / "comparison_timing.csv").string());
  timing << "algorithm,seed,iteration,optimizer_seconds,expander_seconds,total_seconds\n";
  for (const auto& rec : records) {
    for (const auto& row : rec.rows) {
      if (row.iteration == 0) continue;
      timing << rec.algorithm << ',' << rec.seed << ',' << row.iteration << ','
             << fmt(row.optimizer_seconds) << ',' << fmt(row.expander_seconds) << ','
             << fmt(row.total_seconds) << '\n';
    }
  }
}

}  // namespace safeopt
