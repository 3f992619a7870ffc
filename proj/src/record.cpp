#include "safeopt/record.hpp"

#include "safeopt/errors.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <sstream>

namespace safeopt {
namespace {

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

double number_from(const nlohmann::json& j) {
  if (j.is_null()) return std::numeric_limits<double>::quiet_NaN();
  return j.get<double>();
}

nlohmann::json vector_json(const Eigen::VectorXd& v) {
  auto arr = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) arr.push_back(number_or_null(v[i]));
  return arr;
}

Eigen::VectorXd vector_from(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v[static_cast<Eigen::Index>(i)] = number_from(j[i]);
  return v;
}

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  std::string cell;
  std::istringstream in(line);
  while (std::getline(in, cell, sep)) out.push_back(cell);
  if (!line.empty() && line.back() == sep) out.emplace_back();
  return out;
}

double parse_double(const std::string& s) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str()) throw InputError("record CSV: cannot parse number '" + s + "'");
  return v;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InputError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const std::filesystem::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw InputError("cannot write " + path.string());
  out << text;
}

}  // namespace

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kMaxIterations: return "max_iterations";
    case StopReason::kTolerance: return "tolerance";
    case StopReason::kNoCandidate: return "no_candidate";
    case StopReason::kWallClock: return "wall_clock";
    case StopReason::kAborted: return "aborted";
  }
  return "unknown";
}

StopReason stop_reason_from_string(const std::string& text) {
  for (auto r : {StopReason::kMaxIterations, StopReason::kTolerance, StopReason::kNoCandidate,
                 StopReason::kWallClock, StopReason::kAborted}) {
    if (to_string(r) == text) return r;
  }
  throw InputError("unknown stop reason '" + text + "'");
}

void IncumbentTracker::observe(const Point& x, const Eigen::VectorXd& outputs) {
  for (std::size_t j = 0; j < thresholds_.size(); ++j) {
    if (!(outputs[static_cast<Eigen::Index>(j + 1)] <= thresholds_[j])) return;
  }
  if (!has_value() || outputs[0] < best_) {
    best_ = outputs[0];
    best_x_ = x;
  }
}

void append_row(ExperimentRecord& record, IncumbentTracker& tracker, IterationRow row) {
  tracker.observe(row.x, row.outputs);
  if (tracker.has_value()) {
    row.incumbent_best = tracker.best_objective();
    record.best_x = tracker.best_x();
    record.best_objective = tracker.best_objective();
  }
  record.rows.push_back(std::move(row));
}

void append_initial_rows(ExperimentRecord& record, IncumbentTracker& tracker,
                         const std::vector<Sample>& samples) {
  for (const auto& s : samples) {
    IterationRow row;
    row.iteration = 0;
    row.x = s.x;
    row.outputs = s.outputs;
    row.branch = "initial";
    append_row(record, tracker, std::move(row));
  }
}

RecordPaths record_paths(const std::filesystem::path& directory, const std::string& algorithm,
                         std::uint64_t seed) {
  const std::string stem = algorithm + "_seed" + std::to_string(seed);
  return {directory / (stem + ".csv"), directory / (stem + ".json"),
          directory / (stem + ".timing.json")};
}

std::string rows_to_csv(const ExperimentRecord& record) {
  std::ostringstream out;
  const Eigen::Index dim = record.rows.empty() ? 0 : record.rows.front().x.size();
  const Eigen::Index outputs = record.rows.empty() ? 0 : record.rows.front().outputs.size();
  out << "iteration";
  for (Eigen::Index d = 0; d < dim; ++d) out << ",x" << d;
  for (Eigen::Index j = 0; j < outputs; ++j) out << ",y" << j;
  out << ",branch,incumbent_best\n";
  for (const auto& row : record.rows) {
    out << row.iteration;
    for (Eigen::Index d = 0; d < row.x.size(); ++d) out << ',' << format_double(row.x[d]);
    for (Eigen::Index j = 0; j < row.outputs.size(); ++j) {
      out << ',' << format_double(row.outputs[j]);
    }
    out << ',' << row.branch << ',' << format_double(row.incumbent_best) << '\n';
  }
  return out.str();
}

void rows_from_csv(const std::string& text, ExperimentRecord& record) {
  std::istringstream in(text);
  std::string line;
  if (!std::getline(in, line)) throw InputError("record CSV is empty");
  const auto header = split(line, ',');
  Eigen::Index dim = 0;
  Eigen::Index outputs = 0;
  for (const auto& h : header) {
    if (h.size() > 1 && h[0] == 'x') ++dim;
    if (h.size() > 1 && h[0] == 'y') ++outputs;
  }
  const std::size_t expected = static_cast<std::size_t>(3 + dim + outputs);
  if (header.size() != expected) throw InputError("record CSV header is malformed");
  record.rows.clear();
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto cells = split(line, ',');
    if (cells.size() != expected) throw InputError("record CSV row has the wrong cell count");
    IterationRow row;
    row.iteration = std::stoi(cells[0]);
    row.x.resize(dim);
    row.outputs.resize(outputs);
    for (Eigen::Index d = 0; d < dim; ++d) row.x[d] = parse_double(cells[1 + d]);
    for (Eigen::Index j = 0; j < outputs; ++j) row.outputs[j] = parse_double(cells[1 + dim + j]);
    row.branch = cells[1 + dim + outputs];
    row.incumbent_best = parse_double(cells[2 + dim + outputs]);
    record.rows.push_back(std::move(row));
  }
}

nlohmann::json summary_to_json(const ExperimentRecord& record) {
  nlohmann::json summary;
  summary["best_x"] = vector_json(record.best_x);
  summary["best_objective"] = number_or_null(record.best_objective);
  summary["iterations"] = record.iterations;
  summary["plant_calls"] = record.plant_calls();
  summary["stop_reason"] = to_string(record.stop_reason);
  summary["message"] = record.message;
  summary["last_point_displacement"] = number_or_null(record.last_point_displacement);
  summary["last_objective_displacement"] = number_or_null(record.last_objective_displacement);
  summary["safe_volume"] =
      record.safe_volume ? nlohmann::json(*record.safe_volume) : nlohmann::json(nullptr);
  return summary;
}

RecordPaths write_record(const ExperimentRecord& record, const std::filesystem::path& directory) {
  std::filesystem::create_directories(directory);
  const auto paths = record_paths(directory, record.algorithm, record.seed);

  nlohmann::json doc;
  doc["algorithm"] = record.algorithm;
  doc["seed"] = record.seed;
  doc["config"] = record.config;
  doc["summary"] = summary_to_json(record);
  doc["files"] = {{"rows", paths.rows_csv.filename().string()},
                  {"timing", paths.timing_json.filename().string()}};

  nlohmann::json timing;
  timing["wall_seconds"] = record.wall_seconds;
  auto rows = nlohmann::json::array();
  for (const auto& row : record.rows) {
    rows.push_back({row.iteration, row.optimizer_seconds, row.expander_seconds, row.total_seconds});
  }
  timing["rows"] = std::move(rows);
  timing["columns"] = {"iteration", "optimizer_seconds", "expander_seconds", "total_seconds"};

  write_file(paths.rows_csv, rows_to_csv(record));
  write_file(paths.summary_json, doc.dump(2) + "\n");
  write_file(paths.timing_json, timing.dump(2) + "\n");
  return paths;
}

ExperimentRecord read_record(const std::filesystem::path& summary_json) {
  const auto doc = nlohmann::json::parse(read_file(summary_json));
  ExperimentRecord record;
  record.algorithm = doc.at("algorithm").get<std::string>();
  record.seed = doc.at("seed").get<std::uint64_t>();
  record.config = doc.at("config");
  const auto& s = doc.at("summary");
  record.best_x = vector_from(s.at("best_x"));
  record.best_objective = number_from(s.at("best_objective"));
  record.iterations = s.at("iterations").get<int>();
  record.stop_reason = stop_reason_from_string(s.at("stop_reason").get<std::string>());
  record.message = s.at("message").get<std::string>();
  record.last_point_displacement = number_from(s.at("last_point_displacement"));
  record.last_objective_displacement = number_from(s.at("last_objective_displacement"));
  if (!s.at("safe_volume").is_null()) record.safe_volume = s.at("safe_volume").get<double>();

  const auto dir = summary_json.parent_path();
  rows_from_csv(read_file(dir / doc.at("files").at("rows").get<std::string>()), record);

  const auto timing_path = dir / doc.at("files").at("timing").get<std::string>();
  if (std::filesystem::exists(timing_path)) {
    const auto timing = nlohmann::json::parse(read_file(timing_path));
    record.wall_seconds = timing.at("wall_seconds").get<double>();
    const auto& rows = timing.at("rows");
    if (rows.size() == record.rows.size()) {
      for (std::size_t i = 0; i < rows.size(); ++i) {
        record.rows[i].optimizer_seconds = rows[i][1].get<double>();
        record.rows[i].expander_seconds = rows[i][2].get<double>();
        record.rows[i].total_seconds = rows[i][3].get<double>();
      }
    }
  }
  return record;
}

}  // namespace safeopt
