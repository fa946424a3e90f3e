#pragma once

#include <cmath>
#include <cstdio>
#include <fstream>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "plrd/csv.hpp"
#include "plrd/error.hpp"
#include "plrd/simulation.hpp"
#include "plrd/version.hpp"

namespace plrd {
namespace sim_io {

//! Shortest round-trippable decimal rendering of a double; deterministic bytes.
inline std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  double back = std::strtod(buf, nullptr);
  if (back == v) {
    for (int prec = 1; prec < 17; ++prec) {
      char shorter[40];
      std::snprintf(shorter, sizeof(shorter), "%.*g", prec, v);
      if (std::strtod(shorter, nullptr) == v) return shorter;
    }
  }
  return buf;
}

//! Flat, typed simulation configuration; unknown keys are errors.
struct SimConfig {
  int dgp = 0;
  int n = 0;
  double m_bar = 0.0;
  int replications = 0;
  double alpha = 0.05;
  std::uint64_t seed = 0;
  std::vector<std::string> methods;
  std::string out_dir = ".";
  int workers = 1;
};

inline SimConfig parse_config_json(const nlohmann::json& j) {
  if (!j.is_object()) {
    throw Error(ErrorCode::config_error, "simulation", "config must be a JSON object");
  }
  static const std::set<std::string> known = {"dgp",  "n",       "m_bar", "replications",
                                              "alpha", "seed",   "methods", "out",
                                              "workers"};
  std::string unknown;
  for (auto it = j.begin(); it != j.end(); ++it) {
    if (!known.count(it.key())) unknown += (unknown.empty() ? "" : ", ") + it.key();
  }
  if (!unknown.empty()) {
    throw Error(ErrorCode::config_error, "simulation", "unknown config keys: " + unknown);
  }
  auto require = [&](const char* key) {
    if (!j.contains(key)) {
      throw Error(ErrorCode::config_error, "simulation",
                  std::string("missing config key '") + key + "'");
    }
  };
  auto type_error = [&](const char* key, const char* want) -> Error {
    return Error(ErrorCode::config_error, "simulation",
                 std::string("config key '") + key + "' must be " + want);
  };

  SimConfig c;
  require("dgp");
  if (!j["dgp"].is_number_integer()) throw type_error("dgp", "an integer 1..4");
  c.dgp = j["dgp"].get<int>();

  const bool has_n = j.contains("n");
  const bool has_mbar = j.contains("m_bar");
  if (has_n == has_mbar) {
    throw Error(ErrorCode::config_error, "simulation",
                "exactly one of 'n' and 'm_bar' is required");
  }
  if (has_n) {
    if (!j["n"].is_number_integer() || j["n"].get<int>() < 2) {
      throw type_error("n", "an integer >= 2");
    }
    c.n = j["n"].get<int>();
  } else {
    if (!j["m_bar"].is_number() || !(j["m_bar"].get<double>() > 0.0)) {
      throw type_error("m_bar", "a positive number");
    }
    c.m_bar = j["m_bar"].get<double>();
  }

  require("replications");
  if (!j["replications"].is_number_integer() || j["replications"].get<int>() < 1) {
    throw type_error("replications", "an integer >= 1");
  }
  c.replications = j["replications"].get<int>();

  if (j.contains("alpha")) {
    if (!j["alpha"].is_number()) throw type_error("alpha", "a number in (0,1)");
    c.alpha = j["alpha"].get<double>();
    if (!(c.alpha > 0.0 && c.alpha < 1.0)) throw type_error("alpha", "a number in (0,1)");
  }
  require("seed");
  if (!j["seed"].is_number_unsigned() && !j["seed"].is_number_integer()) {
    throw type_error("seed", "a nonnegative integer");
  }
  c.seed = j["seed"].get<std::uint64_t>();

  require("methods");
  if (!j["methods"].is_array() || j["methods"].empty()) {
    throw type_error("methods", "a non-empty array of method strings");
  }
  for (const auto& m : j["methods"]) {
    if (!m.is_string()) throw type_error("methods", "an array of strings");
    c.methods.push_back(m.get<std::string>());
  }

  if (j.contains("out")) {
    if (!j["out"].is_string()) throw type_error("out", "a string");
    c.out_dir = j["out"].get<std::string>();
  }
  if (j.contains("workers")) {
    if (!j["workers"].is_number_integer() || j["workers"].get<int>() < 1) {
      throw type_error("workers", "an integer >= 1");
    }
    c.workers = j["workers"].get<int>();
  }
  return c;
}

inline SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::io_error, "simulation", "cannot open config '" + path + "'");
  }
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::config_error, "simulation",
                "config '" + path + "' is not valid JSON: " + e.what());
  }
  return parse_config_json(j);
}

inline SimStudy to_study(const SimConfig& c) {
  SimStudy study;
  study.dgp = dgp_spec(c.dgp);
  study.n = c.n;
  study.m_bar = c.m_bar;
  study.replications = c.replications;
  study.alpha = c.alpha;
  study.master_seed = c.seed;
  study.workers = c.workers;
  for (const auto& m : c.methods) study.methods.push_back(parse_method(m));
  return study;
}

namespace detail {

inline void append_metric(std::string& out, const std::string& method, const char* name,
                          const MetricCell& cell) {
  out += method;
  out += ',';
  out += name;
  out += ',';
  if (cell.defined) {
    out += format_double(cell.estimate);
    out += ',';
    if (!std::isnan(cell.mcse)) out += format_double(cell.mcse);
  } else {
    out += ',';
  }
  out += '\n';
}

inline nlohmann::json cell_json(const MetricCell& cell) {
  nlohmann::json j;
  if (!cell.defined) return nullptr;
  j["estimate"] = cell.estimate;
  if (std::isnan(cell.mcse)) {
    j["mcse"] = nullptr;
  } else {
    j["mcse"] = cell.mcse;
  }
  return j;
}

} // namespace detail

//! One row per method x metric with estimate and MCSE columns; study-level
//! counts carried on `_study` rows.
inline std::string metrics_csv(const MetricsTable& t) {
  std::string out = "method,metric,estimate,mcse\n";
  out += "_study,n," + std::to_string(t.n) + ",\n";
  out += "_study,replications," + std::to_string(t.replications) + ",\n";
  out += "_study,common_success_count," + std::to_string(t.common_success_count) + ",\n";
  for (const auto& row : t.rows) {
    detail::append_metric(out, row.method, "mse", row.mse);
    detail::append_metric(out, row.method, "bias", row.bias);
    detail::append_metric(out, row.method, "emp_se", row.emp_se);
    detail::append_metric(out, row.method, "mod_se", row.mod_se);
    detail::append_metric(out, row.method, "rel_e", row.rel_e);
    detail::append_metric(out, row.method, "coverage", row.coverage);
    detail::append_metric(out, row.method, "median_width", row.median_width);
    detail::append_metric(out, row.method, "success_rate", row.success_rate);
    out += row.method + ",success_count," + std::to_string(row.success_count) + ",\n";
  }
  return out;
}

inline nlohmann::json metrics_json(const MetricsTable& t) {
  nlohmann::json j;
  j["n"] = t.n;
  j["replications"] = t.replications;
  j["common_success_count"] = t.common_success_count;
  j["methods"] = nlohmann::json::array();
  for (const auto& row : t.rows) {
    nlohmann::json m;
    m["method"] = row.method;
    m["success_count"] = row.success_count;
    m["metrics"] = {
        {"mse", detail::cell_json(row.mse)},
        {"bias", detail::cell_json(row.bias)},
        {"emp_se", detail::cell_json(row.emp_se)},
        {"mod_se", detail::cell_json(row.mod_se)},
        {"rel_e", detail::cell_json(row.rel_e)},
        {"coverage", detail::cell_json(row.coverage)},
        {"median_width", detail::cell_json(row.median_width)},
        {"success_rate", detail::cell_json(row.success_rate)},
    };
    j["methods"].push_back(m);
  }
  return j;
}

struct SimulationFiles {
  std::string metrics_csv_path;
  std::string metrics_json_path;
  std::string manifest_path;
};

//! Run a configured study and persist metrics CSV + JSON plus a run manifest.
//! Metric files are deterministic for a fixed config (any worker count);
//! the manifest additionally records wall time.
inline SimulationFiles run_simulation(const SimConfig& config, MetricsTable* table_out = nullptr) {
  const auto t0 = std::chrono::steady_clock::now();
  const SimStudy study = to_study(config);
  const MetricsTable table = run_study(study);
  const double wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();

  const std::string dir = config.out_dir;
  SimulationFiles files{dir + "/metrics.csv", dir + "/metrics.json", dir + "/manifest.json"};

  csv::write_file_atomic(files.metrics_csv_path, metrics_csv(table));
  csv::write_file_atomic(files.metrics_json_path, metrics_json(table).dump(2) + "\n");

  nlohmann::json manifest;
  manifest["version"] = kVersion;
  manifest["config"] = {
      {"dgp", config.dgp},
      {"replications", config.replications},
      {"alpha", config.alpha},
      {"seed", config.seed},
      {"methods", config.methods},
      {"workers", config.workers},
  };
  if (config.n > 0) {
    manifest["config"]["n"] = config.n;
  } else {
    manifest["config"]["m_bar"] = config.m_bar;
  }
  manifest["resolved_n"] = table.n;
  manifest["common_success_count"] = table.common_success_count;
  manifest["wall_time_ms"] = wall_ms;
  csv::write_file_atomic(files.manifest_path, manifest.dump(2) + "\n");

  if (table_out != nullptr) *table_out = table;
  return files;
}

} // namespace sim_io
} // namespace plrd
