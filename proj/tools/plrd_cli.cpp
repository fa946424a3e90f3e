#include <cstdio>
#include <iostream>
#include <string>

#include <CLI11.hpp>
#include <json.hpp>

#include "plrd/plrd.hpp"
#include "plrd/record_io.hpp"

namespace {

void emit(const std::string& text, const std::string& out_path) {
  if (out_path.empty()) {
    std::cout << text;
  } else {
    plrd::csv::write_file_atomic(out_path, text);
  }
}

int run_estimate(const std::string& input, const std::string& xcol, const std::string& ycol,
                 double cutoff, int degree, const std::string& kernel, const std::string& rule,
                 const std::string& variance, double alpha, const std::string& format,
                 const std::string& treated, const std::string& out_path) {
  const plrd::RdDataset data = plrd::csv::load_dataset(input, xcol, ycol, cutoff);
  plrd::EstimateOptions options;
  options.degree = degree;
  options.kernel = plrd::parse_kernel(kernel);
  const auto [rule_kind, fixed_h] = plrd::parse_bandwidth_rule(rule);
  options.rule = rule_kind;
  options.fixed_h = fixed_h;
  options.alpha = alpha;
  options.variance = plrd::parse_variance_method(variance);
  if (treated != "above" && treated != "below") {
    throw plrd::Error(plrd::ErrorCode::invalid_argument, "cli",
                      "--treated must be 'above' or 'below'");
  }
  const plrd::EstimateResult result = plrd::ple_estimate(data, options);
  const plrd::ResultRecord record = plrd::make_result_record(result, options, treated);
  if (format == "json") {
    emit(plrd::result_record_json(record).dump(2) + "\n", out_path);
  } else if (format == "csv") {
    emit(plrd::result_record_csv(record), out_path);
  } else {
    throw plrd::Error(plrd::ErrorCode::invalid_argument, "cli",
                      "--format must be 'json' or 'csv'");
  }
  return 0;
}

int run_simulate(const std::string& config_path, const std::string& out_dir, int workers) {
  plrd::sim_io::SimConfig config = plrd::sim_io::load_config(config_path);
  if (!out_dir.empty()) config.out_dir = out_dir;
  if (workers > 0) config.workers = workers;
  const auto files = plrd::sim_io::run_simulation(config);
  std::cout << files.metrics_csv_path << "\n"
            << files.metrics_json_path << "\n"
            << files.manifest_path << "\n";
  return 0;
}

int run_dgp(int dgp_id, int n, std::uint64_t seed, const std::string& out_path) {
  const plrd::RdDataset data = plrd::dgp_sample(plrd::dgp_spec(dgp_id), n, seed);
  std::string out = "x,y,d\n";
  for (int i = 0; i < data.n(); ++i) {
    out += plrd::sim_io::format_double(data.x[static_cast<std::size_t>(i)]);
    out += ',';
    out += plrd::sim_io::format_double(data.y[static_cast<std::size_t>(i)]);
    out += ',';
    out += data.treated(i) ? '1' : '0';
    out += '\n';
  }
  emit(out, out_path);
  return 0;
}

int run_bandwidth(const std::string& input, const std::string& xcol, const std::string& ycol,
                  double cutoff, int degree, const std::string& kernel, const std::string& rule,
                  const std::string& out_path) {
  const plrd::RdDataset data = plrd::csv::load_dataset(input, xcol, ycol, cutoff);
  const plrd::KernelType k = plrd::parse_kernel(kernel);
  const auto [rule_kind, fixed_h] = plrd::parse_bandwidth_rule(rule);
  nlohmann::json report;
  report["rule"] = rule;
  report["n"] = data.n();
  const plrd::BandwidthFloor floor = plrd::min_feasible_bandwidth(data, degree, k);
  report["h_floor"] = floor.h_min;
  switch (rule_kind) {
    case plrd::BandwidthRule::sm: {
      const plrd::SmBandwidth sm = plrd::sm_bandwidth(data, degree, k);
      report["h_requested"] = sm.diagnostics.h_unclamped;
      report["h_used"] = sm.h_sm;
      report["floor_binding"] = sm.diagnostics.floored;
      report["sm"] = plrd::sm_diagnostics_json(sm.diagnostics);
      break;
    }
    case plrd::BandwidthRule::ik: {
      const plrd::IkDiagnostics ik = plrd::ik_bandwidth_detail(data);
      report["h_requested"] = ik.h_opt;
      report["h_used"] = std::max(ik.h_opt, floor.h_min);
      report["floor_binding"] = ik.h_opt < floor.h_min;
      report["ik"] = {
          {"h1", ik.h1},           {"f_c", ik.f_c},
          {"sigma2_c", ik.sigma2_c}, {"m3", ik.m3},
          {"h2_minus", ik.h2_minus}, {"h2_plus", ik.h2_plus},
          {"m2_minus", ik.m2_minus}, {"m2_plus", ik.m2_plus},
          {"reg_minus", ik.reg_minus}, {"reg_plus", ik.reg_plus},
      };
      break;
    }
    case plrd::BandwidthRule::fixed: {
      report["h_requested"] = fixed_h;
      report["h_used"] = std::max(fixed_h, floor.h_min);
      report["floor_binding"] = fixed_h < floor.h_min;
      break;
    }
  }
  emit(report.dump(2) + "\n", out_path);
  return 0;
}

} // namespace

int main(int argc, char** argv) {
  CLI::App app{"Partial-linear regression discontinuity toolkit"};
  app.require_subcommand(1);

  // estimate
  auto* est = app.add_subcommand("estimate", "Estimate the RD treatment effect from a CSV file");
  std::string input, xcol, ycol;
  double cutoff = 0.0;
  int degree = 1;
  std::string kernel = "epanechnikov", rule = "sm", variance = "ple_wu";
  double alpha = 0.05;
  std::string format = "json", treated = "above", out_path;
  est->add_option("--input", input, "input CSV path")->required();
  est->add_option("--x", xcol, "running-variable column name")->required();
  est->add_option("--y", ycol, "response column name")->required();
  est->add_option("--cutoff", cutoff, "treatment cutoff")->required();
  est->add_option("--degree", degree, "local polynomial degree (0..5)");
  est->add_option("--kernel", kernel, "epanechnikov|triangular|uniform|gaussian");
  est->add_option("--rule", rule, "bandwidth rule: sm | ik | fixed:<h>");
  est->add_option("--variance", variance,
                  "ple_wu|hinkley|hinkley_orig|wu_orig|porter_plugin|dpi");
  est->add_option("--alpha", alpha, "interval level alpha");
  est->add_option("--format", format, "output format: json | csv");
  est->add_option("--treated", treated, "treated side: above | below");
  est->add_option("--out", out_path, "write output to file (atomic) instead of stdout");

  // simulate
  auto* sim = app.add_subcommand("simulate", "Run a Monte Carlo study from a config file");
  std::string config_path, sim_out;
  int workers = 0;
  sim->add_option("--config", config_path, "JSON config path")->required();
  sim->add_option("--out", sim_out, "output directory (overrides config)");
  sim->add_option("--workers", workers, "worker threads (overrides config)");

  // dgp
  auto* dgp = app.add_subcommand("dgp", "Emit a simulated dataset as CSV");
  int dgp_id = 1, dgp_n = 100;
  std::uint64_t seed = 0;
  std::string dgp_out;
  dgp->add_option("--dgp", dgp_id, "DGP id (1..4)")->required();
  dgp->add_option("--n", dgp_n, "sample size")->required();
  dgp->add_option("--seed", seed, "RNG seed")->required();
  dgp->add_option("--out", dgp_out, "output CSV path (stdout if omitted)");

  // bandwidth
  auto* bw = app.add_subcommand("bandwidth", "Report every bandwidth-selection intermediate");
  std::string bw_input, bw_x, bw_y, bw_rule = "sm", bw_kernel = "epanechnikov", bw_out;
  double bw_cutoff = 0.0;
  int bw_degree = 1;
  bw->add_option("--input", bw_input, "input CSV path")->required();
  bw->add_option("--x", bw_x, "running-variable column name")->required();
  bw->add_option("--y", bw_y, "response column name")->required();
  bw->add_option("--cutoff", bw_cutoff, "treatment cutoff")->required();
  bw->add_option("--degree", bw_degree, "local polynomial degree");
  bw->add_option("--kernel", bw_kernel, "kernel for the fit");
  bw->add_option("--rule", bw_rule, "bandwidth rule: sm | ik | fixed:<h>");
  bw->add_option("--out", bw_out, "write report to file instead of stdout");

  CLI11_PARSE(app, argc, argv);

  try {
    if (est->parsed()) {
      return run_estimate(input, xcol, ycol, cutoff, degree, kernel, rule, variance, alpha,
                          format, treated, out_path);
    }
    if (sim->parsed()) {
      return run_simulate(config_path, sim_out, workers);
    }
    if (dgp->parsed()) {
      return run_dgp(dgp_id, dgp_n, seed, dgp_out);
    }
    if (bw->parsed()) {
      return run_bandwidth(bw_input, bw_x, bw_y, bw_cutoff, bw_degree, bw_kernel, bw_rule,
                           bw_out);
    }
  } catch (const plrd::Error& e) {
    nlohmann::json err{{"error",
                        {{"code", e.code_name()}, {"stage", e.stage()}, {"message", e.what()}}}};
    std::cout << err.dump(2) << "\n";
    std::cerr << "error [" << e.code_name() << " @ " << e.stage() << "]: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    nlohmann::json err{{"error", {{"code", "internal"}, {"message", e.what()}}}};
    std::cout << err.dump(2) << "\n";
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 0;
}
