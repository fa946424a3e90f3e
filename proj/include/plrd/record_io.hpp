#pragma once

#include <optional>
#include <string>

#include <json.hpp>

#include "plrd/estimate.hpp"
#include "plrd/sim_io.hpp"

namespace plrd {

//! Flat, serializable record of one estimation run. `tau_hat` always follows
//! the jump convention mu+(c) - mu-(c); `treatment_effect` applies the treated
//! side (negated when the treatment is below the cutoff).
struct ResultRecord {
  double tau_hat = 0.0;
  double se = 0.0;
  double ci_lower = 0.0;
  double ci_upper = 0.0;
  double alpha = 0.05;
  double h_requested = 0.0;
  double h_used = 0.0;
  bool floor_binding = false;
  int n = 0;
  int n_within_h = 0;
  int degree = 1;
  std::string kernel = "epanechnikov";
  std::string rule = "sm";
  std::string variance_method = "ple_wu";
  std::string treated_side = "above";
  double treatment_effect = 0.0;
  double elapsed_ms = 0.0;
  std::optional<SmDiagnostics> sm;

  bool operator==(const ResultRecord& o) const {
    auto sm_equal = [&]() {
      if (sm.has_value() != o.sm.has_value()) return false;
      if (!sm.has_value()) return true;
      const SmDiagnostics& a = *sm;
      const SmDiagnostics& b = *o.sm;
      return a.f_c == b.f_c && a.f1_c == b.f1_c && a.f2_c == b.f2_c &&
             a.f_c_raw == b.f_c_raw && a.f_floor_applied == b.f_floor_applied &&
             a.kde_bandwidths == b.kde_bandwidths && a.mu1_c == b.mu1_c &&
             a.mu2_c == b.mu2_c && a.mu3_c == b.mu3_c && a.g2_c == b.g2_c &&
             a.g2p_c == b.g2p_c && a.b_p == b.b_p && a.sigma2_minus == b.sigma2_minus &&
             a.sigma2_plus == b.sigma2_plus && a.h_fg == b.h_fg &&
             a.fg_derivative_degenerate == b.fg_derivative_degenerate &&
             a.fg_capped == b.fg_capped && a.window_expanded == b.window_expanded &&
             a.h_unclamped == b.h_unclamped && a.h_floor == b.h_floor &&
             a.h_cap == b.h_cap && a.h_sm == b.h_sm && a.floored == b.floored &&
             a.capped == b.capped && a.bp_degenerate == b.bp_degenerate;
    };
    return tau_hat == o.tau_hat && se == o.se && ci_lower == o.ci_lower &&
           ci_upper == o.ci_upper && alpha == o.alpha && h_requested == o.h_requested &&
           h_used == o.h_used && floor_binding == o.floor_binding && n == o.n &&
           n_within_h == o.n_within_h && degree == o.degree && kernel == o.kernel &&
           rule == o.rule && variance_method == o.variance_method &&
           treated_side == o.treated_side && treatment_effect == o.treatment_effect &&
           elapsed_ms == o.elapsed_ms && sm_equal();
  }
};

inline ResultRecord make_result_record(const EstimateResult& r, const EstimateOptions& options,
                                       const std::string& treated_side) {
  ResultRecord rec;
  rec.tau_hat = r.fit.tau_hat;
  rec.se = r.variance.se;
  rec.ci_lower = r.ci.lower;
  rec.ci_upper = r.ci.upper;
  rec.alpha = r.ci.alpha;
  rec.h_requested = r.h_requested;
  rec.h_used = r.h_used;
  rec.floor_binding = r.floor_binding;
  rec.n = r.n;
  rec.n_within_h = r.n_within_h;
  rec.degree = options.degree;
  rec.kernel = kernel_name(options.kernel);
  rec.rule = bandwidth_rule_name(options.rule);
  rec.variance_method = variance_method_name(options.variance);
  rec.treated_side = treated_side;
  rec.treatment_effect = treated_side == "below" ? -r.fit.tau_hat : r.fit.tau_hat;
  rec.elapsed_ms = r.elapsed_ms;
  rec.sm = r.sm;
  return rec;
}

inline nlohmann::json sm_diagnostics_json(const SmDiagnostics& d) {
  return nlohmann::json{
      {"f_c", d.f_c},
      {"f1_c", d.f1_c},
      {"f2_c", d.f2_c},
      {"f_c_raw", d.f_c_raw},
      {"f_floor_applied", d.f_floor_applied},
      {"kde_bandwidths", d.kde_bandwidths},
      {"mu1_c", d.mu1_c},
      {"mu2_c", d.mu2_c},
      {"mu3_c", d.mu3_c},
      {"g2_c", d.g2_c},
      {"g2p_c", d.g2p_c},
      {"b_p", d.b_p},
      {"sigma2_minus", d.sigma2_minus},
      {"sigma2_plus", d.sigma2_plus},
      {"h_fg", d.h_fg},
      {"fg_derivative_degenerate", d.fg_derivative_degenerate},
      {"fg_capped", d.fg_capped},
      {"window_expanded", d.window_expanded},
      {"h_unclamped", d.h_unclamped},
      {"h_floor", d.h_floor},
      {"h_cap", d.h_cap},
      {"h_sm", d.h_sm},
      {"floored", d.floored},
      {"capped", d.capped},
      {"bp_degenerate", d.bp_degenerate},
  };
}

inline SmDiagnostics sm_diagnostics_from_json(const nlohmann::json& j) {
  SmDiagnostics d;
  d.f_c = j.at("f_c").get<double>();
  d.f1_c = j.at("f1_c").get<double>();
  d.f2_c = j.at("f2_c").get<double>();
  d.f_c_raw = j.at("f_c_raw").get<double>();
  d.f_floor_applied = j.at("f_floor_applied").get<bool>();
  d.kde_bandwidths = j.at("kde_bandwidths").get<std::array<double, 3>>();
  d.mu1_c = j.at("mu1_c").get<double>();
  d.mu2_c = j.at("mu2_c").get<double>();
  d.mu3_c = j.at("mu3_c").get<double>();
  d.g2_c = j.at("g2_c").get<double>();
  d.g2p_c = j.at("g2p_c").get<double>();
  d.b_p = j.at("b_p").get<double>();
  d.sigma2_minus = j.at("sigma2_minus").get<double>();
  d.sigma2_plus = j.at("sigma2_plus").get<double>();
  d.h_fg = j.at("h_fg").get<std::array<double, 3>>();
  d.fg_derivative_degenerate = j.at("fg_derivative_degenerate").get<std::array<bool, 3>>();
  d.fg_capped = j.at("fg_capped").get<std::array<bool, 3>>();
  d.window_expanded = j.at("window_expanded").get<std::array<bool, 3>>();
  d.h_unclamped = j.at("h_unclamped").get<double>();
  d.h_floor = j.at("h_floor").get<double>();
  d.h_cap = j.at("h_cap").get<double>();
  d.h_sm = j.at("h_sm").get<double>();
  d.floored = j.at("floored").get<bool>();
  d.capped = j.at("capped").get<bool>();
  d.bp_degenerate = j.at("bp_degenerate").get<bool>();
  return d;
}

inline nlohmann::json result_record_json(const ResultRecord& r) {
  nlohmann::json j{
      {"tau_hat", r.tau_hat},
      {"se", r.se},
      {"ci_lower", r.ci_lower},
      {"ci_upper", r.ci_upper},
      {"alpha", r.alpha},
      {"h_requested", r.h_requested},
      {"h_used", r.h_used},
      {"floor_binding", r.floor_binding},
      {"n", r.n},
      {"n_within_h", r.n_within_h},
      {"degree", r.degree},
      {"kernel", r.kernel},
      {"rule", r.rule},
      {"variance_method", r.variance_method},
      {"treated_side", r.treated_side},
      {"treatment_effect", r.treatment_effect},
      {"elapsed_ms", r.elapsed_ms},
  };
  j["sm"] = r.sm ? sm_diagnostics_json(*r.sm) : nlohmann::json(nullptr);
  return j;
}

inline ResultRecord result_record_from_json(const nlohmann::json& j) {
  ResultRecord r;
  r.tau_hat = j.at("tau_hat").get<double>();
  r.se = j.at("se").get<double>();
  r.ci_lower = j.at("ci_lower").get<double>();
  r.ci_upper = j.at("ci_upper").get<double>();
  r.alpha = j.at("alpha").get<double>();
  r.h_requested = j.at("h_requested").get<double>();
  r.h_used = j.at("h_used").get<double>();
  r.floor_binding = j.at("floor_binding").get<bool>();
  r.n = j.at("n").get<int>();
  r.n_within_h = j.at("n_within_h").get<int>();
  r.degree = j.at("degree").get<int>();
  r.kernel = j.at("kernel").get<std::string>();
  r.rule = j.at("rule").get<std::string>();
  r.variance_method = j.at("variance_method").get<std::string>();
  r.treated_side = j.at("treated_side").get<std::string>();
  r.treatment_effect = j.at("treatment_effect").get<double>();
  r.elapsed_ms = j.at("elapsed_ms").get<double>();
  if (j.contains("sm") && !j.at("sm").is_null()) {
    r.sm = sm_diagnostics_from_json(j.at("sm"));
  }
  return r;
}

//! Two-line CSV rendering (header + values); diagnostics stay in the JSON form.
inline std::string result_record_csv(const ResultRecord& r) {
  std::string head, vals;
  auto add = [&](const std::string& k, const std::string& v) {
    if (!head.empty()) {
      head += ',';
      vals += ',';
    }
    head += k;
    vals += v;
  };
  add("tau_hat", sim_io::format_double(r.tau_hat));
  add("se", sim_io::format_double(r.se));
  add("ci_lower", sim_io::format_double(r.ci_lower));
  add("ci_upper", sim_io::format_double(r.ci_upper));
  add("alpha", sim_io::format_double(r.alpha));
  add("h_requested", sim_io::format_double(r.h_requested));
  add("h_used", sim_io::format_double(r.h_used));
  add("floor_binding", r.floor_binding ? "1" : "0");
  add("n", std::to_string(r.n));
  add("n_within_h", std::to_string(r.n_within_h));
  add("degree", std::to_string(r.degree));
  add("kernel", r.kernel);
  add("rule", r.rule);
  add("variance_method", r.variance_method);
  add("treated_side", r.treated_side);
  add("treatment_effect", sim_io::format_double(r.treatment_effect));
  return head + "\n" + vals + "\n";
}

} // namespace plrd
