#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <string>

#include "plrd/bandwidth.hpp"
#include "plrd/dataset.hpp"
#include "plrd/density.hpp"
#include "plrd/error.hpp"
#include "plrd/ik.hpp"
#include "plrd/local_polynomial.hpp"
#include "plrd/ple.hpp"
#include "plrd/variance.hpp"

namespace plrd {

enum class BandwidthRule { sm, ik, fixed };

inline const char* bandwidth_rule_name(BandwidthRule r) {
  switch (r) {
    case BandwidthRule::sm: return "sm";
    case BandwidthRule::ik: return "ik";
    case BandwidthRule::fixed: return "fixed";
  }
  return "unknown";
}

struct EstimateOptions {
  int degree = 1;
  KernelType kernel = KernelType::epanechnikov;
  BandwidthRule rule = BandwidthRule::sm;
  double fixed_h = 0.0;  // used when rule == fixed
  double alpha = 0.05;
  VarianceMethod variance = VarianceMethod::ple_wu;
};

//! Parse "sm", "ik", or "fixed:<h>".
inline std::pair<BandwidthRule, double> parse_bandwidth_rule(const std::string& s) {
  if (s == "sm") return {BandwidthRule::sm, 0.0};
  if (s == "ik") return {BandwidthRule::ik, 0.0};
  if (s.rfind("fixed:", 0) == 0) {
    const std::string num = s.substr(6);
    char* end = nullptr;
    const double h = std::strtod(num.c_str(), &end);
    if (num.empty() || end != num.c_str() + num.size() || !(h > 0.0)) {
      throw Error(ErrorCode::invalid_argument, "estimate",
                  "fixed bandwidth rule needs a positive number, got '" + s + "'");
    }
    return {BandwidthRule::fixed, h};
  }
  throw Error(ErrorCode::invalid_argument, "estimate", "unknown bandwidth rule '" + s + "'");
}

struct EstimateResult {
  PleFit fit;
  VarianceEstimate variance;
  ConfidenceInterval ci;
  double h_requested = 0.0;
  double h_used = 0.0;
  bool floor_binding = false;
  std::optional<SmDiagnostics> sm;
  int n = 0;
  int n_within_h = 0;
  double elapsed_ms = 0.0;
};

//! Full PLE pipeline: resolve the bandwidth via the named rule, apply the
//! sparsity floor, fit, then the requested variance and interval. Every error
//! thrown from here carries the stage that raised it.
inline EstimateResult ple_estimate(const RdDataset& data, const EstimateOptions& options) {
  const auto t0 = std::chrono::steady_clock::now();
  if (!(options.alpha > 0.0 && options.alpha < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "estimate", "alpha must be in (0,1)");
  }
  EstimateResult out;
  out.n = data.n();

  // Bandwidth resolution plus the minimum-feasible floor.
  switch (options.rule) {
    case BandwidthRule::sm: {
      const SmBandwidth sm = sm_bandwidth(data, options.degree, options.kernel);
      out.sm = sm.diagnostics;
      out.h_requested = sm.diagnostics.h_unclamped;
      out.h_used = sm.h_sm;
      out.floor_binding = sm.diagnostics.floored;
      break;
    }
    case BandwidthRule::ik: {
      out.h_requested = ik_bandwidth(data);
      const BandwidthFloor floor = min_feasible_bandwidth(data, options.degree, options.kernel);
      out.floor_binding = out.h_requested < floor.h_min;
      out.h_used = out.floor_binding ? floor.h_min : out.h_requested;
      break;
    }
    case BandwidthRule::fixed: {
      if (!(options.fixed_h > 0.0)) {
        throw Error(ErrorCode::invalid_argument, "estimate", "fixed bandwidth must be positive");
      }
      out.h_requested = options.fixed_h;
      const BandwidthFloor floor = min_feasible_bandwidth(data, options.degree, options.kernel);
      out.floor_binding = out.h_requested < floor.h_min;
      out.h_used = out.floor_binding ? floor.h_min : out.h_requested;
      break;
    }
  }

  const LocPolyConfig cfg{options.degree, options.kernel, out.h_used};
  const SmootherMatrix smoother = smoother_matrix(data, cfg);
  out.fit = ple_fit(data, smoother);

  switch (options.variance) {
    case VarianceMethod::ple_wu:
      out.variance = variance_ple_wu(out.fit);
      break;
    case VarianceMethod::hinkley:
      out.variance = variance_hinkley(out.fit);
      break;
    case VarianceMethod::hinkley_orig:
    case VarianceMethod::wu_orig:
      out.variance = variance_delete_observation(data, cfg, out.fit, options.variance);
      break;
    case VarianceMethod::porter_plugin: {
      DensityEstimate density;
      if (out.sm.has_value()) {
        density.f_c = out.sm->f_c;
        density.f1_c = out.sm->f1_c;
        density.f2_c = out.sm->f2_c;
        density.n = data.n();
      } else {
        density = density_at_cutoff(data);
      }
      const double below = out.sm ? out.sm->sigma2_minus : nn_variance(data, CutoffSide::below);
      const double above = out.sm ? out.sm->sigma2_plus : nn_variance(data, CutoffSide::above);
      out.variance = variance_porter_plugin(out.fit, density, below, above);
      break;
    }
    case VarianceMethod::dpi:
      out.variance = variance_dpi(data, smoother, out.fit);
      break;
    case VarianceMethod::none:
      out.variance = VarianceEstimate{};
      out.variance.method = VarianceMethod::none;
      break;
  }

  if (options.variance != VarianceMethod::none) {
    out.ci = confidence_interval(out.fit.tau_hat, out.variance.se, options.alpha);
  } else {
    out.ci = ConfidenceInterval{out.fit.tau_hat, out.fit.tau_hat, options.alpha,
                                out.fit.tau_hat};
  }

  for (double xi : data.x) {
    if (std::abs(xi - data.cutoff) <= out.h_used) ++out.n_within_h;
  }
  out.elapsed_ms = std::chrono::duration<double, std::milli>(
                       std::chrono::steady_clock::now() - t0)
                       .count();
  return out;
}

} // namespace plrd
