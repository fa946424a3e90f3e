#pragma once

#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Dense>

#include "plrd/bandwidth.hpp"
#include "plrd/dataset.hpp"
#include "plrd/density.hpp"
#include "plrd/error.hpp"
#include "plrd/kernel_functionals.hpp"
#include "plrd/ple.hpp"
#include "plrd/stats.hpp"

namespace plrd {

enum class VarianceMethod {
  ple_wu,
  hinkley,
  hinkley_orig,
  wu_orig,
  porter_plugin,
  dpi,
  none,
};

inline const char* variance_method_name(VarianceMethod m) {
  switch (m) {
    case VarianceMethod::ple_wu: return "ple_wu";
    case VarianceMethod::hinkley: return "hinkley";
    case VarianceMethod::hinkley_orig: return "hinkley_orig";
    case VarianceMethod::wu_orig: return "wu_orig";
    case VarianceMethod::porter_plugin: return "porter_plugin";
    case VarianceMethod::dpi: return "dpi";
    case VarianceMethod::none: return "none";
  }
  return "unknown";
}

inline VarianceMethod parse_variance_method(const std::string& s) {
  if (s == "ple_wu") return VarianceMethod::ple_wu;
  if (s == "hinkley") return VarianceMethod::hinkley;
  if (s == "hinkley_orig") return VarianceMethod::hinkley_orig;
  if (s == "wu_orig") return VarianceMethod::wu_orig;
  if (s == "porter_plugin") return VarianceMethod::porter_plugin;
  if (s == "dpi") return VarianceMethod::dpi;
  if (s == "none") return VarianceMethod::none;
  throw Error(ErrorCode::invalid_argument, "variance", "unknown variance method '" + s + "'");
}

struct VarianceEstimate {
  VarianceMethod method = VarianceMethod::none;
  double value = 0.0;
  double se = 0.0;
  std::vector<std::pair<std::string, double>> intermediates;
};

struct ConfidenceInterval {
  double lower = 0.0;
  double upper = 0.0;
  double alpha = 0.0;
  double center = 0.0;

  double width() const { return upper - lower; }
};

//! The residual-delete jackknife variance in closed form:
//!   V = (D'D)^{-2} sum_i r_i^2 d_i^2 / (1 - w_i)
//! which equals sum_i (1 - w_i)(tau_(i) - tau)^2 over leave-one-residual-pair-
//! out refits.
inline VarianceEstimate variance_ple_wu(const PleFit& fit) {
  const int n = fit.n();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    const double w = fit.leverage(i);
    // gram * (1 - w_i) is the gram of the leave-one-residual-out refit behind
    // tau_(i); the same degeneracy tolerance as the full fit applies to it.
    if (w >= 1.0 || !(fit.gram * (1.0 - w) > 1e-12 * n)) {
      throw Error(ErrorCode::leverage_degenerate, "variance",
                  "residual pair " + std::to_string(i) +
                  " carries the entire treatment contrast (w = " + std::to_string(w) + ")");
    }
    sum += fit.r(i) * fit.r(i) * fit.d_resid(i) * fit.d_resid(i) / (1.0 - w);
  }
  VarianceEstimate v;
  v.method = VarianceMethod::ple_wu;
  v.value = sum / (fit.gram * fit.gram);
  v.se = std::sqrt(v.value);
  v.intermediates.emplace_back("gram", fit.gram);
  v.intermediates.emplace_back("max_leverage", fit.leverage.maxCoeff());
  return v;
}

//! Hinkley-weighted residual-delete jackknife:
//!   V = (D'D)^{-1} sum_i (r_i^2 / (1 - 1/n)) d_i^2 (D'D)^{-1}
inline VarianceEstimate variance_hinkley(const PleFit& fit) {
  const int n = fit.n();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    sum += fit.r(i) * fit.r(i) * fit.d_resid(i) * fit.d_resid(i);
  }
  VarianceEstimate v;
  v.method = VarianceMethod::hinkley;
  v.value = sum / (1.0 - 1.0 / n) / (fit.gram * fit.gram);
  v.se = std::sqrt(v.value);
  v.intermediates.emplace_back("gram", fit.gram);
  return v;
}

//! Delete-an-original-observation jackknives: the fit is recomputed on every
//! n-1 subset with the same bandwidth (the smoother is rebuilt on the subset),
//! and the Hinkley/Wu formulas are applied with the full-data leverages:
//!   V_HO = (1/(n(n-1))) sum_i ( n (1 - w_i)(tau - tau_(i*)) )^2
//!   V_WO = sum_i (1 - w_i)(tau_(i*) - tau)^2
inline VarianceEstimate variance_delete_observation(const RdDataset& data,
                                                    const LocPolyConfig& config,
                                                    const PleFit& fit, VarianceMethod flavor) {
  if (flavor != VarianceMethod::hinkley_orig && flavor != VarianceMethod::wu_orig) {
    throw Error(ErrorCode::invalid_argument, "variance",
                "delete-observation flavor must be hinkley_orig or wu_orig");
  }
  const int n = data.n();
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    double tau_del = 0.0;
    try {
      const RdDataset subset = delete_observation(data, i);
      tau_del = ple_fit(subset, config).tau_hat;
    } catch (const Error& e) {
      throw Error(ErrorCode::deletion_infeasible, "variance",
                  "refit without observation " + std::to_string(i) + " failed: " + e.what());
    }
    const double w = fit.leverage(i);
    if (flavor == VarianceMethod::hinkley_orig) {
      const double term = n * (1.0 - w) * (fit.tau_hat - tau_del);
      sum += term * term;
    } else {
      sum += (1.0 - w) * (tau_del - fit.tau_hat) * (tau_del - fit.tau_hat);
    }
  }
  VarianceEstimate v;
  v.method = flavor;
  v.value = flavor == VarianceMethod::hinkley_orig
                ? sum / (static_cast<double>(n) * (n - 1.0))
                : sum;
  v.se = std::sqrt(v.value);
  v.intermediates.emplace_back("refit_count", static_cast<double>(n));
  return v;
}

//! Porter's asymptotic plug-in: V = C_P1 (sigma2_plus + sigma2_minus) / (4 f(c) n h).
inline VarianceEstimate variance_porter_plugin(const PleFit& fit, const DensityEstimate& density,
                                               double nn_minus, double nn_plus) {
  if (!(density.f_c > 0.0)) {
    throw Error(ErrorCode::degenerate_input, "variance", "nonpositive density at the cutoff");
  }
  const double c_p1 = kernel_functionals(fit.config.kernel).porter_cp1;
  VarianceEstimate v;
  v.method = VarianceMethod::porter_plugin;
  v.value = c_p1 * (nn_plus + nn_minus) /
            (4.0 * density.f_c * fit.n() * fit.config.bandwidth);
  v.se = std::sqrt(v.value);
  v.intermediates.emplace_back("c_p1", c_p1);
  v.intermediates.emplace_back("sigma2_minus", nn_minus);
  v.intermediates.emplace_back("sigma2_plus", nn_plus);
  v.intermediates.emplace_back("f_c", density.f_c);
  v.intermediates.emplace_back("h", fit.config.bandwidth);
  return v;
}

//! Direct plug-in: V = M diag(sigma2_NN) M' with M = (G'G)^{-1} G'(I - L').
//! The per-observation variances use tau-adjusted responses (the estimate is
//! subtracted above the cutoff so neighbors may straddle it) and the J/(J+1)
//! degrees-of-freedom factor.
inline VarianceEstimate variance_dpi(const RdDataset& data, const SmootherMatrix& smoother,
                                     const PleFit& fit, int j_neighbors = 3) {
  const int n = data.n();
  if (n < j_neighbors + 1) {
    throw Error(ErrorCode::sparsity, "variance",
                "DPI needs at least J+1 observations");
  }
  // Adjusted responses: subtract tau_hat from treated observations.
  std::vector<double> adj(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    adj[static_cast<std::size_t>(i)] =
        data.y[static_cast<std::size_t>(i)] - (data.treated(i) ? fit.tau_hat : 0.0);
  }
  Eigen::VectorXd sigma2(n);
  for (int i = 0; i < n; ++i) {
    // J nearest neighbors of x_i by |x_j - x_i|, ties broken by index.
    std::vector<std::pair<double, int>> cand;
    cand.reserve(static_cast<std::size_t>(n - 1));
    for (int j = 0; j < n; ++j) {
      if (j == i) continue;
      cand.emplace_back(std::abs(data.x[static_cast<std::size_t>(j)] -
                                 data.x[static_cast<std::size_t>(i)]),
                        j);
    }
    std::sort(cand.begin(), cand.end());
    if (static_cast<int>(cand.size()) < j_neighbors) {
      throw Error(ErrorCode::sparsity, "variance",
                  "observation " + std::to_string(i) + " lacks " +
                  std::to_string(j_neighbors) + " neighbors");
    }
    double nb_mean = 0.0;
    for (int k = 0; k < j_neighbors; ++k) nb_mean += adj[static_cast<std::size_t>(cand[k].second)];
    nb_mean /= static_cast<double>(j_neighbors);
    const double dev = adj[static_cast<std::size_t>(i)] - nb_mean;
    sigma2(i) = static_cast<double>(j_neighbors) / (j_neighbors + 1.0) * dev * dev;
  }
  // M = (G - L G) / gram, so V = sum_j M_j^2 sigma2_j.
  const Eigen::VectorXd lg = smoother.weights * fit.d_resid;
  const Eigen::VectorXd m = (fit.d_resid - lg) / fit.gram;
  VarianceEstimate v;
  v.method = VarianceMethod::dpi;
  v.value = m.cwiseAbs2().dot(sigma2);
  v.se = std::sqrt(v.value);
  v.intermediates.emplace_back("j_neighbors", static_cast<double>(j_neighbors));
  v.intermediates.emplace_back("mean_sigma2_nn", sigma2.mean());
  return v;
}

inline ConfidenceInterval confidence_interval(double tau_hat, double se, double alpha) {
  if (!(alpha > 0.0 && alpha < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "variance", "alpha must be in (0,1)");
  }
  if (!(se >= 0.0) || !std::isfinite(se)) {
    throw Error(ErrorCode::invalid_argument, "variance", "standard error must be nonnegative");
  }
  const double z = stats::normal_quantile(1.0 - alpha / 2.0);
  return ConfidenceInterval{tau_hat - z * se, tau_hat + z * se, alpha, tau_hat};
}

} // namespace plrd
