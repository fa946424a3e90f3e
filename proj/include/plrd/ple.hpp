#pragma once

#include <cmath>
#include <string>

#include <Eigen/Dense>

#include "plrd/dataset.hpp"
#include "plrd/error.hpp"
#include "plrd/local_polynomial.hpp"

namespace plrd {

//! Partial linear fit in Robinson (residualized) form. tau_hat is the closed
//! form (G'G)^{-1} G'(I-L')Y with G = (I-L')D; the residual vectors feed the
//! jackknife variance estimators.
struct PleFit {
  double tau_hat = 0.0;
  LocPolyConfig config;
  Eigen::VectorXd d_resid;   // d_i - E_hat(D | x_i)
  Eigen::VectorXd y_resid;   // y_i - E_hat(Y | x_i)
  Eigen::VectorXd r;         // y_resid - d_resid * tau_hat
  Eigen::VectorXd leverage;  // w_i = d_resid_i^2 / gram
  double gram = 0.0;         // sum d_resid^2 (= G'G)

  int n() const { return static_cast<int>(d_resid.size()); }
};

struct BandwidthFloor {
  double h_min = 0.0;
  bool binding = false;
};

inline PleFit ple_fit(const RdDataset& data, const SmootherMatrix& smoother) {
  const int n = data.n();
  if (smoother.n() != n) {
    throw Error(ErrorCode::invalid_argument, "ple", "smoother size does not match dataset");
  }
  Eigen::VectorXd d(n), y(n);
  for (int i = 0; i < n; ++i) {
    d(i) = data.treated(i) ? 1.0 : 0.0;
    y(i) = data.y[static_cast<std::size_t>(i)];
  }
  PleFit fit;
  fit.config = smoother.config;
  fit.d_resid = d - smoother.apply(d);
  fit.y_resid = y - smoother.apply(y);
  fit.gram = fit.d_resid.squaredNorm();
  if (!(fit.gram > 1e-12 * n)) {
    throw Error(ErrorCode::degenerate_treatment_contrast, "ple",
                "smoother reproduces the treatment indicator (G'G = " +
                std::to_string(fit.gram) + "); no contrast left at h = " +
                std::to_string(smoother.config.bandwidth));
  }
  fit.tau_hat = fit.d_resid.dot(fit.y_resid) / fit.gram;
  fit.r = fit.y_resid - fit.tau_hat * fit.d_resid;
  fit.leverage = fit.d_resid.cwiseAbs2() / fit.gram;
  return fit;
}

inline PleFit ple_fit(const RdDataset& data, const LocPolyConfig& config) {
  return ple_fit(data, smoother_matrix(data, config));
}

namespace detail {

inline bool ple_feasible(const RdDataset& data, int degree, KernelType kernel, double h) {
  try {
    ple_fit(data, LocPolyConfig{degree, kernel, h});
    return true;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::bandwidth_too_small ||
        e.code() == ErrorCode::degenerate_treatment_contrast) {
      return false;
    }
    throw;
  }
}

} // namespace detail

//! Smallest bandwidth at which ple_fit succeeds (every local fit well-posed
//! and G'G above tolerance), by 30-step bisection up to range(x). Feasibility
//! is monotone in h, so the returned value is feasible by construction.
inline BandwidthFloor min_feasible_bandwidth(const RdDataset& data, int degree,
                                             KernelType kernel) {
  const double hi0 = data.x_range();
  if (!(hi0 > 0.0)) {
    throw Error(ErrorCode::dataset_unusable, "ple", "running variable has zero range");
  }
  if (!detail::ple_feasible(data, degree, kernel, hi0)) {
    throw Error(ErrorCode::dataset_unusable, "ple",
                "no feasible PLE fit even at h = range(x) = " + std::to_string(hi0));
  }
  double lo = 0.0, hi = hi0;
  for (int it = 0; it < 30; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (detail::ple_feasible(data, degree, kernel, mid)) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return BandwidthFloor{hi, false};
}

} // namespace plrd
