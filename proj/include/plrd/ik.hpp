#pragma once

// MSE-optimal RD bandwidth of Imbens & Kalyanaraman (2012), "Optimal Bandwidth
// Choice for the Regression Discontinuity Estimator", Review of Economic
// Studies 79(3), Section 4.2. This selector is external to the estimator
// developed in this library; the published three-step algorithm is transcribed
// here verbatim and nowhere else.

#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plrd/dataset.hpp"
#include "plrd/error.hpp"
#include "plrd/kernel.hpp"
#include "plrd/quadrature.hpp"
#include "plrd/stats.hpp"

namespace plrd {

namespace detail {

//! C_K of IK (2012): with one-sided kernel moments nu_j = int_0^inf u^j K and
//! pi_j = int_0^inf u^j K^2, the boundary local-linear constants are
//!   C1 = (nu2^2 - nu1 nu3) / (nu0 nu2 - nu1^2)
//!   V  = (nu2^2 pi0 - 2 nu1 nu2 pi1 + nu1^2 pi2) / (nu0 nu2 - nu1^2)^2
//! and C_K = (V / C1^2)^{1/5}; 3.4375 for the triangular (edge) kernel.
inline double ik_kernel_constant(KernelType k) {
  const double r = kernel_integration_radius(k);
  auto nu = [&](int j) {
    return quad::integrate([&](double u) { return std::pow(u, j) * kernel_eval(k, u); }, 0.0, r,
                           1e-12);
  };
  auto pi = [&](int j) {
    return quad::integrate(
        [&](double u) {
          const double w = kernel_eval(k, u);
          return std::pow(u, j) * w * w;
        },
        0.0, r, 1e-12);
  };
  const double n0 = nu(0), n1 = nu(1), n2 = nu(2), n3 = nu(3);
  const double det = n0 * n2 - n1 * n1;
  const double c1 = (n2 * n2 - n1 * n3) / det;
  const double v = (n2 * n2 * pi(0) - 2.0 * n1 * n2 * pi(1) + n1 * n1 * pi(2)) / (det * det);
  return std::pow(v / (c1 * c1), 0.2);
}

//! Plain OLS of y on (1, x-c, ..., (x-c)^q) over the given indices.
inline Eigen::VectorXd side_poly(const RdDataset& data, const std::vector<int>& idx, int q,
                                 const std::string& where) {
  const int m = q + 1;
  if (static_cast<int>(idx.size()) < m + 1) {
    throw Error(ErrorCode::sparsity, "ik",
                where + ": need at least " + std::to_string(m + 1) + " observations, have " +
                std::to_string(idx.size()));
  }
  double s = 0.0;
  for (int i : idx) s = std::max(s, std::abs(data.x[static_cast<std::size_t>(i)] - data.cutoff));
  if (!(s > 0.0)) s = 1.0;
  Eigen::MatrixXd design(idx.size(), m);
  Eigen::VectorXd y(idx.size());
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double t = (data.x[static_cast<std::size_t>(idx[r])] - data.cutoff) / s;
    double pw = 1.0;
    for (int k = 0; k < m; ++k) {
      design(static_cast<int>(r), k) = pw;
      pw *= t;
    }
    y(static_cast<int>(r)) = data.y[static_cast<std::size_t>(idx[r])];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < m) {
    throw Error(ErrorCode::rank_deficient, "ik", where + ": singular local design");
  }
  Eigen::VectorXd coef = qr.solve(y);
  for (int k = 1; k < m; ++k) coef(k) /= std::pow(s, k);
  return coef;
}

} // namespace detail

struct IkDiagnostics {
  double h1 = 0.0;
  double f_c = 0.0;
  double sigma2_c = 0.0;
  double m3 = 0.0;
  double h2_minus = 0.0, h2_plus = 0.0;
  double m2_minus = 0.0, m2_plus = 0.0;
  double reg_minus = 0.0, reg_plus = 0.0;
  double h_opt = 0.0;
};

//! IK (2012) bandwidth, steps 1-3 as published. The kernel argument selects
//! the constant C_K; the reference default is the triangular kernel.
inline IkDiagnostics ik_bandwidth_detail(const RdDataset& data,
                                         KernelType kernel = KernelType::triangular) {
  const int n = data.n();
  const double c = data.cutoff;
  IkDiagnostics d;

  // Step 1: pilot density and conditional variance at the cutoff.
  const double sx = stats::sample_sd(data.x);
  if (!(sx > 0.0)) {
    throw Error(ErrorCode::degenerate_input, "ik", "step 1: zero-variance running variable");
  }
  d.h1 = 1.84 * sx * std::pow(static_cast<double>(n), -0.2);
  std::vector<double> y_minus, y_plus;
  for (int i = 0; i < n; ++i) {
    const double dist = data.x[static_cast<std::size_t>(i)] - c;
    if (dist >= -d.h1 && dist < 0.0) y_minus.push_back(data.y[static_cast<std::size_t>(i)]);
    if (dist >= 0.0 && dist <= d.h1) y_plus.push_back(data.y[static_cast<std::size_t>(i)]);
  }
  if (y_minus.empty() || y_plus.empty()) {
    throw Error(ErrorCode::sparsity, "ik", "step 1: no observations within h1 on one side");
  }
  d.f_c = static_cast<double>(y_minus.size() + y_plus.size()) / (2.0 * n * d.h1);
  const double mean_minus = stats::mean(y_minus);
  const double mean_plus = stats::mean(y_plus);
  double ss = 0.0;
  for (double v : y_minus) ss += (v - mean_minus) * (v - mean_minus);
  for (double v : y_plus) ss += (v - mean_plus) * (v - mean_plus);
  d.sigma2_c = ss / static_cast<double>(y_minus.size() + y_plus.size());

  // Step 2: third derivative from a global cubic with a jump, then one pilot
  // window per side for the quadratic second-derivative fits.
  {
    Eigen::MatrixXd design(n, 5);
    Eigen::VectorXd y(n);
    double s = 0.0;
    for (double xi : data.x) s = std::max(s, std::abs(xi - c));
    for (int i = 0; i < n; ++i) {
      const double t = (data.x[static_cast<std::size_t>(i)] - c) / s;
      design(i, 0) = 1.0;
      design(i, 1) = data.treated(i) ? 1.0 : 0.0;
      design(i, 2) = t;
      design(i, 3) = t * t;
      design(i, 4) = t * t * t;
      y(i) = data.y[static_cast<std::size_t>(i)];
    }
    Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
    if (qr.rank() < 5) {
      throw Error(ErrorCode::rank_deficient, "ik", "step 2: singular global cubic design");
    }
    const Eigen::VectorXd coef = qr.solve(y);
    d.m3 = 6.0 * coef(4) / (s * s * s);
  }
  int n_minus = 0, n_plus = 0;
  for (int i = 0; i < n; ++i) (data.treated(i) ? n_plus : n_minus) += 1;
  const double cap = data.x_range();
  auto h2_for = [&](int n_side) {
    if (std::abs(d.m3) < 1e-14) return cap;
    const double h = 3.56 *
                     std::pow(d.sigma2_c / (d.f_c * d.m3 * d.m3), 1.0 / 7.0) *
                     std::pow(static_cast<double>(n_side), -1.0 / 7.0);
    return std::min(h, cap);
  };
  d.h2_minus = h2_for(n_minus);
  d.h2_plus = h2_for(n_plus);

  std::vector<int> idx_minus, idx_plus;
  for (int i = 0; i < n; ++i) {
    const double dist = data.x[static_cast<std::size_t>(i)] - c;
    if (dist < 0.0 && dist >= -d.h2_minus) idx_minus.push_back(i);
    if (dist >= 0.0 && dist <= d.h2_plus) idx_plus.push_back(i);
  }
  const Eigen::VectorXd quad_minus = detail::side_poly(data, idx_minus, 2, "step 2 below");
  const Eigen::VectorXd quad_plus = detail::side_poly(data, idx_plus, 2, "step 2 above");
  d.m2_minus = 2.0 * quad_minus(2);
  d.m2_plus = 2.0 * quad_plus(2);

  // Step 3: regularization and the final bandwidth.
  d.reg_minus = 2160.0 * d.sigma2_c /
                (static_cast<double>(idx_minus.size()) * std::pow(d.h2_minus, 4));
  d.reg_plus = 2160.0 * d.sigma2_c /
               (static_cast<double>(idx_plus.size()) * std::pow(d.h2_plus, 4));
  const double c_k = detail::ik_kernel_constant(kernel);
  const double diff = d.m2_plus - d.m2_minus;
  d.h_opt = c_k *
            std::pow(2.0 * d.sigma2_c /
                         (d.f_c * (diff * diff + d.reg_plus + d.reg_minus)),
                     0.2) *
            std::pow(static_cast<double>(n), -0.2);
  if (!(d.h_opt > 0.0) || !std::isfinite(d.h_opt)) {
    throw Error(ErrorCode::numerical, "ik", "step 3: non-finite bandwidth");
  }
  return d;
}

inline double ik_bandwidth(const RdDataset& data, KernelType kernel = KernelType::triangular) {
  return ik_bandwidth_detail(data, kernel).h_opt;
}

} // namespace plrd
