#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plrd/dataset.hpp"
#include "plrd/density.hpp"
#include "plrd/error.hpp"
#include "plrd/kernel_functionals.hpp"
#include "plrd/ple.hpp"
#include "plrd/porter.hpp"
#include "plrd/stats.hpp"

namespace plrd {

//! OLS of y on {1, D, (x-c), ..., (x-c)^q}. Coefficients are reported in the
//! centered basis, so the k-th derivative of the smooth part at the cutoff is
//! k! times the k-th polynomial coefficient.
struct JumpPolyFit {
  int degree = 0;
  Eigen::VectorXd coef;  // [intercept, jump, b_1, ..., b_q]
  double sigma2 = 0.0;   // RSS / (n - q - 2), homoscedastic

  double jump() const { return coef(1); }

  double derivative(int k) const {
    if (k == 0) return coef(0);
    return stats::factorial(k) * coef(1 + k);
  }
};

inline JumpPolyFit jump_polynomial_fit(const RdDataset& data, int q) {
  const int n = data.n();
  const int p = q + 2;  // intercept + jump + q slopes
  if (q < 0) throw Error(ErrorCode::invalid_argument, "bandwidth", "negative degree");
  if (n < q + 3) {
    throw Error(ErrorCode::sparsity, "bandwidth",
                "jump polynomial of degree " + std::to_string(q) + " needs at least " +
                std::to_string(q + 3) + " observations, have " + std::to_string(n));
  }
  // Columns are scaled by the largest centered magnitude to keep the QR sane
  // on raw-unit data; coefficients are unscaled afterwards.
  double s = 0.0;
  for (double xi : data.x) s = std::max(s, std::abs(xi - data.cutoff));
  if (!(s > 0.0)) s = 1.0;

  Eigen::MatrixXd design(n, p);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    const double t = (data.x[static_cast<std::size_t>(i)] - data.cutoff) / s;
    design(i, 0) = 1.0;
    design(i, 1) = data.treated(i) ? 1.0 : 0.0;
    double pw = 1.0;
    for (int k = 1; k <= q; ++k) {
      pw *= t;
      design(i, 1 + k) = pw;
    }
    y(i) = data.y[static_cast<std::size_t>(i)];
  }
  Eigen::ColPivHouseholderQR<Eigen::MatrixXd> qr(design);
  if (qr.rank() < p) {
    throw Error(ErrorCode::rank_deficient, "bandwidth",
                "singular design in degree-" + std::to_string(q) + " jump polynomial (rank " +
                std::to_string(qr.rank()) + " of " + std::to_string(p) + ")");
  }
  JumpPolyFit fit;
  fit.degree = q;
  fit.coef = qr.solve(y);
  const double rss = (y - design * fit.coef).squaredNorm();
  fit.sigma2 = rss / static_cast<double>(n - q - 2);
  for (int k = 1; k <= q; ++k) fit.coef(1 + k) /= std::pow(s, k);
  return fit;
}

struct PilotBandwidth {
  double h = 0.0;
  bool derivative_degenerate = false;
  bool capped = false;
};

//! Closed form of the pilot bandwidth given its plug-ins:
//!   h = C_FG (sigma2 / (deriv^2 f_c n))^{1/(2 rho + 3)}
inline double pilot_fg_closed_form(double c_fg, double sigma2, double deriv, double f_c,
                                   double n, int rho) {
  return c_fg * std::pow(sigma2 / (deriv * deriv * f_c * n), 1.0 / (2.0 * rho + 3.0));
}

//! Pilot bandwidth for estimating the nu-th derivative of the mean function,
//! from the interior-optimal formula
//!   h_FG = C_FG(nu, rho, K) (sigma^2 / ((mu*^(rho+1))^2 f(c) n))^{1/(2 rho + 3)}
//! with rho = nu + 1. The (rho+1)-th derivative and the homoscedastic sigma^2
//! come from a global jump polynomial of degree rho + 1 (degrees 3, 4, 5);
//! f(c) comes from the density module. The constant uses the uniform kernel
//! because the stage this pilot feeds is a plain fit on a window.
inline PilotBandwidth pilot_bandwidth_fg(int nu, const RdDataset& data,
                                         const DensityEstimate& density) {
  if (nu < 1 || nu > 3) {
    throw Error(ErrorCode::invalid_argument, "bandwidth", "pilot order must be 1, 2, or 3");
  }
  const int rho = nu + 1;
  const JumpPolyFit global = jump_polynomial_fit(data, rho + 1);
  const double deriv = global.derivative(rho + 1);
  const double cap = data.x_range();
  PilotBandwidth out;
  if (std::abs(deriv) < 1e-10) {
    out.derivative_degenerate = true;
    out.capped = true;
    out.h = cap;
    return out;
  }
  const double c_fg =
      kernel_functionals(KernelType::uniform).fg_constants[static_cast<std::size_t>(nu - 1)];
  const double h = pilot_fg_closed_form(c_fg, global.sigma2, deriv, density.f_c,
                                        data.n(), rho);
  out.capped = h > cap;
  out.h = out.capped ? cap : h;
  return out;
}

struct WindowedDerivatives {
  double mu1_c = 0.0;
  double mu2_c = 0.0;
  double mu3_c = 0.0;
  std::array<bool, 3> window_expanded{};
};

//! Derivatives of the mean function at the cutoff from jump-polynomial refits
//! on the data within one pilot bandwidth of the cutoff; the refit degree
//! equals rho = nu + 1 and the nu-th derivative is read off the refit. When a
//! pilot window is too sparse it is expanded to the smallest symmetric window
//! holding rho + 3 observations with both sides represented, and flagged.
inline WindowedDerivatives windowed_derivatives(const RdDataset& data,
                                                const std::array<PilotBandwidth, 3>& pilots) {
  WindowedDerivatives out;
  std::vector<double> radii(data.x.size());
  for (std::size_t i = 0; i < data.x.size(); ++i) {
    radii[i] = std::abs(data.x[i] - data.cutoff);
  }
  std::sort(radii.begin(), radii.end());

  for (int nu = 1; nu <= 3; ++nu) {
    const int rho = nu + 1;
    const int need = rho + 3;
    double radius = pilots[static_cast<std::size_t>(nu - 1)].h;

    auto window_ok = [&](double rad, std::vector<double>& wx, std::vector<double>& wy) {
      wx.clear();
      wy.clear();
      bool below = false, above = false;
      for (int i = 0; i < data.n(); ++i) {
        if (std::abs(data.x[static_cast<std::size_t>(i)] - data.cutoff) <= rad) {
          wx.push_back(data.x[static_cast<std::size_t>(i)]);
          wy.push_back(data.y[static_cast<std::size_t>(i)]);
          (data.treated(i) ? above : below) = true;
        }
      }
      return static_cast<int>(wx.size()) >= need && below && above;
    };

    std::vector<double> wx, wy;
    if (!window_ok(radius, wx, wy)) {
      bool found = false;
      for (double rad : radii) {
        if (rad <= radius) continue;
        if (window_ok(rad, wx, wy)) {
          radius = rad;
          found = true;
          break;
        }
      }
      if (!found) {
        throw Error(ErrorCode::sparsity, "bandwidth",
                    "cannot form a derivative window with " + std::to_string(need) +
                    " observations and both sides of the cutoff (nu=" + std::to_string(nu) + ")");
      }
      out.window_expanded[static_cast<std::size_t>(nu - 1)] = true;
    }

    const RdDataset window = make_dataset(wx, wy, data.cutoff);
    const JumpPolyFit fit = jump_polynomial_fit(window, rho);
    const double d = fit.derivative(nu);
    if (nu == 1) out.mu1_c = d;
    if (nu == 2) out.mu2_c = d;
    if (nu == 3) out.mu3_c = d;
  }
  return out;
}

enum class CutoffSide { below, above };

//! Nearest-neighbor variance at the cutoff on one side: sample variance (with
//! divisor J-1) of the J responses whose x is closest to the cutoff. Ties at
//! the J-th distance are all included and the divisor uses the actual count.
inline double nn_variance(const RdDataset& data, CutoffSide side, int j_neighbors = 3) {
  if (j_neighbors < 2) {
    throw Error(ErrorCode::invalid_argument, "bandwidth", "need at least 2 neighbors");
  }
  struct Entry {
    double dist;
    int index;
    double y;
  };
  std::vector<Entry> entries;
  for (int i = 0; i < data.n(); ++i) {
    const bool above = data.treated(i);
    if ((side == CutoffSide::above) != above) continue;
    entries.push_back({std::abs(data.x[static_cast<std::size_t>(i)] - data.cutoff), i,
                       data.y[static_cast<std::size_t>(i)]});
  }
  std::vector<double> xs;
  for (const auto& e : entries) xs.push_back(e.dist);
  std::sort(xs.begin(), xs.end());
  const auto distinct = std::unique(xs.begin(), xs.end()) - xs.begin();
  if (distinct < j_neighbors) {
    throw Error(ErrorCode::sparsity, "bandwidth",
                std::string("fewer than ") + std::to_string(j_neighbors) +
                " distinct running-variable values " +
                (side == CutoffSide::below ? "below" : "above") + " the cutoff");
  }
  std::sort(entries.begin(), entries.end(), [](const Entry& a, const Entry& b) {
    return a.dist < b.dist || (a.dist == b.dist && a.index < b.index);
  });
  std::size_t take = static_cast<std::size_t>(j_neighbors);
  while (take < entries.size() && entries[take].dist == entries[take - 1].dist) ++take;

  double mean = 0.0;
  for (std::size_t i = 0; i < take; ++i) mean += entries[i].y;
  mean /= static_cast<double>(take);
  double ss = 0.0;
  for (std::size_t i = 0; i < take; ++i) {
    ss += (entries[i].y - mean) * (entries[i].y - mean);
  }
  return ss / static_cast<double>(take - 1);
}

//! Every intermediate of the SM bandwidth selection, kept for auditing.
struct SmDiagnostics {
  double f_c = 0.0, f1_c = 0.0, f2_c = 0.0;
  double f_c_raw = 0.0;
  bool f_floor_applied = false;
  std::array<double, 3> kde_bandwidths{};
  double mu1_c = 0.0, mu2_c = 0.0, mu3_c = 0.0;
  double g2_c = 0.0, g2p_c = 0.0;
  double b_p = 0.0;
  double sigma2_minus = 0.0, sigma2_plus = 0.0;
  std::array<double, 3> h_fg{};
  std::array<bool, 3> fg_derivative_degenerate{};
  std::array<bool, 3> fg_capped{};
  std::array<bool, 3> window_expanded{};
  double h_unclamped = 0.0;
  double h_floor = 0.0;
  double h_cap = 0.0;
  double h_sm = 0.0;
  bool floored = false;
  bool capped = false;
  bool bp_degenerate = false;
};

struct SmBandwidth {
  double h_sm = 0.0;
  SmDiagnostics diagnostics;
};

//! Unclamped closed form of the SM bandwidth given the plug-ins:
//!   h = ( C_P1 (sigma2_plus + sigma2_minus) / (24 n b_P^2 f(c)) )^{1/7}
inline double sm_bandwidth_closed_form(double c_p1, double sigma2_plus, double sigma2_minus,
                                       double n, double b_p, double f_c) {
  return std::pow(c_p1 * (sigma2_plus + sigma2_minus) / (24.0 * n * b_p * b_p * f_c),
                  1.0 / 7.0);
}

//! The SM plug-in bandwidth: density and derivatives at the cutoff, staged
//! mean-function derivatives, nearest-neighbor variances, the Theorem-1 bias
//! constant, then the closed-form AMSE minimizer clamped to
//! [min feasible bandwidth, range(x)].
inline SmBandwidth sm_bandwidth(const RdDataset& data, int degree, KernelType kernel) {
  SmDiagnostics d;
  const DensityEstimate density = density_at_cutoff(data);
  d.f_c = density.f_c;
  d.f1_c = density.f1_c;
  d.f2_c = density.f2_c;
  d.f_c_raw = density.f_c_raw;
  d.f_floor_applied = density.floor_applied;
  d.kde_bandwidths = density.bandwidths;

  std::array<PilotBandwidth, 3> pilots;
  for (int nu = 1; nu <= 3; ++nu) {
    pilots[static_cast<std::size_t>(nu - 1)] = pilot_bandwidth_fg(nu, data, density);
    d.h_fg[static_cast<std::size_t>(nu - 1)] = pilots[static_cast<std::size_t>(nu - 1)].h;
    d.fg_derivative_degenerate[static_cast<std::size_t>(nu - 1)] =
        pilots[static_cast<std::size_t>(nu - 1)].derivative_degenerate;
    d.fg_capped[static_cast<std::size_t>(nu - 1)] =
        pilots[static_cast<std::size_t>(nu - 1)].capped;
  }

  const WindowedDerivatives mu = windowed_derivatives(data, pilots);
  d.mu1_c = mu.mu1_c;
  d.mu2_c = mu.mu2_c;
  d.mu3_c = mu.mu3_c;
  d.window_expanded = mu.window_expanded;

  d.sigma2_minus = nn_variance(data, CutoffSide::below);
  d.sigma2_plus = nn_variance(data, CutoffSide::above);

  d.g2_c = d.mu1_c * d.f1_c + d.mu2_c * d.f_c / 2.0;
  d.g2p_c = d.mu2_c * d.f1_c + d.mu1_c * d.f2_c + d.mu3_c * d.f_c / 2.0 + d.mu2_c * d.f1_c / 2.0;

  const KernelFunctionals& kf = kernel_functionals(kernel);
  const porter::Constants pc{kf.porter_k0, kf.porter_k1, kf.porter_k0m1, kf.porter_k2,
                             kf.porter_cp1};
  d.b_p = porter::bias_constant(pc, d.f_c, d.f1_c, d.g2_c, d.g2p_c);

  d.h_cap = data.x_range();
  if (d.b_p == 0.0) {
    d.bp_degenerate = true;
    d.h_unclamped = d.h_cap;
  } else {
    d.h_unclamped = sm_bandwidth_closed_form(kf.porter_cp1, d.sigma2_plus, d.sigma2_minus,
                                             data.n(), d.b_p, d.f_c);
  }

  d.h_floor = min_feasible_bandwidth(data, degree, kernel).h_min;
  double h = d.h_unclamped;
  if (h > d.h_cap) {
    h = d.h_cap;
    d.capped = true;
  }
  if (h < d.h_floor) {
    h = d.h_floor;
    d.floored = true;
  }
  d.h_sm = h;
  return SmBandwidth{h, d};
}

//! Rule-of-thumb bandwidth used by the DISS size metric; depends only on the
//! running variable and n.
inline double rot_bandwidth(const std::vector<double>& x_data) {
  if (x_data.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "bandwidth", "need at least 2 observations");
  }
  const double sd = stats::sample_sd(x_data);
  const double iqr = stats::iqr(x_data);
  double scale = sd;
  if (iqr > 0.0 && sd > 0.0) scale = std::min(sd, iqr / 1.34);
  if (!(scale > 0.0)) {
    throw Error(ErrorCode::degenerate_input, "bandwidth", "zero-scale running variable");
  }
  return 0.9 * scale * std::pow(static_cast<double>(x_data.size()), -0.2);
}

//! Observed DISS size: number of observations within one rule-of-thumb
//! bandwidth of the cutoff.
inline int diss_m(const RdDataset& data) {
  const double h = rot_bandwidth(data.x);
  int m = 0;
  for (double xi : data.x) {
    if (std::abs(xi - data.cutoff) <= h) ++m;
  }
  return m;
}

} // namespace plrd
