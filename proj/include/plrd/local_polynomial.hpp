#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include <Eigen/Dense>

#include "plrd/dataset.hpp"
#include "plrd/error.hpp"
#include "plrd/kernel.hpp"

namespace plrd {

struct LocPolyConfig {
  int degree = 1;
  KernelType kernel = KernelType::epanechnikov;
  double bandwidth = 0.0;
};

inline void validate(const LocPolyConfig& cfg) {
  if (cfg.degree < 0 || cfg.degree > 5) {
    throw Error(ErrorCode::invalid_argument, "smoothing",
                "polynomial degree must be in 0..5, got " + std::to_string(cfg.degree));
  }
  if (!(cfg.bandwidth > 0.0) || !std::isfinite(cfg.bandwidth)) {
    throw Error(ErrorCode::invalid_argument, "smoothing", "bandwidth must be positive and finite");
  }
}

//! The n x n local-polynomial weight matrix L; column i holds the weight
//! vector for evaluation at x_i, built from all observations on both sides
//! of the cutoff.
struct SmootherMatrix {
  Eigen::MatrixXd weights;  // weights(j, i) = l_j(x_i)
  LocPolyConfig config;

  int n() const { return static_cast<int>(weights.rows()); }

  //! Fitted values L'v, i.e. entry i is the local fit at x_i applied to v.
  Eigen::VectorXd apply(const Eigen::VectorXd& v) const { return weights.transpose() * v; }
};

namespace detail {

inline bool kernel_positive_at(KernelType k, double u) {
  switch (k) {
    case KernelType::uniform: return std::abs(u) <= 1.0;
    case KernelType::gaussian: return true;
    default: return std::abs(u) < 1.0;
  }
}

constexpr double kMaxCondition = 1e12;

//! Shared WLS core: weights for the fitted value at `eval_point` using the
//! subset of observations for which `include` is true. The local design is
//! centered at the evaluation point and scaled by h, so the returned row is
//! exactly the first row of (X'WX)^{-1} X'W in the unscaled basis.
template <typename IncludeFn>
Eigen::VectorXd weights_at(const std::vector<double>& x, double eval_point,
                           const LocPolyConfig& cfg, const IncludeFn& include,
                           const std::string& where) {
  const int n = static_cast<int>(x.size());
  const int m = cfg.degree + 1;
  const double h = cfg.bandwidth;

  std::vector<int> idx;
  std::vector<double> kw;
  idx.reserve(static_cast<std::size_t>(n));
  kw.reserve(static_cast<std::size_t>(n));
  for (int j = 0; j < n; ++j) {
    if (!include(j)) continue;
    const double u = (x[static_cast<std::size_t>(j)] - eval_point) / h;
    if (!kernel_positive_at(cfg.kernel, u)) continue;
    const double w = kernel_eval(cfg.kernel, u);
    if (w > 0.0) {
      idx.push_back(j);
      kw.push_back(w);
    }
  }

  // Well-posedness counts distinct x values in the window (ties are legal).
  std::vector<double> xs;
  xs.reserve(idx.size());
  for (int j : idx) xs.push_back(x[static_cast<std::size_t>(j)]);
  std::sort(xs.begin(), xs.end());
  const auto distinct = std::unique(xs.begin(), xs.end()) - xs.begin();
  if (distinct < m) {
    throw Error(ErrorCode::bandwidth_too_small, "smoothing",
                where + ": only " + std::to_string(distinct) + " distinct x in window at x=" +
                std::to_string(eval_point) + ", need " + std::to_string(m) +
                " (h=" + std::to_string(h) + ")");
  }

  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(m, m);
  Eigen::VectorXd t(m);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double u = (x[static_cast<std::size_t>(idx[r])] - eval_point) / h;
    t(0) = 1.0;
    for (int k = 1; k < m; ++k) t(k) = t(k - 1) * u;
    a.selfadjointView<Eigen::Lower>().rankUpdate(t, kw[r]);
  }
  a.triangularView<Eigen::StrictlyUpper>() = a.transpose();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  const double lo = eig.eigenvalues().minCoeff();
  const double hi = eig.eigenvalues().maxCoeff();
  if (!(lo > 0.0) || hi > kMaxCondition * lo) {
    throw Error(ErrorCode::bandwidth_too_small, "smoothing",
                where + ": ill-conditioned local design at x=" + std::to_string(eval_point) +
                " (condition ~ " + std::to_string(lo > 0.0 ? hi / lo : INFINITY) + ")");
  }
  const Eigen::VectorXd z =
      eig.eigenvectors() *
      (eig.eigenvalues().cwiseInverse().asDiagonal() *
       (eig.eigenvectors().transpose() * Eigen::VectorXd::Unit(m, 0)));

  Eigen::VectorXd l = Eigen::VectorXd::Zero(n);
  for (std::size_t r = 0; r < idx.size(); ++r) {
    const double u = (x[static_cast<std::size_t>(idx[r])] - eval_point) / h;
    t(0) = 1.0;
    for (int k = 1; k < m; ++k) t(k) = t(k - 1) * u;
    l(idx[r]) = kw[r] * z.dot(t);
  }
  return l;
}

} // namespace detail

//! Weight vector l(.) of length n for the local polynomial fit at eval_point:
//! l_j is the first row of (X'WX)^{-1} X'W with design columns (x_j - eval_point)^k.
inline Eigen::VectorXd locpoly_weights(const std::vector<double>& data_x, double eval_point,
                                       const LocPolyConfig& config) {
  validate(config);
  if (!std::isfinite(eval_point)) {
    throw Error(ErrorCode::invalid_argument, "smoothing", "evaluation point must be finite");
  }
  return detail::weights_at(data_x, eval_point, config, [](int) { return true; },
                            "locpoly_weights");
}

inline SmootherMatrix smoother_matrix(const RdDataset& data, const LocPolyConfig& config) {
  validate(config);
  const int n = data.n();
  SmootherMatrix s;
  s.config = config;
  s.weights.resize(n, n);
  for (int i = 0; i < n; ++i) {
    s.weights.col(i) = detail::weights_at(
        data.x, data.x[static_cast<std::size_t>(i)], config, [](int) { return true; },
        "smoother column " + std::to_string(i));
  }
  return s;
}

//! Conventional two-model comparator: separate local linear fits at the cutoff
//! on each side; returns intercept_above - intercept_below.
inline double lpe_two_sided(const RdDataset& data, KernelType kernel, double h) {
  LocPolyConfig cfg{1, kernel, h};
  validate(cfg);
  const double c = data.cutoff;
  auto side_intercept = [&](bool above) {
    try {
      const Eigen::VectorXd l = detail::weights_at(
          data.x, c, cfg, [&](int j) { return data.treated(j) == above; },
          std::string("lpe ") + (above ? "above" : "below"));
      double v = 0.0;
      for (int j = 0; j < data.n(); ++j) v += l(j) * data.y[static_cast<std::size_t>(j)];
      return v;
    } catch (const Error& e) {
      if (e.code() == ErrorCode::bandwidth_too_small) {
        throw Error(ErrorCode::sparsity, "smoothing",
                    std::string("lpe_two_sided: insufficient data ") +
                    (above ? "above" : "below") + " the cutoff within h=" + std::to_string(h));
      }
      throw;
    }
  };
  const double below = side_intercept(false);
  const double above = side_intercept(true);
  return above - below;
}

} // namespace plrd
