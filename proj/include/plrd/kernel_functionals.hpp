#pragma once

#include <array>
#include <cmath>

#include <Eigen/Dense>

#include "plrd/kernel.hpp"
#include "plrd/porter.hpp"
#include "plrd/quadrature.hpp"
#include "plrd/stats.hpp"

namespace plrd {

//! Kernel-derived constants used by smoothing, density estimation, and the
//! SM bandwidth formula. All entries are evaluated by adaptive quadrature
//! over the defining integrals; nothing is table-driven.
struct KernelFunctionals {
  KernelType kernel;
  double mu2;        // int u^2 K(u) du
  double roughness;  // int K(u)^2 du
  double porter_k0;  // int_0^inf K_0(w)^2 dw        (K_0(u) = int_u^inf K)
  double porter_k1;  // int_0^inf K_1(v) dv          (K_1(u) = int_u^inf v K)
  double porter_k2;  // K_2(0) = int_0^inf v^2 K(v) dv
  double porter_k0m1;  // int_0^inf v K_0(v) dv
  double porter_cp1;   // C_P1 = 1 / porter_k0
  // C_FG(nu, rho, K) for (nu, rho) in {(1,2), (2,3), (3,4)}; index nu-1.
  std::array<double, 3> fg_constants;
};

namespace detail {

inline double kernel_moment(KernelType k, int j, double tol = 1e-11) {
  const double r = kernel_integration_radius(k);
  return quad::integrate(
      [&](double u) { return std::pow(u, j) * kernel_eval(k, u); }, -r, r, tol);
}

inline double kernel_sq_moment(KernelType k, int j, double tol = 1e-11) {
  const double r = kernel_integration_radius(k);
  return quad::integrate(
      [&](double u) {
        const double w = kernel_eval(k, u);
        return std::pow(u, j) * w * w;
      },
      -r, r, tol);
}

//! Fan-Gijbels constant for estimating the nu-th derivative at an interior
//! point with a local polynomial of degree rho (rho - nu odd), from the
//! equivalent-kernel closed form:
//!   C = [ ((rho+1)!)^2 (2nu+1) int K*_nu^2 / (2 (rho+1-nu) (int t^{rho+1} K*_nu)^2) ]^{1/(2rho+3)}
//! where K*_nu(t) = (e_nu' S^{-1} (1, t, ..., t^rho)') K(t) and S is the
//! kernel moment matrix.
inline double fg_constant(KernelType k, int nu, int rho) {
  const int m = rho + 1;
  Eigen::MatrixXd S(m, m), Sstar(m, m);
  Eigen::VectorXd c(m);
  for (int i = 0; i < m; ++i) {
    for (int j = i; j < m; ++j) {
      S(i, j) = S(j, i) = kernel_moment(k, i + j);
      Sstar(i, j) = Sstar(j, i) = kernel_sq_moment(k, i + j);
    }
    c(i) = kernel_moment(k, rho + 1 + i);
  }
  const Eigen::VectorXd a = S.fullPivLu().solve(Eigen::VectorXd::Unit(m, nu));
  const double int_ksq = a.dot(Sstar * a);
  const double int_t = a.dot(c);
  const double fact = stats::factorial(rho + 1);
  const double num = fact * fact * (2.0 * nu + 1.0) * int_ksq;
  const double den = 2.0 * (rho + 1.0 - nu) * int_t * int_t;
  return std::pow(num / den, 1.0 / (2.0 * rho + 3.0));
}

inline KernelFunctionals compute_functionals(KernelType k) {
  KernelFunctionals f;
  f.kernel = k;
  f.mu2 = kernel_moment(k, 2);
  f.roughness = kernel_sq_moment(k, 0);
  const porter::Constants pc = porter::constants(k);
  f.porter_k0 = pc.k0_sq;
  f.porter_k1 = pc.k1_int;
  f.porter_k2 = pc.k2_zero;
  f.porter_k0m1 = pc.k0_first_moment;
  f.porter_cp1 = pc.c_p1;
  for (int nu = 1; nu <= 3; ++nu) {
    f.fg_constants[nu - 1] = fg_constant(k, nu, nu + 1);
  }
  return f;
}

} // namespace detail

//! Functionals for a kernel; computed once per process and cached, so repeated
//! calls are bit-identical by construction.
inline const KernelFunctionals& kernel_functionals(KernelType k) {
  static const std::array<KernelFunctionals, 4> table = {
      detail::compute_functionals(KernelType::epanechnikov),
      detail::compute_functionals(KernelType::triangular),
      detail::compute_functionals(KernelType::uniform),
      detail::compute_functionals(KernelType::gaussian),
  };
  return table[static_cast<int>(k)];
}

} // namespace plrd
