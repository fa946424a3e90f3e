#pragma once

#include <cmath>

#include "plrd/kernel.hpp"
#include "plrd/quadrature.hpp"

namespace plrd {
namespace porter {

// One-sided kernel functionals from Porter (2003), "Estimation in the
// Regression Discontinuity Model". This file is the single audit point for the
// transcription. Defining integrals, for a symmetric second-order kernel K:
//
//   K_j(u)  = int_u^inf v^j K(v) dv,          j = 0, 1, 2
//
// The constants consumed by the asymptotic theory of the local-constant
// partial linear estimator are
//
//   int_0^inf K_0(w)^2 dw        (k0_sq)
//   int_0^inf K_1(v) dv          (k1_int)
//   int_0^inf v K_0(v) dv        (k0_first_moment)
//   K_2(0)                       (k2_zero, equals half the kernel's second moment)
//   C_P1 = ( int_0^inf K_0(w)^2 dw )^{-1}
//
// Integration by parts gives k1_int = K_2(0) and k0_first_moment = K_2(0)/2;
// the identities are exercised in tests but not assumed here -- everything is
// evaluated from its defining integral by quadrature.

//! K_j(u) = int_u^inf v^j K(v) dv for j in {0, 1, 2}.
inline double partial_moment(KernelType kernel, int j, double u, double tol = 1e-12) {
  const double upper = kernel_integration_radius(kernel);
  if (u >= upper) return 0.0;
  return quad::integrate(
      [&](double v) { return std::pow(v, j) * kernel_eval(kernel, v); }, u, upper, tol);
}

struct Constants {
  double k0_sq;            // int_0^inf K_0(w)^2 dw
  double k1_int;           // int_0^inf K_1(v) dv
  double k0_first_moment;  // int_0^inf v K_0(v) dv
  double k2_zero;          // K_2(0)
  double c_p1;             // 1 / k0_sq
};

inline Constants constants(KernelType kernel) {
  const double upper = kernel_integration_radius(kernel);
  Constants c;
  c.k0_sq = quad::integrate(
      [&](double w) {
        const double k0 = partial_moment(kernel, 0, w);
        return k0 * k0;
      },
      0.0, upper, 1e-10);
  c.k1_int = quad::integrate(
      [&](double v) { return partial_moment(kernel, 1, v); }, 0.0, upper, 1e-10);
  c.k0_first_moment = quad::integrate(
      [&](double v) { return v * partial_moment(kernel, 0, v); }, 0.0, upper, 1e-10);
  c.k2_zero = partial_moment(kernel, 2, 0.0);
  c.c_p1 = 1.0 / c.k0_sq;
  return c;
}

//! Bias constant b_P of the PLE asymptotic distribution:
//!   b_P = 2 K_2(0) (f(c) int_0^inf K_0^2)^{-1}
//!         ( f'(c)/f(c) g_2(c) int_0^inf K_1 - g_2'(c) int_0^inf v K_0(v) dv )
//! with g_2(x) = mu*'(x) f'(x) + mu*''(x) f(x) / 2.
inline double bias_constant(const Constants& c, double f_c, double f1_c,
                            double g2_c, double g2p_c) {
  return 2.0 * c.k2_zero / (f_c * c.k0_sq) *
         (f1_c / f_c * g2_c * c.k1_int - g2p_c * c.k0_first_moment);
}

} // namespace porter
} // namespace plrd
