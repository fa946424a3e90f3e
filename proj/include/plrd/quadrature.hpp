#pragma once

#include <cmath>
#include <cstddef>

#include "plrd/error.hpp"

namespace plrd {
namespace quad {

namespace detail {

// 15-point Gauss-Legendre nodes/weights on [-1, 1].
inline constexpr double kGlNodes[15] = {
  -0.9879925180204854, -0.9372733924007060, -0.8482065834104272,
  -0.7244177313601701, -0.5709721726085388, -0.3941513470775634,
  -0.2011940939974345,  0.0,                 0.2011940939974345,
   0.3941513470775634,  0.5709721726085388,  0.7244177313601701,
   0.8482065834104272,  0.9372733924007060,  0.9879925180204854,
};

inline constexpr double kGlWeights[15] = {
  0.0307532419961173, 0.0703660474881081, 0.1071592204671719,
  0.1395706779261543, 0.1662692058169939, 0.1861610000155622,
  0.1984314853271116, 0.2025782419255613, 0.1984314853271116,
  0.1861610000155622, 0.1662692058169939, 0.1395706779261543,
  0.1071592204671719, 0.0703660474881081, 0.0307532419961173,
};

template <typename F>
double gl15(const F& f, double a, double b) {
  const double mid = 0.5 * (a + b);
  const double half = 0.5 * (b - a);
  double sum = 0.0;
  for (int i = 0; i < 15; ++i) {
    sum += kGlWeights[i] * f(mid + half * kGlNodes[i]);
  }
  return half * sum;
}

template <typename F>
double adaptive(const F& f, double a, double b, double tol, double whole, int depth) {
  const double mid = 0.5 * (a + b);
  const double left = gl15(f, a, mid);
  const double right = gl15(f, mid, b);
  const double delta = left + right - whole;
  if (std::abs(delta) <= tol || depth >= 48) {
    if (depth >= 48 && std::abs(delta) > 1e3 * tol) {
      throw Error(ErrorCode::numerical, "quadrature",
                  "adaptive quadrature failed to converge on [" + std::to_string(a) +
                  ", " + std::to_string(b) + "], residual " + std::to_string(delta));
    }
    return left + right;
  }
  return adaptive(f, a, mid, 0.5 * tol, left, depth + 1) +
         adaptive(f, mid, b, 0.5 * tol, right, depth + 1);
}

} // namespace detail

//! Adaptive Gauss-Legendre integration of f over [a, b] to absolute tolerance.
template <typename F>
double integrate(const F& f, double a, double b, double tol = 1e-10) {
  if (!(a <= b)) return -integrate(f, b, a, tol);
  if (a == b) return 0.0;
  return detail::adaptive(f, a, b, tol, detail::gl15(f, a, b), 0);
}

} // namespace quad
} // namespace plrd
