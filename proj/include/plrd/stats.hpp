#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <vector>

#include "plrd/error.hpp"

namespace plrd {
namespace stats {

inline constexpr double kSqrt2Pi = 2.5066282746310005024;
inline constexpr double kSqrtPi = 1.7724538509055160273;

inline double normal_pdf(double x) { return std::exp(-0.5 * x * x) / kSqrt2Pi; }

inline double normal_cdf(double x) { return 0.5 * std::erfc(-x / std::sqrt(2.0)); }

//! Probabilists' Hermite polynomial He_s(x) by the three-term recurrence.
inline double hermite(int s, double x) {
  if (s == 0) return 1.0;
  if (s == 1) return x;
  double hm = 1.0, h = x;
  for (int k = 1; k < s; ++k) {
    const double hn = x * h - static_cast<double>(k) * hm;
    hm = h;
    h = hn;
  }
  return h;
}

//! s-th derivative of the standard normal density: phi^(s)(x) = (-1)^s He_s(x) phi(x).
inline double normal_pdf_derivative(int s, double x) {
  if (s < 0) throw Error(ErrorCode::invalid_argument, "stats", "derivative order must be >= 0");
  const double sign = (s % 2 == 0) ? 1.0 : -1.0;
  return sign * hermite(s, x) * normal_pdf(x);
}

inline double odd_factorial(int m) {  // (2m-1)!! with (-1)!! = 1
  double v = 1.0;
  for (int k = 2 * m - 1; k > 1; k -= 2) v *= static_cast<double>(k);
  return v;
}

inline double factorial(int m) {
  double v = 1.0;
  for (int k = 2; k <= m; ++k) v *= static_cast<double>(k);
  return v;
}

//! Standard normal quantile, Wichura's AS 241 (PPND16), |error| < 1e-15 on (0,1).
inline double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) {
    throw Error(ErrorCode::invalid_argument, "stats", "normal_quantile requires p in (0,1)");
  }
  static constexpr double a[8] = {
    3.3871328727963666080e+0, 1.3314166789178437745e+2, 1.9715909503065514427e+3,
    1.3731693765509461125e+4, 4.5921953931549871457e+4, 6.7265770927008700853e+4,
    3.3430575583588128105e+4, 2.5090809287301226727e+3};
  static constexpr double b[8] = {
    1.0, 4.2313330701600911252e+1, 6.8718700749205790830e+2, 5.3941960214247511077e+3,
    2.1213794301586595867e+4, 3.9307895800092710610e+4, 2.8729085735721942674e+4,
    5.2264952788528545610e+3};
  static constexpr double c[8] = {
    1.42343711074968357734e+0, 4.63033784615654529590e+0, 5.76949722146069140550e+0,
    3.64784832476320460504e+0, 1.27045825245236838258e+0, 2.41780725177450611770e-1,
    2.27238449892691845833e-2, 7.74545014278341407640e-4};
  static constexpr double d[8] = {
    1.0, 2.05319162663775882187e+0, 1.67638483018380384940e+0, 6.89767334985100004550e-1,
    1.48103976427480074590e-1, 1.51986665636164571966e-2, 5.47593808499534494600e-4,
    1.05075007164441684324e-9};
  static constexpr double e[8] = {
    6.65790464350110377720e+0, 5.46378491116411436990e+0, 1.78482653991729133580e+0,
    2.96560571828504891230e-1, 2.65321895265761230930e-2, 1.24266094738807843860e-3,
    2.71155556874348757815e-5, 2.01033439929228813265e-7};
  static constexpr double f[8] = {
    1.0, 5.99832206555887937690e-1, 1.36929880922735805310e-1, 1.48753612908506148525e-2,
    7.86869131145613259100e-4, 1.84631831751005468180e-5, 1.42151175831644588870e-7,
    2.04426310338993978564e-15};

  auto poly = [](const double (&coef)[8], double r) {
    double v = coef[7];
    for (int i = 6; i >= 0; --i) v = v * r + coef[i];
    return v;
  };

  const double q = p - 0.5;
  if (std::abs(q) <= 0.425) {
    const double r = 0.180625 - q * q;
    return q * poly(a, r) / poly(b, r);
  }
  double r = (q < 0.0) ? p : 1.0 - p;
  r = std::sqrt(-std::log(r));
  double val;
  if (r <= 5.0) {
    r -= 1.6;
    val = poly(c, r) / poly(d, r);
  } else {
    r -= 5.0;
    val = poly(e, r) / poly(f, r);
  }
  return (q < 0.0) ? -val : val;
}

namespace detail {

// Continued fraction for the incomplete beta function (modified Lentz).
inline double betacf(double a, double b, double x) {
  constexpr int kMaxIter = 300;
  constexpr double kEps = 3e-16;
  constexpr double kFpMin = 1e-300;
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kFpMin) d = kFpMin;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kFpMin) d = kFpMin;
    c = 1.0 + aa / c;
    if (std::abs(c) < kFpMin) c = kFpMin;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return h;
  }
  throw Error(ErrorCode::numerical, "stats", "incomplete beta continued fraction did not converge");
}

} // namespace detail

//! Regularized incomplete beta function I_x(a, b).
inline double beta_cdf(double a, double b, double x) {
  if (!(a > 0.0 && b > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "stats", "beta shape parameters must be positive");
  }
  if (x <= 0.0) return 0.0;
  if (x >= 1.0) return 1.0;
  const double ln_bt = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                       a * std::log(x) + b * std::log1p(-x);
  const double bt = std::exp(ln_bt);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    return bt * detail::betacf(a, b, x) / a;
  }
  return 1.0 - bt * detail::betacf(b, a, 1.0 - x) / b;
}

inline double beta_pdf(double a, double b, double x) {
  if (x <= 0.0 || x >= 1.0) return 0.0;
  return std::exp(std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) +
                  (a - 1.0) * std::log(x) + (b - 1.0) * std::log1p(-x));
}

//! Beta quantile via safeguarded Newton on the regularized incomplete beta.
inline double beta_quantile(double a, double b, double u) {
  if (!(u >= 0.0 && u <= 1.0)) {
    throw Error(ErrorCode::invalid_argument, "stats", "beta_quantile requires u in [0,1]");
  }
  if (u == 0.0) return 0.0;
  if (u == 1.0) return 1.0;
  double lo = 0.0, hi = 1.0;
  double x = a / (a + b);
  for (int it = 0; it < 200; ++it) {
    const double cdf = beta_cdf(a, b, x);
    if (cdf > u) hi = x; else lo = x;
    const double err = cdf - u;
    if (std::abs(err) < 1e-15 || hi - lo < 1e-16) break;
    const double pdf = beta_pdf(a, b, x);
    double next = (pdf > 0.0) ? x - err / pdf : 0.5 * (lo + hi);
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    x = next;
  }
  return x;
}

inline double mean(const std::vector<double>& v) {
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

inline double sample_sd(const std::vector<double>& v) {
  const std::size_t n = v.size();
  if (n < 2) return 0.0;
  const double m = mean(v);
  double ss = 0.0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(n - 1));
}

//! Linear-interpolation sample quantile (R type 7) of unsorted data.
inline double quantile_type7(std::vector<double> v, double p) {
  if (v.empty()) throw Error(ErrorCode::invalid_argument, "stats", "quantile of empty sample");
  std::sort(v.begin(), v.end());
  const double idx = p * static_cast<double>(v.size() - 1);
  const std::size_t lo = static_cast<std::size_t>(std::floor(idx));
  const std::size_t hi = std::min(lo + 1, v.size() - 1);
  const double frac = idx - static_cast<double>(lo);
  return v[lo] + frac * (v[hi] - v[lo]);
}

inline double iqr(const std::vector<double>& v) {
  return quantile_type7(v, 0.75) - quantile_type7(v, 0.25);
}

inline double median(std::vector<double> v) { return quantile_type7(std::move(v), 0.5); }

} // namespace stats
} // namespace plrd
