#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "plrd/dataset.hpp"
#include "plrd/error.hpp"
#include "plrd/rng.hpp"
#include "plrd/stats.hpp"

namespace plrd {

//! Simulation data-generating process: X = 2Z - 1 with Z ~ Beta(a, b),
//! Y = mu(X) + N(0, noise_sd^2), cutoff 0, jump tau_true.
struct DgpSpec {
  int id = 0;
  double beta_a = 1.0;
  double beta_b = 1.0;
  double tau_true = 0.1;
  double noise_sd = 0.1295;
  double cutoff = 0.0;
};

inline DgpSpec dgp_spec(int id) {
  switch (id) {
    case 1: return DgpSpec{1, 1.0, 1.0, 0.1, 0.1295, 0.0};
    case 2: return DgpSpec{2, 2.0, 4.0, 0.1, 0.1295, 0.0};
    case 3: return DgpSpec{3, 14.0, 7.0, 0.1, 0.1295, 0.0};
    case 4: return DgpSpec{4, 1.0, 1.0, 0.1, 0.1295, 0.0};
    default:
      throw Error(ErrorCode::invalid_argument, "dgp", "DGP id must be 1..4, got " +
                  std::to_string(id));
  }
}

inline double dgp_mean(int id, double x) {
  const double jump = x >= 0.0 ? 0.1 : 0.0;
  switch (id) {
    case 1: {
      auto s = [](double t) {
        const double p = t > 0.0 ? t : 0.0;
        return p * p;
      };
      return (x + 1.0) * (x + 1.0) - 2.0 * s(x + 0.2) + 2.0 * s(x - 0.2) - 2.0 * s(x - 0.4) +
             2.0 * s(x - 0.7) - 0.92 + jump;
    }
    case 2:
      return 0.42 + 0.84 * x - 3.0 * x * x + 7.99 * x * x * x - 9.01 * x * x * x * x +
             3.56 * x * x * x * x * x + jump;
    case 3:
      if (x < 0.0) {
        return 0.05 + 1.5 * x + 3.2 * x * x + 2.7 * x * x * x;
      }
      return 0.15 - 0.15 * x + 2.5 * x * x - 1.5 * x * x * x;
    case 4:
      return jump;
    default:
      throw Error(ErrorCode::invalid_argument, "dgp", "DGP id must be 1..4, got " +
                  std::to_string(id));
  }
}

//! Deterministic sample: X_i from stream 0, noise from stream 1 of the counter
//! RNG, so identical (dgp, n, seed) give bit-identical datasets.
inline RdDataset dgp_sample(const DgpSpec& dgp, int n, std::uint64_t seed) {
  if (n < 2) {
    throw Error(ErrorCode::invalid_argument, "dgp", "sample size must be at least 2");
  }
  std::vector<double> x(static_cast<std::size_t>(n)), y(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    const double z = rng::beta_at(seed, 0, static_cast<std::uint64_t>(i), dgp.beta_a, dgp.beta_b);
    x[static_cast<std::size_t>(i)] = 2.0 * z - 1.0;
    y[static_cast<std::size_t>(i)] = dgp_mean(dgp.id, x[static_cast<std::size_t>(i)]) +
                                     dgp.noise_sd *
                                         rng::normal_at(seed, 1, static_cast<std::uint64_t>(i));
  }
  return make_dataset(std::move(x), std::move(y), dgp.cutoff);
}

//! Population DISS size: n * P(|X - c| <= h_rot) with the rule-of-thumb
//! bandwidth evaluated at the population scale of the Beta law.
inline double expected_m(const DgpSpec& dgp, int n) {
  const double a = dgp.beta_a, b = dgp.beta_b;
  const double var_z = a * b / ((a + b) * (a + b) * (a + b + 1.0));
  const double sd_x = 2.0 * std::sqrt(var_z);
  const double iqr_x = 2.0 * (stats::beta_quantile(a, b, 0.75) - stats::beta_quantile(a, b, 0.25));
  const double scale = std::min(sd_x, iqr_x / 1.34);
  const double h = 0.9 * scale * std::pow(static_cast<double>(n), -0.2);
  // X <= t  <=>  Z <= (1 + t) / 2; cutoff 0 maps to z = 1/2.
  const double hi = stats::beta_cdf(a, b, (1.0 + (dgp.cutoff + h)) / 2.0);
  const double lo = stats::beta_cdf(a, b, (1.0 + (dgp.cutoff - h)) / 2.0);
  return static_cast<double>(n) * (hi - lo);
}

//! Smallest n whose expected DISS size reaches the target.
inline int solve_n_for_mbar(const DgpSpec& dgp, double m_bar_target) {
  if (!(m_bar_target > 0.0)) {
    throw Error(ErrorCode::invalid_argument, "dgp", "m_bar target must be positive");
  }
  int hi = 2;
  while (expected_m(dgp, hi) < m_bar_target) {
    if (hi > 100000000) {
      throw Error(ErrorCode::invalid_argument, "dgp", "m_bar target out of reach");
    }
    hi *= 2;
  }
  int lo = hi / 2;
  while (lo + 1 < hi) {
    const int mid = lo + (hi - lo) / 2;
    if (expected_m(dgp, mid) >= m_bar_target) {
      hi = mid;
    } else {
      lo = mid;
    }
  }
  return hi;
}

} // namespace plrd
