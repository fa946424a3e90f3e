#pragma once

#include <cmath>
#include <limits>
#include <string>

#include "plrd/error.hpp"

namespace plrd {

enum class KernelType {
  epanechnikov,
  triangular,
  uniform,
  gaussian,
};

inline const char* kernel_name(KernelType k) {
  switch (k) {
    case KernelType::epanechnikov: return "epanechnikov";
    case KernelType::triangular: return "triangular";
    case KernelType::uniform: return "uniform";
    case KernelType::gaussian: return "gaussian";
  }
  return "unknown";
}

inline KernelType parse_kernel(const std::string& name) {
  if (name == "epanechnikov") return KernelType::epanechnikov;
  if (name == "triangular") return KernelType::triangular;
  if (name == "uniform") return KernelType::uniform;
  if (name == "gaussian") return KernelType::gaussian;
  throw Error(ErrorCode::invalid_argument, "kernels", "unknown kernel '" + name + "'");
}

//! Support radius; infinity for the Gaussian kernel.
inline double kernel_support(KernelType k) {
  return k == KernelType::gaussian ? std::numeric_limits<double>::infinity() : 1.0;
}

//! Effective integration radius: finite truncation point for the Gaussian,
//! beyond which the density is < 3e-32 and contributes nothing at 1e-10 tolerance.
inline double kernel_integration_radius(KernelType k) {
  return k == KernelType::gaussian ? 12.0 : 1.0;
}

//! K(u). Symmetric, nonnegative, integrates to one.
inline double kernel_eval(KernelType k, double u) {
  if (!std::isfinite(u)) {
    throw Error(ErrorCode::invalid_argument, "kernels", "kernel argument must be finite");
  }
  switch (k) {
    case KernelType::epanechnikov:
      return std::abs(u) <= 1.0 ? 0.75 * (1.0 - u * u) : 0.0;
    case KernelType::triangular:
      return std::abs(u) <= 1.0 ? 1.0 - std::abs(u) : 0.0;
    case KernelType::uniform:
      return std::abs(u) <= 1.0 ? 0.5 : 0.0;
    case KernelType::gaussian:
      return std::exp(-0.5 * u * u) / 2.5066282746310005024;
  }
  return 0.0;
}

//! d^order/du^order of the Gaussian kernel, order in {0, 1, 2}.
inline double gaussian_kernel_derivative(int order, double u) {
  const double k = std::exp(-0.5 * u * u) / 2.5066282746310005024;
  switch (order) {
    case 0: return k;
    case 1: return -u * k;
    case 2: return (u * u - 1.0) * k;
    default:
      throw Error(ErrorCode::invalid_argument, "kernels",
                  "gaussian_kernel_derivative supports orders 0..2, got " + std::to_string(order));
  }
}

} // namespace plrd
