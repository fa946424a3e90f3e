#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "plrd/error.hpp"

namespace plrd {

//! Paired running-variable/response observations with a cutoff. The universe
//! every estimator consumes. `order` holds indices sorted by x (stable), so
//! window lookups are binary searches.
struct RdDataset {
  std::vector<double> x;
  std::vector<double> y;
  double cutoff = 0.0;
  std::vector<std::int32_t> order;

  int n() const { return static_cast<int>(x.size()); }
  bool treated(int i) const { return x[static_cast<std::size_t>(i)] >= cutoff; }
  double x_min() const { return x[static_cast<std::size_t>(order.front())]; }
  double x_max() const { return x[static_cast<std::size_t>(order.back())]; }
  double x_range() const { return x_max() - x_min(); }
};

inline RdDataset make_dataset(std::vector<double> x, std::vector<double> y, double cutoff) {
  if (x.size() != y.size()) {
    throw Error(ErrorCode::invalid_argument, "dataset",
                "x and y must have the same length (" + std::to_string(x.size()) + " vs " +
                std::to_string(y.size()) + ")");
  }
  if (x.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "dataset", "need at least 2 observations");
  }
  if (!std::isfinite(cutoff)) {
    throw Error(ErrorCode::invalid_argument, "dataset", "cutoff must be finite");
  }
  std::size_t below = 0, above = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!std::isfinite(x[i]) || !std::isfinite(y[i])) {
      throw Error(ErrorCode::invalid_argument, "dataset",
                  "non-finite value at observation " + std::to_string(i));
    }
    (x[i] >= cutoff ? above : below) += 1;
  }
  if (below == 0 || above == 0) {
    throw Error(ErrorCode::degenerate_input, "dataset",
                "need observations on both sides of the cutoff (" + std::to_string(below) +
                " below, " + std::to_string(above) + " at or above)");
  }
  RdDataset d;
  d.x = std::move(x);
  d.y = std::move(y);
  d.cutoff = cutoff;
  d.order.resize(d.x.size());
  std::iota(d.order.begin(), d.order.end(), 0);
  std::stable_sort(d.order.begin(), d.order.end(),
                   [&](std::int32_t a, std::int32_t b) { return d.x[a] < d.x[b]; });
  return d;
}

//! Copy with observation `index` removed; revalidates the remaining data.
inline RdDataset delete_observation(const RdDataset& data, int index) {
  std::vector<double> x, y;
  x.reserve(data.x.size() - 1);
  y.reserve(data.y.size() - 1);
  for (int i = 0; i < data.n(); ++i) {
    if (i == index) continue;
    x.push_back(data.x[static_cast<std::size_t>(i)]);
    y.push_back(data.y[static_cast<std::size_t>(i)]);
  }
  return make_dataset(std::move(x), std::move(y), data.cutoff);
}

} // namespace plrd
