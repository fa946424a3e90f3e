#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "plrd/density.hpp"
#include "plrd/dgp.hpp"
#include "plrd/rng.hpp"
#include "plrd/stats.hpp"

using namespace plrd;

namespace {

std::vector<double> beta_sample(double a, double b, int n, std::uint64_t seed) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] =
        2.0 * rng::beta_at(seed, 0, static_cast<std::uint64_t>(i), a, b) - 1.0;
  }
  return x;
}

std::vector<double> normal_sample(int n, std::uint64_t seed) {
  std::vector<double> x(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) {
    x[static_cast<std::size_t>(i)] = rng::normal_at(seed, 0, static_cast<std::uint64_t>(i));
  }
  return x;
}

} // namespace

TEST_CASE("single-atom KDE equals the kernel maximum", "[density]") {
  CHECK(kde_at({0.0}, 0.0, 1.0, 0) == Catch::Approx(0.3989422804).margin(1e-9));
}

TEST_CASE("first derivative vanishes at the center of symmetric data", "[density]") {
  CHECK(kde_at({-0.7, 0.7}, 0.0, 0.4, 1) == 0.0);
  CHECK(kde_at({-1.3, -0.2, 0.2, 1.3}, 0.0, 0.9, 1) == 0.0);
}

TEST_CASE("KDE equals a direct-summation oracle", "[density]") {
  const std::vector<double> x = beta_sample(2.0, 4.0, 500, 77);
  const double h = kde_bandwidth(x, 0);
  for (int order = 0; order <= 2; ++order) {
    double sum = 0.0;
    for (auto it = x.rbegin(); it != x.rend(); ++it) {  // reversed order on purpose
      const double u = (0.0 - *it) / h;
      const double k = std::exp(-0.5 * u * u) / std::sqrt(2.0 * M_PI);
      if (order == 0) sum += k;
      if (order == 1) sum += -u * k;
      if (order == 2) sum += (u * u - 1.0) * k;
    }
    const double want = sum / (x.size() * std::pow(h, 1.0 + order));
    CHECK(kde_at(x, 0.0, h, order) == Catch::Approx(want).margin(1e-12));
  }
}

TEST_CASE("invalid KDE inputs raise typed errors", "[density]") {
  CHECK_THROWS_AS(kde_at({0.0, 1.0}, 0.0, 0.0, 0), Error);
  CHECK_THROWS_AS(kde_at({0.0, 1.0}, 0.0, -1.0, 0), Error);
  CHECK_THROWS_AS(kde_at({0.0, 1.0}, 0.0, 1.0, 3), Error);
}

TEST_CASE("plug-in bandwidth lands near the normal-scale rule on normal data", "[density]") {
  const std::vector<double> x = normal_sample(1000, 5);
  const double h = kde_bandwidth(x, 0);
  const double silverman = 1.06 * stats::sample_sd(x) * std::pow(1000.0, -0.2);
  CHECK(std::abs(h - silverman) / silverman < 0.15);
}

TEST_CASE("derivative estimation selects a larger bandwidth", "[density]") {
  const std::vector<double> x = normal_sample(600, 6);
  CHECK(kde_bandwidth(x, 0) < kde_bandwidth(x, 2));
}

TEST_CASE("zero-variance samples are rejected", "[density]") {
  const std::vector<double> x(50, 1.25);
  try {
    kde_bandwidth(x, 0);
    FAIL("expected degenerate_input");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::degenerate_input);
  }
}

TEST_CASE("cutoff density for the flat Beta(1,1) transform", "[density]") {
  std::vector<double> x = beta_sample(1.0, 1.0, 2000, 14);
  std::vector<double> y(x.size(), 0.0);
  y[0] = 1.0;  // some response; density only reads x
  const RdDataset data = make_dataset(x, y, 0.0);
  const DensityEstimate e = density_at_cutoff(data);
  CHECK(std::abs(e.f_c - 0.5) < 0.05);
  CHECK(std::abs(e.f1_c) <= 0.15);
  CHECK(e.bandwidths[0] > 0.0);
  CHECK(e.bandwidths[1] > 0.0);
  CHECK(e.bandwidths[2] > 0.0);
}

TEST_CASE("cutoff density slope is unbiased for the flat transform", "[density]") {
  double mean_f1 = 0.0;
  const int n_seeds = 8;
  for (int s = 0; s < n_seeds; ++s) {
    std::vector<double> x = beta_sample(1.0, 1.0, 2000, 100 + static_cast<std::uint64_t>(s));
    mean_f1 += kde_at(x, 0.0, kde_bandwidth(x, 1), 1);
  }
  CHECK(std::abs(mean_f1 / n_seeds) < 0.08);
}

TEST_CASE("cutoff density for the Beta(2,4) transform", "[density]") {
  // f_X(0) = f_Z(1/2) / 2 = 20 * 0.5 * 0.5^3 / 2 = 0.625.
  std::vector<double> x = beta_sample(2.0, 4.0, 2000, 55);
  std::vector<double> y(x.size(), 0.0);
  y[0] = 1.0;
  const RdDataset data = make_dataset(x, y, 0.0);
  const DensityEstimate e = density_at_cutoff(data);
  CHECK(std::abs(e.f_c - 0.625) / 0.625 < 0.10);
}

TEST_CASE("KDE derivatives agree with finite differences", "[density]") {
  const std::vector<double> x = beta_sample(2.0, 4.0, 400, 99);
  const double h = 0.25;
  for (double pt : {-0.4, -0.1, 0.0, 0.2, 0.5}) {
    const double step = 1e-5 * h;
    const double fd1 = (kde_at(x, pt + step, h, 0) - kde_at(x, pt - step, h, 0)) / (2.0 * step);
    const double d1 = kde_at(x, pt, h, 1);
    CHECK(std::abs(fd1 - d1) / std::max(1e-12, std::abs(d1)) < 1e-4);
    const double fd2 = (kde_at(x, pt + step, h, 1) - kde_at(x, pt - step, h, 1)) / (2.0 * step);
    const double d2 = kde_at(x, pt, h, 2);
    CHECK(std::abs(fd2 - d2) / std::max(1e-12, std::abs(d2)) < 1e-4);
  }
}

TEST_CASE("scaling equivariance is exact under power-of-two scaling", "[density]") {
  const std::vector<double> x = beta_sample(2.0, 4.0, 200, 3);
  std::vector<double> x2;
  for (double xi : x) x2.push_back(2.0 * xi);
  for (int order = 0; order <= 2; ++order) {
    const double base = kde_at(x, 0.25, 0.3, order);
    const double scaled = kde_at(x2, 0.5, 0.6, order);
    CHECK(scaled == base / std::pow(2.0, 1.0 + order));
  }
}

TEST_CASE("density floor keeps f(c) positive in empty regions", "[density]") {
  // All mass far above the cutoff on one side, a single far point below:
  // the raw KDE at the cutoff is near zero and must be floored.
  std::vector<double> x{-50.0};
  std::vector<double> y{0.0};
  for (int i = 0; i < 60; ++i) {
    x.push_back(40.0 + 0.1 * i);
    y.push_back(1.0);
  }
  const RdDataset data = make_dataset(x, y, 0.0);
  const DensityEstimate e = density_at_cutoff(data);
  CHECK(e.floor_applied);
  CHECK(e.f_c == Catch::Approx(1.0 / (data.n() * data.x_range())).margin(1e-15));
  CHECK(e.f_c > 0.0);
}
