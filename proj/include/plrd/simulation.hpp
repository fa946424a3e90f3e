#pragma once

#include <atomic>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <thread>
#include <vector>

#include "plrd/dgp.hpp"
#include "plrd/error.hpp"
#include "plrd/estimate.hpp"
#include "plrd/rng.hpp"
#include "plrd/stats.hpp"

namespace plrd {

//! One entry of a simulation method list: estimator x bandwidth rule x
//! variance method, written "estimator/rule[/variance]", e.g. "ple/sm/ple_wu",
//! "ple0/ik", "lpe/ik", "ple/fixed:0.5/ple_wu".
struct MethodSpec {
  enum class Estimator { ple, ple0, lpe };

  std::string label;
  Estimator estimator = Estimator::ple;
  BandwidthRule rule = BandwidthRule::sm;
  double fixed_h = 0.0;
  VarianceMethod variance = VarianceMethod::ple_wu;
  KernelType kernel = KernelType::epanechnikov;

  int degree() const { return estimator == Estimator::ple0 ? 0 : 1; }
};

inline MethodSpec parse_method(const std::string& text) {
  std::vector<std::string> parts;
  std::string cur;
  for (char ch : text) {
    if (ch == '/') {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  parts.push_back(cur);
  if (parts.size() < 2 || parts.size() > 3) {
    throw Error(ErrorCode::config_error, "simulation",
                "method '" + text + "' must be estimator/rule[/variance]");
  }
  MethodSpec m;
  m.label = text;
  if (parts[0] == "ple") {
    m.estimator = MethodSpec::Estimator::ple;
  } else if (parts[0] == "ple0") {
    m.estimator = MethodSpec::Estimator::ple0;
  } else if (parts[0] == "lpe") {
    m.estimator = MethodSpec::Estimator::lpe;
    m.kernel = KernelType::triangular;
    m.variance = VarianceMethod::none;
  } else {
    throw Error(ErrorCode::config_error, "simulation",
                "unknown estimator '" + parts[0] + "' in method '" + text + "'");
  }
  const auto [rule, h] = parse_bandwidth_rule(parts[1]);
  m.rule = rule;
  m.fixed_h = h;
  if (parts.size() == 3) {
    if (m.estimator == MethodSpec::Estimator::lpe && parts[2] != "none") {
      throw Error(ErrorCode::config_error, "simulation",
                  "the LPE comparator is point-estimate only; drop '" + parts[2] + "'");
    }
    m.variance = parse_variance_method(parts[2]);
  }
  return m;
}

struct SimStudy {
  DgpSpec dgp;
  int n = 0;          // if 0, resolved from m_bar
  double m_bar = 0.0; // optional DISS target
  std::vector<MethodSpec> methods;
  int replications = 0;
  double alpha = 0.05;
  std::uint64_t master_seed = 0;
  int workers = 1;
};

struct MetricCell {
  double estimate = std::numeric_limits<double>::quiet_NaN();
  double mcse = std::numeric_limits<double>::quiet_NaN();
  bool defined = false;
};

struct MethodMetrics {
  std::string method;
  MetricCell mse, bias, emp_se, mod_se, rel_e, coverage, median_width, success_rate;
  long success_count = 0;
};

struct MetricsTable {
  int n = 0;
  long replications = 0;
  long common_success_count = 0;
  std::vector<MethodMetrics> rows;
};

//! Seed for one replication, derived from the master seed with a counter
//! block; every method inside a replication sees the same dataset.
inline std::uint64_t replication_seed(std::uint64_t master_seed, std::uint64_t index) {
  return rng::derive_seed(master_seed, 2, index);
}

struct MethodOutcome {
  double tau = std::numeric_limits<double>::quiet_NaN();
  double variance = std::numeric_limits<double>::quiet_NaN();
  double ci_lower = std::numeric_limits<double>::quiet_NaN();
  double ci_upper = std::numeric_limits<double>::quiet_NaN();
  bool has_interval = false;
  bool success = false;
};

namespace detail {

inline MethodOutcome run_method(const RdDataset& data, const MethodSpec& m, double alpha) {
  MethodOutcome out;
  try {
    if (m.estimator == MethodSpec::Estimator::lpe) {
      double h = m.fixed_h;
      if (m.rule == BandwidthRule::ik) {
        h = ik_bandwidth(data);
      } else if (m.rule == BandwidthRule::sm) {
        h = sm_bandwidth(data, 1, m.kernel).h_sm;
      }
      out.tau = lpe_two_sided(data, m.kernel, h);
      out.success = std::isfinite(out.tau);
      return out;
    }
    EstimateOptions options;
    options.degree = m.degree();
    options.kernel = m.kernel;
    options.rule = m.rule;
    options.fixed_h = m.fixed_h;
    options.alpha = alpha;
    options.variance = m.variance;
    const EstimateResult r = ple_estimate(data, options);
    out.tau = r.fit.tau_hat;
    if (m.variance != VarianceMethod::none) {
      out.variance = r.variance.value;
      out.ci_lower = r.ci.lower;
      out.ci_upper = r.ci.upper;
      out.has_interval = true;
      out.success = std::isfinite(out.tau) && std::isfinite(out.variance) &&
                    std::isfinite(out.ci_lower) && std::isfinite(out.ci_upper);
    } else {
      out.success = std::isfinite(out.tau);
    }
  } catch (const Error&) {
    out.success = false;
  }
  return out;
}

} // namespace detail

//! Reduce per-replication outcomes to the metric table. Every metric for
//! every method is computed over exactly the common-success replication set.
inline MetricsTable summarize(const std::vector<std::string>& labels,
                              const std::vector<std::vector<MethodOutcome>>& results,
                              double tau_true, int n) {
  const int reps = static_cast<int>(results.size());
  const int n_methods = static_cast<int>(labels.size());

  std::vector<int> common;
  for (int r = 0; r < reps; ++r) {
    bool all = true;
    for (int m = 0; m < n_methods; ++m) {
      all = all && results[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)].success;
    }
    if (all) common.push_back(r);
  }
  if (common.empty()) {
    throw Error(ErrorCode::numerical, "simulation",
                "no replication succeeded for every method; nothing to summarize");
  }

  MetricsTable table;
  table.n = n;
  table.replications = reps;
  table.common_success_count = static_cast<long>(common.size());

  const double rc = static_cast<double>(common.size());

  for (int m = 0; m < n_methods; ++m) {
    MethodMetrics row;
    row.method = labels[static_cast<std::size_t>(m)];

    long successes = 0;
    for (int r = 0; r < reps; ++r) {
      if (results[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)].success) ++successes;
    }
    row.success_count = successes;
    const double sr = static_cast<double>(successes) / static_cast<double>(reps);
    row.success_rate = {sr, std::sqrt(sr * (1.0 - sr) / static_cast<double>(reps)), true};

    std::vector<double> taus, variances, widths;
    long covered = 0;
    bool has_interval = true;
    taus.reserve(common.size());
    for (int r : common) {
      const auto& o = results[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)];
      taus.push_back(o.tau);
      if (o.has_interval) {
        variances.push_back(o.variance);
        widths.push_back(o.ci_upper - o.ci_lower);
        if (o.ci_lower <= tau_true && tau_true <= o.ci_upper) ++covered;
      } else {
        has_interval = false;
      }
    }

    const double tau_mean = stats::mean(taus);
    double mse = 0.0, emp_var = 0.0;
    for (double t : taus) {
      mse += (t - tau_true) * (t - tau_true);
      emp_var += (t - tau_mean) * (t - tau_mean);
    }
    mse /= rc;
    emp_var /= rc;  // population-style divisor, as the printed estimator
    const double emp_se = std::sqrt(emp_var);

    double mse_mcse = 0.0;
    for (double t : taus) {
      const double e = (t - tau_true) * (t - tau_true) - mse;
      mse_mcse += e * e;
    }
    mse_mcse = rc > 1.5 ? std::sqrt(mse_mcse / (rc * (rc - 1.0)))
                        : std::numeric_limits<double>::quiet_NaN();

    row.mse = {mse, mse_mcse, true};
    row.bias = {tau_mean - tau_true, emp_se / std::sqrt(rc), true};
    row.emp_se = {emp_se,
                  rc > 1.5 ? emp_se / std::sqrt(2.0 * (rc - 1.0))
                           : std::numeric_limits<double>::quiet_NaN(),
                  true};

    if (has_interval && !variances.empty()) {
      const double mod_se = std::sqrt(stats::mean(variances));
      const double var_sd = stats::sample_sd(variances);
      const double mod_mcse =
          mod_se > 0.0 ? var_sd / (2.0 * mod_se * std::sqrt(rc))
                       : std::numeric_limits<double>::quiet_NaN();
      row.mod_se = {mod_se, mod_mcse, true};
      if (emp_se > 0.0 && mod_se > 0.0) {
        const double ratio = mod_se / emp_se;
        const double rel = 100.0 * (ratio - 1.0);
        const double rel_mcse =
            100.0 * ratio *
            std::sqrt(std::pow(mod_mcse / mod_se, 2) + std::pow(row.emp_se.mcse / emp_se, 2));
        row.rel_e = {rel, rel_mcse, true};
      }
      const double cov = static_cast<double>(covered) / rc;
      row.coverage = {cov, std::sqrt(cov * (1.0 - cov) / rc), true};
      const double med = stats::median(widths);
      row.median_width = {med, 1.2533 * stats::sample_sd(widths) / std::sqrt(rc), true};
    }
    table.rows.push_back(std::move(row));
  }
  return table;
}

//! Monte Carlo study. Replications are independent work units; results are
//! keyed by replication index and reduced in index order, so the table is
//! bit-identical for any worker count. All summary metrics are computed over
//! the common-success subset (replications where every method succeeded).
inline MetricsTable run_study(const SimStudy& study) {
  if (study.replications < 1) {
    throw Error(ErrorCode::invalid_argument, "simulation", "need at least one replication");
  }
  if (study.methods.empty()) {
    throw Error(ErrorCode::invalid_argument, "simulation", "method list is empty");
  }
  const int n = study.n > 0 ? study.n : solve_n_for_mbar(study.dgp, study.m_bar);
  const int reps = study.replications;
  const int n_methods = static_cast<int>(study.methods.size());

  std::vector<std::vector<MethodOutcome>> results(
      static_cast<std::size_t>(reps),
      std::vector<MethodOutcome>(static_cast<std::size_t>(n_methods)));

  auto run_replication = [&](int r) {
    RdDataset data;
    try {
      data = dgp_sample(study.dgp, n, replication_seed(study.master_seed,
                                                       static_cast<std::uint64_t>(r)));
    } catch (const Error&) {
      return;  // pathological draw: every method fails for this replication
    }
    for (int m = 0; m < n_methods; ++m) {
      results[static_cast<std::size_t>(r)][static_cast<std::size_t>(m)] =
          detail::run_method(data, study.methods[static_cast<std::size_t>(m)], study.alpha);
    }
  };

  const int workers = std::max(1, study.workers);
  if (workers == 1) {
    for (int r = 0; r < reps; ++r) run_replication(r);
  } else {
    std::atomic<int> next{0};
    std::vector<std::thread> pool;
    pool.reserve(static_cast<std::size_t>(workers));
    for (int w = 0; w < workers; ++w) {
      pool.emplace_back([&]() {
        for (int r = next.fetch_add(1); r < reps; r = next.fetch_add(1)) {
          run_replication(r);
        }
      });
    }
    for (auto& t : pool) t.join();
  }

  std::vector<std::string> labels;
  labels.reserve(study.methods.size());
  for (const auto& m : study.methods) labels.push_back(m.label);
  return summarize(labels, results, study.dgp.tau_true, n);
}

} // namespace plrd
