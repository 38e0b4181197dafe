#pragma once

// Numerical-stability benchmark: solve many random instances of one template
// and summarize the normalized residuals of all returned roots.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <cstdio>
#include <functional>
#include <limits>
#include <map>
#include <mutex>
#include <random>
#include <string>
#include <thread>
#include <vector>

#include "rforge/error.hpp"
#include "rforge/problem_io.hpp"
#include "rforge/seeding.hpp"
#include "rforge/solver.hpp"
#include "rforge/template_io.hpp"

namespace rforge {

/// Coefficients for instance `k`: i.i.d. standard normal per slot, seeded
/// from (seed, k) so any instance can be regenerated on its own.
inline std::vector<double> sample_coefficients(std::size_t slots, std::uint64_t seed, std::uint64_t instance) {
  std::mt19937_64 rng(derive_seed(seed, {hash_tag("instance"), instance}));
  std::normal_distribution<double> normal(0.0, 1.0);
  std::vector<double> c(slots);
  for (auto& v : c) v = normal(rng);
  return c;
}

inline constexpr double kResidualFloor = 1e-20;   // log10 of an exact zero is clamped here
inline constexpr double kFailResidual = 1e-3;
inline constexpr double kHistogramBinWidth = 0.5;

struct StabilityReport {
  std::size_t instances = 0;
  std::size_t roots = 0;
  std::size_t failed_instances = 0;
  std::size_t solve_errors = 0;
  std::size_t fallback_used = 0;
  double mean_log10 = std::numeric_limits<double>::quiet_NaN();
  double median_log10 = std::numeric_limits<double>::quiet_NaN();
  std::map<double, std::size_t> histogram;  // lower bin edge of log10(worst residual per instance)
  std::size_t non_finite = 0;               // instances with no finite worst residual

  double fail_fraction() const { return instances ? static_cast<double>(failed_instances) / static_cast<double>(instances) : 0.0; }
};

struct StabilityOptions {
  std::size_t instances = 5000;
  std::uint64_t seed = 0;
  unsigned jobs = 1;
  std::function<void(std::size_t done, std::size_t total)> progress;  // may be called from workers, serialized
};

inline double clamped_log10(double r) { return std::log10(std::max(r, kResidualFloor)); }

inline double histogram_bin(double log10r) { return std::floor(log10r / kHistogramBinWidth) * kHistogramBinWidth; }

namespace detail {

struct InstanceOutcome {
  std::vector<double> logs;
  std::size_t roots = 0;
  double worst = 0.0;
  bool failed = false;
  bool error = false;
  bool fallback = false;
};

inline InstanceOutcome run_instance(const TemplateBundle& bundle, const std::vector<double>& coeffs) {
  InstanceOutcome o;
  try {
    SolutionSet s;
    try {
      s = solve(bundle.primary, coeffs);
    } catch (const Error& e) {
      if (e.kind() != ErrorKind::IllConditioned || !bundle.fallback) throw;
      s = solve(*bundle.fallback, coeffs);
      o.fallback = true;
    }
    o.roots = s.roots.size();
    for (const auto& r : s.roots) {
      if (!std::isfinite(r.residual)) {
        o.worst = std::numeric_limits<double>::infinity();
        o.failed = true;
        continue;
      }
      o.logs.push_back(clamped_log10(r.residual));
      o.worst = std::max(o.worst, r.residual);
      if (r.residual > kFailResidual) o.failed = true;
    }
    if (s.roots.empty()) o.failed = true;
  } catch (const Error&) {
    o.error = o.failed = true;
    o.worst = std::numeric_limits<double>::infinity();
  }
  return o;
}

}  // namespace detail

/// Solves `instances` sampled coefficient vectors. Per-instance outcomes are
/// kept and merged in instance order, so the report does not depend on
/// `jobs`.
inline StabilityReport run_stability(const TemplateBundle& bundle, const StabilityOptions& opt) {
  require(opt.instances > 0, "stability benchmark needs at least one instance");
  const std::size_t slots = bundle.primary.slot_count();
  std::vector<detail::InstanceOutcome> outcomes(opt.instances);
  std::mutex mu;
  std::size_t done = 0;
  auto work = [&](std::size_t begin, std::size_t step) {
    for (std::size_t k = begin; k < opt.instances; k += step) {
      outcomes[k] = detail::run_instance(bundle, sample_coefficients(slots, opt.seed, k));
      if (opt.progress) {
        std::lock_guard<std::mutex> lock(mu);
        opt.progress(++done, opt.instances);
      }
    }
  };
  const std::size_t jobs = std::clamp<std::size_t>(opt.jobs, 1, opt.instances);
  if (jobs == 1) {
    work(0, 1);
  } else {
    std::vector<std::thread> pool;
    for (std::size_t w = 0; w < jobs; ++w) pool.emplace_back(work, w, jobs);
    for (auto& t : pool) t.join();
  }

  StabilityReport rep;
  rep.instances = opt.instances;
  std::vector<double> logs;
  for (const auto& o : outcomes) {
    rep.roots += o.roots;
    logs.insert(logs.end(), o.logs.begin(), o.logs.end());
    rep.failed_instances += o.failed;
    rep.solve_errors += o.error;
    rep.fallback_used += o.fallback;
    if (std::isfinite(o.worst))
      ++rep.histogram[histogram_bin(clamped_log10(o.worst))];
    else
      ++rep.non_finite;
  }
  if (!logs.empty()) {
    double sum = 0.0;
    for (double v : logs) sum += v;
    rep.mean_log10 = sum / static_cast<double>(logs.size());
    std::sort(logs.begin(), logs.end());
    const std::size_t h = logs.size() / 2;
    rep.median_log10 = logs.size() % 2 ? logs[h] : 0.5 * (logs[h - 1] + logs[h]);
  }
  return rep;
}

inline Json report_to_json(const StabilityReport& r) {
  Json j;
  j["instances"] = r.instances;
  j["roots"] = r.roots;
  j["failed_instances"] = r.failed_instances;
  j["fail_fraction"] = r.fail_fraction();
  j["solve_errors"] = r.solve_errors;
  j["fallback_used"] = r.fallback_used;
  j["mean_log10_residual"] = r.mean_log10;
  j["median_log10_residual"] = r.median_log10;
  Json h = Json::array();
  for (const auto& [edge, count] : r.histogram) h.push_back({{"lower", edge}, {"upper", edge + kHistogramBinWidth}, {"count", count}});
  j["histogram"] = std::move(h);
  j["non_finite"] = r.non_finite;
  return j;
}

/// Table-2 style text: mean, median, fail %, then the histogram.
inline std::string report_to_text(const StabilityReport& r) {
  char buf[160];
  std::string out;
  std::snprintf(buf, sizeof buf, "instances %zu\nroots %zu\nmean_log10 %.6f\nmedian_log10 %.6f\nfail_pct %.4f\n", r.instances,
                r.roots, r.mean_log10, r.median_log10, 100.0 * r.fail_fraction());
  out += buf;
  std::snprintf(buf, sizeof buf, "solve_errors %zu\nfallback_used %zu\n", r.solve_errors, r.fallback_used);
  out += buf;
  out += "histogram log10(worst residual per instance):\n";
  for (const auto& [edge, count] : r.histogram) {
    std::snprintf(buf, sizeof buf, "  [%5.1f, %5.1f) %zu\n", edge, edge + kHistogramBinWidth, count);
    out += buf;
  }
  out += "  non-finite " + std::to_string(r.non_finite) + "\n";
  return out;
}

/// One line per histogram bin: lower,upper,count; non-finite last.
inline std::string report_to_csv(const StabilityReport& r) {
  std::string out = "lower,upper,count\n";
  char buf[96];
  for (const auto& [edge, count] : r.histogram) {
    std::snprintf(buf, sizeof buf, "%.1f,%.1f,%zu\n", edge, edge + kHistogramBinWidth, count);
    out += buf;
  }
  out += "nonfinite,nonfinite," + std::to_string(r.non_finite) + "\n";
  return out;
}

}  // namespace rforge
