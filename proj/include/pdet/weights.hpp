#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdet/analytic.hpp"
#include "pdet/detection_metrics.hpp"
#include "pdet/simplex.hpp"

namespace pdet {

// ============================================================================
// Weight assignment schemes.
//
//   WFA  : equal weights, optimal for false-alarm probability.
//   WMD  : SNR-dependent weights, optimal for missed-detection probability;
//          available in closed form and as an iterative ascent that marches
//          an arbitrary feasible start toward the optimum.
//   P-WMD: WMD driven by a coarse preamble-power SNR estimate instead of
//          oracle SNRs.
//
// A brute-force simplex lattice search is included as the verification
// oracle for both optimality claims.
// ============================================================================

struct NoUsableAntennaError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError;

inline WeightVector wfa_weights(std::size_t n_antennas) {
  if (n_antennas == 0) throw std::invalid_argument("wfa_weights: need at least one antenna");
  WeightVector v;
  v.w.assign(n_antennas, 1.0 / static_cast<double>(n_antennas));
  return v;
}

struct UsableAntennas {
  std::vector<std::size_t> kept;
  std::vector<std::size_t> dropped;
};

/// Splits antennas by the usable-SNR floor, preserving order. Throws
/// NoUsableAntennaError when every antenna falls below the floor; the caller
/// decides the fallback.
inline UsableAntennas filter_antennas(std::span<const double> snrs, double threshold) {
  detail::check_threshold(threshold, "filter_antennas");
  const double bound = min_usable_snr(threshold);
  UsableAntennas result;
  for (std::size_t j = 0; j < snrs.size(); ++j) {
    if (snrs[j] > bound)
      result.kept.push_back(j);
    else
      result.dropped.push_back(j);
  }
  if (result.kept.empty())
    throw NoUsableAntennaError("filter_antennas: no antenna above the usable-SNR floor");
  return result;
}

/// Closed-form optimal weights for missed detection:
///   w_j proportional to ((1-t) snr_j - t) / ((1-t)^2 snr_j + (1+t^2)/2),
/// normalized to sum to one. Every SNR must exceed the usable floor.
inline WeightVector wmd_weights(std::span<const double> snrs, double threshold) {
  detail::check_threshold(threshold, "wmd_weights");
  if (snrs.empty()) throw std::invalid_argument("wmd_weights: need at least one antenna");
  detail::check_md_constraint(snrs, threshold, "wmd_weights");
  const double t = threshold;
  const double half = (1.0 + t * t) / 2.0;
  std::vector<double> raw(snrs.size());
  for (std::size_t j = 0; j < snrs.size(); ++j)
    raw[j] = ((1.0 - t) * snrs[j] - t) / ((1.0 - t) * (1.0 - t) * snrs[j] + half);
  return normalize_weights(raw);
}

/// Filters first, then assigns closed-form weights to the kept antennas and
/// zero to the dropped ones. The returned vector always has snrs.size()
/// entries.
inline WeightVector wmd_weights_filtered(std::span<const double> snrs, double threshold) {
  const UsableAntennas split = filter_antennas(snrs, threshold);
  std::vector<double> kept_snrs;
  kept_snrs.reserve(split.kept.size());
  for (std::size_t j : split.kept) kept_snrs.push_back(snrs[j]);
  const WeightVector kept_w = wmd_weights(kept_snrs, threshold);
  WeightVector full;
  full.w.assign(snrs.size(), 0.0);
  for (std::size_t i = 0; i < split.kept.size(); ++i) full.w[split.kept[i]] = kept_w[i];
  return full;
}

// ----------------------------------------------------------------------------
// Iterative ascent toward the closed-form optimum. Each step moves weight
// mass from the coordinates with the largest weight-to-optimum ratio to
// those with the smallest, with the step size chosen so the first coordinate
// outside either extreme set is reached exactly. The objective is
// nondecreasing along the trace. Kept for validation of the closed form,
// not for production use.
// ----------------------------------------------------------------------------

struct AscentTrace {
  std::vector<WeightVector> iterates;   // includes the start, excludes duplicates of the end
  std::vector<double> objective;        // md_objective at each iterate
  std::size_t iterations = 0;
};

struct ConvergenceError : std::runtime_error {
  AscentTrace trace;
  ConvergenceError(const std::string& msg, AscentTrace t)
      : std::runtime_error(msg), trace(std::move(t)) {}
};

inline std::pair<WeightVector, AscentTrace> wmd_ascent(const WeightVector& start,
                                                       std::span<const double> snrs,
                                                       double threshold, double tol = 1e-9,
                                                       std::size_t max_iters = 1000) {
  if (!start.feasible()) throw std::invalid_argument("wmd_ascent: infeasible start");
  if (start.size() != snrs.size()) throw std::invalid_argument("wmd_ascent: length mismatch");
  const WeightVector target = wmd_weights(snrs, threshold);
  const std::size_t n = snrs.size();
  constexpr double ratio_tie_tol = 1e-12;  // relative tie tolerance for the extreme sets

  WeightVector w = start;
  AscentTrace trace;
  trace.iterates.push_back(w);
  trace.objective.push_back(md_objective(w, snrs, threshold));

  std::vector<double> ratio(n);
  for (std::size_t iter = 0; iter < max_iters; ++iter) {
    double max_dev = 0.0;
    double q_max = -1.0, q_min = std::numeric_limits<double>::infinity();
    for (std::size_t j = 0; j < n; ++j) {
      ratio[j] = w[j] / target[j];
      max_dev = std::max(max_dev, std::fabs(ratio[j] - 1.0));
      q_max = std::max(q_max, ratio[j]);
      q_min = std::min(q_min, ratio[j]);
    }
    if (max_dev <= tol) {
      trace.iterations = iter;
      return {w, trace};
    }

    std::vector<std::size_t> top, bottom, rest;
    for (std::size_t j = 0; j < n; ++j) {
      if (ratio[j] >= q_max * (1.0 - ratio_tie_tol))
        top.push_back(j);
      else if (ratio[j] <= q_min * (1.0 + ratio_tie_tol))
        bottom.push_back(j);
      else
        rest.push_back(j);
    }

    double eps;
    if (!rest.empty()) {
      double q2_max = 0.0;
      for (std::size_t j : rest) q2_max = std::max(q2_max, ratio[j]);
      for (std::size_t j : bottom) q2_max = std::max(q2_max, ratio[j]);
      double q2_min = std::numeric_limits<double>::infinity();
      for (std::size_t j : rest) q2_min = std::min(q2_min, ratio[j]);
      for (std::size_t j : top) q2_min = std::min(q2_min, ratio[j]);
      double wo_top = std::numeric_limits<double>::infinity();
      for (std::size_t j : top) wo_top = std::min(wo_top, target[j]);
      double wo_bottom = std::numeric_limits<double>::infinity();
      for (std::size_t j : bottom) wo_bottom = std::min(wo_bottom, target[j]);
      const double eps_top = static_cast<double>(top.size()) * (q_max - q2_max) * wo_top;
      const double eps_bottom = static_cast<double>(bottom.size()) * (q2_min - q_min) * wo_bottom;
      eps = std::min(eps_top, eps_bottom);
    } else {
      // the extreme sets already cover every coordinate: aim straight at the
      // optimum, stopping at the first coordinate to reach it
      eps = std::numeric_limits<double>::infinity();
      for (std::size_t j : top)
        eps = std::min(eps, static_cast<double>(top.size()) * (w[j] - target[j]));
      for (std::size_t j : bottom)
        eps = std::min(eps, static_cast<double>(bottom.size()) * (target[j] - w[j]));
    }

    // exact arithmetic keeps eps positive away from convergence; clamp the
    // floating-point residue and treat a zero step as converged
    eps = std::max(eps, 0.0);
    if (eps == 0.0) {
      trace.iterations = iter;
      return {w, trace};
    }

    for (std::size_t j : top) w.w[j] -= eps / static_cast<double>(top.size());
    for (std::size_t j : bottom) w.w[j] += eps / static_cast<double>(bottom.size());
    trace.iterates.push_back(w);
    trace.objective.push_back(md_objective(w, snrs, threshold));
  }
  trace.iterations = max_iters;
  throw ConvergenceError("wmd_ascent: no convergence within max_iters", std::move(trace));
}

// ----------------------------------------------------------------------------
// Brute-force simplex lattice oracle.
// ----------------------------------------------------------------------------

enum class CombiningObjective { false_alarm, missed_detection };

/// Exhaustive search over the lattice { k/K : sum k = K } with K = round(1/step).
/// Returns the maximizing point; on ties the lexicographically smallest wins.
/// Guarded to at most 4 antennas and step >= 1e-3.
inline WeightVector simplex_grid_best(CombiningObjective objective, std::span<const double> snrs,
                                      double threshold, double grid_step) {
  const std::size_t n = snrs.size();
  if (n == 0 || n > 4) throw std::invalid_argument("simplex_grid_best: 1..4 antennas supported");
  if (!(grid_step >= 1e-3 - 1e-15))
    throw std::invalid_argument("simplex_grid_best: grid_step below the 1e-3 guard");
  const long k_total = std::lround(1.0 / grid_step);
  const double unit = 1.0 / static_cast<double>(k_total);

  WeightVector best;
  double best_value = -std::numeric_limits<double>::infinity();
  std::vector<double> point(n);

  const auto evaluate = [&](const std::vector<long>& counts) {
    for (std::size_t j = 0; j < n; ++j) point[j] = static_cast<double>(counts[j]) * unit;
    const WeightVector candidate{point};
    const double value = objective == CombiningObjective::false_alarm
                             ? fa_objective(candidate)
                             : md_objective(candidate, snrs, threshold);
    if (value > best_value) {
      best_value = value;
      best = candidate;
    }
  };

  std::vector<long> counts(n, 0);
  // lexicographic enumeration of compositions of k_total into n parts
  const auto recurse = [&](auto&& self, std::size_t pos, long remaining) -> void {
    if (pos + 1 == n) {
      counts[pos] = remaining;
      evaluate(counts);
      return;
    }
    for (long k = 0; k <= remaining; ++k) {
      counts[pos] = k;
      self(self, pos + 1, remaining - k);
    }
  };
  recurse(recurse, 0, k_total);
  return best;
}

// ----------------------------------------------------------------------------
// Coarse preamble-power SNR estimation.
// ----------------------------------------------------------------------------

struct CoarseSnrEstimate {
  double snr_hat = 0.0;
  enum class Source { oracle, preamble_coarse } source = Source::preamble_coarse;
};

/// Estimates the antenna SNR from the measured block power and an idle-period
/// noise power estimate: snr_hat = max((b + interference) / noise_hat - 1, 0).
/// Exogenous interference inflates the block power but not the autocorrelation,
/// so it biases the estimate upward. Negative estimates clamp to zero.
inline CoarseSnrEstimate estimate_snr_coarse(const ReceivedBlock& block,
                                             double noise_power_estimate,
                                             double interference_power = 0.0) {
  if (!(noise_power_estimate > 0.0))
    throw std::invalid_argument("estimate_snr_coarse: noise power estimate must be positive");
  if (!(interference_power >= 0.0))
    throw std::invalid_argument("estimate_snr_coarse: negative interference power");
  if (block.samples.size() < 2 || block.samples.size() % 2 != 0)
    throw std::invalid_argument("estimate_snr_coarse: malformed block");
  const std::size_t sts_len = block.samples.size() / 2;
  const double b = average_power(std::span<const cplx>(block.samples), sts_len);
  const double snr_hat = std::max((b + interference_power) / noise_power_estimate - 1.0, 0.0);
  return CoarseSnrEstimate{snr_hat, CoarseSnrEstimate::Source::preamble_coarse};
}

}  // namespace pdet
