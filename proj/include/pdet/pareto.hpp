#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <optional>
#include <ostream>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdet/analytic.hpp"
#include "pdet/io.hpp"
#include "pdet/montecarlo.hpp"
#include "pdet/weights.hpp"

namespace pdet {

// ============================================================================
// MD-FA curves: the (threshold, P_FA, P_MD) locus of a combining scheme over
// a threshold sweep, and Pareto comparison of two curves inside a tolerance
// region. Comparison equalizes the false-alarm probability by monotone
// log-log interpolation and asks whether one curve's missed-detection
// probability dominates the other's uniformly over the common feasible
// false-alarm interval, with a relative draw band for near-equal curves.
// ============================================================================

enum class Scheme { wfa, iwmd, pwmd, single, custom };

inline const char* scheme_label(Scheme s) {
  switch (s) {
    case Scheme::wfa: return "WFA";
    case Scheme::iwmd: return "I-WMD";
    case Scheme::pwmd: return "P-WMD";
    case Scheme::single: return "single";
    case Scheme::custom: return "custom";
  }
  return "?";
}

struct MdFaCurve {
  std::vector<OperatingPoint> points;  // ascending threshold, pfa strictly decreasing
  Scheme scheme = Scheme::custom;
};

struct ToleranceRegion {
  double pfa_max = 1e-6;
  double pmd_max = 1e-4;
};

enum class CurveMode { analytic, montecarlo };

struct PwmdOptions {
  std::size_t draws = 200;               // estimation draws averaged per grid point
  double interference_noise_ratio = 0.0; // interference power as a multiple of the antenna
                                         // noise power; inflates the SNR estimate by this much
};

struct CurveOptions {
  CurveMode mode = CurveMode::analytic;
  std::uint64_t seed = 0;
  std::uint64_t mc_trials = 100000;         // per hypothesis per grid point in montecarlo mode
  PwmdOptions pwmd{};
  std::vector<double> custom_weights{};     // for Scheme::custom
  std::optional<Preamble> preamble{};       // used by montecarlo mode and P-WMD estimation
};

/// Default threshold sweep: `count` points spread uniformly in
/// log(t / (1 - t)), dense toward both ends of (0, 1) where the operating
/// points of interest live.
inline std::vector<double> default_threshold_grid(std::size_t count = 512, double lo = 0.05,
                                                  double hi = 0.95) {
  if (count < 2 || !(lo > 0.0 && hi < 1.0 && lo < hi))
    throw std::invalid_argument("default_threshold_grid: bad parameters");
  const double a = std::log(lo / (1.0 - lo));
  const double b = std::log(hi / (1.0 - hi));
  std::vector<double> grid(count);
  for (std::size_t i = 0; i < count; ++i) {
    const double x = a + (b - a) * static_cast<double>(i) / static_cast<double>(count - 1);
    grid[i] = 1.0 / (1.0 + std::exp(-x));
  }
  return grid;
}

namespace detail {

/// One estimation-averaged P-WMD operating point: each draw measures the
/// block power per antenna on a fresh packet-present block, converts it to a
/// coarse SNR estimate using the antenna's exact idle-period noise power,
/// and feeds the estimate to the closed-form weights. Draws whose estimates
/// all fall below the usable floor fall back to equal weights. Probabilities
/// use the true SNRs; only the weights are estimated.
inline OperatingPoint pwmd_point(std::span<const double> snrs, std::size_t sts_len,
                                 double threshold, std::size_t grid_index,
                                 const Preamble& preamble, const PwmdOptions& opts,
                                 std::uint64_t seed) {
  const std::size_t n = snrs.size();
  AntennaScenario scenario{1.0, {snrs.begin(), snrs.end()}};
  const double bound = min_usable_snr(threshold);
  std::vector<cplx> buf(preamble.block_len());
  std::vector<double> est(n), kept_est;
  std::vector<std::size_t> kept;
  double pfa_acc = 0.0, pmd_acc = 0.0;
  for (std::size_t d = 0; d < opts.draws; ++d) {
    const std::uint64_t trial = (static_cast<std::uint64_t>(grid_index) << 32) | d;
    for (std::size_t j = 0; j < n; ++j) {
      fill_block(buf.data(), preamble, scenario, j, Hypothesis::packet_present, seed, trial, 0.0);
      const double b = average_power(std::span<const cplx>(buf), preamble.sts_len);
      const double noise = scenario.noise_power(j);
      est[j] = std::max((b + opts.interference_noise_ratio * noise) / noise - 1.0, 0.0);
    }
    kept.clear();
    kept_est.clear();
    for (std::size_t j = 0; j < n; ++j)
      if (est[j] > bound) {
        kept.push_back(j);
        kept_est.push_back(est[j]);
      }
    WeightVector w;
    if (kept.empty()) {
      w = wfa_weights(n);
    } else {
      const WeightVector kw = wmd_weights(kept_est, threshold);
      w.w.assign(n, 0.0);
      for (std::size_t i = 0; i < kept.size(); ++i) w.w[kept[i]] = kw[i];
    }
    pfa_acc += combined_false_alarm_prob(sts_len, threshold, w.values());
    pmd_acc += combined_missed_detection_prob(sts_len, threshold, snrs, w.values());
  }
  const double inv = 1.0 / static_cast<double>(opts.draws);
  return {threshold, pfa_acc * inv, pmd_acc * inv};
}

inline WeightVector scheme_weights(Scheme scheme, std::span<const double> snrs, double threshold,
                                   const CurveOptions& opts) {
  switch (scheme) {
    case Scheme::wfa: return wfa_weights(snrs.size());
    case Scheme::iwmd: return wmd_weights_filtered(snrs, threshold);
    case Scheme::single: {
      WeightVector w;
      w.w.assign(snrs.size(), 0.0);
      w.w[0] = 1.0;
      return w;
    }
    case Scheme::custom: {
      if (opts.custom_weights.size() != snrs.size())
        throw std::invalid_argument("build_curve: custom weights do not match the antenna count");
      return make_weight_vector(opts.custom_weights);
    }
    default: throw std::invalid_argument("build_curve: scheme has no static weights");
  }
}

}  // namespace detail

/// Sweeps the threshold grid and returns one operating point per usable grid
/// value. For SNR-dependent schemes the weights are recomputed at every
/// threshold. Grid points where no antenna clears the usable floor are
/// omitted; if that empties the curve, NoUsableAntennaError propagates.
inline MdFaCurve build_curve(Scheme scheme, std::span<const double> snrs, std::size_t sts_len,
                             std::span<const double> threshold_grid,
                             const CurveOptions& opts = {}) {
  if (threshold_grid.empty()) throw std::invalid_argument("build_curve: empty threshold grid");
  for (std::size_t i = 0; i < threshold_grid.size(); ++i) {
    const double t = threshold_grid[i];
    if (!(t > 0.0 && t < 1.0) || (i > 0 && !(t > threshold_grid[i - 1])))
      throw std::invalid_argument("build_curve: grid must increase strictly inside (0, 1)");
  }
  if (snrs.empty()) throw std::invalid_argument("build_curve: need at least one antenna");
  for (double g : snrs)
    if (!(g > 0.0)) throw std::invalid_argument("build_curve: SNRs must be positive");

  const Preamble local_preamble =
      opts.preamble ? *opts.preamble : make_preamble(sts_len, PreambleKind::qpsk_random, opts.seed);
  MdFaCurve curve;
  curve.scheme = scheme;
  curve.points.reserve(threshold_grid.size());

  for (std::size_t i = 0; i < threshold_grid.size(); ++i) {
    const double t = threshold_grid[i];
    if (scheme == Scheme::pwmd) {
      curve.points.push_back(detail::pwmd_point(snrs, sts_len, t, i, local_preamble, opts.pwmd,
                                                opts.seed));
      continue;
    }
    WeightVector w;
    try {
      w = detail::scheme_weights(scheme, snrs, t, opts);
    } catch (const NoUsableAntennaError&) {
      continue;  // this grid value is unusable for the scheme
    }
    if (opts.mode == CurveMode::analytic) {
      curve.points.push_back({t, combined_false_alarm_prob(sts_len, t, w.values()),
                              combined_missed_detection_prob(sts_len, t, snrs, w.values())});
    } else {
      AntennaScenario scenario{1.0, {snrs.begin(), snrs.end()}};
      TrialPlan plan;
      plan.trials = opts.mc_trials;
      plan.seed = derive_key(opts.seed, 0x6D63ULL, i);
      plan.metric = MetricKind::compensated_combined;
      plan.weights = w;
      plan.hypothesis = Hypothesis::noise_only;
      const EmpiricalRate fa = estimate_rate(plan, local_preamble, scenario, t);
      plan.hypothesis = Hypothesis::packet_present;
      const EmpiricalRate md = estimate_rate(plan, local_preamble, scenario, t);
      curve.points.push_back({t, fa.rate, md.rate});
    }
  }
  // Prune to the Pareto staircase: a grid point whose false-alarm rate fails
  // to fall below its predecessor's is dominated by that predecessor, since
  // the missed-detection rate can only have grown with the threshold. Fixed
  // weight schemes never trigger this; SNR-adaptive weights (antenna-drop
  // transitions, estimation noise) and finite-trial empirical rates do.
  std::vector<OperatingPoint> kept;
  for (const auto& p : curve.points)
    if (kept.empty() || p.pfa < kept.back().pfa) kept.push_back(p);
  curve.points = std::move(kept);
  if (curve.points.empty())
    throw NoUsableAntennaError("build_curve: no usable grid point for this scheme");
  return curve;
}

// ----------------------------------------------------------------------------
// Curve interpolation and comparison.
// ----------------------------------------------------------------------------

/// P_MD at the requested P_FA by monotone log-log linear interpolation
/// between adjacent grid points. The target must lie within the curve's
/// false-alarm range.
inline double md_at_fa(const MdFaCurve& curve, double pfa_target) {
  if (curve.points.size() < 2) throw std::invalid_argument("md_at_fa: need at least two points");
  if (!(pfa_target > 0.0)) throw std::out_of_range("md_at_fa: target must be positive");
  const auto& pts = curve.points;
  for (std::size_t i = 1; i < pts.size(); ++i)
    if (!(pts[i].pfa < pts[i - 1].pfa))
      throw std::invalid_argument("md_at_fa: curve pfa must decrease strictly");
  const double fa_hi = pts.front().pfa;  // pfa decreases along the curve
  const double fa_lo = pts.back().pfa;
  if (pfa_target > fa_hi || pfa_target < fa_lo)
    throw std::out_of_range("md_at_fa: target outside the curve's false-alarm range");
  // binary search for the bracketing segment (pfa descending)
  std::size_t lo = 0, hi = pts.size() - 1;
  while (hi - lo > 1) {
    const std::size_t mid = (lo + hi) / 2;
    if (pts[mid].pfa >= pfa_target)
      lo = mid;
    else
      hi = mid;
  }
  if (pts[lo].pfa == pfa_target) return pts[lo].pmd;
  if (pts[hi].pfa == pfa_target) return pts[hi].pmd;
  constexpr double floor = 1e-320;  // keeps logs finite when Q underflows
  const double lf0 = std::log(std::max(pts[lo].pfa, floor));
  const double lf1 = std::log(std::max(pts[hi].pfa, floor));
  const double lm0 = std::log(std::max(pts[lo].pmd, floor));
  const double lm1 = std::log(std::max(pts[hi].pmd, floor));
  const double u = (std::log(pfa_target) - lf0) / (lf1 - lf0);
  return std::exp(lm0 + u * (lm1 - lm0));
}

struct BenchmarkVerdict {
  enum class Outcome { a_wins, draw, b_wins } outcome = Outcome::draw;
  bool feasible_a = false;
  bool feasible_b = false;
};

namespace detail {

/// Smallest feasible false-alarm value of a curve inside the region, if any.
/// P_MD rises as P_FA falls, so feasibility is an interval ending at the
/// region's false-alarm cap (both region tails must be bracketed by the
/// curve, otherwise the curve is infeasible).
inline std::optional<double> feasible_fa_floor(const MdFaCurve& curve,
                                               const ToleranceRegion& region) {
  const double fa_hi_curve = curve.points.front().pfa;
  const double fa_lo_curve = curve.points.back().pfa;
  const double fa_hi = std::min(region.pfa_max, fa_hi_curve);
  if (fa_hi < fa_lo_curve) return std::nullopt;           // curve never reaches the cap
  if (md_at_fa(curve, fa_hi) > region.pmd_max) return std::nullopt;
  double lo = fa_lo_curve, hi = fa_hi;
  if (md_at_fa(curve, lo) <= region.pmd_max) return lo;   // whole range feasible
  for (int i = 0; i < 96; ++i) {
    const double mid = std::sqrt(lo * hi);  // bisect in log domain
    if (md_at_fa(curve, mid) <= region.pmd_max)
      hi = mid;
    else
      lo = mid;
  }
  return hi;
}

}  // namespace detail

/// Pareto comparison inside the tolerance region. A wins iff its
/// interpolated P_MD beats B's by more than the relative draw band at every
/// probed false-alarm value of the common feasible interval (and
/// symmetrically for B); crossing or near-equal curves draw, as do two
/// infeasible curves. A feasible curve beats an infeasible one.
inline BenchmarkVerdict pareto_compare(const MdFaCurve& curve_a, const MdFaCurve& curve_b,
                                       const ToleranceRegion& region, double draw_band = 1e-3,
                                       std::size_t probes = 64) {
  using Outcome = BenchmarkVerdict::Outcome;
  BenchmarkVerdict verdict;
  const auto floor_a = detail::feasible_fa_floor(curve_a, region);
  const auto floor_b = detail::feasible_fa_floor(curve_b, region);
  verdict.feasible_a = floor_a.has_value();
  verdict.feasible_b = floor_b.has_value();
  if (!verdict.feasible_a && !verdict.feasible_b) return verdict;  // draw
  if (verdict.feasible_a != verdict.feasible_b) {
    verdict.outcome = verdict.feasible_a ? Outcome::a_wins : Outcome::b_wins;
    return verdict;
  }
  const double fa_lo = std::max({*floor_a, *floor_b, curve_a.points.back().pfa,
                                 curve_b.points.back().pfa});
  const double fa_hi = std::min({region.pfa_max, curve_a.points.front().pfa,
                                 curve_b.points.front().pfa});
  if (!(fa_lo <= fa_hi)) return verdict;  // no common interval: draw
  bool a_strict = true, b_strict = true;
  const double log_lo = std::log(fa_lo), log_hi = std::log(fa_hi);
  for (std::size_t i = 0; i < probes; ++i) {
    const double u = probes == 1 ? 0.0
                                 : static_cast<double>(i) / static_cast<double>(probes - 1);
    const double fa = std::exp(log_lo + u * (log_hi - log_lo));
    const double md_a = md_at_fa(curve_a, std::clamp(fa, fa_lo, fa_hi));
    const double md_b = md_at_fa(curve_b, std::clamp(fa, fa_lo, fa_hi));
    if (!(md_a < md_b * (1.0 - draw_band))) a_strict = false;
    if (!(md_b < md_a * (1.0 - draw_band))) b_strict = false;
    if (!a_strict && !b_strict) break;
  }
  if (a_strict)
    verdict.outcome = Outcome::a_wins;
  else if (b_strict)
    verdict.outcome = Outcome::b_wins;
  return verdict;
}

/// CSV export, full decimal precision: header `rho,pfa,pmd,scheme`.
inline void curve_to_csv(const MdFaCurve& curve, std::ostream& out) {
  out << "rho,pfa,pmd,scheme\n";
  for (const auto& p : curve.points)
    out << format_value(p.threshold) << ',' << format_value(p.pfa) << ',' << format_value(p.pmd)
        << ',' << scheme_label(curve.scheme) << '\n';
}

}  // namespace pdet
