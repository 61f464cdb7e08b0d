#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdet/analytic.hpp"
#include "pdet/detection_metrics.hpp"
#include "pdet/io.hpp"
#include "pdet/parallel.hpp"
#include "pdet/signal_model.hpp"
#include "pdet/simplex.hpp"

namespace pdet {

// ============================================================================
// Empirical estimation of false-alarm and missed-detection rates, for the
// conventional |a|/b metric, the real-part metric, and the weighted
// multi-antenna combination. Trials are addressed by (seed, antenna, trial),
// so runs are deterministic and the result does not depend on how trials are
// partitioned across threads. A threshold tie (r == 0) counts as
// non-detection.
// ============================================================================

enum class MetricKind { sc_abs, rp_real, compensated_combined };

struct TrialPlan {
  std::uint64_t trials = 1;
  std::uint64_t seed = 0;
  Hypothesis hypothesis = Hypothesis::noise_only;
  MetricKind metric = MetricKind::rp_real;
  WeightVector weights;         // used by compensated_combined; empty means single antenna
  double phase_per_sts = 0.0;   // residual rotation applied to the signal, radians per STS
  unsigned workers = 0;         // worker threads; 0 picks the hardware count
};

inline const char* metric_label(MetricKind m) {
  switch (m) {
    case MetricKind::sc_abs: return "sc-abs";
    case MetricKind::rp_real: return "rp-real";
    case MetricKind::compensated_combined: return "compensated-combined";
  }
  return "?";
}

inline const char* hypothesis_label(Hypothesis h) {
  return h == Hypothesis::noise_only ? "noise-only" : "packet-present";
}

struct EmpiricalRate {
  std::uint64_t hits = 0;
  std::uint64_t trials = 0;
  double rate = 0.0;
  double std_dev = 0.0;  // binomial: sqrt(rate (1 - rate) / trials)

  static EmpiricalRate from_counts(std::uint64_t hits, std::uint64_t trials) {
    EmpiricalRate r;
    r.hits = hits;
    r.trials = trials;
    r.rate = static_cast<double>(hits) / static_cast<double>(trials);
    r.std_dev = std::sqrt(r.rate * (1.0 - r.rate) / static_cast<double>(trials));
    return r;
  }
};

namespace detail {

struct BlockStats {
  double autocorr_real;
  double autocorr_abs;
  double avg_power;
};

/// Synthesizes one block into `buf` and reduces it to the three statistics
/// the detection rules need.
inline BlockStats trial_stats(std::vector<cplx>& buf, const Preamble& preamble,
                              const AntennaScenario& scenario, std::size_t antenna,
                              Hypothesis hypothesis, std::uint64_t seed, std::uint64_t trial,
                              double phase_per_sts) {
  fill_block(buf.data(), preamble, scenario, antenna, hypothesis, seed, trial, phase_per_sts);
  const std::size_t eta = preamble.sts_len;
  cplx a{0.0, 0.0};
  double power = 0.0;
  for (std::size_t k = 0; k < eta; ++k) {
    a += buf[k] * std::conj(buf[k + eta]);
    power += std::norm(buf[k]) + std::norm(buf[k + eta]);
  }
  a /= static_cast<double>(eta);
  power /= static_cast<double>(2 * eta);
  return {a.real(), std::abs(a), power};
}

inline bool detects(MetricKind metric, const BlockStats& s, double threshold) {
  switch (metric) {
    case MetricKind::sc_abs:
      return s.avg_power > 0.0 && s.autocorr_abs > threshold * s.avg_power;
    case MetricKind::rp_real:
    case MetricKind::compensated_combined:
      return s.autocorr_real - threshold * s.avg_power > 0.0;
  }
  return false;
}

}  // namespace detail

/// Estimates the error rate of the planned experiment: detections under
/// noise-only input (false alarms) or non-detections under packet-present
/// input (misses).
inline EmpiricalRate estimate_rate(const TrialPlan& plan, const Preamble& preamble,
                                   const AntennaScenario& scenario, double threshold) {
  if (plan.trials == 0) throw std::invalid_argument("estimate_rate: need at least one trial");
  detail::check_threshold(threshold, "estimate_rate");
  const bool combined = plan.metric == MetricKind::compensated_combined && !plan.weights.w.empty();
  if (combined && plan.weights.size() != scenario.antenna_count())
    throw std::invalid_argument("estimate_rate: weights do not match the antenna count");

  const unsigned workers =
      plan.workers ? plan.workers
                   : (std::thread::hardware_concurrency() ? std::thread::hardware_concurrency() : 1);
  std::vector<std::uint64_t> hits(workers, 0);
  parallel_chunks(plan.trials, [&](unsigned chunk, std::uint64_t begin, std::uint64_t end) {
    std::vector<cplx> buf(preamble.block_len());
    std::uint64_t local = 0;
    for (std::uint64_t t = begin; t < end; ++t) {
      bool detected;
      if (combined) {
        double r_sum = 0.0;
        for (std::size_t j = 0; j < scenario.antenna_count(); ++j) {
          const auto s = detail::trial_stats(buf, preamble, scenario, j, plan.hypothesis,
                                             plan.seed, t, plan.phase_per_sts);
          r_sum += plan.weights[j] * (s.autocorr_real - threshold * s.avg_power);
        }
        detected = r_sum > 0.0;
      } else {
        const auto s = detail::trial_stats(buf, preamble, scenario, 0, plan.hypothesis, plan.seed,
                                           t, plan.phase_per_sts);
        detected = detail::detects(plan.metric, s, threshold);
      }
      const bool hit = plan.hypothesis == Hypothesis::noise_only ? detected : !detected;
      local += hit ? 1 : 0;
    }
    hits[chunk] = local;
  }, workers);

  std::uint64_t total = 0;
  for (std::uint64_t h : hits) total += h;
  return EmpiricalRate::from_counts(total, plan.trials);
}

// ----------------------------------------------------------------------------
// Paired comparison of the conventional and real-part metrics on identical
// noise realizations.
// ----------------------------------------------------------------------------

struct MetricComparison {
  EmpiricalRate conventional;        // |a|/b > threshold rule
  EmpiricalRate real_part;           // compensated rule
  double rate_difference = 0.0;      // real_part.rate - conventional.rate
  double paired_std_dev = 0.0;       // std of the mean per-trial difference
  std::uint64_t containment_violations = 0;  // real-part detections the conventional rule missed
};

inline MetricComparison compare_metrics(const TrialPlan& plan, const Preamble& preamble,
                                        const AntennaScenario& scenario, double threshold) {
  if (plan.trials == 0) throw std::invalid_argument("compare_metrics: need at least one trial");
  detail::check_threshold(threshold, "compare_metrics");
  const unsigned workers =
      plan.workers ? plan.workers
                   : (std::thread::hardware_concurrency() ? std::thread::hardware_concurrency() : 1);
  struct Partial {
    std::uint64_t sc_hits = 0, rp_hits = 0, violations = 0;
    long long diff_sum = 0;
    std::uint64_t diff_sq = 0;
  };
  std::vector<Partial> partials(workers);
  parallel_chunks(plan.trials, [&](unsigned chunk, std::uint64_t begin, std::uint64_t end) {
    std::vector<cplx> buf(preamble.block_len());
    Partial p;
    for (std::uint64_t t = begin; t < end; ++t) {
      const auto s = detail::trial_stats(buf, preamble, scenario, 0, plan.hypothesis, plan.seed, t,
                                         plan.phase_per_sts);
      const bool sc_det = detail::detects(MetricKind::sc_abs, s, threshold);
      const bool rp_det = detail::detects(MetricKind::rp_real, s, threshold);
      if (rp_det && !sc_det) ++p.violations;
      const bool noise = plan.hypothesis == Hypothesis::noise_only;
      const int sc_hit = (noise ? sc_det : !sc_det) ? 1 : 0;
      const int rp_hit = (noise ? rp_det : !rp_det) ? 1 : 0;
      p.sc_hits += sc_hit;
      p.rp_hits += rp_hit;
      const int d = rp_hit - sc_hit;
      p.diff_sum += d;
      p.diff_sq += static_cast<std::uint64_t>(d * d);
    }
    partials[chunk] = p;
  }, workers);

  Partial total;
  for (const auto& p : partials) {
    total.sc_hits += p.sc_hits;
    total.rp_hits += p.rp_hits;
    total.violations += p.violations;
    total.diff_sum += p.diff_sum;
    total.diff_sq += p.diff_sq;
  }
  MetricComparison cmp;
  cmp.conventional = EmpiricalRate::from_counts(total.sc_hits, plan.trials);
  cmp.real_part = EmpiricalRate::from_counts(total.rp_hits, plan.trials);
  const double n = static_cast<double>(plan.trials);
  const double mean_d = static_cast<double>(total.diff_sum) / n;
  const double var_d = static_cast<double>(total.diff_sq) / n - mean_d * mean_d;
  cmp.rate_difference = mean_d;
  cmp.paired_std_dev = std::sqrt(std::max(var_d, 0.0) / n);
  cmp.containment_violations = total.violations;
  return cmp;
}

// ----------------------------------------------------------------------------
// Moment validation.
// ----------------------------------------------------------------------------

struct MomentCheck {
  double empirical = 0.0;
  double analytic = 0.0;
  double relative_error = 0.0;
};

struct MomentValidation {
  MomentCheck mean_autocorr_real, var_autocorr_real;
  MomentCheck mean_avg_power, var_avg_power;
  MomentCheck mean_compensated, var_compensated;
  MomentCheck mean_cross;            // E(a_R b)
  bool gaussian_caution = false;     // short STS: the Gaussian approximation degrades
};

/// Compares empirical first and second moments of the block statistics
/// against the closed forms, on antenna 0. Under the noise-only hypothesis
/// the analytic side uses zero signal power.
inline MomentValidation validate_moments(const Preamble& preamble, const AntennaScenario& scenario,
                                         double threshold, std::uint64_t trials,
                                         std::uint64_t seed,
                                         Hypothesis hypothesis = Hypothesis::packet_present) {
  if (trials < 10000) throw std::invalid_argument("validate_moments: need at least 10^4 trials");
  detail::check_threshold(threshold, "validate_moments");
  struct Sums {
    double a = 0, a2 = 0, b = 0, b2 = 0, r = 0, r2 = 0, ab = 0;
  };
  const unsigned workers = std::thread::hardware_concurrency() ? std::thread::hardware_concurrency() : 1;
  std::vector<Sums> partials(workers);
  parallel_chunks(trials, [&](unsigned chunk, std::uint64_t begin, std::uint64_t end) {
    std::vector<cplx> buf(preamble.block_len());
    Sums s;
    for (std::uint64_t t = begin; t < end; ++t) {
      const auto st = detail::trial_stats(buf, preamble, scenario, 0, hypothesis, seed, t, 0.0);
      const double r = st.autocorr_real - threshold * st.avg_power;
      s.a += st.autocorr_real;
      s.a2 += st.autocorr_real * st.autocorr_real;
      s.b += st.avg_power;
      s.b2 += st.avg_power * st.avg_power;
      s.r += r;
      s.r2 += r * r;
      s.ab += st.autocorr_real * st.avg_power;
    }
    partials[chunk] = s;
  }, workers);

  Sums total;
  for (const auto& s : partials) {
    total.a += s.a;
    total.a2 += s.a2;
    total.b += s.b;
    total.b2 += s.b2;
    total.r += s.r;
    total.r2 += s.r2;
    total.ab += s.ab;
  }
  const double n = static_cast<double>(trials);
  const auto mean_var = [n](double sum, double sum_sq) {
    const double mean = sum / n;
    return std::pair<double, double>{mean, sum_sq / n - mean * mean};
  };
  const auto [ma, va] = mean_var(total.a, total.a2);
  const auto [mb, vb] = mean_var(total.b, total.b2);
  const auto [mr, vr] = mean_var(total.r, total.r2);

  const double sigma2 = scenario.noise_power(0);
  const double power = hypothesis == Hypothesis::packet_present ? scenario.signal_power : 0.0;
  const auto analytic = detection_moments(power, sigma2, preamble.sts_len);
  const auto raw_r = compensated_moments_raw(power, sigma2, preamble.sts_len, threshold);
  const auto check = [](double emp, double ana) {
    const double scale = std::fabs(ana) > 0.0 ? std::fabs(ana) : 1.0;
    return MomentCheck{emp, ana, std::fabs(emp - ana) / scale};
  };
  MomentValidation v;
  v.mean_autocorr_real = check(ma, analytic.mean_autocorr_real);
  v.var_autocorr_real = check(va, analytic.var_autocorr_real);
  v.mean_avg_power = check(mb, analytic.mean_avg_power);
  v.var_avg_power = check(vb, analytic.var_avg_power);
  v.mean_compensated = check(mr, raw_r.mean);
  v.var_compensated = check(vr, raw_r.variance);
  v.mean_cross = check(total.ab / n, analytic.mean_cross);
  v.gaussian_caution = preamble.sts_len < 16;
  return v;
}

// ----------------------------------------------------------------------------
// CSV emission.
// ----------------------------------------------------------------------------

inline const char* rate_csv_header() {
  return "metric,hypothesis,eta,rho,gamma,trials,hits,rate,std";
}

inline std::string rate_csv_row(const TrialPlan& plan, std::size_t sts_len, double threshold,
                                double snr, const EmpiricalRate& rate) {
  std::string row;
  row += metric_label(plan.metric);
  row += ',';
  row += hypothesis_label(plan.hypothesis);
  row += ',';
  row += std::to_string(sts_len);
  row += ',';
  row += format_compact(threshold);
  row += ',';
  row += format_compact(snr);
  row += ',';
  row += std::to_string(plan.trials);
  row += ',';
  row += std::to_string(rate.hits);
  row += ',';
  row += format_value(rate.rate);
  row += ',';
  row += format_value(rate.std_dev);
  return row;
}

}  // namespace pdet
