#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "pdet/qfunc.hpp"
#include "pdet/signal_model.hpp"
#include "pdet/simplex.hpp"

namespace pdet {

// ============================================================================
// Closed-form moments and error probabilities of the compensated
// autocorrelation under the Gaussian approximation, for single antennas
// and for weighted multi-antenna combining. All SNRs here are linear power
// ratios; dB conversion happens once, at ingestion, through the helpers
// below.
// ============================================================================

inline double snr_db_to_linear(double db) { return std::pow(10.0, db / 10.0); }
inline double snr_linear_to_db(double linear) { return 10.0 * std::log10(linear); }

/// SNR floor below which an antenna cannot contribute a positive mean to the
/// detection statistic: (1 - t) * snr - t > 0 requires snr > t / (1 - t).
inline double min_usable_snr(double threshold) { return threshold / (1.0 - threshold); }

namespace detail {

inline void check_threshold(double threshold, const char* who) {
  if (!(threshold > 0.0 && threshold < 1.0))
    throw std::invalid_argument(std::string(who) + ": threshold must lie in (0, 1)");
}

inline void check_sts_len(std::size_t sts_len, const char* who) {
  if (sts_len == 0) throw std::invalid_argument(std::string(who) + ": sts_len must be positive");
}

}  // namespace detail

// ----------------------------------------------------------------------------
// Raw (unnormalized) moments of the block statistics for signal power P and
// noise power sigma^2.
// ----------------------------------------------------------------------------

struct DetectionMoments {
  double mean_avg_power = 0.0;      // E(b) = P + sigma^2
  double var_avg_power = 0.0;       // Var(b) = (2 P sigma^2 + sigma^4) / (2 eta)
  double mean_autocorr_real = 0.0;  // E(a_R) = P
  double var_autocorr_real = 0.0;   // Var(a_R) = (2 P sigma^2 + sigma^4) / (2 eta)
  double mean_cross = 0.0;          // E(a_R b) = P^2 + P sigma^2 / eta + P sigma^2
};

inline DetectionMoments detection_moments(double signal_power, double noise_power,
                                          std::size_t sts_len) {
  detail::check_sts_len(sts_len, "detection_moments");
  if (!(signal_power >= 0.0)) throw std::invalid_argument("detection_moments: negative power");
  if (!(noise_power > 0.0)) throw std::invalid_argument("detection_moments: noise power must be positive");
  const double eta = static_cast<double>(sts_len);
  const double p = signal_power, s2 = noise_power;
  DetectionMoments m;
  m.mean_avg_power = p + s2;
  m.var_avg_power = (2.0 * p * s2 + s2 * s2) / (2.0 * eta);
  m.mean_autocorr_real = p;
  m.var_autocorr_real = m.var_avg_power;
  m.mean_cross = p * p + p * s2 / eta + p * s2;
  return m;
}

struct RawCompensatedMoments {
  double mean = 0.0;      // (1 - t) P - t sigma^2
  double variance = 0.0;  // (1 - t)^2 P sigma^2 / eta + (1 + t^2) sigma^4 / (2 eta)
};

inline RawCompensatedMoments compensated_moments_raw(double signal_power, double noise_power,
                                                     std::size_t sts_len, double threshold) {
  detail::check_sts_len(sts_len, "compensated_moments_raw");
  detail::check_threshold(threshold, "compensated_moments_raw");
  const double eta = static_cast<double>(sts_len);
  const double p = signal_power, s2 = noise_power, t = threshold;
  return {(1.0 - t) * p - t * s2,
          (1.0 - t) * (1.0 - t) * p * s2 / eta + (1.0 + t * t) * s2 * s2 / (2.0 * eta)};
}

// ----------------------------------------------------------------------------
// SNR-normalized statistic (the raw compensated autocorrelation divided by
// the noise power).
// ----------------------------------------------------------------------------

struct CompensatedStats {
  double mean = 0.0;
  double variance = 0.0;
  Hypothesis hypothesis = Hypothesis::noise_only;
};

inline CompensatedStats compensated_stats(std::size_t sts_len, double threshold, double snr,
                                          Hypothesis hypothesis) {
  detail::check_sts_len(sts_len, "compensated_stats");
  detail::check_threshold(threshold, "compensated_stats");
  const bool noise_only = hypothesis == Hypothesis::noise_only;
  if (noise_only && snr != 0.0)
    throw std::invalid_argument("compensated_stats: noise-only requires snr == 0");
  if (!noise_only && !(snr > 0.0))
    throw std::invalid_argument("compensated_stats: packet-present requires snr > 0");
  const double eta = static_cast<double>(sts_len);
  const double t = threshold;
  CompensatedStats st;
  st.hypothesis = hypothesis;
  st.mean = (1.0 - t) * snr - t;
  st.variance = (1.0 - t) * (1.0 - t) * snr / eta + (1.0 + t * t) / (2.0 * eta);
  return st;
}

// ----------------------------------------------------------------------------
// Error probabilities.
// ----------------------------------------------------------------------------

struct OperatingPoint {
  double threshold = 0.0;
  double pfa = 0.0;
  double pmd = 0.0;
};

inline double false_alarm_prob(std::size_t sts_len, double threshold) {
  detail::check_sts_len(sts_len, "false_alarm_prob");
  detail::check_threshold(threshold, "false_alarm_prob");
  const double eta = static_cast<double>(sts_len);
  const double t = threshold;
  return q_function(std::sqrt(2.0 * eta * t * t / (1.0 + t * t)));
}

inline double missed_detection_prob(std::size_t sts_len, double threshold, double snr) {
  detail::check_sts_len(sts_len, "missed_detection_prob");
  detail::check_threshold(threshold, "missed_detection_prob");
  if (!(snr > 0.0)) throw std::invalid_argument("missed_detection_prob: snr must be positive");
  const double eta = static_cast<double>(sts_len);
  const double t = threshold;
  const double num = (1.0 - t) * snr - t;
  const double den = std::sqrt((1.0 - t) * (1.0 - t) * snr + (1.0 + t * t) / 2.0);
  return q_function(std::sqrt(eta) * num / den);
}

/// Multi-antenna false-alarm probability of the weighted combination.
/// Scale-invariant in the weights: any positive rescaling gives the same
/// value, so unnormalized weights are accepted.
inline double combined_false_alarm_prob(std::size_t sts_len, double threshold,
                                        std::span<const double> weights) {
  detail::check_sts_len(sts_len, "combined_false_alarm_prob");
  detail::check_threshold(threshold, "combined_false_alarm_prob");
  double sum = 0.0, sum_sq = 0.0;
  for (double w : weights) {
    if (!(w >= 0.0)) throw std::invalid_argument("combined_false_alarm_prob: negative weight");
    sum += w;
    sum_sq += w * w;
  }
  if (sum_sq <= 0.0) throw std::invalid_argument("combined_false_alarm_prob: all-zero weights");
  const double eta = static_cast<double>(sts_len);
  const double t = threshold;
  return q_function(std::sqrt(2.0 * eta / (1.0 + t * t)) * t * sum / std::sqrt(sum_sq));
}

inline double combined_missed_detection_prob(std::size_t sts_len, double threshold,
                                             std::span<const double> snrs,
                                             std::span<const double> weights) {
  detail::check_sts_len(sts_len, "combined_missed_detection_prob");
  detail::check_threshold(threshold, "combined_missed_detection_prob");
  if (snrs.size() != weights.size())
    throw std::invalid_argument("combined_missed_detection_prob: length mismatch");
  const double t = threshold;
  const double half = (1.0 + t * t) / 2.0;
  double num = 0.0, var = 0.0;
  for (std::size_t j = 0; j < weights.size(); ++j) {
    const double w = weights[j];
    if (!(w >= 0.0)) throw std::invalid_argument("combined_missed_detection_prob: negative weight");
    num += w * ((1.0 - t) * snrs[j] - t);
    var += w * w * ((1.0 - t) * (1.0 - t) * snrs[j] + half);
  }
  if (var <= 0.0) throw std::invalid_argument("combined_missed_detection_prob: all-zero weights");
  return q_function(std::sqrt(static_cast<double>(sts_len)) * num / std::sqrt(var));
}

/// Equal-weight closed forms. Algebraically identical to the combined
/// formulas evaluated at w_j = 1/N; kept as separate expressions so the
/// identity can be checked.
inline double equal_weight_false_alarm_prob(std::size_t sts_len, double threshold,
                                            std::size_t n_antennas) {
  detail::check_sts_len(sts_len, "equal_weight_false_alarm_prob");
  detail::check_threshold(threshold, "equal_weight_false_alarm_prob");
  if (n_antennas == 0) throw std::invalid_argument("equal_weight_false_alarm_prob: no antennas");
  const double eta = static_cast<double>(sts_len);
  const double n = static_cast<double>(n_antennas);
  const double t = threshold;
  return q_function(std::sqrt(2.0 * eta * n * t * t / (1.0 + t * t)));
}

inline double equal_weight_missed_detection_prob(std::size_t sts_len, double threshold,
                                                 std::span<const double> snrs) {
  detail::check_sts_len(sts_len, "equal_weight_missed_detection_prob");
  detail::check_threshold(threshold, "equal_weight_missed_detection_prob");
  if (snrs.empty()) throw std::invalid_argument("equal_weight_missed_detection_prob: no antennas");
  const double eta = static_cast<double>(sts_len);
  const double n = static_cast<double>(snrs.size());
  const double t = threshold;
  double snr_sum = 0.0;
  for (double g : snrs) snr_sum += g;
  const double num = (1.0 - t) / n * snr_sum - t;
  const double den = std::sqrt((1.0 - t) * (1.0 - t) / (n * n) * snr_sum + (1.0 + t * t) / (2.0 * n));
  return q_function(std::sqrt(eta) * num / den);
}

// ----------------------------------------------------------------------------
// Combining objectives. Maximizing fa_objective over the simplex minimizes
// the combined false-alarm probability; maximizing md_objective minimizes
// the combined missed-detection probability. Both feed Q through a monotone
// argument, and md_objective requires every SNR above min_usable_snr so its
// numerator stays positive.
// ----------------------------------------------------------------------------

inline double fa_objective(const WeightVector& weights) {
  if (!weights.feasible()) throw std::invalid_argument("fa_objective: infeasible weights");
  double sum_sq = 0.0;
  for (double w : weights.w) sum_sq += w * w;
  return 1.0 / sum_sq;
}

namespace detail {

inline void check_md_constraint(std::span<const double> snrs, double threshold, const char* who) {
  const double bound = min_usable_snr(threshold);
  for (double g : snrs)
    if (!(g > bound))
      throw std::domain_error(std::string(who) + ": antenna SNR at or below the usable floor");
}

}  // namespace detail

inline double md_objective(const WeightVector& weights, std::span<const double> snrs,
                           double threshold) {
  detail::check_threshold(threshold, "md_objective");
  if (!weights.feasible()) throw std::invalid_argument("md_objective: infeasible weights");
  if (weights.size() != snrs.size()) throw std::invalid_argument("md_objective: length mismatch");
  detail::check_md_constraint(snrs, threshold, "md_objective");
  const double t = threshold;
  const double half = (1.0 + t * t) / 2.0;
  double num = 0.0, den = 0.0;
  for (std::size_t j = 0; j < snrs.size(); ++j) {
    num += weights[j] * ((1.0 - t) * snrs[j] - t);
    den += weights[j] * weights[j] * ((1.0 - t) * (1.0 - t) * snrs[j] + half);
  }
  return num * num / den;
}

/// Per-coordinate derivative of md_objective, factored as
/// numerator(j) = termA * termB(j) over a common positive denominator.
/// termA is shared; termB(j) vanishes at the optimal weights.
inline std::vector<double> md_objective_gradient(const WeightVector& weights,
                                                 std::span<const double> snrs, double threshold) {
  detail::check_threshold(threshold, "md_objective_gradient");
  if (!weights.feasible()) throw std::invalid_argument("md_objective_gradient: infeasible weights");
  if (weights.size() != snrs.size())
    throw std::invalid_argument("md_objective_gradient: length mismatch");
  detail::check_md_constraint(snrs, threshold, "md_objective_gradient");
  const double t = threshold;
  const double half = (1.0 + t * t) / 2.0;
  const std::size_t n = snrs.size();
  std::vector<double> mean_term(n), var_term(n);
  double sum_mean = 0.0, sum_var = 0.0;
  for (std::size_t j = 0; j < n; ++j) {
    mean_term[j] = (1.0 - t) * snrs[j] - t;
    var_term[j] = (1.0 - t) * (1.0 - t) * snrs[j] + half;
    sum_mean += weights[j] * mean_term[j];
    sum_var += weights[j] * weights[j] * var_term[j];
  }
  const double term_a = 2.0 * sum_mean;
  const double denom = sum_var * sum_var;
  std::vector<double> grad(n);
  for (std::size_t j = 0; j < n; ++j) {
    const double wj = weights[j];
    const double others_var = sum_var - wj * wj * var_term[j];
    const double others_mean = sum_mean - wj * mean_term[j];
    const double term_b = mean_term[j] * others_var - wj * var_term[j] * others_mean;
    grad[j] = term_a * term_b / denom;
  }
  return grad;
}

}  // namespace pdet
