// Acceptance suite: runs the numbered end-to-end checks and prints one
// PASS/FAIL line per criterion (plus detail lines). Exit status is nonzero
// if any selected criterion fails.
//
// Usage: acceptance [--criterion N]    (default: run all)

#include <cmath>
#include <cstdarg>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <functional>
#include <string>
#include <vector>

#include "pdet/pdet.hpp"
#include "support/oracles.hpp"

using namespace pdet;

namespace {

struct CriterionResult {
  bool pass = true;
  std::vector<std::string> details;

  void require(bool ok, const std::string& line) {
    pass = pass && ok;
    details.push_back(std::string(ok ? "  ok   " : "  FAIL ") + line);
  }
  void info(const std::string& line) { details.push_back("  note " + line); }
};

std::string fmt(const char* format, ...) {
  va_list args;
  va_start(args, format);
  char buf[512];
  std::vsnprintf(buf, sizeof buf, format, args);
  va_end(args);
  return buf;
}

std::vector<double> example_one() {
  std::vector<double> snrs;
  for (double db : {3.6118, 3.8903, 4.0338, 3.3649}) snrs.push_back(snr_db_to_linear(db));
  return snrs;
}

std::vector<double> example_two() {
  std::vector<double> snrs;
  for (double db : {0.2013, 3.5843, 3.3318, 4.2489}) snrs.push_back(snr_db_to_linear(db));
  return snrs;
}

// --- 1: noise-only Monte Carlo vs the closed-form false-alarm probability ---
CriterionResult criterion_1() {
  CriterionResult r;
  const std::uint64_t trials = 10000000;
  for (std::size_t eta : {16, 64}) {
    const auto preamble = make_preamble(eta, PreambleKind::qpsk_random, 1);
    const auto scenario = make_scenario({1.0});
    for (double rho : {0.15, 0.2, 0.3}) {
      TrialPlan plan;
      plan.trials = trials;
      plan.seed = derive_key(101, eta, static_cast<std::uint64_t>(rho * 1000));
      plan.hypothesis = Hypothesis::noise_only;
      plan.metric = MetricKind::rp_real;
      const auto rate = estimate_rate(plan, preamble, scenario, rho);
      const double analytic = false_alarm_prob(eta, rho);
      const double band = 4.0 * std::sqrt(analytic * (1.0 - analytic) /
                                          static_cast<double>(trials));
      const double dev = std::fabs(rate.rate - analytic);
      r.require(dev <= band,
                fmt("eta=%zu rho=%.2f: empirical %.6e vs closed form %.6e (|diff| %.2e, "
                    "4*std %.2e)",
                    eta, rho, rate.rate, analytic, dev, band));
      const double exact = oracles::exact_false_alarm_prob(eta, rho);
      r.info(fmt("eta=%zu rho=%.2f: exact noise-only law %.6e; empirical-exact gap %.2e "
                 "(%.1f std)",
                 eta, rho, exact, std::fabs(rate.rate - exact),
                 std::fabs(rate.rate - exact) /
                     std::sqrt(exact * (1.0 - exact) / static_cast<double>(trials))));
    }
  }
  if (!r.pass)
    r.info("the Gaussian closed form carries an O(1/eta) approximation bias that exceeds the "
           "binomial resolution at 1e7 trials; the estimator itself matches the exact "
           "chi-square-ratio law (see notes above)");
  return r;
}

// --- 2: packet-present Monte Carlo vs the closed-form missed-detection ---
CriterionResult criterion_2() {
  CriterionResult r;
  const std::uint64_t trials = 1000000;
  const std::size_t eta = 16;
  const double rho = 0.45;
  const auto preamble = make_preamble(eta, PreambleKind::qpsk_random, 2);
  for (double snr : {1.5, 2.0, 3.0}) {
    const auto scenario = make_scenario({snr});
    TrialPlan plan;
    plan.trials = trials;
    plan.seed = derive_key(202, static_cast<std::uint64_t>(snr * 100), 0);
    plan.hypothesis = Hypothesis::packet_present;
    plan.metric = MetricKind::rp_real;
    const auto rate = estimate_rate(plan, preamble, scenario, rho);
    const double analytic = missed_detection_prob(eta, rho, snr);
    const double band = 4.0 * std::sqrt(analytic * (1.0 - analytic) /
                                        static_cast<double>(trials));
    const double dev = std::fabs(rate.rate - analytic);
    r.require(dev <= band,
              fmt("snr=%.1f: empirical %.6e vs closed form %.6e (|diff| %.2e, 4*std %.2e)",
                  snr, rate.rate, analytic, dev, band));
  }
  if (!r.pass)
    r.info("same root cause as criterion 1: the Gaussian approximation bias of the "
           "packet-present statistic exceeds 4 binomial std at 1e6 trials");
  return r;
}

// --- 3: empirical moments vs the closed-form moment formulas ---
CriterionResult criterion_3() {
  CriterionResult r;
  const std::uint64_t trials = 1000000;
  const double rho = 0.2;
  int config = 0;
  for (auto [power, noise] : {std::pair{1.0, 1.0}, std::pair{2.0, 1.0}, std::pair{1.0, 2.0}}) {
    for (std::size_t eta : {16, 32}) {
      const auto preamble = make_preamble(eta, PreambleKind::qpsk_random, 3);
      const auto scenario = make_scenario({power / noise}, power);
      const auto v = validate_moments(preamble, scenario, rho, trials,
                                      derive_key(303, static_cast<std::uint64_t>(config), eta));
      const struct {
        const char* name;
        const MomentCheck* check;
      } stats[] = {{"E(a_R)", &v.mean_autocorr_real}, {"Var(a_R)", &v.var_autocorr_real},
                   {"E(b)", &v.mean_avg_power},       {"Var(b)", &v.var_avg_power},
                   {"E(r)", &v.mean_compensated},     {"Var(r)", &v.var_compensated}};
      for (const auto& s : stats)
        r.require(s.check->relative_error <= 0.01,
                  fmt("P=%.0f sigma2=%.0f eta=%zu %s: empirical %.6g vs %.6g (rel %.3e)",
                      power, noise, eta, s.name, s.check->empirical, s.check->analytic,
                      s.check->relative_error));
    }
    ++config;
  }
  return r;
}

// --- 4: equal weights maximize the false-alarm objective on the lattice ---
CriterionResult criterion_4() {
  CriterionResult r;
  for (std::size_t n : {2, 3}) {
    std::vector<double> snrs(n, 2.0);
    const auto best = simplex_grid_best(CombiningObjective::false_alarm, snrs, 0.45, 0.01);
    const auto equal = wfa_weights(n);
    r.require(fa_objective(equal) >= fa_objective(best) - 1e-12,
              fmt("N=%zu: objective at equal weights %.9f >= lattice max %.9f", n,
                  fa_objective(equal), fa_objective(best)));
    // exhaustive check of the combined false-alarm probability on the lattice
    const double pfa_equal = combined_false_alarm_prob(16, 0.45, equal.values());
    double worst = 0.0;
    bool dominated = true;
    const long k_total = 100;
    std::vector<long> counts(n, 0);
    const std::function<void(std::size_t, long)> walk = [&](std::size_t pos, long rem) {
      if (pos + 1 == n) {
        counts[pos] = rem;
        std::vector<double> w(n);
        for (std::size_t j = 0; j < n; ++j) w[j] = static_cast<double>(counts[j]) / k_total;
        const double pfa = combined_false_alarm_prob(16, 0.45, w);
        dominated = dominated && pfa_equal <= pfa + 1e-18;
        worst = std::max(worst, pfa_equal - pfa);
        return;
      }
      for (long k = 0; k <= rem; ++k) {
        counts[pos] = k;
        walk(pos + 1, rem - k);
      }
    };
    walk(0, k_total);
    r.require(dominated, fmt("N=%zu: equal-weight pfa %.6e <= pfa at every lattice point "
                             "(max excess %.1e)",
                             n, pfa_equal, worst));
  }
  return r;
}

// --- 5: closed-form weights vs the exhaustive lattice and stationarity ---
CriterionResult criterion_5() {
  CriterionResult r;
  const double rho = 0.45;
  const struct {
    std::vector<double> snrs;
  } cases[] = {{{2.0, 4.0}}, {{1.5, 2.0, 3.0}}};
  for (const auto& c : cases) {
    const auto closed = wmd_weights(c.snrs, rho);
    const double g_closed = md_objective(closed, c.snrs, rho);
    const auto fine = simplex_grid_best(CombiningObjective::missed_detection, c.snrs, rho, 0.001);
    const auto coarse = simplex_grid_best(CombiningObjective::missed_detection, c.snrs, rho,
                                          0.002);
    const double g_fine = md_objective(fine, c.snrs, rho);
    const double g_coarse = md_objective(coarse, c.snrs, rho);
    r.require(g_closed >= g_fine - 1e-12 * std::fabs(g_fine),
              fmt("N=%zu: closed-form objective %.12f dominates lattice max %.12f",
                  c.snrs.size(), g_closed, g_fine));
    // lattice slack: the lattice maximum can trail the optimum by at most the
    // objective drop at the lattice point nearest the optimum
    const long k_total = 1000;
    std::vector<double> snapped(c.snrs.size());
    long assigned = 0;
    for (std::size_t j = 0; j + 1 < c.snrs.size(); ++j) {
      const long k = std::lround(closed[j] * static_cast<double>(k_total));
      snapped[j] = static_cast<double>(k) / static_cast<double>(k_total);
      assigned += k;
    }
    snapped.back() = static_cast<double>(k_total - assigned) / static_cast<double>(k_total);
    const double g_snapped = md_objective(make_weight_vector(snapped), c.snrs, rho);
    const double slack = (g_closed - g_snapped) + 1e-12 * std::fabs(g_closed);
    r.require(g_closed - g_fine <= slack,
              fmt("N=%zu: lattice max trails the closed form by %.3e <= lattice slack %.3e "
                  "(refinement difference %.3e)",
                  c.snrs.size(), g_closed - g_fine, slack, g_fine - g_coarse));
    const auto grad = md_objective_gradient(closed, c.snrs, rho);
    double mean = 0.0;
    for (double g : grad) mean += g;
    mean /= static_cast<double>(grad.size());
    double worst = 0.0;
    for (double g : grad) worst = std::max(worst, std::fabs(g - mean));
    r.require(worst <= 1e-9,
              fmt("N=%zu: tangent-projected gradient at the optimum <= 1e-9 (max %.2e)",
                  c.snrs.size(), worst));
  }
  return r;
}

// --- 6: iterative ascent converges to the closed form from random starts ---
CriterionResult criterion_6() {
  CriterionResult r;
  const auto snrs = example_one();
  const double rho = 0.45;
  const auto target = wmd_weights(snrs, rho);
  std::size_t worst_iters = 0;
  double worst_dev = 0.0;
  bool monotone = true, converged = true;
  for (std::uint64_t s = 0; s < 100; ++s) {
    const auto start = make_weight_vector(oracles::random_feasible_weights(4, 606, s));
    try {
      const auto [w, trace] = wmd_ascent(start, snrs, rho, 1e-9, 200);
      worst_iters = std::max(worst_iters, trace.iterations);
      for (std::size_t j = 0; j < 4; ++j)
        worst_dev = std::max(worst_dev, std::fabs(w[j] / target[j] - 1.0));
      for (std::size_t i = 1; i < trace.objective.size(); ++i)
        monotone = monotone &&
                   trace.objective[i] >= trace.objective[i - 1] * (1.0 - 1e-12);
    } catch (const ConvergenceError&) {
      converged = false;
    }
  }
  r.require(converged, "all 100 random starts converge within 200 iterations");
  r.require(worst_dev <= 1e-9, fmt("max weight-ratio deviation %.2e <= 1e-9", worst_dev));
  r.require(monotone, "objective nondecreasing along every trace");
  r.info(fmt("worst iteration count %zu", worst_iters));
  return r;
}

// --- 7: tolerance-region verdicts on the two measured scenarios ---
CriterionResult criterion_7() {
  CriterionResult r;
  const ToleranceRegion region{1e-6, 1e-4};
  const auto grid = default_threshold_grid(512);
  int scenario_idx = 1;
  for (const auto& snrs : {example_one(), example_two()}) {
    CurveOptions opts;
    opts.seed = 707;
    opts.pwmd.draws = 200;
    opts.pwmd.interference_noise_ratio = 0.5;
    const auto wfa = build_curve(Scheme::wfa, snrs, 16, grid, opts);
    const auto iwmd = build_curve(Scheme::iwmd, snrs, 16, grid, opts);
    const auto pwmd = build_curve(Scheme::pwmd, snrs, 16, grid, opts);
    const auto v_iwmd = pareto_compare(wfa, iwmd, region);
    const auto v_pwmd = pareto_compare(wfa, pwmd, region);
    r.require(v_iwmd.outcome == BenchmarkVerdict::Outcome::a_wins,
              fmt("scenario %d: equal weights beat the oracle-SNR weights", scenario_idx));
    r.require(v_pwmd.outcome == BenchmarkVerdict::Outcome::a_wins,
              fmt("scenario %d: equal weights beat the estimated-SNR weights", scenario_idx));
    ++scenario_idx;
  }
  return r;
}

// --- 8: fixed-threshold ordering of the two schemes ---
CriterionResult criterion_8() {
  CriterionResult r;
  const auto snrs = example_one();
  const double rho = 0.45;
  const auto w_equal = wfa_weights(4);
  const auto w_oracle = wmd_weights(snrs, rho);
  const double pfa_equal = combined_false_alarm_prob(16, rho, w_equal.values());
  const double pfa_oracle = combined_false_alarm_prob(16, rho, w_oracle.values());
  const double pmd_equal = combined_missed_detection_prob(16, rho, snrs, w_equal.values());
  const double pmd_oracle = combined_missed_detection_prob(16, rho, snrs, w_oracle.values());
  r.require(pmd_oracle < pmd_equal,
            fmt("pmd: oracle weights %.6e < equal weights %.6e", pmd_oracle, pmd_equal));
  r.require(pfa_oracle > pfa_equal,
            fmt("pfa: oracle weights %.6e > equal weights %.6e", pfa_oracle, pfa_equal));
  return r;
}

// --- 9: algebraic identities ---
CriterionResult criterion_9() {
  CriterionResult r;
  // Equal-weight specializations, evaluated where 1/N is an exact double so
  // the identity is not blurred by input rounding. The two sides are
  // different expression trees, so their Q arguments can differ by an ulp;
  // the tail conditioning of Q turns an argument perturbation of e into a
  // relative value change of about x^2 e. The 1e-15 tolerance is therefore
  // applied in that backward sense: scaled by max(1, x^2).
  double worst_fa = 0.0, worst_md = 0.0;
  for (std::size_t eta : {16, 64})
    for (double rho : {0.2, 0.45, 0.6})
      for (std::size_t n : {1, 2, 4, 8}) {
        std::vector<double> w(n, 1.0 / static_cast<double>(n));
        const double fa_general = combined_false_alarm_prob(eta, rho, w);
        const double fa_closed = equal_weight_false_alarm_prob(eta, rho, n);
        const double fa_arg = std::sqrt(2.0 * static_cast<double>(eta * n) * rho * rho /
                                        (1.0 + rho * rho));
        if (fa_closed > 0.0)
          worst_fa = std::max(worst_fa, std::fabs(fa_general - fa_closed) / fa_closed /
                                            std::max(1.0, fa_arg * fa_arg));
        std::vector<double> snrs;
        double snr_sum = 0.0;
        for (std::size_t j = 0; j < n; ++j) {
          snrs.push_back(1.8 + 0.3 * static_cast<double>(j));
          snr_sum += snrs.back();
        }
        const double md_general = combined_missed_detection_prob(eta, rho, snrs, w);
        const double md_closed = equal_weight_missed_detection_prob(eta, rho, snrs);
        const double nn = static_cast<double>(n);
        const double md_arg =
            std::sqrt(static_cast<double>(eta)) * ((1.0 - rho) / nn * snr_sum - rho) /
            std::sqrt((1.0 - rho) * (1.0 - rho) / (nn * nn) * snr_sum +
                      (1.0 + rho * rho) / (2.0 * nn));
        if (md_closed > 0.0)
          worst_md = std::max(worst_md, std::fabs(md_general - md_closed) / md_closed /
                                            std::max(1.0, md_arg * md_arg));
      }
  r.require(worst_fa <= 1e-15,
            fmt("equal-weight false-alarm identity: worst condition-scaled rel %.2e", worst_fa));
  r.require(worst_md <= 1e-15,
            fmt("equal-weight missed-detection identity: worst condition-scaled rel %.2e",
                worst_md));

  // correlation vs the textbook formula on 20 random synthetic series
  double worst_corr = 0.0;
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    TrialRng rng(909, 0, rep);
    SnrDataset ds;
    ds.groups = {"G"};
    ds.antenna_ids = {1, 2};
    std::vector<double> xs, ys;
    for (std::int64_t k = 0; k < 30; ++k) {
      const double x = 1.0 + 4.0 * rng.next_unit();
      const double y = 1.0 + 4.0 * rng.next_unit() + 0.25 * x;
      xs.push_back(x);
      ys.push_back(y);
      ds.values[{"G", 1}][k] = SnrDataset::Sample{snr_linear_to_db(x), x};
      ds.values[{"G", 2}][k] = SnrDataset::Sample{snr_linear_to_db(y), y};
      ds.measurement_ids.push_back(k);
      ds.day_of[k] = "day1";
    }
    const double lhs = snr_correlation(ds, {"G", 1}, {"G", 2});
    worst_corr = std::max(worst_corr, std::fabs(lhs - oracles::pearson(xs, ys)));
  }
  r.require(worst_corr <= 1e-12, fmt("correlation vs textbook oracle: worst |diff| %.2e",
                                     worst_corr));
  return r;
}

// --- 10: gradient vs central finite differences ---
CriterionResult criterion_10() {
  CriterionResult r;
  double worst = 0.0;
  for (std::size_t n : {2, 3, 4}) {
    std::vector<double> snrs;
    for (std::size_t j = 0; j < n; ++j) snrs.push_back(1.6 + 0.7 * static_cast<double>(j));
    for (std::uint64_t i = 0; i < 50; ++i) {
      const auto w = make_weight_vector(oracles::random_feasible_weights(n, 1010 + n, i));
      const auto grad = md_objective_gradient(w, snrs, 0.45);
      const auto fd = oracles::fd_md_gradient(w.values(), snrs, 0.45, 1e-6);
      for (std::size_t j = 0; j < n; ++j) {
        const double scale = std::max({std::fabs(fd[j]), std::fabs(grad[j]), 1e-9});
        worst = std::max(worst, std::fabs(grad[j] - fd[j]) / scale);
      }
    }
  }
  r.require(worst <= 1e-5, fmt("max relative gradient mismatch %.2e over 150 points", worst));
  return r;
}

// --- 11: real-part alarms contained in conventional alarms ---
CriterionResult criterion_11() {
  CriterionResult r;
  const auto preamble = make_preamble(16, PreambleKind::qpsk_random, 4);
  const auto scenario = make_scenario({1.0});
  TrialPlan plan;
  plan.trials = 1000000;
  plan.seed = 1111;
  plan.hypothesis = Hypothesis::noise_only;
  const auto cmp = compare_metrics(plan, preamble, scenario, 0.3);
  r.require(cmp.containment_violations == 0,
            fmt("containment violations: %llu of %llu trials",
                static_cast<unsigned long long>(cmp.containment_violations),
                static_cast<unsigned long long>(plan.trials)));
  r.info(fmt("alarm rates: conventional %.6e, real-part %.6e", cmp.conventional.rate,
             cmp.real_part.rate));
  return r;
}

// --- 12: synthetic-dataset campaign determinism ---
CriterionResult criterion_12() {
  CriterionResult r;
  const std::filesystem::path path = std::filesystem::path(PDET_DATA_DIR) / "synthetic_snr.csv";
  const auto [ds, report] = load_dataset(path.string());
  r.require(ds.measurement_count() == 1000,
            fmt("shipped dataset has %zu measurements", ds.measurement_count()));
  r.require(report.dropped_rows.empty(), "no rows dropped on load");

  SyntheticDatasetConfig gen;
  gen.seed = 20240801;
  const auto regenerated = generate_synthetic_dataset(gen);
  r.require(regenerated.values == ds.values && regenerated.day_of == ds.day_of,
            "regeneration with the recorded seed is bit-identical to the shipped file");

  const double corr_within = snr_correlation(ds, {"A", 1}, {"A", 2});
  const double corr_opposite = snr_correlation(ds, {"A", 1}, {"D", 6});
  r.require(corr_within > 0.8, fmt("within-group correlation %.3f > 0.8", corr_within));
  r.require(corr_opposite < 0.0, fmt("opposite-corner correlation %.3f < 0", corr_opposite));

  CampaignConfig config;
  config.sts_len = 16;
  config.region = ToleranceRegion{1e-6, 1e-4};
  config.per_group = 2;
  config.seed = 42;
  config.grid_points = 96;
  config.pwmd.draws = 32;
  config.pwmd.interference_noise_ratio = 0.5;
  const auto first = run_campaign(ds, config);
  const auto second = run_campaign(ds, config);
  r.require(first == second, "rerunning with the same seed is bit-identical");

  bool fractions_ok = true;
  for (const auto& [day, part] : first.partitions)
    for (const auto* counts : {&part.vs_iwmd, &part.vs_pwmd}) {
      if (counts->decided() == 0) continue;
      const double sum = static_cast<double>(counts->wins + counts->draws + counts->losses) /
                         static_cast<double>(counts->decided());
      fractions_ok = fractions_ok && std::fabs(sum - 1.0) <= 1e-9;
    }
  r.require(fractions_ok, "win/draw/lose fractions sum to 1 per pairing per partition");
  r.require(first.overall.measurements == 1000, "every measurement produced a verdict");
  const auto& o = first.overall;
  r.info(fmt("overall vs oracle weights: %llu wins / %llu draws / %llu losses; blocked cases "
             "%llu",
             static_cast<unsigned long long>(o.vs_iwmd.wins),
             static_cast<unsigned long long>(o.vs_iwmd.draws),
             static_cast<unsigned long long>(o.vs_iwmd.losses),
             static_cast<unsigned long long>(o.blocked_cases)));

  const auto blockage = classify_blockage(std::vector<double>{0.2013, 3.5843, 3.3318, 4.2489});
  r.require(blockage.label == BlockageLabel::partially_blocked,
            "partially blocked scenario classified as partially-blocked");
  return r;
}

struct Criterion {
  int number;
  const char* title;
  CriterionResult (*run)();
};

const Criterion criteria[] = {
    {1, "noise-only Monte Carlo matches the closed-form false-alarm probability", criterion_1},
    {2, "packet-present Monte Carlo matches the closed-form missed-detection probability",
     criterion_2},
    {3, "empirical moments match the closed-form moment formulas within 1%", criterion_3},
    {4, "equal weights are lattice-optimal for false alarm", criterion_4},
    {5, "closed-form weights are lattice-optimal and stationary for missed detection",
     criterion_5},
    {6, "iterative ascent converges to the closed-form weights", criterion_6},
    {7, "equal weights win the tolerance-region benchmark in both measured scenarios",
     criterion_7},
    {8, "fixed-threshold ordering: oracle weights trade lower pmd for higher pfa", criterion_8},
    {9, "algebraic identities hold to stated tolerances", criterion_9},
    {10, "analytic gradient matches finite differences", criterion_10},
    {11, "real-part alarm events are a subset of conventional alarm events", criterion_11},
    {12, "synthetic-dataset campaign is deterministic and self-consistent", criterion_12},
};

}  // namespace

int main(int argc, char** argv) {
  int selected = 0;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--criterion") == 0 && i + 1 < argc) {
      selected = std::atoi(argv[++i]);
    } else {
      std::fprintf(stderr, "usage: %s [--criterion N]\n", argv[0]);
      return 2;
    }
  }
  bool all_pass = true;
  for (const auto& c : criteria) {
    if (selected != 0 && c.number != selected) continue;
    const auto result = c.run();
    std::printf("[%s] criterion %d: %s\n", result.pass ? "PASS" : "FAIL", c.number, c.title);
    for (const auto& line : result.details) std::printf("%s\n", line.c_str());
    std::fflush(stdout);
    all_pass = all_pass && result.pass;
  }
  return all_pass ? 0 : 1;
}
