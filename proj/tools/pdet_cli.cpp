// Command-line front end: closed-form evaluation, Monte Carlo runs, MD-FA
// curve generation with Pareto verdicts, dataset campaigns, and synthetic
// dataset generation.
//
// Exit codes: 0 success, 2 usage error, 3 data error, 4 numerical or
// convergence error.

#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"
#include "pdet/pdet.hpp"

namespace fs = std::filesystem;
using nlohmann::ordered_json;

namespace {

constexpr int exit_ok = 0;
constexpr int exit_usage = 2;
constexpr int exit_data = 3;
constexpr int exit_numeric = 4;

struct UsageError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

std::vector<double> parse_list(const std::string& text, const char* flag) {
  std::vector<double> values;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    try {
      std::size_t pos = 0;
      values.push_back(std::stod(item, &pos));
      if (pos != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw UsageError(std::string(flag) + ": cannot parse '" + item + "' as a number");
    }
  }
  if (values.empty()) throw UsageError(std::string(flag) + ": empty list");
  return values;
}

struct ThresholdSpec {
  std::vector<double> grid;
};

ThresholdSpec parse_thresholds(const std::string& rho, const std::string& rho_range) {
  if (!rho.empty() && !rho_range.empty())
    throw UsageError("--rho and --rho-range are mutually exclusive");
  ThresholdSpec spec;
  if (!rho_range.empty()) {
    double lo = 0, hi = 0;
    long count = 0;
    char sep1 = 0, sep2 = 0;
    std::stringstream ss(rho_range);
    if (!(ss >> lo >> sep1 >> hi >> sep2 >> count) || sep1 != ':' || sep2 != ':' || count < 2)
      throw UsageError("--rho-range: expected lo:hi:count with count >= 2");
    if (!(lo > 0.0 && hi < 1.0 && lo < hi))
      throw UsageError("--rho-range: need 0 < lo < hi < 1");
    for (long i = 0; i < count; ++i)
      spec.grid.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(count - 1));
  } else {
    const std::string text = rho.empty() ? "0.45" : rho;
    double value = 0;
    try {
      value = std::stod(text);
    } catch (const std::exception&) {
      throw UsageError("--rho: cannot parse '" + text + "'");
    }
    if (!(value > 0.0 && value < 1.0)) throw UsageError("--rho: need a value inside (0, 1)");
    spec.grid.push_back(value);
  }
  return spec;
}

/// SNRs arrive in dB or linear; the conversion happens once, here.
std::vector<double> resolve_snrs(const std::string& snr_db, const std::string& snr_linear) {
  if (!snr_db.empty() && !snr_linear.empty())
    throw UsageError("--snr-db and --snr are mutually exclusive");
  std::vector<double> snrs;
  if (!snr_db.empty())
    for (double db : parse_list(snr_db, "--snr-db")) snrs.push_back(pdet::snr_db_to_linear(db));
  if (!snr_linear.empty()) {
    snrs = parse_list(snr_linear, "--snr");
    for (double g : snrs)
      if (!(g > 0.0)) throw UsageError("--snr: SNRs must be positive");
  }
  return snrs;
}

struct OutputSink {
  std::optional<fs::path> dir;
  std::vector<std::string> written;

  std::ofstream open(const std::string& name) {
    std::ofstream out(*dir / name);
    if (!out) throw pdet::DataError("cannot write " + (*dir / name).string());
    written.push_back(name);
    return out;
  }
};

void write_manifest(OutputSink& sink, const std::vector<std::string>& argv_copy,
                    std::uint64_t seed) {
  if (!sink.dir) return;
  ordered_json manifest;
  std::string cmd;
  for (const auto& a : argv_copy) {
    if (!cmd.empty()) cmd += ' ';
    cmd += a;
  }
  manifest["command"] = cmd;
  manifest["seed"] = seed;
  manifest["version"] = pdet::version;
  manifest["outputs"] = sink.written;
  std::ofstream out(*sink.dir / "manifest.json");
  out << manifest.dump(2) << '\n';
}

// ----------------------------------------------------------------------------
// analytic
// ----------------------------------------------------------------------------

struct AnalyticArgs {
  std::size_t eta = 16;
  std::string rho, rho_range, snr_db, snr, weights, scheme;
};

int run_analytic(const AnalyticArgs& args, OutputSink& sink) {
  if (!args.weights.empty() && !args.scheme.empty())
    throw UsageError("--weights and --scheme are mutually exclusive");
  const auto thresholds = parse_thresholds(args.rho, args.rho_range);
  const auto snrs = resolve_snrs(args.snr_db, args.snr);

  std::ostringstream csv;
  csv << "eta,rho,scheme,pfa,pmd\n";
  for (double t : thresholds.grid) {
    double pfa = 0.0, pmd = std::numeric_limits<double>::quiet_NaN();
    std::string label;
    if (!args.weights.empty()) {
      const auto w = parse_list(args.weights, "--weights");
      if (snrs.empty()) throw UsageError("--weights requires --snr or --snr-db");
      if (w.size() != snrs.size()) throw UsageError("--weights: length must match the SNR list");
      pfa = pdet::combined_false_alarm_prob(args.eta, t, w);
      pmd = pdet::combined_missed_detection_prob(args.eta, t, snrs, w);
      label = "custom";
    } else if (snrs.empty()) {
      pfa = pdet::false_alarm_prob(args.eta, t);
      label = "single";
    } else if (args.scheme.empty() || args.scheme == "single") {
      if (snrs.size() != 1) throw UsageError("scheme 'single' takes exactly one SNR");
      pfa = pdet::false_alarm_prob(args.eta, t);
      pmd = pdet::missed_detection_prob(args.eta, t, snrs[0]);
      label = "single";
    } else if (args.scheme == "wfa") {
      pfa = pdet::equal_weight_false_alarm_prob(args.eta, t, snrs.size());
      pmd = pdet::equal_weight_missed_detection_prob(args.eta, t, snrs);
      label = "WFA";
    } else if (args.scheme == "iwmd") {
      const auto w = pdet::wmd_weights_filtered(snrs, t);
      pfa = pdet::combined_false_alarm_prob(args.eta, t, w.values());
      pmd = pdet::combined_missed_detection_prob(args.eta, t, snrs, w.values());
      label = "I-WMD";
    } else {
      throw UsageError("--scheme: expected wfa, iwmd, or single");
    }
    csv << args.eta << ',' << pdet::format_compact(t) << ',' << label << ','
        << pdet::format_value(pfa) << ',' << pdet::format_value(pmd) << '\n';
  }
  if (sink.dir) {
    sink.open("analytic.csv") << csv.str();
  } else {
    std::cout << csv.str();
  }
  return exit_ok;
}

// ----------------------------------------------------------------------------
// simulate
// ----------------------------------------------------------------------------

struct SimulateArgs {
  double trials = 100000;
  std::size_t eta = 16;
  std::string rho = "0.45";
  std::string metric = "rp-real";
  std::string hypothesis = "noise";
  std::string snr_db, snr, weights;
  std::string preamble = "qpsk-random";
  double phase_per_sts = 0.0;
};

int run_simulate(const SimulateArgs& args, OutputSink& sink, std::uint64_t seed) {
  pdet::TrialPlan plan;
  if (!(args.trials >= 1.0)) throw UsageError("--trials: need at least one trial");
  plan.trials = static_cast<std::uint64_t>(args.trials);
  plan.seed = seed;
  plan.phase_per_sts = args.phase_per_sts;

  if (args.hypothesis == "noise")
    plan.hypothesis = pdet::Hypothesis::noise_only;
  else if (args.hypothesis == "packet")
    plan.hypothesis = pdet::Hypothesis::packet_present;
  else
    throw UsageError("--hypothesis: expected noise or packet");

  if (args.metric == "sc-abs")
    plan.metric = pdet::MetricKind::sc_abs;
  else if (args.metric == "rp-real")
    plan.metric = pdet::MetricKind::rp_real;
  else if (args.metric == "combined")
    plan.metric = pdet::MetricKind::compensated_combined;
  else
    throw UsageError("--metric: expected sc-abs, rp-real, or combined");

  auto snrs = resolve_snrs(args.snr_db, args.snr);
  if (plan.hypothesis == pdet::Hypothesis::packet_present) {
    if (snrs.empty()) throw UsageError("packet hypothesis requires a positive --snr/--snr-db");
  } else if (snrs.empty()) {
    snrs.assign(plan.metric == pdet::MetricKind::compensated_combined ? 2 : 1, 1.0);
  }
  if (plan.metric == pdet::MetricKind::compensated_combined) {
    plan.weights = args.weights.empty() ? pdet::wfa_weights(snrs.size())
                                        : pdet::make_weight_vector(parse_list(args.weights,
                                                                              "--weights"));
    if (plan.weights.size() != snrs.size())
      throw UsageError("--weights: length must match the SNR list");
  } else if (snrs.size() != 1) {
    throw UsageError("single-antenna metrics take exactly one SNR");
  }

  pdet::PreambleKind kind;
  if (args.preamble == "qpsk-random")
    kind = pdet::PreambleKind::qpsk_random;
  else if (args.preamble == "constant-envelope")
    kind = pdet::PreambleKind::constant_envelope;
  else
    throw UsageError("--preamble: expected qpsk-random or constant-envelope");

  const auto thresholds = parse_thresholds(args.rho, "");
  const double threshold = thresholds.grid[0];
  const auto preamble = pdet::make_preamble(args.eta, kind, seed);
  const auto scenario = pdet::make_scenario(snrs);
  const auto rate = pdet::estimate_rate(plan, preamble, scenario, threshold);

  std::ostringstream csv;
  csv << pdet::rate_csv_header() << '\n'
      << pdet::rate_csv_row(plan, args.eta, threshold,
                            plan.hypothesis == pdet::Hypothesis::noise_only ? 0.0 : snrs[0], rate)
      << '\n';
  if (sink.dir) {
    sink.open("simulate.csv") << csv.str();
  } else {
    std::cout << csv.str();
  }
  return exit_ok;
}

// ----------------------------------------------------------------------------
// benchmark
// ----------------------------------------------------------------------------

struct BenchmarkArgs {
  std::string snr_db, snr, dataset;
  double pfa_max = 1e-6;
  double pmd_max = 1e-4;
  std::string schemes = "wfa,iwmd,pwmd";
  std::size_t eta = 16;
  std::size_t grid_points = 512;
  double rho_min = 0.05;
  double rho_max = 0.95;
  std::size_t pwmd_draws = 200;
  double pwmd_interference = 0.0;
  std::size_t per_group = 2;
  std::string mode = "analytic";
  double mc_trials = 100000;
};

const char* outcome_label(pdet::BenchmarkVerdict::Outcome o) {
  switch (o) {
    case pdet::BenchmarkVerdict::Outcome::a_wins: return "A-wins";
    case pdet::BenchmarkVerdict::Outcome::draw: return "draw";
    case pdet::BenchmarkVerdict::Outcome::b_wins: return "B-wins";
  }
  return "?";
}

int run_benchmark(const BenchmarkArgs& args, OutputSink& sink, std::uint64_t seed) {
  if (!sink.dir) throw UsageError("benchmark requires --out DIR");
  const pdet::ToleranceRegion region{args.pfa_max, args.pmd_max};
  pdet::CurveMode mode;
  if (args.mode == "analytic")
    mode = pdet::CurveMode::analytic;
  else if (args.mode == "montecarlo")
    mode = pdet::CurveMode::montecarlo;
  else
    throw UsageError("--mode: expected analytic or montecarlo");

  if (!args.dataset.empty()) {
    if (!args.snr_db.empty() || !args.snr.empty())
      throw UsageError("--dataset and --snr/--snr-db are mutually exclusive");
    const auto [ds, report] = pdet::load_dataset(args.dataset);
    pdet::CampaignConfig config;
    config.sts_len = args.eta;
    config.region = region;
    config.per_group = args.per_group;
    config.seed = seed;
    config.grid_points = args.grid_points;
    config.grid_lo = args.rho_min;
    config.grid_hi = args.rho_max;
    config.pwmd.draws = args.pwmd_draws;
    config.pwmd.interference_noise_ratio = args.pwmd_interference;
    config.mode = mode;
    config.mc_trials = static_cast<std::uint64_t>(args.mc_trials);
    const auto summary = pdet::run_campaign(ds, config);

    {
      auto out = sink.open("summary.csv");
      pdet::summary_to_csv(summary, out);
    }
    ordered_json j;
    j["measurements"] = summary.overall.measurements;
    j["dropped_rows"] = report.dropped_rows.size();
    j["dropped_measurements"] = report.dropped_measurements.size();
    const auto part_json = [](const pdet::PartitionSummary& p) {
      ordered_json pj;
      for (const auto& [name, counts] :
           {std::pair{"WFA-vs-I-WMD", &p.vs_iwmd}, std::pair{"WFA-vs-P-WMD", &p.vs_pwmd}}) {
        ordered_json cj;
        cj["wins"] = counts->wins;
        cj["draws"] = counts->draws;
        cj["losses"] = counts->losses;
        cj["skipped"] = counts->skipped;
        if (counts->decided() > 0) {
          const double d = static_cast<double>(counts->decided());
          cj["win_fraction"] = static_cast<double>(counts->wins) / d;
          cj["draw_fraction"] = static_cast<double>(counts->draws) / d;
          cj["loss_fraction"] = static_cast<double>(counts->losses) / d;
        }
        pj[name] = cj;
      }
      pj["measurements"] = p.measurements;
      pj["blocked_cases"] = p.blocked_cases;
      return pj;
    };
    ordered_json parts;
    for (const auto& [day, part] : summary.partitions) parts[day] = part_json(part);
    j["partitions"] = parts;
    j["overall"] = part_json(summary.overall);
    sink.open("report.json") << j.dump(2) << '\n';
    return exit_ok;
  }

  const auto snrs = resolve_snrs(args.snr_db, args.snr);
  if (snrs.empty()) throw UsageError("benchmark needs --snr/--snr-db or --dataset");
  const auto grid = pdet::default_threshold_grid(args.grid_points, args.rho_min, args.rho_max);

  pdet::CurveOptions opts;
  opts.mode = mode;
  opts.seed = seed;
  opts.mc_trials = static_cast<std::uint64_t>(args.mc_trials);
  opts.pwmd.draws = args.pwmd_draws;
  opts.pwmd.interference_noise_ratio = args.pwmd_interference;

  std::vector<pdet::MdFaCurve> curves;
  for (const auto& name : pdet::detail::split_csv_line(args.schemes)) {
    pdet::Scheme scheme;
    if (name == "wfa")
      scheme = pdet::Scheme::wfa;
    else if (name == "iwmd")
      scheme = pdet::Scheme::iwmd;
    else if (name == "pwmd")
      scheme = pdet::Scheme::pwmd;
    else if (name == "single")
      scheme = pdet::Scheme::single;
    else
      throw UsageError("--schemes: unknown scheme '" + name + "'");
    curves.push_back(pdet::build_curve(scheme, snrs, args.eta, grid, opts));
  }

  {
    auto out = sink.open("curves.csv");
    out << "rho,pfa,pmd,scheme\n";
    for (const auto& curve : curves)
      for (const auto& p : curve.points)
        out << pdet::format_value(p.threshold) << ',' << pdet::format_value(p.pfa) << ','
            << pdet::format_value(p.pmd) << ',' << pdet::scheme_label(curve.scheme) << '\n';
  }
  {
    auto out = sink.open("verdicts.csv");
    out << "scheme_a,scheme_b,outcome,feasible_a,feasible_b\n";
    for (std::size_t i = 0; i < curves.size(); ++i)
      for (std::size_t j = i + 1; j < curves.size(); ++j) {
        const auto v = pdet::pareto_compare(curves[i], curves[j], region);
        out << pdet::scheme_label(curves[i].scheme) << ',' << pdet::scheme_label(curves[j].scheme)
            << ',' << outcome_label(v.outcome) << ',' << (v.feasible_a ? 1 : 0) << ','
            << (v.feasible_b ? 1 : 0) << '\n';
      }
  }
  return exit_ok;
}

// ----------------------------------------------------------------------------
// make-dataset
// ----------------------------------------------------------------------------

struct MakeDatasetArgs {
  std::size_t measurements = 1000;
  std::size_t antennas_per_group = 8;
  std::size_t days = 5;
};

int run_make_dataset(const MakeDatasetArgs& args, OutputSink& sink, std::uint64_t seed) {
  if (!sink.dir) throw UsageError("make-dataset requires --out DIR");
  pdet::SyntheticDatasetConfig config;
  config.measurements = args.measurements;
  config.antennas_per_group = args.antennas_per_group;
  config.days = args.days;
  config.seed = seed;
  const auto ds = pdet::generate_synthetic_dataset(config);
  auto out = sink.open("synthetic_snr.csv");
  pdet::dataset_to_csv(ds, out);
  return exit_ok;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Packet-detection analysis, simulation, and benchmarking"};
  app.require_subcommand(1);

  std::string out_dir;
  std::uint64_t seed = 0;
  app.add_option("--out", out_dir, "Output directory (stdout when omitted where possible)");
  app.add_option("--seed", seed, "Base seed for every random stream");

  AnalyticArgs an;
  auto* analytic = app.add_subcommand("analytic", "Closed-form error probabilities");
  analytic->add_option("--eta", an.eta, "Samples per STS");
  analytic->add_option("--rho", an.rho, "Detection threshold in (0,1)");
  analytic->add_option("--rho-range", an.rho_range, "Threshold sweep lo:hi:count");
  analytic->add_option("--snr-db", an.snr_db, "Comma-separated SNRs in dB");
  analytic->add_option("--snr", an.snr, "Comma-separated linear SNRs");
  analytic->add_option("--weights", an.weights, "Comma-separated combining weights");
  analytic->add_option("--scheme", an.scheme, "wfa | iwmd | single");

  SimulateArgs sim;
  auto* simulate = app.add_subcommand("simulate", "Monte Carlo rate estimation");
  simulate->add_option("--trials", sim.trials, "Trial count (accepts 1e7 style)");
  simulate->add_option("--eta", sim.eta, "Samples per STS");
  simulate->add_option("--rho", sim.rho, "Detection threshold in (0,1)");
  simulate->add_option("--metric", sim.metric, "sc-abs | rp-real | combined");
  simulate->add_option("--hypothesis", sim.hypothesis, "noise | packet");
  simulate->add_option("--snr-db", sim.snr_db, "Comma-separated SNRs in dB");
  simulate->add_option("--snr,--gamma", sim.snr, "Comma-separated linear SNRs");
  simulate->add_option("--weights", sim.weights, "Weights for the combined metric");
  simulate->add_option("--preamble", sim.preamble, "qpsk-random | constant-envelope");
  simulate->add_option("--phase-per-sts", sim.phase_per_sts, "Signal rotation, radians per STS");

  BenchmarkArgs bench;
  auto* benchmark = app.add_subcommand("benchmark", "MD-FA curves and Pareto verdicts");
  benchmark->add_option("--snr-db", bench.snr_db, "Comma-separated SNRs in dB");
  benchmark->add_option("--snr", bench.snr, "Comma-separated linear SNRs");
  benchmark->add_option("--dataset", bench.dataset, "Dataset CSV path (campaign mode)");
  benchmark->add_option("--pfa-max", bench.pfa_max, "False-alarm tolerance");
  benchmark->add_option("--pmd-max", bench.pmd_max, "Missed-detection tolerance");
  benchmark->add_option("--schemes", bench.schemes, "Schemes to compare (default wfa,iwmd,pwmd)");
  benchmark->add_option("--eta", bench.eta, "Samples per STS");
  benchmark->add_option("--grid-points", bench.grid_points, "Threshold grid size");
  benchmark->add_option("--rho-min", bench.rho_min, "Grid lower edge");
  benchmark->add_option("--rho-max", bench.rho_max, "Grid upper edge");
  benchmark->add_option("--pwmd-draws", bench.pwmd_draws, "Estimation draws per grid point");
  benchmark->add_option("--pwmd-interference", bench.pwmd_interference,
                        "Interference power over noise power");
  benchmark->add_option("--per-group", bench.per_group, "Antennas sampled per group");
  benchmark->add_option("--mode", bench.mode, "analytic | montecarlo");
  benchmark->add_option("--mc-trials", bench.mc_trials, "Trials per grid point (montecarlo)");

  MakeDatasetArgs mk;
  auto* make_dataset = app.add_subcommand("make-dataset", "Generate a synthetic SNR dataset");
  make_dataset->add_option("--measurements", mk.measurements, "Measurement count");
  make_dataset->add_option("--antennas-per-group", mk.antennas_per_group, "Antennas per group");
  make_dataset->add_option("--days", mk.days, "Day partitions");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    std::cerr << e.what() << '\n';
    return exit_usage;
  }

  OutputSink sink;
  if (!out_dir.empty()) {
    sink.dir = fs::path(out_dir);
    std::error_code ec;
    fs::create_directories(*sink.dir, ec);
    if (ec) {
      std::cerr << "cannot create output directory: " << out_dir << '\n';
      return exit_data;
    }
  }
  std::vector<std::string> argv_copy(argv, argv + argc);

  try {
    int rc = exit_ok;
    if (*analytic) rc = run_analytic(an, sink);
    if (*simulate) rc = run_simulate(sim, sink, seed);
    if (*benchmark) rc = run_benchmark(bench, sink, seed);
    if (*make_dataset) rc = run_make_dataset(mk, sink, seed);
    if (rc == exit_ok && sink.dir) write_manifest(sink, argv_copy, seed);
    return rc;
  } catch (const UsageError& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "usage error: " << e.what() << '\n';
    return exit_usage;
  } catch (const pdet::ParseError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return exit_data;
  } catch (const pdet::DataError& e) {
    std::cerr << "data error: " << e.what() << '\n';
    return exit_data;
  } catch (const pdet::NoUsableAntennaError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return exit_numeric;
  } catch (const pdet::ConvergenceError& e) {
    std::cerr << "numerical error: " << e.what() << '\n';
    return exit_numeric;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_numeric;
  }
}
