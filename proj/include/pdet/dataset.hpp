#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <tuple>
#include <vector>

#include "pdet/analytic.hpp"
#include "pdet/parallel.hpp"
#include "pdet/pareto.hpp"
#include "pdet/rng.hpp"

namespace pdet {

// ============================================================================
// SNR-measurement datasets: groups of co-located antennas, each with one SNR
// value per measurement, in the CSV schema
//   group,antenna,measurement,day,snr_db
// Loading validates the table (drops NaN and negative-dB rows, then drops
// any measurement left incomplete, so the surviving table is rectangular),
// and the campaign runner benchmarks WFA against I-WMD and P-WMD on every
// measurement, aggregating win/draw/lose counts per day partition.
// ============================================================================

struct ParseError : std::runtime_error {
  std::size_t line;
  ParseError(std::size_t line_, const std::string& msg)
      : std::runtime_error("line " + std::to_string(line_) + ": " + msg), line(line_) {}
};

struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct AntennaRef {
  std::string group;
  int antenna = 0;

  friend bool operator<(const AntennaRef& a, const AntennaRef& b) {
    return std::tie(a.group, a.antenna) < std::tie(b.group, b.antenna);
  }
  friend bool operator==(const AntennaRef& a, const AntennaRef& b) {
    return a.group == b.group && a.antenna == b.antenna;
  }
};

struct SnrDataset {
  std::vector<std::string> groups;              // sorted labels
  std::vector<int> antenna_ids;                 // sorted, identical across groups
  std::vector<std::int64_t> measurement_ids;    // sorted
  std::map<std::int64_t, std::string> day_of;   // partition label per measurement

  // values[(group, antenna)][measurement] -> SNR; dB is the stored schema
  // value, linear is converted once at ingestion
  struct Sample {
    double snr_db = 0.0;
    double snr_linear = 0.0;

    friend bool operator==(const Sample&, const Sample&) = default;
  };
  std::map<AntennaRef, std::map<std::int64_t, Sample>> values;

  std::size_t antennas_per_group() const noexcept { return antenna_ids.size(); }
  std::size_t measurement_count() const noexcept { return measurement_ids.size(); }

  const Sample& at(const AntennaRef& ref, std::int64_t k) const {
    const auto git = values.find(ref);
    if (git == values.end()) throw std::invalid_argument("SnrDataset::at: unknown antenna");
    const auto kit = git->second.find(k);
    if (kit == git->second.end()) throw std::invalid_argument("SnrDataset::at: unknown measurement");
    return kit->second;
  }
};

struct LoadReport {
  struct DroppedRow {
    std::size_t line = 0;
    std::string reason;
  };
  std::vector<DroppedRow> dropped_rows;
  std::vector<std::int64_t> dropped_measurements;  // removed to keep the table rectangular
  std::size_t kept_rows = 0;
};

namespace detail {

inline std::vector<std::string> split_csv_line(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::stringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

inline std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

}  // namespace detail

/// Parses and validates the CSV schema `group,antenna,measurement,day,snr_db`.
/// Rows with non-numeric (NaN) or negative-dB SNR are dropped and reported;
/// measurements left without a full antenna grid are then dropped entirely.
/// Malformed headers or rows raise ParseError; duplicate
/// (group, antenna, measurement) keys raise DataError.
inline std::pair<SnrDataset, LoadReport> load_dataset(std::istream& in) {
  std::string line;
  std::size_t line_no = 0;
  if (!std::getline(in, line)) throw ParseError(1, "empty input");
  ++line_no;
  if (detail::trim(line) != "group,antenna,measurement,day,snr_db")
    throw ParseError(1, "expected header group,antenna,measurement,day,snr_db");

  struct Row {
    std::string group;
    int antenna;
    std::int64_t k;
    std::string day;
    double snr_db;
  };
  std::vector<Row> rows;
  LoadReport report;
  std::set<std::tuple<std::string, int, std::int64_t>> seen;

  while (std::getline(in, line)) {
    ++line_no;
    if (detail::trim(line).empty()) continue;
    const auto fields = detail::split_csv_line(line);
    if (fields.size() != 5) throw ParseError(line_no, "expected 5 fields");
    Row row;
    row.group = detail::trim(fields[0]);
    if (row.group.empty()) throw ParseError(line_no, "empty group label");
    const auto parse_integer = [&](const std::string& text) {
      std::size_t pos = 0;
      long long value = 0;
      try {
        value = std::stoll(text, &pos);
      } catch (const std::exception&) {
        throw ParseError(line_no, "non-integer antenna or measurement id");
      }
      if (pos != text.size()) throw ParseError(line_no, "non-integer antenna or measurement id");
      return value;
    };
    row.antenna = static_cast<int>(parse_integer(detail::trim(fields[1])));
    row.k = parse_integer(detail::trim(fields[2]));
    row.day = detail::trim(fields[3]);
    const std::string snr_text = detail::trim(fields[4]);
    char* end = nullptr;
    row.snr_db = std::strtod(snr_text.c_str(), &end);
    if (end == snr_text.c_str() || *end != '\0')
      throw ParseError(line_no, "unparseable snr_db field");

    const auto key = std::make_tuple(row.group, row.antenna, row.k);
    if (!seen.insert(key).second)
      throw DataError("duplicate (group, antenna, measurement) key at line " +
                      std::to_string(line_no));
    if (std::isnan(row.snr_db)) {
      report.dropped_rows.push_back({line_no, "NaN snr_db"});
      continue;
    }
    if (row.snr_db < 0.0) {
      report.dropped_rows.push_back({line_no, "snr_db below 0 dB"});
      continue;
    }
    rows.push_back(std::move(row));
  }

  SnrDataset ds;
  std::set<std::string> groups;
  std::set<int> antennas;
  for (const auto& r : rows) {
    groups.insert(r.group);
    antennas.insert(r.antenna);
  }
  ds.groups.assign(groups.begin(), groups.end());
  ds.antenna_ids.assign(antennas.begin(), antennas.end());
  const std::size_t full = ds.groups.size() * ds.antenna_ids.size();

  // keep only measurements with a complete grid and a consistent day label
  std::map<std::int64_t, std::size_t> rows_per_k;
  std::map<std::int64_t, std::set<std::string>> days_per_k;
  for (const auto& r : rows) {
    ++rows_per_k[r.k];
    days_per_k[r.k].insert(r.day);
  }
  std::set<std::int64_t> kept_ks;
  for (const auto& [k, n] : rows_per_k) {
    if (n == full && days_per_k[k].size() == 1)
      kept_ks.insert(k);
    else
      report.dropped_measurements.push_back(k);
  }

  for (const auto& r : rows) {
    if (!kept_ks.count(r.k)) continue;
    ds.values[{r.group, r.antenna}][r.k] =
        SnrDataset::Sample{r.snr_db, snr_db_to_linear(r.snr_db)};
    ds.day_of[r.k] = r.day;
    ++report.kept_rows;
  }
  ds.measurement_ids.assign(kept_ks.begin(), kept_ks.end());
  return {std::move(ds), std::move(report)};
}

inline std::pair<SnrDataset, LoadReport> load_dataset(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open dataset file: " + path);
  return load_dataset(in);
}

inline void dataset_to_csv(const SnrDataset& ds, std::ostream& out) {
  out << "group,antenna,measurement,day,snr_db\n";
  for (const auto& [ref, series] : ds.values)
    for (const auto& [k, sample] : series)
      out << ref.group << ',' << ref.antenna << ',' << k << ',' << ds.day_of.at(k) << ','
          << format_compact(sample.snr_db) << '\n';
}

// ----------------------------------------------------------------------------
// Statistics on the table.
// ----------------------------------------------------------------------------

/// Pearson correlation between the linear-SNR series of two antennas across
/// measurements. Degenerate (zero-variance) series are rejected.
inline double snr_correlation(const SnrDataset& ds, const AntennaRef& ref,
                              const AntennaRef& other) {
  const auto& xs = ds.values.at(ref);
  const auto& ys = ds.values.at(other);
  if (ds.measurement_count() < 2)
    throw std::invalid_argument("snr_correlation: need at least two measurements");
  double mx = 0.0, my = 0.0;
  for (std::int64_t k : ds.measurement_ids) {
    mx += xs.at(k).snr_linear;
    my += ys.at(k).snr_linear;
  }
  const double n = static_cast<double>(ds.measurement_count());
  mx /= n;
  my /= n;
  double sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::int64_t k : ds.measurement_ids) {
    const double dx = xs.at(k).snr_linear - mx;
    const double dy = ys.at(k).snr_linear - my;
    sxy += dx * dy;
    sxx += dx * dx;
    syy += dy * dy;
  }
  if (sxx <= 0.0 || syy <= 0.0)
    throw std::domain_error("snr_correlation: zero variance makes the correlation undefined");
  return sxy / std::sqrt(sxx * syy);
}

// ----------------------------------------------------------------------------
// Blockage classification (dB domain by convention).
// ----------------------------------------------------------------------------

enum class BlockageLabel { non_blocked, partially_blocked, fully_blocked };

inline const char* blockage_label_name(BlockageLabel l) {
  switch (l) {
    case BlockageLabel::non_blocked: return "non-blocked";
    case BlockageLabel::partially_blocked: return "partially-blocked";
    case BlockageLabel::fully_blocked: return "fully-blocked";
  }
  return "?";
}

struct BlockageResult {
  std::vector<bool> blocked;
  BlockageLabel label = BlockageLabel::non_blocked;
};

inline BlockageResult classify_blockage(std::span<const double> snrs_db,
                                        double threshold_db = 3.0) {
  BlockageResult result;
  result.blocked.reserve(snrs_db.size());
  std::size_t count = 0;
  for (double db : snrs_db) {
    const bool b = db < threshold_db;
    result.blocked.push_back(b);
    count += b ? 1 : 0;
  }
  if (count == 0)
    result.label = BlockageLabel::non_blocked;
  else if (count == snrs_db.size())
    result.label = BlockageLabel::fully_blocked;
  else
    result.label = BlockageLabel::partially_blocked;
  return result;
}

// ----------------------------------------------------------------------------
// Antenna sampling.
// ----------------------------------------------------------------------------

/// Uniformly samples `per_group` antennas without replacement from each
/// group, deterministically in the seed. Selection order: groups in sorted
/// order, chosen antenna ids sorted within each group.
inline std::vector<AntennaRef> sample_antennas(const SnrDataset& ds, std::size_t per_group,
                                               std::uint64_t seed) {
  if (per_group == 0 || per_group > ds.antennas_per_group())
    throw std::invalid_argument("sample_antennas: per_group out of range");
  std::vector<AntennaRef> selection;
  selection.reserve(per_group * ds.groups.size());
  for (std::size_t gi = 0; gi < ds.groups.size(); ++gi) {
    std::vector<int> pool = ds.antenna_ids;
    TrialRng rng(seed, /*stream=*/0x616E74ULL, /*counter=*/gi);
    // partial Fisher-Yates: the first per_group slots become the sample
    for (std::size_t i = 0; i < per_group; ++i) {
      const std::size_t j = i + static_cast<std::size_t>(rng.next_unit() *
                                                         static_cast<double>(pool.size() - i));
      std::swap(pool[i], pool[std::min(j, pool.size() - 1)]);
    }
    std::sort(pool.begin(), pool.begin() + static_cast<std::ptrdiff_t>(per_group));
    for (std::size_t i = 0; i < per_group; ++i)
      selection.push_back({ds.groups[gi], pool[i]});
  }
  return selection;
}

// ----------------------------------------------------------------------------
// Benchmark campaign.
// ----------------------------------------------------------------------------

struct CampaignConfig {
  std::size_t sts_len = 16;
  ToleranceRegion region{};
  std::size_t per_group = 2;
  std::uint64_t seed = 0;
  std::size_t grid_points = 512;
  double grid_lo = 0.05;
  double grid_hi = 0.95;
  PwmdOptions pwmd{};
  CurveMode mode = CurveMode::analytic;
  std::uint64_t mc_trials = 100000;
};

struct PairingCounts {
  std::uint64_t wins = 0;     // WFA wins
  std::uint64_t draws = 0;
  std::uint64_t losses = 0;   // the opponent wins
  std::uint64_t skipped = 0;  // no usable antenna for the opponent

  std::uint64_t decided() const noexcept { return wins + draws + losses; }

  friend bool operator==(const PairingCounts&, const PairingCounts&) = default;
};

struct PartitionSummary {
  PairingCounts vs_iwmd;
  PairingCounts vs_pwmd;
  std::uint64_t measurements = 0;
  std::uint64_t blocked_cases = 0;  // at least one selected antenna below 3 dB

  friend bool operator==(const PartitionSummary&, const PartitionSummary&) = default;
};

struct CampaignSummary {
  std::map<std::string, PartitionSummary> partitions;  // day label -> counts
  PartitionSummary overall;

  friend bool operator==(const CampaignSummary&, const CampaignSummary&) = default;
};

/// Benchmarks WFA against I-WMD and P-WMD on every measurement: selects
/// antennas per group, builds the three curves from the measured SNRs, and
/// accumulates Pareto verdicts per day partition. Measurements where a
/// scheme has no usable antenna are recorded as skips, not aborts.
/// Deterministic in the seed; measurements are processed independently with
/// per-measurement derived seeds, so the result does not depend on the
/// parallel schedule.
inline CampaignSummary run_campaign(const SnrDataset& ds, const CampaignConfig& config) {
  const std::vector<double> grid =
      default_threshold_grid(config.grid_points, config.grid_lo, config.grid_hi);
  const Preamble preamble = make_preamble(config.sts_len, PreambleKind::qpsk_random, config.seed);

  struct PerMeasurement {
    std::string day;
    int iwmd = -2;  // -2 skip, -1 loss, 0 draw, 1 win
    int pwmd = -2;
    bool blocked = false;
  };
  std::vector<PerMeasurement> results(ds.measurement_count());

  // each measurement is expensive, so spread them even when there are few
  parallel_chunks(ds.measurement_count(), [&](unsigned, std::uint64_t begin, std::uint64_t end) {
    for (std::uint64_t idx = begin; idx < end; ++idx) {
      const std::int64_t k = ds.measurement_ids[idx];
      PerMeasurement& out = results[idx];
      out.day = ds.day_of.at(k);
      const std::uint64_t k_seed = derive_key(config.seed, 0x6D656173ULL,
                                              static_cast<std::uint64_t>(k));
      const auto selection = sample_antennas(ds, config.per_group, k_seed);
      std::vector<double> snrs, snrs_db;
      snrs.reserve(selection.size());
      for (const auto& ref : selection) {
        const auto& sample = ds.at(ref, k);
        snrs.push_back(sample.snr_linear);
        snrs_db.push_back(sample.snr_db);
      }
      out.blocked = classify_blockage(snrs_db).label != BlockageLabel::non_blocked;

      CurveOptions opts;
      opts.mode = config.mode;
      opts.seed = k_seed;
      opts.mc_trials = config.mc_trials;
      opts.pwmd = config.pwmd;
      opts.preamble = preamble;

      const MdFaCurve wfa = build_curve(Scheme::wfa, snrs, config.sts_len, grid, opts);
      const auto verdict_to_int = [](const BenchmarkVerdict& v) {
        switch (v.outcome) {
          case BenchmarkVerdict::Outcome::a_wins: return 1;
          case BenchmarkVerdict::Outcome::draw: return 0;
          case BenchmarkVerdict::Outcome::b_wins: return -1;
        }
        return 0;
      };
      try {
        const MdFaCurve iwmd = build_curve(Scheme::iwmd, snrs, config.sts_len, grid, opts);
        out.iwmd = verdict_to_int(pareto_compare(wfa, iwmd, config.region));
      } catch (const NoUsableAntennaError&) {
        out.iwmd = -2;
      }
      try {
        const MdFaCurve pwmd = build_curve(Scheme::pwmd, snrs, config.sts_len, grid, opts);
        out.pwmd = verdict_to_int(pareto_compare(wfa, pwmd, config.region));
      } catch (const NoUsableAntennaError&) {
        out.pwmd = -2;
      }
    }
  }, 0, 1);

  CampaignSummary summary;
  const auto accumulate = [](PairingCounts& counts, int verdict) {
    switch (verdict) {
      case 1: ++counts.wins; break;
      case 0: ++counts.draws; break;
      case -1: ++counts.losses; break;
      default: ++counts.skipped; break;
    }
  };
  for (const auto& r : results) {
    PartitionSummary& part = summary.partitions[r.day];
    for (PartitionSummary* p : {&part, &summary.overall}) {
      accumulate(p->vs_iwmd, r.iwmd);
      accumulate(p->vs_pwmd, r.pwmd);
      ++p->measurements;
      p->blocked_cases += r.blocked ? 1 : 0;
    }
  }
  return summary;
}

/// CSV export: `partition,pairing,wins,draws,losses,skipped`, day partitions
/// in sorted order followed by the overall row.
inline void summary_to_csv(const CampaignSummary& summary, std::ostream& out) {
  out << "partition,pairing,wins,draws,losses,skipped\n";
  const auto row = [&out](const std::string& partition, const char* pairing,
                          const PairingCounts& c) {
    out << partition << ',' << pairing << ',' << c.wins << ',' << c.draws << ',' << c.losses
        << ',' << c.skipped << '\n';
  };
  for (const auto& [day, part] : summary.partitions) {
    row(day, "WFA-vs-I-WMD", part.vs_iwmd);
    row(day, "WFA-vs-P-WMD", part.vs_pwmd);
  }
  row("overall", "WFA-vs-I-WMD", summary.overall.vs_iwmd);
  row("overall", "WFA-vs-P-WMD", summary.overall.vs_pwmd);
}

// ----------------------------------------------------------------------------
// Synthetic dataset generation.
// ----------------------------------------------------------------------------

struct SyntheticDatasetConfig {
  std::size_t measurements = 1000;
  std::size_t antennas_per_group = 8;
  std::size_t days = 5;
  std::uint64_t seed = 1;
};

/// Generates a dataset with the qualitative geometry of a four-corner
/// distributed deployment: a transmitter position parameter drives the group
/// mean SNRs, so antennas within a group are strongly positively correlated
/// while groups at opposite corners (A and D, B and C) are negatively
/// correlated. SNRs are clamped to 0 dB and occasionally dip below 3 dB,
/// producing partially blocked cases but never fully blocked ones.
inline SnrDataset generate_synthetic_dataset(const SyntheticDatasetConfig& config = {}) {
  SnrDataset ds;
  ds.groups = {"A", "B", "C", "D"};
  ds.antenna_ids.resize(config.antennas_per_group);
  for (std::size_t i = 0; i < config.antennas_per_group; ++i)
    ds.antenna_ids[static_cast<std::size_t>(i)] = static_cast<int>(i + 1);

  for (std::size_t k = 0; k < config.measurements; ++k) {
    TrialRng pos_rng(config.seed, /*stream=*/0x706F73ULL, /*counter=*/k);
    const double t = pos_rng.next_unit();  // transmitter position along the A->D diagonal
    const double base_a = 1.2 + 4.8 * (1.0 - t);
    const double base_d = 1.2 + 4.8 * t;
    const double base_c = 2.0 + 2.0 * (1.0 - t);
    const double base_b = 2.0 + 2.0 * t;
    const double bases[4] = {base_a, base_b, base_c, base_d};
    const std::string day = "day" + std::to_string(1 + (k * config.days) / config.measurements);
    const std::int64_t kk = static_cast<std::int64_t>(k);
    ds.day_of[kk] = day;
    for (std::size_t gi = 0; gi < 4; ++gi) {
      TrialRng ant_rng(config.seed, 0x6A697474ULL + gi, k);
      for (int antenna : ds.antenna_ids) {
        const double jitter = 1.0 + 0.12 * ant_rng.next_normal();
        const double raw = std::max(bases[gi] * std::max(jitter, 0.05), 1.0);
        // dB is the stored schema value; linear is derived from it exactly as
        // ingestion does, so a CSV round trip is bit-exact
        const double snr_db = snr_linear_to_db(raw);
        ds.values[{ds.groups[gi], antenna}][kk] =
            SnrDataset::Sample{snr_db, snr_db_to_linear(snr_db)};
      }
    }
    ds.measurement_ids.push_back(kk);
  }
  return ds;
}

}  // namespace pdet
