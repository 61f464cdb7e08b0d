#include "doctest.h"

#include <cmath>
#include <sstream>
#include <vector>

#include "pdet/dataset.hpp"
#include "support/oracles.hpp"

using namespace pdet;

namespace {

std::string small_csv() {
  std::string text = "group,antenna,measurement,day,snr_db\n";
  for (const char* g : {"A", "B"})
    for (int ant : {1, 2})
      for (int k : {0, 1, 2})
        text += std::string(g) + "," + std::to_string(ant) + "," + std::to_string(k) +
                ",day1," + std::to_string(3.0 + ant + 0.1 * k) + "\n";
  return text;
}

SnrDataset from_text(const std::string& text) {
  std::istringstream in(text);
  return load_dataset(in).first;
}

}  // namespace

TEST_SUITE("dataset") {

TEST_CASE("well-formed table loads completely") {
  std::istringstream in(small_csv());
  const auto [ds, report] = load_dataset(in);
  CHECK(ds.groups == std::vector<std::string>{"A", "B"});
  CHECK(ds.antenna_ids == std::vector<int>{1, 2});
  CHECK(ds.measurement_count() == 3);
  CHECK(report.kept_rows == 12);
  CHECK(report.dropped_rows.empty());
  CHECK(report.dropped_measurements.empty());
}

TEST_CASE("negative-dB row is dropped, reported, and leaves the table rectangular") {
  std::string text = small_csv();
  text += "A,1,3,day1,-1.2\n";  // incomplete measurement 3 with a negative SNR
  std::istringstream in(text);
  const auto [ds, report] = load_dataset(in);
  REQUIRE(report.dropped_rows.size() == 1);
  CHECK(report.dropped_rows[0].reason == "snr_db below 0 dB");
  CHECK(ds.measurement_count() == 3);  // measurement 3 gone
  for (const auto& [ref, series] : ds.values) CHECK(series.size() == 3);
}

TEST_CASE("NaN row is dropped and the rest of its measurement with it") {
  std::string text = small_csv();
  // measurement 5 complete except one NaN entry
  for (const char* g : {"A", "B"})
    for (int ant : {1, 2})
      if (!(g[0] == 'A' && ant == 1))
        text += std::string(g) + "," + std::to_string(ant) + ",5,day1,4.0\n";
  text += "A,1,5,day1,nan\n";
  std::istringstream in(text);
  const auto [ds, report] = load_dataset(in);
  REQUIRE(report.dropped_rows.size() == 1);
  CHECK(report.dropped_rows[0].reason == "NaN snr_db");
  CHECK(report.dropped_measurements == std::vector<std::int64_t>{5});
  CHECK(ds.measurement_count() == 3);
}

TEST_CASE("duplicate keys are a data error") {
  std::string text = small_csv();
  text += "A,1,0,day1,4.4\n";
  std::istringstream in(text);
  CHECK_THROWS_AS((void)load_dataset(in), DataError);
}

TEST_CASE("malformed input raises parse errors with line numbers") {
  std::istringstream bad_header("group,antenna,notright\nA,1,0,day1,3.0\n");
  CHECK_THROWS_AS((void)load_dataset(bad_header), ParseError);

  std::istringstream bad_row("group,antenna,measurement,day,snr_db\nA,x,0,day1,3.0\n");
  try {
    (void)load_dataset(bad_row);
    FAIL("expected ParseError");
  } catch (const ParseError& e) {
    CHECK(e.line == 2);
  }

  std::istringstream trailing("group,antenna,measurement,day,snr_db\nA,1x,0,day1,3.0\n");
  CHECK_THROWS_AS((void)load_dataset(trailing), ParseError);

  std::istringstream bad_snr("group,antenna,measurement,day,snr_db\nA,1,0,day1,3.0abc\n");
  CHECK_THROWS_AS((void)load_dataset(bad_snr), ParseError);
}

TEST_CASE("round trip through csv writer") {
  const auto ds = from_text(small_csv());
  std::ostringstream out;
  dataset_to_csv(ds, out);
  const auto again = from_text(out.str());
  CHECK(again.values == ds.values);
  CHECK(again.day_of == ds.day_of);
}

TEST_CASE("correlation: self, mirrored, and the textbook oracle") {
  // linear series x in [2,4] and its reflection about the mean stay above
  // 0 dB and correlate exactly +1 / -1
  std::string text = "group,antenna,measurement,day,snr_db\n";
  std::vector<double> xs, ys;
  for (int k = 0; k < 10; ++k) {
    const double x = 2.0 + 0.2 * k + 0.07 * ((k * 37) % 5);
    const double y = 6.0 - x;
    xs.push_back(x);
    ys.push_back(y);
    text += "A,1," + std::to_string(k) + ",day1," + format_compact(snr_linear_to_db(x)) + "\n";
    text += "A,2," + std::to_string(k) + ",day1," + format_compact(snr_linear_to_db(y)) + "\n";
  }
  const auto ds = from_text(text);
  CHECK(snr_correlation(ds, {"A", 1}, {"A", 1}) == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(snr_correlation(ds, {"A", 1}, {"A", 2}) == doctest::Approx(-1.0).epsilon(1e-12));
  const double expected = oracles::pearson(xs, ys);
  CHECK(std::fabs(snr_correlation(ds, {"A", 1}, {"A", 2}) - expected) <= 1e-12);
}

TEST_CASE("correlation of twenty random synthetic pairs matches the oracle") {
  for (std::uint64_t rep = 0; rep < 20; ++rep) {
    TrialRng rng(99, 0, rep);
    std::string text = "group,antenna,measurement,day,snr_db\n";
    std::vector<double> xs, ys;
    for (int k = 0; k < 25; ++k) {
      const double x = 1.5 + 3.0 * rng.next_unit();
      const double y = 1.5 + 3.0 * rng.next_unit() + 0.3 * x;
      xs.push_back(x);
      ys.push_back(y);
      text += "G,1," + std::to_string(k) + ",day1," + format_compact(snr_linear_to_db(x)) + "\n";
      text += "G,2," + std::to_string(k) + ",day1," + format_compact(snr_linear_to_db(y)) + "\n";
    }
    const auto ds = from_text(text);
    CHECK(std::fabs(snr_correlation(ds, {"G", 1}, {"G", 2}) - oracles::pearson(xs, ys)) <= 1e-12);
  }
}

TEST_CASE("degenerate series make the correlation undefined") {
  std::string text = "group,antenna,measurement,day,snr_db\n";
  for (int k = 0; k < 4; ++k) {
    text += "A,1," + std::to_string(k) + ",day1,3.0\n";  // constant
    text += "A,2," + std::to_string(k) + ",day1," + std::to_string(3.0 + k) + "\n";
  }
  const auto ds = from_text(text);
  CHECK_THROWS_AS((void)snr_correlation(ds, {"A", 1}, {"A", 2}), std::domain_error);
}

TEST_CASE("blockage classification") {
  const std::vector<double> partially{0.2013, 3.5843, 3.3318, 4.2489};
  const auto partial = classify_blockage(partially);
  CHECK(partial.blocked == std::vector<bool>{true, false, false, false});
  CHECK(partial.label == BlockageLabel::partially_blocked);

  CHECK(classify_blockage(std::vector<double>{5.0, 5.0, 5.0}).label ==
        BlockageLabel::non_blocked);
  CHECK(classify_blockage(std::vector<double>{1.0, 1.0}).label == BlockageLabel::fully_blocked);
}

TEST_CASE("antenna sampling: identity, determinism, uniformity") {
  SyntheticDatasetConfig cfg;
  cfg.measurements = 4;
  const auto ds = generate_synthetic_dataset(cfg);

  const auto all = sample_antennas(ds, ds.antennas_per_group(), 3);
  CHECK(all.size() == 4 * ds.antennas_per_group());
  for (std::size_t i = 0; i < ds.antennas_per_group(); ++i)
    CHECK(all[i].antenna == ds.antenna_ids[i]);

  CHECK(sample_antennas(ds, 2, 7) == sample_antennas(ds, 2, 7));
  CHECK_THROWS_AS((void)sample_antennas(ds, 9, 7), std::invalid_argument);

  // each of the 8 antennas in a group appears with frequency 2/8
  std::vector<std::uint64_t> counts(8, 0);
  const std::uint64_t reps = 100000;
  for (std::uint64_t s = 0; s < reps; ++s) {
    const auto sel = sample_antennas(ds, 2, s);
    counts[static_cast<std::size_t>(sel[0].antenna - 1)]++;
    counts[static_cast<std::size_t>(sel[1].antenna - 1)]++;
  }
  for (auto c : counts)
    CHECK(static_cast<double>(c) / static_cast<double>(reps) == doctest::Approx(0.25).epsilon(0.04));
}

TEST_CASE("campaign: equal SNRs across antennas draw against the oracle weights") {
  std::string text = "group,antenna,measurement,day,snr_db\n";
  for (const char* g : {"A", "B"})
    for (int ant : {1, 2}) text += std::string(g) + "," + std::to_string(ant) + ",0,day1,3.5\n";
  const auto ds = from_text(text);
  CampaignConfig cfg;
  cfg.per_group = 2;
  cfg.grid_points = 192;
  cfg.pwmd.draws = 8;
  const auto summary = run_campaign(ds, cfg);
  CHECK(summary.overall.vs_iwmd.draws == 1);
  CHECK(summary.overall.measurements == 1);
}

TEST_CASE("campaign: the four-antenna measured example scores a win for equal weights") {
  std::string text = "group,antenna,measurement,day,snr_db\n";
  const double dbs[4] = {3.6118, 3.8903, 4.0338, 3.3649};
  const char* groups[4] = {"A", "B", "C", "D"};
  for (int g = 0; g < 4; ++g) text += std::string(groups[g]) + ",1,0,day1," + format_compact(dbs[g]) + "\n";
  const auto ds = from_text(text);
  CampaignConfig cfg;
  cfg.per_group = 1;
  cfg.grid_points = 384;
  cfg.pwmd.draws = 16;
  cfg.pwmd.interference_noise_ratio = 0.5;
  const auto summary = run_campaign(ds, cfg);
  CHECK(summary.overall.vs_iwmd.wins == 1);
  CHECK(summary.overall.blocked_cases == 0);
}

TEST_CASE("campaign: skipped measurements are recorded, not aborted") {
  // direct construction bypasses load validation to exercise the skip path
  SnrDataset ds;
  ds.groups = {"A"};
  ds.antenna_ids = {1};
  ds.measurement_ids = {0};
  ds.day_of[0] = "day1";
  ds.values[{"A", 1}][0] = SnrDataset::Sample{snr_linear_to_db(0.03), 0.03};
  CampaignConfig cfg;
  cfg.per_group = 1;
  cfg.grid_points = 64;
  cfg.pwmd.draws = 4;
  const auto summary = run_campaign(ds, cfg);
  CHECK(summary.overall.vs_iwmd.skipped == 1);
  CHECK(summary.overall.vs_iwmd.decided() == 0);
}

TEST_CASE("campaign determinism and row-order invariance") {
  SyntheticDatasetConfig gen;
  gen.measurements = 24;
  gen.seed = 12;
  const auto ds = generate_synthetic_dataset(gen);

  std::ostringstream text;
  dataset_to_csv(ds, text);
  // reverse the data rows; keyed storage must make the order irrelevant
  std::istringstream lines(text.str());
  std::string header, line;
  std::getline(lines, header);
  std::vector<std::string> rows;
  while (std::getline(lines, line)) rows.push_back(line);
  std::string reversed = header + "\n";
  for (auto it = rows.rbegin(); it != rows.rend(); ++it) reversed += *it + "\n";
  const auto ds2 = from_text(reversed);
  CHECK(ds2.values == ds.values);

  CampaignConfig cfg;
  cfg.per_group = 2;
  cfg.grid_points = 96;
  cfg.pwmd.draws = 8;
  cfg.seed = 4;
  const auto a = run_campaign(ds, cfg);
  const auto b = run_campaign(ds, cfg);
  const auto c = run_campaign(ds2, cfg);
  CHECK(a == b);
  CHECK(a == c);
}

TEST_CASE("dropping a day partition leaves the other partitions untouched") {
  SyntheticDatasetConfig gen;
  gen.measurements = 30;
  gen.seed = 8;
  const auto full = generate_synthetic_dataset(gen);

  SnrDataset trimmed = full;
  std::vector<std::int64_t> keep;
  for (std::int64_t k : full.measurement_ids)
    if (full.day_of.at(k) != "day2")
      keep.push_back(k);
    else {
      trimmed.day_of.erase(k);
      for (auto& [ref, series] : trimmed.values) series.erase(k);
    }
  trimmed.measurement_ids = keep;

  CampaignConfig cfg;
  cfg.per_group = 2;
  cfg.grid_points = 96;
  cfg.pwmd.draws = 8;
  cfg.seed = 6;
  const auto all = run_campaign(full, cfg);
  const auto partial = run_campaign(trimmed, cfg);

  REQUIRE(all.partitions.count("day2") == 1);
  CHECK(partial.partitions.count("day2") == 0);
  for (const auto& [day, counts] : partial.partitions) CHECK(counts == all.partitions.at(day));

  // the overall row is the measurement-weighted aggregate of its partitions
  PartitionSummary sum;
  for (const auto& [day, counts] : all.partitions) {
    sum.vs_iwmd.wins += counts.vs_iwmd.wins;
    sum.vs_iwmd.draws += counts.vs_iwmd.draws;
    sum.vs_iwmd.losses += counts.vs_iwmd.losses;
    sum.vs_iwmd.skipped += counts.vs_iwmd.skipped;
    sum.measurements += counts.measurements;
  }
  CHECK(sum.vs_iwmd == all.overall.vs_iwmd);
  CHECK(sum.measurements == all.overall.measurements);
}

TEST_CASE("summary fractions sum to one and the csv is stable") {
  SyntheticDatasetConfig gen;
  gen.measurements = 20;
  gen.seed = 2;
  const auto ds = generate_synthetic_dataset(gen);
  CampaignConfig cfg;
  cfg.per_group = 2;
  cfg.grid_points = 96;
  cfg.pwmd.draws = 8;
  const auto summary = run_campaign(ds, cfg);
  for (const auto& [day, part] : summary.partitions) {
    for (const auto* counts : {&part.vs_iwmd, &part.vs_pwmd}) {
      if (counts->decided() == 0) continue;
      const double total = static_cast<double>(counts->decided());
      const double frac = (static_cast<double>(counts->wins) + counts->draws + counts->losses) /
                          total;
      CHECK(frac == doctest::Approx(1.0).epsilon(1e-9));
    }
  }
  std::ostringstream csv;
  summary_to_csv(summary, csv);
  CHECK(csv.str().find("partition,pairing,wins,draws,losses,skipped\n") == 0);
  CHECK(csv.str().find("overall,WFA-vs-I-WMD") != std::string::npos);
}

TEST_CASE("synthetic dataset has the distributed-corner correlation geometry") {
  SyntheticDatasetConfig gen;
  gen.measurements = 400;
  gen.seed = 77;
  const auto ds = generate_synthetic_dataset(gen);
  CHECK(snr_correlation(ds, {"A", 1}, {"A", 2}) > 0.8);
  CHECK(snr_correlation(ds, {"D", 3}, {"D", 7}) > 0.8);
  CHECK(snr_correlation(ds, {"A", 1}, {"D", 6}) < 0.0);
  CHECK(snr_correlation(ds, {"B", 2}, {"C", 5}) < 0.0);
  CHECK(snr_correlation(ds, {"A", 1}, {"C", 4}) > 0.0);
  // validated dataset never goes below 0 dB
  for (const auto& [ref, series] : ds.values)
    for (const auto& [k, sample] : series) CHECK(sample.snr_db >= 0.0);
}

}  // TEST_SUITE
