#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "metric_oracle.hpp"
#include "temp_dir.hpp"
#include "tdrepair/errors.hpp"
#include "tdrepair/eval/eval.hpp"

namespace tdrepair::eval {
namespace {

using pipeline::FinalStatus;
using pipeline::PipelineRecord;

TEST(Format, TableTwoStyle) {
  EXPECT_EQ(format_percent(477, 500), "95.4");
  EXPECT_EQ(format_error_rate(477, 500), "4.6");
}

TEST(Format, HandValues) {
  EXPECT_EQ(format_percent(1, 3), "33.3");
  EXPECT_EQ(format_percent(2, 3), "66.7");
  EXPECT_EQ(format_percent(1, 8), "12.5");
  EXPECT_EQ(format_percent(1, 16), "6.3");  // 6.25 rounds up
  EXPECT_EQ(format_error_rate(1, 16), "93.7");
  EXPECT_EQ(format_percent(1, 2000), "0.1");
  EXPECT_EQ(format_percent(0, 7), "0.0");
  EXPECT_EQ(format_error_rate(0, 7), "100.0");
  EXPECT_EQ(format_percent(7, 7), "100.0");
  EXPECT_EQ(format_error_rate(7, 7), "0.0");
}

TEST(Format, AgreesWithOracleAndSumsToHundred) {
  for (std::size_t n = 1; n <= 400; ++n) {
    for (std::size_t p = 0; p <= n; ++p) {
      ASSERT_EQ(format_percent(p, n), test_support::oracle_percent(p, n)) << p << "/" << n;
      const double sum = std::stod(format_percent(p, n)) + std::stod(format_error_rate(p, n));
      ASSERT_NEAR(sum, 100.0, 1e-9) << p << "/" << n;
    }
  }
}

TEST(PassAt1, EmptyIsAnError) { EXPECT_THROW(pass_at_1({}), EmptyCorpusError); }

TEST(PassAt1, MatchesBruteForceOnRandomSets) {
  std::mt19937 rng(20261018);
  for (int trial = 0; trial < 1000; ++trial) {
    const auto records = test_support::random_records(rng, 1 + rng() % 60);
    const auto s = pass_at_1(records);
    const auto c = test_support::brute_force_count(records);
    ASSERT_EQ(s.n, c.n);
    ASSERT_EQ(s.n_passed, c.passed);
    ASSERT_EQ(s.breakdown.passed_stage1, c.stage1);
    ASSERT_EQ(s.breakdown.passed_stage2, c.stage2);
    ASSERT_EQ(s.breakdown.failed, c.failed);
    ASSERT_EQ(s.infra_errors, c.infra);
    ASSERT_EQ(s.pass_at_1, 100.0 * static_cast<double>(c.passed) / static_cast<double>(c.n));
  }
}

TEST(Summary, JsonRoundTrip) {
  std::mt19937 rng(7);
  const auto s = pass_at_1(test_support::random_records(rng, 33));
  const auto j = summary_to_json(s);
  EXPECT_EQ(summary_from_json(j), s);
  EXPECT_EQ(j["pass_at_1_display"], format_percent(s.n_passed, s.n));
  EXPECT_EQ(j["error_rate_display"], format_error_rate(s.n_passed, s.n));
}

TEST(Report, TableHasColumnsAndBreakdown) {
  std::vector<PipelineRecord> records(500);
  for (std::size_t i = 0; i < records.size(); ++i) {
    records[i].instance_id = "x" + std::to_string(i);
    if (i < 477) records[i].final_status = FinalStatus::kPassed;
  }
  std::ostringstream out;
  emit_report(pass_at_1(records), records, ReportFormat::kTable, out);
  const std::string t = out.str();
  for (const char* col : {"N", "Passed", "Pass@1", "Error rate", "95.4", "4.6", "passed_stage1", "passed_stage2", "failed"}) {
    EXPECT_NE(t.find(col), std::string::npos) << col << "\n" << t;
  }
}

TEST(Report, MachineFormatToFile) {
  test_support::TempDir dir;
  std::vector<PipelineRecord> records(2);
  records[0].instance_id = "a";
  records[1].instance_id = "b";
  records[1].final_status = FinalStatus::kPassed;
  emit_report(pass_at_1(records), records, report_format_from_string("machine"), dir / "r.json");
  const auto j = nlohmann::json::parse(test_support::read_file(dir / "r.json"));
  EXPECT_EQ(j["summary"]["n_passed"], 1);
  ASSERT_EQ(j["instances"].size(), 2u);
  EXPECT_EQ(j["instances"][1]["id"], "b");
  EXPECT_THROW(report_format_from_string("yaml"), ConfigError);
}

}  // namespace
}  // namespace tdrepair::eval
