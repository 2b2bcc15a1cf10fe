#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "json.hpp"
#include "tdrepair/dataset/types.hpp"
#include "tdrepair/harness/executor.hpp"
#include "tdrepair/pipeline/pipeline.hpp"

namespace tdrepair::eval {

struct Breakdown {
  std::size_t passed_stage1 = 0;
  std::size_t passed_stage2 = 0;
  std::size_t failed = 0;

  bool operator==(const Breakdown&) const = default;
};

struct EvaluationSummary {
  std::size_t n = 0;
  std::size_t n_passed = 0;
  double pass_at_1 = 0;   // 100 * n_passed / n, unrounded
  double error_rate = 0;  // 100 - pass_at_1
  Breakdown breakdown;
  std::size_t infra_errors = 0;  // failed instances cut short by infrastructure

  bool operator==(const EvaluationSummary&) const = default;
};

// Throws EmptyCorpusError for no records.
EvaluationSummary pass_at_1(const std::vector<pipeline::PipelineRecord>& records);

// Percentage n_passed/n to one decimal, half-up, computed on integers.
std::string format_percent(std::size_t n_passed, std::size_t n);
// 100 minus the displayed Pass@1, so the two always add up to 100.0.
std::string format_error_rate(std::size_t n_passed, std::size_t n);

nlohmann::json summary_to_json(const EvaluationSummary& s);
EvaluationSummary summary_from_json(const nlohmann::json& j);  // throws nlohmann::json::exception

enum class ReportFormat { kMachine, kTable };

ReportFormat report_format_from_string(std::string_view s);  // "machine" | "table"; throws ConfigError

// machine: {"summary": {...}, "instances": [results rows]}
// table:   aligned text with Pass@1 / Error rate and the stage breakdown
void emit_report(const EvaluationSummary& summary, const std::vector<pipeline::PipelineRecord>& records,
                 ReportFormat format, std::ostream& out);
void emit_report(const EvaluationSummary& summary, const std::vector<pipeline::PipelineRecord>& records,
                 ReportFormat format, const std::filesystem::path& path);  // throws IoError

struct RecountMismatch {
  std::string instance_id;
  bool recorded_passed = false;
  bool recounted_passed = false;
  std::string detail;
};

struct RecountResult {
  EvaluationSummary recorded;
  std::size_t recounted_passed = 0;
  std::vector<RecountMismatch> mismatches;

  bool consistent() const { return mismatches.empty() && recounted_passed == recorded.n_passed; }
};

// Re-executes every final program against its instance suite and compares
// the pass set with what the records claim. Records must be in corpus order.
RecountResult recount(const std::vector<dataset::TaskInstance>& corpus,
                      const std::vector<pipeline::PipelineRecord>& records, const harness::Executor& executor,
                      const harness::ExecutionLimits& limits);

}  // namespace tdrepair::eval
