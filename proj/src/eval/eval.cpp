#include "tdrepair/eval/eval.hpp"

#include <fstream>
#include <iomanip>
#include <ostream>
#include <sstream>

#include "tdrepair/errors.hpp"

namespace tdrepair::eval {

using pipeline::FinalStatus;
using pipeline::PipelineRecord;

EvaluationSummary pass_at_1(const std::vector<PipelineRecord>& records) {
  if (records.empty()) throw EmptyCorpusError("no records to evaluate");
  EvaluationSummary s;
  s.n = records.size();
  for (const auto& r : records) {
    if (r.final_status == FinalStatus::kPassed) {
      ++s.n_passed;
      const auto* p = r.final_program();
      if (p && p->stage.rfind("stage2", 0) == 0) {
        ++s.breakdown.passed_stage2;
      } else {
        ++s.breakdown.passed_stage1;
      }
    } else {
      ++s.breakdown.failed;
      if (r.has_infra_error()) ++s.infra_errors;
    }
  }
  s.pass_at_1 = 100.0 * static_cast<double>(s.n_passed) / static_cast<double>(s.n);
  s.error_rate = 100.0 - s.pass_at_1;
  return s;
}

namespace {

std::uint64_t tenths(std::size_t n_passed, std::size_t n) {
  if (n == 0) throw EmptyCorpusError("percentage of an empty set");
  const std::uint64_t p = n_passed, d = n;
  return (2000 * p + d) / (2 * d);
}

std::string render_tenths(std::uint64_t t) { return std::to_string(t / 10) + "." + std::to_string(t % 10); }

}  // namespace

std::string format_percent(std::size_t n_passed, std::size_t n) { return render_tenths(tenths(n_passed, n)); }

std::string format_error_rate(std::size_t n_passed, std::size_t n) {
  return render_tenths(1000 - tenths(n_passed, n));
}

nlohmann::json summary_to_json(const EvaluationSummary& s) {
  return {{"n", s.n},
          {"n_passed", s.n_passed},
          {"pass_at_1", s.pass_at_1},
          {"error_rate", s.error_rate},
          {"pass_at_1_display", s.n ? format_percent(s.n_passed, s.n) : "0.0"},
          {"error_rate_display", s.n ? format_error_rate(s.n_passed, s.n) : "100.0"},
          {"breakdown",
           {{"passed_stage1", s.breakdown.passed_stage1},
            {"passed_stage2", s.breakdown.passed_stage2},
            {"failed", s.breakdown.failed}}},
          {"infra_errors", s.infra_errors}};
}

EvaluationSummary summary_from_json(const nlohmann::json& j) {
  EvaluationSummary s;
  s.n = j.at("n").get<std::size_t>();
  s.n_passed = j.at("n_passed").get<std::size_t>();
  s.pass_at_1 = j.at("pass_at_1").get<double>();
  s.error_rate = j.at("error_rate").get<double>();
  const auto& b = j.at("breakdown");
  s.breakdown.passed_stage1 = b.at("passed_stage1").get<std::size_t>();
  s.breakdown.passed_stage2 = b.at("passed_stage2").get<std::size_t>();
  s.breakdown.failed = b.at("failed").get<std::size_t>();
  s.infra_errors = j.value("infra_errors", std::size_t{0});
  return s;
}

ReportFormat report_format_from_string(std::string_view s) {
  if (s == "machine" || s == "json") return ReportFormat::kMachine;
  if (s == "table") return ReportFormat::kTable;
  throw ConfigError("unknown report format '" + std::string(s) + "' (expected machine or table)");
}

void emit_report(const EvaluationSummary& summary, const std::vector<PipelineRecord>& records, ReportFormat format,
                 std::ostream& out) {
  if (format == ReportFormat::kMachine) {
    nlohmann::json rows = nlohmann::json::array();
    for (const auto& r : records) rows.push_back(pipeline::record_to_json(r));
    out << nlohmann::json{{"summary", summary_to_json(summary)}, {"instances", rows}}.dump(2) << '\n';
    return;
  }
  const std::string pass = format_percent(summary.n_passed, summary.n);
  const std::string err = format_error_rate(summary.n_passed, summary.n);
  out << std::right << std::setw(8) << "N" << std::setw(8) << "Passed" << std::setw(8) << "Pass@1" << std::setw(12)
      << "Error rate" << '\n'
      << std::setw(8) << summary.n << std::setw(8) << summary.n_passed << std::setw(8) << pass << std::setw(12) << err
      << "\n\n"
      << std::left << std::setw(16) << "Breakdown" << std::right << std::setw(8) << "Count" << '\n'
      << std::left << std::setw(16) << "passed_stage1" << std::right << std::setw(8) << summary.breakdown.passed_stage1
      << '\n'
      << std::left << std::setw(16) << "passed_stage2" << std::right << std::setw(8) << summary.breakdown.passed_stage2
      << '\n'
      << std::left << std::setw(16) << "failed" << std::right << std::setw(8) << summary.breakdown.failed << '\n';
  if (summary.infra_errors > 0) {
    out << std::left << std::setw(16) << "  infra_error" << std::right << std::setw(8) << summary.infra_errors << '\n';
  }
}

void emit_report(const EvaluationSummary& summary, const std::vector<PipelineRecord>& records, ReportFormat format,
                 const std::filesystem::path& path) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write report " + path.string());
  emit_report(summary, records, format, out);
  if (!out.flush()) throw IoError("cannot write report " + path.string());
}

RecountResult recount(const std::vector<dataset::TaskInstance>& corpus, const std::vector<PipelineRecord>& records,
                      const harness::Executor& executor, const harness::ExecutionLimits& limits) {
  if (corpus.size() != records.size()) {
    throw ContractViolation("recount needs one record per corpus instance (" + std::to_string(corpus.size()) +
                            " vs " + std::to_string(records.size()) + ")");
  }
  RecountResult out;
  out.recorded = pass_at_1(records);
  for (std::size_t i = 0; i < corpus.size(); ++i) {
    const PipelineRecord& r = records[i];
    if (r.instance_id != corpus[i].id) throw ContractViolation("record order differs from corpus at " + r.instance_id);
    const bool claimed = r.final_status == FinalStatus::kPassed;
    bool actual = false;
    std::string detail;
    if (const auto* p = r.final_program()) {
      try {
        const auto report = executor.run_tests(p->source, corpus[i].tests.sources(), limits);
        actual = report.passed();
        if (!actual) {
          std::size_t failing = report.outcomes.size() - report.count(harness::TestStatus::kPass);
          detail = std::to_string(failing) + " of " + std::to_string(report.outcomes.size()) + " tests fail";
        }
      } catch (const InfrastructureError& e) {
        detail = std::string("runner error: ") + e.what();
      }
    } else {
      detail = "no program";
    }
    if (actual) ++out.recounted_passed;
    if (actual != claimed) out.mismatches.push_back({r.instance_id, claimed, actual, detail});
  }
  return out;
}

}  // namespace tdrepair::eval
