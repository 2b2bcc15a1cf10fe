#include "tdrepair/pipeline/ledger.hpp"

#include <regex>

#include "tdrepair/errors.hpp"

namespace tdrepair::pipeline {

namespace fs = std::filesystem;

Ledger::Ledger(const fs::path& path) : path_(path) {
  // A crash can leave a partial last line; start our records on a fresh one.
  bool needs_newline = false;
  if (std::ifstream in{path, std::ios::binary}) {
    in.seekg(0, std::ios::end);
    if (in.tellg() > 0) {
      in.seekg(-1, std::ios::end);
      needs_newline = in.get() != '\n';
    }
  }
  out_.open(path, std::ios::binary | std::ios::app);
  if (!out_) throw IoError("cannot open ledger " + path.string());
  if (needs_newline) out_ << '\n' << std::flush;
}

void Ledger::append(const nlohmann::json& record) {
  const std::string line = record.dump() + "\n";
  std::lock_guard lock(mu_);
  out_ << line << std::flush;
  if (!out_) throw IoError("write to ledger " + path_.string() + " failed");
}

namespace {

bool is_stage2(const std::string& stage) { return stage.rfind("stage2", 0) == 0; }

void apply(InstanceHistory& h, const nlohmann::json& rec) {
  const std::string type = rec.at("type").get<std::string>();
  if (type == kAttempt) {
    Attempt a{agents::program_from_json(rec.at("program")), harness::report_from_json(rec.at("report"))};
    if (a.program.instance_id != rec.at("instance_id").get<std::string>()) throw ConfigError("instance id mismatch");
    if (a.program.source.empty()) throw ConfigError("attempt without source");
    h.attempts.push_back(std::move(a));
  } else if (type == kInfraError) {
    const std::string stage = rec.at("stage").get<std::string>();
    (is_stage2(stage) ? h.stage2_infra_error : h.stage1_infra_error) = rec.at("message").get<std::string>();
  } else if (type == kRecheck) {
    harness::report_from_json(rec.at("report"));
    ++h.rechecks;
  } else if (type == kStage1Done) {
    rec.at("final_status").get<std::string>();
    h.stage1_done = true;
  } else if (type == kStage2Done) {
    rec.at("final_status").get<std::string>();
    h.stage2_done = true;
  } else {
    throw ConfigError("unknown record type '" + type + "'");
  }
}

}  // namespace

LedgerScan scan_ledger(const fs::path& path) {
  LedgerScan scan;
  std::ifstream in(path, std::ios::binary);
  if (!in) return scan;

  static const std::regex kIdPattern(R"re("instance_id"\s*:\s*"((?:[^"\\]|\\.)*)")re");
  std::map<std::string, bool> poisoned;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    ++scan.records;
    const auto rec = nlohmann::json::parse(line, nullptr, false);
    std::string id;
    if (rec.is_object() && rec.contains("instance_id") && rec["instance_id"].is_string()) {
      id = rec["instance_id"].get<std::string>();
    } else if (std::smatch m; std::regex_search(line, m, kIdPattern)) {
      id = nlohmann::json::parse("\"" + m[1].str() + "\"", nullptr, false).get<std::string>();
    } else {
      ++scan.unreadable_lines;
      continue;
    }

    if (rec.is_object() && rec.value("type", "") == kReset) {
      InstanceHistory& h = scan.instances[id];
      if (rec.value("scope", "all") == "stage2") {
        std::erase_if(h.attempts, [](const Attempt& a) { return is_stage2(a.program.stage); });
        h.stage2_done = false;
        h.stage2_infra_error.clear();
        h.rechecks = 0;
      } else {
        h = InstanceHistory{};
        poisoned[id] = false;
      }
      continue;
    }
    if (poisoned[id]) continue;
    try {
      if (rec.is_discarded() || !rec.is_object()) throw ConfigError("not a JSON object");
      apply(scan.instances[id], rec);
    } catch (const std::exception&) {
      poisoned[id] = true;
      scan.instances.erase(id);
    }
  }
  for (const auto& [id, bad] : poisoned) {
    if (bad) {
      scan.instances.erase(id);
      scan.corrupt_instances.push_back(id);
    }
  }
  return scan;
}

}  // namespace tdrepair::pipeline
