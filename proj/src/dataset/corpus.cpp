#include "tdrepair/dataset/corpus.hpp"

#include <fstream>
#include <istream>
#include <set>

#include "tdrepair/errors.hpp"
#include "tdrepair/harness/assert_syntax.hpp"
#include "tdrepair/syntax/tokenizer.hpp"

namespace tdrepair::dataset {

using nlohmann::json;

namespace {

bool blank(const std::string& line) {
  return line.find_first_not_of(" \t\r\n") == std::string::npos;
}

const std::string& require_string(const json& rec, const char* key, std::size_t line, const std::string& id) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) throw SchemaError(line, id, std::string("missing ") + key);
  if (!it->is_string()) throw SchemaError(line, id, std::string(key) + " must be a string");
  return it->get_ref<const std::string&>();
}

std::vector<std::string> require_string_array(const json& rec, const char* key, std::size_t line,
                                              const std::string& id) {
  auto it = rec.find(key);
  if (it == rec.end() || it->is_null()) throw SchemaError(line, id, std::string("missing ") + key);
  if (!it->is_array()) throw SchemaError(line, id, std::string(key) + " must be an array of strings");
  std::vector<std::string> out;
  for (const auto& v : *it) {
    if (!v.is_string()) throw SchemaError(line, id, std::string(key) + " must be an array of strings");
    out.push_back(v.get<std::string>());
  }
  return out;
}

std::size_t expected_tests(CorpusSchema schema) {
  switch (schema) {
    case CorpusSchema::kDevSplit: return 3;
    case CorpusSchema::kTestSplit: return 1;
    case CorpusSchema::kGeneric: break;
  }
  return 0;
}

TaskInstance parse_instance(const std::string& text, std::size_t line, CorpusSchema schema) {
  json rec;
  try {
    rec = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError(line, "", std::string("malformed record: ") + e.what());
  }
  if (!rec.is_object()) throw SchemaError(line, "", "record is not an object");

  TaskInstance inst;
  inst.id = require_string(rec, "id", line, "");
  if (inst.id.empty()) throw SchemaError(line, "", "empty id");
  inst.instruction = require_string(rec, "instruction", line, inst.id);
  inst.function_name = require_string(rec, "function_name", line, inst.id);
  if (!syntax::is_identifier(inst.function_name) || syntax::is_keyword(inst.function_name)) {
    throw SchemaError(line, inst.id, "function_name '" + inst.function_name + "' is not an identifier");
  }
  if (rec.contains("arg_names")) {
    inst.arg_names = require_string_array(rec, "arg_names", line, inst.id);
    for (const auto& a : inst.arg_names) {
      if (!syntax::is_identifier(a) || syntax::is_keyword(a)) {
        throw SchemaError(line, inst.id, "argument name '" + a + "' is not an identifier");
      }
    }
  }

  const auto tests = require_string_array(rec, "tests", line, inst.id);
  if (tests.empty()) throw SchemaError(line, inst.id, "record has no tests");

  std::vector<Provenance> provenance(tests.size(), Provenance::kProvided);
  if (rec.contains("test_provenance")) {
    const auto tags = require_string_array(rec, "test_provenance", line, inst.id);
    if (tags.size() != tests.size()) throw SchemaError(line, inst.id, "test_provenance length differs from tests");
    for (std::size_t i = 0; i < tags.size(); ++i) {
      try {
        provenance[i] = provenance_from_string(tags[i]);
      } catch (const ConfigError& e) {
        throw SchemaError(line, inst.id, e.what());
      }
    }
  }

  for (std::size_t i = 0; i < tests.size(); ++i) {
    try {
      inst.tests.add(TestCase::make(tests[i], provenance[i]));
    } catch (const ValidationError& e) {
      throw SchemaError(line, inst.id, "test " + std::to_string(i) + ": " + e.what());
    } catch (const ContractViolation& e) {
      throw SchemaError(line, inst.id, e.what());
    }
  }

  if (const std::size_t want = expected_tests(schema); want != 0) {
    const std::size_t got = inst.tests.count(Provenance::kProvided);
    if (got != want) {
      throw SchemaError(line, inst.id,
                        "expected " + std::to_string(want) + " provided tests, found " + std::to_string(got));
    }
  }
  return inst;
}

std::ifstream open_input(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read " + path.string());
  return in;
}

}  // namespace

CorpusSchema schema_from_string(std::string_view s) {
  if (s == "generic") return CorpusSchema::kGeneric;
  if (s == "dev") return CorpusSchema::kDevSplit;
  if (s == "test") return CorpusSchema::kTestSplit;
  throw ConfigError("unknown corpus schema '" + std::string(s) + "' (expected generic, dev or test)");
}

std::vector<TaskInstance> read_instances(std::istream& in, CorpusSchema schema) {
  std::vector<TaskInstance> out;
  std::set<std::string> ids;
  std::string text;
  std::size_t line = 0;
  while (std::getline(in, text)) {
    ++line;
    if (blank(text)) continue;
    TaskInstance inst = parse_instance(text, line, schema);
    if (!ids.insert(inst.id).second) throw SchemaError(line, inst.id, "duplicate id");
    out.push_back(std::move(inst));
  }
  if (out.empty()) throw EmptyCorpusError("corpus contains no records");
  return out;
}

std::vector<TaskInstance> load_instances(const std::filesystem::path& path, CorpusSchema schema) {
  auto in = open_input(path);
  return read_instances(in, schema);
}

json instance_to_json(const TaskInstance& inst) {
  json rec = {{"id", inst.id},
              {"instruction", inst.instruction},
              {"function_name", inst.function_name},
              {"arg_names", inst.arg_names},
              {"tests", inst.tests.sources()}};
  if (inst.tests.count(Provenance::kProvided) != inst.tests.size()) {
    json tags = json::array();
    for (const auto& c : inst.tests.cases()) tags.push_back(to_string(c.provenance));
    rec["test_provenance"] = std::move(tags);
  }
  return rec;
}

void write_instances(std::ostream& out, const std::vector<TaskInstance>& instances) {
  for (const auto& inst : instances) out << instance_to_json(inst).dump() << '\n';
}

void save_instances(const std::filesystem::path& path, const std::vector<TaskInstance>& instances) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write " + path.string());
  write_instances(out, instances);
  out.flush();
  if (!out) throw IoError("write failed for " + path.string());
}

json LoadReport::to_json() const {
  return {{"records", records},
          {"malformed_records", malformed_records},
          {"loaded", loaded},
          {"dropped", dropped},
          {"functions", functions}};
}

ExternalTests read_external_tests(std::istream& in, LoadReport* report) {
  LoadReport r;
  ExternalTests out;
  std::string text;
  while (std::getline(in, text)) {
    if (blank(text)) continue;
    ++r.records;
    json rec = json::parse(text, nullptr, /*allow_exceptions=*/false);
    if (!rec.is_object() || !rec.contains("function_name") || !rec["function_name"].is_string() ||
        !rec.contains("tests") || !rec["tests"].is_array()) {
      ++r.malformed_records;
      continue;
    }
    const std::string name = rec["function_name"].get<std::string>();
    for (const auto& t : rec["tests"]) {
      if (!t.is_string()) {
        ++r.dropped;
        continue;
      }
      const auto check = harness::check_assert_syntax(t.get_ref<const std::string&>());
      if (!check) {
        ++r.dropped;
        continue;
      }
      out[name].push_back(TestCase{check.accepted->source, Provenance::kExternal, check.accepted->normalized});
      ++r.loaded;
    }
  }
  r.functions = out.size();
  if (report) *report = r;
  if (out.empty()) throw EmptyCorpusError("external test corpus has no usable records");
  return out;
}

ExternalTests load_external_tests(const std::filesystem::path& path, LoadReport* report) {
  auto in = open_input(path);
  return read_external_tests(in, report);
}

}  // namespace tdrepair::dataset
