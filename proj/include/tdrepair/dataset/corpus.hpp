#pragma once

#include <filesystem>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "json.hpp"

#include "tdrepair/dataset/types.hpp"

namespace tdrepair::dataset {

enum class CorpusSchema {
  kGeneric,   // one or more tests per record
  kDevSplit,  // exactly three provided tests
  kTestSplit  // exactly one provided test
};

CorpusSchema schema_from_string(std::string_view s);  // "generic" | "dev" | "test"

// One JSON object per line:
//   {"id", "instruction", "function_name", "arg_names", "tests"}
// plus an optional "test_provenance" array written by serialize_instances
// for augmented corpora. Blank lines are skipped.
std::vector<TaskInstance> load_instances(const std::filesystem::path& path,
                                         CorpusSchema schema = CorpusSchema::kGeneric);
std::vector<TaskInstance> read_instances(std::istream& in, CorpusSchema schema = CorpusSchema::kGeneric);

nlohmann::json instance_to_json(const TaskInstance& inst);
void write_instances(std::ostream& out, const std::vector<TaskInstance>& instances);
void save_instances(const std::filesystem::path& path, const std::vector<TaskInstance>& instances);

using ExternalTests = std::map<std::string, std::vector<TestCase>>;

struct LoadReport {
  std::size_t records = 0;            // non-blank lines seen
  std::size_t malformed_records = 0;  // not JSON or wrong shape
  std::size_t loaded = 0;             // asserts kept
  std::size_t dropped = 0;            // asserts failing validation
  std::size_t functions = 0;          // distinct function names kept

  nlohmann::json to_json() const;
};

// {"function_name": str, "tests": [str]} per line. Records sharing a
// function name are merged in file order.
ExternalTests load_external_tests(const std::filesystem::path& path, LoadReport* report = nullptr);
ExternalTests read_external_tests(std::istream& in, LoadReport* report = nullptr);

}  // namespace tdrepair::dataset
