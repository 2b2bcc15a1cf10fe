#pragma once

#include <string>
#include <string_view>
#include <vector>

namespace tdrepair::dataset {

enum class Provenance { kProvided, kExternal, kGenerated };

const char* to_string(Provenance p);
Provenance provenance_from_string(std::string_view s);  // throws ConfigError

struct TestCase {
  std::string assert_source;
  Provenance provenance = Provenance::kProvided;
  std::string normalized_form;

  // Validates the assert and fills normalized_form. Throws ValidationError.
  static TestCase make(std::string_view source, Provenance provenance);

  bool operator==(const TestCase&) const = default;
};

// Ordered, duplicate-free list of tests. Provided cases always come first.
class TestSuite {
 public:
  TestSuite() = default;

  // Returns false (and leaves the suite untouched) when a case with the same
  // normalized form is already present. Throws ContractViolation when a
  // provided case would follow an augmented one.
  bool add(TestCase tc);
  bool contains(std::string_view normalized_form) const;

  const std::vector<TestCase>& cases() const { return cases_; }
  std::size_t size() const { return cases_.size(); }
  bool empty() const { return cases_.empty(); }
  const TestCase& operator[](std::size_t i) const { return cases_[i]; }
  std::size_t count(Provenance p) const;

  std::vector<std::string> sources() const;

  bool operator==(const TestSuite&) const = default;

 private:
  std::vector<TestCase> cases_;
};

struct TaskInstance {
  std::string id;
  std::string instruction;
  std::string function_name;
  std::vector<std::string> arg_names;
  TestSuite tests;

  bool operator==(const TaskInstance&) const = default;
};

// Canonical form of one assert; equal for whitespace/parenthesization
// variants. Throws ValidationError on input that fails the assert gate.
std::string normalize_test(std::string_view assert_source);

}  // namespace tdrepair::dataset
