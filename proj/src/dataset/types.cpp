#include "tdrepair/dataset/types.hpp"

#include <algorithm>

#include "tdrepair/errors.hpp"
#include "tdrepair/harness/assert_syntax.hpp"

namespace tdrepair::dataset {

const char* to_string(Provenance p) {
  switch (p) {
    case Provenance::kProvided: return "provided";
    case Provenance::kExternal: return "external";
    case Provenance::kGenerated: return "generated";
  }
  return "provided";
}

Provenance provenance_from_string(std::string_view s) {
  if (s == "provided") return Provenance::kProvided;
  if (s == "external") return Provenance::kExternal;
  if (s == "generated") return Provenance::kGenerated;
  throw ConfigError("unknown test provenance '" + std::string(s) + "'");
}

TestCase TestCase::make(std::string_view source, Provenance provenance) {
  harness::ValidatedAssert v = harness::validate_assert_syntax(source);
  return TestCase{std::move(v.source), provenance, std::move(v.normalized)};
}

bool TestSuite::add(TestCase tc) {
  if (contains(tc.normalized_form)) return false;
  if (tc.provenance == Provenance::kProvided && !cases_.empty() &&
      cases_.back().provenance != Provenance::kProvided) {
    throw ContractViolation("provided test added after augmented tests: " + tc.assert_source);
  }
  cases_.push_back(std::move(tc));
  return true;
}

bool TestSuite::contains(std::string_view normalized_form) const {
  return std::any_of(cases_.begin(), cases_.end(),
                     [&](const TestCase& c) { return c.normalized_form == normalized_form; });
}

std::size_t TestSuite::count(Provenance p) const {
  return static_cast<std::size_t>(
      std::count_if(cases_.begin(), cases_.end(), [p](const TestCase& c) { return c.provenance == p; }));
}

std::vector<std::string> TestSuite::sources() const {
  std::vector<std::string> out;
  out.reserve(cases_.size());
  for (const auto& c : cases_) out.push_back(c.assert_source);
  return out;
}

std::string normalize_test(std::string_view assert_source) {
  return harness::validate_assert_syntax(assert_source).normalized;
}

}  // namespace tdrepair::dataset
