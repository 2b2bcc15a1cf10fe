#pragma once

#include <vector>

#include "json.hpp"

#include "tdrepair/dataset/corpus.hpp"

namespace tdrepair::dataset {

struct AugmentStats {
  std::size_t instances = 0;
  std::size_t matched = 0;     // instances whose function name has external tests
  std::size_t appended = 0;    // external tests added across all suites
  std::size_t overlapping = 0; // external tests skipped as already present

  nlohmann::json to_json() const;
};

// Appends external tests whose normalized form is not yet in the suite.
// Existing cases are never removed or reordered.
std::vector<TaskInstance> augment(const std::vector<TaskInstance>& instances, const ExternalTests& ext,
                                  AugmentStats* stats = nullptr);

}  // namespace tdrepair::dataset
