#include "tdrepair/dataset/augment.hpp"

namespace tdrepair::dataset {

nlohmann::json AugmentStats::to_json() const {
  return {{"instances", instances}, {"matched", matched}, {"appended", appended}, {"overlapping", overlapping}};
}

std::vector<TaskInstance> augment(const std::vector<TaskInstance>& instances, const ExternalTests& ext,
                                  AugmentStats* stats) {
  AugmentStats s;
  std::vector<TaskInstance> out = instances;
  for (auto& inst : out) {
    ++s.instances;
    auto it = ext.find(inst.function_name);
    if (it == ext.end()) continue;
    ++s.matched;
    for (const TestCase& tc : it->second) {
      TestCase copy = tc;
      copy.provenance = Provenance::kExternal;
      if (inst.tests.add(std::move(copy))) {
        ++s.appended;
      } else {
        ++s.overlapping;
      }
    }
  }
  if (stats) *stats = s;
  return out;
}

}  // namespace tdrepair::dataset
