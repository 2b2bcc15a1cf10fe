#pragma once

#include <filesystem>
#include <iosfwd>
#include <mutex>
#include <string>
#include <vector>

#include "tdrepair/agents/backend.hpp"

namespace tdrepair::agents {

// Scripted backend for offline runs. A script is line-delimited JSON:
//
//   {"instance_id": "t1", "template_id": "coder", "attempt": 2,
//    "prompt_contains": "...", "response": "...",
//    "fail_times": 0, "error": "transient" | "auth"}
//
// instance_id and template_id default to "*" (any); attempt 0 or absent
// matches any attempt. The most specific matching entry wins, earlier lines
// break ties. fail_times makes the entry raise a transient error on its first
// N uses; "error" makes it fail on every use. A request with no matching
// entry is a non-retryable BackendError.
class MockBackend : public Backend {
 public:
  struct Entry {
    std::string instance_id = "*";
    std::string template_id = "*";
    int attempt = 0;
    std::string prompt_contains;
    std::string response;
    int fail_times = 0;
    std::string error;
  };

  struct Call {
    RequestTag tag;
    std::string system_prompt;
    std::string user_prompt;
  };

  explicit MockBackend(std::vector<Entry> entries);
  MockBackend(const MockBackend& other);

  static MockBackend load(const std::filesystem::path& path);  // throws IoError, ConfigError
  static MockBackend parse(std::istream& in);                  // throws ConfigError

  std::string provider_id() const override { return "mock"; }
  std::string send(const AgentRequest& request) override;

  std::vector<Call> calls() const;
  std::size_t call_count(std::string_view agent) const;

 private:
  std::vector<Entry> entries_;
  mutable std::mutex mu_;
  std::vector<int> uses_;
  std::vector<Call> calls_;
};

}  // namespace tdrepair::agents
