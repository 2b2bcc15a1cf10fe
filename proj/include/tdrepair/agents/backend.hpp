#pragma once

#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <mutex>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

#include "json.hpp"

namespace tdrepair::agents {

enum class ReasoningEffort { kNone, kLow, kMedium, kHigh };

const char* to_string(ReasoningEffort e);
ReasoningEffort reasoning_effort_from_string(std::string_view s);  // throws ConfigError

struct BackendConfig {
  std::string provider_id = "mock";
  std::string model_id;
  ReasoningEffort reasoning_effort = ReasoningEffort::kNone;
  std::optional<double> temperature;
  int max_retries = 3;
  std::chrono::milliseconds request_timeout{120000};
  std::chrono::milliseconds backoff_initial{500};
  std::chrono::milliseconds backoff_max{30000};

  void validate() const;  // throws ConfigError
};

// Identifies a call in logs and mock scripts.
struct RequestTag {
  std::string instance_id;
  std::string agent;  // "coder" | "debugger" | "testgen"
  int attempt = 1;
};

struct AgentRequest {
  std::string system_prompt;  // may be empty
  std::string user_prompt;
  BackendConfig config;
  RequestTag tag;
};

struct AgentResponse {
  std::string text;
  std::chrono::milliseconds latency{0};
  int attempt_count = 0;
};

// Retryable transport failure raised by Backend::send.
class TransportError : public std::runtime_error {
 public:
  TransportError(const std::string& what, std::optional<int> status = std::nullopt)
      : std::runtime_error(what), status_(status) {}
  std::optional<int> status() const { return status_; }

 private:
  std::optional<int> status_;
};

// Token bucket shared by every request to one provider.
class RateLimiter {
 public:
  // rate <= 0 disables limiting.
  RateLimiter(double requests_per_second, double burst);
  void acquire();

 private:
  std::mutex mu_;
  double rate_, burst_, tokens_;
  std::chrono::steady_clock::time_point last_;
};

// Line-delimited record of every backend call. Thread-safe.
class CallLog {
 public:
  explicit CallLog(const std::filesystem::path& path);
  void append(const nlohmann::json& record);

 private:
  std::mutex mu_;
  std::ofstream out_;
};

// First 16 hex digits of SHA-256.
std::string short_hash(std::string_view data);

class Backend {
 public:
  virtual ~Backend() = default;

  virtual std::string provider_id() const = 0;

  // One transport attempt. Must be thread-safe. Throws TransportError for
  // retryable failures, CredentialError or BackendError otherwise.
  virtual std::string send(const AgentRequest& request) = 0;

  void set_call_log(std::shared_ptr<CallLog> log) { log_ = std::move(log); }
  void set_rate_limiter(std::shared_ptr<RateLimiter> limiter) { limiter_ = std::move(limiter); }

  // send() with exponential backoff over request.config.max_retries
  // retries; every call is logged. Throws BackendError (carrying the last
  // transport status) once retries are exhausted, CredentialError without
  // retrying, EmptyGenerationError for an empty completion.
  AgentResponse complete(const AgentRequest& request);

 private:
  std::shared_ptr<CallLog> log_;
  std::shared_ptr<RateLimiter> limiter_;
};

// Builds the backend named by config.provider_id: "mock" (requires
// mock_script) or a live provider (openai, anthropic, google) whose key is
// read from <PROVIDER>_API_KEY. Throws ConfigError for unknown providers
// and CredentialError for a missing key, before any request is made.
std::shared_ptr<Backend> make_backend(const BackendConfig& config, const std::filesystem::path& mock_script = {});

}  // namespace tdrepair::agents
