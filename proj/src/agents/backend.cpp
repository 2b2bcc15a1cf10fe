#include "tdrepair/agents/backend.hpp"

#include <openssl/evp.h>

#include <algorithm>
#include <thread>

#include "tdrepair/agents/http_backend.hpp"
#include "tdrepair/agents/mock_backend.hpp"
#include "tdrepair/errors.hpp"

namespace tdrepair::agents {

using Clock = std::chrono::steady_clock;
using std::chrono::milliseconds;

const char* to_string(ReasoningEffort e) {
  switch (e) {
    case ReasoningEffort::kNone: return "none";
    case ReasoningEffort::kLow: return "low";
    case ReasoningEffort::kMedium: return "medium";
    case ReasoningEffort::kHigh: return "high";
  }
  return "none";
}

ReasoningEffort reasoning_effort_from_string(std::string_view s) {
  for (auto e : {ReasoningEffort::kNone, ReasoningEffort::kLow, ReasoningEffort::kMedium, ReasoningEffort::kHigh}) {
    if (s == to_string(e)) return e;
  }
  throw ConfigError("unknown reasoning effort '" + std::string(s) + "' (expected low, medium, high or none)");
}

void BackendConfig::validate() const {
  if (max_retries < 0) throw ConfigError("max_retries must be >= 0");
  if (request_timeout.count() <= 0) throw ConfigError("request_timeout must be positive");
  if (backoff_initial.count() < 0 || backoff_max.count() < 0) throw ConfigError("backoff must be >= 0");
}

RateLimiter::RateLimiter(double requests_per_second, double burst)
    : rate_(requests_per_second), burst_(std::max(1.0, burst)), tokens_(std::max(1.0, burst)), last_(Clock::now()) {}

void RateLimiter::acquire() {
  if (rate_ <= 0) return;
  std::unique_lock lock(mu_);
  for (;;) {
    const auto now = Clock::now();
    tokens_ = std::min(burst_, tokens_ + std::chrono::duration<double>(now - last_).count() * rate_);
    last_ = now;
    if (tokens_ >= 1.0) {
      tokens_ -= 1.0;
      return;
    }
    const auto wait = std::chrono::duration<double>((1.0 - tokens_) / rate_);
    lock.unlock();
    std::this_thread::sleep_for(wait);
    lock.lock();
  }
}

CallLog::CallLog(const std::filesystem::path& path) : out_(path, std::ios::binary | std::ios::app) {
  if (!out_) throw IoError("cannot open call log " + path.string());
}

void CallLog::append(const nlohmann::json& record) {
  const std::string line = record.dump() + "\n";
  std::lock_guard lock(mu_);
  out_ << line << std::flush;
}

std::string short_hash(std::string_view data) {
  unsigned char digest[EVP_MAX_MD_SIZE];
  unsigned int len = 0;
  if (EVP_Digest(data.data(), data.size(), digest, &len, EVP_sha256(), nullptr) != 1) {
    throw Error("SHA-256 digest failed");
  }
  static constexpr char kHex[] = "0123456789abcdef";
  std::string out;
  for (unsigned int i = 0; i < 8 && i < len; ++i) {
    out += kHex[digest[i] >> 4];
    out += kHex[digest[i] & 0xF];
  }
  return out;
}

AgentResponse Backend::complete(const AgentRequest& request) {
  request.config.validate();
  const auto start = Clock::now();
  const int max_attempts = request.config.max_retries + 1;
  std::optional<int> last_status;
  std::string last_error;
  AgentResponse response;

  auto log = [&](bool ok, const std::string& error) {
    if (!log_) return;
    nlohmann::json rec = {{"provider", provider_id()},
                          {"model", request.config.model_id},
                          {"template_id", request.tag.agent},
                          {"instance_id", request.tag.instance_id},
                          {"attempt", request.tag.attempt},
                          {"attempt_count", response.attempt_count},
                          {"latency_ms", std::chrono::duration_cast<milliseconds>(Clock::now() - start).count()},
                          {"system_prompt_sha256", short_hash(request.system_prompt)},
                          {"user_prompt_sha256", short_hash(request.user_prompt)},
                          {"ok", ok}};
    if (ok) {
      rec["response_sha256"] = short_hash(response.text);
    } else {
      rec["error"] = error;
      rec["last_status"] = last_status ? nlohmann::json(*last_status) : nlohmann::json(nullptr);
    }
    log_->append(rec);
  };

  milliseconds backoff = request.config.backoff_initial;
  for (int attempt = 1; attempt <= max_attempts; ++attempt) {
    response.attempt_count = attempt;
    if (limiter_) limiter_->acquire();
    try {
      response.text = send(request);
    } catch (const TransportError& e) {
      last_status = e.status();
      last_error = e.what();
      if (attempt < max_attempts) {
        std::this_thread::sleep_for(backoff);
        backoff = std::min(backoff * 2, request.config.backoff_max);
      }
      continue;
    } catch (const BackendError& e) {
      log(false, e.what());
      throw;
    }
    response.latency = std::chrono::duration_cast<milliseconds>(Clock::now() - start);
    if (response.text.empty()) {
      log(false, "empty completion");
      throw EmptyGenerationError("backend returned an empty completion");
    }
    log(true, "");
    return response;
  }
  const std::string what = provider_id() + " request failed after " + std::to_string(max_attempts) +
                           " attempt(s): " + last_error;
  log(false, what);
  throw BackendError(what, last_status);
}

std::shared_ptr<Backend> make_backend(const BackendConfig& config, const std::filesystem::path& mock_script) {
  config.validate();
  if (config.provider_id == "mock") {
    if (mock_script.empty()) throw ConfigError("the mock backend needs a mock script");
    return std::make_shared<MockBackend>(MockBackend::load(mock_script));
  }
  if (const auto kind = http_provider_from_string(config.provider_id)) {
    return std::make_shared<HttpBackend>(*kind, HttpBackend::credentials_from_env(*kind));
  }
  throw ConfigError("unknown backend provider '" + config.provider_id +
                    "' (expected mock, openai, anthropic or google)");
}

}  // namespace tdrepair::agents
