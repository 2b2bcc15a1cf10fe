#include "tdrepair/agents/http_backend.hpp"

#include <cstdlib>

#include "httplib.h"
#include "tdrepair/errors.hpp"

namespace tdrepair::agents {
namespace {

constexpr int kMaxOutputTokens = 8192;

struct ProviderInfo {
  const char* id;
  const char* key_var;
  const char* alt_key_var;
  const char* base_var;
  const char* default_base;
};

const ProviderInfo& info(HttpProvider p) {
  static const ProviderInfo kOpenAI{"openai", "OPENAI_API_KEY", nullptr, "OPENAI_BASE_URL", "https://api.openai.com"};
  static const ProviderInfo kAnthropic{"anthropic", "ANTHROPIC_API_KEY", nullptr, "ANTHROPIC_BASE_URL",
                                       "https://api.anthropic.com"};
  static const ProviderInfo kGoogle{"google", "GOOGLE_API_KEY", "GEMINI_API_KEY", "GOOGLE_BASE_URL",
                                    "https://generativelanguage.googleapis.com"};
  switch (p) {
    case HttpProvider::kOpenAI: return kOpenAI;
    case HttpProvider::kAnthropic: return kAnthropic;
    case HttpProvider::kGoogle: return kGoogle;
  }
  return kOpenAI;
}

std::string env_or_empty(const char* name) {
  if (!name) return {};
  const char* v = std::getenv(name);
  return v ? v : "";
}

int thinking_budget(ReasoningEffort e) {
  switch (e) {
    case ReasoningEffort::kLow: return 2048;
    case ReasoningEffort::kMedium: return 8192;
    case ReasoningEffort::kHigh: return 16384;
    case ReasoningEffort::kNone: return 0;
  }
  return 0;
}

}  // namespace

const char* to_string(HttpProvider p) { return info(p).id; }

std::optional<HttpProvider> http_provider_from_string(std::string_view s) {
  for (auto p : {HttpProvider::kOpenAI, HttpProvider::kAnthropic, HttpProvider::kGoogle}) {
    if (s == info(p).id) return p;
  }
  return std::nullopt;
}

HttpCredentials HttpBackend::credentials_from_env(HttpProvider provider) {
  const ProviderInfo& pi = info(provider);
  HttpCredentials c;
  c.api_key = env_or_empty(pi.key_var);
  if (c.api_key.empty()) c.api_key = env_or_empty(pi.alt_key_var);
  if (c.api_key.empty()) {
    throw CredentialError(std::string("provider '") + pi.id + "' needs " + pi.key_var + " in the environment");
  }
  c.base_url = env_or_empty(pi.base_var);
  return c;
}

HttpBackend::HttpBackend(HttpProvider provider, HttpCredentials credentials)
    : provider_(provider), creds_(std::move(credentials)) {
  std::string base = creds_.base_url.empty() ? info(provider_).default_base : creds_.base_url;
  while (!base.empty() && base.back() == '/') base.pop_back();
  const auto scheme_end = base.find("://");
  if (scheme_end == std::string::npos) throw ConfigError("base URL must include a scheme: " + base);
  const auto path_start = base.find('/', scheme_end + 3);
  origin_ = base.substr(0, path_start);
  prefix_ = path_start == std::string::npos ? "" : base.substr(path_start);
}

std::string HttpBackend::request_path(const AgentRequest& request) const {
  switch (provider_) {
    case HttpProvider::kOpenAI: return prefix_ + "/v1/chat/completions";
    case HttpProvider::kAnthropic: return prefix_ + "/v1/messages";
    case HttpProvider::kGoogle: return prefix_ + "/v1beta/models/" + request.config.model_id + ":generateContent";
  }
  return prefix_;
}

nlohmann::json HttpBackend::request_body(const AgentRequest& request) const {
  const BackendConfig& cfg = request.config;
  nlohmann::json body;
  switch (provider_) {
    case HttpProvider::kOpenAI: {
      nlohmann::json messages = nlohmann::json::array();
      if (!request.system_prompt.empty()) messages.push_back({{"role", "system"}, {"content", request.system_prompt}});
      messages.push_back({{"role", "user"}, {"content", request.user_prompt}});
      body = {{"model", cfg.model_id}, {"messages", messages}};
      if (cfg.reasoning_effort != ReasoningEffort::kNone) body["reasoning_effort"] = to_string(cfg.reasoning_effort);
      if (cfg.temperature) body["temperature"] = *cfg.temperature;
      break;
    }
    case HttpProvider::kAnthropic: {
      const int budget = thinking_budget(cfg.reasoning_effort);
      body = {{"model", cfg.model_id},
              {"max_tokens", kMaxOutputTokens + budget},
              {"messages", nlohmann::json::array({{{"role", "user"}, {"content", request.user_prompt}}})}};
      if (!request.system_prompt.empty()) body["system"] = request.system_prompt;
      if (budget > 0) {
        body["thinking"] = {{"type", "enabled"}, {"budget_tokens", budget}};
      } else if (cfg.temperature) {
        body["temperature"] = *cfg.temperature;
      }
      break;
    }
    case HttpProvider::kGoogle: {
      body = {{"contents", nlohmann::json::array(
                               {{{"role", "user"}, {"parts", nlohmann::json::array({{{"text", request.user_prompt}}})}}})}};
      if (!request.system_prompt.empty()) {
        body["systemInstruction"] = {{"parts", nlohmann::json::array({{{"text", request.system_prompt}}})}};
      }
      nlohmann::json gen = nlohmann::json::object();
      if (cfg.temperature) gen["temperature"] = *cfg.temperature;
      if (cfg.reasoning_effort != ReasoningEffort::kNone) {
        gen["thinkingConfig"] = {{"thinkingBudget", thinking_budget(cfg.reasoning_effort)}};
      }
      if (!gen.empty()) body["generationConfig"] = gen;
      break;
    }
  }
  return body;
}

std::string HttpBackend::extract_text(HttpProvider provider, const nlohmann::json& body) {
  std::string text;
  try {
    switch (provider) {
      case HttpProvider::kOpenAI: {
        const auto& content = body.at("choices").at(0).at("message").at("content");
        if (!content.is_null()) text = content.get<std::string>();
        break;
      }
      case HttpProvider::kAnthropic:
        for (const auto& block : body.at("content")) {
          if (block.value("type", "") == "text") text += block.at("text").get<std::string>();
        }
        break;
      case HttpProvider::kGoogle:
        for (const auto& part : body.at("candidates").at(0).at("content").at("parts")) {
          if (part.value("thought", false)) continue;
          if (part.contains("text")) text += part.at("text").get<std::string>();
        }
        break;
    }
  } catch (const nlohmann::json::exception& e) {
    throw BackendError(std::string(to_string(provider)) + ": unexpected response shape: " + e.what());
  }
  return text;
}

std::string HttpBackend::send(const AgentRequest& request) {
  if (request.config.model_id.empty()) throw ConfigError(provider_id() + " backend needs a model id");

  httplib::Client client(origin_);
  const auto timeout = request.config.request_timeout;
  const auto secs = static_cast<time_t>(timeout.count() / 1000);
  const auto usecs = static_cast<time_t>((timeout.count() % 1000) * 1000);
  client.set_connection_timeout(secs, usecs);
  client.set_read_timeout(secs, usecs);
  client.set_write_timeout(secs, usecs);

  httplib::Headers headers;
  switch (provider_) {
    case HttpProvider::kOpenAI: headers.emplace("Authorization", "Bearer " + creds_.api_key); break;
    case HttpProvider::kAnthropic:
      headers.emplace("x-api-key", creds_.api_key);
      headers.emplace("anthropic-version", "2023-06-01");
      break;
    case HttpProvider::kGoogle: headers.emplace("x-goog-api-key", creds_.api_key); break;
  }

  const auto res = client.Post(request_path(request), headers, request_body(request).dump(), "application/json");
  if (!res) throw TransportError(provider_id() + ": " + httplib::to_string(res.error()));

  const int status = res->status;
  if (status == 401 || status == 403) {
    throw CredentialError(provider_id() + ": authentication failed (HTTP " + std::to_string(status) + ")", status);
  }
  if (status == 408 || status == 409 || status == 429 || status >= 500) {
    throw TransportError(provider_id() + ": HTTP " + std::to_string(status), status);
  }
  if (status != 200) {
    throw BackendError(provider_id() + ": HTTP " + std::to_string(status) + ": " + res->body.substr(0, 512), status);
  }
  const auto body = nlohmann::json::parse(res->body, nullptr, false);
  if (body.is_discarded()) throw TransportError(provider_id() + ": response is not JSON", status);
  return extract_text(provider_, body);
}

}  // namespace tdrepair::agents
