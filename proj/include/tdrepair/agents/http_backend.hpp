#pragma once

#include <optional>
#include <string>
#include <string_view>

#include "json.hpp"
#include "tdrepair/agents/backend.hpp"

namespace tdrepair::agents {

enum class HttpProvider { kOpenAI, kAnthropic, kGoogle };

const char* to_string(HttpProvider p);
std::optional<HttpProvider> http_provider_from_string(std::string_view s);

struct HttpCredentials {
  std::string api_key;
  std::string base_url;  // scheme://host[:port][/prefix]
};

// Live provider client. Each send() opens its own connection, so one
// instance can be shared by every worker.
class HttpBackend : public Backend {
 public:
  HttpBackend(HttpProvider provider, HttpCredentials credentials);

  // Key from OPENAI_API_KEY, ANTHROPIC_API_KEY or GOOGLE_API_KEY (GEMINI_API_KEY
  // also accepted); <PROVIDER>_BASE_URL overrides the endpoint. Throws
  // CredentialError when the key is unset or empty.
  static HttpCredentials credentials_from_env(HttpProvider provider);

  std::string provider_id() const override { return to_string(provider_); }
  std::string send(const AgentRequest& request) override;

  // Exposed for tests.
  nlohmann::json request_body(const AgentRequest& request) const;
  std::string request_path(const AgentRequest& request) const;
  static std::string extract_text(HttpProvider provider, const nlohmann::json& body);  // throws BackendError

 private:
  HttpProvider provider_;
  HttpCredentials creds_;
  std::string origin_;
  std::string prefix_;
};

}  // namespace tdrepair::agents
