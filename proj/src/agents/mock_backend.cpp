#include "tdrepair/agents/mock_backend.hpp"

#include <algorithm>
#include <fstream>
#include <istream>

#include "tdrepair/errors.hpp"

namespace tdrepair::agents {

MockBackend::MockBackend(std::vector<Entry> entries) : entries_(std::move(entries)), uses_(entries_.size(), 0) {}

MockBackend::MockBackend(const MockBackend& other) : entries_(other.entries_) {
  std::lock_guard lock(other.mu_);
  uses_ = other.uses_;
  calls_ = other.calls_;
}

MockBackend MockBackend::parse(std::istream& in) {
  std::vector<Entry> entries;
  std::string line;
  std::size_t n = 0;
  while (std::getline(in, line)) {
    ++n;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    const auto j = nlohmann::json::parse(line, nullptr, false);
    if (!j.is_object()) throw ConfigError("mock script line " + std::to_string(n) + ": not a JSON object");
    try {
      Entry e;
      e.instance_id = j.value("instance_id", "*");
      e.template_id = j.value("template_id", "*");
      e.attempt = j.value("attempt", 0);
      e.prompt_contains = j.value("prompt_contains", "");
      e.response = j.value("response", "");
      e.fail_times = j.value("fail_times", 0);
      e.error = j.value("error", "");
      if (!e.error.empty() && e.error != "transient" && e.error != "auth") {
        throw ConfigError("error must be \"transient\" or \"auth\"");
      }
      entries.push_back(std::move(e));
    } catch (const nlohmann::json::exception& e) {
      throw ConfigError("mock script line " + std::to_string(n) + ": " + e.what());
    } catch (const ConfigError& e) {
      throw ConfigError("mock script line " + std::to_string(n) + ": " + e.what());
    }
  }
  return MockBackend(std::move(entries));
}

MockBackend MockBackend::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot read mock script " + path.string());
  return parse(in);
}

std::string MockBackend::send(const AgentRequest& request) {
  const RequestTag& tag = request.tag;
  std::lock_guard lock(mu_);
  calls_.push_back({tag, request.system_prompt, request.user_prompt});

  int best = -1;
  int best_score = -1;
  for (std::size_t i = 0; i < entries_.size(); ++i) {
    const Entry& e = entries_[i];
    if (e.instance_id != "*" && e.instance_id != tag.instance_id) continue;
    if (e.template_id != "*" && e.template_id != tag.agent) continue;
    if (e.attempt != 0 && e.attempt != tag.attempt) continue;
    if (!e.prompt_contains.empty() && request.user_prompt.find(e.prompt_contains) == std::string::npos &&
        request.system_prompt.find(e.prompt_contains) == std::string::npos) {
      continue;
    }
    const int score = (e.instance_id != "*" ? 8 : 0) + (e.template_id != "*" ? 4 : 0) + (e.attempt != 0 ? 2 : 0) +
                      (!e.prompt_contains.empty() ? 1 : 0);
    if (score > best_score) {
      best = static_cast<int>(i);
      best_score = score;
    }
  }
  if (best < 0) {
    throw BackendError("mock script has no entry for instance '" + tag.instance_id + "', agent '" + tag.agent +
                       "', attempt " + std::to_string(tag.attempt));
  }
  const Entry& e = entries_[best];
  const int use = uses_[best]++;
  if (e.error == "auth") throw CredentialError("mock: scripted authentication failure", 401);
  if (e.error == "transient") throw TransportError("mock: scripted transient failure", 503);
  if (use < e.fail_times) throw TransportError("mock: scripted transient failure", 503);
  return e.response;
}

std::vector<MockBackend::Call> MockBackend::calls() const {
  std::lock_guard lock(mu_);
  return calls_;
}

std::size_t MockBackend::call_count(std::string_view agent) const {
  std::lock_guard lock(mu_);
  return static_cast<std::size_t>(
      std::count_if(calls_.begin(), calls_.end(), [&](const Call& c) { return c.tag.agent == agent; }));
}

}  // namespace tdrepair::agents
