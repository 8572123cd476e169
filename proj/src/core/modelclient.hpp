#pragma once

#include <atomic>
#include <functional>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "prompts.hpp"

namespace declarui {

struct ModelResponse {
  std::string text;
  long long input_tokens = 0;
  long long output_tokens = 0;
  double latency_ms = 0.0;
  std::string backend;
};

// Shared, atomically updated run-level token cap.
class TokenBudget {
 public:
  explicit TokenBudget(long long cap_tokens) : cap_(cap_tokens) {}

  // Throws BudgetError when the cap would be exceeded.
  void charge(long long tokens);
  long long used() const { return used_.load(); }
  long long cap() const { return cap_; }

 private:
  long long cap_;
  std::atomic<long long> used_{0};
};

class ModelClient {
 public:
  virtual ~ModelClient() = default;
  virtual ModelResponse complete(const PromptBundle& bundle) = 0;
};

struct ScriptEntry {
  Purpose purpose = Purpose::PageGen;
  std::map<std::string, std::string> metadata_match;  // all must match
  std::string reply;
};

enum class ExhaustionPolicy { Error, RepeatLast };

struct ScenarioScript {
  std::vector<ScriptEntry> entries;
  ExhaustionPolicy exhaustion = ExhaustionPolicy::Error;
  bool sequential = false;  // matched entries are consumed in order
};

// Loads `script.json` from a scenario directory; reply_file paths resolve
// relative to that directory.
ScenarioScript load_scenario_script(const std::string& scenario_dir);

// Deterministic scripted backend. Performs no I/O after construction.
class MockModelClient : public ModelClient {
 public:
  MockModelClient(ScenarioScript script,
                  std::shared_ptr<TokenBudget> budget = nullptr);

  ModelResponse complete(const PromptBundle& bundle) override;

 private:
  ScenarioScript script_;
  std::vector<bool> consumed_;
  std::shared_ptr<TokenBudget> budget_;
  std::mutex mutex_;
};

struct HttpModelConfig {
  std::string endpoint;   // e.g. http://host:port/v1/chat
  std::string model_id;
  std::string api_key;
  double temperature = 0.0;
  int max_retries = 2;
  std::vector<int> backoff_ms = {500, 2000};
};

// Generic chat-with-images JSON backend with bounded retries.
class HttpModelClient : public ModelClient {
 public:
  HttpModelClient(HttpModelConfig config,
                  std::shared_ptr<TokenBudget> budget = nullptr);

  ModelResponse complete(const PromptBundle& bundle) override;

  // Injectable sleep keeps retry tests fast.
  std::function<void(int)> sleep_ms;

 private:
  HttpModelConfig config_;
  std::shared_ptr<TokenBudget> budget_;
};

// First fenced block tagged `language_tag`; else first fenced block of any
// tag; else the whole text trimmed. Blank result throws EmptyCodeError.
std::string extract_code_block(const ModelResponse& response,
                               const std::string& language_tag);

// First syntactically valid JSON object found by brace matching, fenced
// blocks preferred.
nlohmann::json extract_json(const ModelResponse& response);

}  // namespace declarui
