#include "modelclient.hpp"

#include <chrono>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <thread>

#include <httplib.h>

#include "netprobe.hpp"

namespace declarui {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingFileError("cannot open file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

long long estimate_tokens(size_t chars) {
  return static_cast<long long>((chars + 3) / 4);
}

std::string base64_encode(const std::string& input) {
  static const char* alphabet =
      "ABCDEFGHIJKLMNOPQRSTUVWXYZabcdefghijklmnopqrstuvwxyz0123456789+/";
  std::string out;
  out.reserve((input.size() + 2) / 3 * 4);
  size_t i = 0;
  while (i + 2 < input.size()) {
    unsigned v = (static_cast<unsigned char>(input[i]) << 16) |
                 (static_cast<unsigned char>(input[i + 1]) << 8) |
                 static_cast<unsigned char>(input[i + 2]);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out.push_back(alphabet[v & 63]);
    i += 3;
  }
  if (i + 1 == input.size()) {
    unsigned v = static_cast<unsigned char>(input[i]) << 16;
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out += "==";
  } else if (i + 2 == input.size()) {
    unsigned v = (static_cast<unsigned char>(input[i]) << 16) |
                 (static_cast<unsigned char>(input[i + 1]) << 8);
    out.push_back(alphabet[(v >> 18) & 63]);
    out.push_back(alphabet[(v >> 12) & 63]);
    out.push_back(alphabet[(v >> 6) & 63]);
    out += "=";
  }
  return out;
}

struct FencedBlock {
  std::string tag;
  std::string content;
};

std::vector<FencedBlock> find_fenced_blocks(const std::string& text) {
  std::vector<FencedBlock> blocks;
  std::istringstream stream(text);
  std::string line;
  bool inside = false;
  FencedBlock current;
  while (std::getline(stream, line)) {
    std::string trimmed = line;
    while (!trimmed.empty() &&
           (trimmed.back() == '\r' || trimmed.back() == ' ')) {
      trimmed.pop_back();
    }
    if (trimmed.rfind("```", 0) == 0) {
      if (!inside) {
        inside = true;
        current = FencedBlock{};
        current.tag = trimmed.substr(3);
      } else {
        inside = false;
        blocks.push_back(current);
      }
      continue;
    }
    if (inside) {
      current.content += line;
      current.content += "\n";
    }
  }
  return blocks;
}

std::string trim(const std::string& text) {
  size_t begin = text.find_first_not_of(" \t\r\n");
  if (begin == std::string::npos) {
    return "";
  }
  size_t end = text.find_last_not_of(" \t\r\n");
  return text.substr(begin, end - begin + 1);
}

}  // namespace

void TokenBudget::charge(long long tokens) {
  long long now = used_.fetch_add(tokens) + tokens;
  if (now > cap_) {
    throw BudgetError("run token budget exceeded: " + std::to_string(now) +
                      " > " + std::to_string(cap_));
  }
}

ScenarioScript load_scenario_script(const std::string& scenario_dir) {
  fs::path script_path = fs::path(scenario_dir) / "script.json";
  json doc = json::parse(read_file(script_path), nullptr, false);
  if (doc.is_discarded()) {
    throw ConfigError("scenario script is not valid JSON: " +
                      script_path.string());
  }

  ScenarioScript script;
  const json* entries = nullptr;
  if (doc.is_array()) {
    entries = &doc;
  } else if (doc.is_object()) {
    if (doc.contains("exhaustion")) {
      std::string policy = doc.at("exhaustion").get<std::string>();
      if (policy == "RepeatLast") {
        script.exhaustion = ExhaustionPolicy::RepeatLast;
      } else if (policy == "Error") {
        script.exhaustion = ExhaustionPolicy::Error;
      } else {
        throw ConfigError("unknown exhaustion policy '" + policy + "'");
      }
    }
    script.sequential = doc.value("sequential", false);
    if (!doc.contains("entries")) {
      throw ConfigError("scenario script object lacks 'entries'");
    }
    entries = &doc.at("entries");
  } else {
    throw ConfigError("scenario script must be an array or object");
  }

  for (const auto& raw : *entries) {
    ScriptEntry entry;
    const json& match = raw.at("match");
    entry.purpose = purpose_from_string(match.at("purpose").get<std::string>());
    for (const auto& [key, value] : match.items()) {
      if (key != "purpose") {
        entry.metadata_match[key] = value.get<std::string>();
      }
    }
    if (raw.contains("reply")) {
      entry.reply = raw.at("reply").get<std::string>();
    } else if (raw.contains("reply_file")) {
      entry.reply = read_file(fs::path(scenario_dir) /
                              raw.at("reply_file").get<std::string>());
    } else {
      throw ConfigError("scenario entry needs 'reply' or 'reply_file'");
    }
    script.entries.push_back(std::move(entry));
  }
  if (script.entries.empty()) {
    throw ConfigError("scenario script has no entries");
  }
  return script;
}

MockModelClient::MockModelClient(ScenarioScript script,
                                 std::shared_ptr<TokenBudget> budget)
    : script_(std::move(script)),
      consumed_(script_.entries.size(), false),
      budget_(std::move(budget)) {}

ModelResponse MockModelClient::complete(const PromptBundle& bundle) {
  std::lock_guard<std::mutex> lock(mutex_);

  const ScriptEntry* hit = nullptr;
  for (size_t i = 0; i < script_.entries.size(); ++i) {
    if (script_.sequential && consumed_[i]) {
      continue;
    }
    const ScriptEntry& entry = script_.entries[i];
    if (entry.purpose != bundle.purpose) {
      continue;
    }
    bool all_match = true;
    for (const auto& [key, value] : entry.metadata_match) {
      auto it = bundle.metadata.find(key);
      if (it == bundle.metadata.end() || it->second != value) {
        all_match = false;
        break;
      }
    }
    if (all_match) {
      hit = &entry;
      if (script_.sequential) {
        consumed_[i] = true;
      }
      break;
    }
  }

  if (!hit) {
    if (script_.exhaustion == ExhaustionPolicy::RepeatLast) {
      hit = &script_.entries.back();
    } else {
      throw ClientError("mock script has no entry for purpose " +
                        to_string(bundle.purpose));
    }
  }

  ModelResponse response;
  response.text = hit->reply;
  response.input_tokens = estimate_tokens(bundle.user_text.size());
  response.output_tokens = estimate_tokens(hit->reply.size());
  response.backend = "mock";
  if (budget_) {
    budget_->charge(response.input_tokens + response.output_tokens);
  }
  return response;
}

HttpModelClient::HttpModelClient(HttpModelConfig config,
                                 std::shared_ptr<TokenBudget> budget)
    : sleep_ms([](int ms) {
        std::this_thread::sleep_for(std::chrono::milliseconds(ms));
      }),
      config_(std::move(config)),
      budget_(std::move(budget)) {}

ModelResponse HttpModelClient::complete(const PromptBundle& bundle) {
  json body;
  body["model"] = config_.model_id;
  body["temperature"] = config_.temperature;
  body["system"] = bundle.system_text;
  json content = json::array();
  content.push_back({{"type", "text"}, {"text", bundle.user_text}});
  for (const auto& image : bundle.images) {
    content.push_back({{"type", "image"},
                       {"caption", image.caption},
                       {"data", base64_encode(read_file(image.path))}});
  }
  body["messages"] = json::array({{{"role", "user"}, {"content", content}}});

  // Split endpoint into host and path.
  std::string endpoint = config_.endpoint;
  std::string path = "/";
  size_t scheme = endpoint.find("://");
  size_t host_start = scheme == std::string::npos ? 0 : scheme + 3;
  size_t slash = endpoint.find('/', host_start);
  std::string host = endpoint.substr(0, slash);
  if (slash != std::string::npos) {
    path = endpoint.substr(slash);
  }

  std::string last_error;
  for (int attempt = 0; attempt <= config_.max_retries; ++attempt) {
    if (attempt > 0) {
      int idx = std::min<int>(attempt - 1,
                              static_cast<int>(config_.backoff_ms.size()) - 1);
      sleep_ms(config_.backoff_ms.empty() ? 0 : config_.backoff_ms[idx]);
    }
    http_request_count().fetch_add(1);
    httplib::Client client(host);
    httplib::Headers headers;
    if (!config_.api_key.empty()) {
      headers.emplace("Authorization", "Bearer " + config_.api_key);
    }
    const auto start = std::chrono::steady_clock::now();
    auto res = client.Post(path, headers, body.dump(), "application/json");
    const double latency =
        std::chrono::duration<double, std::milli>(
            std::chrono::steady_clock::now() - start)
            .count();
    if (!res) {
      last_error = "transport failure: " + httplib::to_string(res.error());
      continue;
    }
    if (res->status == 401 || res->status == 403) {
      throw AuthError("model endpoint rejected credentials (status " +
                      std::to_string(res->status) + ")");
    }
    if (res->status >= 500) {
      last_error = "server error status " + std::to_string(res->status);
      continue;
    }
    if (res->status != 200) {
      throw ClientError("model endpoint returned status " +
                        std::to_string(res->status) + ": " + res->body);
    }
    json reply = json::parse(res->body, nullptr, false);
    if (reply.is_discarded() || !reply.contains("text")) {
      last_error = "malformed reply body";
      continue;
    }
    ModelResponse response;
    response.text = reply.at("text").get<std::string>();
    if (reply.contains("usage")) {
      response.input_tokens =
          reply.at("usage").value("input_tokens", 0LL);
      response.output_tokens =
          reply.at("usage").value("output_tokens", 0LL);
    } else {
      response.input_tokens = estimate_tokens(bundle.user_text.size());
      response.output_tokens = estimate_tokens(response.text.size());
    }
    response.latency_ms = latency;
    response.backend = "http:" + config_.model_id;
    if (budget_) {
      budget_->charge(response.input_tokens + response.output_tokens);
    }
    return response;
  }
  throw ClientError("model call failed after retries: " + last_error);
}

std::string extract_code_block(const ModelResponse& response,
                               const std::string& language_tag) {
  std::vector<FencedBlock> blocks = find_fenced_blocks(response.text);
  std::string result;
  bool found = false;
  for (const auto& block : blocks) {
    if (block.tag == language_tag) {
      result = block.content;
      found = true;
      break;
    }
  }
  if (!found && !blocks.empty()) {
    result = blocks.front().content;
    found = true;
  }
  if (!found) {
    result = trim(response.text);
  }
  if (trim(result).empty()) {
    throw EmptyCodeError("model reply contains no code");
  }
  return result;
}

nlohmann::json extract_json(const ModelResponse& response) {
  // Fenced blocks first.
  for (const auto& block : find_fenced_blocks(response.text)) {
    json parsed = json::parse(block.content, nullptr, false);
    if (!parsed.is_discarded() && parsed.is_object()) {
      return parsed;
    }
  }

  // Brace-matching scan over the raw text.
  const std::string& text = response.text;
  std::vector<std::string> notes;
  for (size_t start = text.find('{'); start != std::string::npos;
       start = text.find('{', start + 1)) {
    int depth = 0;
    bool in_string = false;
    for (size_t i = start; i < text.size(); ++i) {
      char c = text[i];
      if (in_string) {
        if (c == '\\') {
          ++i;
        } else if (c == '"') {
          in_string = false;
        }
        continue;
      }
      if (c == '"') {
        in_string = true;
      } else if (c == '{') {
        ++depth;
      } else if (c == '}') {
        --depth;
        if (depth == 0) {
          json parsed =
              json::parse(text.substr(start, i - start + 1), nullptr, false);
          if (!parsed.is_discarded() && parsed.is_object()) {
            return parsed;
          }
          notes.push_back("candidate at offset " + std::to_string(start) +
                          " did not parse");
          break;
        }
      }
    }
    if (depth != 0) {
      notes.push_back("unbalanced braces from offset " +
                      std::to_string(start));
    }
  }

  std::string detail;
  for (const auto& note : notes) {
    detail += "\n  - " + note;
  }
  throw JsonExtractError("no JSON object found in model reply" + detail);
}

}  // namespace declarui
