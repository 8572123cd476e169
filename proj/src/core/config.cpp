#include "config.hpp"

#include <cctype>
#include <cstdlib>
#include <filesystem>
#include <sstream>

#include "navcheck.hpp"
#include "util.hpp"

namespace declarui {

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& text) {
  size_t begin = text.find_first_not_of(" \t\r");
  if (begin == std::string::npos) {
    return "";
  }
  size_t end = text.find_last_not_of(" \t\r");
  return text.substr(begin, end - begin + 1);
}

// Cuts an unquoted # comment off the line.
std::string strip_comment(const std::string& line) {
  bool in_string = false;
  for (size_t i = 0; i < line.size(); ++i) {
    char c = line[i];
    if (c == '"' && (i == 0 || line[i - 1] != '\\')) {
      in_string = !in_string;
    } else if (c == '#' && !in_string) {
      return line.substr(0, i);
    }
  }
  return line;
}

std::string parse_quoted(const std::string& text, int line_no) {
  if (text.size() < 2 || text.front() != '"' || text.back() != '"') {
    throw ConfigError("line " + std::to_string(line_no) +
                      ": expected quoted string, got: " + text);
  }
  std::string out;
  for (size_t i = 1; i + 1 < text.size(); ++i) {
    if (text[i] == '\\' && i + 2 < text.size()) {
      char next = text[++i];
      switch (next) {
        case 'n': out.push_back('\n'); break;
        case 't': out.push_back('\t'); break;
        case '"': out.push_back('"'); break;
        case '\\': out.push_back('\\'); break;
        default: out.push_back(next); break;
      }
    } else {
      out.push_back(text[i]);
    }
  }
  return out;
}

}  // namespace

TomlDoc TomlDoc::parse_file(const std::string& path) {
  return parse(read_text_file(path));
}

TomlDoc TomlDoc::parse(const std::string& text) {
  TomlDoc doc;
  std::string section;
  std::istringstream stream{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(stream, raw)) {
    ++line_no;
    std::string line = trim(strip_comment(raw));
    if (line.empty()) {
      continue;
    }
    if (line.front() == '[') {
      if (line.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": malformed section header");
      }
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    size_t eq = line.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": expected key = value");
    }
    std::string key = trim(line.substr(0, eq));
    std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty()) {
      throw ConfigError("line " + std::to_string(line_no) +
                        ": empty key or value");
    }

    if (value.front() == '"') {
      doc.sections_[section][key] = parse_quoted(value, line_no);
    } else if (value == "true" || value == "false") {
      doc.sections_[section][key] = (value == "true");
    } else if (value.front() == '[') {
      if (value.back() != ']') {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": arrays must close on the same line");
      }
      std::vector<std::string> items;
      std::string inner = trim(value.substr(1, value.size() - 2));
      size_t pos = 0;
      while (pos < inner.size()) {
        size_t start = inner.find('"', pos);
        if (start == std::string::npos) {
          break;
        }
        size_t end = start + 1;
        while (end < inner.size() &&
               !(inner[end] == '"' && inner[end - 1] != '\\')) {
          ++end;
        }
        if (end >= inner.size()) {
          throw ConfigError("line " + std::to_string(line_no) +
                            ": unterminated string in array");
        }
        items.push_back(parse_quoted(inner.substr(start, end - start + 1),
                                     line_no));
        pos = end + 1;
      }
      doc.sections_[section][key] = std::move(items);
    } else {
      try {
        doc.sections_[section][key] = std::stod(value);
      } catch (const std::exception&) {
        throw ConfigError("line " + std::to_string(line_no) +
                          ": cannot parse value: " + value);
      }
    }
  }
  return doc;
}

bool TomlDoc::has(const std::string& section, const std::string& key) const {
  auto sit = sections_.find(section);
  return sit != sections_.end() && sit->second.count(key) > 0;
}

std::string TomlDoc::get_string(const std::string& section,
                                const std::string& key,
                                const std::string& fallback) const {
  if (!has(section, key)) {
    return fallback;
  }
  const Value& value = sections_.at(section).at(key);
  if (const auto* s = std::get_if<std::string>(&value)) {
    return *s;
  }
  throw ConfigError("config key " + section + "." + key + " must be a string");
}

double TomlDoc::get_number(const std::string& section, const std::string& key,
                           double fallback) const {
  if (!has(section, key)) {
    return fallback;
  }
  const Value& value = sections_.at(section).at(key);
  if (const auto* n = std::get_if<double>(&value)) {
    return *n;
  }
  throw ConfigError("config key " + section + "." + key + " must be a number");
}

bool TomlDoc::get_bool(const std::string& section, const std::string& key,
                       bool fallback) const {
  if (!has(section, key)) {
    return fallback;
  }
  const Value& value = sections_.at(section).at(key);
  if (const auto* b = std::get_if<bool>(&value)) {
    return *b;
  }
  throw ConfigError("config key " + section + "." + key + " must be a bool");
}

std::vector<std::string> TomlDoc::get_string_array(
    const std::string& section, const std::string& key,
    const std::vector<std::string>& fallback) const {
  if (!has(section, key)) {
    return fallback;
  }
  const Value& value = sections_.at(section).at(key);
  if (const auto* arr = std::get_if<std::vector<std::string>>(&value)) {
    return *arr;
  }
  throw ConfigError("config key " + section + "." + key +
                    " must be a string array");
}

RunConfig load_run_config(const std::string& path) {
  const std::string text = read_text_file(path);
  TomlDoc doc = TomlDoc::parse(text);
  const fs::path base = fs::absolute(fs::path(path)).parent_path();

  auto resolve = [&base](const std::string& p) -> std::string {
    if (p.empty() || fs::path(p).is_absolute()) {
      return p;
    }
    return (base / p).lexically_normal().string();
  };

  RunConfig config;
  config.app_id = doc.get_string("run", "app_id");
  config.framework = doc.get_string("run", "framework", config.framework);
  config.designs_dir = resolve(doc.get_string("run", "designs_dir"));
  config.runs_dir = resolve(doc.get_string("run", "runs_dir", "runs"));
  config.workers = static_cast<int>(doc.get_number("run", "workers", 4));
  config.ptg_path = resolve(doc.get_string("run", "ptg_path"));
  config.utg_path = resolve(doc.get_string("run", "utg_path"));

  config.model_backend = doc.get_string("model", "backend", "mock");
  config.model_scenario_dir =
      resolve(doc.get_string("model", "scenario_dir"));
  config.model_endpoint = doc.get_string("model", "endpoint");
  config.model_id = doc.get_string("model", "model_id");
  config.temperature = doc.get_number("model", "temperature", 0.0);
  config.token_budget = static_cast<long long>(
      doc.get_number("model", "token_budget", 2000000));

  config.perception_mode = doc.get_string("perception", "mode", "fixture");
  config.perception_scenario_dir =
      resolve(doc.get_string("perception", "scenario_dir"));
  config.detector_endpoint = doc.get_string("perception", "detector_endpoint");
  config.segmenter_endpoint =
      doc.get_string("perception", "segmenter_endpoint");
  config.detection_prompt = doc.get_string("perception", "detection_prompt",
                                           config.detection_prompt);
  config.confidence_threshold =
      doc.get_number("perception", "confidence_threshold", 0.25);

  config.template_dir =
      resolve(doc.get_string("prompts", "template_dir", "templates"));
  config.char_budget = static_cast<long long>(
      doc.get_number("prompts", "char_budget", 24000));
  config.attach_image_on_nav_repair =
      doc.get_bool("prompts", "attach_image_on_nav_repair", true);

  config.compiler_command = doc.get_string_array("compiler", "command");
  if (!config.compiler_command.empty()) {
    config.compiler_command[0] = resolve(config.compiler_command[0]);
  }
  config.compiler_timeout_s =
      static_cast<int>(doc.get_number("compiler", "timeout_s", 600));
  config.repair_window_lines =
      static_cast<int>(doc.get_number("compiler", "window_lines", 10));
  config.repair_max_files =
      static_cast<int>(doc.get_number("compiler", "max_files", 5));

  // Environment overrides; the CLI's global flags map onto these.
  if (const char* runs = std::getenv("RUNS_DIR"); runs && *runs) {
    config.runs_dir = runs;
  }
  if (const char* fw = std::getenv("DECLARUI_FRAMEWORK"); fw && *fw) {
    config.framework = fw;
  }
  if (const char* sc = std::getenv("DECLARUI_MOCK_SCENARIO"); sc && *sc) {
    config.model_backend = "mock";
    config.model_scenario_dir = sc;
  }

  config.config_digest = fnv1a_hex(text);

  if (config.app_id.empty()) {
    throw ConfigError("config: run.app_id is required");
  }
  framework_by_name(config.framework);  // validates the name
  if (!config.template_dir.empty() && !fs::is_directory(config.template_dir)) {
    throw ConfigError("config: template_dir does not exist: " +
                      config.template_dir);
  }
  if (config.model_backend == "mock" &&
      !fs::is_directory(config.model_scenario_dir)) {
    throw ConfigError("config: mock backend needs model.scenario_dir");
  }
  if (config.model_backend != "mock" && config.model_backend != "http") {
    throw ConfigError("config: unknown model backend '" +
                      config.model_backend + "'");
  }
  return config;
}

}  // namespace declarui
