#pragma once

#include <map>
#include <string>
#include <variant>
#include <vector>

#include "errors.hpp"

namespace declarui {

// Minimal TOML-subset document: [section] headers, key = value pairs with
// string/number/bool/string-array values, # comments.
class TomlDoc {
 public:
  static TomlDoc parse_file(const std::string& path);
  static TomlDoc parse(const std::string& text);

  bool has(const std::string& section, const std::string& key) const;
  std::string get_string(const std::string& section, const std::string& key,
                         const std::string& fallback = "") const;
  double get_number(const std::string& section, const std::string& key,
                    double fallback) const;
  bool get_bool(const std::string& section, const std::string& key,
                bool fallback) const;
  std::vector<std::string> get_string_array(
      const std::string& section, const std::string& key,
      const std::vector<std::string>& fallback = {}) const;

 private:
  using Value =
      std::variant<std::string, double, bool, std::vector<std::string>>;
  std::map<std::string, std::map<std::string, Value>> sections_;
};

struct RunConfig {
  // [run]
  std::string app_id;
  std::string framework = "ReactNative";
  std::string designs_dir;
  std::string runs_dir = "runs";
  int workers = 4;
  std::string ptg_path;  // pre-supplied PTG skips the build stage
  std::string utg_path;

  // [model]
  std::string model_backend = "mock";  // "mock" | "http"
  std::string model_scenario_dir;
  std::string model_endpoint;
  std::string model_id;
  double temperature = 0.0;
  long long token_budget = 2000000;

  // [perception]
  std::string perception_mode = "fixture";  // "fixture" | "http"
  std::string perception_scenario_dir;
  std::string detector_endpoint;
  std::string segmenter_endpoint;
  std::string detection_prompt =
      "UI component. button. icon. text. image. input field.";
  double confidence_threshold = 0.25;

  // [prompts]
  std::string template_dir = "templates";
  long long char_budget = 24000;
  bool attach_image_on_nav_repair = true;

  // [compiler]
  std::vector<std::string> compiler_command;
  int compiler_timeout_s = 600;
  int repair_window_lines = 10;
  int repair_max_files = 5;

  std::string config_digest;
};

// Loads and validates a run config; relative paths resolve against the
// config file's directory. MODEL_API_KEY stays in the environment.
RunConfig load_run_config(const std::string& path);

}  // namespace declarui
