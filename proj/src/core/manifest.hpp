#pragma once

#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"
#include "ptg.hpp"

namespace declarui {

struct TokenUsage {
  long long input_tokens = 0;
  long long output_tokens = 0;

  long long total() const { return input_tokens + output_tokens; }
};

struct PageHistoryEntry {
  int iteration = 0;
  std::string code_digest;
  int missing_count = 0;
};

struct GeneratedPage {
  std::string page_id;
  std::string code;
  std::string file_name;
  int nav_iterations = 0;  // capped at 3
  NavReport final_report;
  std::vector<PageHistoryEntry> history;
  bool aborted = false;
  std::string abort_reason;
};

enum class RunStatus { Compiled, CompilationFailed, Aborted };

std::string to_string(RunStatus status);
RunStatus run_status_from_string(const std::string& text);

struct RunManifest {
  int schema = 1;
  std::string app_id;
  std::string framework;
  std::vector<GeneratedPage> pages;
  int compile_attempts = 0;        // full attempts, capped at 3
  bool compiled = false;
  int compile_iterations_used = 0;  // repair rounds = attempts - 1 when compiled
  TokenUsage token_usage;
  double wall_clock_s = 0.0;
  RunStatus status = RunStatus::Aborted;
  std::string abort_stage;  // set when status == Aborted
  std::string config_digest;
};

std::string serialize_manifest(const RunManifest& manifest);
RunManifest parse_manifest(const std::string& document);
RunManifest load_manifest_file(const std::string& path);

// Removes fields that legitimately differ between repeat runs (durations),
// for determinism comparisons.
std::string scrub_manifest_json(const std::string& document);

}  // namespace declarui
