#pragma once

#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"

namespace declarui {

enum class DiagSeverity { Error, Warning };

struct Diagnostic {
  std::string file;  // project-relative, or "<project>" when unattributed
  std::optional<int> line;
  std::optional<int> column;
  DiagSeverity severity = DiagSeverity::Error;
  std::string message;
  std::string raw;
};

struct DiagPattern {
  std::string regex;
  // 1-based capture group indices; 0 means the group is absent.
  int file_group = 0;
  int line_group = 0;
  int column_group = 0;
  int severity_group = 0;  // group text containing "warn" => Warning
  int message_group = 0;
};

struct CompilerProfile {
  std::string name;
  std::vector<std::string> command;
  int timeout_s = 600;
  std::vector<DiagPattern> patterns;
};

// Built-in diagnostic patterns for the named framework profile; the command
// itself always comes from config.
std::vector<DiagPattern> builtin_diag_patterns(const std::string& profile_name);

struct CompileResult {
  bool success = false;
  std::vector<Diagnostic> diagnostics;
  double duration_s = 0.0;
  int exit_code = -1;
  int attempt_index = 1;
  std::string raw_output;
};

CompileResult run_compiler(const std::string& project_dir,
                           const CompilerProfile& profile, int attempt_index);

std::vector<Diagnostic> parse_diagnostics(const std::string& raw_output,
                                          const CompilerProfile& profile);

struct RepairExcerpt {
  std::string file;
  std::string excerpt;  // line-number gutter included
};

std::vector<RepairExcerpt> select_repair_context(
    const std::vector<Diagnostic>& diagnostics, const std::string& project_dir,
    int window_lines = 10, int max_files = 5);

}  // namespace declarui
