#include "compilecheck.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <map>
#include <regex>
#include <sstream>

#include "process.hpp"

namespace declarui {

namespace fs = std::filesystem;

namespace {

bool contains_error_token(const std::string& line) {
  static const std::regex re("error", std::regex::icase);
  return std::regex_search(line, re);
}

bool is_warning_word(const std::string& word) {
  std::string lower;
  for (char c : word) {
    lower.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
  }
  return lower.find("warn") != std::string::npos;
}

}  // namespace

std::vector<DiagPattern> builtin_diag_patterns(
    const std::string& profile_name) {
  // tsc: App.tsx(14,7): error TS2304: Cannot find name 'Btn'.
  DiagPattern tsc{R"(^(.+)\((\d+),(\d+)\): (error|warning) (.+)$)",
                  1, 2, 3, 4, 5};
  // dart: lib/main.dart:22:5: Error: Undefined name 'Foo'.
  DiagPattern dart{R"(^(.+):(\d+):(\d+): (Error|Warning): (.+)$)",
                   1, 2, 3, 4, 5};
  // generic gcc-shaped fallback: file:line: error: message
  DiagPattern gcc{R"(^(.+):(\d+):\s*(error|warning):\s*(.+)$)",
                  1, 2, 0, 3, 4};
  if (profile_name == "reactnative") {
    return {tsc, gcc};
  }
  if (profile_name == "flutter") {
    return {dart, gcc};
  }
  if (profile_name == "arkui") {
    return {dart, tsc, gcc};
  }
  return {tsc, dart, gcc};
}

CompileResult run_compiler(const std::string& project_dir,
                           const CompilerProfile& profile, int attempt_index) {
  if (!fs::is_directory(project_dir)) {
    throw SpawnError("project directory does not exist: " + project_dir);
  }
  const auto start = std::chrono::steady_clock::now();
  ProcessResult proc = run_process(profile.command, project_dir,
                                   profile.timeout_s);
  const auto elapsed = std::chrono::duration<double>(
                           std::chrono::steady_clock::now() - start)
                           .count();
  if (proc.spawn_failed) {
    throw SpawnError("compiler command failed to start: " + proc.spawn_error);
  }

  CompileResult result;
  result.attempt_index = attempt_index;
  result.duration_s = elapsed;
  result.exit_code = proc.exit_code;
  result.raw_output = proc.output;
  if (proc.timed_out) {
    result.success = false;
    Diagnostic d;
    d.file = "<project>";
    d.severity = DiagSeverity::Error;
    d.message = "compiler timed out after " +
                std::to_string(profile.timeout_s) + "s";
    d.raw = d.message;
    result.diagnostics.push_back(std::move(d));
    return result;
  }
  result.success = proc.exit_code == 0;
  if (!result.success) {
    result.diagnostics = parse_diagnostics(proc.output, profile);
  }
  return result;
}

std::vector<Diagnostic> parse_diagnostics(const std::string& raw_output,
                                          const CompilerProfile& profile) {
  std::vector<std::pair<std::regex, const DiagPattern*>> compiled;
  for (const auto& pattern : profile.patterns) {
    compiled.emplace_back(std::regex(pattern.regex), &pattern);
  }

  std::vector<Diagnostic> diagnostics;
  std::istringstream stream(raw_output);
  std::string line;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    bool matched = false;
    for (const auto& [re, pattern] : compiled) {
      std::smatch m;
      if (!std::regex_match(line, m, re)) {
        continue;
      }
      Diagnostic d;
      d.raw = line;
      d.file = pattern->file_group ? m.str(pattern->file_group)
                                   : std::string("<project>");
      if (pattern->line_group && m[pattern->line_group].matched) {
        d.line = std::stoi(m.str(pattern->line_group));
      }
      if (pattern->column_group && m[pattern->column_group].matched) {
        d.column = std::stoi(m.str(pattern->column_group));
      }
      d.severity = pattern->severity_group &&
                           is_warning_word(m.str(pattern->severity_group))
                       ? DiagSeverity::Warning
                       : DiagSeverity::Error;
      d.message = pattern->message_group ? m.str(pattern->message_group) : line;
      diagnostics.push_back(std::move(d));
      matched = true;
      break;
    }
    if (!matched && contains_error_token(line)) {
      Diagnostic d;
      d.file = "<project>";
      d.severity = DiagSeverity::Error;
      d.message = line;
      d.raw = line;
      diagnostics.push_back(std::move(d));
    }
  }
  return diagnostics;
}

std::vector<RepairExcerpt> select_repair_context(
    const std::vector<Diagnostic>& diagnostics, const std::string& project_dir,
    int window_lines, int max_files) {
  if (diagnostics.empty()) {
    throw NothingToRepairError("no diagnostics to build repair context from");
  }

  // File -> error lines, files ranked by descending error count.
  std::map<std::string, std::vector<int>> error_lines;
  std::map<std::string, int> error_counts;
  for (const auto& d : diagnostics) {
    if (d.severity != DiagSeverity::Error) {
      continue;
    }
    ++error_counts[d.file];
    if (d.line) {
      error_lines[d.file].push_back(*d.line);
    }
  }

  std::vector<std::pair<std::string, int>> ranked(error_counts.begin(),
                                                  error_counts.end());
  std::stable_sort(ranked.begin(), ranked.end(),
                   [](const auto& a, const auto& b) {
                     return a.second > b.second;
                   });
  if (static_cast<int>(ranked.size()) > max_files) {
    ranked.resize(static_cast<size_t>(max_files));
  }

  std::vector<RepairExcerpt> excerpts;
  for (const auto& [file, count] : ranked) {
    (void)count;
    RepairExcerpt excerpt;
    excerpt.file = file;

    fs::path path = fs::path(project_dir) / file;
    std::ifstream in(path);
    if (file == "<project>" || !in) {
      excerpt.excerpt = "<file not found>";
      excerpts.push_back(std::move(excerpt));
      continue;
    }
    std::vector<std::string> lines;
    std::string text_line;
    while (std::getline(in, text_line)) {
      lines.push_back(text_line);
    }

    // Merge overlapping ±window ranges around each error line.
    std::vector<int> centers = error_lines[file];
    std::sort(centers.begin(), centers.end());
    std::vector<std::pair<int, int>> ranges;
    for (int center : centers) {
      int lo = std::max(1, center - window_lines);
      int hi = std::min(static_cast<int>(lines.size()), center + window_lines);
      if (hi < lo) {
        continue;
      }
      if (!ranges.empty() && lo <= ranges.back().second + 1) {
        ranges.back().second = std::max(ranges.back().second, hi);
      } else {
        ranges.emplace_back(lo, hi);
      }
    }
    if (ranges.empty() && !lines.empty()) {
      ranges.emplace_back(1, std::min<int>(static_cast<int>(lines.size()),
                                           2 * window_lines + 1));
    }

    std::ostringstream out;
    bool first = true;
    for (const auto& [lo, hi] : ranges) {
      if (!first) {
        out << "  ...\n";
      }
      first = false;
      for (int n = lo; n <= hi; ++n) {
        out << n << " | " << lines[static_cast<size_t>(n - 1)] << "\n";
      }
    }
    excerpt.excerpt = out.str();
    excerpts.push_back(std::move(excerpt));
  }
  return excerpts;
}

}  // namespace declarui
