#include "navcheck.hpp"

#include <algorithm>

#include "errors.hpp"

namespace declarui {

namespace {

std::vector<Framework> builtin_frameworks() {
  std::vector<Framework> frameworks;

  Framework rn;
  rn.name = "ReactNative";
  rn.code_language_tag = "tsx";
  rn.file_extension = ".tsx";
  rn.project_subdir = "src/screens";
  rn.compiler_profile = "reactnative";
  rn.patterns = {
      {"rn_navigate", R"(navigation\.navigate\(\s*['"]([^'"]+)['"])",
       TokenTransform::AsIs},
      {"rn_push", R"(navigation\.push\(\s*['"]([^'"]+)['"])",
       TokenTransform::AsIs},
      {"rn_replace", R"(navigation\.replace\(\s*['"]([^'"]+)['"])",
       TokenTransform::AsIs},
  };
  frameworks.push_back(std::move(rn));

  Framework flutter;
  flutter.name = "Flutter";
  flutter.code_language_tag = "dart";
  flutter.file_extension = ".dart";
  flutter.project_subdir = "lib";
  flutter.compiler_profile = "flutter";
  flutter.patterns = {
      {"flutter_push_named",
       R"(Navigator\.pushNamed\(\s*[A-Za-z_][A-Za-z0-9_]*\s*,\s*['"]([^'"]+)['"])",
       TokenTransform::StripRoutePrefix},
      // Route-class heuristic: the first XxxPage( constructor inside the
      // Navigator.push call; normalization later strips the Page suffix.
      {"flutter_push",
       R"(Navigator\.push\s*\([\s\S]{0,200}?([A-Z][A-Za-z0-9_]*Page)\s*\()",
       TokenTransform::AsIs},
  };
  frameworks.push_back(std::move(flutter));

  Framework arkui;
  arkui.name = "ArkUI";
  arkui.code_language_tag = "ets";
  arkui.file_extension = ".ets";
  arkui.project_subdir = "entry/src/main/ets/pages";
  arkui.compiler_profile = "arkui";
  arkui.patterns = {
      {"arkui_push_url",
       R"(router\.pushUrl\(\s*\{[\s\S]{0,200}?url\s*:\s*['"]([^'"]+)['"])",
       TokenTransform::BaseNameOfPath},
      {"arkui_replace_url",
       R"(router\.replaceUrl\(\s*\{[\s\S]{0,200}?url\s*:\s*['"]([^'"]+)['"])",
       TokenTransform::BaseNameOfPath},
  };
  frameworks.push_back(std::move(arkui));

  return frameworks;
}

const std::vector<Framework>& registry() {
  static const std::vector<Framework> frameworks = builtin_frameworks();
  return frameworks;
}

// Drops `//` comments, quote-aware, preserving newlines so offsets keep
// their line numbers.
std::string strip_line_comments(const std::string& code) {
  std::string out;
  out.reserve(code.size());
  char quote = '\0';
  bool in_comment = false;
  for (size_t i = 0; i < code.size(); ++i) {
    char c = code[i];
    if (c == '\n') {
      quote = '\0';
      in_comment = false;
      out.push_back(c);
      continue;
    }
    if (in_comment) {
      out.push_back(' ');
      continue;
    }
    if (quote != '\0') {
      if (c == '\\' && i + 1 < code.size() && code[i + 1] != '\n') {
        out.push_back(c);
        out.push_back(code[++i]);
        continue;
      }
      if (c == quote) {
        quote = '\0';
      }
      out.push_back(c);
      continue;
    }
    if (c == '\'' || c == '"' || c == '`') {
      quote = c;
      out.push_back(c);
      continue;
    }
    if (c == '/' && i + 1 < code.size() && code[i + 1] == '/') {
      in_comment = true;
      out.push_back(' ');
      continue;
    }
    out.push_back(c);
  }
  return out;
}

int line_of_offset(const std::string& text, size_t offset) {
  return 1 + static_cast<int>(
                 std::count(text.begin(), text.begin() + offset, '\n'));
}

}  // namespace

TokenTransform token_transform_from_string(const std::string& text) {
  if (text == "AsIs") return TokenTransform::AsIs;
  if (text == "StripRoutePrefix") return TokenTransform::StripRoutePrefix;
  if (text == "BaseNameOfPath") return TokenTransform::BaseNameOfPath;
  throw ConfigError("unknown token transform '" + text + "'");
}

std::string to_string(TokenTransform transform) {
  switch (transform) {
    case TokenTransform::AsIs:
      return "AsIs";
    case TokenTransform::StripRoutePrefix:
      return "StripRoutePrefix";
    case TokenTransform::BaseNameOfPath:
      return "BaseNameOfPath";
  }
  return "AsIs";
}

const Framework& framework_by_name(const std::string& name) {
  for (const auto& framework : registry()) {
    if (framework.name == name) {
      return framework;
    }
  }
  throw ConfigError("unknown framework '" + name +
                    "' (expected ReactNative, Flutter, or ArkUI)");
}

std::vector<std::string> framework_names() {
  std::vector<std::string> names;
  for (const auto& framework : registry()) {
    names.push_back(framework.name);
  }
  return names;
}

std::string apply_transform(const std::string& token,
                            TokenTransform transform) {
  switch (transform) {
    case TokenTransform::AsIs:
      return token;
    case TokenTransform::StripRoutePrefix: {
      size_t pos = token.find_first_not_of('/');
      return pos == std::string::npos ? std::string() : token.substr(pos);
    }
    case TokenTransform::BaseNameOfPath: {
      size_t pos = token.find_last_of('/');
      return pos == std::string::npos ? token : token.substr(pos + 1);
    }
  }
  return token;
}

std::vector<NavHit> extract_navigation(const std::string& code,
                                       const Framework& framework) {
  const std::string text = strip_line_comments(code);
  std::vector<NavHit> hits;
  for (const auto& pattern : framework.patterns) {
    std::regex re(pattern.matcher);
    auto begin = std::sregex_iterator(text.begin(), text.end(), re);
    for (auto it = begin; it != std::sregex_iterator(); ++it) {
      const std::smatch& match = *it;
      NavHit hit;
      hit.target_token = apply_transform(match.str(1), pattern.transform);
      hit.pattern_name = pattern.name;
      hit.line = line_of_offset(text, static_cast<size_t>(match.position(0)));
      hits.push_back(std::move(hit));
    }
  }
  std::stable_sort(hits.begin(), hits.end(),
                   [](const NavHit& a, const NavHit& b) {
                     return a.line < b.line;
                   });
  return hits;
}

NavReport check_page(const std::string& code, const std::string& page_id,
                     const PageTransitionGraph& ptg, const Framework& framework,
                     int iteration) {
  const PageNode* page = ptg.find_node(page_id);
  if (!page) {
    throw UnknownPageError("page id '" + page_id + "' not in PTG");
  }
  EdgeKeySet implemented;
  const std::string source = normalize_page_name(page->name);
  for (const auto& hit : extract_navigation(code, framework)) {
    implemented.insert({source, normalize_page_name(hit.target_token)});
  }
  NavReport report = diff_navigation(ptg, page_id, implemented);
  report.iteration = iteration;
  return report;
}

}  // namespace declarui
