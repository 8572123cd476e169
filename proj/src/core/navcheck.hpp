#pragma once

#include <regex>
#include <string>
#include <vector>

#include "ptg.hpp"

namespace declarui {

enum class TokenTransform { AsIs, StripRoutePrefix, BaseNameOfPath };

TokenTransform token_transform_from_string(const std::string& text);
std::string to_string(TokenTransform transform);

struct NavPattern {
  std::string name;
  std::string matcher;  // regex source with exactly one capture group
  TokenTransform transform = TokenTransform::AsIs;
};

struct Framework {
  std::string name;  // "ReactNative" | "Flutter" | "ArkUI"
  std::vector<NavPattern> patterns;
  std::string code_language_tag;  // fence tag for generated code
  std::string file_extension;
  std::string project_subdir;  // where page files live inside project/
  std::string compiler_profile;
};

const Framework& framework_by_name(const std::string& name);
std::vector<std::string> framework_names();

std::string apply_transform(const std::string& token, TokenTransform transform);

// Every pattern match with its 1-based line number. `//` line comments are
// ignored; block comments are not stripped.
std::vector<NavHit> extract_navigation(const std::string& code,
                                       const Framework& framework);

NavReport check_page(const std::string& code, const std::string& page_id,
                     const PageTransitionGraph& ptg, const Framework& framework,
                     int iteration);

}  // namespace declarui
