#pragma once

#include <map>
#include <string>
#include <vector>

#include "compilecheck.hpp"
#include "navcheck.hpp"
#include "perception.hpp"
#include "ptg.hpp"

namespace declarui {

enum class Purpose { PtgBuild, PageGen, NavRepair, CompileRepair, Classify };

std::string to_string(Purpose purpose);
Purpose purpose_from_string(const std::string& text);

struct ImageAttachment {
  std::string path;
  std::string caption;
};

struct PromptBundle {
  std::string system_text;
  std::string user_text;
  std::vector<ImageAttachment> images;
  Purpose purpose = Purpose::PageGen;
  std::map<std::string, std::string> metadata;  // app id, page id, iteration
};

struct PromptOptions {
  size_t char_budget = 24000;
  size_t attachment_cap = 20;
  bool reattach_image_on_nav_repair = true;
};

// Renders the templates/*.tmpl files with {{placeholder}} substitution.
// All builders are pure: same inputs, byte-identical bundles.
class PromptFactory {
 public:
  explicit PromptFactory(std::string template_dir, PromptOptions options = {});

  PromptBundle build_ptg_prompt(const std::vector<PageDesign>& app,
                                const std::string& ptg_schema_text) const;

  PromptBundle build_generation_prompt(const PageDesign& page,
                                       const PageTransitionGraph& ptg,
                                       const Framework& framework) const;

  PromptBundle build_nav_repair_prompt(const std::string& page_code,
                                       const NavReport& report,
                                       const PageTransitionGraph& ptg,
                                       const Framework& framework,
                                       const PageDesign* page = nullptr) const;

  PromptBundle build_compile_repair_prompt(
      const std::vector<Diagnostic>& diagnostics,
      const std::vector<RepairExcerpt>& snippets) const;

  PromptBundle build_classify_prompt(const std::string& crop_path,
                                     const BoundingBox& box) const;

  const PromptOptions& options() const { return options_; }

 private:
  std::string render(const std::string& template_name,
                     const std::map<std::string, std::string>& vars) const;

  std::string template_dir_;
  PromptOptions options_;
};

// The JSON schema text embedded into the PTG construction prompt.
std::string ptg_schema_text();

// Page file name: PascalCase(page name) + framework extension.
std::string page_file_name(const std::string& page_name,
                           const Framework& framework);

}  // namespace declarui
