#include "prompts.hpp"

#include <algorithm>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace declarui {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

constexpr const char* kTruncationMarker = "(truncated)";

std::string substitute(const std::string& text,
                       const std::map<std::string, std::string>& vars) {
  std::string out;
  out.reserve(text.size());
  size_t pos = 0;
  while (pos < text.size()) {
    size_t open = text.find("{{", pos);
    if (open == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    size_t close = text.find("}}", open + 2);
    if (close == std::string::npos) {
      out.append(text, pos, std::string::npos);
      break;
    }
    out.append(text, pos, open - pos);
    std::string key = text.substr(open + 2, close - open - 2);
    auto it = vars.find(key);
    if (it != vars.end()) {
      out += it->second;
    }
    pos = close + 2;
  }
  return out;
}

std::string fmt_num(double value) {
  std::ostringstream out;
  if (value == static_cast<long long>(value)) {
    out << static_cast<long long>(value);
  } else {
    out << value;
  }
  return out.str();
}

std::string component_table(const std::vector<ComponentAnnotation>& components) {
  std::ostringstream out;
  out << "| # | type | function | x | y | w | h |\n";
  out << "|---|---|---|---|---|---|---|\n";
  int index = 1;
  for (const auto& c : components) {
    out << "| " << index++ << " | " << c.component_type << " | " << c.function
        << " | " << fmt_num(c.box.x) << " | " << fmt_num(c.box.y) << " | "
        << fmt_num(c.box.width) << " | " << fmt_num(c.box.height) << " |\n";
  }
  return out.str();
}

// PTG restricted to the page's incident edges plus the full node list.
std::string page_scoped_ptg_json(const PageDesign& page,
                                 const PageTransitionGraph& ptg) {
  PageTransitionGraph scoped;
  scoped.nodes = ptg.nodes;
  for (const auto& edge : ptg.edges) {
    if (edge.source == page.page_id || edge.target == page.page_id) {
      scoped.edges.push_back(edge);
    }
  }
  return serialize_ptg(scoped);
}

}  // namespace

std::string to_string(Purpose purpose) {
  switch (purpose) {
    case Purpose::PtgBuild:
      return "PtgBuild";
    case Purpose::PageGen:
      return "PageGen";
    case Purpose::NavRepair:
      return "NavRepair";
    case Purpose::CompileRepair:
      return "CompileRepair";
    case Purpose::Classify:
      return "Classify";
  }
  return "PageGen";
}

Purpose purpose_from_string(const std::string& text) {
  if (text == "PtgBuild") return Purpose::PtgBuild;
  if (text == "PageGen") return Purpose::PageGen;
  if (text == "NavRepair") return Purpose::NavRepair;
  if (text == "CompileRepair") return Purpose::CompileRepair;
  if (text == "Classify") return Purpose::Classify;
  throw ConfigError("unknown prompt purpose '" + text + "'");
}

std::string ptg_schema_text() {
  return R"({ "nodes": [ { "id": str, "name": str, "type": str, "property": {str: str} } ],
  "edges": [ { "id": str, "source": str, "target": str, "condition": str, "action": str } ] })";
}

std::string page_file_name(const std::string& page_name,
                           const Framework& framework) {
  std::string out;
  bool upper_next = true;
  for (unsigned char c : page_name) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(upper_next ? std::toupper(c) : c));
      upper_next = false;
    } else {
      upper_next = true;
    }
  }
  if (out.empty()) {
    out = "Page";
  }
  return out + framework.file_extension;
}

PromptFactory::PromptFactory(std::string template_dir, PromptOptions options)
    : template_dir_(std::move(template_dir)), options_(options) {}

std::string PromptFactory::render(
    const std::string& template_name,
    const std::map<std::string, std::string>& vars) const {
  fs::path path = fs::path(template_dir_) / (template_name + ".tmpl");
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw ConfigError("prompt template not found: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return substitute(buf.str(), vars);
}

PromptBundle PromptFactory::build_ptg_prompt(
    const std::vector<PageDesign>& app,
    const std::string& ptg_schema) const {
  if (app.empty()) {
    throw SchemaError("PTG prompt needs at least one page design");
  }
  if (app.size() > options_.attachment_cap) {
    throw AttachmentCapError("app has " + std::to_string(app.size()) +
                             " pages, attachment cap is " +
                             std::to_string(options_.attachment_cap));
  }
  PromptBundle bundle;
  bundle.purpose = Purpose::PtgBuild;
  std::ostringstream page_list;
  int index = 1;
  for (const auto& page : app) {
    page_list << index << ". " << page.page_id << "\n";
    bundle.images.push_back(
        {page.image_path, "page " + std::to_string(index) + ": " + page.page_id});
    ++index;
  }
  bundle.user_text = render("ptg_build",
                            {{"ptg_schema", ptg_schema},
                             {"page_count", std::to_string(app.size())},
                             {"page_list", page_list.str()}});
  bundle.metadata["page_count"] = std::to_string(app.size());
  return bundle;
}

PromptBundle PromptFactory::build_generation_prompt(
    const PageDesign& page, const PageTransitionGraph& ptg,
    const Framework& framework) const {
  const PageNode* node = ptg.find_node(page.page_id);
  if (!node) {
    throw UnknownPageError("page id '" + page.page_id + "' not in PTG");
  }

  std::ostringstream transitions;
  int index = 1;
  for (const auto& edge : ptg.edges) {
    if (edge.source != page.page_id) {
      continue;
    }
    const PageNode* target = ptg.find_node(edge.target);
    transitions << index++ << ". from " << node->name << " to "
                << (target ? target->name : edge.target) << " when "
                << edge.condition << " (" << edge.action << ")\n";
  }

  const std::string file_name = page_file_name(node->name, framework);
  auto render_with_table = [&](const std::string& table) {
    std::string section;
    if (!table.empty()) {
      section = "## Detected components\n\n" + table;
    }
    return render("page_gen", {{"page_name", node->name},
                               {"framework", framework.name},
                               {"file_name", file_name},
                               {"language_tag", framework.code_language_tag},
                               {"ptg_json", page_scoped_ptg_json(page, ptg)},
                               {"component_section", section},
                               {"transition_list", transitions.str()}});
  };

  std::vector<ComponentAnnotation> components = page.components;
  std::string user_text = render_with_table(
      components.empty() ? std::string() : component_table(components));
  // Over-budget component tables shrink tail-first until the text fits.
  while (user_text.size() > options_.char_budget && !components.empty()) {
    components.pop_back();
    std::string table = component_table(components);
    table += kTruncationMarker;
    table += "\n";
    user_text = render_with_table(table);
  }
  if (user_text.size() > options_.char_budget) {
    user_text.resize(options_.char_budget - std::strlen(kTruncationMarker));
    user_text += kTruncationMarker;
  }

  PromptBundle bundle;
  bundle.purpose = Purpose::PageGen;
  bundle.user_text = std::move(user_text);
  bundle.images.push_back({page.image_path, "full page: " + node->name});
  bundle.metadata["page_id"] = page.page_id;
  return bundle;
}

PromptBundle PromptFactory::build_nav_repair_prompt(
    const std::string& page_code, const NavReport& report,
    const PageTransitionGraph& ptg, const Framework& framework,
    const PageDesign* page) const {
  if (report.missing.empty()) {
    throw NothingToRepairError("navigation report has no missing transitions");
  }
  const PageNode* node = ptg.find_node(report.page_id);
  if (!node) {
    throw UnknownPageError("page id '" + report.page_id + "' not in PTG");
  }

  std::ostringstream missing_list;
  int index = 1;
  for (const auto& key : report.missing) {
    // Recover the display name and trigger condition from the PTG edge
    // whose normalized key matches.
    std::string target_name = key.target;
    std::string condition = "unspecified";
    for (const auto& edge : ptg.edges) {
      if (edge.source != report.page_id) {
        continue;
      }
      const PageNode* target = ptg.find_node(edge.target);
      if (target && normalize_page_name(target->name) == key.target) {
        target_name = target->name;
        condition = edge.condition;
        break;
      }
    }
    missing_list << index++ << ". from " << node->name << " to " << target_name
                 << " when " << condition << "\n";
  }

  PromptBundle bundle;
  bundle.purpose = Purpose::NavRepair;
  bundle.user_text = render(
      "nav_repair", {{"page_name", node->name},
                     {"file_name", page_file_name(node->name, framework)},
                     {"language_tag", framework.code_language_tag},
                     {"code", page_code},
                     {"missing_list", missing_list.str()}});
  if (page && options_.reattach_image_on_nav_repair) {
    bundle.images.push_back({page->image_path, "full page: " + node->name});
  }
  bundle.metadata["page_id"] = report.page_id;
  bundle.metadata["iteration"] = std::to_string(report.iteration);
  return bundle;
}

PromptBundle PromptFactory::build_compile_repair_prompt(
    const std::vector<Diagnostic>& diagnostics,
    const std::vector<RepairExcerpt>& snippets) const {
  if (diagnostics.empty()) {
    throw NothingToRepairError("no diagnostics to repair");
  }

  std::ostringstream sections;
  for (const auto& snippet : snippets) {
    sections << "## File: " << snippet.file << "\n\nDiagnostics:\n";
    std::vector<const Diagnostic*> file_diags;
    for (const auto& d : diagnostics) {
      if (d.file == snippet.file && d.severity == DiagSeverity::Error) {
        file_diags.push_back(&d);
      }
    }
    std::stable_sort(file_diags.begin(), file_diags.end(),
                     [](const Diagnostic* a, const Diagnostic* b) {
                       return a->line.value_or(0) < b->line.value_or(0);
                     });
    for (const Diagnostic* d : file_diags) {
      sections << "- line "
               << (d->line ? std::to_string(*d->line) : std::string("?"))
               << ": " << d->message << "\n";
    }
    sections << "\nExcerpt:\n```\n" << snippet.excerpt << "```\n\n";
  }

  PromptBundle bundle;
  bundle.purpose = Purpose::CompileRepair;
  bundle.user_text = render("compile_repair", {{"sections", sections.str()}});
  return bundle;
}

PromptBundle PromptFactory::build_classify_prompt(
    const std::string& crop_path, const BoundingBox& box) const {
  std::ostringstream box_text;
  box_text << "x=" << fmt_num(box.x) << " y=" << fmt_num(box.y)
           << " w=" << fmt_num(box.width) << " h=" << fmt_num(box.height);
  PromptBundle bundle;
  bundle.purpose = Purpose::Classify;
  bundle.user_text = render("classify", {{"component_box", box_text.str()}});
  bundle.images.push_back({crop_path, "segmented component crop"});
  return bundle;
}

}  // namespace declarui
