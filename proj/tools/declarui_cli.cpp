// declarui command-line front end. Thin layer over the C API in
// include/declarui/declarui.h; all pipeline logic lives in the library.
//
// Exit codes: 0 success, 1 domain failure (violations, missing transitions,
// CompilationFailed, ...), 2 usage or configuration error.

#include <cstdlib>
#include <iostream>
#include <memory>
#include <string>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <declarui/declarui.h>

using nlohmann::json;

namespace {

struct GlobalOpts {
  std::string config;
  std::string framework;
  std::string mock_scenario;
  bool as_json = false;
};

// Owns a string returned by the library.
struct CStr {
  char* ptr = nullptr;
  ~CStr() { declarui_string_free(ptr); }
  std::string str() const { return ptr ? ptr : ""; }
};

int fail(declarui_status status) {
  std::cerr << "error (" << static_cast<int>(status)
            << "): " << declarui_last_error() << "\n";
  return status == DECLARUI_ERR_CONFIG ? 2 : 1;
}

int require_config(const GlobalOpts& g) {
  if (g.config.empty()) {
    std::cerr << "error: --config is required for this command\n";
    return 2;
  }
  // Flag overrides travel to the library through the environment.
  if (!g.framework.empty()) {
    setenv("DECLARUI_FRAMEWORK", g.framework.c_str(), 1);
  }
  if (!g.mock_scenario.empty()) {
    setenv("DECLARUI_MOCK_SCENARIO", g.mock_scenario.c_str(), 1);
  }
  return 0;
}

int cmd_ptg_build(const GlobalOpts& g, const std::string& out_path) {
  if (int rc = require_config(g)) return rc;
  CStr violations;
  declarui_status st =
      declarui_ptg_build(g.config.c_str(), out_path.c_str(), &violations.ptr);
  if (st != DECLARUI_OK) return fail(st);
  json arr = json::parse(violations.str());
  if (g.as_json) {
    std::cout << json{{"ptg_path", out_path}, {"violations", arr}}.dump(2)
              << "\n";
  } else {
    std::cout << "wrote " << out_path << "\n";
    for (const auto& v : arr) {
      std::cout << "  [" << v.value("severity", "") << "] "
                << v.value("code", "") << ": " << v.value("message", "")
                << "\n";
    }
    if (arr.empty()) std::cout << "  no violations\n";
  }
  return 0;
}

int cmd_ptg_validate(const GlobalOpts& g, const std::string& ptg_path) {
  declarui_ptg* ptg = nullptr;
  declarui_status st = declarui_ptg_load(ptg_path.c_str(), &ptg);
  if (st == DECLARUI_ERR_INTEGRITY || st == DECLARUI_ERR_SCHEMA) {
    // Integrity problems should still be listed in full; reload leniently.
    std::string text;
    {
      FILE* f = std::fopen(ptg_path.c_str(), "rb");
      if (!f) return fail(st);
      char buf[4096];
      size_t n;
      while ((n = std::fread(buf, 1, sizeof buf, f)) > 0) text.append(buf, n);
      std::fclose(f);
    }
    st = declarui_ptg_parse_lenient(text.c_str(), &ptg);
  }
  if (st != DECLARUI_OK) return fail(st);

  CStr violations;
  int errors = 0;
  st = declarui_ptg_validate(ptg, &violations.ptr, &errors);
  declarui_ptg_free(ptg);
  if (st != DECLARUI_OK) return fail(st);

  json arr = json::parse(violations.str());
  if (g.as_json) {
    std::cout << json{{"violations", arr}, {"error_count", errors}}.dump(2)
              << "\n";
  } else {
    for (const auto& v : arr) {
      std::cout << "[" << v.value("severity", "") << "] " << v.value("code", "")
                << ": " << v.value("message", "") << "\n";
    }
    std::cout << (errors == 0 ? "ok" : "invalid") << " (" << errors
              << " errors, " << arr.size() - errors << " warnings)\n";
  }
  return errors == 0 ? 0 : 1;
}

int cmd_annotate(const GlobalOpts& g, const std::string& out_dir) {
  if (int rc = require_config(g)) return rc;
  CStr summary;
  declarui_status st =
      declarui_annotate(g.config.c_str(), out_dir.c_str(), &summary.ptr);
  if (st != DECLARUI_OK) return fail(st);
  if (g.as_json) {
    std::cout << summary.str() << "\n";
  } else {
    for (const auto& row : json::parse(summary.str())) {
      std::cout << row.value("page_id", "") << ": "
                << row.value("components", 0) << " components -> "
                << row.value("bundle", "") << "\n";
    }
  }
  return 0;
}

int cmd_generate(const GlobalOpts& g) {
  if (int rc = require_config(g)) return rc;
  CStr manifest;
  declarui_status st = declarui_run_pipeline(g.config.c_str(), &manifest.ptr);
  if (st != DECLARUI_OK) return fail(st);
  json doc = json::parse(manifest.str());
  if (g.as_json) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << "app " << doc.value("app_id", "") << ": "
              << doc.value("status", "") << " after "
              << doc.value("compile_attempts", 0) << " compile attempt(s)\n";
  }
  return doc.value("status", "") == "Compiled" ? 0 : 1;
}

int cmd_navcheck(const GlobalOpts& g, const std::string& project_dir,
                 const std::string& ptg_path, const std::string& framework) {
  CStr report;
  declarui_status st = declarui_navcheck_project(
      project_dir.c_str(), ptg_path.c_str(), framework.c_str(), &report.ptr);
  if (st != DECLARUI_OK) return fail(st);
  json doc = json::parse(report.str());
  int missing = doc.value("total_missing", 0);
  if (g.as_json) {
    std::cout << doc.dump(2) << "\n";
  } else {
    for (const auto& page : doc["pages"]) {
      std::cout << page.value("page_id", "") << " (" << page.value("file", "")
                << "): " << page.value("status", "") << "\n";
    }
    std::cout << missing << " missing transition(s)\n";
  }
  return missing == 0 ? 0 : 1;
}

int cmd_compile_loop(const GlobalOpts& g, const std::string& project_dir) {
  if (int rc = require_config(g)) return rc;
  CStr result;
  declarui_status st = declarui_compile_loop(g.config.c_str(),
                                             project_dir.c_str(), &result.ptr);
  if (st != DECLARUI_OK) return fail(st);
  json doc = json::parse(result.str());
  if (g.as_json) {
    std::cout << doc.dump(2) << "\n";
  } else {
    std::cout << doc.value("status", "") << " after "
              << doc.value("compile_attempts", 0) << " attempt(s)\n";
  }
  return doc.value("compiled", false) ? 0 : 1;
}

int cmd_eval(const GlobalOpts& g, const std::string& runs_dir,
             const std::string& utg_dir, const std::string& screenshots_dir,
             bool pooled, bool markdown) {
  CStr report;
  declarui_status st = declarui_eval(
      runs_dir.c_str(), utg_dir.empty() ? nullptr : utg_dir.c_str(),
      screenshots_dir.empty() ? nullptr : screenshots_dir.c_str(),
      pooled ? 1 : 0, (markdown && !g.as_json) ? 1 : 0, &report.ptr);
  if (st != DECLARUI_OK) return fail(st);
  std::cout << report.str() << "\n";
  return 0;
}

int cmd_ssim(const GlobalOpts& g, const std::string& a, const std::string& b) {
  double value = 0.0;
  declarui_status st = declarui_ssim_files(a.c_str(), b.c_str(), &value);
  if (st != DECLARUI_OK) return fail(st);
  if (g.as_json) {
    std::cout << json{{"ssim", value}}.dump() << "\n";
  } else {
    std::cout << value << "\n";
  }
  return 0;
}

int cmd_patterns(const GlobalOpts& g, const std::string& framework) {
  CStr out;
  declarui_status st = declarui_framework_patterns(framework.c_str(), &out.ptr);
  if (st != DECLARUI_OK) return fail(st);
  if (g.as_json) {
    std::cout << out.str() << "\n";
  } else {
    for (const auto& p : json::parse(out.str())) {
      std::cout << p.value("name", "") << " [" << p.value("transform", "")
                << "]: " << p.value("regex", "") << "\n";
    }
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"declarui: UI designs to declarative UI code"};
  app.set_version_flag("--version", declarui_version());
  app.require_subcommand(1);

  GlobalOpts g;
  app.add_option("--config", g.config, "run config (TOML)");
  app.add_option("--framework", g.framework,
                 "framework override (ReactNative|Flutter|ArkUI)");
  app.add_option("--mock-scenario", g.mock_scenario,
                 "use the mock model backend with this scenario dir");
  app.add_flag("--json", g.as_json, "machine-readable JSON output");

  auto* ptg = app.add_subcommand("ptg", "page transition graph tools");
  ptg->require_subcommand(1);

  std::string ptg_out = "ptg.json";
  auto* ptg_build = ptg->add_subcommand("build", "build a PTG via the model");
  ptg_build->add_option("--out", ptg_out, "output path");

  std::string ptg_path;
  auto* ptg_validate = ptg->add_subcommand("validate", "validate a PTG file");
  ptg_validate->add_option("ptg", ptg_path, "ptg.json path")->required();

  std::string annotate_out;
  auto* annotate = app.add_subcommand("annotate", "perception per page");
  annotate->add_option("--out", annotate_out, "output directory")->required();

  auto* generate = app.add_subcommand("generate", "full pipeline run");

  std::string nav_project, nav_ptg, nav_framework;
  auto* navcheck = app.add_subcommand("navcheck", "offline navigation audit");
  navcheck->add_option("project", nav_project, "project dir")->required();
  navcheck->add_option("--ptg", nav_ptg, "ptg.json path")->required();
  navcheck->add_option("--framework", nav_framework, "framework")->required();

  std::string loop_project;
  auto* compile_loop =
      app.add_subcommand("compile-loop", "compile-repair loop only");
  compile_loop->add_option("project", loop_project, "project dir")->required();

  std::string eval_runs, eval_utg, eval_shots;
  bool eval_pooled = false, eval_md = false;
  auto* eval = app.add_subcommand("eval", "metrics over a runs directory");
  eval->add_option("runs", eval_runs, "runs dir")->required();
  eval->add_option("--utg-dir", eval_utg, "UTG files, <app_id>.json each");
  eval->add_option("--screenshots-dir", eval_shots,
                   "<app>/rendered and <app>/reference pairs");
  eval->add_flag("--pooled-pcr", eval_pooled, "pooled-edge PCR ratio");
  eval->add_flag("--markdown", eval_md, "markdown table output");

  std::string ssim_a, ssim_b;
  auto* ssim = app.add_subcommand("ssim", "SSIM between two images");
  ssim->add_option("a", ssim_a, "first image")->required();
  ssim->add_option("b", ssim_b, "second image")->required();

  std::string patterns_fw;
  auto* patterns =
      app.add_subcommand("patterns", "dump shipped extraction patterns");
  patterns->add_option("framework", patterns_fw, "framework")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  if (ptg_build->parsed()) return cmd_ptg_build(g, ptg_out);
  if (ptg_validate->parsed()) return cmd_ptg_validate(g, ptg_path);
  if (annotate->parsed()) return cmd_annotate(g, annotate_out);
  if (generate->parsed()) return cmd_generate(g);
  if (navcheck->parsed())
    return cmd_navcheck(g, nav_project, nav_ptg, nav_framework);
  if (compile_loop->parsed()) return cmd_compile_loop(g, loop_project);
  if (eval->parsed())
    return cmd_eval(g, eval_runs, eval_utg, eval_shots, eval_pooled, eval_md);
  if (ssim->parsed()) return cmd_ssim(g, ssim_a, ssim_b);
  if (patterns->parsed()) return cmd_patterns(g, patterns_fw);
  return 2;
}
