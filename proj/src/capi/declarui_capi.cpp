#include "declarui/declarui.h"

#include <cstring>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>
#include <string>

#include <nlohmann/json.hpp>

#include "../core/config.hpp"
#include "../core/metrics.hpp"
#include "../core/modelclient.hpp"
#include "../core/navcheck.hpp"
#include "../core/perception.hpp"
#include "../core/prompts.hpp"
#include "../core/ptg.hpp"
#include "../core/refine.hpp"
#include "../core/util.hpp"

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

thread_local std::string g_last_error;

struct PtgHandle {
  declarui::PageTransitionGraph graph;
};

declarui::PageTransitionGraph* unwrap(declarui_ptg* handle) {
  return &reinterpret_cast<PtgHandle*>(handle)->graph;
}

const declarui::PageTransitionGraph* unwrap(const declarui_ptg* handle) {
  return &reinterpret_cast<const PtgHandle*>(handle)->graph;
}

char* dup_string(const std::string& text) {
  char* out = static_cast<char*>(std::malloc(text.size() + 1));
  std::memcpy(out, text.c_str(), text.size() + 1);
  return out;
}

declarui_status status_of(const declarui::Error& e) {
  return static_cast<declarui_status>(static_cast<int>(e.code()));
}

template <typename Fn>
declarui_status guarded(Fn&& fn) {
  try {
    fn();
    return DECLARUI_OK;
  } catch (const declarui::Error& e) {
    g_last_error = e.what();
    return status_of(e);
  } catch (const std::exception& e) {
    g_last_error = e.what();
    return DECLARUI_ERR_INTERNAL;
  }
}

json edge_keys_json(const declarui::EdgeKeySet& keys) {
  json arr = json::array();
  for (const auto& key : keys) {
    arr.push_back({{"source", key.source}, {"target", key.target}});
  }
  return arr;
}

json report_json(const declarui::NavReport& report) {
  return {{"page_id", report.page_id},
          {"required", edge_keys_json(report.required)},
          {"implemented", edge_keys_json(report.implemented)},
          {"missing", edge_keys_json(report.missing)},
          {"extra", edge_keys_json(report.extra)},
          {"iteration", report.iteration}};
}

// Shared model/prompt setup for the single-stage entry points.
struct StageContext {
  declarui::RunConfig config;
  declarui::PromptFactory prompts;
  std::shared_ptr<declarui::TokenBudget> budget;
  std::unique_ptr<declarui::ModelClient> model;

  explicit StageContext(const char* config_path)
      : config(declarui::load_run_config(config_path)),
        prompts(config.template_dir,
                [this] {
                  declarui::PromptOptions opts;
                  opts.char_budget = static_cast<size_t>(config.char_budget);
                  opts.reattach_image_on_nav_repair =
                      config.attach_image_on_nav_repair;
                  return opts;
                }()),
        budget(std::make_shared<declarui::TokenBudget>(config.token_budget)) {
    if (config.model_backend == "mock") {
      model = std::make_unique<declarui::MockModelClient>(
          declarui::load_scenario_script(config.model_scenario_dir), budget);
    } else {
      declarui::HttpModelConfig http;
      http.endpoint = config.model_endpoint;
      http.model_id = config.model_id;
      http.temperature = config.temperature;
      if (const char* key = std::getenv("MODEL_API_KEY")) {
        http.api_key = key;
      }
      model = std::make_unique<declarui::HttpModelClient>(http, budget);
    }
  }
};

}  // namespace

extern "C" {

const char* declarui_version(void) { return "0.1.0"; }

const char* declarui_last_error(void) { return g_last_error.c_str(); }

void declarui_string_free(char* text) { std::free(text); }

declarui_status declarui_ptg_parse(const char* json_text, declarui_ptg** out) {
  return guarded([&] {
    auto handle = std::make_unique<PtgHandle>();
    handle->graph = declarui::parse_ptg(json_text);
    *out = reinterpret_cast<declarui_ptg*>(handle.release());
  });
}

declarui_status declarui_ptg_parse_lenient(const char* json_text,
                                           declarui_ptg** out) {
  return guarded([&] {
    auto handle = std::make_unique<PtgHandle>();
    handle->graph = declarui::parse_ptg_lenient(json_text);
    *out = reinterpret_cast<declarui_ptg*>(handle.release());
  });
}

declarui_status declarui_ptg_load(const char* path, declarui_ptg** out) {
  return guarded([&] {
    auto handle = std::make_unique<PtgHandle>();
    handle->graph = declarui::load_ptg_file(path);
    *out = reinterpret_cast<declarui_ptg*>(handle.release());
  });
}

declarui_status declarui_ptg_serialize(const declarui_ptg* ptg,
                                       char** out_json) {
  return guarded([&] {
    *out_json = dup_string(declarui::serialize_ptg(*unwrap(ptg)));
  });
}

declarui_status declarui_ptg_validate(const declarui_ptg* ptg,
                                      char** out_violations_json,
                                      int* out_error_count) {
  return guarded([&] {
    auto violations = declarui::validate_ptg(*unwrap(ptg));
    json arr = json::array();
    int errors = 0;
    for (const auto& v : violations) {
      if (v.severity == declarui::Severity::Error) {
        ++errors;
      }
      arr.push_back({{"code", v.code},
                     {"severity", v.severity == declarui::Severity::Error
                                      ? "error"
                                      : "warning"},
                     {"message", v.message},
                     {"element_id", v.element_id}});
    }
    if (out_violations_json) {
      *out_violations_json = dup_string(arr.dump(2));
    }
    if (out_error_count) {
      *out_error_count = errors;
    }
  });
}

declarui_status declarui_ptg_coverage(const declarui_ptg* ptg,
                                      const char* utg_json,
                                      char** out_result_json) {
  return guarded([&] {
    declarui::UiTransitionGraph utg = declarui::parse_utg(utg_json);
    declarui::CoverageResult result =
        declarui::ptg_coverage(*unwrap(ptg), utg);
    json doc = {{"pcr", result.pcr},
                {"matched", edge_keys_json(result.matched)},
                {"missing", edge_keys_json(result.missing)}};
    *out_result_json = dup_string(doc.dump(2));
  });
}

void declarui_ptg_free(declarui_ptg* ptg) {
  delete reinterpret_cast<PtgHandle*>(ptg);
}

declarui_status declarui_normalize_page_name(const char* name, char** out) {
  return guarded([&] {
    *out = dup_string(declarui::normalize_page_name(name));
  });
}

declarui_status declarui_extract_navigation(const char* code,
                                            const char* framework,
                                            char** out_json) {
  return guarded([&] {
    const declarui::Framework& fw = declarui::framework_by_name(framework);
    json arr = json::array();
    for (const auto& hit : declarui::extract_navigation(code, fw)) {
      arr.push_back({{"target", hit.target_token},
                     {"pattern", hit.pattern_name},
                     {"line", hit.line}});
    }
    *out_json = dup_string(arr.dump(2));
  });
}

declarui_status declarui_navcheck_page(const char* code, const char* page_id,
                                       const declarui_ptg* ptg,
                                       const char* framework,
                                       char** out_report_json) {
  return guarded([&] {
    const declarui::Framework& fw = declarui::framework_by_name(framework);
    declarui::NavReport report =
        declarui::check_page(code, page_id, *unwrap(ptg), fw, 0);
    *out_report_json = dup_string(report_json(report).dump(2));
  });
}

declarui_status declarui_navcheck_project(const char* project_dir,
                                          const char* ptg_path,
                                          const char* framework,
                                          char** out_report_json) {
  return guarded([&] {
    const declarui::Framework& fw = declarui::framework_by_name(framework);
    declarui::PageTransitionGraph ptg = declarui::load_ptg_file(ptg_path);

    json pages = json::array();
    int total_missing = 0;
    for (const auto& node : ptg.nodes) {
      const std::string file_name = declarui::page_file_name(node.name, fw);
      // The page file may live anywhere under the project tree.
      std::string found;
      for (const auto& entry : fs::recursive_directory_iterator(project_dir)) {
        if (entry.is_regular_file() &&
            entry.path().filename().string() == file_name) {
          found = entry.path().string();
          break;
        }
      }
      json page = {{"page_id", node.id}, {"file", file_name}};
      if (found.empty()) {
        page["status"] = "file_not_found";
        declarui::NavReport empty = declarui::diff_navigation(ptg, node.id, {});
        page["report"] = report_json(empty);
        total_missing += static_cast<int>(empty.missing.size());
      } else {
        declarui::NavReport report = declarui::check_page(
            declarui::read_text_file(found), node.id, ptg, fw, 0);
        page["status"] = report.missing.empty() ? "ok" : "missing_transitions";
        page["report"] = report_json(report);
        total_missing += static_cast<int>(report.missing.size());
      }
      pages.push_back(std::move(page));
    }
    json doc = {{"pages", pages}, {"total_missing", total_missing}};
    *out_report_json = dup_string(doc.dump(2));
  });
}

declarui_status declarui_framework_patterns(const char* framework,
                                            char** out_json) {
  return guarded([&] {
    const declarui::Framework& fw = declarui::framework_by_name(framework);
    json arr = json::array();
    for (const auto& pattern : fw.patterns) {
      arr.push_back({{"name", pattern.name},
                     {"regex", pattern.matcher},
                     {"transform", declarui::to_string(pattern.transform)}});
    }
    *out_json = dup_string(arr.dump(2));
  });
}

declarui_status declarui_ssim_files(const char* image_a, const char* image_b,
                                    double* out_value) {
  return guarded([&] {
    *out_value = declarui::ssim_files(image_a, image_b);
  });
}

declarui_status declarui_eval(const char* runs_dir, const char* utg_dir,
                              const char* screenshots_dir, int pooled_pcr,
                              int format, char** out_report) {
  return guarded([&] {
    declarui::MetricsReport report = declarui::evaluate_runs(
        runs_dir, utg_dir ? utg_dir : "",
        screenshots_dir ? screenshots_dir : "", pooled_pcr != 0);
    *out_report = dup_string(declarui::emit_report(
        report, format == 1 ? declarui::ReportFormat::MarkdownTable
                            : declarui::ReportFormat::Json));
  });
}

declarui_status declarui_run_pipeline(const char* config_path,
                                      char** out_manifest_json) {
  return guarded([&] {
    declarui::RunConfig config = declarui::load_run_config(config_path);
    declarui::AppDesignSet app =
        declarui::discover_designs(config.app_id, config.designs_dir);
    declarui::RunManifest manifest = declarui::run_pipeline(app, config);
    *out_manifest_json = dup_string(declarui::serialize_manifest(manifest));
  });
}

declarui_status declarui_ptg_build(const char* config_path,
                                   const char* out_path,
                                   char** out_violations_json) {
  return guarded([&] {
    StageContext ctx(config_path);
    declarui::AppDesignSet app =
        declarui::discover_designs(ctx.config.app_id, ctx.config.designs_dir);
    declarui::PromptBundle bundle = ctx.prompts.build_ptg_prompt(
        app.pages, declarui::ptg_schema_text());
    bundle.metadata["app_id"] = ctx.config.app_id;
    declarui::ModelResponse response = ctx.model->complete(bundle);
    declarui::PageTransitionGraph ptg =
        declarui::parse_ptg(declarui::extract_json(response).dump());
    declarui::write_text_file(out_path, declarui::serialize_ptg(ptg));

    auto violations = declarui::validate_ptg(ptg);
    json arr = json::array();
    for (const auto& v : violations) {
      arr.push_back({{"code", v.code},
                     {"severity", v.severity == declarui::Severity::Error
                                      ? "error"
                                      : "warning"},
                     {"message", v.message},
                     {"element_id", v.element_id}});
    }
    if (out_violations_json) {
      *out_violations_json = dup_string(arr.dump(2));
    }
  });
}

declarui_status declarui_annotate(const char* config_path, const char* out_dir,
                                  char** out_summary_json) {
  return guarded([&] {
    StageContext ctx(config_path);
    declarui::AppDesignSet app =
        declarui::discover_designs(ctx.config.app_id, ctx.config.designs_dir);

    std::unique_ptr<declarui::DetectorClient> detector;
    std::unique_ptr<declarui::SegmenterClient> segmenter;
    if (ctx.config.perception_mode == "fixture") {
      detector = std::make_unique<declarui::FixtureDetector>(
          ctx.config.perception_scenario_dir);
      segmenter = std::make_unique<declarui::FixtureSegmenter>(
          ctx.config.perception_scenario_dir);
    } else {
      detector = std::make_unique<declarui::HttpDetector>(
          ctx.config.detector_endpoint);
      segmenter = std::make_unique<declarui::HttpSegmenter>(
          ctx.config.segmenter_endpoint);
    }

    json summary = json::array();
    for (const auto& design : app.pages) {
      declarui::PerceptionOptions options;
      options.detection_prompt = ctx.config.detection_prompt;
      options.confidence_threshold = ctx.config.confidence_threshold;
      options.mask_output_dir =
          (fs::path(out_dir) / design.page_id / "masks").string();
      declarui::PageDesign annotated = declarui::annotate_page(
          design.page_id, design.image_path, *detector, *segmenter,
          *ctx.model, ctx.prompts, options);
      fs::path bundle_path = fs::path(out_dir) / (design.page_id + ".json");
      declarui::write_text_file(bundle_path.string(),
                                declarui::serialize_page_design(annotated));
      summary.push_back({{"page_id", design.page_id},
                         {"components", annotated.components.size()},
                         {"bundle", bundle_path.string()}});
    }
    if (out_summary_json) {
      *out_summary_json = dup_string(summary.dump(2));
    }
  });
}

declarui_status declarui_compile_loop(const char* config_path,
                                      const char* project_dir,
                                      char** out_result_json) {
  return guarded([&] {
    StageContext ctx(config_path);
    if (ctx.config.compiler_command.empty()) {
      throw declarui::ConfigError("config: compiler.command is required");
    }
    const declarui::Framework& fw =
        declarui::framework_by_name(ctx.config.framework);

    declarui::RunManifest manifest;
    manifest.app_id = ctx.config.app_id;
    manifest.framework = fw.name;
    manifest.config_digest = ctx.config.config_digest;

    declarui::CompileLoopSettings settings;
    settings.profile.name = fw.compiler_profile;
    settings.profile.command = ctx.config.compiler_command;
    settings.profile.timeout_s = ctx.config.compiler_timeout_s;
    settings.profile.patterns =
        declarui::builtin_diag_patterns(fw.compiler_profile);
    settings.log_dir = (fs::path(project_dir) / ".declarui-compile").string();
    settings.window_lines = ctx.config.repair_window_lines;
    settings.max_files = ctx.config.repair_max_files;

    declarui::RecordingModelClient model(*ctx.model);
    manifest = declarui::compile_loop(project_dir, std::move(manifest),
                                      settings, model, ctx.prompts);
    manifest.token_usage = model.usage();
    *out_result_json = dup_string(declarui::serialize_manifest(manifest));
  });
}

}  // extern "C"
