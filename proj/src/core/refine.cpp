#include "refine.hpp"

#include <algorithm>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <future>
#include <regex>
#include <sstream>

#include "util.hpp"

namespace declarui {

namespace fs = std::filesystem;

namespace {

std::string code_or_retry(ModelClient& model, const PromptBundle& bundle,
                          const std::string& language_tag) {
  ModelResponse response = model.complete(bundle);
  try {
    return extract_code_block(response, language_tag);
  } catch (const EmptyCodeError&) {
    response = model.complete(bundle);
    return extract_code_block(response, language_tag);
  }
}

// Matches PTG node ids to design page ids, falling back to normalized-name
// matching when the MLLM picked different ids than the image stems.
std::string resolve_page_node(const PageTransitionGraph& ptg,
                              const std::string& page_id) {
  if (ptg.find_node(page_id)) {
    return page_id;
  }
  const std::string wanted = normalize_page_name(page_id);
  for (const auto& node : ptg.nodes) {
    if (normalize_page_name(node.name) == wanted ||
        normalize_page_name(node.id) == wanted) {
      return node.id;
    }
  }
  throw UnknownPageError("design page '" + page_id +
                         "' matches no PTG node");
}

}  // namespace

ModelResponse RecordingModelClient::complete(const PromptBundle& bundle) {
  ModelResponse response = inner_.complete(bundle);
  std::lock_guard<std::mutex> lock(mutex_);
  usage_.input_tokens += response.input_tokens;
  usage_.output_tokens += response.output_tokens;
  return response;
}

TokenUsage RecordingModelClient::usage() const {
  std::lock_guard<std::mutex> lock(mutex_);
  return usage_;
}

GeneratedPage generate_page_with_nav_loop(const PageDesign& page,
                                          const PageTransitionGraph& ptg,
                                          const Framework& framework,
                                          ModelClient& model,
                                          const PromptFactory& prompts) {
  GeneratedPage result;
  result.page_id = page.page_id;
  const PageNode* node = ptg.find_node(page.page_id);
  if (!node) {
    throw UnknownPageError("page id '" + page.page_id + "' not in PTG");
  }
  result.file_name = page_file_name(node->name, framework);

  try {
    PromptBundle gen = prompts.build_generation_prompt(page, ptg, framework);
    result.code = code_or_retry(model, gen, framework.code_language_tag);
    NavReport report =
        check_page(result.code, page.page_id, ptg, framework, 0);
    result.history.push_back({0, fnv1a_hex(result.code),
                              static_cast<int>(report.missing.size())});

    while (!report.missing.empty() &&
           result.nav_iterations < kMaxNavIterations) {
      PromptBundle repair = prompts.build_nav_repair_prompt(
          result.code, report, ptg, framework, &page);
      repair.metadata["iteration"] =
          std::to_string(result.nav_iterations + 1);
      result.code =
          code_or_retry(model, repair, framework.code_language_tag);
      ++result.nav_iterations;
      report = check_page(result.code, page.page_id, ptg, framework,
                          result.nav_iterations);
      result.history.push_back({result.nav_iterations, fnv1a_hex(result.code),
                                static_cast<int>(report.missing.size())});
    }
    result.final_report = report;
  } catch (const Error& e) {
    if (e.code() == ErrorCode::Client || e.code() == ErrorCode::EmptyCode ||
        e.code() == ErrorCode::Budget) {
      result.aborted = true;
      result.abort_reason = e.what();
      return result;
    }
    throw;
  }
  return result;
}

std::vector<std::pair<std::string, std::string>> parse_repair_reply(
    const std::string& reply_text) {
  static const std::regex marker(
      R"(^\s*(?://|#|--|;)\s*[Ff]ile:\s*(\S+)\s*$)");

  std::vector<std::pair<std::string, std::string>> files;
  std::istringstream stream(reply_text);
  std::string line;
  bool inside = false;
  std::string current_file;
  std::string current_body;
  bool marker_pending = false;
  while (std::getline(stream, line)) {
    if (!line.empty() && line.back() == '\r') {
      line.pop_back();
    }
    if (line.rfind("```", 0) == 0) {
      if (!inside) {
        inside = true;
        current_file.clear();
        current_body.clear();
        marker_pending = true;
      } else {
        inside = false;
        if (!current_file.empty()) {
          files.emplace_back(current_file, current_body);
        }
      }
      continue;
    }
    if (!inside) {
      continue;
    }
    if (marker_pending) {
      marker_pending = false;
      std::smatch m;
      if (std::regex_match(line, m, marker)) {
        current_file = m.str(1);
        continue;  // the marker line is not part of the file contents
      }
    }
    current_body += line;
    current_body += "\n";
  }
  return files;
}

RunManifest compile_loop(const std::string& project_dir, RunManifest manifest,
                         const CompileLoopSettings& settings,
                         ModelClient& model, const PromptFactory& prompts) {
  fs::create_directories(settings.log_dir);

  for (int attempt = 1; attempt <= kMaxCompileAttempts; ++attempt) {
    CompileResult result;
    try {
      result = run_compiler(project_dir, settings.profile, attempt);
    } catch (const SpawnError& e) {
      manifest.status = RunStatus::Aborted;
      manifest.abort_stage = std::string("compile: ") + e.what();
      return manifest;
    }
    manifest.compile_attempts = attempt;
    write_text_file(
        (fs::path(settings.log_dir) / ("attempt-" + std::to_string(attempt) +
                                       ".log"))
            .string(),
        result.raw_output);

    if (result.success) {
      manifest.compiled = true;
      manifest.compile_iterations_used = attempt - 1;
      manifest.status = RunStatus::Compiled;
      return manifest;
    }
    if (attempt == kMaxCompileAttempts) {
      break;
    }

    try {
      std::vector<RepairExcerpt> context =
          select_repair_context(result.diagnostics, project_dir,
                                settings.window_lines, settings.max_files);
      PromptBundle repair =
          prompts.build_compile_repair_prompt(result.diagnostics, context);
      repair.metadata["attempt"] = std::to_string(attempt);
      ModelResponse response = model.complete(repair);
      auto replacements = parse_repair_reply(response.text);
      if (replacements.empty()) {
        // Partial or unmarked reply: re-ask once for complete files.
        response = model.complete(repair);
        replacements = parse_repair_reply(response.text);
      }
      for (const auto& [rel_path, contents] : replacements) {
        write_text_file((fs::path(project_dir) / rel_path).string(), contents);
      }
    } catch (const Error& e) {
      if (e.code() == ErrorCode::Client || e.code() == ErrorCode::Budget) {
        manifest.compiled = false;
        manifest.compile_iterations_used = attempt - 1;
        manifest.status = RunStatus::CompilationFailed;
        manifest.abort_stage = std::string("compile-repair: ") + e.what();
        return manifest;
      }
      throw;
    }
  }

  manifest.compiled = false;
  manifest.compile_iterations_used = kMaxCompileAttempts - 1;
  manifest.status = RunStatus::CompilationFailed;
  return manifest;
}

AppDesignSet discover_designs(const std::string& app_id,
                              const std::string& designs_dir) {
  AppDesignSet app;
  app.app_id = app_id;
  std::vector<fs::path> images;
  for (const auto& entry : fs::directory_iterator(designs_dir)) {
    if (!entry.is_regular_file()) {
      continue;
    }
    std::string ext = entry.path().extension().string();
    std::transform(ext.begin(), ext.end(), ext.begin(), ::tolower);
    if (ext == ".png" || ext == ".jpg" || ext == ".jpeg") {
      images.push_back(entry.path());
    }
  }
  std::sort(images.begin(), images.end());
  if (images.empty()) {
    throw ConfigError("no page images found under " + designs_dir);
  }
  for (const auto& image : images) {
    PageDesign page;
    page.page_id = image.stem().string();
    page.image_path = image.string();
    app.pages.push_back(std::move(page));
  }
  return app;
}

RunManifest run_pipeline(const AppDesignSet& app, const RunConfig& config) {
  const auto started = std::chrono::steady_clock::now();
  const Framework& framework = framework_by_name(config.framework);

  PromptOptions prompt_options;
  prompt_options.char_budget = static_cast<size_t>(config.char_budget);
  prompt_options.reattach_image_on_nav_repair =
      config.attach_image_on_nav_repair;
  PromptFactory prompts(config.template_dir, prompt_options);

  auto budget = std::make_shared<TokenBudget>(config.token_budget);
  std::unique_ptr<ModelClient> backend;
  if (config.model_backend == "mock") {
    backend = std::make_unique<MockModelClient>(
        load_scenario_script(config.model_scenario_dir), budget);
  } else {
    HttpModelConfig http;
    http.endpoint = config.model_endpoint;
    http.model_id = config.model_id;
    http.temperature = config.temperature;
    if (const char* key = std::getenv("MODEL_API_KEY")) {
      http.api_key = key;
    }
    backend = std::make_unique<HttpModelClient>(http, budget);
  }
  RecordingModelClient model(*backend);

  std::unique_ptr<DetectorClient> detector;
  std::unique_ptr<SegmenterClient> segmenter;
  if (config.perception_mode == "fixture") {
    detector = std::make_unique<FixtureDetector>(config.perception_scenario_dir);
    segmenter =
        std::make_unique<FixtureSegmenter>(config.perception_scenario_dir);
  } else {
    detector = std::make_unique<HttpDetector>(config.detector_endpoint);
    segmenter = std::make_unique<HttpSegmenter>(config.segmenter_endpoint);
  }

  const fs::path run_dir = fs::path(config.runs_dir) / app.app_id;
  fs::create_directories(run_dir);

  RunManifest manifest;
  manifest.app_id = app.app_id;
  manifest.framework = framework.name;
  manifest.config_digest = config.config_digest;

  auto persist = [&] {
    manifest.wall_clock_s = std::chrono::duration<double>(
                                std::chrono::steady_clock::now() - started)
                                .count();
    manifest.token_usage = model.usage();
    write_text_file((run_dir / "manifest.json").string(),
                    serialize_manifest(manifest));
  };

  auto abort_run = [&](const std::string& stage, const std::string& why) {
    manifest.status = RunStatus::Aborted;
    manifest.abort_stage = stage + ": " + why;
    persist();
    return manifest;
  };

  // Stage: PTG (built by the model unless a human-reviewed one is supplied).
  PageTransitionGraph ptg;
  try {
    if (!config.ptg_path.empty()) {
      ptg = load_ptg_file(config.ptg_path);
    } else {
      PromptBundle bundle = prompts.build_ptg_prompt(app.pages,
                                                     ptg_schema_text());
      bundle.metadata["app_id"] = app.app_id;
      ModelResponse response = model.complete(bundle);
      ptg = parse_ptg(extract_json(response).dump());
    }
    std::vector<Violation> violations = validate_ptg(ptg);
    if (has_error_violation(violations)) {
      std::string detail;
      for (const auto& v : violations) {
        if (v.severity == Severity::Error) {
          detail += v.code + "(" + v.element_id + ") ";
        }
      }
      return abort_run("ptg", "validation failed: " + detail);
    }
    write_text_file((run_dir / "ptg.json").string(), serialize_ptg(ptg));
  } catch (const Error& e) {
    return abort_run("ptg", e.what());
  }

  // Stage: per-page annotation + generation, bounded worker pool.
  std::vector<GeneratedPage> generated(app.pages.size());
  try {
    std::vector<PageDesign> designs = app.pages;
    for (auto& design : designs) {
      design.page_id = resolve_page_node(ptg, design.page_id);
    }

    auto work = [&](size_t index) {
      PerceptionOptions perception;
      perception.detection_prompt = config.detection_prompt;
      perception.confidence_threshold = config.confidence_threshold;
      perception.mask_output_dir =
          (run_dir / "pages" / designs[index].page_id).string();
      PageDesign annotated = annotate_page(
          designs[index].page_id, designs[index].image_path, *detector,
          *segmenter, model, prompts, perception);
      generated[index] = generate_page_with_nav_loop(annotated, ptg, framework,
                                                     model, prompts);
    };

    const size_t workers =
        std::max(1, std::min(config.workers,
                             static_cast<int>(designs.size())));
    for (size_t base = 0; base < designs.size(); base += workers) {
      std::vector<std::future<void>> batch;
      for (size_t i = base; i < std::min(base + workers, designs.size());
           ++i) {
        batch.push_back(std::async(std::launch::async, work, i));
      }
      for (auto& task : batch) {
        task.get();
      }
    }
  } catch (const Error& e) {
    return abort_run("generate", e.what());
  }

  manifest.pages = generated;
  for (const auto& page : generated) {
    if (page.aborted) {
      return abort_run("generate",
                       "page " + page.page_id + ": " + page.abort_reason);
    }
  }

  // Assemble the project at framework-conventional paths.
  const fs::path project_dir = run_dir / "project";
  try {
    for (const auto& page : generated) {
      fs::path rel = fs::path(framework.project_subdir) / page.file_name;
      write_text_file((project_dir / rel).string(), page.code);
      write_text_file((run_dir / "pages" / page.file_name).string(),
                      page.code);
    }
  } catch (const Error& e) {
    return abort_run("assemble", e.what());
  }

  // Stage: compile/repair loop.
  if (config.compiler_command.empty()) {
    return abort_run("compile", "no compiler command configured");
  }
  CompileLoopSettings settings;
  settings.profile.name = framework.compiler_profile;
  settings.profile.command = config.compiler_command;
  settings.profile.timeout_s = config.compiler_timeout_s;
  settings.profile.patterns = builtin_diag_patterns(framework.compiler_profile);
  settings.log_dir = (run_dir / "compile").string();
  settings.window_lines = config.repair_window_lines;
  settings.max_files = config.repair_max_files;
  manifest = compile_loop(project_dir.string(), std::move(manifest), settings,
                          model, prompts);

  // Post-repair navigation audit: regressions are logged, never looped on.
  if (manifest.compile_iterations_used > 0) {
    std::string audit;
    for (auto& page : manifest.pages) {
      fs::path path =
          project_dir / framework.project_subdir / page.file_name;
      std::ifstream in(path);
      if (!in) {
        continue;
      }
      std::ostringstream buf;
      buf << in.rdbuf();
      NavReport after = check_page(buf.str(), page.page_id, ptg, framework,
                                   page.final_report.iteration);
      if (after.missing.size() > page.final_report.missing.size()) {
        audit += page.page_id + ": missing grew from " +
                 std::to_string(page.final_report.missing.size()) + " to " +
                 std::to_string(after.missing.size()) + "\n";
      }
    }
    if (!audit.empty()) {
      write_text_file((run_dir / "compile" / "nav-regressions.log").string(),
                      audit);
    }
  }

  persist();
  return manifest;
}

}  // namespace declarui
