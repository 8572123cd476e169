#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <sys/stat.h>
#include <unistd.h>

#include <filesystem>
#include <fstream>

#include "core/refine.hpp"
#include "core/util.hpp"

using namespace declarui;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& rel) {
  return std::string(DECLARUI_FIXTURES) + "/" + rel;
}

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() /
                 ("declarui-refine-" + tag + "-" + std::to_string(getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

fs::path write_script(const fs::path& dir, const std::string& name,
                      const std::string& body) {
  fs::path script = dir / name;
  std::ofstream out(script);
  out << "#!/bin/sh\n" << body;
  out.close();
  ::chmod(script.c_str(), 0755);
  return script;
}

PageDesign design_for(const std::string& page_id) {
  PageDesign page;
  page.page_id = page_id;
  page.image_path = fixture("e2e/designs/" + page_id + ".png");
  return page;
}

CompileLoopSettings settings_for(const fs::path& script, const fs::path& logs) {
  CompileLoopSettings settings;
  settings.profile.name = "reactnative";
  settings.profile.command = {script.string()};
  settings.profile.patterns = builtin_diag_patterns("reactnative");
  settings.log_dir = logs.string();
  return settings;
}

}  // namespace

TEST_CASE("parse_repair_reply extracts marked complete files") {
  std::string reply =
      "Here are the fixes.\n"
      "```tsx\n"
      "// file: src/screens/Home.tsx\n"
      "const home = 1;\n"
      "```\n"
      "Some prose between blocks.\n"
      "```dart\n"
      "  # File: lib/cart.dart\n"
      "void main() {}\n"
      "```\n"
      "```\n"
      "no marker here, just code\n"
      "```\n";
  auto files = parse_repair_reply(reply);
  REQUIRE(files.size() == 2);
  CHECK(files[0].first == "src/screens/Home.tsx");
  CHECK(files[0].second == "const home = 1;\n");
  CHECK(files[1].first == "lib/cart.dart");
  CHECK(files[1].second == "void main() {}\n");

  CHECK(parse_repair_reply("no fences at all").empty());
  // CRLF replies work and -- / ; comment markers are accepted.
  auto crlf = parse_repair_reply("```\r\n-- file: a.sql\r\nselect 1;\r\n```\r\n");
  REQUIRE(crlf.size() == 1);
  CHECK(crlf[0].second == "select 1;\n");
}

TEST_CASE("RecordingModelClient accumulates usage across calls") {
  ScenarioScript script;
  script.entries.push_back({Purpose::PageGen, {}, std::string(40, 'y')});
  MockModelClient inner(script);
  RecordingModelClient recorder(inner);
  PromptBundle bundle;
  bundle.purpose = Purpose::PageGen;
  bundle.user_text = std::string(20, 'p');
  recorder.complete(bundle);
  recorder.complete(bundle);
  CHECK(recorder.usage().input_tokens == 10);
  CHECK(recorder.usage().output_tokens == 20);
  CHECK(recorder.usage().total() == 30);
}

TEST_CASE("nav loop converges after one repair on the scripted home page") {
  PageTransitionGraph ptg = load_ptg_file(fixture("e2e/ptg.json"));
  const Framework& rn = framework_by_name("ReactNative");
  PromptFactory prompts(DECLARUI_TEMPLATES, {});
  MockModelClient model(load_scenario_script(fixture("e2e/scenario")));

  GeneratedPage home =
      generate_page_with_nav_loop(design_for("home"), ptg, rn, model, prompts);
  CHECK_FALSE(home.aborted);
  CHECK(home.file_name == "Home.tsx");
  CHECK(home.nav_iterations == 1);
  CHECK(home.final_report.missing.empty());
  REQUIRE(home.history.size() == 2);
  CHECK(home.history[0].iteration == 0);
  CHECK(home.history[0].missing_count == 2);
  CHECK(home.history[1].missing_count == 0);
  CHECK(home.history[0].code_digest != home.history[1].code_digest);

  GeneratedPage cart =
      generate_page_with_nav_loop(design_for("cart"), ptg, rn, model, prompts);
  CHECK(cart.nav_iterations == 0);
  CHECK(cart.final_report.missing.empty());
}

TEST_CASE("nav loop stops at the iteration cap on a stubborn page") {
  PageTransitionGraph ptg = load_ptg_file(fixture("caps/ptg.json"));
  const Framework& rn = framework_by_name("ReactNative");
  PromptFactory prompts(DECLARUI_TEMPLATES, {});
  MockModelClient model(load_scenario_script(fixture("caps/scenario")));

  PageDesign page;
  page.page_id = "home";
  page.image_path = fixture("caps/designs/home.png");
  GeneratedPage result =
      generate_page_with_nav_loop(page, ptg, rn, model, prompts);
  CHECK_FALSE(result.aborted);
  CHECK(result.nav_iterations == kMaxNavIterations);
  CHECK_FALSE(result.final_report.missing.empty());
  CHECK(result.history.size() == 4);  // initial + three repairs
}

TEST_CASE("nav loop turns client failures into a per-page abort") {
  PageTransitionGraph ptg = load_ptg_file(fixture("e2e/ptg.json"));
  const Framework& rn = framework_by_name("ReactNative");
  PromptFactory prompts(DECLARUI_TEMPLATES, {});
  ScenarioScript empty;  // exhaustion defaults to Error
  MockModelClient model(empty);

  GeneratedPage result =
      generate_page_with_nav_loop(design_for("home"), ptg, rn, model, prompts);
  CHECK(result.aborted);
  CHECK_FALSE(result.abort_reason.empty());

  CHECK_THROWS_AS(
      generate_page_with_nav_loop(design_for("nope"), ptg, rn, model, prompts),
      UnknownPageError);
}

TEST_CASE("compile_loop succeeds immediately on a clean project") {
  fs::path dir = temp_dir("clean");
  fs::path script = write_script(dir, "cc", "exit 0\n");
  PromptFactory prompts(DECLARUI_TEMPLATES, {});
  ScenarioScript empty;
  MockModelClient model(empty);

  RunManifest manifest = compile_loop(dir.string(), RunManifest{},
                                      settings_for(script, dir / "logs"),
                                      model, prompts);
  CHECK(manifest.status == RunStatus::Compiled);
  CHECK(manifest.compiled);
  CHECK(manifest.compile_attempts == 1);
  CHECK(manifest.compile_iterations_used == 0);
  CHECK(fs::exists(dir / "logs" / "attempt-1.log"));
  fs::remove_all(dir);
}

TEST_CASE("compile_loop applies a scripted repair and recompiles") {
  fs::path dir = temp_dir("repair");
  fs::create_directories(dir / "src");
  write_text_file((dir / "src" / "App.tsx").string(), "const bad = Btn;\n");
  fs::path script = write_script(
      dir, "cc",
      "if grep -q Btn src/App.tsx; then\n"
      "  echo \"src/App.tsx(1,13): error TS2304: Cannot find name 'Btn'.\"\n"
      "  exit 1\n"
      "fi\nexit 0\n");

  ScenarioScript repair_script;
  repair_script.entries.push_back(
      {Purpose::CompileRepair,
       {{"attempt", "1"}},
       "```tsx\n// file: src/App.tsx\nconst good = 1;\n```\n"});
  MockModelClient model(repair_script);
  PromptFactory prompts(DECLARUI_TEMPLATES, {});

  RunManifest manifest = compile_loop(dir.string(), RunManifest{},
                                      settings_for(script, dir / "logs"),
                                      model, prompts);
  CHECK(manifest.status == RunStatus::Compiled);
  CHECK(manifest.compile_attempts == 2);
  CHECK(manifest.compile_iterations_used == 1);
  CHECK(read_text_file((dir / "src" / "App.tsx").string()) ==
        "const good = 1;\n");
  CHECK(fs::exists(dir / "logs" / "attempt-2.log"));
  fs::remove_all(dir);
}

TEST_CASE("compile_loop exhausts attempts when repairs never land") {
  fs::path dir = temp_dir("exhaust");
  fs::path script =
      write_script(dir, "cc", "echo 'x.tsx(1,1): error TS1: nope.'\nexit 1\n");
  // Replies carry no file markers, so each repair round changes nothing.
  ScenarioScript useless;
  useless.exhaustion = ExhaustionPolicy::RepeatLast;
  useless.entries.push_back({Purpose::CompileRepair, {}, "try turning it off"});
  MockModelClient model(useless);
  PromptFactory prompts(DECLARUI_TEMPLATES, {});

  RunManifest manifest = compile_loop(dir.string(), RunManifest{},
                                      settings_for(script, dir / "logs"),
                                      model, prompts);
  CHECK(manifest.status == RunStatus::CompilationFailed);
  CHECK_FALSE(manifest.compiled);
  CHECK(manifest.compile_attempts == kMaxCompileAttempts);
  CHECK(manifest.compile_iterations_used == kMaxCompileAttempts - 1);
  CHECK(fs::exists(dir / "logs" / "attempt-3.log"));
  fs::remove_all(dir);
}

TEST_CASE("compile_loop aborts on spawn errors and model failures") {
  fs::path dir = temp_dir("aborts");
  PromptFactory prompts(DECLARUI_TEMPLATES, {});
  ScenarioScript empty;
  MockModelClient model(empty);

  CompileLoopSettings missing;
  missing.profile.command = {"/nonexistent/compiler"};
  missing.log_dir = (dir / "logs").string();
  RunManifest spawned = compile_loop(dir.string(), RunManifest{}, missing,
                                     model, prompts);
  CHECK(spawned.status == RunStatus::Aborted);
  CHECK(spawned.abort_stage.rfind("compile: ", 0) == 0);

  // Compiler fails and the (empty) script cannot answer the repair prompt.
  fs::path script =
      write_script(dir, "cc", "echo 'y.tsx(2,2): error TS2: bad.'\nexit 1\n");
  RunManifest failed = compile_loop(dir.string(), RunManifest{},
                                    settings_for(script, dir / "logs"),
                                    model, prompts);
  CHECK(failed.status == RunStatus::CompilationFailed);
  CHECK(failed.abort_stage.rfind("compile-repair: ", 0) == 0);
  CHECK(failed.compile_attempts == 1);
  CHECK(failed.compile_iterations_used == 0);
  fs::remove_all(dir);
}

TEST_CASE("discover_designs lists page images in sorted order") {
  AppDesignSet app = discover_designs("demo", fixture("e2e/designs"));
  CHECK(app.app_id == "demo");
  REQUIRE(app.pages.size() == 5);
  CHECK(app.pages[0].page_id == "cart");
  CHECK(app.pages[1].page_id == "home");
  CHECK(app.pages[4].page_id == "settings");
  CHECK(fs::exists(app.pages[0].image_path));

  fs::path empty = temp_dir("nodesigns");
  CHECK_THROWS_AS(discover_designs("demo", empty.string()), ConfigError);
  fs::remove_all(empty);
}

TEST_CASE("run_pipeline drives the scripted app to a compiled manifest") {
  fs::path runs = temp_dir("pipeline");
  RunConfig config;
  config.app_id = "demo";
  config.framework = "ReactNative";
  config.runs_dir = runs.string();
  config.ptg_path = fixture("e2e/ptg.json");
  config.model_backend = "mock";
  config.model_scenario_dir = fixture("e2e/scenario");
  config.perception_mode = "fixture";
  config.perception_scenario_dir = fixture("e2e/scenario");
  config.template_dir = DECLARUI_TEMPLATES;
  config.compiler_command = {fixture("e2e/stubcc")};
  config.workers = 2;
  config.config_digest = "test-digest";

  AppDesignSet app = discover_designs("demo", fixture("e2e/designs"));
  RunManifest manifest = run_pipeline(app, config);

  CHECK(manifest.status == RunStatus::Compiled);
  CHECK(manifest.compile_attempts == 2);
  CHECK(manifest.compile_iterations_used == 1);
  REQUIRE(manifest.pages.size() == 5);
  for (const auto& page : manifest.pages) {
    CHECK(page.nav_iterations == (page.page_id == "home" ? 1 : 0));
    CHECK(page.final_report.missing.empty());
  }
  CHECK(manifest.token_usage.total() > 0);
  CHECK(manifest.config_digest == "test-digest");

  // Artifacts land under runs/<app>/: manifest, ptg, project, attempt logs.
  fs::path run_dir = runs / "demo";
  RunManifest reloaded =
      load_manifest_file((run_dir / "manifest.json").string());
  CHECK(reloaded.status == RunStatus::Compiled);
  CHECK(reloaded.compile_attempts == 2);
  CHECK(fs::exists(run_dir / "ptg.json"));
  CHECK(fs::exists(run_dir / "project" / "src" / "screens" / "Home.tsx"));
  CHECK(fs::exists(run_dir / "compile" / "attempt-1.log"));
  CHECK(fs::exists(run_dir / "compile" / "attempt-2.log"));
  // The compile repair removed the undefined component.
  std::string repaired = read_text_file(
      (run_dir / "project" / "src" / "screens" / "Home.tsx").string());
  CHECK(repaired.find("Btn") == std::string::npos);
  fs::remove_all(runs);
}
