#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>

#include "core/config.hpp"
#include "core/util.hpp"

using namespace declarui;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& rel) {
  return std::string(DECLARUI_FIXTURES) + "/" + rel;
}

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() /
                 ("declarui-config-" + tag + "-" + std::to_string(getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

// Minimal valid config with the scenario and templates pointed at fixtures.
std::string base_config() {
  return std::string("[run]\n") +
         "app_id = \"demo\"\n"
         "designs_dir = \"designs\"\n"
         "[model]\n"
         "backend = \"mock\"\n"
         "scenario_dir = \"" + fixture("e2e/scenario") + "\"\n"
         "[prompts]\n"
         "template_dir = \"" + std::string(DECLARUI_TEMPLATES) + "\"\n";
}

fs::path write_config(const fs::path& dir, const std::string& text) {
  fs::path path = dir / "config.toml";
  std::ofstream out(path);
  out << text;
  return path;
}

struct EnvGuard {
  // Clears the override variables for the test and restores nothing; the
  // suites never depend on ambient values.
  EnvGuard() {
    ::unsetenv("RUNS_DIR");
    ::unsetenv("DECLARUI_FRAMEWORK");
    ::unsetenv("DECLARUI_MOCK_SCENARIO");
  }
  ~EnvGuard() {
    ::unsetenv("RUNS_DIR");
    ::unsetenv("DECLARUI_FRAMEWORK");
    ::unsetenv("DECLARUI_MOCK_SCENARIO");
  }
};

}  // namespace

TEST_CASE("toml subset: scalars, arrays, comments, escapes") {
  TomlDoc doc = TomlDoc::parse(
      "# leading comment\n"
      "top = \"value\"\n"
      "[run]\n"
      "app_id = \"demo app\"  # trailing comment\n"
      "workers = 8\n"
      "ratio = 0.25\n"
      "flag = false\n"
      "quoted_hash = \"a # b\"\n"
      "escaped = \"line\\nbreak \\\"q\\\"\"\n"
      "[compiler]\n"
      "command = [\"npx\", \"tsc\", \"--noEmit\"]\n"
      "empty = []\n");
  CHECK(doc.get_string("", "top") == "value");
  CHECK(doc.get_string("run", "app_id") == "demo app");
  CHECK(doc.get_number("run", "workers", 0) == 8);
  CHECK(doc.get_number("run", "ratio", 0) == 0.25);
  CHECK_FALSE(doc.get_bool("run", "flag", true));
  CHECK(doc.get_string("run", "quoted_hash") == "a # b");
  CHECK(doc.get_string("run", "escaped") == "line\nbreak \"q\"");
  CHECK(doc.get_string_array("compiler", "command") ==
        std::vector<std::string>{"npx", "tsc", "--noEmit"});
  CHECK(doc.get_string_array("compiler", "empty").empty());
  CHECK(doc.get_string("run", "absent", "dflt") == "dflt");
  CHECK_FALSE(doc.has("run", "absent"));
}

TEST_CASE("toml subset: malformed input raises ConfigError") {
  CHECK_THROWS_AS(TomlDoc::parse("[broken\n"), ConfigError);
  CHECK_THROWS_AS(TomlDoc::parse("no equals sign\n"), ConfigError);
  CHECK_THROWS_AS(TomlDoc::parse("key =\n"), ConfigError);
  CHECK_THROWS_AS(TomlDoc::parse("key = [\"open\n"), ConfigError);
  CHECK_THROWS_AS(TomlDoc::parse("key = notanumber\n"), ConfigError);
  // Line numbers make the message actionable.
  try {
    TomlDoc::parse("ok = 1\nbad value\n");
    FAIL("expected ConfigError");
  } catch (const ConfigError& e) {
    CHECK(std::string(e.what()).find("line 2") != std::string::npos);
  }
}

TEST_CASE("toml subset: type mismatches raise ConfigError") {
  TomlDoc doc = TomlDoc::parse("[a]\nnum = 4\nstr = \"x\"\n");
  CHECK_THROWS_AS(doc.get_string("a", "num"), ConfigError);
  CHECK_THROWS_AS(doc.get_number("a", "str", 0), ConfigError);
  CHECK_THROWS_AS(doc.get_bool("a", "num", false), ConfigError);
  CHECK_THROWS_AS(doc.get_string_array("a", "str"), ConfigError);
}

TEST_CASE("load_run_config resolves relative paths against the config file") {
  EnvGuard guard;
  fs::path dir = temp_dir("paths");
  fs::path path = write_config(
      dir, base_config() +
               "[compiler]\ncommand = [\"./cc\", \"--flag\"]\n");
  RunConfig config = load_run_config(path.string());
  CHECK(config.app_id == "demo");
  CHECK(config.designs_dir == (dir / "designs").string());
  CHECK(config.runs_dir == (dir / "runs").string());
  // Only the executable is resolved; arguments pass through untouched.
  CHECK(config.compiler_command[0] == (dir / "cc").string());
  CHECK(config.compiler_command[1] == "--flag");
  // Absolute paths are kept as-is.
  CHECK(config.model_scenario_dir == fixture("e2e/scenario"));
  // Defaults flow through.
  CHECK(config.framework == "ReactNative");
  CHECK(config.workers == 4);
  CHECK(config.token_budget == 2000000);
  CHECK(config.attach_image_on_nav_repair);
  fs::remove_all(dir);
}

TEST_CASE("load_run_config honours environment overrides") {
  EnvGuard guard;
  fs::path dir = temp_dir("env");
  fs::path path = write_config(dir, base_config());

  RunConfig plain = load_run_config(path.string());
  ::setenv("RUNS_DIR", "/tmp/alt-runs", 1);
  ::setenv("DECLARUI_FRAMEWORK", "Flutter", 1);
  ::setenv("DECLARUI_MOCK_SCENARIO", fixture("caps/scenario").c_str(), 1);
  RunConfig overridden = load_run_config(path.string());

  CHECK(overridden.runs_dir == "/tmp/alt-runs");
  CHECK(overridden.framework == "Flutter");
  CHECK(overridden.model_backend == "mock");
  CHECK(overridden.model_scenario_dir == fixture("caps/scenario"));
  // The digest covers the file text, so overrides leave it stable.
  CHECK(overridden.config_digest == plain.config_digest);
  fs::remove_all(dir);
}

TEST_CASE("load_run_config validates required fields") {
  EnvGuard guard;
  fs::path dir = temp_dir("validate");

  CHECK_THROWS_AS(load_run_config((dir / "missing.toml").string()),
                  MissingFileError);

  auto expect_config_error = [&](const std::string& text,
                                 const std::string& needle) {
    fs::path path = write_config(dir, text);
    try {
      load_run_config(path.string());
      FAIL("expected ConfigError for: " << needle);
    } catch (const ConfigError& e) {
      CHECK(std::string(e.what()).find(needle) != std::string::npos);
    }
  };

  std::string no_app = base_config();
  no_app.replace(no_app.find("app_id = \"demo\""), 15, "app_id = \"\"   ");
  expect_config_error(no_app, "app_id");

  expect_config_error(base_config() + "[prompts]\ntemplate_dir = \"/nope\"\n",
                      "template_dir");
  expect_config_error(
      "[run]\napp_id = \"x\"\n[model]\nbackend = \"mock\"\n"
      "[prompts]\ntemplate_dir = \"" + std::string(DECLARUI_TEMPLATES) + "\"\n",
      "scenario_dir");
  expect_config_error(base_config() + "[model]\nbackend = \"carrier-pigeon\"\n",
                      "backend");
  CHECK_THROWS_AS(
      load_run_config(
          write_config(dir, base_config() + "[run]\nframework = \"SwiftUI\"\n")
              .string()),
      ConfigError);
  fs::remove_all(dir);
}

TEST_CASE("config digest tracks file content") {
  EnvGuard guard;
  fs::path dir = temp_dir("digest");
  RunConfig a = load_run_config(write_config(dir, base_config()).string());
  RunConfig b = load_run_config(write_config(dir, base_config()).string());
  CHECK(a.config_digest == b.config_digest);
  CHECK_FALSE(a.config_digest.empty());
  RunConfig c = load_run_config(
      write_config(dir, base_config() + "# changed\n").string());
  CHECK(c.config_digest != a.config_digest);
  CHECK(a.config_digest == fnv1a_hex(base_config()));
  fs::remove_all(dir);
}
