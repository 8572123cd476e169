#pragma once

#include <memory>
#include <string>
#include <vector>

#include "compilecheck.hpp"
#include "config.hpp"
#include "manifest.hpp"
#include "modelclient.hpp"
#include "navcheck.hpp"
#include "perception.hpp"
#include "prompts.hpp"
#include "ptg.hpp"

namespace declarui {

struct AppDesignSet {
  std::string app_id;
  std::vector<PageDesign> pages;
};

// Sums usage across every call that flows through it.
class RecordingModelClient : public ModelClient {
 public:
  explicit RecordingModelClient(ModelClient& inner) : inner_(inner) {}

  ModelResponse complete(const PromptBundle& bundle) override;
  TokenUsage usage() const;

 private:
  ModelClient& inner_;
  mutable std::mutex mutex_;
  TokenUsage usage_;
};

inline constexpr int kMaxNavIterations = 3;
inline constexpr int kMaxCompileAttempts = 3;

GeneratedPage generate_page_with_nav_loop(const PageDesign& page,
                                          const PageTransitionGraph& ptg,
                                          const Framework& framework,
                                          ModelClient& model,
                                          const PromptFactory& prompts);

struct CompileLoopSettings {
  CompilerProfile profile;
  std::string log_dir;  // raw attempt logs land here
  int window_lines = 10;
  int max_files = 5;
};

// Bounded project-level compile/repair loop; updates and returns the
// manifest. Pages must already be written into project_dir.
RunManifest compile_loop(const std::string& project_dir, RunManifest manifest,
                         const CompileLoopSettings& settings,
                         ModelClient& model, const PromptFactory& prompts);

// Complete-file replacements parsed from a compile-repair reply: pairs of
// (project-relative path, file contents).
std::vector<std::pair<std::string, std::string>> parse_repair_reply(
    const std::string& reply_text);

RunManifest run_pipeline(const AppDesignSet& app, const RunConfig& config);

// Discovers an app's page designs from a directory of page images.
AppDesignSet discover_designs(const std::string& app_id,
                              const std::string& designs_dir);

}  // namespace declarui
