#pragma once

#include <optional>
#include <string>
#include <vector>

#include "image.hpp"
#include "manifest.hpp"
#include "ptg.hpp"

namespace declarui {

struct SsimParams {
  int window = 11;
  double sigma = 1.5;
  double k1 = 0.01;
  double k2 = 0.03;
  double dynamic_range = 255.0;
};

// Windowed SSIM, mean over all valid window positions.
double compute_ssim(const GrayImage& a, const GrayImage& b,
                    const SsimParams& params = {});

double ssim_files(const std::string& path_a, const std::string& path_b,
                  const SsimParams& params = {});

double compute_pcr(const PageTransitionGraph& ptg, const UiTransitionGraph& utg);
double compute_csr(const std::vector<RunManifest>& manifests);
double compute_acic(const std::vector<RunManifest>& manifests);

struct ManualTiming {
  std::string app_id;
  bool failed = false;
  std::optional<double> seconds;
};

double compute_amct(const std::vector<ManualTiming>& timings);

struct PageSsim {
  std::string page;
  double ssim = 0.0;
};

struct MetricsRow {
  std::string app_id;
  std::optional<double> pcr;  // percentage
  bool compiled = false;
  int compile_iterations_used = 0;
  std::vector<PageSsim> page_ssim;
  std::optional<double> ssim_mean;
  std::optional<double> clip_score;  // external hook, usually absent
  std::optional<double> manual_correction_s;
};

struct MetricsAggregates {
  std::optional<double> pcr_mean;
  std::optional<double> pcr_pooled;  // pooled-edge ratio alternative
  double csr = 0.0;
  std::optional<double> acic;
  std::optional<double> amct_s;
  std::optional<double> ssim_mean;
  std::optional<double> clip_mean;
};

enum class ReportFormat { Json, MarkdownTable };

struct MetricsReport {
  std::vector<MetricsRow> rows;
  MetricsAggregates aggregates;
};

std::string emit_report(const MetricsReport& report, ReportFormat format);

// Walks a runs directory (one manifest per app), joins UTG files and
// screenshot pairs, and computes every metric that has inputs.
MetricsReport evaluate_runs(const std::string& runs_dir,
                            const std::string& utg_dir,
                            const std::string& screenshots_dir,
                            bool pooled_pcr = false);

}  // namespace declarui
