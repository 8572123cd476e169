#include "metrics.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <sstream>

#include <nlohmann/json.hpp>

namespace declarui {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::vector<double> gaussian_kernel(int size, double sigma) {
  std::vector<double> kernel(size);
  const double center = (size - 1) / 2.0;
  double sum = 0.0;
  for (int i = 0; i < size; ++i) {
    double d = i - center;
    kernel[i] = std::exp(-(d * d) / (2.0 * sigma * sigma));
    sum += kernel[i];
  }
  for (double& w : kernel) {
    w /= sum;
  }
  return kernel;
}

// Valid-region separable convolution: output is (w-k+1) x (h-k+1).
std::vector<double> convolve_valid(const std::vector<double>& src, int width,
                                   int height,
                                   const std::vector<double>& kernel) {
  const int k = static_cast<int>(kernel.size());
  const int out_w = width - k + 1;
  const int out_h = height - k + 1;
  std::vector<double> horiz(static_cast<size_t>(out_w) * height);
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) {
        acc += kernel[i] * src[static_cast<size_t>(y) * width + x + i];
      }
      horiz[static_cast<size_t>(y) * out_w + x] = acc;
    }
  }
  std::vector<double> out(static_cast<size_t>(out_w) * out_h);
  for (int y = 0; y < out_h; ++y) {
    for (int x = 0; x < out_w; ++x) {
      double acc = 0.0;
      for (int i = 0; i < k; ++i) {
        acc += kernel[i] * horiz[static_cast<size_t>(y + i) * out_w + x];
      }
      out[static_cast<size_t>(y) * out_w + x] = acc;
    }
  }
  return out;
}

std::optional<double> read_manual_seconds(const fs::path& app_dir) {
  fs::path file = app_dir / "manual_time.json";
  std::ifstream in(file);
  if (!in) {
    return std::nullopt;
  }
  json doc = json::parse(in, nullptr, false);
  if (doc.is_discarded() || !doc.contains("seconds")) {
    return std::nullopt;
  }
  return doc.at("seconds").get<double>();
}

std::string fmt2(double value) {
  std::ostringstream out;
  out << std::fixed << std::setprecision(2) << value;
  return out.str();
}

std::string cell(const std::optional<double>& value) {
  return value ? fmt2(*value) : std::string("—");
}

}  // namespace

double compute_ssim(const GrayImage& a, const GrayImage& b,
                    const SsimParams& params) {
  if (a.width != b.width || a.height != b.height) {
    throw DimensionMismatchError("SSIM operands differ in size");
  }
  if (a.width < params.window || a.height < params.window) {
    throw TooSmallError("SSIM operands smaller than the window");
  }

  const int n = a.width * a.height;
  std::vector<double> aa(n), bb(n), ab(n);
  for (int i = 0; i < n; ++i) {
    aa[i] = a.luma[i] * a.luma[i];
    bb[i] = b.luma[i] * b.luma[i];
    ab[i] = a.luma[i] * b.luma[i];
  }

  const std::vector<double> kernel = gaussian_kernel(params.window, params.sigma);
  auto mu_a = convolve_valid(a.luma, a.width, a.height, kernel);
  auto mu_b = convolve_valid(b.luma, a.width, a.height, kernel);
  auto m_aa = convolve_valid(aa, a.width, a.height, kernel);
  auto m_bb = convolve_valid(bb, a.width, a.height, kernel);
  auto m_ab = convolve_valid(ab, a.width, a.height, kernel);

  const double c1 = std::pow(params.k1 * params.dynamic_range, 2);
  const double c2 = std::pow(params.k2 * params.dynamic_range, 2);

  double total = 0.0;
  for (size_t i = 0; i < mu_a.size(); ++i) {
    const double var_a = m_aa[i] - mu_a[i] * mu_a[i];
    const double var_b = m_bb[i] - mu_b[i] * mu_b[i];
    const double cov = m_ab[i] - mu_a[i] * mu_b[i];
    const double num = (2.0 * mu_a[i] * mu_b[i] + c1) * (2.0 * cov + c2);
    const double den =
        (mu_a[i] * mu_a[i] + mu_b[i] * mu_b[i] + c1) * (var_a + var_b + c2);
    total += num / den;
  }
  return total / static_cast<double>(mu_a.size());
}

double ssim_files(const std::string& path_a, const std::string& path_b,
                  const SsimParams& params) {
  auto [a, b] = match_dimensions(load_screenshot(path_a), load_screenshot(path_b));
  return compute_ssim(a, b, params);
}

double compute_pcr(const PageTransitionGraph& ptg,
                   const UiTransitionGraph& utg) {
  return ptg_coverage(ptg, utg).pcr * 100.0;
}

double compute_csr(const std::vector<RunManifest>& manifests) {
  if (manifests.empty()) {
    throw EmptySetError("CSR needs at least one manifest");
  }
  long long compiled = std::count_if(
      manifests.begin(), manifests.end(),
      [](const RunManifest& m) { return m.compiled; });
  return 100.0 * static_cast<double>(compiled) /
         static_cast<double>(manifests.size());
}

double compute_acic(const std::vector<RunManifest>& manifests) {
  long long compiled = 0;
  long long iterations = 0;
  for (const auto& manifest : manifests) {
    if (manifest.compiled) {
      ++compiled;
      iterations += manifest.compile_iterations_used;
    }
  }
  if (compiled == 0) {
    throw NoCompiledAppsError("ACIC needs at least one compiled app");
  }
  return static_cast<double>(iterations) / static_cast<double>(compiled);
}

double compute_amct(const std::vector<ManualTiming>& timings) {
  std::vector<std::string> missing;
  double total = 0.0;
  long long failed = 0;
  for (const auto& timing : timings) {
    if (!timing.failed) {
      continue;
    }
    ++failed;
    if (timing.seconds) {
      total += *timing.seconds;
    } else {
      missing.push_back(timing.app_id);
    }
  }
  if (failed == 0) {
    throw NoFailedAppsError("AMCT needs at least one compilation-failed app");
  }
  if (!missing.empty()) {
    std::string apps;
    for (const auto& app : missing) {
      apps += (apps.empty() ? "" : ", ") + app;
    }
    throw MissingTimingError("apps lacking manual timing: " + apps);
  }
  return total / static_cast<double>(failed);
}

std::string emit_report(const MetricsReport& report, ReportFormat format) {
  if (format == ReportFormat::Json) {
    json doc;
    doc["apps"] = json::array();
    for (const auto& row : report.rows) {
      json r;
      r["app_id"] = row.app_id;
      r["pcr"] = row.pcr ? json(*row.pcr) : json(nullptr);
      r["compiled"] = row.compiled;
      r["compile_iterations_used"] = row.compile_iterations_used;
      r["ssim_mean"] = row.ssim_mean ? json(*row.ssim_mean) : json(nullptr);
      r["clip_score"] = row.clip_score ? json(*row.clip_score) : json(nullptr);
      r["manual_correction_s"] = row.manual_correction_s
                                     ? json(*row.manual_correction_s)
                                     : json(nullptr);
      r["page_ssim"] = json::array();
      for (const auto& page : row.page_ssim) {
        r["page_ssim"].push_back({{"page", page.page}, {"ssim", page.ssim}});
      }
      doc["apps"].push_back(std::move(r));
    }
    json agg;
    const auto& a = report.aggregates;
    agg["pcr_mean"] = a.pcr_mean ? json(*a.pcr_mean) : json(nullptr);
    agg["pcr_pooled"] = a.pcr_pooled ? json(*a.pcr_pooled) : json(nullptr);
    agg["csr"] = a.csr;
    agg["acic"] = a.acic ? json(*a.acic) : json(nullptr);
    agg["amct_s"] = a.amct_s ? json(*a.amct_s) : json(nullptr);
    agg["ssim_mean"] = a.ssim_mean ? json(*a.ssim_mean) : json(nullptr);
    agg["clip_mean"] = a.clip_mean ? json(*a.clip_mean) : json(nullptr);
    doc["aggregates"] = std::move(agg);
    return doc.dump(2);
  }

  const bool with_clip = std::any_of(
      report.rows.begin(), report.rows.end(),
      [](const MetricsRow& row) { return row.clip_score.has_value(); });

  std::ostringstream out;
  out << "| App |";
  if (with_clip) out << " CLIP Score |";
  out << " SSIM Score | PCR (%) | ACIC | CSR (%) | AMCT (s) |\n";
  out << "|---|";
  if (with_clip) out << "---|";
  out << "---|---|---|---|---|\n";
  for (const auto& row : report.rows) {
    out << "| " << row.app_id << " |";
    if (with_clip) out << " " << cell(row.clip_score) << " |";
    out << " " << cell(row.ssim_mean) << " | " << cell(row.pcr) << " | "
        << (row.compiled ? fmt2(row.compile_iterations_used) : "—")
        << " | " << (row.compiled ? "100.00" : "0.00") << " | "
        << cell(row.manual_correction_s) << " |\n";
  }
  const auto& a = report.aggregates;
  out << "| **aggregate** |";
  if (with_clip) out << " " << cell(a.clip_mean) << " |";
  out << " " << cell(a.ssim_mean) << " | " << cell(a.pcr_mean) << " | "
      << cell(a.acic) << " | " << fmt2(a.csr) << " | " << cell(a.amct_s)
      << " |\n";
  return out.str();
}

MetricsReport evaluate_runs(const std::string& runs_dir,
                            const std::string& utg_dir,
                            const std::string& screenshots_dir,
                            bool pooled_pcr) {
  MetricsReport report;
  std::vector<RunManifest> manifests;
  std::vector<ManualTiming> timings;

  std::vector<fs::path> app_dirs;
  for (const auto& entry : fs::directory_iterator(runs_dir)) {
    if (entry.is_directory() && fs::exists(entry.path() / "manifest.json")) {
      app_dirs.push_back(entry.path());
    }
  }
  std::sort(app_dirs.begin(), app_dirs.end());
  if (app_dirs.empty()) {
    throw EmptySetError("no run manifests under " + runs_dir);
  }

  long long pooled_matched = 0;
  long long pooled_required = 0;

  for (const auto& app_dir : app_dirs) {
    RunManifest manifest =
        load_manifest_file((app_dir / "manifest.json").string());
    MetricsRow row;
    row.app_id = manifest.app_id;
    row.compiled = manifest.compiled;
    row.compile_iterations_used = manifest.compile_iterations_used;

    fs::path ptg_path = app_dir / "ptg.json";
    fs::path utg_path = fs::path(utg_dir) / (manifest.app_id + ".json");
    if (fs::exists(ptg_path) && fs::exists(utg_path)) {
      PageTransitionGraph ptg = load_ptg_file(ptg_path.string());
      UiTransitionGraph utg = load_utg_file(utg_path.string());
      if (!ptg.edges.empty()) {
        CoverageResult coverage = ptg_coverage(ptg, utg);
        row.pcr = coverage.pcr * 100.0;
        pooled_matched += static_cast<long long>(coverage.matched.size());
        pooled_required += static_cast<long long>(coverage.matched.size() +
                                                  coverage.missing.size());
      }
    }

    if (!screenshots_dir.empty()) {
      fs::path rendered = fs::path(screenshots_dir) / manifest.app_id / "rendered";
      fs::path reference = fs::path(screenshots_dir) / manifest.app_id / "reference";
      if (fs::is_directory(rendered) && fs::is_directory(reference)) {
        std::vector<fs::path> shots;
        for (const auto& entry : fs::directory_iterator(rendered)) {
          if (entry.is_regular_file()) {
            shots.push_back(entry.path());
          }
        }
        std::sort(shots.begin(), shots.end());
        double total = 0.0;
        for (const auto& shot : shots) {
          fs::path ref = reference / shot.filename();
          if (!fs::exists(ref)) {
            continue;
          }
          double value = ssim_files(shot.string(), ref.string());
          row.page_ssim.push_back({shot.stem().string(), value});
          total += value;
        }
        if (!row.page_ssim.empty()) {
          row.ssim_mean = total / static_cast<double>(row.page_ssim.size());
        }
      }
    }

    row.manual_correction_s = read_manual_seconds(app_dir);
    timings.push_back({manifest.app_id, !manifest.compiled,
                       row.manual_correction_s});
    manifests.push_back(std::move(manifest));
    report.rows.push_back(std::move(row));
  }

  auto& agg = report.aggregates;
  agg.csr = compute_csr(manifests);
  try {
    agg.acic = compute_acic(manifests);
  } catch (const NoCompiledAppsError&) {
  }
  try {
    agg.amct_s = compute_amct(timings);
  } catch (const Error&) {
  }

  double pcr_total = 0.0;
  long long pcr_count = 0;
  double ssim_total = 0.0;
  long long ssim_count = 0;
  double clip_total = 0.0;
  long long clip_count = 0;
  for (const auto& row : report.rows) {
    if (row.pcr) {
      pcr_total += *row.pcr;
      ++pcr_count;
    }
    if (row.ssim_mean) {
      ssim_total += *row.ssim_mean;
      ++ssim_count;
    }
    if (row.clip_score) {
      clip_total += *row.clip_score;
      ++clip_count;
    }
  }
  if (pcr_count > 0) {
    agg.pcr_mean = pcr_total / static_cast<double>(pcr_count);
  }
  if (pooled_required > 0) {
    agg.pcr_pooled = 100.0 * static_cast<double>(pooled_matched) /
                     static_cast<double>(pooled_required);
  }
  if (pooled_pcr && agg.pcr_pooled) {
    agg.pcr_mean = agg.pcr_pooled;
  }
  if (ssim_count > 0) {
    agg.ssim_mean = ssim_total / static_cast<double>(ssim_count);
  }
  if (clip_count > 0) {
    agg.clip_mean = clip_total / static_cast<double>(clip_count);
  }
  return report;
}

}  // namespace declarui
