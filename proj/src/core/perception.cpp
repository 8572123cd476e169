#include "perception.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>
#include <opencv2/imgcodecs.hpp>

#include "image.hpp"
#include "modelclient.hpp"
#include "prompts.hpp"

namespace declarui {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingFileError("cannot open file: " + path.string());
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

std::string image_stem(const std::string& image_path) {
  return fs::path(image_path).stem().string();
}

BoundingBox clamp_box(BoundingBox box, int image_w, int image_h) {
  box.x = std::max(0.0, box.x);
  box.y = std::max(0.0, box.y);
  box.width = std::min(box.width, image_w - box.x);
  box.height = std::min(box.height, image_h - box.y);
  return box;
}

template <typename Fn>
auto with_stage(const char* stage, Fn&& fn) {
  try {
    return fn();
  } catch (const Error& e) {
    throw Error(e.code(), std::string("[stage=") + stage + "] " + e.what());
  }
}

}  // namespace

std::string serialize_page_design(const PageDesign& page) {
  json doc;
  doc["page_id"] = page.page_id;
  doc["image_path"] = page.image_path;
  doc["components"] = json::array();
  for (const auto& c : page.components) {
    json item;
    item["component_type"] = c.component_type;
    item["function"] = c.function;
    item["box"] = {{"x", c.box.x},
                   {"y", c.box.y},
                   {"w", c.box.width},
                   {"h", c.box.height},
                   {"score", c.box.confidence}};
    if (c.mask) {
      item["mask"] = {{"path", c.mask->path}};
    } else {
      item["mask"] = nullptr;
    }
    doc["components"].push_back(std::move(item));
  }
  return doc.dump(2);
}

PageDesign parse_page_design(const std::string& document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw SchemaError("page design is not a JSON object");
  }
  try {
    PageDesign page;
    page.page_id = doc.at("page_id").get<std::string>();
    page.image_path = doc.at("image_path").get<std::string>();
    for (const auto& item : doc.at("components")) {
      ComponentAnnotation c;
      c.component_type = item.at("component_type").get<std::string>();
      c.function = item.at("function").get<std::string>();
      const json& box = item.at("box");
      c.box = {box.at("x").get<double>(), box.at("y").get<double>(),
               box.at("w").get<double>(), box.at("h").get<double>(),
               box.at("score").get<double>()};
      if (item.contains("mask") && item.at("mask").is_object()) {
        MaskRef mask;
        mask.path = item.at("mask").at("path").get<std::string>();
        mask.box = c.box;
        c.mask = std::move(mask);
      }
      page.components.push_back(std::move(c));
    }
    return page;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("page design schema error: ") + e.what());
  }
}

FixtureDetector::FixtureDetector(std::string scenario_dir)
    : scenario_dir_(std::move(scenario_dir)) {}

std::vector<BoundingBox> FixtureDetector::detect(
    const std::string& image_path, const std::string& text_prompt) {
  (void)text_prompt;
  fs::path file =
      fs::path(scenario_dir_) / "detect" / (image_stem(image_path) + ".json");
  json doc = json::parse(read_file(file), nullptr, false);
  if (doc.is_discarded() || !doc.contains("boxes")) {
    throw ClientError("fixture detector reply malformed: " + file.string());
  }
  std::vector<BoundingBox> boxes;
  for (const auto& b : doc.at("boxes")) {
    boxes.push_back({b.at("x").get<double>(), b.at("y").get<double>(),
                     b.at("w").get<double>(), b.at("h").get<double>(),
                     b.at("score").get<double>()});
  }
  return boxes;
}

FixtureSegmenter::FixtureSegmenter(std::string scenario_dir)
    : scenario_dir_(std::move(scenario_dir)) {}

std::vector<std::vector<unsigned char>> FixtureSegmenter::segment(
    const std::string& image_path, const std::vector<BoundingBox>& boxes) {
  std::vector<std::vector<unsigned char>> masks;
  fs::path dir = fs::path(scenario_dir_) / "segment" / image_stem(image_path);
  for (size_t i = 0; i < boxes.size(); ++i) {
    fs::path file = dir / ("mask-" + std::to_string(i) + ".png");
    std::string bytes = read_file(file);
    masks.emplace_back(bytes.begin(), bytes.end());
  }
  return masks;
}

HttpDetector::HttpDetector(std::string endpoint)
    : endpoint_(std::move(endpoint)) {}

std::vector<BoundingBox> HttpDetector::detect(const std::string& image_path,
                                              const std::string& text_prompt) {
  // Wire contract: POST image bytes + prompt, JSON boxes back. Implemented
  // lazily because the offline suites never talk to a live detector.
  (void)image_path;
  (void)text_prompt;
  throw ClientError("HTTP detector endpoint not reachable: " + endpoint_ +
                    " (configure a fixture scenario for offline runs)");
}

HttpSegmenter::HttpSegmenter(std::string endpoint)
    : endpoint_(std::move(endpoint)) {}

std::vector<std::vector<unsigned char>> HttpSegmenter::segment(
    const std::string& image_path, const std::vector<BoundingBox>& boxes) {
  (void)image_path;
  (void)boxes;
  throw ClientError("HTTP segmenter endpoint not reachable: " + endpoint_ +
                    " (configure a fixture scenario for offline runs)");
}

std::vector<BoundingBox> detect_components(const std::string& image_path,
                                           DetectorClient& detector,
                                           const PerceptionOptions& options) {
  return with_stage("detect", [&] {
    auto [width, height] = png_dimensions(image_path);
    std::vector<BoundingBox> boxes =
        detector.detect(image_path, options.detection_prompt);
    std::vector<BoundingBox> kept;
    for (const auto& raw : boxes) {
      if (raw.confidence < options.confidence_threshold) {
        continue;
      }
      BoundingBox box = clamp_box(raw, width, height);
      if (box.width <= 0 || box.height <= 0) {
        continue;
      }
      kept.push_back(box);
    }
    std::stable_sort(kept.begin(), kept.end(),
                     [](const BoundingBox& a, const BoundingBox& b) {
                       return a.confidence > b.confidence;
                     });
    return kept;
  });
}

std::vector<MaskRef> segment_components(const std::string& image_path,
                                        const std::vector<BoundingBox>& boxes,
                                        SegmenterClient& segmenter,
                                        const PerceptionOptions& options) {
  return with_stage("segment", [&] {
    std::vector<MaskRef> refs;
    if (boxes.empty()) {
      return refs;
    }
    auto masks = segmenter.segment(image_path, boxes);
    if (masks.size() != boxes.size()) {
      throw ClientError("segmenter returned " + std::to_string(masks.size()) +
                        " masks for " + std::to_string(boxes.size()) +
                        " boxes");
    }
    fs::create_directories(options.mask_output_dir);
    for (size_t i = 0; i < masks.size(); ++i) {
      fs::path out = fs::path(options.mask_output_dir) /
                     ("mask-" + std::to_string(i) + ".png");
      std::ofstream file(out, std::ios::binary);
      file.write(reinterpret_cast<const char*>(masks[i].data()),
                 static_cast<std::streamsize>(masks[i].size()));
      file.close();
      refs.push_back({out.string(), boxes[i]});
    }
    return refs;
  });
}

ComponentAnnotation classify_component(const std::string& crop_image_path,
                                       const BoundingBox& box,
                                       ModelClient& model,
                                       const PromptFactory& prompts) {
  return with_stage("classify", [&]() -> ComponentAnnotation {
    PromptBundle bundle = prompts.build_classify_prompt(crop_image_path, box);
    // One re-ask on an unparseable reply, then fail the component.
    for (int attempt = 0; attempt < 2; ++attempt) {
      ModelResponse response = model.complete(bundle);
      try {
        json parsed = extract_json(response);
        if (parsed.contains("component_type") && parsed.contains("function") &&
            parsed.at("component_type").is_string() &&
            parsed.at("function").is_string() &&
            !parsed.at("component_type").get<std::string>().empty() &&
            !parsed.at("function").get<std::string>().empty()) {
          ComponentAnnotation annotation;
          annotation.component_type =
              parsed.at("component_type").get<std::string>();
          annotation.function = parsed.at("function").get<std::string>();
          annotation.box = box;
          return annotation;
        }
      } catch (const JsonExtractError&) {
      }
    }
    throw ReplyFormatError(
        "classification reply unparseable after re-ask for crop " +
        crop_image_path);
  });
}

PageDesign annotate_page(const std::string& page_id,
                         const std::string& image_path,
                         DetectorClient& detector, SegmenterClient& segmenter,
                         ModelClient& model, const PromptFactory& prompts,
                         const PerceptionOptions& options) {
  PageDesign page;
  page.page_id = page_id;
  page.image_path = image_path;

  std::vector<BoundingBox> boxes =
      detect_components(image_path, detector, options);
  std::vector<MaskRef> masks =
      segment_components(image_path, boxes, segmenter, options);

  cv::Mat full = cv::imread(image_path, cv::IMREAD_COLOR);
  if (full.empty()) {
    throw ImageError("cannot decode page image: " + image_path);
  }

  for (size_t i = 0; i < boxes.size(); ++i) {
    const BoundingBox& box = boxes[i];
    cv::Rect rect(static_cast<int>(box.x), static_cast<int>(box.y),
                  static_cast<int>(box.width), static_cast<int>(box.height));
    rect &= cv::Rect(0, 0, full.cols, full.rows);
    if (rect.width <= 0 || rect.height <= 0) {
      continue;
    }
    cv::Mat crop = full(rect).clone();
    // Masked crop: zero out pixels the segmenter excluded.
    cv::Mat mask = cv::imread(masks[i].path, cv::IMREAD_GRAYSCALE);
    if (!mask.empty() && mask.cols == crop.cols && mask.rows == crop.rows) {
      cv::Mat masked;
      crop.copyTo(masked, mask);
      crop = masked;
    }
    fs::create_directories(options.mask_output_dir);
    fs::path crop_path = fs::path(options.mask_output_dir) /
                         ("crop-" + std::to_string(i) + ".png");
    cv::imwrite(crop_path.string(), crop);

    try {
      ComponentAnnotation annotation =
          classify_component(crop_path.string(), box, model, prompts);
      annotation.mask = masks[i];
      page.components.push_back(std::move(annotation));
    } catch (const Error& e) {
      if (e.code() != ErrorCode::ReplyFormat) {
        throw;
      }
      // A single bad crop never sinks the page; the casualty is dropped.
    }
  }

  // Reading order: top-to-bottom, then left-to-right, original index last.
  std::stable_sort(page.components.begin(), page.components.end(),
                   [](const ComponentAnnotation& a,
                      const ComponentAnnotation& b) {
                     if (a.box.y != b.box.y) return a.box.y < b.box.y;
                     return a.box.x < b.box.x;
                   });
  return page;
}

}  // namespace declarui
