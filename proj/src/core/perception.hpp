#pragma once

#include <memory>
#include <optional>
#include <string>
#include <vector>

#include "errors.hpp"

namespace declarui {

class ModelClient;
class PromptFactory;

struct BoundingBox {
  double x = 0;
  double y = 0;
  double width = 0;
  double height = 0;
  double confidence = 0;
};

struct MaskRef {
  std::string path;
  BoundingBox box;
};

struct ComponentAnnotation {
  std::string component_type;
  std::string function;
  BoundingBox box;
  std::optional<MaskRef> mask;
};

struct PageDesign {
  std::string page_id;
  std::string image_path;
  std::vector<ComponentAnnotation> components;
};

std::string serialize_page_design(const PageDesign& page);
PageDesign parse_page_design(const std::string& document);

class DetectorClient {
 public:
  virtual ~DetectorClient() = default;
  virtual std::vector<BoundingBox> detect(const std::string& image_path,
                                          const std::string& text_prompt) = 0;
};

class SegmenterClient {
 public:
  virtual ~SegmenterClient() = default;
  // Returns encoded PNG bytes, one buffer per box, order preserved.
  virtual std::vector<std::vector<unsigned char>> segment(
      const std::string& image_path,
      const std::vector<BoundingBox>& boxes) = 0;
};

// Replays scripted responses from a scenario directory, keyed by the image
// file stem: detect/<stem>.json and segment/<stem>/mask-<i>.png.
class FixtureDetector : public DetectorClient {
 public:
  explicit FixtureDetector(std::string scenario_dir);
  std::vector<BoundingBox> detect(const std::string& image_path,
                                  const std::string& text_prompt) override;

 private:
  std::string scenario_dir_;
};

class FixtureSegmenter : public SegmenterClient {
 public:
  explicit FixtureSegmenter(std::string scenario_dir);
  std::vector<std::vector<unsigned char>> segment(
      const std::string& image_path,
      const std::vector<BoundingBox>& boxes) override;

 private:
  std::string scenario_dir_;
};

class HttpDetector : public DetectorClient {
 public:
  explicit HttpDetector(std::string endpoint);
  std::vector<BoundingBox> detect(const std::string& image_path,
                                  const std::string& text_prompt) override;

 private:
  std::string endpoint_;
};

class HttpSegmenter : public SegmenterClient {
 public:
  explicit HttpSegmenter(std::string endpoint);
  std::vector<std::vector<unsigned char>> segment(
      const std::string& image_path,
      const std::vector<BoundingBox>& boxes) override;

 private:
  std::string endpoint_;
};

struct PerceptionOptions {
  std::string detection_prompt =
      "UI component. button. icon. text. image. input field.";
  double confidence_threshold = 0.25;
  std::string mask_output_dir;  // per-page mask files land here
};

std::vector<BoundingBox> detect_components(const std::string& image_path,
                                           DetectorClient& detector,
                                           const PerceptionOptions& options);

std::vector<MaskRef> segment_components(const std::string& image_path,
                                        const std::vector<BoundingBox>& boxes,
                                        SegmenterClient& segmenter,
                                        const PerceptionOptions& options);

// {component_type, function} via the classify prompt; one re-ask before
// giving up on the crop.
ComponentAnnotation classify_component(const std::string& crop_image_path,
                                       const BoundingBox& box,
                                       ModelClient& model,
                                       const PromptFactory& prompts);

PageDesign annotate_page(const std::string& page_id,
                         const std::string& image_path,
                         DetectorClient& detector, SegmenterClient& segmenter,
                         ModelClient& model, const PromptFactory& prompts,
                         const PerceptionOptions& options);

}  // namespace declarui
