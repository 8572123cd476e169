#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <unistd.h>

#include <filesystem>

#include "core/image.hpp"
#include "core/modelclient.hpp"
#include "core/perception.hpp"
#include "core/prompts.hpp"

using namespace declarui;
namespace fs = std::filesystem;

namespace {

std::string fixture(const std::string& rel) {
  return std::string(DECLARUI_FIXTURES) + "/" + rel;
}

fs::path temp_dir(const std::string& tag) {
  fs::path dir = fs::temp_directory_path() /
                 ("declarui-perception-" + tag + "-" + std::to_string(getpid()));
  fs::remove_all(dir);
  fs::create_directories(dir);
  return dir;
}

class StubDetector : public DetectorClient {
 public:
  explicit StubDetector(std::vector<BoundingBox> boxes)
      : boxes_(std::move(boxes)) {}
  std::vector<BoundingBox> detect(const std::string&,
                                  const std::string& prompt) override {
    last_prompt = prompt;
    return boxes_;
  }
  std::string last_prompt;

 private:
  std::vector<BoundingBox> boxes_;
};

MockModelClient classify_mock(const std::string& reply) {
  ScenarioScript script;
  script.entries.push_back({Purpose::Classify, {}, reply});
  return MockModelClient(script);
}

}  // namespace

TEST_CASE("page design serialization round-trips") {
  PageDesign page;
  page.page_id = "home";
  page.image_path = "/designs/home.png";
  ComponentAnnotation c;
  c.component_type = "button";
  c.function = "opens the cart";
  c.box = {1, 2, 3, 4, 0.5};
  c.mask = MaskRef{"/masks/mask-0.png", c.box};
  page.components.push_back(c);
  page.components.push_back({"text", "title", {0, 0, 10, 2, 0.9}, std::nullopt});

  PageDesign parsed = parse_page_design(serialize_page_design(page));
  CHECK(parsed.page_id == "home");
  REQUIRE(parsed.components.size() == 2);
  CHECK(parsed.components[0].component_type == "button");
  REQUIRE(parsed.components[0].mask.has_value());
  CHECK(parsed.components[0].mask->path == "/masks/mask-0.png");
  CHECK_FALSE(parsed.components[1].mask.has_value());
  CHECK_THROWS_AS(parse_page_design("[]"), SchemaError);
  CHECK_THROWS_AS(parse_page_design(R"({"page_id": "x"})"), SchemaError);
}

TEST_CASE("detect_components filters, clamps, and sorts by confidence") {
  StubDetector detector({
      {2, 2, 8, 8, 0.5},
      {60, 40, 30, 30, 0.9},   // sticks out; clamped to the 64x48 canvas
      {5, 5, 4, 4, 0.1},       // below threshold
      {-3, -3, 5, 5, 0.7},     // clamped at the origin
  });
  PerceptionOptions options;
  options.confidence_threshold = 0.25;
  auto boxes = detect_components(fixture("e2e/designs/home.png"), detector,
                                 options);
  CHECK(detector.last_prompt == options.detection_prompt);
  REQUIRE(boxes.size() == 3);
  CHECK(boxes[0].confidence == 0.9);
  CHECK(boxes[0].x + boxes[0].width <= 64.0);
  CHECK(boxes[0].y + boxes[0].height <= 48.0);
  CHECK(boxes[1].confidence == 0.7);
  CHECK(boxes[1].x == 0.0);
  CHECK(boxes[2].confidence == 0.5);
}

TEST_CASE("fixture detector and segmenter replay scenario files") {
  FixtureDetector detector(fixture("e2e/scenario"));
  auto boxes = detector.detect(fixture("e2e/designs/home.png"), "prompt");
  REQUIRE(boxes.size() == 1);
  CHECK(boxes[0].width == 8);
  CHECK(boxes[0].confidence == 0.9);
  CHECK_THROWS_AS(detector.detect("/designs/unknown.png", "prompt"),
                  MissingFileError);

  FixtureSegmenter segmenter(fixture("e2e/scenario"));
  auto masks = segmenter.segment(fixture("e2e/designs/home.png"), boxes);
  REQUIRE(masks.size() == 1);
  CHECK(masks[0].size() > 8);  // a real PNG payload

  fs::path out = temp_dir("segment");
  PerceptionOptions options;
  options.mask_output_dir = out.string();
  auto refs = segment_components(fixture("e2e/designs/home.png"), boxes,
                                 segmenter, options);
  REQUIRE(refs.size() == 1);
  CHECK(fs::exists(refs[0].path));
  fs::remove_all(out);
}

TEST_CASE("segment_components rejects mask-count mismatches") {
  class ShortSegmenter : public SegmenterClient {
   public:
    std::vector<std::vector<unsigned char>> segment(
        const std::string&, const std::vector<BoundingBox>&) override {
      return {};
    }
  } segmenter;
  PerceptionOptions options;
  options.mask_output_dir = temp_dir("mismatch").string();
  std::vector<BoundingBox> boxes = {{0, 0, 4, 4, 0.9}};
  try {
    segment_components(fixture("e2e/designs/home.png"), boxes, segmenter,
                       options);
    FAIL("expected a client error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::Client);
    // Stage tag makes perception failures attributable.
    CHECK(std::string(e.what()).find("[stage=segment]") != std::string::npos);
  }
  fs::remove_all(options.mask_output_dir);
}

TEST_CASE("classify_component parses, re-asks once, then fails") {
  PromptFactory prompts(DECLARUI_TEMPLATES, {});
  BoundingBox box{0, 0, 4, 4, 0.9};

  MockModelClient good = classify_mock(
      R"({"component_type": "button", "function": "submits the form"})");
  ComponentAnnotation annotation =
      classify_component("/tmp/crop.png", box, good, prompts);
  CHECK(annotation.component_type == "button");
  CHECK(annotation.function == "submits the form");
  CHECK(annotation.box.width == 4);

  // First reply unparseable, second good: the re-ask rescues the crop.
  ScenarioScript recovery;
  recovery.sequential = true;
  recovery.entries.push_back({Purpose::Classify, {}, "not json at all"});
  recovery.entries.push_back(
      {Purpose::Classify, {}, R"({"component_type": "icon", "function": "f"})"});
  MockModelClient flaky(recovery);
  CHECK(classify_component("/tmp/crop.png", box, flaky, prompts)
            .component_type == "icon");

  MockModelClient hopeless = classify_mock(R"({"component_type": "button"})");
  try {
    classify_component("/tmp/crop.png", box, hopeless, prompts);
    FAIL("expected a reply-format error");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::ReplyFormat);
    CHECK(std::string(e.what()).find("[stage=classify]") != std::string::npos);
  }
}

TEST_CASE("annotate_page produces reading-ordered annotations") {
  fs::path out = temp_dir("annotate");
  FixtureDetector detector(fixture("e2e/scenario"));
  FixtureSegmenter segmenter(fixture("e2e/scenario"));
  PromptFactory prompts(DECLARUI_TEMPLATES, {});
  MockModelClient mock = classify_mock(
      R"({"component_type": "button", "function": "navigates"})");

  PerceptionOptions options;
  options.mask_output_dir = out.string();
  PageDesign page =
      annotate_page("home", fixture("e2e/designs/home.png"), detector,
                    segmenter, mock, prompts, options);
  CHECK(page.page_id == "home");
  REQUIRE(page.components.size() == 1);
  CHECK(page.components[0].component_type == "button");
  REQUIRE(page.components[0].mask.has_value());
  CHECK(fs::exists(out / "crop-0.png"));
  CHECK(fs::exists(out / "mask-0.png"));

  // Unparseable classification drops the component but keeps the page.
  MockModelClient bad = classify_mock("garbage");
  PageDesign degraded =
      annotate_page("home", fixture("e2e/designs/home.png"), detector,
                    segmenter, bad, prompts, options);
  CHECK(degraded.components.empty());
  fs::remove_all(out);
}

TEST_CASE("http perception clients refuse offline use with ClientError") {
  HttpDetector detector("http://127.0.0.1:1/detect");
  CHECK_THROWS_AS(detector.detect("/x.png", "p"), ClientError);
  HttpSegmenter segmenter("http://127.0.0.1:1/segment");
  CHECK_THROWS_AS(segmenter.segment("/x.png", {}), ClientError);
}
