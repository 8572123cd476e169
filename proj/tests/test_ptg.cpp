#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <random>
#include <set>

#include "core/ptg.hpp"
#include "core/util.hpp"
#include "testutil.hpp"

using namespace declarui;

namespace {

std::string fixture(const std::string& rel) {
  return std::string(DECLARUI_FIXTURES) + "/" + rel;
}

std::set<std::string> codes_of(const std::vector<Violation>& violations) {
  std::set<std::string> codes;
  for (const auto& v : violations) codes.insert(v.code);
  return codes;
}

bool graphs_equal(const PageTransitionGraph& a, const PageTransitionGraph& b) {
  if (a.nodes.size() != b.nodes.size() || a.edges.size() != b.edges.size()) {
    return false;
  }
  for (size_t i = 0; i < a.nodes.size(); ++i) {
    if (a.nodes[i].id != b.nodes[i].id || a.nodes[i].name != b.nodes[i].name ||
        a.nodes[i].page_type != b.nodes[i].page_type ||
        a.nodes[i].properties != b.nodes[i].properties) {
      return false;
    }
  }
  for (size_t i = 0; i < a.edges.size(); ++i) {
    if (a.edges[i].id != b.edges[i].id ||
        a.edges[i].source != b.edges[i].source ||
        a.edges[i].target != b.edges[i].target ||
        a.edges[i].condition != b.edges[i].condition ||
        a.edges[i].action != b.edges[i].action) {
      return false;
    }
  }
  return true;
}

}  // namespace

TEST_CASE("normalize_page_name basics") {
  CHECK(normalize_page_name("HomePage") == "home");
  CHECK(normalize_page_name("Home Page") == "home");
  CHECK(normalize_page_name("home_screen") == "home");
  CHECK(normalize_page_name("CartActivity") == "cart");
  CHECK(normalize_page_name("Cart") == "cart");
  CHECK(normalize_page_name("Order-Details Screen") == "orderdetails");
  // Stacked suffixes collapse fully so the function is idempotent.
  CHECK(normalize_page_name("OrdersScreenPage") == "orders");
  CHECK(normalize_page_name("Page") == "");
  CHECK(normalize_page_name("") == "");
  CHECK(normalize_page_name("路径Page") == "");  // non-ASCII dropped
}

TEST_CASE("normalize_page_name is idempotent on random inputs") {
  std::mt19937 rng(42);
  for (int i = 0; i < 1000; ++i) {
    std::string name = testutil::random_text(rng);
    std::string once = normalize_page_name(name);
    CHECK(normalize_page_name(once) == once);
  }
}

TEST_CASE("parse_ptg accepts the shipped fixture") {
  PageTransitionGraph graph = load_ptg_file(fixture("e2e/ptg.json"));
  CHECK(graph.nodes.size() == 5);
  CHECK(graph.edges.size() == 5);
  REQUIRE(graph.find_node("home") != nullptr);
  CHECK(graph.find_node("home")->properties.at("entry") == "true");
  CHECK(graph.find_node("nope") == nullptr);
}

TEST_CASE("parse_ptg schema errors") {
  CHECK_THROWS_AS(parse_ptg("not json"), SchemaError);
  CHECK_THROWS_AS(parse_ptg("[1,2]"), SchemaError);
  CHECK_THROWS_AS(parse_ptg(R"({"nodes": []})"), SchemaError);
  CHECK_THROWS_AS(parse_ptg(R"({"nodes": [{"id": "a"}], "edges": []})"),
                  SchemaError);
  CHECK_THROWS_AS(
      parse_ptg(R"({"nodes": [{"id": 1, "name": "A", "type": "t"}],
                    "edges": []})"),
      SchemaError);
  CHECK_THROWS_AS(
      parse_ptg(R"({"nodes": [{"id": "a", "name": "A", "type": "t",
                               "property": {"k": 1}}], "edges": []})"),
      SchemaError);
}

TEST_CASE("parse_ptg integrity errors are exhaustive, not fail-fast") {
  const std::string doc = read_text_file(fixture("violations/combined.json"));
  try {
    parse_ptg(doc);
    FAIL("expected IntegrityError");
  } catch (const IntegrityError& e) {
    std::string what = e.what();
    CHECK(what.find("duplicate node id 'home'") != std::string::npos);
    CHECK(what.find("duplicate edge id 'e1'") != std::string::npos);
    CHECK(what.find("missing target node 'ghost'") != std::string::npos);
    CHECK(what.find("missing source node 'phantom'") != std::string::npos);
  }
  // The lenient parser keeps the graph for diagnostics.
  PageTransitionGraph graph = parse_ptg_lenient(doc);
  CHECK(graph.nodes.size() == 3);
  CHECK(graph.edges.size() == 2);
}

TEST_CASE("round-trip identity on 100 random valid graphs") {
  std::mt19937 rng(7);
  for (int i = 0; i < 100; ++i) {
    PageTransitionGraph graph = testutil::random_ptg(rng);
    std::string serialized = serialize_ptg(graph);
    PageTransitionGraph parsed = parse_ptg(serialized);
    CHECK(graphs_equal(graph, parsed));
    // Serialization is canonical: a second trip is byte-identical.
    CHECK(serialize_ptg(parsed) == serialized);
  }
}

TEST_CASE("validate_ptg detects each seeded violation class") {
  auto validate_file = [&](const std::string& name) {
    return validate_ptg(parse_ptg_lenient(
        read_text_file(fixture("violations/" + name))));
  };

  CHECK(codes_of(validate_file("duplicate_node_id.json"))
            .count("DuplicateNodeId") == 1);
  CHECK(codes_of(validate_file("duplicate_edge_id.json"))
            .count("DuplicateEdgeId") == 1);
  auto dangling = codes_of(validate_file("dangling_edges.json"));
  CHECK(dangling.count("DanglingSource") == 1);
  CHECK(dangling.count("DanglingTarget") == 1);
  CHECK(codes_of(validate_file("empty_condition.json"))
            .count("EmptyCondition") == 1);
  auto empties = codes_of(validate_file("empty_ids.json"));
  CHECK(empties.count("EmptyNodeId") == 1);
  CHECK(empties.count("EmptyNodeName") == 1);
  CHECK(empties.count("EmptyEdgeId") == 1);
  CHECK(codes_of(validate_file("parallel_edges.json"))
            .count("DuplicateParallelEdge") == 1);
  CHECK(codes_of(validate_file("empty_graph.json")).count("EmptyGraph") == 1);

  // Exhaustive reporting: the combined fixture yields every planted code.
  auto combined = validate_ptg(
      parse_ptg_lenient(read_text_file(fixture("violations/combined.json"))));
  auto codes = codes_of(combined);
  CHECK(codes.count("DuplicateNodeId") == 1);
  CHECK(codes.count("DuplicateEdgeId") == 1);
  CHECK(codes.count("DanglingTarget") == 1);
  CHECK(codes.count("DanglingSource") == 1);
  CHECK(codes.count("EmptyCondition") == 1);
  CHECK(codes.count("EmptyNodeName") == 1);
  CHECK(has_error_violation(combined));
}

TEST_CASE("isolated nodes warn but do not fail") {
  auto violations = validate_ptg(parse_ptg_lenient(
      read_text_file(fixture("violations/isolated_node.json"))));
  REQUIRE(violations.size() == 1);
  CHECK(violations[0].code == "IsolatedNode");
  CHECK(violations[0].severity == Severity::Warning);
  CHECK(violations[0].element_id == "island");
  CHECK_FALSE(has_error_violation(violations));
}

TEST_CASE("a clean graph validates with no violations") {
  auto violations =
      validate_ptg(parse_ptg(read_text_file(fixture("e2e/ptg.json"))));
  CHECK(violations.empty());
}

TEST_CASE("parse_utg") {
  UiTransitionGraph utg = load_utg_file(fixture("e2e/utg.json"));
  CHECK(utg.edges.size() == 5);
  CHECK(utg.edges[0].from == "HomePage");
  CHECK_THROWS_AS(parse_utg("[]"), SchemaError);
  CHECK_THROWS_AS(parse_utg(R"({"edges": [{"from": "", "to": "b"}]})"),
                  SchemaError);
  CHECK_THROWS_AS(load_utg_file("/nonexistent/utg.json"), MissingFileError);
}

TEST_CASE("edge keys normalize names and deduplicate") {
  PageTransitionGraph graph = parse_ptg(R"({
    "nodes": [
      {"id": "a", "name": "HomePage", "type": "main"},
      {"id": "b", "name": "Cart Screen", "type": "detail"},
      {"id": "c", "name": "home", "type": "main"}
    ],
    "edges": [
      {"id": "e1", "source": "a", "target": "b", "condition": "tap", "action": "nav"},
      {"id": "e2", "source": "c", "target": "b", "condition": "tap2", "action": "nav"}
    ]})");
  EdgeKeySet keys = ptg_edge_keys(graph);
  // Both edges normalize to home->cart.
  CHECK(keys.size() == 1);
  CHECK(keys.count({"home", "cart"}) == 1);
}

TEST_CASE("ptg_coverage matches and misses") {
  PageTransitionGraph ptg = load_ptg_file(fixture("e2e/ptg.json"));
  UiTransitionGraph utg;
  utg.edges.push_back({"Home", "Cart"});
  utg.edges.push_back({"profile page", "OrdersScreen"});
  CoverageResult result = ptg_coverage(ptg, utg);
  CHECK(result.matched.size() == 2);
  CHECK(result.missing.size() == 3);
  CHECK(result.pcr == doctest::Approx(2.0 / 5.0));

  PageTransitionGraph empty;
  empty.nodes.push_back({"a", "A", "main", {}});
  CHECK_THROWS_AS(ptg_coverage(empty, utg), EmptyPtgError);
}

TEST_CASE("diff_navigation classifies missing and extra") {
  PageTransitionGraph ptg = load_ptg_file(fixture("e2e/ptg.json"));
  EdgeKeySet implemented = {{"home", "cart"}, {"home", "login"}};
  NavReport report = diff_navigation(ptg, "home", implemented);
  CHECK(report.required.size() == 3);
  CHECK(report.missing == EdgeKeySet{{"home", "profile"}, {"home", "settings"}});
  CHECK(report.extra == EdgeKeySet{{"home", "login"}});
  CHECK_THROWS_AS(diff_navigation(ptg, "nope", implemented), UnknownPageError);
}
