#include "ptg.hpp"

#include <algorithm>
#include <array>
#include <cctype>
#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace declarui {

using nlohmann::json;

namespace {

std::string require_string(const json& obj, const char* field,
                           const std::string& path) {
  if (!obj.contains(field)) {
    throw SchemaError("missing field '" + std::string(field) + "' at " + path);
  }
  const json& value = obj.at(field);
  if (!value.is_string()) {
    throw SchemaError("field '" + std::string(field) + "' at " + path +
                      " must be a string");
  }
  return value.get<std::string>();
}

const json& require_array(const json& obj, const char* field,
                          const std::string& path) {
  if (!obj.contains(field)) {
    throw SchemaError("missing field '" + std::string(field) + "' at " + path);
  }
  const json& value = obj.at(field);
  if (!value.is_array()) {
    throw SchemaError("field '" + std::string(field) + "' at " + path +
                      " must be an array");
  }
  return value;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingFileError("cannot open file: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return buf.str();
}

PageTransitionGraph parse_ptg_impl(const std::string& document, bool strict) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded()) {
    throw SchemaError("document is not well-formed JSON");
  }
  if (!doc.is_object()) {
    throw SchemaError("top-level value must be an object at /");
  }

  PageTransitionGraph graph;
  const json& nodes = require_array(doc, "nodes", "/");
  for (size_t i = 0; i < nodes.size(); ++i) {
    const std::string path = "/nodes/" + std::to_string(i);
    if (!nodes[i].is_object()) {
      throw SchemaError("node entry at " + path + " must be an object");
    }
    PageNode node;
    node.id = require_string(nodes[i], "id", path);
    node.name = require_string(nodes[i], "name", path);
    node.page_type = require_string(nodes[i], "type", path);
    if (nodes[i].contains("property")) {
      const json& props = nodes[i].at("property");
      if (!props.is_object()) {
        throw SchemaError("field 'property' at " + path +
                          " must be an object");
      }
      for (const auto& [key, value] : props.items()) {
        if (!value.is_string()) {
          throw SchemaError("property '" + key + "' at " + path +
                            "/property must be a string");
        }
        node.properties[key] = value.get<std::string>();
      }
    }
    graph.nodes.push_back(std::move(node));
  }

  const json& edges = require_array(doc, "edges", "/");
  for (size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "/edges/" + std::to_string(i);
    if (!edges[i].is_object()) {
      throw SchemaError("edge entry at " + path + " must be an object");
    }
    Transition edge;
    edge.id = require_string(edges[i], "id", path);
    edge.source = require_string(edges[i], "source", path);
    edge.target = require_string(edges[i], "target", path);
    edge.condition = require_string(edges[i], "condition", path);
    edge.action = require_string(edges[i], "action", path);
    graph.edges.push_back(std::move(edge));
  }

  if (strict) {
    // Collect every offender before failing, never just the first.
    std::vector<std::string> problems;
    std::set<std::string> node_ids;
    std::set<std::string> seen_dup_nodes;
    for (const auto& node : graph.nodes) {
      if (!node_ids.insert(node.id).second &&
          seen_dup_nodes.insert(node.id).second) {
        problems.push_back("duplicate node id '" + node.id + "'");
      }
    }
    std::set<std::string> edge_ids;
    std::set<std::string> seen_dup_edges;
    for (const auto& edge : graph.edges) {
      if (!edge_ids.insert(edge.id).second &&
          seen_dup_edges.insert(edge.id).second) {
        problems.push_back("duplicate edge id '" + edge.id + "'");
      }
      if (!node_ids.count(edge.source)) {
        problems.push_back("edge '" + edge.id +
                           "' references missing source node '" + edge.source +
                           "'");
      }
      if (!node_ids.count(edge.target)) {
        problems.push_back("edge '" + edge.id +
                           "' references missing target node '" + edge.target +
                           "'");
      }
    }
    if (!problems.empty()) {
      std::string message = "PTG integrity check failed:";
      for (const auto& problem : problems) {
        message += "\n  - " + problem;
      }
      throw IntegrityError(message);
    }
  }

  return graph;
}

const PageNode* entry_node(const PageTransitionGraph& graph) {
  for (const auto& node : graph.nodes) {
    auto it = node.properties.find("entry");
    if (it != node.properties.end() && it->second == "true") {
      return &node;
    }
  }
  return graph.nodes.empty() ? nullptr : &graph.nodes.front();
}

}  // namespace

const PageNode* PageTransitionGraph::find_node(const std::string& id) const {
  for (const auto& node : nodes) {
    if (node.id == id) {
      return &node;
    }
  }
  return nullptr;
}

std::string normalize_page_name(const std::string& name) {
  std::string out;
  out.reserve(name.size());
  for (unsigned char c : name) {
    if (std::isalnum(c)) {
      out.push_back(static_cast<char>(std::tolower(c)));
    }
  }
  static const std::array<std::string, 3> suffixes = {"page", "screen",
                                                      "activity"};
  // Strip until fixpoint so the function is idempotent even on names that
  // stack suffixes ("OrdersScreenPage").
  bool stripped = true;
  while (stripped) {
    stripped = false;
    for (const auto& suffix : suffixes) {
      if (out.size() >= suffix.size() &&
          out.compare(out.size() - suffix.size(), suffix.size(), suffix) ==
              0) {
        out.erase(out.size() - suffix.size());
        stripped = true;
        break;
      }
    }
  }
  return out;
}

PageTransitionGraph parse_ptg(const std::string& document) {
  return parse_ptg_impl(document, /*strict=*/true);
}

PageTransitionGraph parse_ptg_lenient(const std::string& document) {
  return parse_ptg_impl(document, /*strict=*/false);
}

PageTransitionGraph load_ptg_file(const std::string& path) {
  return parse_ptg(read_file(path));
}

std::string serialize_ptg(const PageTransitionGraph& graph) {
  json doc;
  doc["nodes"] = json::array();
  for (const auto& node : graph.nodes) {
    json n;
    n["id"] = node.id;
    n["name"] = node.name;
    n["type"] = node.page_type;
    n["property"] = json::object();
    for (const auto& [key, value] : node.properties) {
      n["property"][key] = value;
    }
    doc["nodes"].push_back(std::move(n));
  }
  doc["edges"] = json::array();
  for (const auto& edge : graph.edges) {
    json e;
    e["id"] = edge.id;
    e["source"] = edge.source;
    e["target"] = edge.target;
    e["condition"] = edge.condition;
    e["action"] = edge.action;
    doc["edges"].push_back(std::move(e));
  }
  return doc.dump(2);
}

UiTransitionGraph parse_utg(const std::string& document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded()) {
    throw SchemaError("UTG document is not well-formed JSON");
  }
  if (!doc.is_object()) {
    throw SchemaError("UTG top-level value must be an object at /");
  }
  UiTransitionGraph utg;
  const json& edges = require_array(doc, "edges", "/");
  for (size_t i = 0; i < edges.size(); ++i) {
    const std::string path = "/edges/" + std::to_string(i);
    if (!edges[i].is_object()) {
      throw SchemaError("UTG edge entry at " + path + " must be an object");
    }
    UtgEdge edge;
    edge.from = require_string(edges[i], "from", path);
    edge.to = require_string(edges[i], "to", path);
    if (edge.from.empty() || edge.to.empty()) {
      throw SchemaError("UTG edge names must be non-empty at " + path);
    }
    utg.edges.push_back(std::move(edge));
  }
  return utg;
}

UiTransitionGraph load_utg_file(const std::string& path) {
  return parse_utg(read_file(path));
}

std::vector<Violation> validate_ptg(const PageTransitionGraph& graph) {
  std::vector<Violation> out;
  auto add = [&out](std::string code, Severity severity, std::string message,
                    std::string element) {
    out.push_back({std::move(code), severity, std::move(message),
                   std::move(element)});
  };

  if (graph.nodes.empty()) {
    add("EmptyGraph", Severity::Error, "graph has no nodes", "");
  }

  std::set<std::string> node_ids;
  std::set<std::string> reported_node_dups;
  for (const auto& node : graph.nodes) {
    if (node.id.empty()) {
      add("EmptyNodeId", Severity::Error, "node has empty id", node.name);
    } else if (!node_ids.insert(node.id).second &&
               reported_node_dups.insert(node.id).second) {
      add("DuplicateNodeId", Severity::Error,
          "node id '" + node.id + "' used more than once", node.id);
    }
    if (node.name.empty()) {
      add("EmptyNodeName", Severity::Error,
          "node '" + node.id + "' has empty name", node.id);
    }
  }

  std::set<std::string> edge_ids;
  std::set<std::string> reported_edge_dups;
  std::set<std::tuple<std::string, std::string, std::string>> parallel;
  for (const auto& edge : graph.edges) {
    if (edge.id.empty()) {
      add("EmptyEdgeId", Severity::Error, "edge has empty id",
          edge.source + "->" + edge.target);
    } else if (!edge_ids.insert(edge.id).second &&
               reported_edge_dups.insert(edge.id).second) {
      add("DuplicateEdgeId", Severity::Error,
          "edge id '" + edge.id + "' used more than once", edge.id);
    }
    if (!node_ids.count(edge.source)) {
      add("DanglingSource", Severity::Error,
          "edge '" + edge.id + "' source '" + edge.source +
              "' is not a node id",
          edge.id);
    }
    if (!node_ids.count(edge.target)) {
      add("DanglingTarget", Severity::Error,
          "edge '" + edge.id + "' target '" + edge.target +
              "' is not a node id",
          edge.id);
    }
    if (edge.condition.empty()) {
      add("EmptyCondition", Severity::Error,
          "edge '" + edge.id + "' has empty condition", edge.id);
    }
    if (!parallel.insert({edge.source, edge.target, edge.condition}).second) {
      add("DuplicateParallelEdge", Severity::Error,
          "edge '" + edge.id + "' duplicates another " + edge.source + "->" +
              edge.target + " edge with the same condition",
          edge.id);
    }
  }

  const PageNode* entry = entry_node(graph);
  for (const auto& node : graph.nodes) {
    if (entry && node.id == entry->id) {
      continue;
    }
    bool connected = false;
    for (const auto& edge : graph.edges) {
      if (edge.source == node.id || edge.target == node.id) {
        connected = true;
        break;
      }
    }
    if (!connected) {
      add("IsolatedNode", Severity::Warning,
          "node '" + node.id + "' has no incident transitions", node.id);
    }
  }

  return out;
}

bool has_error_violation(const std::vector<Violation>& violations) {
  return std::any_of(violations.begin(), violations.end(),
                     [](const Violation& v) {
                       return v.severity == Severity::Error;
                     });
}

EdgeKeySet ptg_edge_keys(const PageTransitionGraph& ptg) {
  EdgeKeySet keys;
  for (const auto& edge : ptg.edges) {
    const PageNode* source = ptg.find_node(edge.source);
    const PageNode* target = ptg.find_node(edge.target);
    if (!source || !target) {
      continue;
    }
    keys.insert({normalize_page_name(source->name),
                 normalize_page_name(target->name)});
  }
  return keys;
}

EdgeKeySet utg_edge_keys(const UiTransitionGraph& utg) {
  EdgeKeySet keys;
  for (const auto& edge : utg.edges) {
    keys.insert({normalize_page_name(edge.from), normalize_page_name(edge.to)});
  }
  return keys;
}

CoverageResult ptg_coverage(const PageTransitionGraph& ptg,
                            const UiTransitionGraph& utg) {
  if (ptg.edges.empty()) {
    throw EmptyPtgError("PTG has no edges; coverage is undefined");
  }
  EdgeKeySet required = ptg_edge_keys(ptg);
  EdgeKeySet observed = utg_edge_keys(utg);
  CoverageResult result;
  for (const auto& key : required) {
    if (observed.count(key)) {
      result.matched.insert(key);
    } else {
      result.missing.insert(key);
    }
  }
  result.pcr = static_cast<double>(result.matched.size()) /
               static_cast<double>(required.size());
  return result;
}

NavReport diff_navigation(const PageTransitionGraph& ptg,
                          const std::string& page_id,
                          const EdgeKeySet& implemented) {
  const PageNode* page = ptg.find_node(page_id);
  if (!page) {
    throw UnknownPageError("page id '" + page_id + "' not in PTG");
  }
  NavReport report;
  report.page_id = page_id;
  for (const auto& edge : ptg.edges) {
    if (edge.source != page_id) {
      continue;
    }
    const PageNode* target = ptg.find_node(edge.target);
    if (!target) {
      continue;
    }
    report.required.insert({normalize_page_name(page->name),
                            normalize_page_name(target->name)});
  }
  report.implemented = implemented;
  for (const auto& key : report.required) {
    if (!implemented.count(key)) {
      report.missing.insert(key);
    }
  }
  for (const auto& key : implemented) {
    if (!report.required.count(key)) {
      report.extra.insert(key);
    }
  }
  return report;
}

}  // namespace declarui
