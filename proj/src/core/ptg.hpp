#pragma once

#include <map>
#include <set>
#include <string>
#include <vector>

#include "errors.hpp"

namespace declarui {

struct PageNode {
  std::string id;
  std::string name;
  std::string page_type;
  std::map<std::string, std::string> properties;
};

struct Transition {
  std::string id;
  std::string source;
  std::string target;
  std::string condition;
  std::string action;
};

struct PageTransitionGraph {
  std::vector<PageNode> nodes;
  std::vector<Transition> edges;

  const PageNode* find_node(const std::string& id) const;
};

struct UtgEdge {
  std::string from;
  std::string to;
};

struct UiTransitionGraph {
  std::vector<UtgEdge> edges;
};

// Canonical (source, target) pair after name normalization. Ordered so it
// can live in std::set and serialize deterministically.
struct EdgeKey {
  std::string source;
  std::string target;

  auto operator<=>(const EdgeKey&) const = default;
};

using EdgeKeySet = std::set<EdgeKey>;

enum class Severity { Error, Warning };

struct Violation {
  std::string code;
  Severity severity = Severity::Error;
  std::string message;
  std::string element_id;
};

struct CoverageResult {
  double pcr = 0.0;  // fraction in [0,1]
  EdgeKeySet matched;
  EdgeKeySet missing;
};

struct NavHit {
  std::string target_token;
  std::string pattern_name;
  int line = 0;
};

struct NavReport {
  std::string page_id;
  EdgeKeySet required;
  EdgeKeySet implemented;
  EdgeKeySet missing;
  EdgeKeySet extra;
  int iteration = 0;
};

// Lowercases, drops everything but ASCII letters/digits, then strips one
// trailing "page"/"screen"/"activity" suffix. Idempotent.
std::string normalize_page_name(const std::string& name);

PageTransitionGraph parse_ptg(const std::string& document);
// Schema checks only; integrity problems are left for validate_ptg to report.
PageTransitionGraph parse_ptg_lenient(const std::string& document);
PageTransitionGraph load_ptg_file(const std::string& path);
std::string serialize_ptg(const PageTransitionGraph& graph);

UiTransitionGraph parse_utg(const std::string& document);
UiTransitionGraph load_utg_file(const std::string& path);

std::vector<Violation> validate_ptg(const PageTransitionGraph& graph);
bool has_error_violation(const std::vector<Violation>& violations);

EdgeKeySet ptg_edge_keys(const PageTransitionGraph& ptg);
EdgeKeySet utg_edge_keys(const UiTransitionGraph& utg);

CoverageResult ptg_coverage(const PageTransitionGraph& ptg,
                            const UiTransitionGraph& utg);

NavReport diff_navigation(const PageTransitionGraph& ptg,
                          const std::string& page_id,
                          const EdgeKeySet& implemented);

}  // namespace declarui
