#include "manifest.hpp"

#include <fstream>
#include <sstream>

#include <nlohmann/json.hpp>

namespace declarui {

using nlohmann::json;

namespace {

json edge_keys_to_json(const EdgeKeySet& keys) {
  json arr = json::array();
  for (const auto& key : keys) {
    arr.push_back({{"source", key.source}, {"target", key.target}});
  }
  return arr;
}

EdgeKeySet edge_keys_from_json(const json& arr) {
  EdgeKeySet keys;
  for (const auto& entry : arr) {
    keys.insert({entry.at("source").get<std::string>(),
                 entry.at("target").get<std::string>()});
  }
  return keys;
}

json report_to_json(const NavReport& report) {
  return {{"page_id", report.page_id},
          {"required", edge_keys_to_json(report.required)},
          {"implemented", edge_keys_to_json(report.implemented)},
          {"missing", edge_keys_to_json(report.missing)},
          {"extra", edge_keys_to_json(report.extra)},
          {"iteration", report.iteration}};
}

NavReport report_from_json(const json& obj) {
  NavReport report;
  report.page_id = obj.at("page_id").get<std::string>();
  report.required = edge_keys_from_json(obj.at("required"));
  report.implemented = edge_keys_from_json(obj.at("implemented"));
  report.missing = edge_keys_from_json(obj.at("missing"));
  report.extra = edge_keys_from_json(obj.at("extra"));
  report.iteration = obj.at("iteration").get<int>();
  return report;
}

}  // namespace

std::string to_string(RunStatus status) {
  switch (status) {
    case RunStatus::Compiled:
      return "Compiled";
    case RunStatus::CompilationFailed:
      return "CompilationFailed";
    case RunStatus::Aborted:
      return "Aborted";
  }
  return "Aborted";
}

RunStatus run_status_from_string(const std::string& text) {
  if (text == "Compiled") return RunStatus::Compiled;
  if (text == "CompilationFailed") return RunStatus::CompilationFailed;
  if (text == "Aborted") return RunStatus::Aborted;
  throw SchemaError("unknown run status '" + text + "'");
}

std::string serialize_manifest(const RunManifest& manifest) {
  json doc;
  doc["schema"] = manifest.schema;
  doc["app_id"] = manifest.app_id;
  doc["framework"] = manifest.framework;
  doc["compile_attempts"] = manifest.compile_attempts;
  doc["compiled"] = manifest.compiled;
  doc["compile_iterations_used"] = manifest.compile_iterations_used;
  doc["token_usage"] = {{"input_tokens", manifest.token_usage.input_tokens},
                        {"output_tokens", manifest.token_usage.output_tokens}};
  doc["wall_clock_s"] = manifest.wall_clock_s;
  doc["status"] = to_string(manifest.status);
  doc["abort_stage"] = manifest.abort_stage;
  doc["config_digest"] = manifest.config_digest;
  doc["pages"] = json::array();
  for (const auto& page : manifest.pages) {
    json p;
    p["page_id"] = page.page_id;
    p["file_name"] = page.file_name;
    p["nav_iterations"] = page.nav_iterations;
    p["final_report"] = report_to_json(page.final_report);
    p["aborted"] = page.aborted;
    p["abort_reason"] = page.abort_reason;
    p["history"] = json::array();
    for (const auto& entry : page.history) {
      p["history"].push_back({{"iteration", entry.iteration},
                              {"code_digest", entry.code_digest},
                              {"missing_count", entry.missing_count}});
    }
    doc["pages"].push_back(std::move(p));
  }
  return doc.dump(2);
}

RunManifest parse_manifest(const std::string& document) {
  json doc = json::parse(document, nullptr, false);
  if (doc.is_discarded() || !doc.is_object()) {
    throw SchemaError("manifest is not a JSON object");
  }
  try {
    RunManifest manifest;
    manifest.schema = doc.at("schema").get<int>();
    manifest.app_id = doc.at("app_id").get<std::string>();
    manifest.framework = doc.at("framework").get<std::string>();
    manifest.compile_attempts = doc.at("compile_attempts").get<int>();
    manifest.compiled = doc.at("compiled").get<bool>();
    manifest.compile_iterations_used =
        doc.at("compile_iterations_used").get<int>();
    manifest.token_usage.input_tokens =
        doc.at("token_usage").at("input_tokens").get<long long>();
    manifest.token_usage.output_tokens =
        doc.at("token_usage").at("output_tokens").get<long long>();
    manifest.wall_clock_s = doc.at("wall_clock_s").get<double>();
    manifest.status = run_status_from_string(doc.at("status").get<std::string>());
    manifest.abort_stage = doc.value("abort_stage", "");
    manifest.config_digest = doc.value("config_digest", "");
    for (const auto& p : doc.at("pages")) {
      GeneratedPage page;
      page.page_id = p.at("page_id").get<std::string>();
      page.file_name = p.at("file_name").get<std::string>();
      page.nav_iterations = p.at("nav_iterations").get<int>();
      page.final_report = report_from_json(p.at("final_report"));
      page.aborted = p.value("aborted", false);
      page.abort_reason = p.value("abort_reason", "");
      for (const auto& h : p.at("history")) {
        page.history.push_back({h.at("iteration").get<int>(),
                                h.at("code_digest").get<std::string>(),
                                h.at("missing_count").get<int>()});
      }
      manifest.pages.push_back(std::move(page));
    }
    return manifest;
  } catch (const json::exception& e) {
    throw SchemaError(std::string("manifest schema error: ") + e.what());
  }
}

RunManifest load_manifest_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) {
    throw MissingFileError("cannot open manifest: " + path);
  }
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_manifest(buf.str());
}

std::string scrub_manifest_json(const std::string& document) {
  json doc = json::parse(document);
  doc["wall_clock_s"] = 0.0;
  return doc.dump(2);
}

}  // namespace declarui
