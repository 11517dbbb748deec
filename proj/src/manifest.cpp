#include <algorithm>

#include "ontoforge/control.hpp"
#include "ontoforge/io.hpp"

namespace ontoforge::control {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

[[noreturn]] void invalid(const std::string& field, const std::string& why) {
  throw Error(Errc::invalid_manifest, field + ": " + why);
}

const json& member(const json& obj, const std::string& key, const std::string& field) {
  if (!obj.is_object() || !obj.contains(key)) invalid(field, "missing");
  return obj.at(key);
}

std::string string_at(const json& obj, const std::string& key, const std::string& field) {
  const auto& v = member(obj, key, field);
  if (!v.is_string()) invalid(field, "expected a string");
  return v.get<std::string>();
}

double number_at(const json& obj, const std::string& key, const std::string& field, double fallback) {
  if (!obj.is_object() || !obj.contains(key)) return fallback;
  const auto& v = obj.at(key);
  if (!v.is_number()) invalid(field, "expected a number");
  return v.get<double>();
}

fs::path resolve(const fs::path& base, const std::string& p) {
  fs::path path(p);
  if (path.is_relative() && !base.empty()) path = base / path;
  return path.lexically_normal();
}

bool is_url(std::string_view s) {
  return s.starts_with("http://") || s.starts_with("https://") || s.starts_with("file://");
}

}  // namespace

std::string_view stage_name(Stage s) {
  switch (s) {
    case Stage::search: return "search";
    case Stage::linguistic: return "linguistic";
    case Stage::extraction: return "extraction";
    case Stage::representation: return "representation";
  }
  return "search";
}

std::optional<Stage> parse_stage(std::string_view name) {
  for (const auto s : {Stage::search, Stage::linguistic, Stage::extraction, Stage::representation}) {
    if (stage_name(s) == name) return s;
  }
  return std::nullopt;
}

Manifest parse_manifest(const json& j, const fs::path& base) {
  if (!j.is_object()) invalid("manifest", "expected a JSON object");
  Manifest m;
  m.project_id = string_at(j, "project_id", "project_id");
  if (!ontology::is_valid_concept_id(m.project_id)) invalid("project_id", "must be lowercase letters, digits or '_'");
  m.name = j.contains("name") && j["name"].is_string() ? j["name"].get<std::string>() : m.project_id;

  const auto& stages = member(j, "stages", "stages");
  if (!stages.is_array() || stages.empty()) invalid("stages", "expected a non-empty array");
  for (const auto& s : stages) {
    const auto name = s.is_object() && s.contains("stage") ? s["stage"] : s;
    if (!name.is_string()) invalid("stages", "expected stage names");
    const auto stage = parse_stage(name.get<std::string>());
    if (!stage) invalid("stages", "unknown stage '" + name.get<std::string>() + "'");
    if (std::find(m.stages.begin(), m.stages.end(), *stage) != m.stages.end()) {
      invalid("stages", "duplicate stage '" + name.get<std::string>() + "'");
    }
    m.stages.push_back(*stage);
  }

  const auto& bindings = member(j, "bindings", "bindings");
  if (!bindings.is_object()) invalid("bindings", "expected an object");
  for (const auto s : m.stages) {
    const std::string key(stage_name(s));
    const auto& b = member(bindings, key, "bindings." + key);
    if (!b.is_object()) invalid("bindings." + key, "expected an object");
    m.binding_json[s] = b;
  }
  if (const auto it = m.binding_json.find(Stage::extraction); it != m.binding_json.end()) {
    const auto& b = it->second;
    if (b.contains("scorer")) {
      const auto scorer = b["scorer"].is_string() ? extraction::parse_scorer(b["scorer"].get<std::string>())
                                                  : std::nullopt;
      if (!scorer) invalid("bindings.extraction.scorer", "expected tfidf, cvalue or both");
      m.bindings.scorer = *scorer;
    }
    m.bindings.tau = number_at(b, "tau", "bindings.extraction.tau", 0.0);
  }
  if (const auto it = m.binding_json.find(Stage::linguistic); it != m.binding_json.end()) {
    if (it->second.contains("cascade")) {
      if (!it->second["cascade"].is_boolean()) invalid("bindings.linguistic.cascade", "expected a boolean");
      m.bindings.cascade = it->second["cascade"].get<bool>();
    }
  }

  const auto& domain = member(j, "domain", "domain");
  m.domain.name = domain.contains("name") && domain["name"].is_string() ? domain["name"].get<std::string>() : m.name;
  const auto& seeds = member(domain, "seed_lemmas", "domain.seed_lemmas");
  if (!seeds.is_array() || seeds.empty()) invalid("domain.seed_lemmas", "expected a non-empty array");
  for (const auto& s : seeds) {
    if (!s.is_string()) invalid("domain.seed_lemmas", "expected strings");
    m.domain.seed_lemmas.push_back(s.get<std::string>());
  }
  m.domain.lexicon = resolve(base, string_at(domain, "lexicon", "domain.lexicon"));
  if (!fs::is_regular_file(m.domain.lexicon)) invalid("domain.lexicon", "no such file " + m.domain.lexicon.string());
  m.domain.patterns = resolve(base, string_at(domain, "patterns", "domain.patterns"));
  if (!fs::is_regular_file(m.domain.patterns)) invalid("domain.patterns", "no such file " + m.domain.patterns.string());
  m.domain.relevance_threshold = number_at(domain, "relevance_threshold", "domain.relevance_threshold", 0.0);
  if (m.domain.relevance_threshold < 0.0 || m.domain.relevance_threshold > 1.0) {
    invalid("domain.relevance_threshold", "expected a value in [0, 1]");
  }
  if (domain.contains("sources")) {
    if (!domain["sources"].is_array()) invalid("domain.sources", "expected an array");
    for (const auto& s : domain["sources"]) {
      if (!s.is_string()) invalid("domain.sources", "expected strings");
      auto src = s.get<std::string>();
      if (!is_url(src)) {
        const auto path = resolve(base, src);
        if (!fs::exists(path)) invalid("domain.sources", "no such path " + path.string());
        src = path.string();
      }
      m.domain.sources.push_back(std::move(src));
    }
  }

  const auto& arch = member(j, "architecture", "architecture");
  m.architecture.storage_root = resolve(base, string_at(arch, "storage_root", "architecture.storage_root"));
  m.architecture.library = arch.contains("library")
                               ? resolve(base, string_at(arch, "library", "architecture.library"))
                               : m.architecture.storage_root / "library";
  const auto port = number_at(arch, "port", "architecture.port", 8080);
  if (port < 0 || port > 65535 || port != static_cast<int>(port)) invalid("architecture.port", "expected 0..65535");
  m.architecture.port = static_cast<int>(port);
  const auto max_it = number_at(arch, "max_iterations", "architecture.max_iterations", 5);
  if (max_it < 1 || max_it != static_cast<int>(max_it)) invalid("architecture.max_iterations", "must be an integer >= 1");
  m.architecture.max_iterations = static_cast<int>(max_it);
  return m;
}

Manifest load_manifest(const fs::path& path) {
  json j;
  try {
    j = json::parse(io::read_file(path));
  } catch (const json::exception& e) {
    invalid("manifest", e.what());
  }
  return parse_manifest(j, fs::absolute(path).parent_path());
}

json manifest_json(const Manifest& m) {
  json stages = json::array();
  json bindings = json::object();
  for (const auto s : m.stages) {
    stages.push_back({{"stage", stage_name(s)}});
    bindings[std::string(stage_name(s))] = m.binding_json.at(s);
  }
  return {{"project_id", m.project_id},
          {"name", m.name},
          {"stages", stages},
          {"bindings", bindings},
          {"domain",
           {{"name", m.domain.name},
            {"seed_lemmas", m.domain.seed_lemmas},
            {"lexicon", m.domain.lexicon.string()},
            {"patterns", m.domain.patterns.string()},
            {"relevance_threshold", m.domain.relevance_threshold},
            {"sources", m.domain.sources}}},
          {"architecture",
           {{"storage_root", m.architecture.storage_root.string()},
            {"library", m.architecture.library.string()},
            {"port", m.architecture.port},
            {"max_iterations", m.architecture.max_iterations}}}};
}

std::string_view stop_reason_name(StopReason r) {
  switch (r) {
    case StopReason::continue_: return "continue";
    case StopReason::converged: return "converged";
    case StopReason::max_iterations: return "max_iterations";
    case StopReason::user_stop: return "user_stop";
  }
  return "continue";
}

StopReason should_stop(const IterationReport& report, const Manifest& manifest) {
  if (report.new_candidates == 0 && report.approved == 0) return StopReason::converged;
  if (report.iteration >= manifest.architecture.max_iterations) return StopReason::max_iterations;
  if (report.user_stop_requested) return StopReason::user_stop;
  return StopReason::continue_;
}

json report_json(const IterationReport& r) {
  json j = {{"iteration", r.iteration},
            {"docs_processed", r.docs_processed},
            {"new_candidates", r.new_candidates},
            {"approved", r.approved},
            {"concepts_total", r.concepts_total},
            {"relations_total", r.relations_total},
            {"pending_decisions", r.pending_decisions},
            {"user_stop_requested", r.user_stop_requested},
            {"stop", r.stop},
            {"reason", stop_reason_name(r.reason)},
            {"finished_at", r.finished_at}};
  j["failed_stage"] = r.failed_stage ? json(*r.failed_stage) : json(nullptr);
  return j;
}

IterationReport report_from_json(const json& j) {
  IterationReport r;
  r.iteration = j.at("iteration").get<int>();
  r.docs_processed = j.at("docs_processed").get<std::size_t>();
  r.new_candidates = j.at("new_candidates").get<std::size_t>();
  r.approved = j.at("approved").get<std::size_t>();
  r.concepts_total = j.at("concepts_total").get<std::size_t>();
  r.relations_total = j.at("relations_total").get<std::size_t>();
  r.pending_decisions = j.at("pending_decisions").get<std::size_t>();
  r.user_stop_requested = j.value("user_stop_requested", false);
  r.stop = j.at("stop").get<bool>();
  const auto reason = j.at("reason").get<std::string>();
  for (const auto k : {StopReason::continue_, StopReason::converged, StopReason::max_iterations, StopReason::user_stop}) {
    if (stop_reason_name(k) == reason) r.reason = k;
  }
  if (j.contains("failed_stage") && j["failed_stage"].is_string()) r.failed_stage = j["failed_stage"].get<std::string>();
  r.finished_at = j.value("finished_at", "");
  return r;
}

}  // namespace ontoforge::control
