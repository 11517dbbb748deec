#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ontoforge/corpus.hpp"
#include "ontoforge/error.hpp"
#include "ontoforge/extraction.hpp"
#include "ontoforge/ontology.hpp"
#include "ontoforge/taskflow.hpp"

namespace ontoforge::control {

enum class Stage { search, linguistic, extraction, representation };

std::string_view stage_name(Stage s);
std::optional<Stage> parse_stage(std::string_view name);

struct Bindings {
  extraction::Scorer scorer = extraction::Scorer::both;
  bool cascade = true;  // bigram rule of the disambiguation cascade
  double tau = 0.0;     // PMI threshold
};

struct DomainConfig {
  std::string name;
  std::vector<std::string> seed_lemmas;
  std::filesystem::path lexicon;
  std::filesystem::path patterns;
  double relevance_threshold = 0.0;
  std::vector<std::string> sources;  // files, directories or URLs
};

struct Architecture {
  std::filesystem::path storage_root;
  std::filesystem::path library;
  int port = 8080;
  int max_iterations = 5;
};

// project.json: {project_id, name, stages, bindings, domain, architecture}
struct Manifest {
  std::string project_id;
  std::string name;
  std::vector<Stage> stages;
  std::map<Stage, nlohmann::json> binding_json;
  Bindings bindings;
  DomainConfig domain;
  Architecture architecture;
};

// Relative paths resolve against `base`. Throws InvalidManifest naming the field.
Manifest parse_manifest(const nlohmann::json& j, const std::filesystem::path& base = {});
Manifest load_manifest(const std::filesystem::path& path);
nlohmann::json manifest_json(const Manifest& m);

enum class StopReason { continue_, converged, max_iterations, user_stop };

std::string_view stop_reason_name(StopReason r);

struct IterationReport {
  int iteration = 0;
  std::size_t docs_processed = 0;
  std::size_t new_candidates = 0;
  std::size_t approved = 0;  // approvals since the previous report
  std::size_t concepts_total = 0;
  std::size_t relations_total = 0;
  std::size_t pending_decisions = 0;
  bool user_stop_requested = false;
  bool stop = false;
  StopReason reason = StopReason::continue_;
  std::optional<std::string> failed_stage;
  std::string finished_at;
};

nlohmann::json report_json(const IterationReport& r);
IterationReport report_from_json(const nlohmann::json& j);

StopReason should_stop(const IterationReport& report, const Manifest& manifest);

enum class ItemKind { candidate_review, homonymy, ambiguity, stop };

std::string_view item_kind_name(ItemKind k);

struct QueueItem {
  std::string item_id;
  ItemKind kind = ItemKind::candidate_review;
  nlohmann::json payload;
  std::string created_at;
  bool resolved = false;
  nlohmann::json resolution;
  std::string resolved_at;
  std::string actor;
};

nlohmann::json item_json(const QueueItem& item);

// Resolution body: {"verdict": "approve"|"reject", "lemma"?, "pos"?, "actor"?}.
// A bare "approve"/"reject" string is accepted too.
struct Resolution {
  bool approve = true;
  std::optional<std::string> lemma;
  std::optional<std::string> pos;
  std::string actor = "engineer";
};

Resolution parse_resolution(const nlohmann::json& j);

struct TaskRunPaths {
  std::filesystem::path objects;
  std::filesystem::path processes;
  std::filesystem::path tasks;
  std::filesystem::path links;
};

// On-disk project under `<storage_root>/<project_id>/`. Every call reads the
// persisted state, so a fresh handle resumes where the last one stopped.
class Project {
 public:
  // Throws InvalidManifest, StorageUnwritable.
  static Project create(const Manifest& manifest);
  // Throws NotFound.
  static Project open(const std::filesystem::path& dir);

  const std::filesystem::path& dir() const { return dir_; }
  const Manifest& manifest() const { return manifest_; }
  const std::string& id() const { return manifest_.project_id; }

  corpus::IngestResult ingest(const std::string& locator);
  corpus::DocumentStore::DirectoryResult ingest_directory(const std::filesystem::path& dir);

  // Throws IterationInProgress, StageFailure.
  IterationReport run_iteration();

  // Throws UnknownItem, AlreadyResolved, InvalidResolution, IterationInProgress.
  QueueItem apply_decision(const std::string& item_id, const Resolution& resolution);

  std::vector<QueueItem> queue(bool include_resolved = false) const;
  extraction::CandidateSet candidates() const;
  ontology::Ontology ontology() const;
  std::vector<IterationReport> reports() const;
  int iterations_run() const;
  bool stop_requested() const;
  std::optional<linguistic::AnalyzedDocument> analysis(DocId doc) const;

  // Runs a triad with default stubs; returns the stored run document.
  nlohmann::json run_task(const TaskRunPaths& paths);
  nlohmann::json task_run(const std::string& run_id) const;

 private:
  Project(std::filesystem::path dir, Manifest manifest);

  std::filesystem::path dir_;
  Manifest manifest_;
};

nlohmann::json graph_json(const ontology::Ontology& o);

// Fails with IterationInProgress while another live holder owns the lock.
class ProjectLock {
 public:
  explicit ProjectLock(const std::filesystem::path& project_dir);
  ~ProjectLock();
  ProjectLock(const ProjectLock&) = delete;
  ProjectLock& operator=(const ProjectLock&) = delete;

 private:
  std::filesystem::path path_;
};

}  // namespace ontoforge::control
