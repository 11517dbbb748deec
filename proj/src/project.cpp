#include <fcntl.h>
#include <signal.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstdio>
#include <memory>
#include <thread>

#include "ontoforge/control.hpp"
#include "ontoforge/io.hpp"
#include "ontoforge/library.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge::control {

namespace fs = std::filesystem;
using nlohmann::json;
using extraction::CandidateSet;
using extraction::CandidateStatus;
using extraction::TermCandidate;

namespace {

constexpr std::string_view kLockFile = ".lock";

struct State {
  int iterations_run = 0;
  bool stop_requested = false;
  std::size_t approved_since_report = 0;
  std::size_t next_item = 1;
  std::size_t next_run = 1;
  bool ontology_dirty = false;
  std::map<std::string, std::string> concept_ids;  // candidate key -> concept id
  std::map<DocId, std::map<std::size_t, linguistic::Reading>> overrides;
  std::set<DocId> requeue;
  std::set<std::string> ambiguity_seen;
  std::set<std::string> homonymy_seen;  // "doc:offset"
};

json state_json(const State& s) {
  json overrides = json::object();
  for (const auto& [doc, by_offset] : s.overrides) {
    json arr = json::array();
    for (const auto& [offset, reading] : by_offset) {
      arr.push_back({{"offset", offset}, {"lemma", reading.lemma}, {"pos", linguistic::pos_name(reading.pos)}});
    }
    overrides[std::to_string(doc)] = arr;
  }
  return {{"iterations_run", s.iterations_run},
          {"stop_requested", s.stop_requested},
          {"approved_since_report", s.approved_since_report},
          {"next_item", s.next_item},
          {"next_run", s.next_run},
          {"ontology_dirty", s.ontology_dirty},
          {"concept_ids", s.concept_ids},
          {"overrides", overrides},
          {"requeue", s.requeue},
          {"ambiguity_seen", s.ambiguity_seen},
          {"homonymy_seen", s.homonymy_seen}};
}

State state_from_json(const json& j) {
  State s;
  s.iterations_run = j.at("iterations_run").get<int>();
  s.stop_requested = j.at("stop_requested").get<bool>();
  s.approved_since_report = j.at("approved_since_report").get<std::size_t>();
  s.next_item = j.at("next_item").get<std::size_t>();
  s.next_run = j.at("next_run").get<std::size_t>();
  s.ontology_dirty = j.at("ontology_dirty").get<bool>();
  s.concept_ids = j.at("concept_ids").get<std::map<std::string, std::string>>();
  for (const auto& [doc, arr] : j.at("overrides").items()) {
    auto& by_offset = s.overrides[std::stoll(doc)];
    for (const auto& o : arr) {
      by_offset[o.at("offset").get<std::size_t>()] = {o.at("lemma").get<std::string>(),
                                                      *linguistic::parse_pos(o.at("pos").get<std::string>())};
    }
  }
  s.requeue = j.at("requeue").get<std::set<DocId>>();
  s.ambiguity_seen = j.at("ambiguity_seen").get<std::set<std::string>>();
  s.homonymy_seen = j.at("homonymy_seen").get<std::set<std::string>>();
  return s;
}

json candidate_json(const TermCandidate& c) {
  return {{"key", c.key()},
          {"normal_form", c.normal_form},
          {"surface_variants", c.surface_variants},
          {"freq", c.freq},
          {"doc_freq", c.doc_freq},
          {"tfidf", c.tfidf},
          {"cvalue", c.cvalue},
          {"status", extraction::status_name(c.status)},
          {"provenance", c.provenance}};
}

TermCandidate candidate_from_json(const json& j) {
  TermCandidate c;
  c.normal_form = j.at("normal_form").get<std::vector<std::string>>();
  c.surface_variants = j.at("surface_variants").get<std::set<std::string>>();
  c.freq = j.at("freq").get<std::size_t>();
  c.doc_freq = j.at("doc_freq").get<std::size_t>();
  c.tfidf = j.at("tfidf").get<double>();
  c.cvalue = j.at("cvalue").get<double>();
  c.status = *extraction::parse_status(j.at("status").get<std::string>());
  c.provenance = j.at("provenance").get<std::set<DocId>>();
  return c;
}

json evidence_json(const extraction::RelationEvidence& e) {
  return {{"subject", e.subject},   {"predicate", extraction::relation_kind_name(e.predicate)},
          {"object", e.object},     {"source", e.source},
          {"doc_id", e.doc_id},     {"sentence_id", e.sentence_id},
          {"weight", e.weight}};
}

extraction::RelationEvidence evidence_from_json(const json& j) {
  extraction::RelationEvidence e;
  e.subject = j.at("subject").get<std::vector<std::string>>();
  e.predicate = j.at("predicate").get<std::string>() == extraction::relation_kind_name(extraction::RelationKind::isa)
                    ? extraction::RelationKind::isa
                    : extraction::RelationKind::assoc;
  e.object = j.at("object").get<std::vector<std::string>>();
  e.source = j.at("source").get<std::string>();
  e.doc_id = j.at("doc_id").get<DocId>();
  e.sentence_id = j.at("sentence_id").get<std::size_t>();
  e.weight = j.at("weight").get<double>();
  return e;
}

QueueItem item_from_json(const json& j) {
  QueueItem item;
  item.item_id = j.at("item_id").get<std::string>();
  const auto kind = j.at("kind").get<std::string>();
  for (const auto k : {ItemKind::candidate_review, ItemKind::homonymy, ItemKind::ambiguity, ItemKind::stop}) {
    if (item_kind_name(k) == kind) item.kind = k;
  }
  item.payload = j.at("payload");
  item.created_at = j.value("created_at", "");
  item.resolved = j.at("resolved").get<bool>();
  item.resolution = j.value("resolution", json());
  item.resolved_at = j.value("resolved_at", "");
  item.actor = j.value("actor", "");
  return item;
}

json read_json(const fs::path& p) {
  try {
    return json::parse(io::read_file(p));
  } catch (const json::exception& e) {
    throw Error(Errc::io_error, p.string() + ": " + e.what());
  }
}

void write_json(const fs::path& p, const json& j) { io::write_file_atomic(p, j.dump(1) + "\n"); }

std::string slug_of(std::string_view key) {
  std::string out;
  for (const auto& cp : text::decode(text::to_lower(key))) {
    if (text::is_letter(cp.value) || text::is_digit(cp.value)) {
      out += text::encode(cp.value);
    } else if (out.empty() || out.back() != '_') {
      out += '_';
    }
  }
  while (!out.empty() && out.back() == '_') out.pop_back();
  return out.empty() ? "concept" : out;
}

std::string unique_id(const ontology::Ontology& o, const std::string& base) {
  if (!o.find(base)) return base;
  for (int n = 2;; ++n) {
    auto id = base + "_" + std::to_string(n);
    if (!o.find(id)) return id;
  }
}

bool pid_alive(pid_t pid) { return pid > 0 && (::kill(pid, 0) == 0 || errno == EPERM); }

bool try_lock(const fs::path& path) {
  for (int attempt = 0; attempt < 2; ++attempt) {
    const int fd = ::open(path.c_str(), O_CREAT | O_EXCL | O_WRONLY, 0644);
    if (fd >= 0) {
      const auto pid = std::to_string(::getpid());
      const auto written = ::write(fd, pid.data(), pid.size());
      ::close(fd);
      if (written != static_cast<ssize_t>(pid.size())) {
        fs::remove(path);
        throw Error(Errc::storage_unwritable, "cannot write lock file " + path.string());
      }
      return true;
    }
    if (errno != EEXIST) throw Error(Errc::storage_unwritable, "cannot create lock file " + path.string());
    pid_t holder = 0;
    try {
      holder = static_cast<pid_t>(std::stol(io::read_file(path)));
    } catch (const std::exception&) {
      holder = 0;
    }
    if (pid_alive(holder)) return false;
    std::error_code ec;
    fs::remove(path, ec);
  }
  return false;
}

class Session {
 public:
  Session(const fs::path& dir, const Manifest& m) : dir_(dir), m_(m) { state = state_from_json(read_json(dir / "state.json")); }

  State state;

  ontology::Ontology load_ontology() const {
    auto o = ontology::import_triples(io::read_file(dir_ / "ontology" / "current.ttl"));
    o.set_mutability(ontology::Mutability::dynamic);
    // The triple format has no provenance field; it lives beside the file.
    const auto sources_path = dir_ / "ontology" / "sources.json";
    if (fs::exists(sources_path)) {
      const auto sources = read_json(sources_path);
      for (const auto& [id, docs] : sources.items()) {
        if (const auto* c = o.find(id)) {
          auto updated = *c;
          updated.sources = docs.get<std::set<DocId>>();
          o.update_concept(updated);
        }
      }
    }
    return o;
  }
  void save_ontology(const ontology::Ontology& o) const {
    json sources = json::object();
    for (const auto& [id, c] : o.concepts()) {
      if (!c.sources.empty()) sources[id] = c.sources;
    }
    write_json(dir_ / "ontology" / "sources.json", sources);
    io::write_file_atomic(dir_ / "ontology" / "current.ttl", ontology::export_triples(o));
  }

  CandidateSet load_candidates() const {
    CandidateSet out;
    for (const auto& c : read_json(dir_ / "candidates.json")) {
      auto cand = candidate_from_json(c);
      out.emplace(cand.key(), std::move(cand));
    }
    return out;
  }
  void save_candidates(const CandidateSet& cs) const {
    json arr = json::array();
    for (const auto& [_, c] : cs) arr.push_back(candidate_json(c));
    write_json(dir_ / "candidates.json", arr);
  }

  std::vector<QueueItem> load_queue() const {
    std::vector<QueueItem> out;
    for (const auto& j : read_json(dir_ / "queue" / "items.json")) out.push_back(item_from_json(j));
    return out;
  }
  void save_queue(const std::vector<QueueItem>& q) const {
    json arr = json::array();
    for (const auto& item : q) arr.push_back(item_json(item));
    write_json(dir_ / "queue" / "items.json", arr);
  }

  void save_state() const { write_json(dir_ / "state.json", state_json(state)); }

  QueueItem& enqueue(std::vector<QueueItem>& q, ItemKind kind, json payload) {
    QueueItem item;
    item.item_id = "q" + std::to_string(state.next_item++);
    item.kind = kind;
    item.payload = std::move(payload);
    item.created_at = io::utc_now();
    q.push_back(std::move(item));
    return q.back();
  }

  std::optional<linguistic::AnalyzedDocument> cached_analysis(DocId id) const {
    const auto p = dir_ / "analysis" / (std::to_string(id) + ".json");
    if (!fs::exists(p)) return std::nullopt;
    return read_json(p).get<linguistic::AnalyzedDocument>();
  }

  linguistic::AnalyzedDocument analyze(const corpus::DocumentRecord& rec, const linguistic::Lexicon& lex) {
    linguistic::AnalysisOptions opts;
    opts.use_bigrams = m_.bindings.cascade;
    if (const auto it = state.overrides.find(rec.doc_id); it != state.overrides.end()) opts.overrides = it->second;
    auto doc = linguistic::analyze(rec.doc_id, rec.body, lex, opts);
    write_json(dir_ / "analysis" / (std::to_string(rec.doc_id) + ".json"), json(doc));
    state.requeue.erase(rec.doc_id);
    return doc;
  }

  void store_in_library(const ontology::Ontology& o) const { ontology::OntologyLibrary(m_.architecture.library).store(o); }

 private:
  const fs::path& dir_;
  const Manifest& m_;
};

std::size_t count_pending(const std::vector<QueueItem>& q) {
  return static_cast<std::size_t>(std::count_if(q.begin(), q.end(), [](const QueueItem& i) {
    return !i.resolved && i.kind != ItemKind::stop;
  }));
}

void write_report(const fs::path& dir, const IterationReport& r) {
  char name[32];
  std::snprintf(name, sizeof name, "%04d.json", r.iteration);
  write_json(dir / "reports" / name, report_json(r));
}

}  // namespace

std::string_view item_kind_name(ItemKind k) {
  switch (k) {
    case ItemKind::candidate_review: return "CandidateReview";
    case ItemKind::homonymy: return "HomonymyQuery";
    case ItemKind::ambiguity: return "AmbiguityQuery";
    case ItemKind::stop: return "StopDecision";
  }
  return "CandidateReview";
}

json item_json(const QueueItem& item) {
  return {{"item_id", item.item_id},         {"kind", item_kind_name(item.kind)}, {"payload", item.payload},
          {"created_at", item.created_at},   {"resolved", item.resolved},         {"resolution", item.resolution},
          {"resolved_at", item.resolved_at}, {"actor", item.actor}};
}

Resolution parse_resolution(const json& j) {
  Resolution r;
  json verdict = j;
  if (j.is_object()) {
    if (!j.contains("verdict")) throw Error(Errc::invalid_resolution, "resolution needs a verdict");
    verdict = j["verdict"];
    for (const auto* key : {"lemma", "pos", "actor"}) {
      if (j.contains(key) && !j[key].is_string()) throw Error(Errc::invalid_resolution, std::string(key) + " must be a string");
    }
    if (j.contains("lemma")) r.lemma = j["lemma"].get<std::string>();
    if (j.contains("pos")) r.pos = j["pos"].get<std::string>();
    if (j.contains("actor")) r.actor = j["actor"].get<std::string>();
  }
  if (!verdict.is_string()) throw Error(Errc::invalid_resolution, "verdict must be \"approve\" or \"reject\"");
  const auto v = verdict.get<std::string>();
  if (v != "approve" && v != "reject") throw Error(Errc::invalid_resolution, "unknown verdict '" + v + "'");
  r.approve = v == "approve";
  return r;
}

ProjectLock::ProjectLock(const fs::path& project_dir) : path_(project_dir / kLockFile) {
  if (!try_lock(path_)) throw Error(Errc::iteration_in_progress, "project is locked by a running iteration");
}

ProjectLock::~ProjectLock() {
  std::error_code ec;
  fs::remove(path_, ec);
}

Project::Project(fs::path dir, Manifest manifest) : dir_(std::move(dir)), manifest_(std::move(manifest)) {}

Project Project::create(const Manifest& manifest) {
  const auto dir = manifest.architecture.storage_root / manifest.project_id;
  if (fs::exists(dir / "project.json")) {
    throw Error(Errc::invalid_manifest, "project_id: project '" + manifest.project_id + "' already exists");
  }
  try {
    for (const auto* sub : {"docs", "ontology", "queue", "reports", "analysis", "runs"}) fs::create_directories(dir / sub);
    fs::create_directories(manifest.architecture.library);
    ontology::Ontology o(manifest.project_id, ontology::OntologyKind::mixed, manifest.name);
    o.set_mutability(ontology::Mutability::dynamic);
    io::write_file_atomic(dir / "ontology" / "current.ttl", ontology::export_triples(o));
    write_json(dir / "state.json", state_json(State{}));
    write_json(dir / "candidates.json", json::array());
    write_json(dir / "queue" / "items.json", json::array());
    ontology::OntologyLibrary(manifest.architecture.library).store(o);
    write_json(dir / "project.json", manifest_json(manifest));
  } catch (const fs::filesystem_error& e) {
    throw Error(Errc::storage_unwritable, e.what());
  } catch (const Error& e) {
    if (e.code() == Errc::io_error) throw Error(Errc::storage_unwritable, e.what());
    throw;
  }
  return Project(dir, manifest);
}

Project Project::open(const fs::path& dir) {
  const auto path = dir / "project.json";
  if (!fs::is_regular_file(path)) throw Error(Errc::not_found, "no project at " + dir.string());
  return Project(dir, parse_manifest(read_json(path), dir));
}

corpus::IngestResult Project::ingest(const std::string& locator) {
  ProjectLock lock(dir_);
  return corpus::DocumentStore(dir_ / "docs").ingest(locator);
}

corpus::DocumentStore::DirectoryResult Project::ingest_directory(const fs::path& dir) {
  ProjectLock lock(dir_);
  return corpus::DocumentStore(dir_ / "docs").ingest_directory(dir);
}

IterationReport Project::run_iteration() {
  ProjectLock lock(dir_);
  Session s(dir_, manifest_);
  auto queue = s.load_queue();
  auto onto = s.load_ontology();

  IterationReport r;
  r.user_stop_requested = s.state.stop_requested;
  if (s.state.iterations_run >= manifest_.architecture.max_iterations) {
    r.iteration = s.state.iterations_run;
    r.concepts_total = onto.concepts().size();
    r.relations_total = onto.relations().size();
    r.pending_decisions = count_pending(queue);
    r.stop = true;
    r.reason = StopReason::max_iterations;
    r.finished_at = io::utc_now();
    return r;
  }
  r.iteration = s.state.iterations_run + 1;

  std::optional<corpus::DocumentStore> store_slot;
  std::optional<linguistic::Lexicon> lexicon;
  auto lex = [&]() -> const linguistic::Lexicon& {
    if (!lexicon) lexicon = linguistic::Lexicon::load(manifest_.domain.lexicon);
    return *lexicon;
  };
  const std::set<std::string> seeds(manifest_.domain.seed_lemmas.begin(), manifest_.domain.seed_lemmas.end());
  std::map<DocId, linguistic::AnalyzedDocument> analyses;
  std::set<DocId> processed;
  auto analysis_of = [&](const corpus::DocumentRecord& rec) -> const linguistic::AnalyzedDocument& {
    if (const auto it = analyses.find(rec.doc_id); it != analyses.end()) return it->second;
    std::optional<linguistic::AnalyzedDocument> doc;
    if (!s.state.requeue.contains(rec.doc_id)) doc = s.cached_analysis(rec.doc_id);
    if (!doc) {
      doc = s.analyze(rec, lex());
      processed.insert(rec.doc_id);
    }
    return analyses.emplace(rec.doc_id, std::move(*doc)).first->second;
  };
  auto members = [&]() {
    std::vector<corpus::DocumentRecord> scored;
    for (auto& rec : store_slot->documents()) {
      if (rec.relevance) scored.push_back(std::move(rec));
    }
    const auto corpus = corpus::select_corpus(scored, manifest_.domain.relevance_threshold, manifest_.project_id);
    std::vector<linguistic::AnalyzedDocument> out;
    for (const auto id : corpus.members) out.push_back(analysis_of(*store_slot->find(id)));
    return out;
  };

  auto candidates = s.load_candidates();
  std::vector<extraction::RelationEvidence> evidence;
  bool have_evidence = false;

  std::string current = std::string(stage_name(Stage::search));
  try {
    auto& store = store_slot.emplace(dir_ / "docs");
    for (const auto stage : manifest_.stages) {
      current = stage_name(stage);
      switch (stage) {
        case Stage::search: {
          for (const auto& src : manifest_.domain.sources) {
            if (!src.starts_with("http://") && !src.starts_with("https://") && !src.starts_with("file://") &&
                fs::is_directory(src)) {
              store.ingest_directory(src);
            } else {
              store.ingest(src);
            }
          }
          for (const auto& rec : store.documents()) {
            const bool stale = s.state.requeue.contains(rec.doc_id);
            const auto& doc = analysis_of(rec);
            if (!rec.relevance || stale) store.set_relevance(rec.doc_id, corpus::score_relevance(doc, seeds));
          }
          break;
        }
        case Stage::linguistic: {
          for (const auto& doc : members()) {
            for (const auto& q : doc.queries) {
              const auto key = std::to_string(q.doc_id) + ":" + std::to_string(q.offset);
              if (!s.state.homonymy_seen.insert(key).second) continue;
              s.enqueue(queue, ItemKind::homonymy, json(q));
            }
          }
          break;
        }
        case Stage::extraction: {
          const auto docs = members();
          auto harvested = extraction::harvest(docs);
          std::erase_if(harvested, [&](const auto& kv) {
            const auto it = candidates.find(kv.first);
            return it != candidates.end() && it->second.status == CandidateStatus::rejected;
          });
          extraction::apply_scores(harvested, corpus::build_index(docs), manifest_.bindings.scorer);
          for (auto& [key, c] : harvested) {
            const auto it = candidates.find(key);
            if (it == candidates.end()) {
              c.status = CandidateStatus::pending;
              candidates.emplace(key, c);
              s.enqueue(queue, ItemKind::candidate_review, {{"key", key}, {"normal_form", c.normal_form}});
              ++r.new_candidates;
            } else {
              c.status = it->second.status;
              it->second = c;
            }
          }
          const auto patterns = extraction::PatternSet::load(manifest_.domain.patterns);
          evidence = extraction::mine_isa(docs, harvested, patterns);
          auto assoc = extraction::mine_assoc(docs, harvested, manifest_.bindings.tau);
          evidence.insert(evidence.end(), assoc.begin(), assoc.end());
          have_evidence = true;
          json arr = json::array();
          for (const auto& e : evidence) arr.push_back(evidence_json(e));
          write_json(dir_ / "evidence.json", arr);
          for (const auto& [key, _] : harvested) {
            const auto q = extraction::flag_lexical_ambiguity(key, evidence);
            if (!q || !s.state.ambiguity_seen.insert(key).second) continue;
            s.enqueue(queue, ItemKind::ambiguity, {{"key", key}, {"normal_form", q->normal_form}, {"components", q->components}});
          }
          break;
        }
        case Stage::representation: {
          if (!have_evidence && fs::exists(dir_ / "evidence.json")) {
            for (const auto& e : read_json(dir_ / "evidence.json")) evidence.push_back(evidence_from_json(e));
          }
          for (const auto& e : evidence) {
            const auto subj = s.state.concept_ids.find(extraction::key_of(e.subject));
            const auto obj = s.state.concept_ids.find(extraction::key_of(e.object));
            if (subj == s.state.concept_ids.end() || obj == s.state.concept_ids.end()) continue;
            const auto pred = e.predicate == extraction::RelationKind::isa ? ontology::Predicate::is_a
                                                                           : ontology::Predicate::assoc;
            if (onto.has_relation(subj->second, pred, obj->second)) continue;
            try {
              onto.add_relation({subj->second, pred, obj->second, e.weight, e.source});
              s.state.ontology_dirty = true;
            } catch (const Error&) {
              // cycle-closing or dangling evidence is skipped
            }
          }
          if (s.state.ontology_dirty) {
            s.save_ontology(onto);
            s.store_in_library(onto);
            s.state.ontology_dirty = false;
          }
          break;
        }
      }
    }
  } catch (const std::exception& e) {
    r.failed_stage = current;
    r.docs_processed = processed.size();
    r.concepts_total = onto.concepts().size();
    r.relations_total = onto.relations().size();
    r.pending_decisions = count_pending(queue);
    r.finished_at = io::utc_now();
    write_report(dir_, r);
    throw Error(Errc::stage_failure, "stage '" + current + "' failed: " + e.what());
  }

  r.docs_processed = processed.size();
  r.approved = s.state.approved_since_report;
  r.concepts_total = onto.concepts().size();
  r.relations_total = onto.relations().size();
  r.pending_decisions = count_pending(queue);
  r.finished_at = io::utc_now();
  s.state.approved_since_report = 0;
  s.state.iterations_run = r.iteration;

  s.save_candidates(candidates);
  s.save_queue(queue);
  s.save_state();
  write_report(dir_, r);

  r.reason = should_stop(r, manifest_);
  r.stop = r.reason != StopReason::continue_;
  write_report(dir_, r);
  if (!r.stop) {
    const bool stop_pending = std::any_of(queue.begin(), queue.end(), [](const QueueItem& i) {
      return !i.resolved && i.kind == ItemKind::stop;
    });
    if (!stop_pending) {
      s.enqueue(queue, ItemKind::stop, json::object());
      s.save_queue(queue);
      s.save_state();
    }
  }
  return r;
}

QueueItem Project::apply_decision(const std::string& item_id, const Resolution& resolution) {
  std::unique_ptr<ProjectLock> lock;
  for (int attempt = 0; !lock; ++attempt) {
    try {
      lock = std::make_unique<ProjectLock>(dir_);
    } catch (const Error& e) {
      if (e.code() != Errc::iteration_in_progress || attempt >= 600) throw;
      std::this_thread::sleep_for(std::chrono::milliseconds(50));
    }
  }
  Session s(dir_, manifest_);
  auto queue = s.load_queue();
  const auto it = std::find_if(queue.begin(), queue.end(), [&](const QueueItem& i) { return i.item_id == item_id; });
  if (it == queue.end()) throw Error(Errc::unknown_item, "no queue item '" + item_id + "'");
  if (it->resolved) throw Error(Errc::already_resolved, "item '" + item_id + "' was resolved at " + it->resolved_at);
  QueueItem& item = *it;

  auto candidates = s.load_candidates();
  auto onto = s.load_ontology();
  bool onto_changed = false;
  bool candidates_changed = false;
  json record = {{"verdict", resolution.approve ? "approve" : "reject"}};

  switch (item.kind) {
    case ItemKind::candidate_review: {
      const auto key = item.payload.at("key").get<std::string>();
      const auto c = candidates.find(key);
      if (c == candidates.end()) throw Error(Errc::unknown_item, "candidate '" + key + "' is gone");
      if (resolution.approve) {
        ontology::Concept node;
        node.concept_id = unique_id(onto, slug_of(key));
        node.preferred_label = key;
        for (const auto& v : c->second.surface_variants) {
          if (v != key) node.synonyms.insert(v);
        }
        node.sources = c->second.provenance;
        s.state.concept_ids[key] = node.concept_id;
        record["concept_id"] = node.concept_id;
        onto.add_concept(std::move(node));
        c->second.status = CandidateStatus::approved;
        ++s.state.approved_since_report;
        onto_changed = true;
      } else {
        c->second.status = CandidateStatus::rejected;
      }
      candidates_changed = true;
      break;
    }
    case ItemKind::homonymy: {
      if (!resolution.approve) break;
      const auto options = item.payload.at("candidates").get<std::vector<linguistic::Reading>>();
      std::optional<linguistic::Reading> chosen;
      for (const auto& opt : options) {
        if (resolution.lemma && opt.lemma != *resolution.lemma) continue;
        if (resolution.pos && linguistic::pos_name(opt.pos) != *resolution.pos) continue;
        chosen = opt;
        break;
      }
      if (!chosen) throw Error(Errc::invalid_resolution, "reading is not among the query candidates");
      const auto doc = item.payload.at("doc_id").get<DocId>();
      s.state.overrides[doc][item.payload.at("offset").get<std::size_t>()] = *chosen;
      s.state.requeue.insert(doc);
      record["reading"] = *chosen;
      break;
    }
    case ItemKind::ambiguity: {
      if (!resolution.approve) break;
      const auto key = item.payload.at("key").get<std::string>();
      const auto components = item.payload.at("components").get<std::vector<std::vector<std::string>>>();
      const auto base = slug_of(key);
      json senses = json::array();
      for (std::size_t i = 0; i < components.size(); ++i) {
        ontology::Concept sense;
        sense.concept_id = unique_id(onto, base + "_" + std::to_string(i + 1));
        sense.preferred_label = key + " (" + components[i].front() + ")";
        if (const auto c = candidates.find(key); c != candidates.end()) sense.sources = c->second.provenance;
        senses.push_back(sense.concept_id);
        onto.add_concept(std::move(sense));
      }
      record["senses"] = senses;
      ++s.state.approved_since_report;
      onto_changed = true;
      break;
    }
    case ItemKind::stop:
      if (resolution.approve) s.state.stop_requested = true;
      break;
  }

  item.resolved = true;
  item.resolution = record;
  item.resolved_at = io::utc_now();
  item.actor = resolution.actor;
  if (onto_changed) {
    s.save_ontology(onto);
    s.state.ontology_dirty = true;
  }
  if (candidates_changed) s.save_candidates(candidates);
  s.save_state();
  s.save_queue(queue);
  return item;
}

std::vector<QueueItem> Project::queue(bool include_resolved) const {
  auto q = Session(dir_, manifest_).load_queue();
  if (!include_resolved) std::erase_if(q, [](const QueueItem& i) { return i.resolved; });
  return q;
}

CandidateSet Project::candidates() const { return Session(dir_, manifest_).load_candidates(); }

ontology::Ontology Project::ontology() const { return Session(dir_, manifest_).load_ontology(); }

std::vector<IterationReport> Project::reports() const {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir_ / "reports")) {
    if (e.path().extension() == ".json") files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  std::vector<IterationReport> out;
  for (const auto& f : files) out.push_back(report_from_json(read_json(f)));
  return out;
}

int Project::iterations_run() const { return Session(dir_, manifest_).state.iterations_run; }

bool Project::stop_requested() const { return Session(dir_, manifest_).state.stop_requested; }

std::optional<linguistic::AnalyzedDocument> Project::analysis(DocId doc) const {
  return Session(dir_, manifest_).cached_analysis(doc);
}

json Project::run_task(const TaskRunPaths& paths) {
  const auto triad = taskflow::load_triad(paths.objects, paths.processes, paths.tasks, paths.links);
  const auto result = taskflow::execute(triad, taskflow::HandlerRegistry(true));
  ProjectLock lock(dir_);
  Session s(dir_, manifest_);
  const auto run_id = "r" + std::to_string(s.state.next_run++);
  json artifacts = json::array();
  for (const auto& a : result.artifacts) {
    artifacts.push_back({{"node", a.node}, {"name", a.name}, {"body", a.body}, {"created_at", a.created_at}});
  }
  json doc = {{"run_id", run_id},
              {"triad",
               {{"objects", paths.objects.string()},
                {"processes", paths.processes.string()},
                {"tasks", paths.tasks.string()},
                {"links", paths.links.string()}}},
              {"trace", taskflow::trace_to_json(result.trace)},
              {"rendered", taskflow::render_trace(result.trace)},
              {"artifacts", artifacts}};
  write_json(dir_ / "runs" / (run_id + ".json"), doc);
  s.save_state();
  return doc;
}

json Project::task_run(const std::string& run_id) const {
  const auto p = dir_ / "runs" / (run_id + ".json");
  if (run_id.find('/') != std::string::npos || !fs::is_regular_file(p)) {
    throw Error(Errc::not_found, "no task run '" + run_id + "'");
  }
  return read_json(p);
}

json graph_json(const ontology::Ontology& o) {
  json nodes = json::array();
  for (const auto& [id, c] : o.concepts()) nodes.push_back({{"id", id}, {"label", c.preferred_label}});
  json edges = json::array();
  for (const auto& r : o.relations()) {
    edges.push_back({{"s", r.subject}, {"p", ontology::predicate_name(r.predicate)}, {"o", r.object}});
  }
  return {{"nodes", nodes}, {"edges", edges}};
}

}  // namespace ontoforge::control
