#include <gtest/gtest.h>

#include "ontoforge/control.hpp"
#include "ontoforge/library.hpp"
#include "oracle/extraction_oracle.hpp"
#include "support/expect.hpp"
#include "support/toy.hpp"

using namespace ontoforge;
using namespace ontoforge::control;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::size_t count_kind(const std::vector<QueueItem>& q, ItemKind k) {
  return static_cast<std::size_t>(std::count_if(q.begin(), q.end(), [&](const QueueItem& i) { return i.kind == k; }));
}

std::optional<QueueItem> find_review(const std::vector<QueueItem>& q, const std::string& key) {
  for (const auto& i : q) {
    if (i.kind == ItemKind::candidate_review && i.payload.at("key") == key) return i;
  }
  return std::nullopt;
}

}  // namespace

TEST(Manifest, ParsesToyProject) {
  const auto m = load_manifest(support::data_dir() / "toy_project.json");
  EXPECT_EQ(m.project_id, "toy");
  EXPECT_EQ(m.stages.size(), 4u);
  EXPECT_EQ(m.bindings.tau, 0.5);
  EXPECT_EQ(m.bindings.scorer, extraction::Scorer::both);
  EXPECT_TRUE(m.bindings.cascade);
  EXPECT_EQ(m.domain.lexicon, (support::data_dir() / "lexicon.tsv").lexically_normal());
  EXPECT_EQ(m.architecture.max_iterations, 5);
  const auto again = parse_manifest(manifest_json(m));
  EXPECT_EQ(manifest_json(again), manifest_json(m));
}

TEST(Manifest, FieldNamedErrors) {
  support::TempDir dir;
  auto expect_field = [&](json j, const std::string& field) {
    try {
      parse_manifest(j, support::data_dir());
      ADD_FAILURE() << "accepted manifest, expected error on " << field;
    } catch (const Error& e) {
      EXPECT_EQ(e.code(), Errc::invalid_manifest);
      EXPECT_EQ(std::string(e.what()).rfind(field + ":", 0), 0u) << e.what();
    }
  };
  const auto base = support::toy_manifest_json(dir.path());
  auto j = base;
  j["architecture"]["max_iterations"] = 0;
  expect_field(j, "architecture.max_iterations");
  j = base;
  j["domain"]["lexicon"] = "missing.tsv";
  expect_field(j, "domain.lexicon");
  j = base;
  j["stages"] = json::array();
  expect_field(j, "stages");
  j = base;
  j["bindings"].erase("linguistic");
  expect_field(j, "bindings.linguistic");
  j = base;
  j["bindings"]["extraction"]["scorer"] = "bm25";
  expect_field(j, "bindings.extraction.scorer");
  j = base;
  j["project_id"] = "Bad Id";
  expect_field(j, "project_id");
  j = base;
  j["domain"]["seed_lemmas"] = json::array();
  expect_field(j, "domain.seed_lemmas");
}

TEST(ShouldStop, ThreeClauseRule) {
  Manifest m;
  m.architecture.max_iterations = 3;
  IterationReport r;
  r.iteration = 1;
  EXPECT_EQ(should_stop(r, m), StopReason::converged);
  r.new_candidates = 5;
  EXPECT_EQ(should_stop(r, m), StopReason::continue_);
  r.user_stop_requested = true;
  EXPECT_EQ(should_stop(r, m), StopReason::user_stop);
  r.iteration = 3;
  EXPECT_EQ(should_stop(r, m), StopReason::max_iterations);
}

TEST(Report, JsonRoundTrip) {
  IterationReport r;
  r.iteration = 2;
  r.new_candidates = 4;
  r.reason = StopReason::user_stop;
  r.stop = true;
  r.failed_stage = "extraction";
  EXPECT_EQ(report_json(report_from_json(report_json(r))), report_json(r));
  EXPECT_EQ(report_json(r)["reason"], "user_stop");
}

TEST(Resolution, Parse) {
  EXPECT_TRUE(parse_resolution("approve").approve);
  EXPECT_FALSE(parse_resolution(json{{"verdict", "reject"}}).approve);
  const auto r = parse_resolution(json{{"verdict", "approve"}, {"lemma", "сталь"}, {"pos", "NOUN"}, {"actor", "ann"}});
  EXPECT_EQ(r.lemma, "сталь");
  EXPECT_EQ(r.actor, "ann");
  EXPECT_ERRC(parse_resolution("maybe"), Errc::invalid_resolution);
  EXPECT_ERRC(parse_resolution(json{{"lemma", "x"}}), Errc::invalid_resolution);
  EXPECT_ERRC(parse_resolution(json(3)), Errc::invalid_resolution);
}

TEST(Project, CreateLayout) {
  support::TempDir dir;
  const auto p = Project::create(support::toy_manifest(dir.path()));
  for (const auto* sub : {"docs", "ontology", "queue", "reports"}) EXPECT_TRUE(fs::is_directory(p.dir() / sub)) << sub;
  EXPECT_TRUE(fs::exists(p.dir() / "project.json"));
  EXPECT_TRUE(p.ontology().concepts().empty());
  EXPECT_EQ(p.ontology().mutability(), ontology::Mutability::dynamic);
  ontology::OntologyLibrary lib(p.manifest().architecture.library);
  EXPECT_EQ(lib.versions("toy"), (std::vector<int>{1}));
  EXPECT_ERRC(Project::create(support::toy_manifest(dir.path())), Errc::invalid_manifest);
  EXPECT_ERRC(Project::open(dir / "nothing"), Errc::not_found);
  EXPECT_EQ(Project::open(p.dir()).id(), "toy");
}

TEST(Project, StorageUnwritable) {
  support::TempDir dir;
  io::write_file_atomic(dir / "blocker", "file");
  EXPECT_ERRC(Project::create(support::toy_manifest(dir / "blocker")), Errc::storage_unwritable);
}

TEST(Project, FirstIterationQueuesEveryCandidate) {
  support::TempDir dir;
  auto p = Project::create(support::toy_manifest(dir.path()));
  const auto r = p.run_iteration();
  EXPECT_EQ(r.iteration, 1);
  EXPECT_EQ(r.docs_processed, 5u);
  EXPECT_FALSE(r.stop);
  EXPECT_EQ(r.reason, StopReason::continue_);

  const auto counts = oracle::count_candidates(support::to_oracle(support::toy_documents()));
  const auto q = p.queue();
  EXPECT_EQ(count_kind(q, ItemKind::candidate_review), counts.freq.size());
  EXPECT_EQ(r.new_candidates, counts.freq.size());
  EXPECT_EQ(count_kind(q, ItemKind::homonymy), 1u);
  EXPECT_EQ(count_kind(q, ItemKind::ambiguity), 1u);
  EXPECT_EQ(count_kind(q, ItemKind::stop), 1u);
  EXPECT_EQ(r.pending_decisions, q.size() - 1);
  EXPECT_EQ(p.candidates().size(), counts.freq.size());
  ASSERT_EQ(p.reports().size(), 1u);
  EXPECT_EQ(report_json(p.reports()[0]), report_json(r));
}

TEST(Project, ApproveCreatesConcept) {
  support::TempDir dir;
  auto p = Project::create(support::toy_manifest(dir.path()));
  p.run_iteration();
  const auto item = find_review(p.queue(), "лингвистический процессор");
  ASSERT_TRUE(item);
  const auto done = p.apply_decision(item->item_id, {});
  EXPECT_TRUE(done.resolved);
  EXPECT_EQ(done.actor, "engineer");
  EXPECT_FALSE(done.resolved_at.empty());
  const auto o = p.ontology();
  ASSERT_EQ(o.concepts().size(), 1u);
  const auto& c = o.concepts().begin()->second;
  EXPECT_EQ(c.preferred_label, "лингвистический процессор");
  EXPECT_EQ(c.concept_id, "лингвистический_процессор");
  EXPECT_EQ(c.sources, (std::set<DocId>{1}));
  EXPECT_TRUE(c.synonyms.contains("Лингвистический процессор"));
  EXPECT_EQ(p.candidates().at("лингвистический процессор").status, extraction::CandidateStatus::approved);
  EXPECT_ERRC(p.apply_decision(item->item_id, {}), Errc::already_resolved);
  EXPECT_ERRC(p.apply_decision("q9999", {}), Errc::unknown_item);
}

TEST(Project, RejectFreezesCandidate) {
  support::TempDir dir;
  auto p = Project::create(support::toy_manifest(dir.path()));
  p.run_iteration();
  const auto item = find_review(p.queue(), "словарь");
  ASSERT_TRUE(item);
  Resolution no;
  no.approve = false;
  p.apply_decision(item->item_id, no);
  EXPECT_EQ(p.candidates().at("словарь").status, extraction::CandidateStatus::rejected);
  const auto r = p.run_iteration();
  EXPECT_EQ(r.new_candidates, 0u);
  EXPECT_FALSE(find_review(p.queue(), "словарь"));
  EXPECT_EQ(p.candidates().at("словарь").status, extraction::CandidateStatus::rejected);
}

TEST(Project, ApproveAllOnceConverges) {
  support::TempDir dir;
  auto p = Project::create(support::toy_manifest(dir.path()));
  std::vector<IterationReport> reports;
  reports.push_back(p.run_iteration());
  support::approve_all(p);
  while (!reports.back().stop && reports.size() < 5) reports.push_back(p.run_iteration());
  EXPECT_EQ(reports.back().reason, StopReason::converged);
  EXPECT_LE(reports.size(), 3u);
  for (std::size_t i = 1; i < reports.size(); ++i) EXPECT_GE(reports[i].concepts_total, reports[i - 1].concepts_total);
  EXPECT_GT(reports.back().relations_total, 0u);
  // isA evidence between approved terms lands in the ontology
  const auto o = p.ontology();
  EXPECT_TRUE(o.has_relation("лингвистический_процессор", ontology::Predicate::is_a, "программный_устройство"));
  EXPECT_TRUE(validate(o).empty());
  ontology::OntologyLibrary lib(p.manifest().architecture.library);
  EXPECT_GE(lib.versions("toy").size(), 2u);
}

TEST(Project, MaxIterationsStops) {
  support::TempDir dir;
  auto p = Project::create(support::toy_manifest(dir.path(), 1));
  const auto first = p.run_iteration();
  EXPECT_TRUE(first.stop);
  EXPECT_EQ(first.reason, StopReason::max_iterations);
  const auto second = p.run_iteration();
  EXPECT_EQ(second.reason, StopReason::max_iterations);
  EXPECT_EQ(second.iteration, 1);
  EXPECT_EQ(p.iterations_run(), 1);
  EXPECT_EQ(p.reports().size(), 1u);
}

TEST(Project, UnchangedCorpusConverges) {
  support::TempDir dir;
  auto m = support::toy_manifest(dir.path());
  m.domain.sources.clear();
  auto p = Project::create(m);
  const auto r = p.run_iteration();
  EXPECT_EQ(r.new_candidates, 0u);
  EXPECT_EQ(r.reason, StopReason::converged);
}

TEST(Project, StopDecisionGivesUserStop) {
  support::TempDir dir;
  auto p = Project::create(support::toy_manifest(dir.path()));
  p.run_iteration();
  std::string stop_id;
  for (const auto& i : p.queue()) {
    if (i.kind == ItemKind::stop) stop_id = i.item_id;
  }
  ASSERT_FALSE(stop_id.empty());
  p.apply_decision(stop_id, {});
  EXPECT_TRUE(p.stop_requested());
  const auto item = find_review(p.queue(), "словарь");
  ASSERT_TRUE(item);
  p.apply_decision(item->item_id, {});
  const auto r = p.run_iteration();
  EXPECT_TRUE(r.user_stop_requested);
  EXPECT_EQ(r.reason, StopReason::user_stop);
}

TEST(Project, HomonymyResolutionReannotates) {
  support::TempDir dir;
  auto p = Project::create(support::toy_manifest(dir.path()));
  p.run_iteration();
  const QueueItem* hq = nullptr;
  const auto q = p.queue();
  for (const auto& i : q) {
    if (i.kind == ItemKind::homonymy) hq = &i;
  }
  ASSERT_NE(hq, nullptr);
  EXPECT_EQ(hq->payload["surface"], "стали");
  const DocId doc = hq->payload["doc_id"].get<DocId>();
  Resolution bad;
  bad.lemma = "сталактит";
  EXPECT_ERRC(p.apply_decision(hq->item_id, bad), Errc::invalid_resolution);
  Resolution res;
  res.lemma = "сталь";
  res.pos = "NOUN";
  p.apply_decision(hq->item_id, res);
  const auto r = p.run_iteration();
  EXPECT_EQ(r.docs_processed, 1u);
  const auto a = p.analysis(doc);
  ASSERT_TRUE(a);
  EXPECT_TRUE(a->queries.empty());
  bool found = false;
  for (const auto& s : a->sentences) {
    for (const auto& t : s.tokens) {
      if (t.surface == "стали") {
        found = true;
        EXPECT_EQ(t.status, linguistic::TokenStatus::resolved);
        EXPECT_EQ(t.resolved->lemma, "сталь");
      }
    }
  }
  EXPECT_TRUE(found);
  EXPECT_TRUE(p.candidates().contains("процессор сталь"));
  EXPECT_EQ(count_kind(p.queue(true), ItemKind::homonymy), 1u);
}

TEST(Project, AmbiguityResolutionSplitsSenses) {
  support::TempDir dir;
  auto p = Project::create(support::toy_manifest(dir.path()));
  p.run_iteration();
  for (const auto& i : p.queue()) {
    if (i.kind == ItemKind::ambiguity) {
      EXPECT_EQ(i.payload["key"], "ключ");
      EXPECT_EQ(i.payload["components"].size(), 2u);
      p.apply_decision(i.item_id, {});
    }
  }
  const auto o = p.ontology();
  ASSERT_TRUE(o.find("ключ_1"));
  ASSERT_TRUE(o.find("ключ_2"));
  EXPECT_NE(o.find("ключ_1")->preferred_label, o.find("ключ_2")->preferred_label);
  EXPECT_EQ(p.run_iteration().approved, 1u);
  EXPECT_EQ(count_kind(p.queue(true), ItemKind::ambiguity), 1u);
}

TEST(Project, LockBlocksIteration) {
  support::TempDir dir;
  auto p = Project::create(support::toy_manifest(dir.path()));
  {
    ProjectLock held(p.dir());
    EXPECT_ERRC(p.run_iteration(), Errc::iteration_in_progress);
    EXPECT_ERRC(ProjectLock second(p.dir()), Errc::iteration_in_progress);
  }
  EXPECT_NO_THROW(p.run_iteration());
}

TEST(Project, StaleLockIsReclaimed) {
  support::TempDir dir;
  auto p = Project::create(support::toy_manifest(dir.path()));
  io::write_file_atomic(p.dir() / ".lock", "999999999");
  EXPECT_NO_THROW(p.run_iteration());
}

TEST(Project, RestartResumes) {
  support::TempDir dir;
  {
    auto p = Project::create(support::toy_manifest(dir.path()));
    p.run_iteration();
  }
  auto reopened = Project::open(dir / "toy");
  EXPECT_EQ(reopened.iterations_run(), 1);
  support::approve_all(reopened);
  const auto r = reopened.run_iteration();
  EXPECT_EQ(r.iteration, 2);
  EXPECT_EQ(r.new_candidates, 0u);
  EXPECT_GT(r.approved, 0u);
}

TEST(Project, StageFailureRecordsStage) {
  support::TempDir dir;
  io::write_file_atomic(dir / "lexicon.tsv", io::read_file(support::data_dir() / "lexicon.tsv"));
  auto m = support::toy_manifest(dir.path());
  m.domain.lexicon = dir / "lexicon.tsv";
  auto p = Project::create(m);
  io::write_file_atomic(dir / "lexicon.tsv", "слово\tслово\tBAD\n");
  EXPECT_ERRC(p.run_iteration(), Errc::stage_failure);
  ASSERT_EQ(p.reports().size(), 1u);
  EXPECT_EQ(p.reports()[0].failed_stage, "search");
  EXPECT_EQ(p.iterations_run(), 0);
}

TEST(Project, CorruptDocumentStoreIsStageFailure) {
  support::TempDir dir;
  auto p = Project::create(support::toy_manifest(dir.path()));
  io::write_file_atomic(p.dir() / "docs" / "docs.jsonl", "{broken\n");
  EXPECT_ERRC(p.run_iteration(), Errc::stage_failure);
  ASSERT_EQ(p.reports().size(), 1u);
  EXPECT_EQ(p.reports()[0].failed_stage, "search");
}

TEST(Project, TaskRun) {
  support::TempDir dir;
  auto p = Project::create(support::toy_manifest(dir.path()));
  const auto d = support::data_dir() / "patent";
  const auto run = p.run_task({d / "objects.ttl", d / "processes.ttl", d / "tasks.ttl", d / "links.tsv"});
  EXPECT_EQ(run["run_id"], "r1");
  EXPECT_EQ(run["artifacts"].size(), 5u);
  EXPECT_EQ(run["rendered"], io::read_file(d / "golden_trace.txt"));
  EXPECT_EQ(p.task_run("r1"), run);
  EXPECT_ERRC(p.task_run("r7"), Errc::not_found);
}

TEST(Graph, Json) {
  ontology::Ontology o("g", ontology::OntologyKind::mixed);
  o.add_concept({"a", "A", {}, {}, {}});
  o.add_concept({"b", "B", {}, {}, {}});
  o.add_relation({"a", ontology::Predicate::is_a, "b"});
  const auto j = graph_json(o);
  EXPECT_EQ(j["nodes"].size(), 2u);
  EXPECT_EQ(j["edges"][0], (json{{"s", "a"}, {"p", "isA"}, {"o", "b"}}));
}
