#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numeric>
#include <iostream>
#include <sstream>

#include "ontoforge/corpus.hpp"
#include "ontoforge/extraction.hpp"
#include "ontoforge/integration.hpp"
#include "ontoforge/io.hpp"
#include "ontoforge/taskflow.hpp"
#include "oracle/extraction_oracle.hpp"
#include "support/support.hpp"
#include "support/toy.hpp"

using namespace ontoforge;
using ontology::Predicate;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

// Collects the first few failure messages of one criterion.
struct Check {
  std::vector<std::string> failures;
  void expect(bool ok, const std::string& what) {
    if (!ok && failures.size() < 5) failures.push_back(what);
  }
  bool ok() const { return failures.empty(); }
};

std::string reexport(const ontology::Ontology& o) { return ontology::export_triples(o); }

// 1
void round_trip(Check& c) {
  const auto seed_text = io::read_file(support::data_dir() / "smart_system.ttl");
  const auto seed = ontology::import_triples(seed_text);
  c.expect(seed.concepts().size() >= 20, "seed has fewer than 20 concepts");
  const auto once = reexport(seed);
  c.expect(reexport(ontology::import_triples(once)) == once, "seed export not stable");
  c.expect(once == seed_text, "seed file is not in canonical form");

  std::mt19937_64 rng(1);
  for (int i = 0; i < 100; ++i) {
    const auto o = support::random_ontology(rng, 50, "r" + std::to_string(i));
    const auto a = reexport(o);
    const auto b = reexport(ontology::import_triples(a));
    c.expect(a == b, "random ontology " + std::to_string(i) + " differs after round trip");
  }
}

// 2
void scoring_oracle(Check& c) {
  const auto docs = support::toy_documents();
  c.expect(docs.size() == 5, "toy corpus is not 5 documents");
  const auto odocs = support::to_oracle(docs);
  const auto counts = oracle::count_candidates(odocs);
  auto cands = extraction::harvest(docs);
  extraction::apply_scores(cands, corpus::build_index(docs), extraction::Scorer::both);
  c.expect(cands.size() == counts.freq.size(), "candidate count differs from oracle");
  const auto tf = oracle::tfidf(counts, docs.size());
  const auto cv = oracle::cvalue(counts);
  for (const auto& [k, cand] : cands) {
    if (!counts.freq.contains(k)) {
      c.expect(false, "unexpected candidate " + k);
      continue;
    }
    c.expect(cand.freq == counts.freq.at(k), "freq of " + k);
    c.expect(cand.doc_freq == counts.docs.at(k).size(), "doc_freq of " + k);
    c.expect(std::abs(cand.tfidf - tf.at(k)) <= 1e-9, "tfidf of " + k);
    c.expect(std::abs(cand.cvalue - cv.at(k)) <= 1e-9, "cvalue of " + k);
  }
  const double tau = 0.5;
  const auto want = oracle::pmi(odocs, tau);
  const auto got = extraction::mine_assoc(docs, cands, tau);
  c.expect(got.size() == want.size(), "pmi pair count differs from oracle");
  for (const auto& e : got) {
    const auto key = std::make_pair(extraction::key_of(e.subject), extraction::key_of(e.object));
    const auto it = want.find(key);
    c.expect(it != want.end() && std::abs(it->second - e.weight) <= 1e-9, "pmi of " + key.first + " / " + key.second);
  }
}

// 3
// Reachability closure kept by the checker itself, one bit row per node.
struct Closure {
  std::vector<std::vector<bool>> reach;  // reach[a][b]: path a -> b of length >= 1

  void grow(std::size_t n) {
    for (auto& row : reach) row.resize(n, false);
    reach.resize(n, std::vector<bool>(n, false));
  }
  void add(std::size_t s, std::size_t t) {
    for (std::size_t x = 0; x < reach.size(); ++x) {
      if (x != s && !reach[x][s]) continue;
      reach[x][t] = true;
      for (std::size_t y = 0; y < reach.size(); ++y) {
        if (reach[t][y]) reach[x][y] = true;
      }
    }
  }
};

void graph_invariants(Check& c) {
  std::mt19937_64 rng(3);
  ontology::Ontology o("g", ontology::OntologyKind::mixed);
  std::vector<std::string> ids;
  std::map<Predicate, Closure> closure;
  std::uniform_int_distribution<int> pct(0, 99);
  std::uniform_int_distribution<std::size_t> pred(0, std::size(ontology::kAllPredicates) - 1);
  std::size_t rejected = 0, cycles = 0;
  for (int i = 0; i < 10000; ++i) {
    if (ids.size() < 2 || pct(rng) < 3) {
      const auto id = "n" + std::to_string(ids.size());
      o.add_concept({id, "node " + std::to_string(ids.size()), {}, {}, {}});
      ids.push_back(id);
      for (const auto p : {Predicate::is_a, Predicate::decomposes_to}) closure[p].grow(ids.size());
    }
    std::uniform_int_distribution<std::size_t> node(0, ids.size() - 1);
    const bool ghost = pct(rng) < 2;
    const auto s = node(rng), t = node(rng);
    const ontology::Relation r{ids[s], ontology::kAllPredicates[pred(rng)], ghost ? "ghost" : ids[t]};
    const bool hier = ontology::is_hierarchical(r.predicate);
    const bool closes = hier && !ghost && (s == t || closure[r.predicate].reach[t][s]);
    const bool self = !ghost && s == t && ontology::forbids_self_loop(r.predicate);
    const std::string tag = " at attempt " + std::to_string(i);
    const auto snapshot = o;
    try {
      o.add_relation(r);
    } catch (const Error& e) {
      ++rejected;
      cycles += e.code() == Errc::cycle;
      c.expect(ghost || closes || self, "insert rejected without cause" + tag);
      c.expect(reexport(o) == reexport(snapshot), "rejected insert changed the ontology" + tag);
      continue;
    }
    c.expect(!ghost && !closes && !self, "insert accepted although it is invalid" + tag);
    if (hier && !ghost && !closes) closure[r.predicate].add(s, t);
  }
  for (const auto& v : ontology::validate(o)) c.expect(false, std::string(ontology::violation_name(v.kind)) + " " + v.detail);
  c.expect(cycles > 0, "no cycle was ever attempted");
}

// 4
std::map<std::string, int> label_multiset(const ontology::Ontology& o) {
  std::map<std::string, int> out;
  for (const auto& [_, con] : o.concepts()) ++out[integration::normalize_label(con.preferred_label)];
  return out;
}

std::map<std::tuple<std::string, std::string, std::string>, int> relation_multiset(const ontology::Ontology& o) {
  std::map<std::tuple<std::string, std::string, std::string>, int> out;
  for (const auto& r : o.relations()) {
    ++out[{integration::normalize_label(o.find(r.subject)->preferred_label), std::string(ontology::predicate_name(r.predicate)),
           integration::normalize_label(o.find(r.object)->preferred_label)}];
  }
  return out;
}

ontology::Ontology merged(const ontology::Ontology& a, const ontology::Ontology& b) {
  return integration::merge(a, b, integration::align(a, b)).ontology;
}

// Labels drawn from a shared pool; hierarchical edges follow pool order.
ontology::Ontology pool_ontology(std::mt19937_64& rng, const std::vector<std::string>& pool, const std::string& id,
                                 std::size_t id_shift) {
  ontology::Ontology o(id, ontology::OntologyKind::mixed);
  std::uniform_int_distribution<int> pct(0, 99);
  std::vector<std::size_t> members;
  for (std::size_t i = 0; i < pool.size(); ++i) {
    if (pct(rng) < 50) continue;
    members.push_back(i);
    o.add_concept({"c" + std::to_string((i + id_shift) % pool.size()), pool[i], {}, {}, {}});
  }
  if (members.size() < 2) return o;
  std::uniform_int_distribution<std::size_t> pick(0, members.size() - 1);
  std::uniform_int_distribution<std::size_t> pred(0, std::size(ontology::kAllPredicates) - 1);
  for (std::size_t e = 0; e < members.size() * 2; ++e) {
    auto x = members[pick(rng)], y = members[pick(rng)];
    const auto p = ontology::kAllPredicates[pred(rng)];
    if (x == y) continue;
    if (ontology::is_hierarchical(p) && x < y) std::swap(x, y);
    o.add_relation({"c" + std::to_string((x + id_shift) % pool.size()), p, "c" + std::to_string((y + id_shift) % pool.size())});
  }
  return o;
}

const std::vector<std::pair<std::string, std::string>>& syllable_cases() {
  static const std::vector<std::pair<std::string, std::string>> s = {
      {"ка", "КА"}, {"ли", "ЛИ"}, {"мо", "МО"}, {"ра", "РА"}, {"ту", "ТУ"}, {"зе", "ЗЕ"},
      {"ba", "BA"}, {"ko", "KO"}, {"ni", "NI"}, {"su", "SU"}, {"ве", "ВЕ"}, {"до", "ДО"}};
  return s;
}

struct Base {
  std::vector<std::vector<std::size_t>> words;  // syllable indices
  std::string plain;
};

std::string variant(std::mt19937_64& rng, const Base& b) {
  std::uniform_int_distribution<int> coin(0, 1);
  std::string out = coin(rng) ? " " : "";
  for (std::size_t w = 0; w < b.words.size(); ++w) {
    if (w) out += coin(rng) ? "   " : " ";
    for (const auto s : b.words[w]) {
      auto piece = coin(rng) ? syllable_cases()[s].second : syllable_cases()[s].first;
      if (piece == "зе" && coin(rng)) piece = "зё";
      if (piece == "ве" && coin(rng)) piece = "вё";
      out += piece;
    }
  }
  return out + (coin(rng) ? "\t" : "");
}

void integration_laws(Check& c) {
  std::mt19937_64 rng(4);
  for (int i = 0; i < 50; ++i) {
    const auto o = support::random_ontology(rng, 50, "self");
    const auto m = merged(o, o);
    c.expect(label_multiset(m) == label_multiset(o), "merge(O,O) changed the label multiset, round " + std::to_string(i));
    c.expect(ontology::validate(m).empty(), "merge(O,O) is invalid");
  }

  std::vector<std::string> pool;
  std::set<std::string> seen;
  while (pool.size() < 80) {
    auto label = support::random_word(rng, 2, 3) + " " + support::random_word(rng, 1, 2);
    if (seen.insert(integration::normalize_label(label)).second) pool.push_back(label);
  }
  for (int i = 0; i < 50; ++i) {
    const auto a = pool_ontology(rng, pool, "a", 0);
    const auto b = pool_ontology(rng, pool, "b", 7);
    const auto ab = merged(a, b);
    const auto ba = merged(b, a);
    c.expect(ontology::validate(ab).empty() && ontology::validate(ba).empty(), "merge result invalid");
    c.expect(label_multiset(ab) == label_multiset(ba), "label multisets differ, round " + std::to_string(i));
    c.expect(relation_multiset(ab) == relation_multiset(ba), "relation multisets differ, round " + std::to_string(i));
  }

  // Convergence against ground-truth base identities.
  std::uniform_int_distribution<std::size_t> syl(0, syllable_cases().size() - 1);
  std::uniform_int_distribution<int> nwords(1, 3), nsyl(2, 3);
  std::vector<Base> bases;
  std::set<std::string> plain_seen;
  while (bases.size() < 120) {
    Base b;
    for (int w = nwords(rng); w > 0; --w) {
      std::vector<std::size_t> word;
      for (int s = nsyl(rng); s > 0; --s) word.push_back(syl(rng));
      b.words.push_back(word);
    }
    for (std::size_t w = 0; w < b.words.size(); ++w) {
      if (w) b.plain += " ";
      for (const auto s : b.words[w]) b.plain += syllable_cases()[s].first;
    }
    if (plain_seen.insert(b.plain).second) bases.push_back(std::move(b));
  }
  for (int round = 0; round < 5; ++round) {
    std::vector<ontology::Ontology> onts;
    std::map<std::size_t, std::vector<std::pair<std::string, std::string>>> truth;
    std::vector<std::size_t> order(bases.size());
    std::iota(order.begin(), order.end(), 0);
    for (int k = 0; k < 5; ++k) {
      const std::string oid = "lib" + std::to_string(k);
      ontology::Ontology o(oid, ontology::OntologyKind::object);
      std::shuffle(order.begin(), order.end(), rng);
      for (std::size_t j = 0; j < 50; ++j) {
        const auto cid = "k" + std::to_string(j);
        o.add_concept({cid, variant(rng, bases[order[j]]), {}, {}, {}});
        truth[order[j]].push_back({oid, cid});
      }
      onts.push_back(std::move(o));
    }
    for (std::size_t k = 2; k <= 5; ++k) {
      std::set<std::pair<std::string, std::vector<std::pair<std::string, std::string>>>> want, got;
      for (auto [base, members] : truth) {
        if (members.size() < k) continue;
        std::sort(members.begin(), members.end());
        want.insert({bases[base].plain, members});
      }
      for (const auto& cl : integration::convergence_clusters(onts, k)) {
        c.expect(cl.support == cl.members.size(), "support does not match member count");
        got.insert({cl.label, cl.members});
      }
      std::size_t fp = 0, fn = 0;
      for (const auto& g : got) fp += !want.contains(g);
      for (const auto& w : want) fn += !got.contains(w);
      c.expect(fp == 0 && fn == 0, "convergence k=" + std::to_string(k) + " fp=" + std::to_string(fp) +
                                       " fn=" + std::to_string(fn));
    }
  }
}

// 5
std::string fixed_clock() { return "2026-01-01T00:00:00Z"; }

void triad_execution(Check& c) {
  std::mt19937_64 rng(5);
  taskflow::ExecutionContext ctx;
  ctx.clock = fixed_clock;
  for (int i = 0; i < 100; ++i) {
    const auto t = support::random_triad(rng, 50);
    const std::string tag = "triad " + std::to_string(i);
    c.expect(t.objects.concepts().size() + t.processes.concepts().size() + t.tasks.concepts().size() <= 50,
             tag + " too large");
    const auto r1 = taskflow::execute(t, taskflow::HandlerRegistry{}, ctx);
    const auto r2 = taskflow::execute(t, taskflow::HandlerRegistry{}, ctx);
    try {
      taskflow::check_well_nested(r1.trace);
    } catch (const Error& e) {
      c.expect(false, tag + " not well nested: " + e.what());
    }
    std::map<std::string, int> entered;
    for (const auto& e : r1.trace) {
      if (e.kind == taskflow::EventKind::task_enter) ++entered[e.node];
    }
    std::size_t leaves = 0;
    for (const auto& [id, _] : t.tasks.concepts()) {
      if (!t.tasks.targets(id, Predicate::decomposes_to).empty()) continue;
      ++leaves;
      c.expect(entered[id] == 1, tag + " leaf " + id + " entered " + std::to_string(entered[id]) + " times");
    }
    c.expect(r1.artifacts.size() == leaves, tag + " artifact count");
    c.expect(r1.trace.size() == support::expected_trace_length(t), tag + " trace length");
    c.expect(taskflow::trace_to_json(r1.trace).dump() == taskflow::trace_to_json(r2.trace).dump(), tag + " trace differs");
    bool same_artifacts = r1.artifacts.size() == r2.artifacts.size();
    for (std::size_t j = 0; same_artifacts && j < r1.artifacts.size(); ++j) {
      const auto &x = r1.artifacts[j], &y = r2.artifacts[j];
      same_artifacts = x.node == y.node && x.name == y.name && x.body == y.body && x.created_at == y.created_at;
    }
    c.expect(same_artifacts, tag + " artifacts differ");
  }

  const auto d = support::data_dir() / "patent";
  const auto t = taskflow::load_triad(d / "objects.ttl", d / "processes.ttl", d / "tasks.ttl", d / "links.tsv");
  const auto r = taskflow::execute(t, taskflow::HandlerRegistry{}, ctx);
  std::set<std::string> leaves, produced;
  for (const auto& [id, _] : t.tasks.concepts()) {
    if (t.tasks.targets(id, Predicate::decomposes_to).empty()) leaves.insert(id);
  }
  for (const auto& a : r.artifacts) produced.insert(a.node);
  c.expect(r.artifacts.size() == leaves.size() && produced == leaves, "patent triad artifacts do not match leaf tasks");
  c.expect(taskflow::render_trace(r.trace) == io::read_file(d / "golden_trace.txt"), "patent trace differs from golden");
}

// 6
void iteration_loop(Check& c) {
  support::TempDir dir;
  auto p = control::Project::create(support::toy_manifest(dir / "a"));
  std::vector<control::IterationReport> reports{p.run_iteration()};
  support::approve_all(p);
  while (!reports.back().stop && reports.size() < 10) reports.push_back(p.run_iteration());
  c.expect(reports.back().stop && reports.back().reason == control::StopReason::converged,
           "loop stopped with " + std::string(control::stop_reason_name(reports.back().reason)));
  c.expect(reports.size() <= 3, "took " + std::to_string(reports.size()) + " iterations");
  for (std::size_t i = 1; i < reports.size(); ++i) {
    c.expect(reports[i].concepts_total >= reports[i - 1].concepts_total, "concepts_total decreased");
  }

  auto once = control::Project::create(support::toy_manifest(dir / "b", 1));
  const auto r = once.run_iteration();
  c.expect(r.stop && r.reason == control::StopReason::max_iterations, "max_iterations=1 did not stop the loop");
}

// 7
void feedback_loops(Check& c) {
  support::TempDir dir;
  auto p = control::Project::create(support::toy_manifest(dir.path()));
  p.run_iteration();
  std::vector<control::QueueItem> homonymy, ambiguity;
  for (const auto& i : p.queue()) {
    if (i.kind == control::ItemKind::homonymy) homonymy.push_back(i);
    if (i.kind == control::ItemKind::ambiguity) ambiguity.push_back(i);
  }
  c.expect(homonymy.size() == 1, std::to_string(homonymy.size()) + " homonymy queries");
  c.expect(ambiguity.size() == 1, std::to_string(ambiguity.size()) + " ambiguity queries");
  if (homonymy.size() != 1 || ambiguity.size() != 1) return;

  const auto& hq = homonymy.front();
  const DocId doc = hq.payload.at("doc_id").get<DocId>();
  const auto surface = hq.payload.at("surface").get<std::string>();
  const auto before = p.analysis(doc);
  control::Resolution res;
  res.lemma = "сталь";
  res.pos = "NOUN";
  p.apply_decision(hq.item_id, res);
  const auto key = ambiguity.front().payload.at("key").get<std::string>();
  p.apply_decision(ambiguity.front().item_id, {});

  const auto report = p.run_iteration();
  c.expect(report.docs_processed == 1, "re-annotation processed " + std::to_string(report.docs_processed) + " documents");
  const auto after = p.analysis(doc);
  c.expect(after.has_value(), "document analysis missing");
  if (after) {
    c.expect(after->queries.empty(), "homonymy query still open after resolution");
    bool resolved = false;
    for (const auto& s : after->sentences) {
      for (const auto& t : s.tokens) {
        if (t.surface == surface) {
          resolved = t.status == linguistic::TokenStatus::resolved && t.resolved && t.resolved->lemma == "сталь";
        }
      }
    }
    c.expect(resolved, "token was not re-annotated with the chosen reading");
    c.expect(!before || json(*before).dump() != json(*after).dump(), "analysis unchanged");
  }

  const auto o = p.ontology();
  const auto slug = key;
  const auto* s1 = o.find(slug + "_1");
  const auto* s2 = o.find(slug + "_2");
  c.expect(s1 && s2, "sense concepts missing for " + key);
  c.expect(!o.find(slug + "_3"), "more than two sense concepts");
  if (s1 && s2) c.expect(s1->preferred_label != s2->preferred_label, "sense labels coincide");
}

// 8
void linguistic_determinism(Check& c) {
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(support::data_dir() / "toy_corpus")) files.push_back(e.path());
  std::sort(files.begin(), files.end());
  for (const auto& f : files) {
    const auto text = io::read_file(f);
    std::string first;
    for (int i = 0; i < 10; ++i) {
      const auto lex = linguistic::Lexicon::load(support::data_dir() / "lexicon.tsv");
      const auto dump = json(linguistic::analyze(1, text, lex)).dump();
      if (i == 0) first = dump;
      c.expect(dump == first, f.filename().string() + " run " + std::to_string(i) + " differs");
    }
  }
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<void(Check&)>>> criteria = {
      {"serialization round-trip", round_trip},
      {"scoring oracle equivalence", scoring_oracle},
      {"graph invariants", graph_invariants},
      {"integration laws", integration_laws},
      {"triad execution", triad_execution},
      {"iteration loop", iteration_loop},
      {"feedback loops", feedback_loops},
      {"linguistic determinism", linguistic_determinism},
  };
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    Check c;
    const auto start = std::chrono::steady_clock::now();
    try {
      criteria[i].second(c);
    } catch (const std::exception& e) {
      c.failures.push_back(std::string("exception: ") + e.what());
    }
    const auto ms =
        std::chrono::duration_cast<std::chrono::milliseconds>(std::chrono::steady_clock::now() - start).count();
    if (ms >= 10000) c.failures.push_back("took " + std::to_string(ms) + " ms");
    std::cout << (c.ok() ? "PASS" : "FAIL") << " " << (i + 1) << " " << criteria[i].first << " (" << ms << " ms)";
    for (const auto& f : c.failures) std::cout << "\n    " << f;
    std::cout << std::endl;
    failed += !c.ok();
  }
  return failed == 0 ? 0 : 1;
}
