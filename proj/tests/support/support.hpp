#pragma once

#include <unistd.h>

#include <algorithm>
#include <cstdint>
#include <functional>
#include <iterator>
#include <filesystem>
#include <map>
#include <random>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "ontoforge/ontology.hpp"
#include "ontoforge/taskflow.hpp"

namespace support {

namespace fs = std::filesystem;

inline fs::path data_dir() { return fs::path(ONTOFORGE_DATA_DIR); }

class TempDir {
 public:
  TempDir() {
    std::string tmpl = (fs::temp_directory_path() / "ontoforge-XXXXXX").string();
    path_ = ::mkdtemp(tmpl.data());
  }
  ~TempDir() {
    std::error_code ec;
    fs::remove_all(path_, ec);
  }
  TempDir(const TempDir&) = delete;
  TempDir& operator=(const TempDir&) = delete;

  const fs::path& path() const { return path_; }
  fs::path operator/(const std::string& name) const { return path_ / name; }

 private:
  fs::path path_;
};

inline const std::vector<std::string>& syllables() {
  static const std::vector<std::string> s = {"ка", "ли", "мо", "ра", "ту", "зе", "ba", "ko", "ni", "su", "ве", "до"};
  return s;
}

inline std::string random_word(std::mt19937_64& rng, int min_parts = 2, int max_parts = 4) {
  std::uniform_int_distribution<int> parts(min_parts, max_parts);
  std::uniform_int_distribution<std::size_t> pick(0, syllables().size() - 1);
  std::string out;
  for (int i = parts(rng); i > 0; --i) out += syllables()[pick(rng)];
  return out;
}

// Free text for labels: mixed scripts, quotes, backslashes, inner spaces.
inline std::string random_text(std::mt19937_64& rng) {
  static const std::vector<std::string> extras = {"\"", "\\", " ", "-", "Ё", "X", "(", ")", "«", "»", "\t"};
  std::uniform_int_distribution<int> coin(0, 3);
  std::uniform_int_distribution<std::size_t> pick(0, extras.size() - 1);
  std::string out = random_word(rng, 1, 3);
  for (int i = coin(rng); i > 0; --i) out += extras[pick(rng)] + random_word(rng, 1, 2);
  return out;
}

// Valid ontology with up to `max_concepts` concepts. Hierarchical edges run
// from later to earlier concepts, so they stay acyclic.
inline ontoforge::ontology::Ontology random_ontology(std::mt19937_64& rng, std::size_t max_concepts,
                                                     const std::string& id = "rand") {
  using namespace ontoforge::ontology;
  std::uniform_int_distribution<std::size_t> count(0, max_concepts);
  std::uniform_int_distribution<int> kind_pick(0, 3);
  const OntologyKind kinds[] = {OntologyKind::object, OntologyKind::process, OntologyKind::task, OntologyKind::mixed};
  Ontology o(id, kinds[kind_pick(rng)]);
  const std::size_t n = count(rng);
  std::vector<std::string> ids;
  std::uniform_int_distribution<int> coin(0, 2);
  for (std::size_t i = 0; i < n; ++i) {
    std::string cid;
    do {
      cid = random_word(rng) + (coin(rng) == 0 ? "_" + std::to_string(i) : "");
    } while (o.find(cid));
    Concept c;
    c.concept_id = cid;
    c.preferred_label = random_text(rng);
    for (int k = coin(rng); k > 0; --k) {
      auto syn = random_text(rng);
      if (syn != c.preferred_label) c.synonyms.insert(syn);
    }
    if (coin(rng) == 0) c.definition = random_text(rng);
    o.add_concept(std::move(c));
    ids.push_back(cid);
  }
  if (n < 2) return o;
  std::uniform_int_distribution<std::size_t> edges(0, 2 * n);
  std::uniform_int_distribution<std::size_t> node(0, n - 1);
  std::uniform_int_distribution<std::size_t> pred(0, std::size(kAllPredicates) - 1);
  for (std::size_t e = edges(rng); e > 0; --e) {
    auto a = node(rng), b = node(rng);
    const auto p = kAllPredicates[pred(rng)];
    if (forbids_self_loop(p) && a == b) continue;
    if (is_hierarchical(p) && a < b) std::swap(a, b);
    if (is_hierarchical(p) && a == b) continue;
    o.add_relation({ids[a], p, ids[b]});
  }
  return o;
}

// Well-formed triad with at most `max_nodes` nodes over all three parts.
inline ontoforge::taskflow::TriadModel random_triad(std::mt19937_64& rng, std::size_t max_nodes) {
  using namespace ontoforge::ontology;
  std::uniform_int_distribution<std::size_t> pct(0, 99);
  const std::size_t budget = std::max<std::size_t>(max_nodes, 6);
  const std::size_t n_objects = 1 + pct(rng) % std::max<std::size_t>(1, budget / 5);
  const std::size_t n_processes = 1 + pct(rng) % std::max<std::size_t>(1, budget * 2 / 5);
  const std::size_t n_tasks = 1 + pct(rng) % std::max<std::size_t>(1, budget - n_objects - n_processes);

  auto build_forest = [&](Ontology& o, const std::string& prefix, std::size_t n) {
    std::vector<std::size_t> depth(n, 1);
    for (std::size_t i = 0; i < n; ++i) {
      Concept c;
      c.concept_id = prefix + "_" + std::to_string(i);
      c.preferred_label = prefix + " " + std::to_string(i);
      o.add_concept(std::move(c));
    }
    for (std::size_t i = 1; i < n; ++i) {
      if (pct(rng) < 25) continue;  // new root
      std::vector<std::size_t> parents;
      for (std::size_t j = 0; j < i; ++j) {
        if (depth[j] < ontoforge::taskflow::kMaxHierarchyDepth) parents.push_back(j);
      }
      if (parents.empty()) continue;
      const auto parent = parents[pct(rng) % parents.size()];
      depth[i] = depth[parent] + 1;
      o.add_relation({prefix + "_" + std::to_string(parent), Predicate::decomposes_to, prefix + "_" + std::to_string(i)});
    }
  };

  Ontology objects("objects", OntologyKind::object);
  for (std::size_t i = 0; i < n_objects; ++i) {
    Concept c;
    c.concept_id = "obj_" + std::to_string(i);
    c.preferred_label = "object " + std::to_string(i);
    objects.add_concept(std::move(c));
  }
  Ontology processes("processes", OntologyKind::process);
  build_forest(processes, "proc", n_processes);
  Ontology tasks("tasks", OntologyKind::task);
  build_forest(tasks, "task", n_tasks);

  std::vector<Relation> links;
  for (const auto& [id, _] : processes.concepts()) {
    if (!processes.targets(id, Predicate::decomposes_to).empty()) continue;
    const std::size_t k = 1 + pct(rng) % 3;
    std::set<std::size_t> used;
    for (std::size_t j = 0; j < k; ++j) used.insert(pct(rng) % n_objects);
    for (const auto o : used) links.push_back({id, Predicate::uses_object, "obj_" + std::to_string(o)});
  }
  std::vector<std::string> proc_ids;
  for (const auto& [id, _] : processes.concepts()) proc_ids.push_back(id);
  for (const auto& [id, _] : tasks.concepts()) {
    if (!tasks.targets(id, Predicate::decomposes_to).empty()) continue;
    const std::size_t k = 1 + pct(rng) % 2;
    for (std::size_t j = 0; j < k; ++j) {
      links.push_back({id, Predicate::invokes_process, proc_ids[pct(rng) % proc_ids.size()]});
    }
  }
  return ontoforge::taskflow::make_triad(std::move(objects), std::move(processes), std::move(tasks), std::move(links));
}

// Expected trace length by counting nodes: two events per task, and per
// process run two events plus one Result plus one per object access.
inline std::size_t expected_trace_length(const ontoforge::taskflow::TriadModel& t) {
  using ontoforge::ontology::Predicate;
  std::map<std::string, std::size_t> cost;
  std::function<std::size_t(const std::string&)> process_cost = [&](const std::string& p) -> std::size_t {
    if (const auto it = cost.find(p); it != cost.end()) return it->second;
    std::size_t c = 3;
    const auto kids = t.processes.targets(p, Predicate::decomposes_to);
    if (kids.empty()) {
      for (const auto& r : t.crosslinks) c += r.predicate == Predicate::uses_object && r.subject == p;
    }
    for (const auto& k : kids) c += process_cost(k);
    return cost[p] = c;
  };
  std::size_t total = 0;
  for (const auto& [id, _] : t.tasks.concepts()) {
    total += 2;
    if (!t.tasks.targets(id, Predicate::decomposes_to).empty()) continue;
    for (const auto& r : t.crosslinks) {
      if (r.predicate == Predicate::invokes_process && r.subject == id) total += process_cost(r.object);
    }
  }
  return total;
}

}  // namespace support
