#include "ontoforge/integration.hpp"

#include <algorithm>
#include <map>
#include <set>

#include <json.hpp>

#include "ontoforge/error.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge::integration {

using ontology::Concept;
using ontology::Ontology;

namespace {

std::string normalize_once(std::string_view input) {
  std::string folded = text::fold_case(text::nfc(input));
  std::string replaced;
  replaced.reserve(folded.size());
  bool pending_space = false;
  for (const auto& cp : text::decode(folded)) {
    if (text::is_space(cp.value)) {
      pending_space = !replaced.empty();
      continue;
    }
    if (pending_space) {
      replaced += ' ';
      pending_space = false;
    }
    replaced += cp.value == U'ё' ? text::encode(U'е') : folded.substr(cp.offset, cp.length);
  }
  return text::nfc(replaced);
}

std::set<std::string> term_set(const Concept& c) {
  std::set<std::string> terms{normalize_label(c.preferred_label)};
  for (const auto& s : c.synonyms) terms.insert(normalize_label(s));
  return terms;
}

bool intersects(const std::set<std::string>& a, const std::set<std::string>& b) {
  for (const auto& x : a) {
    if (b.contains(x)) return true;
  }
  return false;
}

}  // namespace

std::string normalize_label(std::string_view input) {
  std::string current = normalize_once(input);
  for (int i = 0; i < 4; ++i) {
    auto next = normalize_once(current);
    if (next == current) break;
    current = std::move(next);
  }
  return current;
}

std::string_view basis_name(MatchBasis b) {
  return b == MatchBasis::label_equal ? "label-equal" : "synonym-overlap";
}

std::vector<AlignmentMatch> align(const Ontology& left, const Ontology& right) {
  std::map<std::string, std::string> right_label;
  std::map<std::string, std::set<std::string>> right_terms;
  std::map<std::string, std::vector<std::string>> right_by_label;
  for (const auto& [id, c] : right.concepts()) {
    right_label[id] = normalize_label(c.preferred_label);
    right_terms[id] = term_set(c);
    right_by_label[right_label[id]].push_back(id);  // ids arrive sorted
  }

  std::vector<AlignmentMatch> matches;
  std::set<std::string> left_taken;
  std::set<std::string> right_taken;
  for (const auto& [id, c] : left.concepts()) {
    const auto it = right_by_label.find(normalize_label(c.preferred_label));
    if (it == right_by_label.end()) continue;
    for (const auto& rid : it->second) {
      if (right_taken.contains(rid)) continue;
      matches.push_back({left.id(), id, right.id(), rid, 1.0, MatchBasis::label_equal});
      left_taken.insert(id);
      right_taken.insert(rid);
      break;
    }
  }
  for (const auto& [id, c] : left.concepts()) {
    if (left_taken.contains(id)) continue;
    const auto label = normalize_label(c.preferred_label);
    const auto terms = term_set(c);
    for (const auto& [rid, rterms] : right_terms) {
      if (right_taken.contains(rid) || right_label[rid] == label || !intersects(terms, rterms)) continue;
      matches.push_back({left.id(), id, right.id(), rid, 0.9, MatchBasis::synonym_overlap});
      left_taken.insert(id);
      right_taken.insert(rid);
      break;
    }
  }
  std::sort(matches.begin(), matches.end(),
            [](const AlignmentMatch& a, const AlignmentMatch& b) { return a.left_concept < b.left_concept; });
  return matches;
}

std::string MergeResult::report_jsonl() const {
  std::string out;
  for (const auto& a : actions) {
    nlohmann::json j;
    switch (a.kind) {
      case MergeAction::Kind::fuse: j["action"] = "fuse"; break;
      case MergeAction::Kind::copy: j["action"] = "copy"; break;
      case MergeAction::Kind::drop_relation: j["action"] = "drop_relation"; break;
    }
    if (!a.left_id.empty()) j["left"] = a.left_id;
    if (!a.right_id.empty()) j["right"] = a.right_id;
    if (!a.merged_id.empty()) j["id"] = a.merged_id;
    if (!a.detail.empty()) j["detail"] = a.detail;
    out += j.dump();
    out += '\n';
  }
  return out;
}

MergeResult merge(const Ontology& left, const Ontology& right, std::span<const AlignmentMatch> matches) {
  std::map<std::string, const AlignmentMatch*> by_left;
  std::map<std::string, std::string> right_to_merged;
  for (const auto& m : matches) {
    if (!left.find(m.left_concept) || !right.find(m.right_concept)) {
      throw Error(Errc::invalid_match, "match " + m.left_concept + " ~ " + m.right_concept + " has a missing endpoint");
    }
    if (!by_left.emplace(m.left_concept, &m).second || right_to_merged.contains(m.right_concept)) {
      throw Error(Errc::invalid_match, "concept matched twice: " + m.left_concept + " ~ " + m.right_concept);
    }
    right_to_merged[m.right_concept] = m.left_concept;
  }

  const auto kind = left.kind() == right.kind() ? left.kind() : ontology::OntologyKind::mixed;
  MergeResult result{Ontology(left.id(), kind, left.name()), {}};
  Ontology& out = result.ontology;

  for (const auto& [id, lc] : left.concepts()) {
    Concept c = lc;
    const auto it = by_left.find(id);
    if (it != by_left.end()) {
      const Concept& rc = *right.find(it->second->right_concept);
      c.synonyms.insert(rc.synonyms.begin(), rc.synonyms.end());
      c.synonyms.insert(rc.preferred_label);
      c.synonyms.erase(c.preferred_label);
      if (!c.definition) c.definition = rc.definition;
      c.sources.insert(rc.sources.begin(), rc.sources.end());
      result.actions.push_back({MergeAction::Kind::fuse, id, rc.concept_id, id,
                                std::string(basis_name(it->second->basis))});
    } else {
      result.actions.push_back({MergeAction::Kind::copy, id, {}, id, {}});
    }
    out.put_concept(std::move(c));
  }
  for (const auto& [id, rc] : right.concepts()) {
    if (right_to_merged.contains(id)) continue;
    std::string merged_id = id;
    for (int n = 2; out.find(merged_id); ++n) merged_id = id + "_" + std::to_string(n);
    Concept c = rc;
    c.concept_id = merged_id;
    out.put_concept(std::move(c));
    right_to_merged[id] = merged_id;
    result.actions.push_back({MergeAction::Kind::copy, {}, id, merged_id, merged_id == id ? "" : "renamed"});
  }

  auto add = [&](ontology::Relation r, const char* side) {
    if (out.has_relation(r.subject, r.predicate, r.object)) return;
    const auto edge = std::string(ontology::predicate_name(r.predicate)) + " " + r.subject + " -> " + r.object;
    try {
      out.add_relation(std::move(r));
    } catch (const Error& e) {
      result.actions.push_back({MergeAction::Kind::drop_relation, {}, {}, {}, std::string(side) + ": " + edge + " (" +
                                                                                  std::string(errc_name(e.code())) + ")"});
    }
  };
  for (const auto& r : left.relations()) add(r, "left");
  for (auto r : right.relations()) {
    const auto s = right_to_merged.find(r.subject);
    const auto o = right_to_merged.find(r.object);
    if (s != right_to_merged.end()) r.subject = s->second;
    if (o != right_to_merged.end()) r.object = o->second;
    add(std::move(r), "right");
  }
  return result;
}

std::vector<ConvergenceCluster> convergence_clusters(std::span<const Ontology> ontologies, std::size_t k) {
  if (k < 2) throw Error(Errc::insufficient_input, "k must be at least 2");
  if (ontologies.size() < k) {
    throw Error(Errc::insufficient_input, "need at least " + std::to_string(k) + " ontologies, got " +
                                              std::to_string(ontologies.size()));
  }
  std::map<std::string, std::set<std::pair<std::string, std::string>>> groups;
  for (const auto& o : ontologies) {
    for (const auto& [id, c] : o.concepts()) groups[normalize_label(c.preferred_label)].insert({o.id(), id});
  }
  std::vector<ConvergenceCluster> out;
  for (auto& [label, members] : groups) {
    std::set<std::string> distinct;
    for (const auto& m : members) distinct.insert(m.first);
    if (distinct.size() < k) continue;
    out.push_back({label, {members.begin(), members.end()}, distinct.size()});
  }
  std::stable_sort(out.begin(), out.end(), [](const ConvergenceCluster& a, const ConvergenceCluster& b) {
    return a.support != b.support ? a.support > b.support : a.label < b.label;
  });
  return out;
}

}  // namespace ontoforge::integration
