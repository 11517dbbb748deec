#include "ontoforge/ontology.hpp"

#include <algorithm>
#include <cstdint>
#include <iterator>
#include <set>
#include <functional>
#include <tuple>
#include <unordered_map>
#include <unordered_set>

#include "ontoforge/error.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge::ontology {

namespace {

constexpr std::string_view kPrefixLine = "@prefix ont: <urn:icon:onto#> .";

using Adjacency = std::unordered_map<std::string_view, std::vector<std::string_view>>;

Adjacency adjacency_of(const std::vector<Relation>& relations, Predicate p) {
  Adjacency adj;
  for (const auto& r : relations) {
    if (r.predicate == p) adj[r.subject].push_back(r.object);
  }
  return adj;
}

bool path_exists(const Adjacency& adj, std::string_view from, std::string_view to) {
  if (from == to) return true;
  std::unordered_set<std::string_view> seen{from};
  std::vector<std::string_view> stack{from};
  while (!stack.empty()) {
    const auto node = stack.back();
    stack.pop_back();
    const auto it = adj.find(node);
    if (it == adj.end()) continue;
    for (const auto next : it->second) {
      if (next == to) return true;
      if (seen.insert(next).second) stack.push_back(next);
    }
  }
  return false;
}

// Dense ids in name order: concepts first, then unknown endpoints.
struct NodeIndex {
  std::vector<std::string_view> names;
  std::unordered_map<std::string_view, std::uint32_t> index;

  std::vector<bool> known;

  explicit NodeIndex(const Ontology& o) {
    names.reserve(o.concepts().size());
    for (const auto& [id, _] : o.concepts()) names.push_back(id);
    build_index();
    std::set<std::string_view> unknown;
    for (const auto& r : o.relations()) {
      if (!index.contains(r.subject)) unknown.insert(r.subject);
      if (!index.contains(r.object)) unknown.insert(r.object);
    }
    known.assign(names.size(), true);
    if (unknown.empty()) return;
    std::vector<std::string_view> merged;
    std::merge(names.begin(), names.end(), unknown.begin(), unknown.end(), std::back_inserter(merged));
    names = std::move(merged);
    known.assign(names.size(), true);
    for (std::size_t i = 0; i < names.size(); ++i) known[i] = !unknown.contains(names[i]);
    build_index();
  }

  void build_index() {
    index.clear();
    index.reserve(names.size());
    for (std::uint32_t i = 0; i < names.size(); ++i) index.emplace(names[i], i);
  }

  std::uint32_t at(std::string_view name) const { return index.at(name); }
};

bool has_bad_text(std::string_view s) {
  return !text::valid_utf8(s) || s.find('\n') != std::string_view::npos || s.find('\r') != std::string_view::npos;
}

std::string quote(std::string_view s) {
  std::string out = "\"";
  for (const char c : s) {
    if (c == '"' || c == '\\') out += '\\';
    out += c;
  }
  out += '"';
  return out;
}

class LineCursor {
 public:
  LineCursor(std::string_view line, std::size_t line_no) : line_(line), line_no_(line_no) {}

  void skip_space() {
    while (pos_ < line_.size() && (line_[pos_] == ' ' || line_[pos_] == '\t')) ++pos_;
  }

  bool at_end() {
    skip_space();
    return pos_ >= line_.size();
  }

  bool peek(char c) {
    skip_space();
    return pos_ < line_.size() && line_[pos_] == c;
  }

  // `ont:` followed by a run of non-space characters.
  std::string name() {
    skip_space();
    if (line_.substr(pos_, 4) != "ont:") fail("expected 'ont:' name");
    pos_ += 4;
    const auto start = pos_;
    while (pos_ < line_.size() && line_[pos_] != ' ' && line_[pos_] != '\t') ++pos_;
    if (pos_ == start) fail("empty name after 'ont:'");
    return std::string(line_.substr(start, pos_ - start));
  }

  std::string literal() {
    skip_space();
    if (pos_ >= line_.size() || line_[pos_] != '"') fail("expected string literal");
    ++pos_;
    std::string out;
    while (pos_ < line_.size()) {
      const char c = line_[pos_++];
      if (c == '"') return out;
      if (c == '\\') {
        if (pos_ >= line_.size()) break;
        const char e = line_[pos_++];
        if (e != '"' && e != '\\') fail(std::string("unsupported escape \\") + e);
        out += e;
        continue;
      }
      out += c;
    }
    fail("unterminated string literal");
  }

  void terminator() {
    skip_space();
    if (pos_ >= line_.size() || line_[pos_] != '.') fail("expected ' .' at end of statement");
    ++pos_;
    if (!at_end()) fail("trailing characters after '.'");
  }

  [[noreturn]] void fail(const std::string& what) const { throw ParseError(Errc::parse_error, line_no_, what); }

 private:
  std::string_view line_;
  std::size_t line_no_;
  std::size_t pos_ = 0;
};

}  // namespace

std::string_view predicate_name(Predicate p) {
  switch (p) {
    case Predicate::is_a: return "isA";
    case Predicate::part_of: return "partOf";
    case Predicate::assoc: return "assoc";
    case Predicate::synonym_of: return "synonymOf";
    case Predicate::uses_object: return "usesObject";
    case Predicate::invokes_process: return "invokesProcess";
    case Predicate::decomposes_to: return "decomposesTo";
  }
  return "assoc";
}

std::optional<Predicate> parse_predicate(std::string_view name) {
  for (const auto p : kAllPredicates) {
    if (predicate_name(p) == name) return p;
  }
  return std::nullopt;
}

std::string_view kind_name(OntologyKind k) {
  switch (k) {
    case OntologyKind::object: return "object";
    case OntologyKind::process: return "process";
    case OntologyKind::task: return "task";
    case OntologyKind::mixed: return "mixed";
  }
  return "mixed";
}

std::optional<OntologyKind> parse_kind(std::string_view name) {
  for (const auto k : {OntologyKind::object, OntologyKind::process, OntologyKind::task, OntologyKind::mixed}) {
    if (kind_name(k) == name) return k;
  }
  return std::nullopt;
}

std::string_view mutability_name(Mutability m) { return m == Mutability::fixed ? "static" : "dynamic"; }

Mutability default_mutability(OntologyKind k) {
  return k == OntologyKind::object || k == OntologyKind::process ? Mutability::fixed : Mutability::dynamic;
}

bool is_valid_concept_id(std::string_view id) {
  if (id.empty() || !text::valid_utf8(id)) return false;
  for (const auto& cp : text::decode(id)) {
    if (cp.value == U'_') continue;
    if (cp.value < 0x80) {
      if ((cp.value >= U'a' && cp.value <= U'z') || (cp.value >= U'0' && cp.value <= U'9')) continue;
      return false;
    }
    if (text::is_letter(cp.value) && !text::is_upper(cp.value)) continue;
    return false;
  }
  return true;
}

Ontology::Ontology(std::string ontology_id, OntologyKind kind, std::string name)
    : id_(std::move(ontology_id)),
      name_(name.empty() ? id_ : std::move(name)),
      kind_(kind),
      mutability_(default_mutability(kind)) {}

const Concept* Ontology::find(std::string_view id) const {
  const auto it = concepts_.find(std::string(id));
  return it == concepts_.end() ? nullptr : &it->second;
}

bool Ontology::has_relation(std::string_view s, Predicate p, std::string_view o) const {
  return std::any_of(relations_.begin(), relations_.end(),
                     [&](const Relation& r) { return r.predicate == p && r.subject == s && r.object == o; });
}

void Ontology::add_concept(Concept c) {
  if (!is_valid_concept_id(c.concept_id)) {
    throw Error(Errc::malformed_id, "concept id '" + c.concept_id + "' is not a lowercase slug");
  }
  if (concepts_.contains(c.concept_id)) {
    throw Error(Errc::duplicate_concept, "concept '" + c.concept_id + "' already exists");
  }
  const auto id = c.concept_id;
  concepts_.emplace(id, std::move(c));
}

void Ontology::add_relation(Relation r) {
  for (const auto* end : {&r.subject, &r.object}) {
    if (!concepts_.contains(*end)) throw Error(Errc::unknown_endpoint, "no concept '" + *end + "'");
  }
  if (forbids_self_loop(r.predicate) && r.subject == r.object) {
    throw Error(Errc::cycle, std::string(predicate_name(r.predicate)) + " self-loop on '" + r.subject + "'");
  }
  if (has_relation(r.subject, r.predicate, r.object)) return;
  if (is_hierarchical(r.predicate) && path_exists(adjacency_of(relations_, r.predicate), r.object, r.subject)) {
    throw Error(Errc::cycle, std::string(predicate_name(r.predicate)) + " edge " + r.subject + " -> " + r.object +
                                 " closes a cycle");
  }
  relations_.push_back(std::move(r));
}

void Ontology::update_concept(const Concept& c) {
  const auto it = concepts_.find(c.concept_id);
  if (it == concepts_.end()) throw Error(Errc::not_found, "no concept '" + c.concept_id + "'");
  it->second = c;
}

void Ontology::put_concept(Concept c) {
  const auto id = c.concept_id;
  concepts_[id] = std::move(c);
}

void Ontology::put_relation(Relation r) { relations_.push_back(std::move(r)); }

std::vector<std::string> Ontology::targets(std::string_view id, Predicate p) const {
  std::vector<std::string> out;
  for (const auto& r : relations_) {
    if (r.predicate == p && r.subject == id) out.push_back(r.object);
  }
  return out;
}

std::vector<std::string> Ontology::sources_of(std::string_view id, Predicate p) const {
  std::vector<std::string> out;
  for (const auto& r : relations_) {
    if (r.predicate == p && r.object == id) out.push_back(r.subject);
  }
  return out;
}

bool Ontology::reaches(std::string_view from, std::string_view to, Predicate p) const {
  return path_exists(adjacency_of(relations_, p), from, to);
}

std::string_view violation_name(ViolationKind k) {
  switch (k) {
    case ViolationKind::unknown_endpoint: return "UnknownEndpoint";
    case ViolationKind::cycle: return "Cycle";
    case ViolationKind::duplicate_relation: return "DuplicateRelation";
    case ViolationKind::empty_label: return "EmptyLabel";
    case ViolationKind::malformed_id: return "MalformedId";
    case ViolationKind::label_in_synonyms: return "LabelInSynonyms";
    case ViolationKind::self_loop: return "SelfLoop";
    case ViolationKind::malformed_text: return "MalformedText";
  }
  return "Unknown";
}

std::vector<Violation> validate(const Ontology& o) {
  std::vector<Violation> out;
  if (!is_valid_concept_id(o.id())) out.push_back({ViolationKind::malformed_id, "ontology id '" + o.id() + "'"});
  for (const auto& [id, c] : o.concepts()) {
    if (!is_valid_concept_id(id) || id != c.concept_id) out.push_back({ViolationKind::malformed_id, id});
    if (text::trim(c.preferred_label).empty()) out.push_back({ViolationKind::empty_label, id});
    if (c.synonyms.contains(c.preferred_label)) out.push_back({ViolationKind::label_in_synonyms, id});
    bool bad_text = has_bad_text(c.preferred_label) || (c.definition && has_bad_text(*c.definition));
    for (const auto& s : c.synonyms) bad_text = bad_text || s.empty() || has_bad_text(s);
    if (bad_text) out.push_back({ViolationKind::malformed_text, id});
  }

  const NodeIndex nodes(o);
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(o.relations().size());
  std::vector<std::vector<std::uint32_t>> adj[2];
  adj[0].resize(nodes.names.size());
  adj[1].resize(nodes.names.size());
  for (const auto& r : o.relations()) {
    const auto edge = [&r] { return std::string(predicate_name(r.predicate)) + " " + r.subject + " -> " + r.object; };
    const auto s = nodes.at(r.subject), t = nodes.at(r.object);
    if (!nodes.known[s]) out.push_back({ViolationKind::unknown_endpoint, edge() + " (missing '" + r.subject + "')"});
    if (!nodes.known[t]) out.push_back({ViolationKind::unknown_endpoint, edge() + " (missing '" + r.object + "')"});
    if (forbids_self_loop(r.predicate) && s == t) out.push_back({ViolationKind::self_loop, edge()});
    const auto key = (std::uint64_t{s} << 35) | (std::uint64_t{t} << 3) | static_cast<std::uint64_t>(r.predicate);
    if (!seen.insert(key).second) out.push_back({ViolationKind::duplicate_relation, edge()});
    if (r.predicate == Predicate::is_a) adj[0][s].push_back(t);
    if (r.predicate == Predicate::decomposes_to) adj[1][s].push_back(t);
  }

  for (const auto p : {Predicate::is_a, Predicate::decomposes_to}) {
    const auto& g = adj[p == Predicate::is_a ? 0 : 1];
    // Iterative three-colour DFS; each back edge is one violation.
    std::vector<int> colour(g.size(), 0);
    for (std::uint32_t root = 0; root < g.size(); ++root) {
      if (colour[root] != 0) continue;
      std::vector<std::pair<std::uint32_t, std::size_t>> stack{{root, 0}};
      colour[root] = 1;
      while (!stack.empty()) {
        auto& [node, next] = stack.back();
        if (next >= g[node].size()) {
          colour[node] = 2;
          stack.pop_back();
          continue;
        }
        const auto child = g[node][next++];
        if (child == node) continue;  // reported as self_loop
        if (colour[child] == 1) {
          out.push_back({ViolationKind::cycle, std::string(predicate_name(p)) + " cycle through '" +
                                                   std::string(nodes.names[child]) + "'"});
        } else if (colour[child] == 0) {
          colour[child] = 1;
          stack.emplace_back(child, 0);
        }
      }
    }
  }
  return out;
}

std::string export_triples(const Ontology& o) {
  if (const auto violations = validate(o); !violations.empty()) {
    throw Error(Errc::invalid_ontology, "cannot export '" + o.id() + "': " +
                                            std::string(violation_name(violations.front().kind)) + " " +
                                            violations.front().detail);
  }
  std::string out;
  out += kPrefixLine;
  out += '\n';
  out += "ont:" + o.id() + " ont:kind " + quote(kind_name(o.kind())) + " .\n";
  for (const auto& [id, c] : o.concepts()) {
    out += "ont:" + id + " ont:label " + quote(c.preferred_label) + " .\n";
    for (const auto& s : c.synonyms) out += "ont:" + id + " ont:syn " + quote(s) + " .\n";
    if (c.definition) out += "ont:" + id + " ont:def " + quote(*c.definition) + " .\n";
  }
  // Subject order comes from the concept map; each bucket is small.
  const NodeIndex nodes(o);
  std::vector<std::vector<std::pair<std::uint32_t, const Relation*>>> buckets(nodes.names.size());
  for (const auto& r : o.relations()) buckets[nodes.at(r.subject)].emplace_back(nodes.at(r.object), &r);
  for (auto& bucket : buckets) {
    std::sort(bucket.begin(), bucket.end(), [](const auto& a, const auto& b) {
      return std::pair(predicate_name(a.second->predicate), a.first) <
             std::pair(predicate_name(b.second->predicate), b.first);
    });
    for (const auto& [_, r] : bucket) {
      out.append("ont:").append(r->subject).append(" ont:").append(predicate_name(r->predicate));
      out.append(" ont:").append(r->object).append(" .\n");
    }
  }
  return out;
}

Ontology import_triples(std::string_view document) {
  auto lines = text::split(document, '\n');
  if (!lines.empty() && lines.back().empty()) lines.pop_back();
  if (lines.empty() || lines[0] != kPrefixLine) {
    throw ParseError(Errc::parse_error, 1, "expected '" + std::string(kPrefixLine) + "'");
  }
  if (lines.size() < 2) throw ParseError(Errc::parse_error, 2, "missing ontology kind header");

  LineCursor header(lines[1], 2);
  const auto ontology_id = header.name();
  if (!is_valid_concept_id(ontology_id)) header.fail("malformed ontology id '" + ontology_id + "'");
  if (header.name() != "kind") header.fail("expected 'ont:kind' header");
  const auto kind_text = header.literal();
  header.terminator();
  const auto kind = parse_kind(kind_text);
  if (!kind) header.fail("unknown ontology kind '" + kind_text + "'");

  Ontology o(ontology_id, *kind);
  struct Pending {
    Concept node;
    bool labelled = false;
    std::size_t first_line = 0;
  };
  std::map<std::string, Pending> pending;

  for (std::size_t i = 2; i < lines.size(); ++i) {
    const std::size_t line_no = i + 1;
    const auto& line = lines[i];
    if (text::trim(line).empty()) continue;
    LineCursor cur(line, line_no);
    const auto subject = cur.name();
    if (!is_valid_concept_id(subject)) cur.fail("malformed concept id '" + subject + "'");
    const auto pred = cur.name();
    if (pred == "label" || pred == "syn" || pred == "def") {
      const auto value = cur.literal();
      cur.terminator();
      auto& p = pending[subject];
      if (p.first_line == 0) p.first_line = line_no;
      p.node.concept_id = subject;
      if (pred == "label") {
        if (p.labelled) cur.fail("second label for '" + subject + "'");
        p.labelled = true;
        p.node.preferred_label = value;
      } else if (pred == "syn") {
        p.node.synonyms.insert(value);
      } else {
        if (p.node.definition) cur.fail("second definition for '" + subject + "'");
        p.node.definition = value;
      }
      continue;
    }
    const auto predicate = parse_predicate(pred);
    if (!predicate) throw ParseError(Errc::unknown_predicate, line_no, "unknown predicate 'ont:" + pred + "'");
    const auto object = cur.name();
    if (!is_valid_concept_id(object)) cur.fail("malformed concept id '" + object + "'");
    cur.terminator();
    o.put_relation({subject, *predicate, object, 1.0, std::nullopt});
  }
  for (auto& [id, p] : pending) {
    if (!p.labelled) throw ParseError(Errc::parse_error, p.first_line, "concept '" + id + "' has no label");
    o.put_concept(std::move(p.node));
  }
  return o;
}

}  // namespace ontoforge::ontology
