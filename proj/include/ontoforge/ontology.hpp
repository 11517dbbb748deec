#pragma once

#include <cstddef>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "ontoforge/types.hpp"

namespace ontoforge::ontology {

enum class Predicate { is_a, part_of, assoc, synonym_of, uses_object, invokes_process, decomposes_to };

inline constexpr Predicate kAllPredicates[] = {
    Predicate::is_a,        Predicate::part_of,         Predicate::assoc,         Predicate::synonym_of,
    Predicate::uses_object, Predicate::invokes_process, Predicate::decomposes_to,
};

std::string_view predicate_name(Predicate p);  // "isA", "partOf", ...
std::optional<Predicate> parse_predicate(std::string_view name);

// isA and decomposesTo must stay acyclic.
constexpr bool is_hierarchical(Predicate p) {
  return p == Predicate::is_a || p == Predicate::decomposes_to;
}
// Only assoc may relate a concept to itself.
constexpr bool forbids_self_loop(Predicate p) { return p != Predicate::assoc; }

enum class OntologyKind { object, process, task, mixed };
enum class Mutability { fixed, dynamic };  // "static" / "dynamic"

std::string_view kind_name(OntologyKind k);
std::optional<OntologyKind> parse_kind(std::string_view name);
std::string_view mutability_name(Mutability m);
Mutability default_mutability(OntologyKind k);

// Lowercase letters (any script), digits and '_'; non-empty.
bool is_valid_concept_id(std::string_view id);

struct Concept {
  std::string concept_id;
  std::string preferred_label;
  std::set<std::string> synonyms;
  std::optional<std::string> definition;
  std::set<DocId> sources;
};

struct Relation {
  std::string subject;
  Predicate predicate = Predicate::assoc;
  std::string object;
  double weight = 1.0;
  std::optional<std::string> provenance;

  bool same_edge(const Relation& o) const {
    return subject == o.subject && predicate == o.predicate && object == o.object;
  }
};

class Ontology {
 public:
  Ontology() = default;
  Ontology(std::string ontology_id, OntologyKind kind, std::string name = {});

  const std::string& id() const { return id_; }
  const std::string& name() const { return name_; }
  int version() const { return version_; }
  OntologyKind kind() const { return kind_; }
  Mutability mutability() const { return mutability_; }

  void set_name(std::string name) { name_ = std::move(name); }
  void set_version(int v) { version_ = v; }
  void set_kind(OntologyKind k) { kind_ = k; }
  void set_mutability(Mutability m) { mutability_ = m; }

  const std::map<std::string, Concept>& concepts() const { return concepts_; }
  const std::vector<Relation>& relations() const { return relations_; }

  const Concept* find(std::string_view id) const;
  bool has_relation(std::string_view s, Predicate p, std::string_view o) const;

  // Checked mutators; on error the ontology is unchanged.
  // Throws MalformedId, DuplicateConcept.
  void add_concept(Concept c);
  // Throws UnknownEndpoint, CycleError (also for forbidden self-loops).
  // Re-adding an existing edge is a no-op.
  void add_relation(Relation r);

  // Replaces label/synonyms/definition/sources of an existing concept.
  void update_concept(const Concept& c);

  // Unchecked inserts for importers; validate() reports any damage.
  void put_concept(Concept c);
  void put_relation(Relation r);

  // Objects of `p`-edges leaving `id`, in relation order.
  std::vector<std::string> targets(std::string_view id, Predicate p) const;
  // Subjects of `p`-edges entering `id`, in relation order.
  std::vector<std::string> sources_of(std::string_view id, Predicate p) const;
  bool reaches(std::string_view from, std::string_view to, Predicate p) const;

 private:
  std::string id_;
  std::string name_;
  int version_ = 1;
  OntologyKind kind_ = OntologyKind::mixed;
  Mutability mutability_ = Mutability::dynamic;
  std::map<std::string, Concept> concepts_;
  std::vector<Relation> relations_;
};

enum class ViolationKind {
  unknown_endpoint,
  cycle,
  duplicate_relation,
  empty_label,
  malformed_id,
  label_in_synonyms,
  self_loop,
  malformed_text,
};

std::string_view violation_name(ViolationKind k);

struct Violation {
  ViolationKind kind;
  std::string detail;
};

// Empty result iff every invariant holds.
std::vector<Violation> validate(const Ontology& o);

// Canonical Turtle subset. Throws InvalidOntology if validate() is non-empty.
std::string export_triples(const Ontology& o);

// Structural parse only; run validate() for semantic checks.
// Throws ParseError / UnknownPredicate (as ParseError with that code).
Ontology import_triples(std::string_view document);

}  // namespace ontoforge::ontology
