#pragma once

#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "ontoforge/ontology.hpp"

namespace ontoforge::integration {

// NFC, case fold, "ё" -> "е", trim, whitespace runs -> one space.
std::string normalize_label(std::string_view text);

enum class MatchBasis { label_equal, synonym_overlap };

std::string_view basis_name(MatchBasis b);

struct AlignmentMatch {
  std::string left_ontology;
  std::string left_concept;
  std::string right_ontology;
  std::string right_concept;
  double score = 0.0;  // 1.0 label-equal, 0.9 synonym-overlap
  MatchBasis basis = MatchBasis::label_equal;
};

// Greedy one-to-one; ties go to the smallest counterpart concept_id.
std::vector<AlignmentMatch> align(const ontology::Ontology& left, const ontology::Ontology& right);

struct MergeAction {
  enum class Kind { fuse, copy, drop_relation };
  Kind kind = Kind::copy;
  std::string left_id;    // empty for right-only copies
  std::string right_id;   // empty for left-only copies
  std::string merged_id;  // id in the result
  std::string detail;
};

struct MergeResult {
  ontology::Ontology ontology;
  std::vector<MergeAction> actions;

  // One JSON object per line.
  std::string report_jsonl() const;
};

// Left ids win. Right-side ids that collide with an unrelated left concept
// get a numeric suffix. Edges that would close a cycle are dropped and
// reported. Throws InvalidMatch.
MergeResult merge(const ontology::Ontology& left, const ontology::Ontology& right,
                  std::span<const AlignmentMatch> matches);

struct ConvergenceCluster {
  std::string label;  // normalized
  std::vector<std::pair<std::string, std::string>> members;  // (ontology_id, concept_id), sorted
  std::size_t support = 0;
};

// Throws InsufficientInput when fewer than k ontologies are given.
std::vector<ConvergenceCluster> convergence_clusters(std::span<const ontology::Ontology> ontologies, std::size_t k);

}  // namespace ontoforge::integration
