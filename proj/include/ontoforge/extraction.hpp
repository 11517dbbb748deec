#pragma once

#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "ontoforge/corpus.hpp"
#include "ontoforge/linguistic.hpp"
#include "ontoforge/types.hpp"

namespace ontoforge::extraction {

inline constexpr std::size_t kMaxTermLength = 4;

using NormalForm = std::vector<std::string>;

// Canonical key: lemmas joined by single spaces.
std::string key_of(const NormalForm& nf);
NormalForm normal_form_of(std::string_view key);

enum class CandidateStatus { pending, approved, rejected };

std::string_view status_name(CandidateStatus s);
std::optional<CandidateStatus> parse_status(std::string_view s);

struct TermCandidate {
  NormalForm normal_form;
  std::set<std::string> surface_variants;
  std::size_t freq = 0;      // all occurrences, nested ones included
  std::size_t doc_freq = 0;
  double tfidf = 0.0;
  double cvalue = 0.0;
  CandidateStatus status = CandidateStatus::pending;
  std::set<DocId> provenance;

  std::string key() const { return key_of(normal_form); }
};

using CandidateSet = std::map<std::string, TermCandidate>;

// Every contiguous 1..4-lemma window of every chunk.
CandidateSet harvest(std::span<const linguistic::AnalyzedDocument> docs);

// freq * ln(doc_count / doc_freq)
double score_tfidf(std::size_t freq, std::size_t doc_count, std::size_t doc_freq);
double score_tfidf(const TermCandidate& c, const corpus::CorpusIndex& index);

// log2(|a|+1) * (f(a) - mean f over the strictly longer candidates containing a)
std::map<std::string, double> score_cvalue(const CandidateSet& candidates);

enum class Scorer { tfidf, cvalue, both };

std::optional<Scorer> parse_scorer(std::string_view s);
std::string_view scorer_name(Scorer s);

void apply_scores(CandidateSet& candidates, const corpus::CorpusIndex& index, Scorer scorer);

enum class RelationKind { isa, assoc };

std::string_view relation_kind_name(RelationKind k);

struct RelationEvidence {
  NormalForm subject;
  RelationKind predicate = RelationKind::assoc;
  NormalForm object;
  std::string source;  // isA template text, or "pmi"
  DocId doc_id = 0;    // first supporting sentence
  std::size_t sentence_id = 0;
  double weight = 0.0;
};

struct IsaPattern {
  std::vector<std::string> tokens;  // literal lemmas plus the slots "X" and "Y"
  std::string text;
  std::size_t line = 0;
};

// One template per line; `#` starts a comment. Tokens without a letter or
// digit (dashes, commas) are dropped since segmentation removes them too.
class PatternSet {
 public:
  static PatternSet parse(std::string_view text);
  static PatternSet load(const std::filesystem::path& path);

  const std::vector<IsaPattern>& patterns() const { return patterns_; }

 private:
  std::vector<IsaPattern> patterns_;
};

// Weight = number of matches of (X, Y) for the template.
std::vector<RelationEvidence> mine_isa(std::span<const linguistic::AnalyzedDocument> docs,
                                       const CandidateSet& candidates, const PatternSet& patterns);

// Sentence-level PMI over co-occurring candidate pairs; emits PMI > tau.
std::vector<RelationEvidence> mine_assoc(std::span<const linguistic::AnalyzedDocument> docs,
                                         const CandidateSet& candidates, double tau);

struct AmbiguityQuery {
  NormalForm normal_form;
  std::vector<std::vector<std::string>> components;  // candidate keys, each sorted
};

std::optional<AmbiguityQuery> flag_lexical_ambiguity(const std::string& candidate_key,
                                                     std::span<const RelationEvidence> evidence);

}  // namespace ontoforge::extraction
