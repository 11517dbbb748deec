#pragma once

#include <compare>
#include <cstddef>
#include <filesystem>
#include <map>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include <json.hpp>

#include "ontoforge/types.hpp"

namespace ontoforge::linguistic {

enum class Pos { noun, adj, verb, adv, prep, conj, num, pron, other };

std::string_view pos_name(Pos pos);
std::optional<Pos> parse_pos(std::string_view name);

struct Analysis {
  std::string lemma;
  Pos pos = Pos::other;
  std::string features;
};

struct LexEntry {
  std::vector<Analysis> analyses;  // file order = frequency rank
  bool no_default = false;
};

inline constexpr std::string_view kNoDefaultFlag = "no-default";

// Surface-form dictionary. TSV, one analysis per line:
//   surface<TAB>lemma<TAB>POS<TAB>features
// plus `@bigram<TAB>LEFT<TAB>POS` preference lines and `#` comments.
class Lexicon {
 public:
  static Lexicon parse(std::string_view tsv);
  static Lexicon load(const std::filesystem::path& path);

  // Surfaces are case-folded on insertion.
  void add(std::string_view surface, Analysis analysis);
  void mark_no_default(std::string_view surface);
  void add_bigram(Pos left, Pos right);

  const LexEntry* lookup(std::string_view folded_surface) const;
  bool prefers(Pos left, Pos right) const;

  const std::vector<std::pair<Pos, Pos>>& bigram_prefs() const { return bigrams_; }
  std::size_t size() const { return entries_.size(); }

 private:
  std::map<std::string, LexEntry, std::less<>> entries_;
  std::vector<std::pair<Pos, Pos>> bigrams_;
};

struct Reading {
  std::string lemma;
  Pos pos = Pos::other;

  auto operator<=>(const Reading&) const = default;
};

enum class TokenStatus { resolved, ambiguous, unknown };

std::string_view status_name(TokenStatus status);

struct RawToken {
  std::string surface;
  std::size_t offset = 0;
};

using RawSentence = std::vector<RawToken>;

struct TokenAnnotation {
  std::string surface;
  std::size_t offset = 0;
  std::vector<Reading> candidates;
  std::optional<Reading> resolved;
  TokenStatus status = TokenStatus::unknown;
};

struct HomonymyQuery {
  DocId doc_id = 0;
  std::size_t sentence_id = 0;
  std::size_t offset = 0;
  std::string surface;
  std::vector<Reading> candidates;
};

struct Chunk {
  std::size_t sentence_id = 0;
  std::size_t start = 0;  // token span [start, end)
  std::size_t end = 0;
  std::string head_lemma;
  std::vector<std::string> lemma_sequence;
  std::vector<std::string> surfaces;
};

// Splits at '.', '!' or '?' followed by whitespace and then an uppercase
// letter (or end of text). Tokens are maximal runs of letters, digits and
// hyphens that contain at least one letter or digit.
std::vector<RawSentence> segment(std::string_view text);

TokenAnnotation annotate(const RawToken& token, const Lexicon& lexicon);

struct SentenceRef {
  DocId doc_id = 0;
  std::size_t sentence_id = 0;
};

struct DisambiguationOptions {
  bool use_bigrams = true;
  // Engineer-supplied readings keyed by token byte offset; applied first.
  const std::map<std::size_t, Reading>* overrides = nullptr;
};

struct Disambiguation {
  std::vector<TokenAnnotation> tokens;
  std::vector<HomonymyQuery> queries;
};

Disambiguation disambiguate(std::vector<TokenAnnotation> sentence, const Lexicon& lexicon,
                            SentenceRef where, const DisambiguationOptions& options = {});

// Maximal ADJ* NOUN+ spans.
std::vector<Chunk> chunk(std::span<const TokenAnnotation> sentence, std::size_t sentence_id);

struct AnalyzedSentence {
  std::size_t sentence_id = 0;
  std::vector<TokenAnnotation> tokens;
  std::vector<Chunk> chunks;
};

struct AnalyzedDocument {
  DocId doc_id = 0;
  std::vector<AnalyzedSentence> sentences;
  std::vector<HomonymyQuery> queries;
};

struct AnalysisOptions {
  bool use_bigrams = true;
  std::map<std::size_t, Reading> overrides;
};

AnalyzedDocument analyze(DocId doc_id, std::string_view text, const Lexicon& lexicon,
                         const AnalysisOptions& options = {});

// Lemmas of resolved and unknown tokens, in text order.
std::vector<std::string> indexed_lemmas(const AnalyzedDocument& doc);

void to_json(nlohmann::json& j, const Reading& r);
void from_json(const nlohmann::json& j, Reading& r);
void to_json(nlohmann::json& j, const HomonymyQuery& q);
void to_json(nlohmann::json& j, const AnalyzedDocument& doc);
void from_json(const nlohmann::json& j, AnalyzedDocument& doc);

}  // namespace ontoforge::linguistic
