#include "ontoforge/linguistic.hpp"

#include <algorithm>

#include "ontoforge/error.hpp"
#include "ontoforge/io.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge::linguistic {

namespace {

constexpr std::pair<Pos, std::string_view> kPosNames[] = {
    {Pos::noun, "NOUN"}, {Pos::adj, "ADJ"},   {Pos::verb, "VERB"},
    {Pos::adv, "ADV"},   {Pos::prep, "PREP"}, {Pos::conj, "CONJ"},
    {Pos::num, "NUM"},   {Pos::pron, "PRON"}, {Pos::other, "OTHER"},
};

bool has_flag(std::string_view features, std::string_view flag) {
  for (const auto& part : text::split(features, ',')) {
    if (text::trim(part) == flag) return true;
  }
  return false;
}

bool is_terminator(char32_t cp) { return cp == U'.' || cp == U'!' || cp == U'?'; }

bool is_token_char(char32_t cp) {
  return text::is_letter(cp) || text::is_digit(cp) || cp == U'-' || cp == U'‐';
}

std::optional<Pos> settled_pos(const TokenAnnotation& t) {
  if (t.status == TokenStatus::ambiguous || !t.resolved) return std::nullopt;
  return t.resolved->pos;
}

}  // namespace

std::string_view pos_name(Pos pos) {
  for (const auto& [p, name] : kPosNames) {
    if (p == pos) return name;
  }
  return "OTHER";
}

std::optional<Pos> parse_pos(std::string_view name) {
  for (const auto& [p, n] : kPosNames) {
    if (n == name) return p;
  }
  return std::nullopt;
}

std::string_view status_name(TokenStatus status) {
  switch (status) {
    case TokenStatus::resolved: return "resolved";
    case TokenStatus::ambiguous: return "ambiguous";
    case TokenStatus::unknown: return "unknown";
  }
  return "unknown";
}

Lexicon Lexicon::parse(std::string_view tsv) {
  Lexicon lex;
  std::size_t line_no = 0;
  for (auto line : text::split(tsv, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols[0] == "@bigram") {
      if (cols.size() != 3) {
        throw ParseError(Errc::lexicon_format, line_no, "@bigram needs two POS columns");
      }
      const auto left = parse_pos(cols[1]);
      const auto right = parse_pos(cols[2]);
      if (!left || !right) throw ParseError(Errc::lexicon_format, line_no, "unknown POS tag");
      lex.add_bigram(*left, *right);
      continue;
    }
    if (cols.size() < 3 || cols.size() > 4) {
      throw ParseError(Errc::lexicon_format, line_no, "expected surface, lemma, POS[, features]");
    }
    if (cols[0].empty() || cols[1].empty()) {
      throw ParseError(Errc::lexicon_format, line_no, "empty surface or lemma");
    }
    if (!text::valid_utf8(line)) throw ParseError(Errc::lexicon_format, line_no, "invalid UTF-8");
    const auto pos = parse_pos(cols[2]);
    if (!pos) throw ParseError(Errc::lexicon_format, line_no, "unknown POS tag '" + cols[2] + "'");
    Analysis a{text::to_lower(cols[1]), *pos, cols.size() == 4 ? cols[3] : std::string{}};
    const bool no_default = has_flag(a.features, kNoDefaultFlag);
    lex.add(cols[0], std::move(a));
    if (no_default) lex.mark_no_default(cols[0]);
  }
  return lex;
}

Lexicon Lexicon::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

void Lexicon::add(std::string_view surface, Analysis analysis) {
  entries_[text::fold_case(surface)].analyses.push_back(std::move(analysis));
}

void Lexicon::mark_no_default(std::string_view surface) {
  entries_[text::fold_case(surface)].no_default = true;
}

void Lexicon::add_bigram(Pos left, Pos right) {
  if (!prefers(left, right)) bigrams_.emplace_back(left, right);
}

const LexEntry* Lexicon::lookup(std::string_view folded_surface) const {
  const auto it = entries_.find(folded_surface);
  return it == entries_.end() ? nullptr : &it->second;
}

bool Lexicon::prefers(Pos left, Pos right) const {
  return std::find(bigrams_.begin(), bigrams_.end(), std::pair{left, right}) != bigrams_.end();
}

std::vector<RawSentence> segment(std::string_view input) {
  std::vector<RawSentence> sentences;
  const auto cps = text::decode(input);
  RawSentence current;
  std::size_t i = 0;
  auto close_sentence = [&] {
    if (!current.empty()) sentences.push_back(std::move(current));
    current.clear();
  };
  while (i < cps.size()) {
    const char32_t cp = cps[i].value;
    if (is_token_char(cp)) {
      const std::size_t start = i;
      bool has_word_char = false;
      while (i < cps.size() && is_token_char(cps[i].value)) {
        has_word_char = has_word_char || text::is_letter(cps[i].value) || text::is_digit(cps[i].value);
        ++i;
      }
      if (has_word_char) {
        const std::size_t begin = cps[start].offset;
        const std::size_t end = cps[i - 1].offset + cps[i - 1].length;
        current.push_back({std::string(input.substr(begin, end - begin)), begin});
      }
      continue;
    }
    if (is_terminator(cp)) {
      std::size_t j = i + 1;
      while (j < cps.size() && is_terminator(cps[j].value)) ++j;
      bool boundary = j == cps.size();
      if (!boundary && text::is_space(cps[j].value)) {
        while (j < cps.size() && text::is_space(cps[j].value)) ++j;
        boundary = j == cps.size() || text::is_upper(cps[j].value);
      }
      if (boundary) close_sentence();
      i = j;
      continue;
    }
    ++i;
  }
  close_sentence();
  return sentences;
}

TokenAnnotation annotate(const RawToken& token, const Lexicon& lexicon) {
  TokenAnnotation ann;
  ann.surface = token.surface;
  ann.offset = token.offset;
  if (const LexEntry* entry = lexicon.lookup(text::fold_case(token.surface))) {
    for (const auto& a : entry->analyses) {
      Reading r{a.lemma, a.pos};
      if (std::find(ann.candidates.begin(), ann.candidates.end(), r) == ann.candidates.end()) {
        ann.candidates.push_back(std::move(r));
      }
    }
  }
  if (ann.candidates.empty()) {
    ann.status = TokenStatus::unknown;
    ann.resolved = Reading{text::to_lower(token.surface), Pos::other};
  } else if (ann.candidates.size() == 1) {
    ann.status = TokenStatus::resolved;
    ann.resolved = ann.candidates.front();
  } else {
    ann.status = TokenStatus::ambiguous;
  }
  return ann;
}

Disambiguation disambiguate(std::vector<TokenAnnotation> sentence, const Lexicon& lexicon,
                            SentenceRef where, const DisambiguationOptions& options) {
  Disambiguation out;
  for (std::size_t i = 0; i < sentence.size(); ++i) {
    auto& tok = sentence[i];
    if (options.overrides) {
      const auto it = options.overrides->find(tok.offset);
      if (it != options.overrides->end() &&
          std::find(tok.candidates.begin(), tok.candidates.end(), it->second) !=
              tok.candidates.end()) {
        tok.resolved = it->second;
        tok.status = TokenStatus::resolved;
        continue;
      }
    }
    if (tok.status != TokenStatus::ambiguous) continue;

    // (a) single reading
    if (tok.candidates.size() == 1) {
      tok.resolved = tok.candidates.front();
      tok.status = TokenStatus::resolved;
      continue;
    }
    // (b) left-neighbour bigram preference
    if (options.use_bigrams && i > 0) {
      if (const auto left = settled_pos(sentence[i - 1])) {
        const Reading* pick = nullptr;
        std::size_t matches = 0;
        for (const auto& c : tok.candidates) {
          if (lexicon.prefers(*left, c.pos)) {
            ++matches;
            pick = &c;
          }
        }
        if (matches == 1) {
          tok.resolved = *pick;
          tok.status = TokenStatus::resolved;
          continue;
        }
      }
    }
    // (c) lexicon order, unless the entry forbids a default
    const LexEntry* entry = lexicon.lookup(text::fold_case(tok.surface));
    if (entry && !entry->no_default) {
      tok.resolved = tok.candidates.front();
      tok.status = TokenStatus::resolved;
      continue;
    }
    tok.resolved.reset();
    out.queries.push_back({where.doc_id, where.sentence_id, tok.offset, tok.surface, tok.candidates});
  }
  out.tokens = std::move(sentence);
  return out;
}

std::vector<Chunk> chunk(std::span<const TokenAnnotation> sentence, std::size_t sentence_id) {
  std::vector<Chunk> chunks;
  const std::size_t n = sentence.size();
  auto pos_at = [&](std::size_t k) { return settled_pos(sentence[k]); };
  std::size_t i = 0;
  while (i < n) {
    const auto p = pos_at(i);
    if (p != Pos::adj && p != Pos::noun) {
      ++i;
      continue;
    }
    const std::size_t start = i;
    while (i < n && pos_at(i) == Pos::adj) ++i;
    const std::size_t first_noun = i;
    while (i < n && pos_at(i) == Pos::noun) ++i;
    if (i == first_noun) continue;
    Chunk c;
    c.sentence_id = sentence_id;
    c.start = start;
    c.end = i;
    c.head_lemma = sentence[first_noun].resolved->lemma;
    for (std::size_t k = start; k < i; ++k) {
      c.lemma_sequence.push_back(sentence[k].resolved->lemma);
      c.surfaces.push_back(sentence[k].surface);
    }
    chunks.push_back(std::move(c));
  }
  return chunks;
}

AnalyzedDocument analyze(DocId doc_id, std::string_view text_body, const Lexicon& lexicon,
                         const AnalysisOptions& options) {
  AnalyzedDocument doc;
  doc.doc_id = doc_id;
  const auto sentences = segment(text_body);
  DisambiguationOptions dopts{options.use_bigrams, &options.overrides};
  for (std::size_t sid = 0; sid < sentences.size(); ++sid) {
    std::vector<TokenAnnotation> tokens;
    tokens.reserve(sentences[sid].size());
    for (const auto& raw : sentences[sid]) tokens.push_back(annotate(raw, lexicon));
    auto resolved = disambiguate(std::move(tokens), lexicon, {doc_id, sid}, dopts);
    AnalyzedSentence s;
    s.sentence_id = sid;
    s.chunks = chunk(resolved.tokens, sid);
    s.tokens = std::move(resolved.tokens);
    for (auto& q : resolved.queries) doc.queries.push_back(std::move(q));
    doc.sentences.push_back(std::move(s));
  }
  return doc;
}

std::vector<std::string> indexed_lemmas(const AnalyzedDocument& doc) {
  std::vector<std::string> out;
  for (const auto& s : doc.sentences) {
    for (const auto& t : s.tokens) {
      if (t.status != TokenStatus::ambiguous && t.resolved) out.push_back(t.resolved->lemma);
    }
  }
  return out;
}

void to_json(nlohmann::json& j, const Reading& r) {
  j = nlohmann::json{{"lemma", r.lemma}, {"pos", pos_name(r.pos)}};
}

void from_json(const nlohmann::json& j, Reading& r) {
  r.lemma = j.at("lemma").get<std::string>();
  const auto pos = parse_pos(j.at("pos").get<std::string>());
  if (!pos) throw Error(Errc::parse_error, "unknown POS in reading");
  r.pos = *pos;
}

void to_json(nlohmann::json& j, const HomonymyQuery& q) {
  j = nlohmann::json{{"doc_id", q.doc_id},   {"sentence_id", q.sentence_id},
                     {"offset", q.offset},   {"surface", q.surface},
                     {"candidates", q.candidates}};
}

void to_json(nlohmann::json& j, const AnalyzedDocument& doc) {
  auto sentences = nlohmann::json::array();
  for (const auto& s : doc.sentences) {
    auto tokens = nlohmann::json::array();
    for (const auto& t : s.tokens) {
      tokens.push_back({{"surface", t.surface},
                        {"offset", t.offset},
                        {"candidates", t.candidates},
                        {"resolved", t.resolved ? nlohmann::json(*t.resolved) : nlohmann::json()},
                        {"status", status_name(t.status)}});
    }
    auto chunks = nlohmann::json::array();
    for (const auto& c : s.chunks) {
      chunks.push_back({{"start", c.start},
                        {"end", c.end},
                        {"head", c.head_lemma},
                        {"lemmas", c.lemma_sequence},
                        {"surfaces", c.surfaces}});
    }
    sentences.push_back({{"id", s.sentence_id}, {"tokens", tokens}, {"chunks", chunks}});
  }
  j = nlohmann::json{{"doc_id", doc.doc_id}, {"sentences", sentences}, {"queries", doc.queries}};
}

void from_json(const nlohmann::json& j, AnalyzedDocument& doc) {
  doc = {};
  doc.doc_id = j.at("doc_id").get<DocId>();
  for (const auto& js : j.at("sentences")) {
    AnalyzedSentence s;
    s.sentence_id = js.at("id").get<std::size_t>();
    for (const auto& jt : js.at("tokens")) {
      TokenAnnotation t;
      t.surface = jt.at("surface").get<std::string>();
      t.offset = jt.at("offset").get<std::size_t>();
      t.candidates = jt.at("candidates").get<std::vector<Reading>>();
      if (!jt.at("resolved").is_null()) t.resolved = jt.at("resolved").get<Reading>();
      const auto status = jt.at("status").get<std::string>();
      t.status = status == "resolved"    ? TokenStatus::resolved
                 : status == "ambiguous" ? TokenStatus::ambiguous
                                         : TokenStatus::unknown;
      s.tokens.push_back(std::move(t));
    }
    for (const auto& jc : js.at("chunks")) {
      Chunk c;
      c.sentence_id = s.sentence_id;
      c.start = jc.at("start").get<std::size_t>();
      c.end = jc.at("end").get<std::size_t>();
      c.head_lemma = jc.at("head").get<std::string>();
      c.lemma_sequence = jc.at("lemmas").get<std::vector<std::string>>();
      c.surfaces = jc.at("surfaces").get<std::vector<std::string>>();
      s.chunks.push_back(std::move(c));
    }
    doc.sentences.push_back(std::move(s));
  }
  for (const auto& jq : j.at("queries")) {
    HomonymyQuery q;
    q.doc_id = jq.at("doc_id").get<DocId>();
    q.sentence_id = jq.at("sentence_id").get<std::size_t>();
    q.offset = jq.at("offset").get<std::size_t>();
    q.surface = jq.at("surface").get<std::string>();
    q.candidates = jq.at("candidates").get<std::vector<Reading>>();
    doc.queries.push_back(std::move(q));
  }
}

}  // namespace ontoforge::linguistic
