#include "ontoforge/extraction.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <tuple>

#include "ontoforge/error.hpp"
#include "ontoforge/io.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge::extraction {

namespace {

using linguistic::AnalyzedDocument;

std::vector<const AnalyzedDocument*> by_doc_id(std::span<const AnalyzedDocument> docs) {
  std::vector<const AnalyzedDocument*> ordered;
  ordered.reserve(docs.size());
  for (const auto& d : docs) ordered.push_back(&d);
  std::stable_sort(ordered.begin(), ordered.end(),
                   [](const auto* a, const auto* b) { return a->doc_id < b->doc_id; });
  return ordered;
}

template <typename Fn>
void for_each_window(const std::vector<std::string>& seq, Fn&& fn) {
  for (std::size_t len = 1; len <= kMaxTermLength; ++len) {
    for (std::size_t i = 0; i + len <= seq.size(); ++i) fn(i, len);
  }
}

std::string window_key(const std::vector<std::string>& seq, std::size_t start, std::size_t len) {
  std::string k;
  for (std::size_t i = start; i < start + len; ++i) {
    if (i > start) k += ' ';
    k += seq[i];
  }
  return k;
}

bool has_word_char(std::string_view token) {
  for (const auto& cp : text::decode(token)) {
    if (text::is_letter(cp.value) || text::is_digit(cp.value)) return true;
  }
  return false;
}

// Candidate keys present in one sentence's chunks.
std::set<std::string> sentence_terms(const linguistic::AnalyzedSentence& s, const CandidateSet& candidates) {
  std::set<std::string> present;
  for (const auto& c : s.chunks) {
    for_each_window(c.lemma_sequence, [&](std::size_t i, std::size_t len) {
      auto k = window_key(c.lemma_sequence, i, len);
      if (candidates.contains(k)) present.insert(std::move(k));
    });
  }
  return present;
}

class SlotMatcher {
 public:
  SlotMatcher(const std::vector<std::string>& lemmas, const CandidateSet& candidates,
              const IsaPattern& pattern)
      : lemmas_(lemmas), candidates_(candidates), pattern_(pattern) {}

  // Longest-first binding of each slot, left to right, with backtracking.
  bool match(std::size_t element, std::size_t pos) {
    if (element == pattern_.tokens.size()) {
      end_ = pos;
      return true;
    }
    const auto& tok = pattern_.tokens[element];
    if (tok == "X" || tok == "Y") {
      const std::size_t max_len = std::min(kMaxTermLength, lemmas_.size() - std::min(pos, lemmas_.size()));
      for (std::size_t len = max_len; len >= 1; --len) {
        bool complete = true;
        for (std::size_t i = pos; i < pos + len; ++i) complete = complete && !lemmas_[i].empty();
        if (!complete) continue;
        auto k = window_key(lemmas_, pos, len);
        if (!candidates_.contains(k)) continue;
        (tok == "X" ? x_ : y_) = std::move(k);
        if (match(element + 1, pos + len)) return true;
      }
      return false;
    }
    if (pos < lemmas_.size() && lemmas_[pos] == tok) return match(element + 1, pos + 1);
    return false;
  }

  const std::string& x() const { return x_; }
  const std::string& y() const { return y_; }
  std::size_t end() const { return end_; }

 private:
  const std::vector<std::string>& lemmas_;
  const CandidateSet& candidates_;
  const IsaPattern& pattern_;
  std::string x_, y_;
  std::size_t end_ = 0;
};

}  // namespace

std::string key_of(const NormalForm& nf) { return text::join(nf, " "); }

NormalForm normal_form_of(std::string_view key) {
  if (key.empty()) return {};
  return text::split(key, ' ');
}

std::string_view status_name(CandidateStatus s) {
  switch (s) {
    case CandidateStatus::pending: return "pending";
    case CandidateStatus::approved: return "approved";
    case CandidateStatus::rejected: return "rejected";
  }
  return "pending";
}

std::optional<CandidateStatus> parse_status(std::string_view s) {
  if (s == "pending") return CandidateStatus::pending;
  if (s == "approved") return CandidateStatus::approved;
  if (s == "rejected") return CandidateStatus::rejected;
  return std::nullopt;
}

CandidateSet harvest(std::span<const AnalyzedDocument> docs) {
  CandidateSet out;
  for (const auto* doc : by_doc_id(docs)) {
    for (const auto& s : doc->sentences) {
      for (const auto& c : s.chunks) {
        for_each_window(c.lemma_sequence, [&](std::size_t i, std::size_t len) {
          auto& cand = out[window_key(c.lemma_sequence, i, len)];
          if (cand.normal_form.empty()) {
            cand.normal_form.assign(c.lemma_sequence.begin() + static_cast<long>(i),
                                    c.lemma_sequence.begin() + static_cast<long>(i + len));
          }
          cand.surface_variants.insert(window_key(c.surfaces, i, len));
          ++cand.freq;
          cand.provenance.insert(doc->doc_id);
        });
      }
    }
  }
  for (auto& [k, c] : out) c.doc_freq = c.provenance.size();
  return out;
}

double score_tfidf(std::size_t freq, std::size_t doc_count, std::size_t doc_freq) {
  if (doc_count == 0 || doc_freq == 0) return 0.0;
  return static_cast<double>(freq) * std::log(static_cast<double>(doc_count) / static_cast<double>(doc_freq));
}

double score_tfidf(const TermCandidate& c, const corpus::CorpusIndex& index) {
  return score_tfidf(c.freq, index.doc_count, c.doc_freq);
}

std::map<std::string, double> score_cvalue(const CandidateSet& candidates) {
  std::map<std::string, std::set<std::string>> containers;
  for (const auto& [bk, b] : candidates) {
    const auto& seq = b.normal_form;
    for (std::size_t len = 1; len < seq.size(); ++len) {
      for (std::size_t i = 0; i + len <= seq.size(); ++i) {
        auto inner = window_key(seq, i, len);
        if (candidates.contains(inner)) containers[std::move(inner)].insert(bk);
      }
    }
  }
  std::map<std::string, double> out;
  for (const auto& [ak, a] : candidates) {
    const double weight = std::log2(static_cast<double>(a.normal_form.size()) + 1.0);
    const auto it = containers.find(ak);
    if (it == containers.end()) {
      out[ak] = weight * static_cast<double>(a.freq);
      continue;
    }
    double sum = 0.0;
    for (const auto& bk : it->second) sum += static_cast<double>(candidates.at(bk).freq);
    out[ak] = weight * (static_cast<double>(a.freq) - sum / static_cast<double>(it->second.size()));
  }
  return out;
}

std::optional<Scorer> parse_scorer(std::string_view s) {
  if (s == "tfidf") return Scorer::tfidf;
  if (s == "cvalue") return Scorer::cvalue;
  if (s == "both") return Scorer::both;
  return std::nullopt;
}

std::string_view scorer_name(Scorer s) {
  switch (s) {
    case Scorer::tfidf: return "tfidf";
    case Scorer::cvalue: return "cvalue";
    case Scorer::both: return "both";
  }
  return "both";
}

void apply_scores(CandidateSet& candidates, const corpus::CorpusIndex& index, Scorer scorer) {
  if (scorer != Scorer::cvalue) {
    for (auto& [k, c] : candidates) c.tfidf = score_tfidf(c, index);
  }
  if (scorer != Scorer::tfidf) {
    const auto cv = score_cvalue(candidates);
    for (auto& [k, c] : candidates) c.cvalue = cv.at(k);
  }
}

std::string_view relation_kind_name(RelationKind k) { return k == RelationKind::isa ? "isA" : "assoc"; }

PatternSet PatternSet::parse(std::string_view input) {
  PatternSet set;
  std::size_t line_no = 0;
  for (auto line : text::split(input, '\n')) {
    ++line_no;
    if (const auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    const auto trimmed = text::trim(line);
    if (trimmed.empty()) continue;
    IsaPattern p;
    p.text = trimmed;
    p.line = line_no;
    for (const auto& tok : text::split(trimmed, ' ')) {
      if (tok.empty() || !has_word_char(tok)) continue;
      p.tokens.push_back(tok == "X" || tok == "Y" ? tok : text::to_lower(tok));
    }
    const auto xs = std::count(p.tokens.begin(), p.tokens.end(), "X");
    const auto ys = std::count(p.tokens.begin(), p.tokens.end(), "Y");
    if (xs != 1 || ys != 1) {
      throw ParseError(Errc::malformed_pattern, line_no,
                       "template needs exactly one X and one Y slot: '" + p.text + "'");
    }
    if (p.tokens.size() < 3) {
      throw ParseError(Errc::malformed_pattern, line_no, "template has no literal lemma: '" + p.text + "'");
    }
    set.patterns_.push_back(std::move(p));
  }
  return set;
}

PatternSet PatternSet::load(const std::filesystem::path& path) { return parse(io::read_file(path)); }

std::vector<RelationEvidence> mine_isa(std::span<const AnalyzedDocument> docs, const CandidateSet& candidates,
                                       const PatternSet& patterns) {
  std::map<std::tuple<std::string, std::string, std::size_t>, RelationEvidence> found;
  for (const auto* doc : by_doc_id(docs)) {
    for (const auto& s : doc->sentences) {
      std::vector<std::string> lemmas;
      lemmas.reserve(s.tokens.size());
      for (const auto& t : s.tokens) {
        lemmas.push_back(t.status != linguistic::TokenStatus::ambiguous && t.resolved ? t.resolved->lemma
                                                                                      : std::string{});
      }
      for (std::size_t pi = 0; pi < patterns.patterns().size(); ++pi) {
        const auto& pattern = patterns.patterns()[pi];
        std::size_t start = 0;
        while (start < lemmas.size()) {
          SlotMatcher m(lemmas, candidates, pattern);
          if (!m.match(0, start)) {
            ++start;
            continue;
          }
          start = m.end();
          if (m.x() == m.y()) continue;
          auto [it, inserted] = found.try_emplace({m.x(), m.y(), pi});
          if (inserted) {
            it->second.subject = normal_form_of(m.x());
            it->second.predicate = RelationKind::isa;
            it->second.object = normal_form_of(m.y());
            it->second.source = pattern.text;
            it->second.doc_id = doc->doc_id;
            it->second.sentence_id = s.sentence_id;
          }
          it->second.weight += 1.0;
        }
      }
    }
  }
  std::vector<RelationEvidence> out;
  out.reserve(found.size());
  for (auto& [k, ev] : found) out.push_back(std::move(ev));
  return out;
}

std::vector<RelationEvidence> mine_assoc(std::span<const AnalyzedDocument> docs, const CandidateSet& candidates,
                                         double tau) {
  struct PairStats {
    std::size_t together = 0;
    DocId doc_id = 0;
    std::size_t sentence_id = 0;
  };
  std::map<std::string, std::size_t> occurs;
  std::map<std::pair<std::string, std::string>, PairStats> pairs;
  std::size_t sentence_count = 0;
  for (const auto* doc : by_doc_id(docs)) {
    for (const auto& s : doc->sentences) {
      ++sentence_count;
      const auto present = sentence_terms(s, candidates);
      for (auto x = present.begin(); x != present.end(); ++x) {
        ++occurs[*x];
        for (auto y = std::next(x); y != present.end(); ++y) {
          auto [it, inserted] = pairs.try_emplace({*x, *y});
          if (inserted) {
            it->second.doc_id = doc->doc_id;
            it->second.sentence_id = s.sentence_id;
          }
          ++it->second.together;
        }
      }
    }
  }
  std::vector<RelationEvidence> out;
  const double total = static_cast<double>(sentence_count);
  for (const auto& [xy, st] : pairs) {
    const double cx = static_cast<double>(occurs.at(xy.first));
    const double cy = static_cast<double>(occurs.at(xy.second));
    const double pmi = std::log(static_cast<double>(st.together) * total / (cx * cy));
    if (!(pmi > tau)) continue;
    RelationEvidence ev;
    ev.subject = candidates.at(xy.first).normal_form;
    ev.predicate = RelationKind::assoc;
    ev.object = candidates.at(xy.second).normal_form;
    ev.source = "pmi";
    ev.doc_id = st.doc_id;
    ev.sentence_id = st.sentence_id;
    ev.weight = pmi;
    out.push_back(std::move(ev));
  }
  return out;
}

std::optional<AmbiguityQuery> flag_lexical_ambiguity(const std::string& candidate_key,
                                                     std::span<const RelationEvidence> evidence) {
  std::set<std::string> neighbors;
  for (const auto& ev : evidence) {
    if (ev.predicate != RelationKind::assoc) continue;
    const auto s = key_of(ev.subject);
    const auto o = key_of(ev.object);
    if (s == candidate_key && o != candidate_key) neighbors.insert(o);
    if (o == candidate_key && s != candidate_key) neighbors.insert(s);
  }
  if (neighbors.size() < 4) return std::nullopt;

  std::map<std::string, std::vector<std::string>> adjacency;
  for (const auto& ev : evidence) {
    if (ev.predicate != RelationKind::assoc) continue;
    const auto s = key_of(ev.subject);
    const auto o = key_of(ev.object);
    if (neighbors.contains(s) && neighbors.contains(o)) {
      adjacency[s].push_back(o);
      adjacency[o].push_back(s);
    }
  }
  std::set<std::string> seen;
  std::vector<std::vector<std::string>> components;
  for (const auto& start : neighbors) {
    if (seen.contains(start)) continue;
    std::vector<std::string> component;
    std::vector<std::string> stack{start};
    seen.insert(start);
    while (!stack.empty()) {
      auto node = std::move(stack.back());
      stack.pop_back();
      for (const auto& next : adjacency[node]) {
        if (seen.insert(next).second) stack.push_back(next);
      }
      component.push_back(std::move(node));
    }
    if (component.size() >= 2) {
      std::sort(component.begin(), component.end());
      components.push_back(std::move(component));
    }
  }
  if (components.size() < 2) return std::nullopt;
  std::sort(components.begin(), components.end());
  return AmbiguityQuery{normal_form_of(candidate_key), std::move(components)};
}

}  // namespace ontoforge::extraction
