#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <mutex>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "ontoforge/linguistic.hpp"
#include "ontoforge/types.hpp"

namespace ontoforge::corpus {

struct DocumentRecord {
  DocId doc_id = 0;
  std::string source_uri;
  std::string title;
  std::string body;
  std::string fetched_at;
  std::optional<double> relevance;
};

struct IngestResult {
  DocumentRecord record;
  bool duplicate = false;
};

// Returns the body for an http(s) URL or throws Error(unreadable_source).
using Fetcher = std::function<std::string(const std::string& url)>;

Fetcher http_fetcher();

// One UTF-8 text file per document plus a `docs.jsonl` manifest.
class DocumentStore {
 public:
  explicit DocumentStore(std::filesystem::path root, Fetcher fetcher = http_fetcher());

  // `locator` is a file path, a file:// URI or an http(s) URL.
  IngestResult ingest(const std::string& locator);

  // Ingests every regular file below `dir` in path order; failures are
  // collected rather than thrown.
  struct DirectoryResult {
    std::vector<IngestResult> ingested;
    std::vector<std::pair<std::string, std::string>> failures;  // path, message
  };
  DirectoryResult ingest_directory(const std::filesystem::path& dir);

  std::vector<DocumentRecord> documents() const;
  std::optional<DocumentRecord> find(DocId id) const;
  std::size_t size() const;

  void set_relevance(DocId id, double relevance);

  const std::filesystem::path& root() const { return root_; }

 private:
  void load();
  void save_manifest_locked() const;

  std::filesystem::path root_;
  Fetcher fetcher_;
  mutable std::mutex mu_;
  std::map<DocId, DocumentRecord> docs_;
  std::map<std::string, DocId> by_uri_;
};

// |distinct seeds among lemmas| / |seeds|. Seeds are compared case-folded.
double score_relevance(std::span<const std::string> lemmas, const std::set<std::string>& seeds);
double score_relevance(const linguistic::AnalyzedDocument& doc, const std::set<std::string>& seeds);

struct Posting {
  DocId doc_id = 0;
  std::uint32_t term_frequency = 0;

  bool operator==(const Posting&) const = default;
};

struct CorpusIndex {
  std::size_t doc_count = 0;
  std::map<std::string, std::vector<Posting>> postings;
  std::map<DocId, std::size_t> doc_lengths;

  std::size_t doc_frequency(const std::string& lemma) const;
};

CorpusIndex build_index(std::span<const linguistic::AnalyzedDocument> docs);

struct Corpus {
  std::string project_id;
  std::vector<DocId> members;  // ascending
  double threshold_used = 0.0;
};

// Throws Error(relevance_unset) if any record lacks a score.
Corpus select_corpus(std::span<const DocumentRecord> docs, double threshold,
                     std::string project_id = {});

}  // namespace ontoforge::corpus
