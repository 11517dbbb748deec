#include "ontoforge/corpus.hpp"

#include <algorithm>
#include <sstream>

#include <httplib.h>
#include <json.hpp>

#include "ontoforge/error.hpp"
#include "ontoforge/io.hpp"
#include "ontoforge/text.hpp"

namespace fs = std::filesystem;

namespace ontoforge::corpus {

namespace {

bool is_url(const std::string& s) { return s.rfind("http://", 0) == 0 || s.rfind("https://", 0) == 0; }

std::string doc_file_name(DocId id) { return std::to_string(id) + ".txt"; }

}  // namespace

Fetcher http_fetcher() {
  return [](const std::string& url) -> std::string {
    if (url.rfind("https://", 0) == 0) {
      throw Error(Errc::unreadable_source, "https is not supported by the built-in fetcher: " + url);
    }
    const auto host_begin = std::string("http://").size();
    const auto path_begin = url.find('/', host_begin);
    const std::string origin = url.substr(0, path_begin);
    const std::string path = path_begin == std::string::npos ? "/" : url.substr(path_begin);
    httplib::Client client(origin);
    client.set_connection_timeout(10);
    client.set_read_timeout(30);
    auto res = client.Get(path);
    if (!res) throw Error(Errc::unreadable_source, "fetch failed: " + url);
    if (res->status != 200) {
      throw Error(Errc::unreadable_source, "HTTP " + std::to_string(res->status) + " for " + url);
    }
    return res->body;
  };
}

DocumentStore::DocumentStore(fs::path root, Fetcher fetcher)
    : root_(std::move(root)), fetcher_(std::move(fetcher)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(Errc::storage_unwritable, "cannot create " + root_.string());
  load();
}

void DocumentStore::load() {
  const fs::path manifest = root_ / "docs.jsonl";
  if (!fs::exists(manifest)) return;
  std::istringstream lines(io::read_file(manifest));
  std::string line;
  while (std::getline(lines, line)) {
    if (text::trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line);
    DocumentRecord rec;
    rec.doc_id = j.at("doc_id").get<DocId>();
    rec.source_uri = j.at("source_uri").get<std::string>();
    rec.title = j.at("title").get<std::string>();
    rec.fetched_at = j.at("fetched_at").get<std::string>();
    if (!j.at("relevance").is_null()) rec.relevance = j.at("relevance").get<double>();
    rec.body = io::read_file(root_ / doc_file_name(rec.doc_id));
    by_uri_[rec.source_uri] = rec.doc_id;
    docs_[rec.doc_id] = std::move(rec);
  }
}

void DocumentStore::save_manifest_locked() const {
  std::string out;
  for (const auto& [id, rec] : docs_) {
    nlohmann::json j{{"doc_id", rec.doc_id},
                     {"source_uri", rec.source_uri},
                     {"title", rec.title},
                     {"fetched_at", rec.fetched_at},
                     {"relevance", rec.relevance ? nlohmann::json(*rec.relevance) : nlohmann::json()}};
    out += j.dump();
    out += '\n';
  }
  io::write_file_atomic(root_ / "docs.jsonl", out);
}

IngestResult DocumentStore::ingest(const std::string& locator) {
  std::string uri;
  std::string title;
  bool remote = false;
  if (is_url(locator)) {
    uri = locator;
    title = locator;
    remote = true;
  } else {
    fs::path p = locator.rfind("file://", 0) == 0 ? fs::path(locator.substr(7)) : fs::path(locator);
    std::error_code ec;
    const fs::path canonical = fs::weakly_canonical(p, ec);
    uri = (ec ? p : canonical).string();
    title = p.stem().string();
  }

  {
    std::lock_guard lock(mu_);
    if (const auto it = by_uri_.find(uri); it != by_uri_.end()) {
      return {docs_.at(it->second), true};
    }
  }

  std::string body;
  if (remote) {
    body = fetcher_(uri);
  } else {
    if (!fs::is_regular_file(uri)) throw Error(Errc::unreadable_source, "not a readable file: " + uri);
    try {
      body = io::read_file(uri);
    } catch (const Error& e) {
      throw Error(Errc::unreadable_source, e.what());
    }
  }
  if (!text::valid_utf8(body)) throw Error(Errc::unreadable_source, "not valid UTF-8: " + uri);

  std::lock_guard lock(mu_);
  if (const auto it = by_uri_.find(uri); it != by_uri_.end()) return {docs_.at(it->second), true};
  DocumentRecord rec;
  rec.doc_id = docs_.empty() ? 1 : docs_.rbegin()->first + 1;
  rec.source_uri = uri;
  rec.title = title;
  rec.body = std::move(body);
  rec.fetched_at = io::utc_now();
  io::write_file_atomic(root_ / doc_file_name(rec.doc_id), rec.body);
  by_uri_[uri] = rec.doc_id;
  docs_[rec.doc_id] = rec;
  save_manifest_locked();
  return {std::move(rec), false};
}

DocumentStore::DirectoryResult DocumentStore::ingest_directory(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw Error(Errc::unreadable_source, "not a directory: " + dir.string());
  std::vector<fs::path> files;
  for (const auto& entry : fs::recursive_directory_iterator(dir)) {
    if (!entry.is_regular_file()) continue;
    if (entry.path().filename().string().starts_with('.')) continue;
    files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  DirectoryResult result;
  for (const auto& f : files) {
    try {
      result.ingested.push_back(ingest(f.string()));
    } catch (const Error& e) {
      result.failures.emplace_back(f.string(), e.what());
    }
  }
  return result;
}

std::vector<DocumentRecord> DocumentStore::documents() const {
  std::lock_guard lock(mu_);
  std::vector<DocumentRecord> out;
  out.reserve(docs_.size());
  for (const auto& [id, rec] : docs_) out.push_back(rec);
  return out;
}

std::optional<DocumentRecord> DocumentStore::find(DocId id) const {
  std::lock_guard lock(mu_);
  const auto it = docs_.find(id);
  if (it == docs_.end()) return std::nullopt;
  return it->second;
}

std::size_t DocumentStore::size() const {
  std::lock_guard lock(mu_);
  return docs_.size();
}

void DocumentStore::set_relevance(DocId id, double relevance) {
  std::lock_guard lock(mu_);
  const auto it = docs_.find(id);
  if (it == docs_.end()) throw Error(Errc::not_found, "no document " + std::to_string(id));
  it->second.relevance = std::clamp(relevance, 0.0, 1.0);
  save_manifest_locked();
}

double score_relevance(std::span<const std::string> lemmas, const std::set<std::string>& seeds) {
  if (seeds.empty()) throw Error(Errc::empty_seed_set, "relevance needs at least one seed lemma");
  std::set<std::string> folded_seeds;
  for (const auto& s : seeds) folded_seeds.insert(text::fold_case(s));
  std::set<std::string> present;
  for (const auto& l : lemmas) {
    auto f = text::fold_case(l);
    if (folded_seeds.contains(f)) present.insert(std::move(f));
  }
  return static_cast<double>(present.size()) / static_cast<double>(folded_seeds.size());
}

double score_relevance(const linguistic::AnalyzedDocument& doc, const std::set<std::string>& seeds) {
  const auto lemmas = linguistic::indexed_lemmas(doc);
  return score_relevance(std::span<const std::string>(lemmas), seeds);
}

std::size_t CorpusIndex::doc_frequency(const std::string& lemma) const {
  const auto it = postings.find(lemma);
  return it == postings.end() ? 0 : it->second.size();
}

CorpusIndex build_index(std::span<const linguistic::AnalyzedDocument> docs) {
  CorpusIndex index;
  std::vector<const linguistic::AnalyzedDocument*> ordered;
  for (const auto& d : docs) ordered.push_back(&d);
  std::sort(ordered.begin(), ordered.end(),
            [](const auto* a, const auto* b) { return a->doc_id < b->doc_id; });
  for (const auto* doc : ordered) {
    std::map<std::string, std::uint32_t> tf;
    std::size_t length = 0;
    for (const auto& lemma : linguistic::indexed_lemmas(*doc)) {
      ++tf[lemma];
      ++length;
    }
    index.doc_lengths[doc->doc_id] += length;
    for (const auto& [lemma, n] : tf) index.postings[lemma].push_back({doc->doc_id, n});
  }
  index.doc_count = index.doc_lengths.size();
  return index;
}

Corpus select_corpus(std::span<const DocumentRecord> docs, double threshold, std::string project_id) {
  Corpus corpus;
  corpus.project_id = std::move(project_id);
  corpus.threshold_used = threshold;
  for (const auto& d : docs) {
    if (!d.relevance) {
      throw Error(Errc::relevance_unset, "document " + std::to_string(d.doc_id) + " has no relevance score");
    }
    if (*d.relevance >= threshold) corpus.members.push_back(d.doc_id);
  }
  std::sort(corpus.members.begin(), corpus.members.end());
  corpus.members.erase(std::unique(corpus.members.begin(), corpus.members.end()), corpus.members.end());
  return corpus;
}

}  // namespace ontoforge::corpus
