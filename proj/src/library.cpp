#include "ontoforge/library.hpp"

#include <json.hpp>

#include "ontoforge/error.hpp"
#include "ontoforge/io.hpp"

namespace fs = std::filesystem;

namespace ontoforge::ontology {

OntologyLibrary::OntologyLibrary(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw Error(Errc::storage_unwritable, "cannot create library at " + root_.string());
  std::lock_guard lock(mu_);
  reload_locked();
}

// The catalog is re-read on every access so several handles (or processes)
// on one root observe each other's writes.
void OntologyLibrary::reload_locked() const {
  catalog_.clear();
  const auto path = root_ / "catalog.json";
  if (!fs::exists(path)) return;
  const auto j = nlohmann::json::parse(io::read_file(path));
  for (const auto& e : j.at("entries")) {
    LibraryEntry entry{e.at("id").get<std::string>(), e.at("version").get<int>(),
                       fs::path(e.at("file").get<std::string>()), e.at("sha256").get<std::string>()};
    catalog_[{entry.ontology_id, entry.version}] = std::move(entry);
  }
}

void OntologyLibrary::save_locked() const {
  auto entries = nlohmann::json::array();
  for (const auto& [key, e] : catalog_) {
    entries.push_back({{"id", e.ontology_id}, {"version", e.version}, {"file", e.file.string()}, {"sha256", e.sha256}});
  }
  io::write_file_atomic(root_ / "catalog.json", nlohmann::json{{"entries", entries}}.dump(2) + "\n");
}

std::pair<std::string, int> OntologyLibrary::store(const Ontology& o) {
  const auto body = export_triples(o);
  std::lock_guard lock(mu_);
  reload_locked();
  int version = 1;
  for (const auto& [key, e] : catalog_) {
    if (key.first == o.id()) version = std::max(version, key.second + 1);
  }
  const fs::path rel = fs::path(o.id()) / ("v" + std::to_string(version) + ".ttl");
  io::write_file_atomic(root_ / rel, body);
  catalog_[{o.id(), version}] = LibraryEntry{o.id(), version, rel, io::sha256_hex(body)};
  save_locked();
  return {o.id(), version};
}

std::optional<LibraryEntry> OntologyLibrary::entry(const std::string& ontology_id, std::optional<int> version) const {
  std::lock_guard lock(mu_);
  reload_locked();
  if (version) {
    const auto it = catalog_.find({ontology_id, *version});
    if (it == catalog_.end()) return std::nullopt;
    return it->second;
  }
  std::optional<LibraryEntry> latest;
  for (const auto& [key, e] : catalog_) {
    if (key.first == ontology_id) latest = e;
  }
  return latest;
}

Ontology OntologyLibrary::load(const std::string& ontology_id, std::optional<int> version) const {
  const auto e = entry(ontology_id, version);
  if (!e) {
    throw Error(Errc::not_found, "no ontology '" + ontology_id + "'" +
                                     (version ? " version " + std::to_string(*version) : std::string{}));
  }
  std::string body;
  try {
    body = io::read_file(root_ / e->file);
  } catch (const Error&) {
    throw Error(Errc::not_found, "library file missing: " + (root_ / e->file).string());
  }
  if (io::sha256_hex(body) != e->sha256) {
    throw Error(Errc::checksum_mismatch, "checksum mismatch for " + ontology_id + " v" + std::to_string(e->version));
  }
  auto o = import_triples(body);
  o.set_version(e->version);
  return o;
}

std::vector<std::string> OntologyLibrary::ontology_ids() const {
  std::lock_guard lock(mu_);
  reload_locked();
  std::vector<std::string> out;
  for (const auto& [key, e] : catalog_) {
    if (out.empty() || out.back() != key.first) out.push_back(key.first);
  }
  return out;
}

std::vector<int> OntologyLibrary::versions(const std::string& ontology_id) const {
  std::lock_guard lock(mu_);
  reload_locked();
  std::vector<int> out;
  for (const auto& [key, e] : catalog_) {
    if (key.first == ontology_id) out.push_back(key.second);
  }
  return out;
}

}  // namespace ontoforge::ontology
