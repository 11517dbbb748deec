#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "ontoforge/ontology.hpp"

namespace ontoforge::ontology {

struct LibraryEntry {
  std::string ontology_id;
  int version = 0;
  std::filesystem::path file;  // relative to the library root
  std::string sha256;
};

// Versioned store of exported ontologies: `<root>/<id>/v<version>.ttl` plus
// `catalog.json`. Stored versions are never rewritten.
class OntologyLibrary {
 public:
  explicit OntologyLibrary(std::filesystem::path root);

  // Returns (id, version); version = previous max + 1.
  std::pair<std::string, int> store(const Ontology& o);

  // Latest version when `version` is empty. Throws NotFound, ChecksumMismatch.
  Ontology load(const std::string& ontology_id, std::optional<int> version = std::nullopt) const;

  std::vector<std::string> ontology_ids() const;
  std::vector<int> versions(const std::string& ontology_id) const;
  std::optional<LibraryEntry> entry(const std::string& ontology_id, std::optional<int> version = std::nullopt) const;

  const std::filesystem::path& root() const { return root_; }

 private:
  void reload_locked() const;
  void save_locked() const;

  std::filesystem::path root_;
  mutable std::mutex mu_;
  mutable std::map<std::pair<std::string, int>, LibraryEntry> catalog_;
};

}  // namespace ontoforge::ontology
