#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>
#include <string_view>

namespace ontoforge {

enum class Errc {
  unreadable_source,
  empty_seed_set,
  relevance_unset,
  lexicon_format,
  malformed_pattern,
  duplicate_concept,
  malformed_id,
  unknown_endpoint,
  cycle,
  invalid_ontology,
  parse_error,
  unknown_predicate,
  checksum_mismatch,
  not_found,
  io_error,
  invalid_match,
  insufficient_input,
  kind_mismatch,
  invalid_triad,
  unbound_operation,
  handler_failure,
  malformed_trace,
  invalid_manifest,
  storage_unwritable,
  iteration_in_progress,
  stage_failure,
  unknown_item,
  already_resolved,
  invalid_resolution,
  port_in_use,
};

// Stable CamelCase name, used in error bodies and reports.
std::string_view errc_name(Errc code);

class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}

  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

// Carries the 1-based line of the offending input.
class ParseError : public Error {
 public:
  ParseError(Errc code, std::size_t line, const std::string& what)
      : Error(code, "line " + std::to_string(line) + ": " + what), line_(line) {}

  std::size_t line() const noexcept { return line_; }

 private:
  std::size_t line_;
};

}  // namespace ontoforge
