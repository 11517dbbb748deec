#include "ontoforge/error.hpp"

namespace ontoforge {

std::string_view errc_name(Errc code) {
  switch (code) {
    case Errc::unreadable_source: return "UnreadableSource";
    case Errc::empty_seed_set: return "EmptySeedSet";
    case Errc::relevance_unset: return "RelevanceUnset";
    case Errc::lexicon_format: return "LexiconFormat";
    case Errc::malformed_pattern: return "MalformedPattern";
    case Errc::duplicate_concept: return "DuplicateConcept";
    case Errc::malformed_id: return "MalformedId";
    case Errc::unknown_endpoint: return "UnknownEndpoint";
    case Errc::cycle: return "CycleError";
    case Errc::invalid_ontology: return "InvalidOntology";
    case Errc::parse_error: return "ParseError";
    case Errc::unknown_predicate: return "UnknownPredicate";
    case Errc::checksum_mismatch: return "ChecksumMismatch";
    case Errc::not_found: return "NotFound";
    case Errc::io_error: return "IoError";
    case Errc::invalid_match: return "InvalidMatch";
    case Errc::insufficient_input: return "InsufficientInput";
    case Errc::kind_mismatch: return "KindMismatch";
    case Errc::invalid_triad: return "InvalidTriad";
    case Errc::unbound_operation: return "UnboundOperation";
    case Errc::handler_failure: return "HandlerFailure";
    case Errc::malformed_trace: return "MalformedTrace";
    case Errc::invalid_manifest: return "InvalidManifest";
    case Errc::storage_unwritable: return "StorageUnwritable";
    case Errc::iteration_in_progress: return "IterationInProgress";
    case Errc::stage_failure: return "StageFailure";
    case Errc::unknown_item: return "UnknownItem";
    case Errc::already_resolved: return "AlreadyResolved";
    case Errc::invalid_resolution: return "InvalidResolution";
    case Errc::port_in_use: return "PortInUse";
  }
  return "Unknown";
}

}  // namespace ontoforge
