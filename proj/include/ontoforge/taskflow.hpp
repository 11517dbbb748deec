#pragma once

#include <cstddef>
#include <filesystem>
#include <functional>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <json.hpp>

#include "ontoforge/error.hpp"
#include "ontoforge/ontology.hpp"

namespace ontoforge::taskflow {

inline constexpr std::size_t kMaxHierarchyDepth = 4;

// Objects and processes are static knowledge, tasks are dynamic. Crosslinks
// are invokesProcess (task -> process) and usesObject (process -> object).
struct TriadModel {
  ontology::Ontology objects;
  ontology::Ontology processes;
  ontology::Ontology tasks;
  std::vector<ontology::Relation> crosslinks;  // file order

  std::vector<std::string> invoked_processes(std::string_view task) const;
  std::vector<std::string> used_objects(std::string_view process) const;
};

// Tab-separated `subject<TAB>predicate<TAB>object` lines; `#` comments.
std::vector<ontology::Relation> parse_crosslinks(std::string_view text);

// Throws ParseError, KindMismatch, InvalidOntology.
TriadModel load_triad(const std::filesystem::path& objects, const std::filesystem::path& processes,
                      const std::filesystem::path& tasks, const std::filesystem::path& crosslinks);

// Same checks on already-parsed parts.
TriadModel make_triad(ontology::Ontology objects, ontology::Ontology processes, ontology::Ontology tasks,
                      std::vector<ontology::Relation> crosslinks);

enum class LinkViolationKind {
  missing_process_link,  // leaf task without invokesProcess
  missing_object_link,   // leaf process without usesObject
  wrong_kind,            // crosslink endpoint in the wrong ontology
  unknown_endpoint,      // crosslink endpoint in no ontology
  depth_exceeded,
  multiple_parents,      // task node with more than one parent
  link_on_composite,     // crosslink leaving a non-leaf node
};

std::string_view link_violation_name(LinkViolationKind k);

struct LinkViolation {
  LinkViolationKind kind;
  std::string node;
  std::string detail;
};

std::vector<LinkViolation> validate_links(const TriadModel& triad);

enum class EventKind { task_enter, process_enter, object_access, result, process_exit, task_exit };

std::string_view event_name(EventKind k);
std::optional<EventKind> parse_event(std::string_view name);

struct TraceEvent {
  std::size_t seq = 0;  // 1-based
  EventKind kind = EventKind::task_enter;
  std::string node;

  bool operator==(const TraceEvent&) const = default;
};

using ExecutionTrace = std::vector<TraceEvent>;

struct ObjectPayload {
  std::string concept_id;
  std::string label;
  std::string definition;
};

struct HandlerInput {
  std::string process_id;
  std::string process_label;
  std::vector<ObjectPayload> objects;  // declared order
  const std::map<std::string, std::string>* context = nullptr;  // project artifacts
};

// Returns the operation's result text; throwing aborts the run.
using OperationHandler = std::function<std::string(const HandlerInput&)>;

// Checklist of accessed object labels and definitions.
std::string default_stub(const HandlerInput& input);

class HandlerRegistry {
 public:
  explicit HandlerRegistry(bool allow_default_stub = true) : allow_stub_(allow_default_stub) {}

  void bind(std::string process_id, OperationHandler handler);
  // Explicit binding, else the stub when allowed, else nullptr.
  const OperationHandler* resolve(const std::string& process_id) const;

 private:
  bool allow_stub_;
  std::map<std::string, OperationHandler> handlers_;
  OperationHandler stub_ = default_stub;
};

struct Artifact {
  std::string node;  // producing leaf task
  std::string name;
  std::string body;
  std::string created_at;
};

struct ExecutionContext {
  std::map<std::string, std::string> artifacts;
  std::function<std::string()> clock;  // defaults to UTC now
};

struct ExecutionResult {
  ExecutionTrace trace;
  std::vector<Artifact> artifacts;
};

// Raised on HandlerFailure; carries the trace up to the failing operation.
class ExecutionError : public Error {
 public:
  ExecutionError(Errc code, const std::string& what, ExecutionTrace partial)
      : Error(code, what), partial_(std::move(partial)) {}

  const ExecutionTrace& partial_trace() const { return partial_; }

 private:
  ExecutionTrace partial_;
};

// Depth-first over the task hierarchy in declared child order. Throws
// InvalidTriad, UnboundOperation, or ExecutionError(HandlerFailure).
ExecutionResult execute(const TriadModel& triad, const HandlerRegistry& handlers,
                        const ExecutionContext& context = {});

// Throws MalformedTrace unless Enter/Exit events nest properly and every
// ProcessEnter sees a Result before its ProcessExit.
void check_well_nested(const ExecutionTrace& trace);

// `{seq} {kind} {node}`, two spaces of indent per nesting level.
std::string render_trace(const ExecutionTrace& trace);

nlohmann::json trace_to_json(const ExecutionTrace& trace);

}  // namespace ontoforge::taskflow
