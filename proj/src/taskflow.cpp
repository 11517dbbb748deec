#include "ontoforge/taskflow.hpp"

#include <algorithm>
#include <functional>
#include <set>

#include "ontoforge/io.hpp"
#include "ontoforge/text.hpp"

namespace ontoforge::taskflow {

using ontology::Ontology;
using ontology::OntologyKind;
using ontology::Predicate;

namespace {

void require_kind(const Ontology& o, OntologyKind expected, std::string_view role) {
  if (o.kind() != expected) {
    throw Error(Errc::kind_mismatch, std::string(role) + " ontology '" + o.id() + "' has kind " +
                                         std::string(ontology::kind_name(o.kind())) + ", expected " +
                                         std::string(ontology::kind_name(expected)));
  }
  if (const auto v = ontology::validate(o); !v.empty()) {
    throw Error(Errc::invalid_ontology, std::string(role) + " ontology '" + o.id() + "': " +
                                            std::string(ontology::violation_name(v.front().kind)) + " " +
                                            v.front().detail);
  }
}

bool is_leaf(const Ontology& o, const std::string& id) { return o.targets(id, Predicate::decomposes_to).empty(); }

// 1-based depth along the longest decomposesTo chain from a root.
std::map<std::string, std::size_t> depths(const Ontology& o) {
  std::map<std::string, std::size_t> memo;
  std::function<std::size_t(const std::string&, std::size_t)> depth_of = [&](const std::string& id,
                                                                             std::size_t guard) -> std::size_t {
    if (const auto it = memo.find(id); it != memo.end()) return it->second;
    std::size_t d = 1;
    if (guard <= o.concepts().size()) {
      for (const auto& parent : o.sources_of(id, Predicate::decomposes_to)) {
        d = std::max(d, depth_of(parent, guard + 1) + 1);
      }
    }
    memo[id] = d;
    return d;
  };
  for (const auto& [id, _] : o.concepts()) depth_of(id, 0);
  return memo;
}

class Runner {
 public:
  Runner(const TriadModel& triad, const HandlerRegistry& handlers, const ExecutionContext& context)
      : triad_(triad), handlers_(handlers), context_(context) {}

  ExecutionResult run() {
    for (const auto& [id, _] : triad_.tasks.concepts()) {
      if (triad_.tasks.sources_of(id, Predicate::decomposes_to).empty()) run_task(id);
    }
    return std::move(result_);
  }

 private:
  void emit(EventKind kind, const std::string& node) {
    result_.trace.push_back({result_.trace.size() + 1, kind, node});
  }

  void run_task(const std::string& task) {
    emit(EventKind::task_enter, task);
    const auto children = triad_.tasks.targets(task, Predicate::decomposes_to);
    if (children.empty()) {
      std::vector<std::string> outputs;
      for (const auto& p : triad_.invoked_processes(task)) outputs.push_back(run_process(p));
      const auto* c = triad_.tasks.find(task);
      result_.artifacts.push_back({task, c ? c->preferred_label : task, text::join(outputs, "\n"),
                                   context_.clock ? context_.clock() : io::utc_now()});
    } else {
      for (const auto& child : children) run_task(child);
    }
    emit(EventKind::task_exit, task);
  }

  std::string run_process(const std::string& process) {
    emit(EventKind::process_enter, process);
    const auto children = triad_.processes.targets(process, Predicate::decomposes_to);
    std::string output;
    if (children.empty()) {
      HandlerInput input;
      input.process_id = process;
      const auto* pc = triad_.processes.find(process);
      input.process_label = pc ? pc->preferred_label : process;
      input.context = &context_.artifacts;
      for (const auto& obj : triad_.used_objects(process)) {
        emit(EventKind::object_access, obj);
        const auto* oc = triad_.objects.find(obj);
        input.objects.push_back({obj, oc ? oc->preferred_label : obj,
                                 oc && oc->definition ? *oc->definition : std::string{}});
      }
      const OperationHandler* handler = handlers_.resolve(process);
      try {
        output = (*handler)(input);
      } catch (const std::exception& e) {
        throw ExecutionError(Errc::handler_failure, "operation '" + process + "' failed: " + e.what(),
                             result_.trace);
      }
    } else {
      std::vector<std::string> parts;
      for (const auto& child : children) parts.push_back(run_process(child));
      output = text::join(parts, "\n");
    }
    emit(EventKind::result, process);
    emit(EventKind::process_exit, process);
    return output;
  }

  const TriadModel& triad_;
  const HandlerRegistry& handlers_;
  const ExecutionContext& context_;
  ExecutionResult result_;
};

}  // namespace

std::vector<std::string> TriadModel::invoked_processes(std::string_view task) const {
  std::vector<std::string> out;
  for (const auto& r : crosslinks) {
    if (r.predicate == Predicate::invokes_process && r.subject == task) out.push_back(r.object);
  }
  return out;
}

std::vector<std::string> TriadModel::used_objects(std::string_view process) const {
  std::vector<std::string> out;
  for (const auto& r : crosslinks) {
    if (r.predicate == Predicate::uses_object && r.subject == process) out.push_back(r.object);
  }
  return out;
}

std::vector<ontology::Relation> parse_crosslinks(std::string_view input) {
  std::vector<ontology::Relation> out;
  std::size_t line_no = 0;
  for (auto line : text::split(input, '\n')) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (text::trim(line).empty() || line.front() == '#') continue;
    const auto cols = text::split(line, '\t');
    if (cols.size() != 3) throw ParseError(Errc::parse_error, line_no, "expected three tab-separated columns");
    const auto pred = ontology::parse_predicate(cols[1]);
    if (!pred || (*pred != Predicate::invokes_process && *pred != Predicate::uses_object)) {
      throw ParseError(Errc::unknown_predicate, line_no, "crosslink predicate must be invokesProcess or usesObject");
    }
    for (const auto* id : {&cols[0], &cols[2]}) {
      if (!ontology::is_valid_concept_id(*id)) throw ParseError(Errc::parse_error, line_no, "malformed id '" + *id + "'");
    }
    out.push_back({cols[0], *pred, cols[2], 1.0, std::nullopt});
  }
  return out;
}

TriadModel make_triad(Ontology objects, Ontology processes, Ontology tasks, std::vector<ontology::Relation> crosslinks) {
  require_kind(objects, OntologyKind::object, "object");
  require_kind(processes, OntologyKind::process, "process");
  require_kind(tasks, OntologyKind::task, "task");
  objects.set_mutability(ontology::Mutability::fixed);
  processes.set_mutability(ontology::Mutability::fixed);
  tasks.set_mutability(ontology::Mutability::dynamic);
  return {std::move(objects), std::move(processes), std::move(tasks), std::move(crosslinks)};
}

TriadModel load_triad(const std::filesystem::path& objects, const std::filesystem::path& processes,
                      const std::filesystem::path& tasks, const std::filesystem::path& crosslinks) {
  return make_triad(ontology::import_triples(io::read_file(objects)),
                    ontology::import_triples(io::read_file(processes)),
                    ontology::import_triples(io::read_file(tasks)), parse_crosslinks(io::read_file(crosslinks)));
}

std::string_view link_violation_name(LinkViolationKind k) {
  switch (k) {
    case LinkViolationKind::missing_process_link: return "MissingProcessLink";
    case LinkViolationKind::missing_object_link: return "MissingObjectLink";
    case LinkViolationKind::wrong_kind: return "WrongKind";
    case LinkViolationKind::unknown_endpoint: return "UnknownEndpoint";
    case LinkViolationKind::depth_exceeded: return "DepthExceeded";
    case LinkViolationKind::multiple_parents: return "MultipleParents";
    case LinkViolationKind::link_on_composite: return "LinkOnComposite";
  }
  return "Unknown";
}

std::vector<LinkViolation> validate_links(const TriadModel& triad) {
  std::vector<LinkViolation> out;
  auto check_end = [&](const std::string& id, const Ontology& expected, std::string_view role,
                       const std::string& link) {
    if (expected.find(id)) return true;
    const bool elsewhere = triad.objects.find(id) || triad.processes.find(id) || triad.tasks.find(id);
    out.push_back({elsewhere ? LinkViolationKind::wrong_kind : LinkViolationKind::unknown_endpoint, id,
                   link + ": expected a " + std::string(role) + " node"});
    return false;
  };
  for (const auto& r : triad.crosslinks) {
    const auto link = r.subject + " " + std::string(ontology::predicate_name(r.predicate)) + " " + r.object;
    if (r.predicate == Predicate::invokes_process) {
      if (check_end(r.subject, triad.tasks, "task", link) && !is_leaf(triad.tasks, r.subject)) {
        out.push_back({LinkViolationKind::link_on_composite, r.subject, link});
      }
      check_end(r.object, triad.processes, "process", link);
    } else if (r.predicate == Predicate::uses_object) {
      if (check_end(r.subject, triad.processes, "process", link) && !is_leaf(triad.processes, r.subject)) {
        out.push_back({LinkViolationKind::link_on_composite, r.subject, link});
      }
      check_end(r.object, triad.objects, "object", link);
    } else {
      out.push_back({LinkViolationKind::wrong_kind, r.subject, link + ": not a crosslink predicate"});
    }
  }
  for (const auto& [id, _] : triad.tasks.concepts()) {
    if (is_leaf(triad.tasks, id) && triad.invoked_processes(id).empty()) {
      out.push_back({LinkViolationKind::missing_process_link, id, "leaf task invokes no process"});
    }
    if (triad.tasks.sources_of(id, Predicate::decomposes_to).size() > 1) {
      out.push_back({LinkViolationKind::multiple_parents, id, "task has more than one parent"});
    }
  }
  for (const auto& [id, _] : triad.processes.concepts()) {
    if (is_leaf(triad.processes, id) && triad.used_objects(id).empty()) {
      out.push_back({LinkViolationKind::missing_object_link, id, "leaf process uses no object"});
    }
  }
  for (const auto* o : {&triad.processes, &triad.tasks}) {
    for (const auto& [id, d] : depths(*o)) {
      if (d == kMaxHierarchyDepth + 1) {
        out.push_back({LinkViolationKind::depth_exceeded, id, "hierarchy deeper than " +
                                                                  std::to_string(kMaxHierarchyDepth) + " levels"});
      }
    }
  }
  return out;
}

std::string default_stub(const HandlerInput& input) {
  std::string out = "# " + input.process_label + "\n";
  for (const auto& o : input.objects) {
    out += "- [ ] " + o.label;
    if (!o.definition.empty()) out += ": " + o.definition;
    out += "\n";
  }
  return out;
}

void HandlerRegistry::bind(std::string process_id, OperationHandler handler) {
  handlers_[std::move(process_id)] = std::move(handler);
}

const OperationHandler* HandlerRegistry::resolve(const std::string& process_id) const {
  if (const auto it = handlers_.find(process_id); it != handlers_.end()) return &it->second;
  return allow_stub_ ? &stub_ : nullptr;
}

std::string_view event_name(EventKind k) {
  switch (k) {
    case EventKind::task_enter: return "TaskEnter";
    case EventKind::process_enter: return "ProcessEnter";
    case EventKind::object_access: return "ObjectAccess";
    case EventKind::result: return "Result";
    case EventKind::process_exit: return "ProcessExit";
    case EventKind::task_exit: return "TaskExit";
  }
  return "Result";
}

std::optional<EventKind> parse_event(std::string_view name) {
  for (const auto k : {EventKind::task_enter, EventKind::process_enter, EventKind::object_access, EventKind::result,
                       EventKind::process_exit, EventKind::task_exit}) {
    if (event_name(k) == name) return k;
  }
  return std::nullopt;
}

ExecutionResult execute(const TriadModel& triad, const HandlerRegistry& handlers, const ExecutionContext& context) {
  if (const auto v = validate_links(triad); !v.empty()) {
    throw Error(Errc::invalid_triad, std::to_string(v.size()) + " link violation(s), first: " +
                                         std::string(link_violation_name(v.front().kind)) + " at " + v.front().node);
  }
  for (const auto& [id, _] : triad.processes.concepts()) {
    if (is_leaf(triad.processes, id) && !handlers.resolve(id)) {
      throw Error(Errc::unbound_operation, "no handler bound to operation '" + id + "'");
    }
  }
  return Runner(triad, handlers, context).run();
}

void check_well_nested(const ExecutionTrace& trace) {
  struct Frame {
    EventKind kind;
    const std::string* node;
    bool has_result;
  };
  std::vector<Frame> stack;
  std::size_t last_seq = 0;
  auto fail = [](const TraceEvent& e, const std::string& why) {
    throw Error(Errc::malformed_trace, "event " + std::to_string(e.seq) + " (" + std::string(event_name(e.kind)) +
                                          " " + e.node + "): " + why);
  };
  for (const auto& e : trace) {
    if (e.seq <= last_seq) fail(e, "sequence numbers must increase");
    last_seq = e.seq;
    switch (e.kind) {
      case EventKind::task_enter:
        if (!stack.empty() && stack.back().kind != EventKind::task_enter) fail(e, "task entered inside a process");
        stack.push_back({e.kind, &e.node, false});
        break;
      case EventKind::process_enter:
        if (stack.empty()) fail(e, "process entered outside a task");
        stack.push_back({e.kind, &e.node, false});
        break;
      case EventKind::object_access:
        if (stack.empty() || stack.back().kind != EventKind::process_enter || stack.back().has_result) {
          fail(e, "object access outside an open process");
        }
        break;
      case EventKind::result:
        if (stack.empty() || stack.back().kind != EventKind::process_enter || *stack.back().node != e.node ||
            stack.back().has_result) {
          fail(e, "result without a matching open process");
        }
        stack.back().has_result = true;
        break;
      case EventKind::process_exit:
        if (stack.empty() || stack.back().kind != EventKind::process_enter || *stack.back().node != e.node) {
          fail(e, "unbalanced process exit");
        }
        if (!stack.back().has_result) fail(e, "process exited without a result");
        stack.pop_back();
        break;
      case EventKind::task_exit:
        if (stack.empty() || stack.back().kind != EventKind::task_enter || *stack.back().node != e.node) {
          fail(e, "unbalanced task exit");
        }
        stack.pop_back();
        break;
    }
  }
  if (!stack.empty()) {
    throw Error(Errc::malformed_trace, "trace ends with " + std::to_string(stack.size()) + " open frame(s)");
  }
}

std::string render_trace(const ExecutionTrace& trace) {
  check_well_nested(trace);
  std::string out;
  std::size_t depth = 0;
  for (const auto& e : trace) {
    const bool exit = e.kind == EventKind::process_exit || e.kind == EventKind::task_exit;
    if (exit) --depth;
    out.append(depth * 2, ' ');
    out += std::to_string(e.seq) + " " + std::string(event_name(e.kind)) + " " + e.node + "\n";
    if (e.kind == EventKind::task_enter || e.kind == EventKind::process_enter) ++depth;
  }
  return out;
}

nlohmann::json trace_to_json(const ExecutionTrace& trace) {
  auto arr = nlohmann::json::array();
  for (const auto& e : trace) arr.push_back({{"seq", e.seq}, {"kind", event_name(e.kind)}, {"node", e.node}});
  return arr;
}

}  // namespace ontoforge::taskflow
