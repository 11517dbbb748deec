#include "ontoforge/service.hpp"

#include <httplib.h>

#include <algorithm>

namespace ontoforge::control {

namespace fs = std::filesystem;
using nlohmann::json;

namespace {

void send(httplib::Response& res, int status, const json& body) {
  res.status = status;
  res.set_content(body.dump(), "application/json; charset=utf-8");
}

void send_error(httplib::Response& res, int status, std::string_view code, const std::string& message) {
  send(res, status, {{"error", code}, {"message", message}});
}

json candidate_row(const extraction::TermCandidate& c) {
  return {{"key", c.key()},         {"normal_form", c.normal_form}, {"surface_variants", c.surface_variants},
          {"freq", c.freq},         {"doc_freq", c.doc_freq},       {"tfidf", c.tfidf},
          {"cvalue", c.cvalue},     {"status", extraction::status_name(c.status)},
          {"provenance", c.provenance}};
}

template <typename F>
httplib::Server::Handler guarded(F f) {
  return [f](const httplib::Request& req, httplib::Response& res) {
    try {
      f(req, res);
    } catch (const Error& e) {
      send_error(res, http_status(e.code()), errc_name(e.code()), e.what());
    } catch (const json::exception& e) {
      send_error(res, 422, "BadRequest", e.what());
    } catch (const std::exception& e) {
      send_error(res, 422, "Failure", e.what());
    }
  };
}

json body_of(const httplib::Request& req) {
  try {
    return json::parse(req.body);
  } catch (const json::exception& e) {
    throw Error(Errc::invalid_resolution, std::string("request body is not JSON: ") + e.what());
  }
}

}  // namespace

int http_status(Errc code) {
  switch (code) {
    case Errc::not_found:
    case Errc::unknown_item: return 404;
    case Errc::iteration_in_progress:
    case Errc::already_resolved: return 409;
    default: return 422;
  }
}

Service::Service(fs::path root) : root_(std::move(root)), server_(std::make_unique<httplib::Server>()) {
  // No SO_REUSEPORT: a second server on a taken port must fail.
  server_->set_socket_options([](socket_t sock) {
    int yes = 1;
    ::setsockopt(sock, SOL_SOCKET, SO_REUSEADDR, reinterpret_cast<const char*>(&yes), sizeof yes);
  });
  routes();
}

Service::~Service() { stop(); }

Project Service::project(const std::string& id) const {
  if (!ontology::is_valid_concept_id(id)) throw Error(Errc::not_found, "no project '" + id + "'");
  return Project::open(root_ / id);
}

void Service::routes() {
  auto& s = *server_;
  s.Get("/projects", guarded([this](const httplib::Request&, httplib::Response& res) {
    json out = json::array();
    if (fs::is_directory(root_)) {
      std::vector<fs::path> dirs;
      for (const auto& e : fs::directory_iterator(root_)) {
        if (fs::is_regular_file(e.path() / "project.json")) dirs.push_back(e.path());
      }
      std::sort(dirs.begin(), dirs.end());
      for (const auto& d : dirs) {
        const auto p = Project::open(d);
        out.push_back({{"project_id", p.id()}, {"name", p.manifest().name}});
      }
    }
    send(res, 200, out);
  }));

  s.Post("/projects", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json body;
    try {
      body = json::parse(req.body);
    } catch (const json::exception& e) {
      throw Error(Errc::invalid_manifest, std::string("manifest is not JSON: ") + e.what());
    }
    if (body.is_object()) {
      if (!body.contains("architecture") || !body["architecture"].is_object()) body["architecture"] = json::object();
      body["architecture"]["storage_root"] = root_.string();
    }
    const auto p = Project::create(parse_manifest(body, fs::current_path()));
    send(res, 201, {{"project_id", p.id()}, {"manifest", manifest_json(p.manifest())}});
  }));

  s.Get(R"(/projects/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto p = project(req.matches[1]);
    const auto o = p.ontology();
    send(res, 200,
         {{"project_id", p.id()},
          {"manifest", manifest_json(p.manifest())},
          {"iterations_run", p.iterations_run()},
          {"stop_requested", p.stop_requested()},
          {"pending_decisions", p.queue().size()},
          {"concepts_total", o.concepts().size()},
          {"relations_total", o.relations().size()}});
  }));

  s.Get(R"(/projects/([^/]+)/candidates)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto p = project(req.matches[1]);
    std::optional<extraction::CandidateStatus> filter;
    if (req.has_param("status")) {
      filter = extraction::parse_status(req.get_param_value("status"));
      if (!filter) {
        send_error(res, 422, "BadRequest", "status must be pending, approved or rejected");
        return;
      }
    }
    json out = json::array();
    for (const auto& [_, c] : p.candidates()) {
      if (!filter || c.status == *filter) out.push_back(candidate_row(c));
    }
    send(res, 200, out);
  }));

  s.Get(R"(/projects/([^/]+)/queue)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    const auto p = project(req.matches[1]);
    json out = json::array();
    for (const auto& item : p.queue(req.has_param("all"))) out.push_back(item_json(item));
    send(res, 200, out);
  }));

  s.Post(R"(/projects/([^/]+)/decisions)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto p = project(req.matches[1]);
    const auto body = body_of(req);
    if (!body.is_object() || !body.contains("item_id") || !body["item_id"].is_string() || !body.contains("resolution")) {
      throw Error(Errc::invalid_resolution, "expected {item_id, resolution}");
    }
    const auto item = p.apply_decision(body["item_id"].get<std::string>(), parse_resolution(body["resolution"]));
    send(res, 200, item_json(item));
  }));

  s.Post(R"(/projects/([^/]+)/iterations)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto p = project(req.matches[1]);
    send(res, 201, report_json(p.run_iteration()));
  }));

  s.Get(R"(/projects/([^/]+)/reports)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    json out = json::array();
    for (const auto& r : project(req.matches[1]).reports()) out.push_back(report_json(r));
    send(res, 200, out);
  }));

  s.Get(R"(/projects/([^/]+)/ontology)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send(res, 200, graph_json(project(req.matches[1]).ontology()));
  }));

  s.Post(R"(/projects/([^/]+)/task-runs)", guarded([this](const httplib::Request& req, httplib::Response& res) {
    auto p = project(req.matches[1]);
    const auto body = body_of(req);
    TaskRunPaths paths;
    paths.objects = body.at("objects").get<std::string>();
    paths.processes = body.at("processes").get<std::string>();
    paths.tasks = body.at("tasks").get<std::string>();
    paths.links = body.at("links").get<std::string>();
    send(res, 201, p.run_task(paths));
  }));

  s.Get(R"(/projects/([^/]+)/task-runs/([^/]+))", guarded([this](const httplib::Request& req, httplib::Response& res) {
    send(res, 200, project(req.matches[1]).task_run(req.matches[2]));
  }));

  s.set_error_handler([](const httplib::Request&, httplib::Response& res) {
    if (res.body.empty()) send_error(res, res.status, "NotFound", "no such endpoint");
  });
}

int Service::bind(const std::string& host, int port) {
  if (port == 0) {
    const int bound = server_->bind_to_any_port(host);
    if (bound < 0) throw Error(Errc::port_in_use, "cannot bind " + host);
    return bound;
  }
  if (!server_->bind_to_port(host, port)) throw Error(Errc::port_in_use, "port " + std::to_string(port) + " is in use");
  return port;
}

void Service::listen() { server_->listen_after_bind(); }

void Service::stop() {
  if (server_ && server_->is_running()) server_->stop();
}

void serve(const Manifest& manifest) {
  Service service(manifest.architecture.storage_root);
  service.bind("0.0.0.0", manifest.architecture.port);
  service.listen();
}

}  // namespace ontoforge::control
