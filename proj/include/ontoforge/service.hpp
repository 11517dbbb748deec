#pragma once

#include <filesystem>
#include <memory>
#include <string>

#include <json.hpp>

#include "ontoforge/control.hpp"

namespace httplib {
class Server;
}

namespace ontoforge::control {

// HTTP status for a domain error code.
int http_status(Errc code);

// JSON API over every project below `root`.
class Service {
 public:
  explicit Service(std::filesystem::path root);
  ~Service();

  // Port 0 picks a free port. Throws PortInUse.
  int bind(const std::string& host, int port);
  // Blocks until stop().
  void listen();
  void stop();

  const std::filesystem::path& root() const { return root_; }

 private:
  void routes();
  Project project(const std::string& id) const;

  std::filesystem::path root_;
  std::unique_ptr<httplib::Server> server_;
};

// Binds manifest.architecture.port and serves its storage root.
void serve(const Manifest& manifest);

}  // namespace ontoforge::control
