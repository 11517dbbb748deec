#include <CLI11.hpp>

#include <filesystem>
#include <iostream>

#include "ontoforge/control.hpp"
#include "ontoforge/integration.hpp"
#include "ontoforge/io.hpp"
#include "ontoforge/library.hpp"
#include "ontoforge/service.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace ontoforge;

namespace {

ontology::Ontology read_ontology(const fs::path& path) {
  auto o = ontology::import_triples(io::read_file(path));
  if (const auto v = ontology::validate(o); !v.empty()) {
    throw Error(Errc::invalid_ontology, path.string() + ": " + std::string(ontology::violation_name(v.front().kind)) +
                                            " " + v.front().detail);
  }
  return o;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"ontoforge: iterative ontology construction workbench"};
  app.require_subcommand(1);

  std::string project_dir, manifest_path, path, url, item, lemma, pos, out, left, right, report, lib, root = "store";
  std::string objects, processes, tasks, links;
  bool approve = false, reject = false;
  std::size_t k = 2;
  int port = 8080;

  auto* init = app.add_subcommand("init", "Create a project from a manifest");
  init->add_option("--manifest", manifest_path, "project.json")->required();

  auto* ingest = app.add_subcommand("ingest", "Add documents to a project");
  ingest->add_option("--project", project_dir)->required();
  auto* opt_path = ingest->add_option("--path", path, "file or directory");
  auto* opt_url = ingest->add_option("--url", url);
  opt_path->excludes(opt_url);
  ingest->require_option(1, 2);

  auto* iterate = app.add_subcommand("iterate", "Run one iteration");
  iterate->add_option("--project", project_dir)->required();

  auto* decide = app.add_subcommand("decide", "Resolve a queue item");
  decide->add_option("--project", project_dir)->required();
  decide->add_option("--item", item)->required();
  auto* opt_approve = decide->add_flag("--approve", approve);
  auto* opt_reject = decide->add_flag("--reject", reject);
  opt_approve->excludes(opt_reject);
  decide->add_option("--lemma", lemma, "homonymy reading");
  decide->add_option("--pos", pos, "homonymy reading");

  auto* exp = app.add_subcommand("export", "Write the project ontology");
  exp->add_option("--project", project_dir)->required();
  exp->add_option("--out", out)->required();

  auto* mrg = app.add_subcommand("merge", "Align and merge two ontologies");
  mrg->add_option("--left", left)->required()->check(CLI::ExistingFile);
  mrg->add_option("--right", right)->required()->check(CLI::ExistingFile);
  mrg->add_option("--out", out)->required();
  mrg->add_option("--report", report, "merge report (JSON lines)");

  auto* conv = app.add_subcommand("converge", "Concepts shared by at least k library ontologies");
  conv->add_option("--lib", lib)->required()->check(CLI::ExistingDirectory);
  conv->add_option("--k", k)->check(CLI::Range(2, 1000));

  auto* run = app.add_subcommand("run-task", "Execute a triad model");
  run->add_option("--project", project_dir)->required();
  run->add_option("--objects", objects)->required()->check(CLI::ExistingFile);
  run->add_option("--processes", processes)->required()->check(CLI::ExistingFile);
  run->add_option("--tasks", tasks)->required()->check(CLI::ExistingFile);
  run->add_option("--links", links)->required()->check(CLI::ExistingFile);

  auto* srv = app.add_subcommand("serve", "Serve the HTTP API");
  srv->add_option("--port", port)->check(CLI::Range(0, 65535));
  srv->add_option("--root", root, "storage root");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 2;
  }
  if (decide->parsed() && !approve && !reject) {
    std::cerr << "decide: one of --approve or --reject is required\n";
    return 2;
  }

  try {
    if (init->parsed()) {
      const auto p = control::Project::create(control::load_manifest(manifest_path));
      std::cout << p.dir().string() << "\n";
    } else if (ingest->parsed()) {
      auto p = control::Project::open(project_dir);
      if (!url.empty()) {
        const auto r = p.ingest(url);
        std::cout << r.record.doc_id << (r.duplicate ? " duplicate " : " ") << r.record.source_uri << "\n";
      } else if (fs::is_directory(path)) {
        const auto r = p.ingest_directory(path);
        for (const auto& d : r.ingested) {
          std::cout << d.record.doc_id << (d.duplicate ? " duplicate " : " ") << d.record.source_uri << "\n";
        }
        for (const auto& [file, message] : r.failures) std::cerr << "failed " << file << ": " << message << "\n";
        if (!r.failures.empty()) return 1;
      } else {
        const auto r = p.ingest(path);
        std::cout << r.record.doc_id << (r.duplicate ? " duplicate " : " ") << r.record.source_uri << "\n";
      }
    } else if (iterate->parsed()) {
      auto p = control::Project::open(project_dir);
      std::cout << control::report_json(p.run_iteration()).dump(2) << "\n";
    } else if (decide->parsed()) {
      auto p = control::Project::open(project_dir);
      control::Resolution r;
      r.approve = approve;
      if (!lemma.empty()) r.lemma = lemma;
      if (!pos.empty()) r.pos = pos;
      r.actor = "cli";
      std::cout << control::item_json(p.apply_decision(item, r)).dump(2) << "\n";
    } else if (exp->parsed()) {
      const auto p = control::Project::open(project_dir);
      io::write_file_atomic(out, ontology::export_triples(p.ontology()));
    } else if (mrg->parsed()) {
      const auto a = read_ontology(left);
      const auto b = read_ontology(right);
      const auto matches = integration::align(a, b);
      const auto merged = integration::merge(a, b, matches);
      io::write_file_atomic(out, ontology::export_triples(merged.ontology));
      if (!report.empty()) io::write_file_atomic(report, merged.report_jsonl());
      std::cout << matches.size() << " matches, " << merged.ontology.concepts().size() << " concepts\n";
    } else if (conv->parsed()) {
      const ontology::OntologyLibrary library(lib);
      std::vector<ontology::Ontology> all;
      for (const auto& id : library.ontology_ids()) all.push_back(library.load(id));
      for (const auto& c : integration::convergence_clusters(all, k)) {
        json members = json::array();
        for (const auto& [o, concept_id] : c.members) members.push_back({o, concept_id});
        std::cout << json{{"label", c.label}, {"support", c.support}, {"members", members}}.dump() << "\n";
      }
    } else if (run->parsed()) {
      auto p = control::Project::open(project_dir);
      const auto doc = p.run_task({objects, processes, tasks, links});
      std::cout << doc["run_id"].get<std::string>() << "\n" << doc["rendered"].get<std::string>();
    } else if (srv->parsed()) {
      control::Service service(root);
      const int bound = service.bind("0.0.0.0", port);
      std::cerr << "listening on port " << bound << ", root " << root << "\n";
      service.listen();
    }
  } catch (const Error& e) {
    std::cerr << errc_name(e.code()) << ": " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
