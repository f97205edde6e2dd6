#include <httplib.h>

#include <CLI11.hpp>
#include <cstdlib>
#include <filesystem>
#include <iostream>

#include "fundmatch/error.hpp"
#include "fundmatch/parallel.hpp"
#include "fundmatch/pipeline.hpp"
#include "fundmatch/service.hpp"
#include "fundmatch/stages.hpp"
#include "fundmatch/synth.hpp"

namespace fs = std::filesystem;
using namespace fundmatch;

namespace {

enum Exit { ok = 0, validation = 1, io = 2 };

struct Globals {
  std::string config;
  std::string dir = ".";
  int threads = 0;
};

// --config beats FUNDMATCH_CONFIG beats <dir>/config.json. Only the implicit
// default may be absent, in which case built-in defaults apply.
fs::path config_path(const Globals& g, bool* explicit_path = nullptr) {
  bool given = true;
  fs::path path;
  if (!g.config.empty()) {
    path = g.config;
  } else if (const char* env = std::getenv("FUNDMATCH_CONFIG"); env && *env) {
    path = env;
  } else {
    path = fs::path(g.dir) / "config.json";
    given = false;
  }
  if (explicit_path) *explicit_path = given;
  return path;
}

PipelineConfig load(const Globals& g) {
  bool given = false;
  auto path = config_path(g, &given);
  if (!given && !fs::exists(path)) return PipelineConfig{};
  return load_config(path);
}

void print_rejects(const std::vector<std::string>& rejects) {
  for (const auto& r : rejects) std::cerr << r << '\n';
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"fundmatch: match researchers to funding calls"};
  app.require_subcommand(1);
  Globals g;
  app.add_option("--config", g.config, "config file (default: $FUNDMATCH_CONFIG, then <dir>/config.json)");
  app.add_option("-d,--dir", g.dir, "workspace directory")->capture_default_str();
  app.add_option("--threads", g.threads, "cap on worker threads (0 = runtime default)")->check(CLI::NonNegativeNumber);

  auto* config_cmd = app.add_subcommand("config", "configuration files");
  config_cmd->require_subcommand(1);
  auto* config_init = config_cmd->add_subcommand("init", "write a default config");
  bool force = false;
  config_init->add_flag("--force", force, "overwrite an existing file");

  auto* ingest_cmd = app.add_subcommand("ingest", "validate raw inputs into the workspace");
  stages::IngestInputs inputs;
  std::string topics;
  ingest_cmd->add_option("--publications", inputs.publications, "publications (.jsonl or .csv)")->required();
  ingest_cmd->add_option("--calls", inputs.calls, "calls (.jsonl or .csv)")->required();
  ingest_cmd->add_option("--masters", inputs.masters, "institutional master list (.jsonl or .csv)")->required();
  ingest_cmd->add_option("--profiles", inputs.profiles, "source author profiles (.jsonl)")->required();
  ingest_cmd->add_option("--topics", topics, "optional doi,topic CSV used to enrich publications");

  auto* resolve_cmd = app.add_subcommand("resolve", "link source author profiles to researchers");
  auto* embed_cmd = app.add_subcommand("embed", "embed publications and calls");
  auto* score_cmd = app.add_subcommand("score", "build publication sets and score every call");
  std::string kernel = "omp";
  score_cmd->add_option("--kernel", kernel, "similarity kernel")->check(CLI::IsMember({"omp", "serial"}))->capture_default_str();
  auto* rank_cmd = app.add_subcommand("rank", "percentiles and assignments");
  auto* analyze_cmd = app.add_subcommand("analyze", "indicator summary, overlap and distributions");
  auto* report_cmd = app.add_subcommand("report", "markdown report");

  auto* synth_cmd = app.add_subcommand("synth", "generate a seeded synthetic corpus");
  SynthOptions so;
  std::string synth_out;
  std::optional<std::uint64_t> seed;
  synth_cmd->add_option("--researchers", so.researchers)->capture_default_str();
  synth_cmd->add_option("--calls", so.calls)->capture_default_str();
  synth_cmd->add_option("--themes", so.themes)->capture_default_str();
  synth_cmd->add_option("--min-pubs", so.min_pubs)->capture_default_str();
  synth_cmd->add_option("--max-pubs", so.max_pubs)->capture_default_str();
  synth_cmd->add_option("--seed", seed, "default: the config's seed");
  synth_cmd->add_option("-o,--out", synth_out, "output directory (default: <dir>/synth)");

  auto* serve_cmd = app.add_subcommand("serve", "HTTP service over the scored workspace");
  std::string host = "127.0.0.1";
  int port = 8080;
  serve_cmd->add_option("--host", host)->capture_default_str();
  serve_cmd->add_option("--port", port)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? ok : validation;
  }

  const fs::path ws = g.dir;
  try {
    parallel::set_max_threads(g.threads);
    if (config_init->parsed()) {
      auto path = config_path(g);
      if (fs::exists(path) && !force) {
        std::cerr << path.string() << ": exists (use --force to overwrite)\n";
        return validation;
      }
      if (path.has_parent_path()) fs::create_directories(path.parent_path());
      save_config(PipelineConfig{}, path);
      std::cout << "wrote " << path.string() << '\n';
      return ok;
    }
    const auto config = load(g);
    if (ingest_cmd->parsed()) {
      if (!topics.empty()) inputs.topics = topics;
      auto r = stages::ingest(inputs, ws, config);
      print_rejects(r.rejects);
      std::cout << "publications " << r.publications << ", calls " << r.calls << ", masters " << r.masters
                << ", profiles " << r.profiles << ", rejected " << r.rejects.size() << ", topic-enriched "
                << r.enriched << '\n';
    } else if (resolve_cmd->parsed()) {
      auto r = stages::resolve(ws, config);
      for (const auto& key : r.absorbed) std::cerr << "merged master " << key << " into another researcher\n";
      std::cout << "researchers " << r.researchers << ", unmatched source ids " << r.unmatched << '\n';
    } else if (embed_cmd->parsed()) {
      std::cout << "vectors " << stages::embed(ws, config) << '\n';
    } else if (score_cmd->parsed()) {
      auto choice = kernel == "serial" ? KernelChoice::serial : KernelChoice::omp;
      std::cout << "score rows " << stages::score(ws, config, choice) << '\n';
    } else if (rank_cmd->parsed()) {
      std::cout << "assignments " << stages::rank(ws, config) << '\n';
    } else if (analyze_cmd->parsed()) {
      stages::analyze(ws, config);
      std::cout << "wrote " << (ws / files::analytics).string() << '\n';
    } else if (report_cmd->parsed()) {
      stages::report(ws, config);
      std::cout << "wrote " << (ws / files::report).string() << '\n';
    } else if (synth_cmd->parsed()) {
      so.seed = seed.value_or(config.seed);
      so.reference_year = config.reference_year;
      auto corpus = synthesize(so);
      write_synth(corpus, synth_out.empty() ? ws / "synth" : fs::path(synth_out));
      std::cout << "publications " << corpus.publications.size() << ", calls " << corpus.calls.size()
                << ", researchers " << corpus.masters.size() << '\n';
    } else if (serve_cmd->parsed()) {
      auto corpus = std::make_shared<const Corpus>(load_workspace(ws, config.reference_year));
      Service service(make_snapshot(corpus, config));
      httplib::Server server;
      mount(server, service);
      std::cout << "snapshot " << service.snapshot()->snapshot_id << ", listening on " << host << ':' << port
                << std::endl;
      if (!server.listen(host, port)) {
        std::cerr << "cannot listen on " << host << ':' << port << '\n';
        return io;
      }
    }
    return ok;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return io;
  } catch (const fs::filesystem_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return io;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return validation;
  }
}
