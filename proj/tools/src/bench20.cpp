#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "petacat/errors.hpp"
#include "petacat/master.hpp"
#include "petacat/skygen.hpp"
#include "petacat/store.hpp"
#include "petacat_cli/cli.hpp"

#ifndef PETACAT_QUERIES_FILE
#define PETACAT_QUERIES_FILE "queries/twenty.txt"
#endif

namespace petacat::cli {
namespace {

namespace fs = std::filesystem;

void replace_all(std::string& s, const std::string& from, const std::string& to) {
  for (std::size_t pos = s.find(from); pos != std::string::npos; pos = s.find(from, pos + to.size())) {
    s.replace(pos, from.size(), to);
  }
}

// Seeded reference survey: a mix of every object kind.
void build_reference(const fs::path& work, std::uint64_t seed, std::uint64_t objects) {
  skygen::SurveyConfig cfg;
  cfg.n_objects = objects;
  cfg.passes = 20;
  cfg.seed = seed;
  cfg.periodic_fraction = 0.05;
  cfg.transient_fraction = 0.03;
  cfg.mover_fraction = 0.02;
  const skygen::Survey s = skygen::generate_survey(cfg);
  skygen::write_survey((work / "survey").string(), cfg, s);
  ingest_detections(s.detections, 8, (work / "store").string());
  Store store((work / "store").string());
  build_indexes(store, 1.0);
  build_master(store, 1.0);

  std::ofstream poly(work / "octant.txt");
  poly << "# first octant: x >= 0, y >= 0, z >= 0\n1 0 0 0\n0 1 0 0\n0 0 1 0\n";
  if (!poly) throw IoError("cannot write " + (work / "octant.txt").string());
}

}  // namespace

void register_bench20(CLI::App& app, Context& ctx) {
  struct Args {
    std::string work = "bench20", queries = PETACAT_QUERIES_FILE, format = "csv";
    std::uint64_t seed = 0;
    std::uint64_t objects = 2000;
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("bench20", "Build a seeded reference store and time the twenty shipped queries");
  sub->add_option("--work", a->work, "Working directory for the reference store")->capture_default_str();
  sub->add_option("--queries", a->queries, "Query file, one invocation per line")->capture_default_str();
  sub->add_option("--seed", a->seed, "Seed for the reference survey")->required();
  sub->add_option("--objects", a->objects, "Objects in the reference survey")->capture_default_str();
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    std::ifstream in(a->queries);
    if (!in) throw IoError("cannot open query file " + a->queries);
    const fs::path work(a->work);
    fs::create_directories(work);
    build_reference(work, a->seed, a->objects);

    Table t{{"query", "command", "exit_code", "seconds", "output_bytes"}, {}};
    std::string line;
    int index = 0;
    int failures = 0;
    while (std::getline(in, line)) {
      if (line.empty() || line[0] == '#') continue;
      ++index;
      std::string cmd = line;
      replace_all(cmd, "{store}", (work / "store").string());
      replace_all(cmd, "{survey}", (work / "survey").string());
      replace_all(cmd, "{work}", work.string());
      std::ostringstream out, err;
      const auto t0 = std::chrono::steady_clock::now();
      const int code = run_cli(split_command_line(cmd), out, err);
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      if (code != kExitOk) {
        ++failures;
        ctx.err << "query " << index << " failed (exit " << code << "): " << err.str();
      }
      t.add({Cell(index), line, Cell(code), Cell(secs), Cell(out.str().size())});
    }
    render(t, parse_format(a->format), ctx.out);
    if (failures > 0) throw IoError(std::to_string(failures) + " of " + std::to_string(index) + " queries failed");
  });
}

}  // namespace petacat::cli
