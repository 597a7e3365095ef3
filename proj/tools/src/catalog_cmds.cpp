#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <sstream>

#include "commands.hpp"
#include "petacat/errors.hpp"
#include "petacat/master.hpp"
#include "petacat/neighbors.hpp"
#include "petacat/predicate.hpp"
#include "petacat/scan.hpp"
#include "petacat/skygen.hpp"
#include "petacat/store.hpp"
#include "petacat/units.hpp"
#include "util.hpp"

namespace petacat::cli {

double angle_arg(const std::string& text, const char* default_unit) {
  const bool bare = !text.empty() && text.find_first_not_of("0123456789.+-eE") == std::string::npos;
  return parse_angle(bare ? text + default_unit : text);
}

std::vector<Detection> read_detection_file(const std::string& path) {
  if (path.size() >= 4 && path.compare(path.size() - 4, 4, ".csv") == 0) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open " + path);
    return read_detections_csv(in);
  }
  return read_detections(path);
}

std::vector<MasterObject> load_masters(const Store& store) {
  if (!store.manifest().masters_built) {
    throw ValidationError("store " + store.dir() + " has no master catalog; run `petacat master` first");
  }
  return read_masters_csv(masters_path(store));
}

std::uint32_t count_passes(const std::vector<Detection>& detections) {
  std::set<std::uint32_t> passes;
  for (const auto& d : detections) passes.insert(d.pass_id);
  return static_cast<std::uint32_t>(passes.size());
}

namespace {

Region parse_cone(const std::string& text) {
  std::vector<std::string> parts;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) parts.push_back(item);
  if (parts.size() != 3) throw ValidationError("--cone expects \"ra,dec,radius\", got '" + text + "'");
  const double ra = angle_arg(parts[0], "d") * kRadToDeg;
  const double dec = angle_arg(parts[1], "d") * kRadToDeg;
  const double r = angle_arg(parts[2], "d");
  return make_cone(ra, dec, r);
}

void emit_detections(const std::vector<Detection>& dets, Format f, std::ostream& out) {
  if (f == Format::kCsv) {
    write_detections_csv(out, dets);
    return;
  }
  Table t;
  for (const auto* name : kFieldNames) t.columns.push_back(name);
  for (const auto& d : dets) {
    t.add({Cell(d.det_id), Cell(d.pass_id), Cell(d.mjd), Cell(d.ra), Cell(d.dec), Cell(static_cast<double>(d.flux)),
           Cell(static_cast<double>(d.flux_err)), Cell(d.flags), Cell(d.zone), Cell(d.master_id)});
  }
  render(t, f, out);
}

Table summary_table() { return Table{{"key", "value"}, {}}; }

void add_gen(CLI::App& app, Context& ctx) {
  struct Args {
    skygen::SurveyConfig cfg;
    std::string out = "survey";
    std::string format = "csv";
    std::string pos_sigma = "0.1s";
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("gen", "Generate a seeded synthetic survey with ground truth");
  sub->add_option("--objects", a->cfg.n_objects, "Number of sky objects")->capture_default_str();
  sub->add_option("--passes", a->cfg.passes, "Number of survey passes")->capture_default_str();
  sub->add_option("--seed", a->cfg.seed, "Random seed")->required();
  sub->add_option("--cadence", a->cfg.cadence_days, "Days between passes")->capture_default_str();
  sub->add_option("--start-mjd", a->cfg.start_mjd, "Epoch of the first pass")->capture_default_str();
  sub->add_option("--periodic", a->cfg.periodic_fraction, "Fraction of periodic variables")->capture_default_str();
  sub->add_option("--transient", a->cfg.transient_fraction, "Fraction of transients")->capture_default_str();
  sub->add_option("--movers", a->cfg.mover_fraction, "Fraction of moving objects")->capture_default_str();
  sub->add_option("--flux-sigma", a->cfg.flux_sigma_fraction, "Flux noise as a fraction of flux")->capture_default_str();
  sub->add_option("--pos-sigma", a->pos_sigma, "Position noise (angle, default arcsec)")->capture_default_str();
  sub->add_option("--out", a->out, "Output directory")->capture_default_str();
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    a->cfg.position_sigma_arcsec = angle_arg(a->pos_sigma, "s") * kRadToArcsec;
    const skygen::Survey s = skygen::generate_survey(a->cfg);
    skygen::write_survey(a->out, a->cfg, s);
    Table t = summary_table();
    t.add({"directory", a->out});
    t.add({"objects", Cell(s.truth.size())});
    t.add({"detections", Cell(s.detections.size())});
    render(t, parse_format(a->format), ctx.out);
  });
}

void add_ingest(CLI::App& app, Context& ctx) {
  struct Args {
    std::string input, store, format = "csv";
    std::uint32_t partitions = 16;
    double zone_height = 1.0;
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("ingest", "Load detections (.det or .csv) into a partitioned store");
  sub->add_option("--input", a->input, "Detection file")->required();
  sub->add_option("--store", a->store, "Store directory")->required();
  sub->add_option("--partitions", a->partitions, "Partition count")->capture_default_str();
  sub->add_option("--zone-height", a->zone_height, "Declination zone height in degrees")->capture_default_str();
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    const IngestReport r = ingest_file(a->input, a->partitions, a->store, a->zone_height);
    Table t = summary_table();
    t.add({"records", Cell(r.manifest.total_records)});
    t.add({"partitions", Cell(r.manifest.partition_count)});
    t.add({"bytes", Cell(r.manifest.data_bytes())});
    t.add({"seconds", Cell(r.seconds)});
    t.add({"bytes_per_second", Cell(r.bytes_per_second)});
    render(t, parse_format(a->format), ctx.out);
  });
}

void add_index(CLI::App& app, Context& ctx) {
  struct Args {
    std::string store, format = "csv";
    double zone_height = 1.0;
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("index", "Build declination-zone indexes for a store");
  sub->add_option("--store", a->store, "Store directory")->required();
  sub->add_option("--zone-height", a->zone_height, "Zone height in degrees")->capture_default_str();
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    Store store(a->store);
    const IndexReport r = build_indexes(store, a->zone_height);
    std::uint64_t runs = 0;
    for (const auto& p : r.manifest.partitions) runs += p.zone_runs.size();
    Table t = summary_table();
    t.add({"zone_runs", Cell(runs)});
    t.add({"index_bytes", Cell(r.manifest.index_bytes)});
    t.add({"index_fraction", Cell(r.index_fraction)});
    render(t, parse_format(a->format), ctx.out);
  });
}

void add_master(CLI::App& app, Context& ctx) {
  struct Args {
    std::string store, radius = "1s", format = "csv";
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("master", "Cross-match detections into the master catalog");
  sub->add_option("--store", a->store, "Store directory")->required();
  sub->add_option("--radius", a->radius, "Match radius (angle, default arcsec)")->capture_default_str();
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    Store store(a->store);
    const MasterReport r = build_master(store, angle_arg(a->radius, "s") * kRadToArcsec);
    Table t = summary_table();
    t.add({"detections", Cell(r.detections)});
    t.add({"masters", Cell(r.masters.size())});
    t.add({"reduction", Cell(r.masters.empty() ? 0.0 : static_cast<double>(r.detections) / static_cast<double>(r.masters.size()))});
    t.add({"seconds", Cell(r.seconds)});
    render(t, parse_format(a->format), ctx.out);
  });
}

void add_query(CLI::App& app, Context& ctx) {
  struct Args {
    std::string store, cone, polygon, where, format = "csv";
    unsigned workers = 1;
    bool stats = false;
    bool count = false;
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("query", "Parallel scan with an optional region and predicate");
  sub->add_option("--store", a->store, "Store directory")->required();
  auto* cone = sub->add_option("--cone", a->cone, "Cone \"ra,dec,radius\" (angles, default degrees)");
  sub->add_option("--polygon", a->polygon, "Polygon file: one `nx ny nz offset` halfspace per line")
      ->check(CLI::ExistingFile)
      ->excludes(cone);
  sub->add_option("--where", a->where, "Predicate, e.g. \"flux>10 and dec<5\"");
  sub->add_option("--workers", a->workers, "Scan threads")->capture_default_str()->check(CLI::PositiveNumber);
  sub->add_flag("--stats", a->stats, "Print scan statistics on the error stream");
  sub->add_flag("--count", a->count, "Print only the number of matches");
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    Store store(a->store);
    ScanOptions opt;
    opt.workers = a->workers;
    if (!a->where.empty()) opt.predicate = Predicate::parse(a->where);
    if (!a->cone.empty()) opt.region = parse_cone(a->cone);
    if (!a->polygon.empty()) opt.region = read_polygon_file(a->polygon);
    opt.collect = !a->count;
    const ScanResult r = scan(store, opt);
    if (a->count) {
      Table t = summary_table();
      t.add({"matches", Cell(r.stats.records_matched)});
      render(t, parse_format(a->format), ctx.out);
    } else {
      emit_detections(r.records, parse_format(a->format), ctx.out);
    }
    if (a->stats) {
      ctx.err << "scanned " << r.stats.records_scanned << " records, matched " << r.stats.records_matched << ", "
              << format_bytes(static_cast<double>(r.stats.bytes_read)) << " in " << r.stats.wall_seconds << " s ("
              << format_rate(r.stats.bytes_per_second) << ", " << r.stats.workers << " workers)\n";
    }
  });
}

void add_neighbors(CLI::App& app, Context& ctx) {
  struct Args {
    std::string store, theta = "60s", source = "masters", format = "csv";
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("neighbors", "All pairs closer than theta (Neighbors table)");
  sub->add_option("--store", a->store, "Store directory")->required();
  sub->add_option("--theta", a->theta, "Maximum separation (angle, default arcsec)")->capture_default_str();
  sub->add_option("--source", a->source, "Join masters or raw detections")
      ->capture_default_str()
      ->check(CLI::IsMember({"masters", "detections"}));
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    Store store(a->store);
    std::vector<std::uint64_t> ids;
    std::vector<SkyPos> pos;
    if (a->source == "masters") {
      for (const auto& m : load_masters(store)) {
        ids.push_back(m.master_id);
        pos.push_back({m.ra, m.dec});
      }
    } else {
      for (const auto& d : store.read_all()) {
        ids.push_back(d.det_id);
        pos.push_back({d.ra, d.dec});
      }
    }
    const NeighborsResult r = neighbors_join(ids, pos, angle_arg(a->theta, "s") * kRadToArcsec);
    Table t{{"id_a", "id_b", "separation_arcsec"}, {}};
    for (const auto& p : r.pairs) t.add({Cell(p.id_a), Cell(p.id_b), Cell(p.separation_arcsec)});
    render(t, parse_format(a->format), ctx.out);
  });
}

}  // namespace

void register_catalog_commands(CLI::App& app, Context& ctx) {
  add_gen(app, ctx);
  add_ingest(app, ctx);
  add_index(app, ctx);
  add_master(app, ctx);
  add_query(app, ctx);
  add_neighbors(app, ctx);
}

}  // namespace petacat::cli
