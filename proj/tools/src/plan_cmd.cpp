#include <fstream>
#include <map>
#include <memory>
#include <sstream>

#include "commands.hpp"
#include "petacat/errors.hpp"
#include "petacat/planner.hpp"
#include "petacat/units.hpp"

namespace petacat::cli {
namespace {

using namespace petacat::planner;

enum class Kind { kNumber, kBytes, kByteRate, kBitRate, kDays };

struct ParamDef {
  const char* name;
  Kind kind;
  const char* default_value;
  const char* help;
};

// Flag values as text; parsed after the scenario file has filled gaps.
struct PlanArgs {
  std::map<std::string, std::string> values;
  std::string format = "csv";
  std::string scenario;

  double get(const std::vector<ParamDef>& defs, const std::string& name) const {
    for (const auto& d : defs) {
      if (name != d.name) continue;
      const std::string& text = values.at(name);
      try {
        switch (d.kind) {
          case Kind::kBytes: return parse_bytes(text);
          case Kind::kByteRate: return parse_byte_rate(text);
          case Kind::kBitRate: return parse_bit_rate(text);
          case Kind::kDays: return parse_days(text);
          case Kind::kNumber: {
            std::size_t used = 0;
            const double v = std::stod(text, &used);
            if (used != text.size()) throw ValidationError("trailing characters");
            return v;
          }
        }
      } catch (const std::invalid_argument&) {
        throw ValidationError("--" + name + ": cannot parse '" + text + "'");
      } catch (const std::out_of_range&) {
        throw ValidationError("--" + name + ": value out of range '" + text + "'");
      }
    }
    throw ValidationError("unknown plan parameter " + name);
  }
};

// Fills flags not given on the command line from the scenario JSON: either a
// flat object of flag names, or one keyed by plan subcommand.
void apply_scenario(const std::string& path, const std::string& section, CLI::App* sub,
                    const std::vector<ParamDef>& defs, PlanArgs& args) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open scenario " + path);
  nlohmann::json j;
  try {
    in >> j;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError("scenario " + path + ": " + e.what());
  }
  if (!j.is_object()) throw ValidationError("scenario " + path + ": top level must be an object");
  const nlohmann::json* obj = &j;
  if (j.contains(section) && j[section].is_object()) obj = &j[section];
  for (auto it = obj->begin(); it != obj->end(); ++it) {
    if (it.value().is_object()) continue;  // another section
    bool known = false;
    for (const auto& d : defs) known = known || it.key() == d.name;
    if (!known) throw ValidationError("scenario " + path + ": unknown parameter '" + it.key() + "' for plan " + section);
    if (sub->count("--" + it.key()) > 0) continue;
    args.values[it.key()] = it.value().is_string() ? it.value().get<std::string>() : it.value().dump();
  }
}

Cell num(double v) { return Cell(v); }

void row(Table& t, const std::string& q, double v, const std::string& unit, const std::string& human) {
  t.add({q, num(v), unit, human});
}

Table quantity_table() { return Table{{"quantity", "value", "unit", "display"}, {}}; }

std::string fixed(double v, int digits) {
  std::ostringstream s;
  s.setf(std::ios::fixed);
  s.precision(digits);
  s << v;
  return s.str();
}

struct PlanCommand {
  const char* name;
  const char* help;
  std::vector<ParamDef> defs;
  void (*run)(const PlanArgs&, const std::vector<ParamDef>&, Table&);
};

void run_acquisition(const PlanArgs& a, const std::vector<ParamDef>& d, Table& t) {
  AcquisitionSpec s;
  s.sky_pixels = a.get(d, "sky-pixels");
  s.bytes_per_pixel = a.get(d, "bytes-per-pixel");
  s.passes_per_year = a.get(d, "passes");
  s.camera_gigapixels = a.get(d, "camera-gpix");
  s.exposure_seconds = a.get(d, "exposure");
  s.night_hours = a.get(d, "night-hours");
  s.nights_per_year = a.get(d, "nights");
  const AcquisitionPlan p = plan_acquisition(s);
  row(t, "bytes_per_pass", p.bytes_per_pass, "B", format_bytes(p.bytes_per_pass));
  row(t, "bytes_per_year", p.bytes_per_year, "B", format_bytes(p.bytes_per_year));
  row(t, "bytes_per_image", p.bytes_per_image, "B", format_bytes(p.bytes_per_image));
  row(t, "exposures_per_night", p.exposures_per_night, "count", fixed(p.exposures_per_night, 0));
  row(t, "bytes_per_night", p.bytes_per_night, "B", format_bytes(p.bytes_per_night));
  row(t, "stream_rate", p.stream_rate, "B/s", format_rate(p.stream_rate));
  row(t, "nights_per_pass", p.nights_per_pass, "nights", fixed(p.nights_per_pass, 2));
  row(t, "yearly_night_capacity", p.yearly_night_capacity, "B", format_bytes(p.yearly_night_capacity));
}

void run_pipeline(const PlanArgs& a, const std::vector<ParamDef>& d, Table& t) {
  PipelineSpec s;
  s.stream_rate = a.get(d, "stream");
  s.per_cpu_rate = a.get(d, "per-cpu");
  s.years_ahead = a.get(d, "years");
  s.moore_doubling_period = a.get(d, "doubling");
  const auto cpus = plan_pipeline(s);
  const double speedup = moore_speedup(s.years_ahead, s.moore_doubling_period);
  row(t, "cpu_speedup", speedup, "x", fixed(speedup, 2) + "x");
  t.add({"cpus", Cell(cpus), "count", std::to_string(cpus)});
}

void run_storage(const PlanArgs& a, const std::vector<ParamDef>& d, Table& t) {
  StorageSpec s;
  s.objects_per_pass = a.get(d, "objects-per-pass");
  s.passes = a.get(d, "passes");
  s.bytes_per_object = a.get(d, "bytes-per-object");
  s.index_overhead_fraction = a.get(d, "index-overhead");
  s.master_reduction_factor = a.get(d, "master-reduction");
  s.sky_pixels = a.get(d, "sky-pixels");
  s.coadd_bytes_per_pixel = a.get(d, "coadd-bytes-per-pixel");
  s.variable_pixel_fraction = a.get(d, "variable-fraction");
  const StoragePlan p = plan_storage(s);
  row(t, "catalog_bytes", p.catalog_bytes, "B", format_bytes(p.catalog_bytes));
  row(t, "indexed_bytes", p.indexed_bytes, "B", format_bytes(p.indexed_bytes));
  row(t, "master_bytes", p.master_bytes, "B", format_bytes(p.master_bytes));
  row(t, "coadd_static_bytes", p.coadd_static_bytes, "B", format_bytes(p.coadd_static_bytes));
  row(t, "coadd_bytes", p.coadd_bytes, "B", format_bytes(p.coadd_bytes));
}

void run_cost(const PlanArgs& a, const std::vector<ParamDef>& d, Table& t) {
  const StorageCost c = project_storage_cost(a.get(d, "bytes"), a.get(d, "dollars-per-tb"), a.get(d, "years"),
                                             a.get(d, "halving-years"));
  row(t, "cost_today", c.cost_today, "USD", fixed(c.cost_today, 0));
  row(t, "cost_future", c.cost_future, "USD", fixed(c.cost_future, 0));
}

void run_scan(const PlanArgs& a, const std::vector<ParamDef>& d, Table& t) {
  ScanSpec s;
  s.db_bytes = a.get(d, "db");
  s.disk_count = a.get(d, "disks");
  s.per_disk_rate = a.get(d, "disk-rate");
  s.per_server_disk_capacity = a.get(d, "disks-per-server");
  const ScanEstimate e = plan_scan(s);
  row(t, "aggregate_rate", e.aggregate_rate, "B/s", format_rate(e.aggregate_rate));
  row(t, "scan_seconds", e.scan_seconds, "s", format_duration(e.scan_seconds));
  row(t, "scan_hours", e.scan_seconds / kSecondsPerHour, "h", fixed(e.scan_seconds / kSecondsPerHour, 2) + " h");
  t.add({"servers_needed", Cell(e.servers_needed), "count", std::to_string(e.servers_needed)});
}

void run_disks(const PlanArgs& a, const std::vector<ParamDef>& d, Table& t) {
  const DiskSizing s = size_disks_for_scan(a.get(d, "db"), a.get(d, "target-hours") * kSecondsPerHour,
                                           a.get(d, "disk-rate"));
  t.add({"min_disks", Cell(s.min_disks), "count", std::to_string(s.min_disks)});
  row(t, "max_disk_bytes", s.max_disk_bytes, "B", format_bytes(s.max_disk_bytes));
}

void run_transfer(const PlanArgs& a, const std::vector<ParamDef>& d, Table& t) {
  TransferSpec s;
  s.total_bytes = a.get(d, "bytes");
  s.link_rate_bits = a.get(d, "link");
  s.link_utilization = a.get(d, "utilization");
  s.wire_bits_per_byte = a.get(d, "wire-bits-per-byte");
  s.brick_capacity = a.get(d, "brick");
  s.brick_shipping_days = a.get(d, "ship-days");
  const TransferPlan p = plan_transfer(s);
  row(t, "effective_net_rate", p.effective_net_rate, "B/s", format_rate(p.effective_net_rate));
  row(t, "network_days", p.network_days, "days", fixed(p.network_days, 1));
  t.add({"brick_count", Cell(p.brick_count), "count", std::to_string(p.brick_count)});
  row(t, "sneakernet_days", p.sneakernet_days, "days", fixed(p.sneakernet_days, 1));
}

void run_timeline(const PlanArgs& a, const std::vector<ParamDef>& d, Table& t) {
  TimelineSpec s;
  const double year = a.get(d, "year");
  if (year != std::floor(year)) throw ValidationError("--year must be a whole number");
  s.year = static_cast<int>(year);
  s.moore_doubling = a.get(d, "doubling");
  s.disk_rate_growth_exponent = a.get(d, "disk-exponent");
  s.capacity_doubling = a.get(d, "capacity-doubling");
  const TimelineReport r = plan_hardware_timeline(s);
  t.add({"year", Cell(r.year), "year", std::to_string(r.year)});
  row(t, "cpu_speed_factor", r.cpu_speed_factor, "x", fixed(r.cpu_speed_factor, 3));
  row(t, "pipeline_cpu_factor", r.pipeline_cpu_factor, "x", fixed(r.pipeline_cpu_factor, 3));
  row(t, "analysis_cpu_factor", r.analysis_cpu_factor, "x", fixed(r.analysis_cpu_factor, 3));
  row(t, "disk_speed_factor", r.disk_speed_factor, "x", fixed(r.disk_speed_factor, 3));
  row(t, "disk_count_factor", r.disk_count_factor, "x", fixed(r.disk_count_factor, 3));
  row(t, "stored_bytes_factor", r.stored_bytes_factor, "x", fixed(r.stored_bytes_factor, 3));
}

void run_load(const PlanArgs& a, const std::vector<ParamDef>& d, Table& t) {
  const double bricks = a.get(d, "bricks");
  if (bricks != std::floor(bricks)) throw ValidationError("--bricks must be a whole number");
  const LoadPlan p = plan_load(a.get(d, "bytes"), a.get(d, "window-days"), static_cast<std::int64_t>(bricks));
  row(t, "rate_total", p.rate_total, "B/s", format_rate(p.rate_total));
  row(t, "rate_per_brick", p.rate_per_brick, "B/s", format_rate(p.rate_per_brick));
  const double peak = peak_load_rate(a.get(d, "stream"), a.get(d, "db-fraction"));
  row(t, "peak_load_rate", peak, "B/s", format_rate(peak));
}

void run_golden(const PlanArgs&, const std::vector<ParamDef>&, Table& t) {
  const AcquisitionPlan acq = plan_acquisition({});
  row(t, "bytes_per_pass", acq.bytes_per_pass, "B", format_bytes(acq.bytes_per_pass));
  row(t, "bytes_per_year", acq.bytes_per_year, "B", format_bytes(acq.bytes_per_year));
  row(t, "stream_rate", acq.stream_rate, "B/s", format_rate(acq.stream_rate));
  const auto cpus_now = plan_pipeline({});
  PipelineSpec later;
  later.years_ahead = 6.0;
  const auto cpus_later = plan_pipeline(later);
  t.add({"cpus_year0", Cell(cpus_now), "count", std::to_string(cpus_now)});
  t.add({"cpus_year6", Cell(cpus_later), "count", std::to_string(cpus_later)});
  const StoragePlan st = plan_storage({});
  row(t, "catalog_bytes", st.catalog_bytes, "B", format_bytes(st.catalog_bytes));
  row(t, "indexed_bytes", st.indexed_bytes, "B", format_bytes(st.indexed_bytes));
  row(t, "master_bytes", st.master_bytes, "B", format_bytes(st.master_bytes));
  row(t, "coadd_bytes", st.coadd_bytes, "B", format_bytes(st.coadd_bytes));
  const ScanEstimate s30 = plan_scan({});
  ScanSpec wide;
  wide.disk_count = 240;
  const ScanEstimate s240 = plan_scan(wide);
  ScanSpec master_scan;
  master_scan.db_bytes = 4e12;
  master_scan.disk_count = 500;
  const ScanEstimate sm = plan_scan(master_scan);
  row(t, "scan_hours_30_disks", s30.scan_seconds / kSecondsPerHour, "h", fixed(s30.scan_seconds / kSecondsPerHour, 2) + " h");
  row(t, "scan_hours_240_disks", s240.scan_seconds / kSecondsPerHour, "h", fixed(s240.scan_seconds / kSecondsPerHour, 3) + " h");
  t.add({"servers_240_disks", Cell(s240.servers_needed), "count", std::to_string(s240.servers_needed)});
  row(t, "master_scan_seconds", sm.scan_seconds, "s", format_duration(sm.scan_seconds));
  const TransferPlan tr = plan_transfer({});
  TransferSpec bricks;
  bricks.total_bytes = 160e12;
  const TransferPlan tb = plan_transfer(bricks);
  row(t, "network_days", tr.network_days, "days", fixed(tr.network_days, 1));
  t.add({"bricks_160TB", Cell(tb.brick_count), "count", std::to_string(tb.brick_count)});
  const LoadPlan lp = plan_load(st.indexed_bytes, 14.0, 8);
  row(t, "load_rate", lp.rate_total, "B/s", format_rate(lp.rate_total));
  row(t, "load_rate_per_brick", lp.rate_per_brick, "B/s", format_rate(lp.rate_per_brick));
  const double peak = peak_load_rate(170e6, 0.12);
  row(t, "peak_load_rate", peak, "B/s", format_rate(peak));
}

std::vector<PlanCommand> plan_commands() {
  return {
      {"acquisition", "Imaging data volume and stream rate",
       {{"sky-pixels", Kind::kNumber, "10e12", "Pixels covering the sky"},
        {"bytes-per-pixel", Kind::kNumber, "2", "Bytes per pixel"},
        {"passes", Kind::kNumber, "50", "Sky passes per year"},
        {"camera-gpix", Kind::kNumber, "5", "Camera size in gigapixels"},
        {"exposure", Kind::kNumber, "60", "Exposure length in seconds"},
        {"night-hours", Kind::kNumber, "8", "Observing hours per night"},
        {"nights", Kind::kNumber, "200", "Observing nights per year"}},
       run_acquisition},
      {"pipeline", "Processors needed to keep up with the stream",
       {{"stream", Kind::kByteRate, "170MB/s", "Incoming data rate"},
        {"per-cpu", Kind::kByteRate, "0.6MB/s", "Processing rate of one CPU today"},
        {"years", Kind::kNumber, "0", "Years until purchase"},
        {"doubling", Kind::kNumber, "1.5", "CPU speed doubling period in years"}},
       run_pipeline},
      {"storage", "Catalog, index, master and coadd volumes",
       {{"objects-per-pass", Kind::kNumber, "2e9", "Detected objects per pass"},
        {"passes", Kind::kNumber, "50", "Passes stored"},
        {"bytes-per-object", Kind::kBytes, "1KB", "Catalog record size"},
        {"index-overhead", Kind::kNumber, "0.2", "Index size as a fraction of the catalog"},
        {"master-reduction", Kind::kNumber, "30", "Catalog to master size ratio"},
        {"sky-pixels", Kind::kNumber, "10e12", "Pixels covering the sky"},
        {"coadd-bytes-per-pixel", Kind::kNumber, "3", "Bytes per coadded pixel"},
        {"variable-fraction", Kind::kNumber, "0.01", "Fraction of pixels stored every pass"}},
       run_storage},
      {"cost", "Disk cost today and after price halvings",
       {{"bytes", Kind::kBytes, "120TB", "Stored bytes"},
        {"dollars-per-tb", Kind::kNumber, "1000", "Price per TB today"},
        {"years", Kind::kNumber, "3", "Years until purchase"},
        {"halving-years", Kind::kNumber, "1", "Price halving period in years"}},
       run_cost},
      {"scan", "Sequential scan time for a disk farm",
       {{"db", Kind::kBytes, "120TB", "Database size"},
        {"disks", Kind::kNumber, "30", "Disks scanned in parallel"},
        {"disk-rate", Kind::kByteRate, "150MB/s", "Sequential rate of one disk"},
        {"disks-per-server", Kind::kNumber, "30", "Disks that saturate one server"}},
       run_scan},
      {"disks", "Disks needed to scan within a target time",
       {{"db", Kind::kBytes, "120TB", "Database size"},
        {"target-hours", Kind::kNumber, "1", "Target scan time in hours"},
        {"disk-rate", Kind::kByteRate, "150MB/s", "Sequential rate of one disk"}},
       run_disks},
      {"transfer", "Network transfer time versus shipping disk bricks",
       {{"bytes", Kind::kBytes, "165TB", "Payload size"},
        {"link", Kind::kBitRate, "155Mbit/s", "Link bit rate"},
        {"utilization", Kind::kNumber, "0.65", "Usable fraction of the link"},
        {"wire-bits-per-byte", Kind::kNumber, "10", "Line bits per payload byte"},
        {"brick", Kind::kBytes, "32TB", "Capacity of one shipped brick"},
        {"ship-days", Kind::kDays, "2", "Days to ship one set of bricks"}},
       run_transfer},
      {"timeline", "Hardware needs in a given survey year",
       {{"year", Kind::kNumber, "1", "Survey year (1 = first)"},
        {"doubling", Kind::kNumber, "1.5", "CPU speed doubling period in years"},
        {"disk-exponent", Kind::kNumber, "0.5", "Disk speed grows as capacity to this power"},
        {"capacity-doubling", Kind::kNumber, "1", "Disk capacity doubling period in years"}},
       run_timeline},
      {"load", "Database load rates",
       {{"bytes", Kind::kBytes, "120TB", "Bytes to load"},
        {"window-days", Kind::kDays, "14", "Load window"},
        {"bricks", Kind::kNumber, "8", "Bricks loading in parallel"},
        {"stream", Kind::kByteRate, "170MB/s", "Imaging stream rate"},
        {"db-fraction", Kind::kNumber, "0.12", "Catalog bytes per imaging byte"}},
       run_load},
      {"golden", "Headline numbers of the reference survey design", {}, run_golden},
  };
}

}  // namespace

void register_plan(CLI::App& app, Context& ctx) {
  CLI::App* plan = app.add_subcommand("plan", "Capacity planner: data volumes, CPUs, scan and transfer times");
  plan->require_subcommand(1);
  auto scenario = std::make_shared<std::string>();
  plan->add_option("--scenario", *scenario, "JSON scenario file supplying flag values")->check(CLI::ExistingFile);
  for (const auto& cmd : plan_commands()) {
    CLI::App* sub = plan->add_subcommand(cmd.name, cmd.help);
    auto args = std::make_shared<PlanArgs>();
    for (const auto& d : cmd.defs) {
      args->values[d.name] = d.default_value;
      sub->add_option(std::string("--") + d.name, args->values[d.name], d.help)->capture_default_str();
    }
    sub->add_option("--scenario", args->scenario, "JSON scenario file supplying flag values")->check(CLI::ExistingFile);
    add_format_option(sub, args->format);
    sub->callback([sub, args, scenario, cmd, &ctx] {
      const std::string file = !args->scenario.empty() ? args->scenario : *scenario;
      if (!file.empty()) apply_scenario(file, cmd.name, sub, cmd.defs, *args);
      Table t = quantity_table();
      cmd.run(*args, cmd.defs, t);
      render(t, parse_format(args->format), ctx.out);
    });
  }
}

}  // namespace petacat::cli
