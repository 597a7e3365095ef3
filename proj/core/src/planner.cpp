#include "petacat/planner.hpp"

#include <cmath>
#include <string>

#include "petacat/errors.hpp"
#include "petacat/units.hpp"

namespace petacat::planner {
namespace {

void positive(double v, const char* field) {
  if (!(v > 0.0) || !std::isfinite(v)) {
    throw ValidationError(std::string(field) + " must be a finite positive number");
  }
}

void non_negative(double v, const char* field) {
  if (!(v >= 0.0) || !std::isfinite(v)) {
    throw ValidationError(std::string(field) + " must be a finite non-negative number");
  }
}

std::int64_t ceil_count(double x) { return static_cast<std::int64_t>(std::ceil(x)); }

}  // namespace

AcquisitionPlan plan_acquisition(const AcquisitionSpec& spec) {
  positive(spec.sky_pixels, "sky_pixels");
  positive(spec.bytes_per_pixel, "bytes_per_pixel");
  positive(spec.passes_per_year, "passes_per_year");
  positive(spec.camera_gigapixels, "camera_gigapixels");
  positive(spec.exposure_seconds, "exposure_seconds");
  positive(spec.night_hours, "night_hours");
  positive(spec.nights_per_year, "nights_per_year");

  AcquisitionPlan plan;
  const double night_seconds = spec.night_hours * kSecondsPerHour;
  plan.bytes_per_pass = spec.sky_pixels * spec.bytes_per_pixel;
  plan.bytes_per_year = plan.bytes_per_pass * spec.passes_per_year;
  plan.bytes_per_image = spec.camera_gigapixels * 1e9 * spec.bytes_per_pixel;
  plan.exposures_per_night = night_seconds / spec.exposure_seconds;
  plan.bytes_per_night = plan.exposures_per_night * plan.bytes_per_image;
  plan.stream_rate = plan.bytes_per_night / night_seconds;
  plan.nights_per_pass = plan.bytes_per_pass / plan.bytes_per_night;
  plan.yearly_night_capacity = plan.bytes_per_night * spec.nights_per_year;
  return plan;
}

double moore_speedup(double years, double doubling_period) {
  return std::exp2(years / doubling_period);
}

std::int64_t plan_pipeline(const PipelineSpec& spec) {
  non_negative(spec.stream_rate, "stream_rate");
  positive(spec.per_cpu_rate, "per_cpu_rate");
  non_negative(spec.years_ahead, "years_ahead");
  positive(spec.moore_doubling_period, "moore_doubling_period");
  const double per_cpu = spec.per_cpu_rate * moore_speedup(spec.years_ahead, spec.moore_doubling_period);
  return ceil_count(spec.stream_rate / per_cpu);
}

StoragePlan plan_storage(const StorageSpec& spec) {
  positive(spec.objects_per_pass, "objects_per_pass");
  positive(spec.passes, "passes");
  positive(spec.bytes_per_object, "bytes_per_object");
  non_negative(spec.index_overhead_fraction, "index_overhead_fraction");
  if (!(spec.master_reduction_factor > 1.0)) {
    throw ValidationError("master_reduction_factor must be greater than 1");
  }
  positive(spec.sky_pixels, "sky_pixels");
  positive(spec.coadd_bytes_per_pixel, "coadd_bytes_per_pixel");
  non_negative(spec.variable_pixel_fraction, "variable_pixel_fraction");

  StoragePlan plan;
  plan.catalog_bytes = spec.objects_per_pass * spec.passes * spec.bytes_per_object;
  plan.indexed_bytes = plan.catalog_bytes * (1.0 + spec.index_overhead_fraction);
  plan.master_bytes = plan.catalog_bytes / spec.master_reduction_factor;
  plan.coadd_static_bytes = spec.sky_pixels * spec.coadd_bytes_per_pixel;
  plan.coadd_bytes = plan.coadd_static_bytes * (1.0 + spec.variable_pixel_fraction * spec.passes);
  return plan;
}

StorageCost project_storage_cost(double bytes, double dollars_per_tb, double years,
                                 double halving_years) {
  non_negative(bytes, "bytes");
  non_negative(dollars_per_tb, "dollars_per_tb");
  non_negative(years, "years");
  positive(halving_years, "halving_years");
  StorageCost cost;
  cost.cost_today = bytes / kTB * dollars_per_tb;
  cost.cost_future = cost.cost_today / std::exp2(years / halving_years);
  return cost;
}

ScanEstimate plan_scan(const ScanSpec& spec) {
  non_negative(spec.db_bytes, "db_bytes");
  if (!(spec.disk_count >= 1.0)) throw ValidationError("disk_count must be at least 1");
  positive(spec.per_disk_rate, "per_disk_rate");
  positive(spec.per_server_disk_capacity, "per_server_disk_capacity");

  ScanEstimate est;
  est.aggregate_rate = spec.disk_count * spec.per_disk_rate;
  est.scan_seconds = spec.db_bytes / est.aggregate_rate;
  est.servers_needed = ceil_count(spec.disk_count / spec.per_server_disk_capacity);
  return est;
}

DiskSizing size_disks_for_scan(double db_bytes, double target_seconds, double per_disk_rate) {
  positive(db_bytes, "db_bytes");
  positive(target_seconds, "target_seconds");
  positive(per_disk_rate, "per_disk_rate");
  DiskSizing sizing;
  sizing.min_disks = ceil_count(db_bytes / (target_seconds * per_disk_rate));
  sizing.max_disk_bytes = db_bytes / static_cast<double>(sizing.min_disks);
  return sizing;
}

TransferPlan plan_transfer(const TransferSpec& spec) {
  non_negative(spec.total_bytes, "total_bytes");
  positive(spec.link_rate_bits, "link_rate");
  if (!(spec.link_utilization > 0.0 && spec.link_utilization <= 1.0)) {
    throw ValidationError("link_utilization must be in (0, 1]");
  }
  if (!(spec.wire_bits_per_byte >= 8.0)) {
    throw ValidationError("wire_bits_per_byte must be at least 8");
  }
  positive(spec.brick_capacity, "brick_capacity");
  non_negative(spec.brick_shipping_days, "brick_shipping_days");

  TransferPlan plan;
  plan.effective_net_rate = spec.link_rate_bits * spec.link_utilization / spec.wire_bits_per_byte;
  plan.network_days = spec.total_bytes / plan.effective_net_rate / kSecondsPerDay;
  plan.brick_count = ceil_count(spec.total_bytes / spec.brick_capacity);
  plan.sneakernet_days = plan.brick_count > 0 ? spec.brick_shipping_days : 0.0;
  return plan;
}

TimelineReport plan_hardware_timeline(const TimelineSpec& spec) {
  if (spec.year < 1) throw ValidationError("year must be at least 1");
  positive(spec.moore_doubling, "moore_doubling");
  non_negative(spec.disk_rate_growth_exponent, "disk_rate_growth_exponent");
  positive(spec.capacity_doubling, "capacity_doubling");

  const double elapsed = spec.year - 1;
  TimelineReport r;
  r.year = spec.year;
  r.stored_bytes_factor = spec.year;
  r.cpu_speed_factor = moore_speedup(elapsed, spec.moore_doubling);
  r.pipeline_cpu_factor = 1.0 / r.cpu_speed_factor;
  r.analysis_cpu_factor = r.stored_bytes_factor / r.cpu_speed_factor;
  const double capacity_factor = std::exp2(elapsed / spec.capacity_doubling);
  r.disk_speed_factor = std::pow(capacity_factor, spec.disk_rate_growth_exponent);
  r.disk_count_factor = r.stored_bytes_factor / r.disk_speed_factor;
  return r;
}

LoadPlan plan_load(double indexed_bytes, double window_days, std::int64_t bricks) {
  non_negative(indexed_bytes, "indexed_bytes");
  positive(window_days, "window_days");
  if (bricks < 1) throw ValidationError("bricks must be at least 1");
  LoadPlan plan;
  plan.rate_total = indexed_bytes / (window_days * kSecondsPerDay);
  plan.rate_per_brick = plan.rate_total / static_cast<double>(bricks);
  return plan;
}

double peak_load_rate(double stream_rate, double db_fraction_of_imaging) {
  non_negative(stream_rate, "stream_rate");
  non_negative(db_fraction_of_imaging, "db_fraction_of_imaging");
  return stream_rate * db_fraction_of_imaging;
}

}  // namespace petacat::planner
