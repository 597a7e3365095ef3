#pragma once

// Capacity planner for a petabyte-per-year imaging survey and its catalog
// archive. Every function is pure; inputs are validated and a
// ValidationError names the offending field.
//
// Units: bytes, bytes/second, seconds and days unless a field says otherwise.
// Sizes are decimal (1 TB = 1e12 B).

#include <cstdint>

namespace petacat::planner {

struct AcquisitionSpec {
  double sky_pixels = 10e12;
  double bytes_per_pixel = 2.0;
  double passes_per_year = 50.0;
  double camera_gigapixels = 5.0;
  double exposure_seconds = 60.0;
  double night_hours = 8.0;
  double nights_per_year = 200.0;
};

struct AcquisitionPlan {
  double bytes_per_pass = 0.0;
  double bytes_per_year = 0.0;
  double bytes_per_night = 0.0;
  double stream_rate = 0.0;
  double bytes_per_image = 0.0;
  double exposures_per_night = 0.0;
  double nights_per_pass = 0.0;        ///< nights to cover one pass
  double yearly_night_capacity = 0.0;  ///< bytes_per_night x nights_per_year
};

AcquisitionPlan plan_acquisition(const AcquisitionSpec& spec);

struct PipelineSpec {
  double stream_rate = 170e6;
  double per_cpu_rate = 0.6e6;
  double years_ahead = 0.0;
  double moore_doubling_period = 1.5;
};

/// Processors needed to keep up with the incoming stream after
/// `years_ahead` years of Moore's-law speedup.
std::int64_t plan_pipeline(const PipelineSpec& spec);

/// 2^(years / doubling_period).
double moore_speedup(double years, double doubling_period);

struct StorageSpec {
  double objects_per_pass = 2e9;
  double passes = 50.0;
  double bytes_per_object = 1e3;
  double index_overhead_fraction = 0.2;
  double master_reduction_factor = 30.0;
  double sky_pixels = 10e12;
  double coadd_bytes_per_pixel = 3.0;
  double variable_pixel_fraction = 0.01;
};

struct StoragePlan {
  double catalog_bytes = 0.0;
  double indexed_bytes = 0.0;
  double master_bytes = 0.0;
  double coadd_bytes = 0.0;
  double coadd_static_bytes = 0.0;
};

StoragePlan plan_storage(const StorageSpec& spec);

struct StorageCost {
  double cost_today = 0.0;
  double cost_future = 0.0;
};

/// Disk cost for `bytes` at `dollars_per_tb` today and after `years` of the
/// price halving every `halving_years`.
StorageCost project_storage_cost(double bytes, double dollars_per_tb, double years,
                                 double halving_years = 1.0);

struct ScanSpec {
  double db_bytes = 120e12;
  double disk_count = 30.0;
  double per_disk_rate = 150e6;
  double per_server_disk_capacity = 30.0;
};

struct ScanEstimate {
  double aggregate_rate = 0.0;
  double scan_seconds = 0.0;
  std::int64_t servers_needed = 0;
};

ScanEstimate plan_scan(const ScanSpec& spec);

struct DiskSizing {
  std::int64_t min_disks = 0;
  double max_disk_bytes = 0.0;
};

/// Smallest disk count (and so largest disk) that scans `db_bytes` within
/// `target_seconds`.
DiskSizing size_disks_for_scan(double db_bytes, double target_seconds, double per_disk_rate);

struct TransferSpec {
  double total_bytes = 165e12;
  double link_rate_bits = 155e6;  ///< OC-3
  double link_utilization = 0.65;
  /// Line bits spent per payload byte. 10 is the usual framing/protocol rule
  /// of thumb; 8 gives the raw payload bound.
  double wire_bits_per_byte = 10.0;
  double brick_capacity = 32e12;
  double brick_shipping_days = 2.0;
};

struct TransferPlan {
  double network_days = 0.0;
  double effective_net_rate = 0.0;
  std::int64_t brick_count = 0;
  double sneakernet_days = 0.0;
};

TransferPlan plan_transfer(const TransferSpec& spec);

struct TimelineSpec {
  int year = 1;
  double moore_doubling = 1.5;
  double disk_rate_growth_exponent = 0.5;  ///< sequential rate ~ capacity^exponent
  double capacity_doubling = 1.0;
};

struct TimelineReport {
  int year = 1;
  double cpu_speed_factor = 1.0;
  double pipeline_cpu_factor = 1.0;
  double analysis_cpu_factor = 1.0;
  double disk_speed_factor = 1.0;
  double disk_count_factor = 1.0;
  double stored_bytes_factor = 1.0;
};

/// Hardware needs in project year `year` relative to year 1, for a constant
/// incoming data rate and linearly growing archive.
TimelineReport plan_hardware_timeline(const TimelineSpec& spec);

struct LoadPlan {
  double rate_total = 0.0;
  double rate_per_brick = 0.0;
};

LoadPlan plan_load(double indexed_bytes, double window_days, std::int64_t bricks);

/// Database load rate that keeps pace with the imaging stream, given the
/// catalog's size as a fraction of the imaging data.
double peak_load_rate(double stream_rate, double db_fraction_of_imaging);

}  // namespace petacat::planner
