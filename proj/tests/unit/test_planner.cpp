#include <gtest/gtest.h>

#include <cmath>

#include "petacat/errors.hpp"
#include "petacat/planner.hpp"

using namespace petacat;
using namespace petacat::planner;

namespace {

void expect_within(double value, double target, double rel) {
  EXPECT_LE(std::fabs(value - target), rel * std::fabs(target)) << value << " vs " << target;
}

}  // namespace

TEST(Acquisition, PassAndYearVolumes) {
  const AcquisitionPlan p = plan_acquisition({});
  EXPECT_DOUBLE_EQ(p.bytes_per_pass, 20e12);
  EXPECT_DOUBLE_EQ(p.bytes_per_year, 1e15);
  EXPECT_DOUBLE_EQ(p.bytes_per_image, 10e9);
  expect_within(p.bytes_per_night, 4.8e12, 1e-12);
  expect_within(p.stream_rate, 170e6, 0.02);
}

TEST(Acquisition, StreamIsNightVolumeOverNightLength) {
  AcquisitionSpec s;
  s.night_hours = 10;
  s.exposure_seconds = 30;
  const AcquisitionPlan p = plan_acquisition(s);
  EXPECT_DOUBLE_EQ(p.bytes_per_year, p.bytes_per_pass * s.passes_per_year);
  EXPECT_DOUBLE_EQ(p.stream_rate, p.bytes_per_night / (10 * 3600.0));
}

TEST(Acquisition, ErrorsNameTheField) {
  AcquisitionSpec s;
  s.exposure_seconds = 0;
  try {
    plan_acquisition(s);
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("exposure_seconds"), std::string::npos);
  }
}

TEST(Pipeline, ProcessorCounts) {
  EXPECT_EQ(plan_pipeline({}), 284);
  PipelineSpec later;
  later.years_ahead = 6;
  EXPECT_EQ(plan_pipeline(later), 18);
  PipelineSpec idle;
  idle.stream_rate = 0;
  EXPECT_EQ(plan_pipeline(idle), 0);
  EXPECT_DOUBLE_EQ(moore_speedup(6, 1.5), 16.0);
}

TEST(Pipeline, MonotoneInYearsAndStream) {
  std::int64_t prev = plan_pipeline({});
  for (double y = 0.5; y <= 10; y += 0.5) {
    PipelineSpec s;
    s.years_ahead = y;
    const auto c = plan_pipeline(s);
    EXPECT_LE(c, prev);
    prev = c;
  }
  prev = 0;
  for (double r = 0; r <= 500e6; r += 25e6) {
    PipelineSpec s;
    s.stream_rate = r;
    const auto c = plan_pipeline(s);
    EXPECT_GE(c, prev);
    prev = c;
  }
}

TEST(Storage, CatalogIndexMasterCoadd) {
  const StoragePlan p = plan_storage({});
  EXPECT_DOUBLE_EQ(p.catalog_bytes, 100e12);
  EXPECT_DOUBLE_EQ(p.indexed_bytes, 120e12);
  expect_within(p.master_bytes, 4e12, 0.25);
  EXPECT_DOUBLE_EQ(p.coadd_static_bytes, 30e12);
  EXPECT_DOUBLE_EQ(p.coadd_bytes, 45e12);
}

TEST(Storage, IndexRatioIsExact) {
  for (double f : {0.0, 0.1, 0.2, 0.35}) {
    StorageSpec s;
    s.index_overhead_fraction = f;
    const StoragePlan p = plan_storage(s);
    EXPECT_DOUBLE_EQ(p.indexed_bytes / p.catalog_bytes, 1.0 + f);
  }
}

TEST(Storage, RejectsReductionAtOrBelowOne) {
  StorageSpec s;
  s.master_reduction_factor = 1.0;
  EXPECT_THROW(plan_storage(s), ValidationError);
}

TEST(Scan, ReferenceDiskFarms) {
  const ScanEstimate one = plan_scan({});
  expect_within(one.scan_seconds / 3600, 7.4, 0.02);
  EXPECT_EQ(one.servers_needed, 1);

  ScanSpec wide;
  wide.disk_count = 240;
  const ScanEstimate eight = plan_scan(wide);
  expect_within(eight.scan_seconds / 3600, 0.93, 0.02);
  EXPECT_EQ(eight.servers_needed, 8);

  ScanSpec master;
  master.db_bytes = 4e12;
  master.disk_count = 500;
  const ScanEstimate m = plan_scan(master);
  EXPECT_DOUBLE_EQ(m.aggregate_rate, 75e9);
  expect_within(m.scan_seconds, 53, 0.02);
}

TEST(Scan, TimesRateIsSizeAndDoublingHalves) {
  for (double disks : {1.0, 7.0, 30.0, 240.0, 1000.0}) {
    ScanSpec s;
    s.disk_count = disks;
    const ScanEstimate e = plan_scan(s);
    EXPECT_DOUBLE_EQ(e.scan_seconds * e.aggregate_rate, s.db_bytes);
    s.disk_count = 2 * disks;
    EXPECT_EQ(plan_scan(s).scan_seconds, e.scan_seconds / 2);
  }
}

TEST(Scan, DiskSizing) {
  const DiskSizing d = size_disks_for_scan(120e12, 3600, 150e6);
  EXPECT_EQ(d.min_disks, 223);
  EXPECT_LE(120e12 / (d.min_disks * 150e6), 3600.0);
}

TEST(Transfer, NetworkAndBricks) {
  const TransferPlan p = plan_transfer({});
  expect_within(p.network_days, 200, 0.10);
  expect_within(p.network_days, 191, 0.02);
  TransferSpec s;
  s.total_bytes = 160e12;
  const TransferPlan b = plan_transfer(s);
  EXPECT_EQ(b.brick_count, 5);
  EXPECT_DOUBLE_EQ(b.sneakernet_days, 2.0);
}

TEST(Transfer, EmptyPayload) {
  TransferSpec s;
  s.total_bytes = 0;
  const TransferPlan p = plan_transfer(s);
  EXPECT_EQ(p.network_days, 0.0);
  EXPECT_EQ(p.brick_count, 0);
  EXPECT_EQ(p.sneakernet_days, 0.0);
}

TEST(Transfer, BrickCountIsTight) {
  for (double tb : {1.0, 31.9, 32.0, 32.1, 64.0, 100.0, 165.0, 1000.0}) {
    TransferSpec s;
    s.total_bytes = tb * 1e12;
    const TransferPlan p = plan_transfer(s);
    EXPECT_GE(p.brick_count * s.brick_capacity, s.total_bytes);
    EXPECT_LT((p.brick_count - 1) * s.brick_capacity, s.total_bytes);
  }
}

TEST(Transfer, UtilizationBounds) {
  TransferSpec s;
  s.link_utilization = 1.5;
  EXPECT_THROW(plan_transfer(s), ValidationError);
  s.link_utilization = 0.0;
  EXPECT_THROW(plan_transfer(s), ValidationError);
}

TEST(Timeline, BaselineYear) {
  const TimelineReport r = plan_hardware_timeline({});
  EXPECT_EQ(r.cpu_speed_factor, 1.0);
  EXPECT_EQ(r.pipeline_cpu_factor, 1.0);
  EXPECT_EQ(r.analysis_cpu_factor, 1.0);
  EXPECT_EQ(r.disk_count_factor, 1.0);
  EXPECT_EQ(r.stored_bytes_factor, 1.0);
}

TEST(Timeline, YearFour) {
  TimelineSpec s;
  s.year = 4;
  const TimelineReport r = plan_hardware_timeline(s);
  EXPECT_DOUBLE_EQ(r.cpu_speed_factor, 4.0);
  EXPECT_DOUBLE_EQ(r.pipeline_cpu_factor, 0.25);
  EXPECT_DOUBLE_EQ(r.stored_bytes_factor, 4.0);
  EXPECT_DOUBLE_EQ(r.analysis_cpu_factor, 1.0);
  EXPECT_NEAR(r.disk_speed_factor, std::sqrt(8.0), 1e-12);
  EXPECT_NEAR(r.disk_count_factor, 4.0 / std::sqrt(8.0), 1e-12);
}

TEST(Timeline, RejectsYearZero) {
  TimelineSpec s;
  s.year = 0;
  EXPECT_THROW(plan_hardware_timeline(s), ValidationError);
}

TEST(Load, WindowAndPeak) {
  const LoadPlan p = plan_load(120e12, 14, 8);
  expect_within(p.rate_total, 99.2e6, 0.01);
  expect_within(p.rate_per_brick, 12.4e6, 0.01);
  expect_within(peak_load_rate(170e6, 0.12), 20e6, 0.02);
  const LoadPlan z = plan_load(0, 14, 8);
  EXPECT_EQ(z.rate_total, 0.0);
  EXPECT_EQ(z.rate_per_brick, 0.0);
  EXPECT_THROW(plan_load(1e12, 0, 8), ValidationError);
  EXPECT_THROW(plan_load(1e12, 14, 0), ValidationError);
}

TEST(Cost, HalvesPerPeriod) {
  const StorageCost c = project_storage_cost(120e12, 1000, 3, 1);
  EXPECT_DOUBLE_EQ(c.cost_today, 120000.0);
  EXPECT_DOUBLE_EQ(c.cost_future, 15000.0);
}

TEST(Planner, PureFunctions) {
  const auto a = plan_transfer({});
  const auto b = plan_transfer({});
  EXPECT_EQ(a.network_days, b.network_days);
  EXPECT_EQ(plan_storage({}).master_bytes, plan_storage({}).master_bytes);
}
