#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "petacat/predicate.hpp"
#include "petacat/sphere.hpp"
#include "petacat/store.hpp"

namespace petacat {

struct ScanStats {
  std::uint64_t bytes_read = 0;
  std::uint64_t records_scanned = 0;
  std::uint64_t records_matched = 0;
  double wall_seconds = 0.0;
  double bytes_per_second = 0.0;
  unsigned workers = 1;
};

struct ScanOptions {
  Predicate predicate = Predicate::always();
  std::optional<Region> region;
  unsigned workers = 1;
  /// When false only the statistics are produced.
  bool collect = true;
  /// Read buffer per worker.
  std::size_t chunk_bytes = 1 << 20;
};

struct ScanResult {
  /// Ordered by (partition, offset within partition).
  std::vector<Detection> records;
  ScanStats stats;
};

/// Sequential scan of every partition with predicate pushdown. Partitions are
/// handed to a pool of `workers` threads; the merged output does not depend
/// on the worker count. With a region and built indexes, only the zone runs
/// overlapping the region's declination range are read.
ScanResult scan(const Store& store, const ScanOptions& options);

}  // namespace petacat
