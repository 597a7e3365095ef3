#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "petacat/record.hpp"

namespace petacat {

/// A contiguous run of records sharing one zone inside a partition file.
struct ZoneRun {
  std::uint32_t zone = 0;
  std::uint64_t first = 0;  ///< record offset within the partition
  std::uint64_t count = 0;
};

struct PartitionInfo {
  std::string file;
  std::uint64_t records = 0;
  std::uint32_t crc32c = 0;
  double mjd_min = 0.0;
  double mjd_max = 0.0;
  /// Sorted by zone; present once indexes are built.
  std::vector<ZoneRun> zone_runs;
};

struct StoreManifest {
  static constexpr int kSchemaVersion = 1;

  int schema_version = kSchemaVersion;
  std::uint64_t record_size = kRecordSize;
  double zone_height_deg = 1.0;
  bool indexes_built = false;
  std::uint64_t index_bytes = 0;
  bool masters_built = false;
  double master_match_radius_arcsec = 0.0;
  std::uint64_t master_count = 0;
  std::uint64_t total_records = 0;
  std::uint32_t partition_count = 0;
  std::string created_by;
  std::vector<PartitionInfo> partitions;

  std::uint64_t data_bytes() const { return total_records * record_size; }
};

std::uint32_t crc32c(std::span<const std::byte> bytes);

/// On-disk store: a directory of part-NNNN.det files plus manifest.json.
class Store {
public:
  /// Opens an existing store; throws IoError if the manifest is missing or
  /// unreadable.
  explicit Store(std::string dir);

  const std::string& dir() const { return dir_; }
  const StoreManifest& manifest() const { return manifest_; }
  std::string partition_path(std::size_t i) const;

  std::vector<Detection> read_partition(std::size_t i) const;
  std::vector<Detection> read_all() const;

  /// Recomputes every partition checksum and record count; returns the index
  /// of the first bad partition, or nullopt if everything verifies.
  std::optional<std::size_t> verify() const;

  /// Replaces partition `i` with `records` and refreshes its manifest entry
  /// (count, checksum, epoch range). Call save_manifest() afterwards.
  void rewrite_partition(std::size_t i, std::span<const Detection> records);
  StoreManifest& mutable_manifest() { return manifest_; }
  void save_manifest() const;

  static std::string manifest_path(const std::string& dir);

private:
  std::string dir_;
  StoreManifest manifest_;
};

struct IngestReport {
  StoreManifest manifest;
  double seconds = 0.0;
  double bytes_per_second = 0.0;
};

/// Validates every record, sorts by (zone, det_id) and deals the records
/// round-robin into `partition_count` fixed-width files. Errors name the
/// record ordinal. An existing store at `dir` is replaced.
IngestReport ingest_detections(std::span<const Detection> input, std::uint32_t partition_count,
                               const std::string& dir, double zone_height_deg = 1.0);

/// Reads a raw .det file or a .csv detection file, then ingests it.
IngestReport ingest_file(const std::string& input_path, std::uint32_t partition_count,
                         const std::string& dir, double zone_height_deg = 1.0);

struct IndexReport {
  StoreManifest manifest;
  double index_fraction = 0.0;  ///< index bytes / data bytes
};

/// Assigns zones at the given height, orders each partition by
/// (zone, det_id) and records per-partition zone runs and epoch ranges.
IndexReport build_indexes(Store& store, double zone_height_deg);

}  // namespace petacat
