#include "petacat/store.hpp"

#include <algorithm>
#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <unordered_set>

#include <boost/crc.hpp>
#include <json.hpp>

#include "petacat/errors.hpp"
#include "petacat/spatial_index.hpp"

namespace petacat {

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;

std::uint32_t crc32c(std::span<const std::byte> bytes) {
  boost::crc_optimal<32, 0x1EDC6F41, 0xFFFFFFFF, 0xFFFFFFFF, true, true> crc;
  crc.process_bytes(bytes.data(), bytes.size());
  return crc.checksum();
}

namespace {

std::string partition_name(std::size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "part-%04zu.det", i);
  return buf;
}

std::vector<std::byte> encode_all(std::span<const Detection> records) {
  std::vector<std::byte> bytes(records.size() * kRecordSize);
  for (std::size_t i = 0; i < records.size(); ++i) {
    encode(records[i], std::span<std::byte, kRecordSize>(bytes.data() + i * kRecordSize, kRecordSize));
  }
  return bytes;
}

void write_bytes(const fs::path& path, std::span<const std::byte> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path.string() + " for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw IoError("write failed on " + path.string());
}

std::vector<std::byte> read_bytes(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0);
  std::vector<std::byte> bytes(size);
  in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size));
  if (!in) throw IoError("read failed on " + path.string());
  return bytes;
}

void fill_epoch_range(PartitionInfo& info, std::span<const Detection> records) {
  info.mjd_min = records.empty() ? 0.0 : std::numeric_limits<double>::infinity();
  info.mjd_max = records.empty() ? 0.0 : -std::numeric_limits<double>::infinity();
  for (const auto& d : records) {
    info.mjd_min = std::min(info.mjd_min, d.mjd);
    info.mjd_max = std::max(info.mjd_max, d.mjd);
  }
}

json to_json(const StoreManifest& m) {
  json j;
  j["schema_version"] = m.schema_version;
  j["record_size"] = m.record_size;
  j["total_records"] = m.total_records;
  j["partition_count"] = m.partition_count;
  j["zone_height_deg"] = m.zone_height_deg;
  j["indexes_built"] = m.indexes_built;
  j["index_bytes"] = m.index_bytes;
  j["masters_built"] = m.masters_built;
  j["master_match_radius_arcsec"] = m.master_match_radius_arcsec;
  j["master_count"] = m.master_count;
  j["created_by"] = m.created_by;
  json parts = json::array();
  for (const auto& p : m.partitions) {
    json jp;
    jp["file"] = p.file;
    jp["records"] = p.records;
    jp["crc32c"] = p.crc32c;
    jp["mjd_min"] = p.mjd_min;
    jp["mjd_max"] = p.mjd_max;
    json runs = json::array();
    for (const auto& r : p.zone_runs) runs.push_back({r.zone, r.first, r.count});
    jp["zone_runs"] = std::move(runs);
    parts.push_back(std::move(jp));
  }
  j["partitions"] = std::move(parts);
  return j;
}

StoreManifest from_json(const json& j) {
  StoreManifest m;
  m.schema_version = j.at("schema_version").get<int>();
  if (m.schema_version != StoreManifest::kSchemaVersion) {
    throw IoError("unsupported store schema version " + std::to_string(m.schema_version));
  }
  m.record_size = j.at("record_size").get<std::uint64_t>();
  if (m.record_size != kRecordSize) throw IoError("unexpected record size in manifest");
  m.total_records = j.at("total_records").get<std::uint64_t>();
  m.partition_count = j.at("partition_count").get<std::uint32_t>();
  m.zone_height_deg = j.at("zone_height_deg").get<double>();
  m.indexes_built = j.at("indexes_built").get<bool>();
  m.index_bytes = j.at("index_bytes").get<std::uint64_t>();
  m.masters_built = j.at("masters_built").get<bool>();
  m.master_match_radius_arcsec = j.at("master_match_radius_arcsec").get<double>();
  m.master_count = j.at("master_count").get<std::uint64_t>();
  m.created_by = j.value("created_by", "");
  for (const auto& jp : j.at("partitions")) {
    PartitionInfo p;
    p.file = jp.at("file").get<std::string>();
    p.records = jp.at("records").get<std::uint64_t>();
    p.crc32c = jp.at("crc32c").get<std::uint32_t>();
    p.mjd_min = jp.at("mjd_min").get<double>();
    p.mjd_max = jp.at("mjd_max").get<double>();
    for (const auto& r : jp.at("zone_runs")) {
      p.zone_runs.push_back({r.at(0).get<std::uint32_t>(), r.at(1).get<std::uint64_t>(), r.at(2).get<std::uint64_t>()});
    }
    m.partitions.push_back(std::move(p));
  }
  std::uint64_t sum = 0;
  for (const auto& p : m.partitions) sum += p.records;
  if (sum != m.total_records) throw IoError("manifest partition counts do not sum to total_records");
  return m;
}

}  // namespace

std::string Store::manifest_path(const std::string& dir) { return (fs::path(dir) / "manifest.json").string(); }

Store::Store(std::string dir) : dir_(std::move(dir)) {
  std::ifstream in(manifest_path(dir_));
  if (!in) throw IoError("no store manifest at " + manifest_path(dir_));
  try {
    manifest_ = from_json(json::parse(in));
  } catch (const json::exception& e) {
    throw IoError("malformed manifest in " + dir_ + ": " + e.what());
  }
}

std::string Store::partition_path(std::size_t i) const {
  return (fs::path(dir_) / manifest_.partitions.at(i).file).string();
}

std::vector<Detection> Store::read_partition(std::size_t i) const {
  const auto bytes = read_bytes(partition_path(i));
  if (bytes.size() != manifest_.partitions[i].records * kRecordSize) {
    throw IoError(partition_path(i) + ": size does not match manifest record count");
  }
  std::vector<Detection> out(bytes.size() / kRecordSize);
  for (std::size_t r = 0; r < out.size(); ++r) {
    out[r] = decode(std::span<const std::byte, kRecordSize>(bytes.data() + r * kRecordSize, kRecordSize));
  }
  return out;
}

std::vector<Detection> Store::read_all() const {
  std::vector<Detection> all;
  all.reserve(manifest_.total_records);
  for (std::size_t i = 0; i < manifest_.partitions.size(); ++i) {
    auto part = read_partition(i);
    all.insert(all.end(), part.begin(), part.end());
  }
  return all;
}

std::optional<std::size_t> Store::verify() const {
  for (std::size_t i = 0; i < manifest_.partitions.size(); ++i) {
    const auto& info = manifest_.partitions[i];
    std::vector<std::byte> bytes;
    try {
      bytes = read_bytes(partition_path(i));
    } catch (const IoError&) {
      return i;
    }
    if (bytes.size() != info.records * kRecordSize || crc32c(bytes) != info.crc32c) return i;
  }
  return std::nullopt;
}

void Store::rewrite_partition(std::size_t i, std::span<const Detection> records) {
  auto& info = manifest_.partitions.at(i);
  const auto bytes = encode_all(records);
  write_bytes(partition_path(i), bytes);
  manifest_.total_records = manifest_.total_records - info.records + records.size();
  info.records = records.size();
  info.crc32c = crc32c(bytes);
  fill_epoch_range(info, records);
}

void Store::save_manifest() const {
  const auto tmp = manifest_path(dir_) + ".tmp";
  {
    std::ofstream out(tmp, std::ios::trunc);
    if (!out) throw IoError("cannot write manifest in " + dir_);
    out << to_json(manifest_).dump(2) << '\n';
    if (!out) throw IoError("manifest write failed in " + dir_);
  }
  std::error_code ec;
  fs::rename(tmp, manifest_path(dir_), ec);
  if (ec) throw IoError("cannot replace manifest in " + dir_ + ": " + ec.message());
}

IngestReport ingest_detections(std::span<const Detection> input, std::uint32_t partition_count,
                               const std::string& dir, double zone_height_deg) {
  if (partition_count < 1) throw ValidationError("partition_count must be at least 1");
  if (!(zone_height_deg > 0.0)) throw ValidationError("zone height must be positive");
  const auto t0 = std::chrono::steady_clock::now();

  std::vector<Detection> records(input.begin(), input.end());
  std::unordered_set<std::uint64_t> seen;
  seen.reserve(records.size());
  for (std::size_t i = 0; i < records.size(); ++i) {
    try {
      validate_detection(records[i]);
    } catch (const ValidationError& e) {
      throw ValidationError("record " + std::to_string(i) + ": " + e.what());
    }
    if (!seen.insert(records[i].det_id).second) {
      throw ValidationError("record " + std::to_string(i) + ": duplicate det_id " +
                            std::to_string(records[i].det_id));
    }
    records[i].zone = ZoneTable::zone_of(records[i].dec, zone_height_deg);
  }
  std::sort(records.begin(), records.end(), [](const Detection& a, const Detection& b) {
    return a.zone != b.zone ? a.zone < b.zone : a.det_id < b.det_id;
  });

  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create store directory " + dir + ": " + ec.message());
  for (const auto& entry : fs::directory_iterator(dir, ec)) {
    const auto name = entry.path().filename().string();
    if (name.rfind("part-", 0) == 0 || name == "masters.csv") fs::remove(entry.path(), ec);
  }

  std::vector<std::vector<Detection>> parts(partition_count);
  for (auto& p : parts) p.reserve(records.size() / partition_count + 1);
  for (std::size_t i = 0; i < records.size(); ++i) parts[i % partition_count].push_back(records[i]);

  StoreManifest m;
  m.partition_count = partition_count;
  m.zone_height_deg = zone_height_deg;
  m.total_records = records.size();
  m.created_by = "petacat ingest";
  for (std::uint32_t p = 0; p < partition_count; ++p) {
    PartitionInfo info;
    info.file = partition_name(p);
    info.records = parts[p].size();
    const auto bytes = encode_all(parts[p]);
    write_bytes(fs::path(dir) / info.file, bytes);
    info.crc32c = crc32c(bytes);
    fill_epoch_range(info, parts[p]);
    m.partitions.push_back(std::move(info));
  }
  {
    std::ofstream out(Store::manifest_path(dir), std::ios::trunc);
    if (!out) throw IoError("cannot write manifest in " + dir);
    out << to_json(m).dump(2) << '\n';
  }

  IngestReport report;
  report.manifest = std::move(m);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  const double bytes = static_cast<double>(report.manifest.data_bytes());
  report.bytes_per_second = report.seconds > 0.0 ? bytes / report.seconds : 0.0;
  return report;
}

IngestReport ingest_file(const std::string& input_path, std::uint32_t partition_count,
                         const std::string& dir, double zone_height_deg) {
  std::vector<Detection> records;
  if (input_path.ends_with(".csv")) {
    std::ifstream in(input_path);
    if (!in) throw IoError("cannot open " + input_path);
    records = read_detections_csv(in);
  } else {
    records = read_detections(input_path);
  }
  return ingest_detections(records, partition_count, dir, zone_height_deg);
}

IndexReport build_indexes(Store& store, double zone_height_deg) {
  if (!(zone_height_deg > 0.0)) throw ValidationError("zone_height must be positive");
  auto& m = store.mutable_manifest();
  std::uint64_t index_bytes = 0;
  for (std::size_t i = 0; i < m.partitions.size(); ++i) {
    auto records = store.read_partition(i);
    for (auto& d : records) d.zone = ZoneTable::zone_of(d.dec, zone_height_deg);
    std::sort(records.begin(), records.end(), [](const Detection& a, const Detection& b) {
      return a.zone != b.zone ? a.zone < b.zone : a.det_id < b.det_id;
    });
    store.rewrite_partition(i, records);
    auto& runs = m.partitions[i].zone_runs;
    runs.clear();
    for (std::size_t r = 0; r < records.size(); ++r) {
      if (runs.empty() || runs.back().zone != records[r].zone) runs.push_back({records[r].zone, r, 0});
      ++runs.back().count;
    }
    // zone(4) + first(8) + count(8) per run, plus the epoch range.
    index_bytes += runs.size() * 20 + 16;
  }
  m.zone_height_deg = zone_height_deg;
  m.indexes_built = true;
  m.index_bytes = index_bytes;
  store.save_manifest();

  IndexReport report;
  report.manifest = m;
  const double data = static_cast<double>(m.data_bytes());
  report.index_fraction = data > 0.0 ? static_cast<double>(index_bytes) / data : 0.0;
  return report;
}

}  // namespace petacat
