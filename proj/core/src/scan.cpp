#include "petacat/scan.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>

#include "petacat/errors.hpp"
#include "petacat/spatial_index.hpp"

namespace petacat {

namespace {

struct ByteRange {
  std::uint64_t first_record;
  std::uint64_t count;
};

struct PartitionOutput {
  std::vector<Detection> records;
  std::uint64_t bytes = 0;
  std::uint64_t scanned = 0;
  std::uint64_t matched = 0;
};

std::vector<ByteRange> ranges_for(const StoreManifest& m, const PartitionInfo& part,
                                  const std::optional<Region>& region) {
  if (!region || !m.indexes_built || part.zone_runs.empty()) return {{0, part.records}};
  const auto [dlo, dhi] = dec_bounds(*region);
  const std::uint32_t z0 = ZoneTable::zone_of(dlo, m.zone_height_deg);
  const std::uint32_t z1 = ZoneTable::zone_of(dhi, m.zone_height_deg);
  std::vector<ByteRange> out;
  for (const auto& run : part.zone_runs) {
    if (run.zone < z0 || run.zone > z1) continue;
    if (!out.empty() && out.back().first_record + out.back().count == run.first) {
      out.back().count += run.count;
    } else {
      out.push_back({run.first, run.count});
    }
  }
  return out;
}

void scan_partition(const Store& store, std::size_t index, const ScanOptions& opt, PartitionOutput& out) {
  const auto& m = store.manifest();
  const auto& part = m.partitions[index];
  std::ifstream in(store.partition_path(index), std::ios::binary);
  if (!in) throw IoError("cannot open " + store.partition_path(index));

  const std::size_t chunk_records = std::max<std::size_t>(1, opt.chunk_bytes / kRecordSize);
  std::vector<std::byte> buf(chunk_records * kRecordSize);
  for (const auto& range : ranges_for(m, part, opt.region)) {
    in.seekg(static_cast<std::streamoff>(range.first_record * kRecordSize));
    std::uint64_t remaining = range.count;
    while (remaining > 0) {
      const std::size_t n = static_cast<std::size_t>(std::min<std::uint64_t>(remaining, chunk_records));
      in.read(reinterpret_cast<char*>(buf.data()), static_cast<std::streamsize>(n * kRecordSize));
      if (static_cast<std::size_t>(in.gcount()) != n * kRecordSize) {
        throw IoError(store.partition_path(index) + ": short read");
      }
      out.bytes += n * kRecordSize;
      out.scanned += n;
      remaining -= n;
      if (opt.predicate.is_never()) continue;
      for (std::size_t r = 0; r < n; ++r) {
        const Detection d = decode(std::span<const std::byte, kRecordSize>(buf.data() + r * kRecordSize, kRecordSize));
        if (!opt.predicate(d)) continue;
        if (opt.region && !contains(*opt.region, to_unit(d.ra, d.dec))) continue;
        ++out.matched;
        if (opt.collect) out.records.push_back(d);
      }
    }
  }
}

}  // namespace

ScanResult scan(const Store& store, const ScanOptions& options) {
  if (options.workers < 1) throw ValidationError("workers must be at least 1");
  if (options.region) validate(*options.region);

  const auto t0 = std::chrono::steady_clock::now();
  const std::size_t nparts = store.manifest().partitions.size();
  std::vector<PartitionOutput> outputs(nparts);
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mu;

  auto work = [&] {
    while (true) {
      const std::size_t i = next.fetch_add(1);
      if (i >= nparts) return;
      try {
        scan_partition(store, i, options, outputs[i]);
      } catch (...) {
        std::lock_guard lock(failure_mu);
        if (!failure) failure = std::current_exception();
        next.store(nparts);
        return;
      }
    }
  };

  const unsigned nthreads = static_cast<unsigned>(std::min<std::size_t>(options.workers, std::max<std::size_t>(nparts, 1)));
  if (nthreads <= 1) {
    work();
  } else {
    std::vector<std::jthread> pool;
    pool.reserve(nthreads);
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(work);
  }
  if (failure) std::rethrow_exception(failure);

  ScanResult result;
  std::size_t total = 0;
  for (const auto& o : outputs) total += o.records.size();
  result.records.reserve(total);
  for (auto& o : outputs) {
    result.records.insert(result.records.end(), o.records.begin(), o.records.end());
    result.stats.bytes_read += o.bytes;
    result.stats.records_scanned += o.scanned;
    result.stats.records_matched += o.matched;
  }
  result.stats.workers = options.workers;
  result.stats.wall_seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  result.stats.bytes_per_second =
      result.stats.wall_seconds > 0.0 ? static_cast<double>(result.stats.bytes_read) / result.stats.wall_seconds : 0.0;
  return result;
}

}  // namespace petacat
