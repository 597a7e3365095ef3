#include "petacat/record.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <sstream>

#include "petacat/errors.hpp"

namespace petacat {

namespace {

template <typename T>
void put(std::span<std::byte, kRecordSize> out, std::size_t off, T value) {
  std::byte raw[sizeof(T)];
  std::memcpy(raw, &value, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
  }
  std::memcpy(out.data() + off, raw, sizeof(T));
}

template <typename T>
T get(std::span<const std::byte, kRecordSize> in, std::size_t off) {
  std::byte raw[sizeof(T)];
  std::memcpy(raw, in.data() + off, sizeof(T));
  if constexpr (std::endian::native == std::endian::big) {
    for (std::size_t i = 0; i < sizeof(T) / 2; ++i) std::swap(raw[i], raw[sizeof(T) - 1 - i]);
  }
  T value;
  std::memcpy(&value, raw, sizeof(T));
  return value;
}

}  // namespace

void encode(const Detection& d, std::span<std::byte, kRecordSize> out) {
  put(out, 0, d.det_id);
  put(out, 8, d.pass_id);
  put(out, 12, d.mjd);
  put(out, 20, d.ra);
  put(out, 28, d.dec);
  put(out, 36, d.flux);
  put(out, 40, d.flux_err);
  put(out, 44, d.flags);
  put(out, 48, d.zone);
  put(out, 52, d.master_id);
  put(out, 60, std::uint32_t{0});
}

Detection decode(std::span<const std::byte, kRecordSize> in) {
  Detection d;
  d.det_id = get<std::uint64_t>(in, 0);
  d.pass_id = get<std::uint32_t>(in, 8);
  d.mjd = get<double>(in, 12);
  d.ra = get<double>(in, 20);
  d.dec = get<double>(in, 28);
  d.flux = get<float>(in, 36);
  d.flux_err = get<float>(in, 40);
  d.flags = get<std::uint32_t>(in, 44);
  d.zone = get<std::uint32_t>(in, 48);
  d.master_id = get<std::uint64_t>(in, 52);
  return d;
}

void validate_detection(const Detection& d) {
  if (!std::isfinite(d.mjd)) throw ValidationError("mjd is not finite");
  if (!std::isfinite(d.ra) || d.ra < 0.0 || d.ra >= 360.0) throw ValidationError("ra outside [0, 360)");
  if (!std::isfinite(d.dec) || d.dec < -90.0 || d.dec > 90.0) throw ValidationError("dec outside [-90, 90]");
  if (!std::isfinite(d.flux)) throw ValidationError("flux is not finite");
  if (!(d.flux_err > 0.0f) || !std::isfinite(d.flux_err)) throw ValidationError("flux_err must be positive");
}

Field field_from_name(const std::string& name) {
  for (std::size_t i = 0; i < kFieldNames.size(); ++i) {
    if (name == kFieldNames[i]) return static_cast<Field>(i);
  }
  throw ValidationError("unknown field '" + name + "'");
}

double field_value(const Detection& d, Field f) {
  switch (f) {
    case Field::kDetId: return static_cast<double>(d.det_id);
    case Field::kPassId: return d.pass_id;
    case Field::kMjd: return d.mjd;
    case Field::kRa: return d.ra;
    case Field::kDec: return d.dec;
    case Field::kFlux: return d.flux;
    case Field::kFluxErr: return d.flux_err;
    case Field::kFlags: return d.flags;
    case Field::kZone: return d.zone;
    case Field::kMasterId: return static_cast<double>(d.master_id);
  }
  return 0.0;
}

void write_detections(const std::string& path, std::span<const Detection> detections) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot open " + path + " for writing");
  std::vector<std::byte> buf;
  buf.reserve(kRecordSize * 4096);
  RecordBytes rec;
  for (std::size_t i = 0; i < detections.size(); ++i) {
    encode(detections[i], rec);
    buf.insert(buf.end(), rec.begin(), rec.end());
    if (buf.size() >= kRecordSize * 4096 || i + 1 == detections.size()) {
      out.write(reinterpret_cast<const char*>(buf.data()), static_cast<std::streamsize>(buf.size()));
      buf.clear();
    }
  }
  if (!out) throw IoError("write failed on " + path);
}

std::vector<Detection> read_detections(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path);
  in.seekg(0, std::ios::end);
  const auto size = static_cast<std::size_t>(in.tellg());
  in.seekg(0, std::ios::beg);
  std::vector<std::byte> bytes(size);
  if (size > 0 && !in.read(reinterpret_cast<char*>(bytes.data()), static_cast<std::streamsize>(size))) {
    throw IoError("read failed on " + path);
  }
  if (bytes.size() % kRecordSize != 0) {
    throw ValidationError(path + ": record " + std::to_string(bytes.size() / kRecordSize) +
                          " is truncated (file size not a multiple of 64)");
  }
  std::vector<Detection> out(bytes.size() / kRecordSize);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = decode(std::span<const std::byte, kRecordSize>(bytes.data() + i * kRecordSize, kRecordSize));
  }
  return out;
}

std::string detection_csv_header() {
  return "det_id,pass_id,mjd,ra,dec,flux,flux_err,flags,zone,master_id";
}

std::string detection_csv_row(const Detection& d) {
  char buf[320];
  std::snprintf(buf, sizeof buf, "%llu,%u,%.10f,%.10f,%.10f,%.9g,%.9g,%u,%u,%llu",
                static_cast<unsigned long long>(d.det_id), d.pass_id, d.mjd, d.ra, d.dec,
                static_cast<double>(d.flux), static_cast<double>(d.flux_err), d.flags, d.zone,
                static_cast<unsigned long long>(d.master_id));
  return buf;
}

void write_detections_csv(std::ostream& out, std::span<const Detection> detections) {
  out << detection_csv_header() << '\n';
  for (const auto& d : detections) out << detection_csv_row(d) << '\n';
}

std::vector<Detection> read_detections_csv(std::istream& in) {
  std::vector<Detection> out;
  std::string line;
  std::size_t ordinal = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (!header_seen) {
      header_seen = true;
      if (line.rfind("det_id", 0) == 0) continue;
    }
    std::istringstream row(line);
    std::string cell;
    std::vector<std::string> cells;
    while (std::getline(row, cell, ',')) cells.push_back(cell);
    if (cells.size() < 7) {
      throw ValidationError("record " + std::to_string(ordinal) + ": expected at least 7 columns");
    }
    try {
      Detection d;
      d.det_id = std::stoull(cells[0]);
      d.pass_id = static_cast<std::uint32_t>(std::stoul(cells[1]));
      d.mjd = std::stod(cells[2]);
      d.ra = std::stod(cells[3]);
      d.dec = std::stod(cells[4]);
      d.flux = std::stof(cells[5]);
      d.flux_err = std::stof(cells[6]);
      if (cells.size() > 7) d.flags = static_cast<std::uint32_t>(std::stoul(cells[7]));
      if (cells.size() > 8) d.zone = static_cast<std::uint32_t>(std::stoul(cells[8]));
      if (cells.size() > 9) d.master_id = std::stoull(cells[9]);
      out.push_back(d);
    } catch (const std::logic_error&) {
      throw ValidationError("record " + std::to_string(ordinal) + ": malformed number");
    }
    ++ordinal;
  }
  return out;
}

}  // namespace petacat
