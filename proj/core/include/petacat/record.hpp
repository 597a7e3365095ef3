#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

namespace petacat {

/// One measurement of one source in one pass.
struct Detection {
  std::uint64_t det_id = 0;
  std::uint32_t pass_id = 0;
  double mjd = 0.0;
  double ra = 0.0;   ///< degrees
  double dec = 0.0;  ///< degrees
  float flux = 0.0f;
  float flux_err = 1.0f;
  std::uint32_t flags = 0;
  std::uint32_t zone = 0;
  std::uint64_t master_id = 0;  ///< 0 = unassigned

  friend bool operator==(const Detection&, const Detection&) = default;
};

// Fixed 64-byte little-endian layout:
//   det_id u64 @0, pass_id u32 @8, mjd f64 @12, ra f64 @20, dec f64 @28,
//   flux f32 @36, flux_err f32 @40, flags u32 @44, zone u32 @48,
//   master_id u64 @52, 4 zero bytes @60.
inline constexpr std::size_t kRecordSize = 64;
using RecordBytes = std::array<std::byte, kRecordSize>;

void encode(const Detection& d, std::span<std::byte, kRecordSize> out);
Detection decode(std::span<const std::byte, kRecordSize> in);

inline RecordBytes encode(const Detection& d) {
  RecordBytes b{};
  encode(d, b);
  return b;
}

/// Throws ValidationError describing the first violated field invariant.
void validate_detection(const Detection& d);

/// Field access by name, used by the predicate language and CSV output.
enum class Field { kDetId, kPassId, kMjd, kRa, kDec, kFlux, kFluxErr, kFlags, kZone, kMasterId };

inline constexpr std::array<const char*, 10> kFieldNames = {
    "det_id", "pass_id", "mjd", "ra", "dec", "flux", "flux_err", "flags", "zone", "master_id"};

/// Throws ValidationError for unknown names.
Field field_from_name(const std::string& name);
double field_value(const Detection& d, Field f);

/// Raw record files: a bare concatenation of 64-byte records.
void write_detections(const std::string& path, std::span<const Detection> detections);
std::vector<Detection> read_detections(const std::string& path);

/// CSV with the header `det_id,pass_id,mjd,ra,dec,flux,flux_err,flags,zone,master_id`.
void write_detections_csv(std::ostream& out, std::span<const Detection> detections);
std::vector<Detection> read_detections_csv(std::istream& in);

std::string detection_csv_header();
std::string detection_csv_row(const Detection& d);

}  // namespace petacat
