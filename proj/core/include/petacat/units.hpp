#pragma once

#include <numbers>
#include <string>
#include <string_view>

namespace petacat {

// Decimal units throughout: 1 TB = 1e12 bytes.
inline constexpr double kKB = 1e3;
inline constexpr double kMB = 1e6;
inline constexpr double kGB = 1e9;
inline constexpr double kTB = 1e12;
inline constexpr double kPB = 1e15;

inline constexpr double kSecondsPerHour = 3600.0;
inline constexpr double kSecondsPerDay = 86400.0;

inline constexpr double kDegToRad = std::numbers::pi / 180.0;
inline constexpr double kRadToDeg = 180.0 / std::numbers::pi;
inline constexpr double kArcsecToRad = kDegToRad / 3600.0;
inline constexpr double kRadToArcsec = 1.0 / kArcsecToRad;

/// "120TB", "4 GB", "64" (bytes). Decimal prefixes only.
double parse_bytes(std::string_view text);

/// "150MB/s", "75GB/s", "20MB" (the "/s" is optional). Bytes per second.
double parse_byte_rate(std::string_view text);

/// "155Mbit/s", "10Gbps". Bits per second.
double parse_bit_rate(std::string_view text);

/// Angle with an explicit unit suffix: "5d" (degrees), "30m" (arcmin),
/// "60s" (arcsec), "0.1r" (radians). Returns radians.
double parse_angle(std::string_view text);

/// "14d"-style durations are ambiguous with angles; durations are plain
/// numbers of days or carry an "h"/"d"/"y" suffix. Returns days.
double parse_days(std::string_view text);

/// Human-friendly formatting used by the table output.
std::string format_bytes(double bytes);
std::string format_rate(double bytes_per_second);
std::string format_duration(double seconds);

}  // namespace petacat
