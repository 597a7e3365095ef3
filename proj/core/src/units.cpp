#include "petacat/units.hpp"

#include <cctype>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <string>

#include "petacat/errors.hpp"

namespace petacat {
namespace {

std::string_view trim(std::string_view s) {
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.front()))) s.remove_prefix(1);
  while (!s.empty() && std::isspace(static_cast<unsigned char>(s.back()))) s.remove_suffix(1);
  return s;
}

// Splits "120TB" into 120 and "TB".
std::pair<double, std::string> split_number(std::string_view text, std::string_view what) {
  text = trim(text);
  double value = 0.0;
  const char* begin = text.data();
  const char* end = text.data() + text.size();
  auto [ptr, ec] = std::from_chars(begin, end, value);
  if (ec != std::errc() || !std::isfinite(value)) {
    throw ValidationError("cannot parse " + std::string(what) + " '" + std::string(text) + "'");
  }
  std::string unit(trim(std::string_view(ptr, static_cast<size_t>(end - ptr))));
  for (auto& c : unit) c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  return {value, unit};
}

double prefix_scale(char p) {
  switch (p) {
    case 'k': return kKB;
    case 'm': return kMB;
    case 'g': return kGB;
    case 't': return kTB;
    case 'p': return kPB;
    default: return 0.0;
  }
}

}  // namespace

double parse_bytes(std::string_view text) {
  auto [value, unit] = split_number(text, "size");
  if (unit.empty() || unit == "b") return value;
  if (unit.size() == 2 && unit[1] == 'b') {
    double scale = prefix_scale(unit[0]);
    if (scale > 0) return value * scale;
  }
  throw ValidationError("unknown size unit '" + unit + "' in '" + std::string(text) + "'");
}

double parse_byte_rate(std::string_view text) {
  auto [value, unit] = split_number(text, "rate");
  if (unit.ends_with("/s")) unit.resize(unit.size() - 2);
  if (unit.ends_with("ps")) unit.resize(unit.size() - 2);
  if (unit.empty() || unit == "b") return value;
  if (unit.size() == 2 && unit[1] == 'b') {
    double scale = prefix_scale(unit[0]);
    if (scale > 0) return value * scale;
  }
  throw ValidationError("unknown rate unit '" + unit + "' in '" + std::string(text) + "'");
}

double parse_bit_rate(std::string_view text) {
  auto [value, unit] = split_number(text, "bit rate");
  if (unit.ends_with("/s")) unit.resize(unit.size() - 2);
  if (unit.ends_with("bps")) unit.resize(unit.size() - 3), unit += "bit";
  if (unit.empty() || unit == "bit") return value;
  if (unit.size() == 4 && unit.substr(1) == "bit") {
    double scale = prefix_scale(unit[0]);
    if (scale > 0) return value * scale;
  }
  throw ValidationError("unknown bit-rate unit '" + unit + "' in '" + std::string(text) + "'");
}

double parse_angle(std::string_view text) {
  auto [value, unit] = split_number(text, "angle");
  if (unit == "d" || unit == "deg") return value * kDegToRad;
  if (unit == "m" || unit == "arcmin") return value * kDegToRad / 60.0;
  if (unit == "s" || unit == "arcsec") return value * kArcsecToRad;
  if (unit == "r" || unit == "rad") return value;
  throw ValidationError("angle '" + std::string(text) +
                        "' needs a unit suffix (d, m, s or r)");
}

double parse_days(std::string_view text) {
  auto [value, unit] = split_number(text, "duration");
  if (unit.empty() || unit == "d" || unit == "days") return value;
  if (unit == "h") return value / 24.0;
  if (unit == "w") return value * 7.0;
  if (unit == "y") return value * 365.25;
  throw ValidationError("unknown duration unit '" + unit + "'");
}

std::string format_bytes(double bytes) {
  static constexpr const char* names[] = {"B", "KB", "MB", "GB", "TB", "PB", "EB"};
  int i = 0;
  double v = bytes;
  while (std::fabs(v) >= 1000.0 && i < 6) {
    v /= 1000.0;
    ++i;
  }
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.3g %s", v, names[i]);
  return buf;
}

std::string format_rate(double bytes_per_second) { return format_bytes(bytes_per_second) + "/s"; }

std::string format_duration(double seconds) {
  char buf[64];
  if (seconds < 120.0) {
    std::snprintf(buf, sizeof buf, "%.3g s", seconds);
  } else if (seconds < 2.0 * kSecondsPerHour) {
    std::snprintf(buf, sizeof buf, "%.3g min", seconds / 60.0);
  } else if (seconds < 2.0 * kSecondsPerDay) {
    std::snprintf(buf, sizeof buf, "%.3g h", seconds / kSecondsPerHour);
  } else {
    std::snprintf(buf, sizeof buf, "%.4g days", seconds / kSecondsPerDay);
  }
  return buf;
}

}  // namespace petacat
