#pragma once

#include <cmath>
#include <numbers>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace petacat {

/// Point on the unit sphere. Geometry is done on 3-vectors so that the poles
/// and the ra = 0/360 seam need no special cases.
struct UnitVec {
  double x = 1.0;
  double y = 0.0;
  double z = 0.0;

  friend bool operator==(const UnitVec&, const UnitVec&) = default;
};

inline double dot(const UnitVec& a, const UnitVec& b) { return a.x * b.x + a.y * b.y + a.z * b.z; }

inline UnitVec cross(const UnitVec& a, const UnitVec& b) {
  return {a.y * b.z - a.z * b.y, a.z * b.x - a.x * b.z, a.x * b.y - a.y * b.x};
}

inline double norm(const UnitVec& a) { return std::sqrt(dot(a, a)); }

/// Squared Euclidean (chord) distance. Pair counting and kd pruning work in
/// this metric; it is monotone in the angle.
inline double chord2(const UnitVec& a, const UnitVec& b) {
  const double dx = a.x - b.x, dy = a.y - b.y, dz = a.z - b.z;
  return dx * dx + dy * dy + dz * dz;
}

/// Chord length subtending `angle` radians.
inline double chord_for_angle(double angle) { return 2.0 * std::sin(0.5 * angle); }

/// Closed-boundary tolerance for angular comparisons, in radians (~2e-7").
inline constexpr double kAngleSlack = 1e-12;

struct SkyPos {
  double ra_deg = 0.0;
  double dec_deg = 0.0;
};

/// Validates dec in [-90, 90] and finite ra; ra is reduced modulo 360.
UnitVec to_unit(double ra_deg, double dec_deg);
inline UnitVec to_unit(const SkyPos& p) { return to_unit(p.ra_deg, p.dec_deg); }
SkyPos to_sky(const UnitVec& v);

UnitVec normalized(double x, double y, double z);

/// Great-circle angle in [0, pi], via atan2(|a x b|, a.b).
double angular_distance(const UnitVec& a, const UnitVec& b);
double angular_distance(const SkyPos& p, const SkyPos& q);

/// Moves `from` by `angle` radians along the great circle at position angle
/// `pa` (radians, north through east).
UnitVec offset_along(const UnitVec& from, double pa, double angle);

/// Position angle (north through east, radians in [0, 2pi)) of `to` seen from
/// `from`.
double position_angle(const UnitVec& from, const UnitVec& to);

struct Cone {
  UnitVec center;
  double radius = 0.0;  ///< radians
};

struct Halfspace {
  UnitVec normal;
  double offset = 0.0;  ///< point p is inside iff normal . p >= offset
};

struct ConvexPolygon {
  std::vector<Halfspace> halfspaces;
};

using Region = std::variant<Cone, ConvexPolygon>;

Cone make_cone(const UnitVec& center, double radius);
Cone make_cone(double ra_deg, double dec_deg, double radius);

/// Validates |offset| <= 1 and a non-zero normal (normalized on the way in).
Halfspace make_halfspace(double nx, double ny, double nz, double offset);

void validate(const Region& region);

bool contains(const Region& region, const UnitVec& p);

/// Result of testing a region against an axis-aligned box of unit vectors.
enum class BoxRelation { kOutside, kInside, kPartial };

BoxRelation classify_box(const Region& region, const double lo[3], const double hi[3]);

/// Declination range [min, max] in degrees that can contain region points.
/// Conservative; polygons return the full range.
std::pair<double, double> dec_bounds(const Region& region);

/// Parses polygon text: one `nx ny nz offset` per line, `#` comments.
ConvexPolygon parse_polygon(const std::string& text);
ConvexPolygon read_polygon_file(const std::string& path);

}  // namespace petacat
