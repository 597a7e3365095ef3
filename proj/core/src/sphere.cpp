#include "petacat/sphere.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "petacat/errors.hpp"
#include "petacat/units.hpp"

namespace petacat {

UnitVec to_unit(double ra_deg, double dec_deg) {
  if (!std::isfinite(ra_deg) || !std::isfinite(dec_deg)) {
    throw ValidationError("non-finite sky position");
  }
  if (dec_deg < -90.0 || dec_deg > 90.0) {
    throw ValidationError("dec " + std::to_string(dec_deg) + " outside [-90, 90]");
  }
  const double ra = ra_deg * kDegToRad;
  const double dec = dec_deg * kDegToRad;
  const double cd = std::cos(dec);
  return {cd * std::cos(ra), cd * std::sin(ra), std::sin(dec)};
}

SkyPos to_sky(const UnitVec& v) {
  double ra = std::atan2(v.y, v.x) * kRadToDeg;
  if (ra < 0.0) ra += 360.0;
  if (ra >= 360.0) ra -= 360.0;
  const double dec = std::atan2(v.z, std::hypot(v.x, v.y)) * kRadToDeg;
  return {ra, dec};
}

UnitVec normalized(double x, double y, double z) {
  const double n = std::sqrt(x * x + y * y + z * z);
  if (!(n > 0.0) || !std::isfinite(n)) throw ValidationError("cannot normalize a zero vector");
  return {x / n, y / n, z / n};
}

double angular_distance(const UnitVec& a, const UnitVec& b) {
  return std::atan2(norm(cross(a, b)), dot(a, b));
}

double angular_distance(const SkyPos& p, const SkyPos& q) {
  return angular_distance(to_unit(p), to_unit(q));
}

namespace {

// Local north and east unit vectors at v. At the poles east is taken along +y
// and north along -x (pole at +z) so the basis stays orthonormal.
void local_basis(const UnitVec& v, UnitVec& north, UnitVec& east) {
  const double rho = std::hypot(v.x, v.y);
  if (rho < 1e-15) {
    east = {0.0, 1.0, 0.0};
    north = v.z > 0 ? UnitVec{-1.0, 0.0, 0.0} : UnitVec{1.0, 0.0, 0.0};
    return;
  }
  east = {-v.y / rho, v.x / rho, 0.0};
  north = cross(v, east);
}

}  // namespace

UnitVec offset_along(const UnitVec& from, double pa, double angle) {
  UnitVec north, east;
  local_basis(from, north, east);
  const double s = std::sin(angle), c = std::cos(angle);
  const double sp = std::sin(pa), cp = std::cos(pa);
  const double tx = cp * north.x + sp * east.x;
  const double ty = cp * north.y + sp * east.y;
  const double tz = cp * north.z + sp * east.z;
  return normalized(c * from.x + s * tx, c * from.y + s * ty, c * from.z + s * tz);
}

double position_angle(const UnitVec& from, const UnitVec& to) {
  UnitVec north, east;
  local_basis(from, north, east);
  double pa = std::atan2(dot(to, east), dot(to, north));
  if (pa < 0.0) pa += 2.0 * std::numbers::pi;
  return pa;
}

Cone make_cone(const UnitVec& center, double radius) {
  if (!(radius >= 0.0) || !std::isfinite(radius)) {
    throw ValidationError("cone radius must be non-negative");
  }
  return Cone{center, std::min(radius, std::numbers::pi)};
}

Cone make_cone(double ra_deg, double dec_deg, double radius) {
  return make_cone(to_unit(ra_deg, dec_deg), radius);
}

Halfspace make_halfspace(double nx, double ny, double nz, double offset) {
  if (!std::isfinite(offset) || offset < -1.0 || offset > 1.0) {
    throw ValidationError("halfspace offset must lie in [-1, 1]");
  }
  return Halfspace{normalized(nx, ny, nz), offset};
}

void validate(const Region& region) {
  if (const auto* cone = std::get_if<Cone>(&region)) {
    if (!(cone->radius >= 0.0)) throw ValidationError("cone radius must be non-negative");
    return;
  }
  for (const auto& h : std::get<ConvexPolygon>(region).halfspaces) {
    if (!(h.offset >= -1.0 && h.offset <= 1.0)) {
      throw ValidationError("halfspace offset must lie in [-1, 1]");
    }
    if (std::fabs(norm(h.normal) - 1.0) > 1e-9) throw ValidationError("halfspace normal not unit length");
  }
}

namespace {

constexpr double kDotMargin = 1e-12;

bool cone_contains(const Cone& c, const UnitVec& p) {
  if (c.radius >= std::numbers::pi) return true;
  const double d = dot(c.center, p);
  const double cr = std::cos(c.radius);
  if (d > cr + kDotMargin) return true;
  if (d < cr - kDotMargin) return false;
  return angular_distance(c.center, p) <= c.radius;
}

// Range of n . p over the box.
void dot_range(const UnitVec& n, const double lo[3], const double hi[3], double& mn, double& mx) {
  const double nv[3] = {n.x, n.y, n.z};
  mn = mx = 0.0;
  for (int i = 0; i < 3; ++i) {
    const double a = nv[i] * lo[i], b = nv[i] * hi[i];
    mn += std::min(a, b);
    mx += std::max(a, b);
  }
}

}  // namespace

bool contains(const Region& region, const UnitVec& p) {
  if (const auto* cone = std::get_if<Cone>(&region)) return cone_contains(*cone, p);
  for (const auto& h : std::get<ConvexPolygon>(region).halfspaces) {
    if (dot(h.normal, p) < h.offset) return false;
  }
  return true;
}

BoxRelation classify_box(const Region& region, const double lo[3], const double hi[3]) {
  if (const auto* cone = std::get_if<Cone>(&region)) {
    if (cone->radius >= std::numbers::pi) return BoxRelation::kInside;
    double mn, mx;
    dot_range(cone->center, lo, hi, mn, mx);
    const double cr = std::cos(cone->radius);
    if (mx < cr - kDotMargin) return BoxRelation::kOutside;
    if (mn > cr + kDotMargin) return BoxRelation::kInside;
    return BoxRelation::kPartial;
  }
  bool all_inside = true;
  for (const auto& h : std::get<ConvexPolygon>(region).halfspaces) {
    double mn, mx;
    dot_range(h.normal, lo, hi, mn, mx);
    if (mx < h.offset - kDotMargin) return BoxRelation::kOutside;
    if (!(mn > h.offset + kDotMargin)) all_inside = false;
  }
  return all_inside ? BoxRelation::kInside : BoxRelation::kPartial;
}

std::pair<double, double> dec_bounds(const Region& region) {
  if (const auto* cone = std::get_if<Cone>(&region)) {
    const double dec = to_sky(cone->center).dec_deg;
    const double r = cone->radius * kRadToDeg;
    return {std::max(-90.0, dec - r), std::min(90.0, dec + r)};
  }
  return {-90.0, 90.0};
}

ConvexPolygon parse_polygon(const std::string& text) {
  ConvexPolygon poly;
  std::istringstream in(text);
  std::string line;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (auto hash = line.find('#'); hash != std::string::npos) line.erase(hash);
    std::istringstream fields(line);
    double nx, ny, nz, off;
    if (!(fields >> nx)) continue;  // blank or comment-only
    if (!(fields >> ny >> nz >> off)) {
      throw ValidationError("polygon line " + std::to_string(lineno) + ": expected 'nx ny nz offset'");
    }
    std::string extra;
    if (fields >> extra) {
      throw ValidationError("polygon line " + std::to_string(lineno) + ": trailing text '" + extra + "'");
    }
    try {
      poly.halfspaces.push_back(make_halfspace(nx, ny, nz, off));
    } catch (const ValidationError& e) {
      throw ValidationError("polygon line " + std::to_string(lineno) + ": " + e.what());
    }
  }
  if (poly.halfspaces.empty()) throw ValidationError("polygon has no halfspaces");
  return poly;
}

ConvexPolygon read_polygon_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open polygon file " + path);
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_polygon(buf.str());
}

}  // namespace petacat
