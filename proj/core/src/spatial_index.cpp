#include "petacat/spatial_index.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "petacat/errors.hpp"

namespace petacat {

namespace {

double coord(const UnitVec& v, int axis) { return axis == 0 ? v.x : (axis == 1 ? v.y : v.z); }

// Squared distance between two intervals along one axis.
double gap2(double alo, double ahi, double blo, double bhi) {
  double g = 0.0;
  if (ahi < blo) g = blo - ahi;
  else if (bhi < alo) g = alo - bhi;
  return g * g;
}

}  // namespace

KdTree3::KdTree3(std::span<const UnitVec> points, std::size_t bucket_size) {
  if (points.size() > std::numeric_limits<std::uint32_t>::max()) {
    throw ValidationError("kd-tree supports at most 2^32-1 points");
  }
  if (bucket_size == 0) throw ValidationError("kd-tree bucket size must be positive");
  order_.resize(points.size());
  std::iota(order_.begin(), order_.end(), 0u);
  sorted_.assign(points.begin(), points.end());
  if (points.empty()) return;
  nodes_.reserve(2 * (points.size() / bucket_size + 1));
  build(0, static_cast<std::uint32_t>(points.size()), bucket_size);
}

std::int32_t KdTree3::build(std::uint32_t begin, std::uint32_t end, std::size_t bucket) {
  const auto id = static_cast<std::int32_t>(nodes_.size());
  nodes_.emplace_back();
  Node node;
  node.begin = begin;
  node.end = end;
  for (int a = 0; a < 3; ++a) {
    node.lo[a] = std::numeric_limits<double>::infinity();
    node.hi[a] = -std::numeric_limits<double>::infinity();
  }
  for (std::uint32_t i = begin; i < end; ++i) {
    for (int a = 0; a < 3; ++a) {
      const double c = coord(sorted_[i], a);
      node.lo[a] = std::min(node.lo[a], c);
      node.hi[a] = std::max(node.hi[a], c);
    }
  }
  if (end - begin > bucket) {
    int axis = 0;
    double widest = -1.0;
    for (int a = 0; a < 3; ++a) {
      if (node.hi[a] - node.lo[a] > widest) {
        widest = node.hi[a] - node.lo[a];
        axis = a;
      }
    }
    if (widest > 0.0) {
      const std::uint32_t mid = begin + (end - begin) / 2;
      // Sort a permutation of the range, then apply it to both arrays.
      std::vector<std::uint32_t> perm(end - begin);
      std::iota(perm.begin(), perm.end(), begin);
      std::nth_element(perm.begin(), perm.begin() + (mid - begin), perm.end(),
                       [&](std::uint32_t l, std::uint32_t r) {
                         const double cl = coord(sorted_[l], axis), cr = coord(sorted_[r], axis);
                         return cl < cr || (cl == cr && order_[l] < order_[r]);
                       });
      std::vector<UnitVec> pts(perm.size());
      std::vector<std::uint32_t> ord(perm.size());
      for (std::size_t k = 0; k < perm.size(); ++k) {
        pts[k] = sorted_[perm[k]];
        ord[k] = order_[perm[k]];
      }
      std::copy(pts.begin(), pts.end(), sorted_.begin() + begin);
      std::copy(ord.begin(), ord.end(), order_.begin() + begin);
      node.left = build(begin, mid, bucket);
      node.right = build(mid, end, bucket);
    }
  }
  nodes_[static_cast<std::size_t>(id)] = node;
  return id;
}

double KdTree3::min_chord2(const Node& a, const Node& b) {
  return gap2(a.lo[0], a.hi[0], b.lo[0], b.hi[0]) + gap2(a.lo[1], a.hi[1], b.lo[1], b.hi[1]) +
         gap2(a.lo[2], a.hi[2], b.lo[2], b.hi[2]);
}

double KdTree3::max_chord2(const Node& a, const Node& b) {
  double s = 0.0;
  for (int k = 0; k < 3; ++k) {
    const double d = std::max(a.hi[k] - b.lo[k], b.hi[k] - a.lo[k]);
    s += d * d;
  }
  return s;
}

double KdTree3::min_chord2(const Node& a, const UnitVec& p) {
  return gap2(a.lo[0], a.hi[0], p.x, p.x) + gap2(a.lo[1], a.hi[1], p.y, p.y) +
         gap2(a.lo[2], a.hi[2], p.z, p.z);
}

std::uint64_t KdTree3::for_each_within(const UnitVec& center, double max_chord2,
                                       const std::function<void(std::uint32_t)>& fn) const {
  if (nodes_.empty()) return 0;
  std::uint64_t evals = 0;
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (min_chord2(n, center) > max_chord2) continue;
    if (n.leaf()) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        ++evals;
        if (chord2(sorted_[i], center) <= max_chord2) fn(order_[i]);
      }
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  return evals;
}

std::optional<std::uint32_t> KdTree3::nearest_within(const UnitVec& center, double max_angle) const {
  if (nodes_.empty() || !(max_angle >= 0.0)) return std::nullopt;
  // Prune on a chord slightly past max_angle; the exact angular test decides.
  const double reach = chord_for_angle(std::min(max_angle + 1e-9, std::numbers::pi));
  const double reach2 = reach * reach * (1.0 + 1e-12);
  std::optional<std::uint32_t> best;
  double best_angle = std::numeric_limits<double>::infinity();
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const Node& n = nodes_[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    if (min_chord2(n, center) > reach2) continue;
    if (n.leaf()) {
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        const double ang = angular_distance(sorted_[i], center);
        if (ang > max_angle + kAngleSlack) continue;
        const std::uint32_t idx = order_[i];
        const bool tie = std::fabs(ang - best_angle) <= 1e-9;
        if (!best || (tie && idx < *best) || (!tie && ang < best_angle)) {
          best = idx;
          best_angle = ang;
        }
      }
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }
  return best;
}

ZoneTable::ZoneTable(std::span<const double> dec_deg, double zone_height_deg) : height_(zone_height_deg) {
  if (!(zone_height_deg > 0.0)) throw ValidationError("zone height must be positive");
  const std::uint32_t nz = zone_count(zone_height_deg);
  std::vector<std::uint32_t> counts(nz + 1, 0);
  zone_of_index_.resize(dec_deg.size());
  for (std::size_t i = 0; i < dec_deg.size(); ++i) {
    zone_of_index_[i] = zone_of(dec_deg[i], zone_height_deg);
    ++counts[zone_of_index_[i] + 1];
  }
  offsets_.assign(nz + 1, 0);
  for (std::uint32_t z = 0; z < nz; ++z) offsets_[z + 1] = offsets_[z] + counts[z + 1];
  members_.resize(dec_deg.size());
  std::vector<std::uint32_t> fill(offsets_.begin(), offsets_.end() - 1);
  for (std::size_t i = 0; i < dec_deg.size(); ++i) {
    members_[fill[zone_of_index_[i]]++] = static_cast<std::uint32_t>(i);
  }
}

std::uint32_t ZoneTable::zone_count(double zone_height_deg) {
  return static_cast<std::uint32_t>(std::ceil(180.0 / zone_height_deg));
}

std::uint32_t ZoneTable::zone_of(double dec_deg, double zone_height_deg) {
  if (!(zone_height_deg > 0.0)) throw ValidationError("zone height must be positive");
  if (!(dec_deg >= -90.0 && dec_deg <= 90.0)) throw ValidationError("dec outside [-90, 90]");
  const auto z = static_cast<std::uint32_t>(std::floor((dec_deg + 90.0) / zone_height_deg));
  return std::min(z, zone_count(zone_height_deg) - 1);
}

std::span<const std::uint32_t> ZoneTable::members(std::uint32_t zone) const {
  if (zone + 1 >= offsets_.size()) return {};
  return std::span<const std::uint32_t>(members_).subspan(offsets_[zone], offsets_[zone + 1] - offsets_[zone]);
}

SpatialIndex::SpatialIndex(std::vector<std::uint64_t> ids, std::span<const SkyPos> positions,
                           double zone_height_deg, std::size_t bucket_size)
    : ids_(std::move(ids)) {
  if (ids_.size() != positions.size()) throw ValidationError("ids and positions differ in length");
  vecs_.reserve(positions.size());
  decs_.reserve(positions.size());
  for (const auto& p : positions) {
    vecs_.push_back(to_unit(p));
    decs_.push_back(p.dec_deg);
  }
  tree_ = KdTree3(vecs_, bucket_size);
  zones_ = ZoneTable(decs_, zone_height_deg);
}

std::vector<std::uint64_t> SpatialIndex::region_search(const Region& region) const {
  validate(region);
  std::vector<std::uint64_t> out;
  const auto& nodes = tree_.nodes();
  if (nodes.empty()) return out;
  const auto& order = tree_.order();
  const auto& pts = tree_.points();
  std::vector<std::int32_t> stack{0};
  while (!stack.empty()) {
    const auto& n = nodes[static_cast<std::size_t>(stack.back())];
    stack.pop_back();
    switch (classify_box(region, n.lo, n.hi)) {
      case BoxRelation::kOutside:
        break;
      case BoxRelation::kInside:
        for (std::uint32_t i = n.begin; i < n.end; ++i) out.push_back(ids_[order[i]]);
        break;
      case BoxRelation::kPartial:
        if (n.leaf()) {
          for (std::uint32_t i = n.begin; i < n.end; ++i) {
            if (contains(region, pts[i])) out.push_back(ids_[order[i]]);
          }
        } else {
          stack.push_back(n.right);
          stack.push_back(n.left);
        }
        break;
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<std::uint64_t> SpatialIndex::dec_band(double dec_lo, double dec_hi) const {
  std::vector<std::uint64_t> out;
  if (!(dec_lo < dec_hi)) return out;
  const double h = zones_.zone_height();
  const std::uint32_t z0 = ZoneTable::zone_of(std::clamp(dec_lo, -90.0, 90.0), h);
  const std::uint32_t z1 = ZoneTable::zone_of(std::clamp(dec_hi, -90.0, 90.0), h);
  for (std::uint32_t z = z0; z <= z1; ++z) {
    for (std::uint32_t idx : zones_.members(z)) {
      if (decs_[idx] >= dec_lo && decs_[idx] < dec_hi) out.push_back(ids_[idx]);
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace petacat
