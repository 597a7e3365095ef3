#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <vector>

#include "petacat/sphere.hpp"

namespace petacat {

/// Static kd-tree over unit vectors. Splits cycle by widest extent at the
/// median; leaves hold at most `bucket_size` points. Nodes are stored flat,
/// children of a node are contiguous ranges of `order()`.
class KdTree3 {
public:
  struct Node {
    double lo[3];
    double hi[3];
    std::uint32_t begin = 0;
    std::uint32_t end = 0;
    std::int32_t left = -1;   ///< -1 for leaves
    std::int32_t right = -1;

    bool leaf() const { return left < 0; }
    std::uint32_t size() const { return end - begin; }
  };

  static constexpr std::size_t kDefaultBucket = 32;

  KdTree3() = default;
  explicit KdTree3(std::span<const UnitVec> points, std::size_t bucket_size = kDefaultBucket);

  const std::vector<Node>& nodes() const { return nodes_; }
  const Node& root() const { return nodes_.front(); }
  bool empty() const { return nodes_.empty(); }

  /// Permutation of input indices; leaf ranges index into it.
  const std::vector<std::uint32_t>& order() const { return order_; }
  /// Points in tree order (points()[i] == input[order()[i]]).
  const std::vector<UnitVec>& points() const { return sorted_; }

  /// Calls fn(input_index) for every point with chord2 to `center` <= max_chord2.
  /// Returns the number of point distance evaluations.
  std::uint64_t for_each_within(const UnitVec& center, double max_chord2,
                                const std::function<void(std::uint32_t)>& fn) const;

  /// Nearest point with angular distance <= max_angle; ties within 1e-9 rad
  /// go to the lower input index.
  std::optional<std::uint32_t> nearest_within(const UnitVec& center, double max_angle) const;

  static double min_chord2(const Node& a, const Node& b);
  static double max_chord2(const Node& a, const Node& b);
  static double min_chord2(const Node& a, const UnitVec& p);

private:
  std::int32_t build(std::uint32_t begin, std::uint32_t end, std::size_t bucket);

  std::vector<Node> nodes_;
  std::vector<std::uint32_t> order_;
  std::vector<UnitVec> sorted_;
};

/// Constant-height declination bands. zone_id = floor((dec + 90) / height),
/// with dec = +90 folded into the top zone.
class ZoneTable {
public:
  ZoneTable() = default;
  ZoneTable(std::span<const double> dec_deg, double zone_height_deg);

  static std::uint32_t zone_of(double dec_deg, double zone_height_deg);
  static std::uint32_t zone_count(double zone_height_deg);

  double zone_height() const { return height_; }
  std::span<const std::uint32_t> members(std::uint32_t zone) const;
  std::uint32_t zone_of_member(std::uint32_t index) const { return zone_of_index_[index]; }
  std::uint32_t count() const { return static_cast<std::uint32_t>(offsets_.size() - 1); }

private:
  double height_ = 1.0;
  std::vector<std::uint32_t> offsets_{0};  // CSR layout: zone z spans [offsets_[z], offsets_[z+1])
  std::vector<std::uint32_t> members_;
  std::vector<std::uint32_t> zone_of_index_;
};

/// Immutable index over a positioned id table: kd-tree for region searches
/// plus a zone table for declination-band queries.
class SpatialIndex {
public:
  SpatialIndex(std::vector<std::uint64_t> ids, std::span<const SkyPos> positions,
               double zone_height_deg = 1.0, std::size_t bucket_size = KdTree3::kDefaultBucket);

  std::size_t size() const { return ids_.size(); }
  const std::vector<std::uint64_t>& ids() const { return ids_; }
  const std::vector<UnitVec>& vectors() const { return vecs_; }
  const std::vector<double>& decs() const { return decs_; }
  const KdTree3& tree() const { return tree_; }
  const ZoneTable& zones() const { return zones_; }

  /// Ids whose positions satisfy the region predicate, sorted ascending.
  std::vector<std::uint64_t> region_search(const Region& region) const;

  /// Ids with dec in [dec_lo, dec_hi), sorted ascending, found via zones.
  std::vector<std::uint64_t> dec_band(double dec_lo, double dec_hi) const;

  /// Row index (not id) of the nearest entry within max_angle.
  std::optional<std::uint32_t> nearest_within(const UnitVec& p, double max_angle) const {
    return tree_.nearest_within(p, max_angle);
  }

private:
  std::vector<std::uint64_t> ids_;
  std::vector<UnitVec> vecs_;
  std::vector<double> decs_;
  KdTree3 tree_;
  ZoneTable zones_;
};

}  // namespace petacat
