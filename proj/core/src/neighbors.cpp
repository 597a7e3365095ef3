#include "petacat/neighbors.hpp"

#include <algorithm>

#include "petacat/errors.hpp"
#include "petacat/spatial_index.hpp"
#include "petacat/units.hpp"

namespace petacat {

namespace {

struct SelfJoin {
  const KdTree3& tree;
  std::span<const std::uint64_t> ids;
  double theta;          // radians
  double prune_chord2;   // node pairs farther than this cannot match
  NeighborsResult& out;

  void leaf_pairs(const KdTree3::Node& a, const KdTree3::Node& b, bool same) {
    const auto& pts = tree.points();
    const auto& order = tree.order();
    for (std::uint32_t i = a.begin; i < a.end; ++i) {
      for (std::uint32_t j = same ? i + 1 : b.begin; j < b.end; ++j) {
        ++out.distance_evaluations;
        const double sep = angular_distance(pts[i], pts[j]);
        if (sep <= theta + kAngleSlack) {
          const double arcsec = sep * kRadToArcsec;
          const std::uint64_t ia = ids[order[i]], ib = ids[order[j]];
          out.pairs.push_back({ia, ib, arcsec});
          out.pairs.push_back({ib, ia, arcsec});
        }
      }
    }
  }

  void visit(std::int32_t ai, std::int32_t bi) {
    const auto& nodes = tree.nodes();
    const auto& a = nodes[static_cast<std::size_t>(ai)];
    const auto& b = nodes[static_cast<std::size_t>(bi)];
    if (ai != bi && KdTree3::min_chord2(a, b) > prune_chord2) return;
    if (a.leaf() && b.leaf()) {
      leaf_pairs(a, b, ai == bi);
      return;
    }
    if (ai == bi) {
      visit(a.left, a.left);
      visit(a.left, a.right);
      visit(a.right, a.right);
      return;
    }
    // Split the larger node.
    if (b.leaf() || (!a.leaf() && a.size() >= b.size())) {
      visit(a.left, bi);
      visit(a.right, bi);
    } else {
      visit(ai, b.left);
      visit(ai, b.right);
    }
  }
};

}  // namespace

NeighborsResult neighbors_join(std::span<const std::uint64_t> ids, std::span<const SkyPos> positions,
                               double theta_max_arcsec) {
  if (!(theta_max_arcsec > 0.0)) throw ValidationError("theta_max must be positive");
  if (ids.size() != positions.size()) throw ValidationError("ids and positions differ in length");
  NeighborsResult result;
  if (ids.size() < 2) return result;

  std::vector<UnitVec> vecs;
  vecs.reserve(positions.size());
  for (const auto& p : positions) vecs.push_back(to_unit(p));
  const KdTree3 tree(vecs);

  const double theta = theta_max_arcsec * kArcsecToRad;
  const double chord = chord_for_angle(std::min(theta + 1e-9, std::numbers::pi));
  SelfJoin join{tree, ids, theta, chord * chord * (1.0 + 1e-12), result};
  join.visit(0, 0);

  std::sort(result.pairs.begin(), result.pairs.end(), [](const NeighborPair& l, const NeighborPair& r) {
    return l.id_a != r.id_a ? l.id_a < r.id_a : l.id_b < r.id_b;
  });
  return result;
}

}  // namespace petacat
