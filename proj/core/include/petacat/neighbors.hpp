#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "petacat/sphere.hpp"

namespace petacat {

struct NeighborPair {
  std::uint64_t id_a = 0;
  std::uint64_t id_b = 0;
  double separation_arcsec = 0.0;

  friend bool operator==(const NeighborPair&, const NeighborPair&) = default;
};

struct NeighborsResult {
  /// Both orders of every pair, sorted by (id_a, id_b).
  std::vector<NeighborPair> pairs;
  /// Point-pair separations actually computed (unordered pairs).
  std::uint64_t distance_evaluations = 0;
};

/// Every ordered pair (a, b), a != b, with separation <= theta_max_arcsec
/// (closed boundary). Coincident distinct objects are included. Implemented
/// as a dual-tree self-join over a kd-tree of unit vectors.
NeighborsResult neighbors_join(std::span<const std::uint64_t> ids, std::span<const SkyPos> positions,
                               double theta_max_arcsec);

}  // namespace petacat
