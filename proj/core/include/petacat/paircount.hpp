#pragma once

#include <cstdint>
#include <span>
#include <vector>

#include "petacat/sphere.hpp"

namespace petacat {

enum class PairCountMode { kNaive, kDualTree };

/// Angular bin edges in radians, strictly increasing and >= 0. Bins are
/// half-open [lo, hi) except the last, which is closed. An edge >= pi acts as
/// "no upper limit".
struct AngularBins {
  std::vector<double> edges;

  std::size_t count() const { return edges.empty() ? 0 : edges.size() - 1; }
};

void validate(const AngularBins& bins);

/// `n` log-spaced bins from lo to hi (radians).
AngularBins log_bins(double lo, double hi, std::size_t n);
AngularBins linear_bins(double lo, double hi, std::size_t n);

struct PairCountHistogram {
  std::vector<double> edges;           ///< radians
  std::vector<std::uint64_t> counts;   ///< one per bin
  std::uint64_t total_pairs = 0;       ///< pairs considered: N(N-1)/2 or Na*Nb
  std::uint64_t distance_evaluations = 0;
};

/// Unordered pairs i < j of one point set.
PairCountHistogram pair_count(std::span<const UnitVec> points, const AngularBins& bins, PairCountMode mode);

/// All Na * Nb pairs between two sets.
PairCountHistogram cross_pair_count(std::span<const UnitVec> a, std::span<const UnitVec> b, const AngularBins& bins,
                                    PairCountMode mode);

}  // namespace petacat
