#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "petacat/paircount.hpp"

namespace petacat {

struct CorrelationBin {
  double lo = 0.0;  ///< radians
  double hi = 0.0;
  std::uint64_t dd = 0;
  std::uint64_t dr = 0;
  std::uint64_t rr = 0;
  bool defined = false;  ///< false when rr == 0
  double w = 0.0;
  double err = 0.0;      ///< (1 + w) / sqrt(dd); infinite when dd == 0
};

struct CorrelationEstimate {
  std::vector<CorrelationBin> bins;
  std::uint64_t distance_evaluations = 0;
};

/// Landy-Szalay estimator with counts normalized by their pair totals. When
/// `randoms` is the same point set as `data`, DR runs over distinct index
/// pairs only, so the estimator vanishes identically.
CorrelationEstimate correlation_ls(std::span<const UnitVec> data, std::span<const UnitVec> randoms,
                                   const AngularBins& bins, PairCountMode mode = PairCountMode::kDualTree);

/// CSV `bin_lo_deg,bin_hi_deg,dd,dr,rr,w,err`; undefined bins print `nan`.
void write_correlation_csv(std::ostream& out, const CorrelationEstimate& est);

}  // namespace petacat
