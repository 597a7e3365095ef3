#include "petacat/correlation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <limits>
#include <numbers>
#include <ostream>

#include "petacat/errors.hpp"
#include "petacat/units.hpp"

namespace petacat {

CorrelationEstimate correlation_ls(std::span<const UnitVec> data, std::span<const UnitVec> randoms,
                                   const AngularBins& bins, PairCountMode mode) {
  if (data.size() < 2 || randoms.size() < 2) throw ValidationError("correlation needs at least 2 data and 2 random points");
  const bool same = data.size() == randoms.size() && std::equal(data.begin(), data.end(), randoms.begin());

  const PairCountHistogram dd = pair_count(data, bins, mode);
  const PairCountHistogram rr = same ? dd : pair_count(randoms, bins, mode);
  PairCountHistogram dr;
  double dr_total = 0.0;
  if (same) {
    // Ordered distinct pairs: twice the unordered count, no self pairs.
    dr = dd;
    for (auto& c : dr.counts) c *= 2;
    dr_total = 2.0 * static_cast<double>(dd.total_pairs);
  } else {
    dr = cross_pair_count(data, randoms, bins, mode);
    dr_total = static_cast<double>(dr.total_pairs);
  }

  CorrelationEstimate est;
  est.distance_evaluations = dd.distance_evaluations + (same ? 0 : rr.distance_evaluations + dr.distance_evaluations);
  const double dd_total = static_cast<double>(dd.total_pairs);
  const double rr_total = static_cast<double>(rr.total_pairs);
  for (std::size_t i = 0; i + 1 < bins.edges.size(); ++i) {
    CorrelationBin b;
    b.lo = bins.edges[i];
    b.hi = bins.edges[i + 1];
    b.dd = dd.counts[i];
    b.dr = dr.counts[i];
    b.rr = rr.counts[i];
    if (b.rr > 0) {
      const double ndd = static_cast<double>(b.dd) / dd_total;
      const double ndr = static_cast<double>(b.dr) / dr_total;
      const double nrr = static_cast<double>(b.rr) / rr_total;
      b.defined = true;
      b.w = (ndd - 2.0 * ndr + nrr) / nrr;
      b.err = b.dd > 0 ? (1.0 + b.w) / std::sqrt(static_cast<double>(b.dd)) : std::numeric_limits<double>::infinity();
    } else {
      b.w = std::numeric_limits<double>::quiet_NaN();
      b.err = std::numeric_limits<double>::quiet_NaN();
    }
    est.bins.push_back(b);
  }
  return est;
}

void write_correlation_csv(std::ostream& out, const CorrelationEstimate& est) {
  out << "bin_lo_deg,bin_hi_deg,dd,dr,rr,w,err\n";
  for (const auto& b : est.bins) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%.6g,%.6g,%llu,%llu,%llu,%.6g,%.6g\n", b.lo / kDegToRad,
                  b.hi >= std::numbers::pi ? 180.0 : b.hi / kDegToRad, static_cast<unsigned long long>(b.dd),
                  static_cast<unsigned long long>(b.dr), static_cast<unsigned long long>(b.rr), b.w, b.err);
    out << buf;
  }
}

}  // namespace petacat
