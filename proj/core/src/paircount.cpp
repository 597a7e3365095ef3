#include "petacat/paircount.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "petacat/errors.hpp"
#include "petacat/spatial_index.hpp"

namespace petacat {

void validate(const AngularBins& bins) {
  if (bins.edges.size() < 2) throw ValidationError("need at least two bin edges");
  for (std::size_t i = 0; i < bins.edges.size(); ++i) {
    if (std::isnan(bins.edges[i])) throw ValidationError("bin edges must be numbers");
    if (bins.edges[i] < 0.0) throw ValidationError("bin edges must be non-negative");
    if (i > 0 && !(bins.edges[i] > bins.edges[i - 1])) throw ValidationError("bin edges must strictly increase");
  }
}

AngularBins log_bins(double lo, double hi, std::size_t n) {
  if (!(lo > 0.0) || !(hi > lo) || n < 1) throw ValidationError("log bins need 0 < lo < hi and n >= 1");
  AngularBins b;
  for (std::size_t i = 0; i <= n; ++i) {
    b.edges.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / static_cast<double>(n)));
  }
  b.edges.back() = hi;
  return b;
}

AngularBins linear_bins(double lo, double hi, std::size_t n) {
  if (!(lo >= 0.0) || !(hi > lo) || n < 1) throw ValidationError("linear bins need 0 <= lo < hi and n >= 1");
  AngularBins b;
  for (std::size_t i = 0; i <= n; ++i) b.edges.push_back(lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n));
  b.edges.back() = hi;
  return b;
}

namespace {

// Bins in chord^2, where all comparisons happen.
class ChordBins {
public:
  explicit ChordBins(const AngularBins& bins) {
    validate(bins);
    for (const double e : bins.edges) {
      if (e >= std::numbers::pi) {
        edges_.push_back(std::numeric_limits<double>::infinity());
      } else {
        const double c = chord_for_angle(e);
        edges_.push_back(c * c);
      }
    }
  }

  std::size_t size() const { return edges_.size() - 1; }

  /// Bin index of chord^2 d2, or size() when outside every bin.
  std::size_t bin_of(double d2) const {
    if (d2 < edges_.front()) return size();
    const std::size_t last = size() - 1;
    if (d2 >= edges_[last]) return d2 <= edges_.back() ? last : size();
    const auto it = std::upper_bound(edges_.begin(), edges_.end(), d2);
    return static_cast<std::size_t>(it - edges_.begin()) - 1;
  }

  double lo() const { return edges_.front(); }
  double hi() const { return edges_.back(); }

private:
  std::vector<double> edges_;
};

// Node bounds are widened by this much before any pruning decision, so a
// pruned node pair never disagrees with the per-pair evaluation.
constexpr double kBoundMargin = 1e-12;

class Counter {
public:
  Counter(const ChordBins& bins, std::vector<std::uint64_t>& counts, std::uint64_t& evals)
      : bins_(bins), counts_(counts), evals_(evals) {}

  void self(const KdTree3& t, std::int32_t a) {
    const auto& n = t.nodes()[a];
    if (n.leaf()) {
      const auto& p = t.points();
      for (std::uint32_t i = n.begin; i < n.end; ++i) {
        for (std::uint32_t j = i + 1; j < n.end; ++j) add(chord2(p[i], p[j]));
      }
      return;
    }
    // A node's self pairs can still be settled wholesale.
    if (settle(t, n, t, n, static_cast<std::uint64_t>(n.size()) * (n.size() - 1) / 2)) return;
    self(t, n.left);
    cross(t, n.left, t, n.right);
    self(t, n.right);
  }

  void cross(const KdTree3& ta, std::int32_t a, const KdTree3& tb, std::int32_t b) {
    const auto& na = ta.nodes()[a];
    const auto& nb = tb.nodes()[b];
    if (settle(ta, na, tb, nb, static_cast<std::uint64_t>(na.size()) * nb.size())) return;
    if (na.leaf() && nb.leaf()) {
      const auto& pa = ta.points();
      const auto& pb = tb.points();
      for (std::uint32_t i = na.begin; i < na.end; ++i) {
        for (std::uint32_t j = nb.begin; j < nb.end; ++j) add(chord2(pa[i], pb[j]));
      }
      return;
    }
    if (nb.leaf() || (!na.leaf() && na.size() >= nb.size())) {
      cross(ta, na.left, tb, b);
      cross(ta, na.right, tb, b);
    } else {
      cross(ta, a, tb, nb.left);
      cross(ta, a, tb, nb.right);
    }
  }

  void add(double d2) {
    ++evals_;
    const std::size_t k = bins_.bin_of(d2);
    if (k < counts_.size()) ++counts_[k];
  }

private:
  // True when every pair between the two nodes is outside all bins or
  // inside one bin; counts are added in the latter case.
  bool settle(const KdTree3&, const KdTree3::Node& a, const KdTree3&, const KdTree3::Node& b, std::uint64_t pairs) {
    const double lo = KdTree3::min_chord2(a, b) - kBoundMargin;
    const double hi = KdTree3::max_chord2(a, b) + kBoundMargin;
    if (hi < bins_.lo() || lo > bins_.hi()) return true;
    const std::size_t kl = bins_.bin_of(std::max(lo, 0.0));
    const std::size_t kh = bins_.bin_of(hi);
    if (kl == kh && kl < counts_.size()) {
      counts_[kl] += pairs;
      return true;
    }
    return false;
  }

  const ChordBins& bins_;
  std::vector<std::uint64_t>& counts_;
  std::uint64_t& evals_;
};

}  // namespace

PairCountHistogram pair_count(std::span<const UnitVec> points, const AngularBins& bins, PairCountMode mode) {
  if (points.size() < 2) throw ValidationError("pair counting needs at least 2 points");
  const ChordBins cb(bins);
  PairCountHistogram h;
  h.edges = bins.edges;
  h.counts.assign(cb.size(), 0);
  const std::uint64_t n = points.size();
  h.total_pairs = n * (n - 1) / 2;
  Counter counter(cb, h.counts, h.distance_evaluations);
  if (mode == PairCountMode::kNaive) {
    for (std::size_t i = 0; i < points.size(); ++i) {
      for (std::size_t j = i + 1; j < points.size(); ++j) counter.add(chord2(points[i], points[j]));
    }
  } else {
    const KdTree3 tree(points);
    counter.self(tree, 0);
  }
  return h;
}

PairCountHistogram cross_pair_count(std::span<const UnitVec> a, std::span<const UnitVec> b, const AngularBins& bins,
                                    PairCountMode mode) {
  if (a.empty() || b.empty()) throw ValidationError("cross pair counting needs two non-empty sets");
  const ChordBins cb(bins);
  PairCountHistogram h;
  h.edges = bins.edges;
  h.counts.assign(cb.size(), 0);
  h.total_pairs = static_cast<std::uint64_t>(a.size()) * b.size();
  Counter counter(cb, h.counts, h.distance_evaluations);
  if (mode == PairCountMode::kNaive) {
    for (const auto& p : a) {
      for (const auto& q : b) counter.add(chord2(p, q));
    }
  } else {
    const KdTree3 ta(a);
    const KdTree3 tb(b);
    counter.cross(ta, 0, tb, 0);
  }
  return h;
}

}  // namespace petacat
