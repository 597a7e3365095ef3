#include <gtest/gtest.h>

#include <numbers>
#include <numeric>

#include "oracles.hpp"
#include "petacat/errors.hpp"
#include "petacat/paircount.hpp"
#include "petacat/random.hpp"

using namespace petacat;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

std::vector<UnitVec> vecs(const std::vector<oracle::Sky>& sky) {
  std::vector<UnitVec> out;
  for (const auto& s : sky) out.push_back(to_unit(s.ra, s.dec));
  return out;
}

// Points clustered in a patch so small bins are populated.
std::vector<oracle::Sky> patch(std::size_t n, std::uint64_t seed) {
  Rng r(seed);
  std::vector<oracle::Sky> out(n);
  for (auto& s : out) {
    s.ra = 100 + r.uniform(0, 5);
    s.dec = -20 + r.uniform(0, 5);
  }
  return out;
}

}  // namespace

TEST(PairCount, SinglePairAtOneDegree) {
  const std::vector<UnitVec> pts{to_unit(0, 0), to_unit(1, 0)};
  const AngularBins bins{{0.5 * kDeg, 2 * kDeg}};
  for (auto mode : {PairCountMode::kNaive, PairCountMode::kDualTree}) {
    const auto h = pair_count(pts, bins, mode);
    EXPECT_EQ(h.counts, (std::vector<std::uint64_t>{1}));
    EXPECT_EQ(h.total_pairs, 1u);
  }
}

TEST(PairCount, DuplicatePointsLandInZeroBin) {
  const std::vector<UnitVec> pts(5, to_unit(30, 30));
  const AngularBins bins{{0.0, 1e-6, 1.0}};
  for (auto mode : {PairCountMode::kNaive, PairCountMode::kDualTree}) {
    EXPECT_EQ(pair_count(pts, bins, mode).counts, (std::vector<std::uint64_t>{10, 0}));
  }
}

TEST(PairCount, ModesAgreeWithOracle) {
  const auto sky = patch(1500, 3);
  const auto pts = vecs(sky);
  const AngularBins bins = log_bins(0.01 * kDeg, 5 * kDeg, 12);
  const auto expect = oracle::pair_histogram(sky, bins.edges);
  EXPECT_EQ(pair_count(pts, bins, PairCountMode::kNaive).counts, expect);
  EXPECT_EQ(pair_count(pts, bins, PairCountMode::kDualTree).counts, expect);
}

TEST(PairCount, FullRangeCountsEveryPair) {
  const auto pts = vecs(oracle::uniform_sky(2000, 8));
  const AngularBins bins = linear_bins(0, std::numbers::pi, 9);
  for (auto mode : {PairCountMode::kNaive, PairCountMode::kDualTree}) {
    const auto h = pair_count(pts, bins, mode);
    EXPECT_EQ(std::accumulate(h.counts.begin(), h.counts.end(), std::uint64_t{0}), 2000ull * 1999 / 2);
  }
}

TEST(PairCount, AntipodalPairInLastClosedBin) {
  const std::vector<UnitVec> pts{to_unit(0, 0), to_unit(180, 0)};
  const auto h = pair_count(pts, linear_bins(0, std::numbers::pi, 4), PairCountMode::kDualTree);
  EXPECT_EQ(h.counts.back(), 1u);
}

TEST(PairCount, DualTreeSavesWork) {
  const auto pts = vecs(oracle::uniform_sky(10000, 9));
  const AngularBins bins = log_bins(0.01 * kDeg, 1 * kDeg, 10);
  const auto h = pair_count(pts, bins, PairCountMode::kDualTree);
  EXPECT_LT(static_cast<double>(h.distance_evaluations), 0.25 * 10000.0 * 9999 / 2);
  EXPECT_EQ(h.counts, pair_count(pts, bins, PairCountMode::kNaive).counts);
}

TEST(PairCount, CrossMatchesNaive) {
  const auto a = vecs(patch(700, 4)), b = vecs(patch(900, 5));
  const AngularBins bins = log_bins(0.02 * kDeg, 4 * kDeg, 8);
  const auto naive = cross_pair_count(a, b, bins, PairCountMode::kNaive);
  const auto dual = cross_pair_count(a, b, bins, PairCountMode::kDualTree);
  EXPECT_EQ(naive.counts, dual.counts);
  EXPECT_EQ(naive.total_pairs, 700u * 900u);
}

TEST(PairCount, Errors) {
  const std::vector<UnitVec> one{to_unit(0, 0)};
  EXPECT_THROW(pair_count(one, linear_bins(0, 1, 2), PairCountMode::kNaive), ValidationError);
  EXPECT_THROW(validate(AngularBins{{0.1, 0.1}}), ValidationError);
  EXPECT_THROW(validate(AngularBins{{-0.1, 0.1}}), ValidationError);
  EXPECT_THROW(validate(AngularBins{{0.1}}), ValidationError);
  EXPECT_THROW(log_bins(0, 1, 4), ValidationError);
}
