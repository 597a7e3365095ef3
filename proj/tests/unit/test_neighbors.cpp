#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <set>

#include "oracles.hpp"
#include "petacat/neighbors.hpp"

using namespace petacat;

namespace {

std::vector<std::pair<std::uint64_t, std::uint64_t>> as_pairs(const NeighborsResult& r) {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> out;
  for (const auto& p : r.pairs) out.emplace_back(std::min(p.id_a, p.id_b), std::max(p.id_a, p.id_b));
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

}  // namespace

TEST(Neighbors, MatchesOracleAcrossRadii) {
  const auto sky = oracle::uniform_sky(4000, 77);
  std::vector<std::uint64_t> ids;
  std::vector<SkyPos> pos;
  for (std::size_t i = 0; i < sky.size(); ++i) {
    ids.push_back(i + 1);
    pos.push_back({sky[i].ra, sky[i].dec});
  }
  for (double arcsec : {1.0, 600.0, 3600.0, 3 * 3600.0}) {
    const NeighborsResult r = neighbors_join(ids, pos, arcsec);
    EXPECT_EQ(as_pairs(r), oracle::neighbor_pairs(ids, sky, arcsec / 3600.0 * std::numbers::pi / 180.0));
  }
}

TEST(Neighbors, SeparationsAndNoSelfPairs) {
  const auto sky = oracle::uniform_sky(1000, 5);
  std::vector<std::uint64_t> ids;
  std::vector<SkyPos> pos;
  for (std::size_t i = 0; i < sky.size(); ++i) {
    ids.push_back(10 * i);
    pos.push_back({sky[i].ra, sky[i].dec});
  }
  const NeighborsResult r = neighbors_join(ids, pos, 4 * 3600.0);
  ASSERT_FALSE(r.pairs.empty());
  std::set<std::pair<std::uint64_t, std::uint64_t>> both;
  for (const auto& p : r.pairs) both.emplace(p.id_a, p.id_b);
  for (const auto& p : r.pairs) EXPECT_TRUE(both.contains({p.id_b, p.id_a}));
  for (const auto& p : r.pairs) {
    EXPECT_NE(p.id_a, p.id_b);
    const auto& a = sky[p.id_a / 10];
    const auto& b = sky[p.id_b / 10];
    const double s = static_cast<double>(oracle::separation(a.ra, a.dec, b.ra, b.dec)) * 180.0 / std::numbers::pi * 3600.0;
    EXPECT_NEAR(p.separation_arcsec, s, 1e-6);
    EXPECT_LE(p.separation_arcsec, 4 * 3600.0 + 1e-6);
  }
  EXPECT_LT(r.distance_evaluations, 1000ull * 999 / 2);
}

TEST(Neighbors, CoincidentPointsAndSeam) {
  std::vector<std::uint64_t> ids{1, 2, 3, 4};
  std::vector<SkyPos> pos{{10, 10}, {10, 10}, {359.9999, 0}, {0.0001, 0}};
  const NeighborsResult r = neighbors_join(ids, pos, 1.0);
  const auto pairs = as_pairs(r);
  ASSERT_EQ(pairs.size(), 2u);
  EXPECT_EQ(pairs[0], (std::pair<std::uint64_t, std::uint64_t>{1, 2}));
  EXPECT_EQ(pairs[1], (std::pair<std::uint64_t, std::uint64_t>{3, 4}));
}

TEST(Neighbors, PermutationInvariant) {
  const auto sky = oracle::uniform_sky(3000, 41);
  std::vector<std::uint64_t> ids;
  std::vector<SkyPos> pos;
  for (std::size_t i = 0; i < sky.size(); ++i) {
    ids.push_back(i + 1);
    pos.push_back({sky[i].ra, sky[i].dec});
  }
  const auto base = as_pairs(neighbors_join(ids, pos, 1800.0));
  std::vector<std::size_t> perm(ids.size());
  for (std::size_t i = 0; i < perm.size(); ++i) perm[i] = (i * 7919) % perm.size();
  std::vector<std::uint64_t> ids2;
  std::vector<SkyPos> pos2;
  for (auto p : perm) {
    ids2.push_back(ids[p]);
    pos2.push_back(pos[p]);
  }
  EXPECT_EQ(as_pairs(neighbors_join(ids2, pos2, 1800.0)), base);
}

TEST(Neighbors, PruningAtTenThousandPoints) {
  const auto sky = oracle::uniform_sky(10000, 42);
  std::vector<std::uint64_t> ids;
  std::vector<SkyPos> pos;
  for (std::size_t i = 0; i < sky.size(); ++i) {
    ids.push_back(i + 1);
    pos.push_back({sky[i].ra, sky[i].dec});
  }
  const NeighborsResult r = neighbors_join(ids, pos, 60.0);
  EXPECT_LT(static_cast<double>(r.distance_evaluations), 0.25 * 10000.0 * 9999 / 2);
}
