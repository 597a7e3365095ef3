#include <gtest/gtest.h>

#include <algorithm>
#include <numbers>
#include <sstream>

#include "petacat/errors.hpp"
#include "petacat/movers.hpp"
#include "petacat/random.hpp"

using namespace petacat;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Mover {
  double ra, dec, rate_deg_day, pa_deg;
};

std::vector<Detection> observe(const std::vector<Mover>& movers, std::uint32_t passes, double cadence,
                               std::uint64_t seed, double jitter_arcsec = 0.0, std::size_t noise = 0) {
  Rng r(seed);
  std::vector<Detection> out;
  std::uint64_t id = 1;
  for (std::uint32_t p = 0; p < passes; ++p) {
    for (const auto& m : movers) {
      const double t = p * cadence + r.uniform(0, 0.5);
      UnitVec v = offset_along(to_unit(m.ra, m.dec), m.pa_deg * kDeg, m.rate_deg_day * kDeg * t);
      if (jitter_arcsec > 0) v = offset_along(v, r.uniform(0, 2 * std::numbers::pi), std::fabs(r.normal()) * jitter_arcsec / 3600 * kDeg);
      const SkyPos s = to_sky(v);
      Detection d;
      d.det_id = id++;
      d.pass_id = p;
      d.mjd = 60000 + t;
      d.ra = s.ra_deg;
      d.dec = s.dec_deg;
      d.flux = 50;
      out.push_back(d);
    }
    for (std::size_t k = 0; k < noise; ++k) {
      Detection d;
      d.det_id = id++;
      d.pass_id = p;
      d.mjd = 60000 + p * cadence + r.uniform(0, 0.5);
      d.ra = r.uniform(0, 360);
      d.dec = std::asin(r.uniform(-1, 1)) / kDeg;
      out.push_back(d);
    }
  }
  return out;
}

}  // namespace

TEST(GreatCircle, ExactMotionHasZeroResidual) {
  const UnitVec start = to_unit(40, 10);
  std::vector<UnitVec> pts;
  std::vector<double> t;
  for (int i = 0; i < 6; ++i) {
    t.push_back(60000 + 1.5 * i);
    pts.push_back(offset_along(start, 0.7, 0.002 * i));
  }
  const GreatCircleFit fit = fit_great_circle(pts, t);
  EXPECT_LT(fit.rms, 1e-12);
  EXPECT_NEAR(std::fabs(fit.omega), 0.002 / 1.5, 1e-12);
  for (std::size_t i = 0; i < pts.size(); ++i) EXPECT_LT(angular_distance(fit.at(t[i]), pts[i]), 1e-12);
}

TEST(Movers, ThreeExactPointsMakeOneTrack) {
  const auto dets = observe({{100, 20, 0.2, 60}}, 3, 1.0, 1);
  const auto tracks = link_movers(dets, {});
  ASSERT_EQ(tracks.size(), 1u);
  EXPECT_EQ(tracks[0].members, (std::vector<std::uint64_t>{1, 2, 3}));
  EXPECT_NEAR(tracks[0].rate_deg_per_day, 0.2, 1e-9);
  const double pa = position_angle(to_unit(dets[0].ra, dets[0].dec), to_unit(dets[1].ra, dets[1].dec)) / kDeg;
  EXPECT_NEAR(tracks[0].position_angle_deg, pa, 1e-6);
  EXPECT_NEAR(tracks[0].position_angle_deg, 60, 0.01);
  EXPECT_LT(tracks[0].rms_arcsec, 1e-6);
  EXPECT_FALSE(tracks[0].debris_candidate);
  EXPECT_EQ(tracks[0].track_id, 1u);
}

TEST(Movers, TwoPointsAreNotATrack) {
  EXPECT_TRUE(link_movers(observe({{100, 20, 0.2, 60}}, 2, 1.0, 1), {}).empty());
}

TEST(Movers, MatchedDetectionsAreIgnored) {
  auto dets = observe({{100, 20, 0.2, 60}}, 5, 1.0, 2);
  for (auto& d : dets) d.master_id = 7;
  EXPECT_TRUE(link_movers(dets, {}).empty());
}

TEST(Movers, StationaryPointsAreNotMovers) {
  const auto dets = observe({{10, 10, 0.0, 0}}, 6, 1.0, 3);
  EXPECT_TRUE(link_movers(dets, {}).empty());
}

TEST(Movers, CrossingTracksStaySeparate) {
  // Both pass through (50, 0) around day 5.
  const UnitVec x = to_unit(50, 0);
  const double r1 = 0.3, r2 = 0.25;
  const SkyPos s1 = to_sky(offset_along(x, 45 * kDeg + std::numbers::pi, r1 * 5 * kDeg));
  const SkyPos s2 = to_sky(offset_along(x, 135 * kDeg + std::numbers::pi, r2 * 5 * kDeg));
  const auto dets = observe({{s1.ra_deg, s1.dec_deg, r1, 45}, {s2.ra_deg, s2.dec_deg, r2, 135}}, 10, 1.0, 4, 0.1, 30);
  const auto tracks = link_movers(dets, {});
  ASSERT_EQ(tracks.size(), 2u);
  for (const auto& t : tracks) {
    EXPECT_EQ(t.members.size(), 10u);
    EXPECT_LE(t.rms_arcsec, 1.0);
  }
  EXPECT_NEAR(std::min(tracks[0].rate_deg_per_day, tracks[1].rate_deg_per_day), r2, 0.01);
  EXPECT_NEAR(std::max(tracks[0].rate_deg_per_day, tracks[1].rate_deg_per_day), r1, 0.01);
}

TEST(Movers, InputOrderDoesNotMatter) {
  auto dets = observe({{200, -30, 0.1, 10}, {201, -30.5, 0.4, 200}, {30, 60, 0.05, 300}}, 8, 2.0, 5, 0.2, 40);
  const auto base = link_movers(dets, {});
  ASSERT_EQ(base.size(), 3u);
  Rng r(6);
  for (int k = 0; k < 5; ++k) {
    for (std::size_t i = dets.size(); i > 1; --i) std::swap(dets[i - 1], dets[r.below(i)]);
    const auto again = link_movers(dets, {});
    ASSERT_EQ(again.size(), base.size());
    for (std::size_t i = 0; i < base.size(); ++i) {
      EXPECT_EQ(again[i].members, base[i].members);
      EXPECT_EQ(again[i].rate_deg_per_day, base[i].rate_deg_per_day);
    }
  }
}

TEST(Movers, DebrisFlagAboveRateCut) {
  const auto tracks = link_movers(observe({{0.5, 1, 0.9, 90}}, 4, 1.0, 7), {});
  ASSERT_EQ(tracks.size(), 1u);
  EXPECT_TRUE(tracks[0].debris_candidate);
}

TEST(Movers, TooFastIsRejected) {
  EXPECT_TRUE(link_movers(observe({{0.5, 1, 1.5, 90}}, 4, 1.0, 7), {}).empty());
}

TEST(Movers, SelectOrphans) {
  std::vector<Detection> dets(4);
  for (int i = 0; i < 4; ++i) dets[i].det_id = i + 1;
  dets[0].master_id = 0;
  dets[1].master_id = 5;
  dets[2].master_id = 6;
  dets[3].master_id = 6;
  MasterObject a, b;
  a.master_id = 5;
  a.n_detections = 1;
  b.master_id = 6;
  b.n_detections = 2;
  const std::vector<MasterObject> masters{a, b};
  const auto orphans = select_orphans(dets, masters);
  ASSERT_EQ(orphans.size(), 2u);
  EXPECT_EQ(orphans[0].det_id, 1u);
  EXPECT_EQ(orphans[1].det_id, 2u);
  EXPECT_EQ(orphans[1].master_id, 0u);
}

TEST(Movers, ParameterErrors) {
  MoverParams p;
  p.min_track_length = 2;
  EXPECT_THROW(link_movers({}, p), ValidationError);
  p = {};
  p.rate_max_deg_per_day = 0;
  EXPECT_THROW(link_movers({}, p), ValidationError);
}

TEST(Movers, CsvHasOneRowPerTrack) {
  const auto tracks = link_movers(observe({{100, 20, 0.2, 60}}, 4, 1.0, 1), {});
  std::ostringstream out;
  write_tracks_csv(out, tracks);
  const std::string s = out.str();
  EXPECT_EQ(std::count(s.begin(), s.end(), '\n'), 2);
  EXPECT_EQ(s.rfind("track_id,", 0), 0u);
}
