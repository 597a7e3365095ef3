#include <gtest/gtest.h>

#include <algorithm>
#include <sstream>

#include "petacat/errors.hpp"
#include "petacat/master.hpp"
#include "petacat/skygen.hpp"
#include "petacat/spatial_index.hpp"
#include "petacat/trigger.hpp"

using namespace petacat;

namespace {

struct Split {
  std::vector<MasterObject> masters;
  std::vector<Detection> stream;
};

// Masters from the first half of a static survey, stream from the second half.
Split build(std::uint64_t n, std::uint32_t passes, std::uint64_t seed) {
  skygen::SurveyConfig c;
  c.n_objects = n;
  c.passes = passes;
  c.seed = seed;
  const auto s = skygen::generate_survey(c);
  std::vector<Detection> ref, stream;
  for (const auto& d : s.detections) (d.pass_id < passes / 2 ? ref : stream).push_back(d);
  Split out;
  out.masters = cross_match(ref, 1.0).masters;
  for (auto& d : stream) d.zone = ZoneTable::zone_of(d.dec, 1.0);
  std::sort(stream.begin(), stream.end(), [](const Detection& a, const Detection& b) {
    return a.mjd != b.mjd ? a.mjd < b.mjd : a.zone < b.zone;
  });
  out.stream = std::move(stream);
  return out;
}

}  // namespace

TEST(Trigger, QuiescentStreamRaisesNothing) {
  const Split s = build(2000, 20, 1);
  const MasterCatalog cat(s.masters);
  EXPECT_TRUE(run_trigger(s.stream, cat, {}).empty());
}

TEST(Trigger, NewSourceFarFromEverything) {
  Split s = build(500, 10, 2);
  Detection d = s.stream.back();
  const MasterCatalog cat(s.masters);
  d.det_id = 999999;
  d.dec = d.dec > 0 ? d.dec - 10 : d.dec + 10;
  while (cat.nearest(to_unit(d.ra, d.dec), 1.0 / 206264.806) != nullptr) d.ra = std::fmod(d.ra + 0.01, 360.0);
  d.zone = s.stream.back().zone;
  d.mjd += 1;
  s.stream.push_back(d);
  const auto alerts = run_trigger(s.stream, cat, {});
  ASSERT_EQ(alerts.size(), 1u);
  EXPECT_EQ(alerts[0].kind, AlertKind::kNewSource);
  EXPECT_EQ(alerts[0].det_id, 999999u);
  EXPECT_EQ(alerts[0].nearest_master_id, 0u);
}

TEST(Trigger, FluxJumpIsAnAnomaly) {
  Split s = build(500, 10, 3);
  const MasterCatalog cat(s.masters);
  Detection& d = s.stream[123];
  const MasterObject* m = cat.nearest(to_unit(d.ra, d.dec), 1.0 / 206264.806);
  ASSERT_NE(m, nullptr);
  d.flux = static_cast<float>(m->mean_flux + 10 * combined_error(*m, d.flux_err));
  const auto alerts = run_trigger(s.stream, cat, {});
  ASSERT_EQ(alerts.size(), 1u);
  EXPECT_EQ(alerts[0].kind, AlertKind::kFluxAnomaly);
  EXPECT_EQ(alerts[0].nearest_master_id, m->master_id);
  EXPECT_NEAR(alerts[0].deviation_sigmas, 10.0, 0.01);
}

TEST(Trigger, Deterministic) {
  Split s = build(300, 10, 4);
  for (std::size_t i = 0; i < s.stream.size(); i += 97) s.stream[i].flux *= 3;
  const MasterCatalog cat(s.masters);
  const auto a = run_trigger(s.stream, cat, {});
  const auto b = run_trigger(s.stream, cat, {});
  ASSERT_FALSE(a.empty());
  std::ostringstream x, y;
  write_alerts_csv(x, a);
  write_alerts_csv(y, b);
  EXPECT_EQ(x.str(), y.str());
  EXPECT_EQ(x.str().rfind(alert_csv_header(), 0), 0u);
}

TEST(Trigger, OutOfOrderStreamIsRejected) {
  Split s = build(100, 4, 5);
  std::swap(s.stream[10], s.stream[40]);
  const MasterCatalog cat(s.masters);
  try {
    run_trigger(s.stream, cat, {});
    FAIL();
  } catch (const ValidationError& e) {
    EXPECT_NE(std::string(e.what()).find("order"), std::string::npos);
  }
}

TEST(Trigger, CombinedErrorAddsIntrinsicScatter) {
  MasterObject m;
  m.n_detections = 4;
  m.flux_variance = 4.0;
  m.mean_flux_err = 1.0;
  EXPECT_DOUBLE_EQ(combined_error(m, 1.0), std::sqrt(1.0 + 1.0 + 3.0));
  m.flux_variance = 0.5;
  EXPECT_DOUBLE_EQ(combined_error(m, 2.0), std::sqrt(4.0 + 0.125));
}

TEST(Trigger, ParameterErrors) {
  const MasterCatalog cat({});
  TriggerParams p;
  p.k_sigma = 0;
  EXPECT_THROW(run_trigger({}, cat, p), ValidationError);
  p = {};
  p.match_radius_arcsec = -1;
  EXPECT_THROW(run_trigger({}, cat, p), ValidationError);
}
