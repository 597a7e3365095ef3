#include <gtest/gtest.h>

#include <algorithm>
#include <filesystem>
#include <map>
#include <set>

#include "petacat/errors.hpp"
#include "petacat/master.hpp"
#include "petacat/skygen.hpp"
#include "petacat/store.hpp"

using namespace petacat;
namespace fs = std::filesystem;

namespace {

skygen::Survey make_survey(std::uint64_t n, std::uint32_t passes, std::uint64_t seed) {
  skygen::SurveyConfig c;
  c.n_objects = n;
  c.passes = passes;
  c.seed = seed;
  return skygen::generate_survey(c);
}

}  // namespace

TEST(CrossMatch, RecoversStaticTruth) {
  const auto s = make_survey(2000, 10, 3);
  const CrossMatch cm = cross_match(s.detections, 1.0);
  EXPECT_EQ(cm.masters.size(), 2000u);
  std::map<std::uint64_t, std::set<std::uint64_t>> truth_to_master;
  for (std::size_t i = 0; i < s.detections.size(); ++i) truth_to_master[s.detection_truth[i]].insert(cm.master_of[i]);
  for (const auto& [t, ms] : truth_to_master) EXPECT_EQ(ms.size(), 1u);
  for (const auto& m : cm.masters) {
    EXPECT_EQ(m.n_detections, 10u);
    EXPECT_LE(m.first_mjd, m.last_mjd);
    EXPECT_GE(m.flux_variance, 0.0);
  }
}

TEST(CrossMatch, InputOrderDoesNotMatter) {
  const auto s = make_survey(300, 6, 4);
  const CrossMatch a = cross_match(s.detections, 1.0);
  std::vector<Detection> rev(s.detections.rbegin(), s.detections.rend());
  const CrossMatch b = cross_match(rev, 1.0);
  ASSERT_EQ(a.masters.size(), b.masters.size());
  for (std::size_t i = 0; i < s.detections.size(); ++i) {
    EXPECT_EQ(a.master_of[i], b.master_of[s.detections.size() - 1 - i]);
  }
}

TEST(CrossMatch, SeparatedSourcesStaySeparate) {
  std::vector<Detection> v;
  for (int p = 0; p < 3; ++p) {
    Detection a;
    a.det_id = 10 * p + 1;
    a.pass_id = p;
    a.mjd = 60000 + p;
    a.ra = 10.0;
    a.dec = 0.0;
    Detection b = a;
    b.det_id = 10 * p + 2;
    b.ra = 10.0 + 3.0 / 3600.0;
    v.push_back(a);
    v.push_back(b);
  }
  const CrossMatch cm = cross_match(v, 1.0);
  EXPECT_EQ(cm.masters.size(), 2u);
  EXPECT_THROW(cross_match(v, 0.0), ValidationError);
}

TEST(CrossMatch, MeanFluxAndVariance) {
  std::vector<Detection> v;
  const float flux[] = {10, 12, 14, 16};
  for (int p = 0; p < 4; ++p) {
    Detection d;
    d.det_id = p + 1;
    d.pass_id = p;
    d.mjd = 60000 + p;
    d.ra = 50;
    d.dec = 50;
    d.flux = flux[p];
    d.flux_err = 1.0f + p;
    d.flags = p == 2 ? 4u : 0u;
    v.push_back(d);
  }
  const CrossMatch cm = cross_match(v, 1.0);
  ASSERT_EQ(cm.masters.size(), 1u);
  EXPECT_DOUBLE_EQ(cm.masters[0].mean_flux, 13.0);
  EXPECT_DOUBLE_EQ(cm.masters[0].flux_variance, 5.0);
  EXPECT_DOUBLE_EQ(cm.masters[0].mean_flux_err, 2.5);
  EXPECT_EQ(cm.masters[0].flags, 4u);
  EXPECT_EQ(cm.masters[0].first_mjd, 60000.0);
  EXPECT_EQ(cm.masters[0].last_mjd, 60003.0);
}

TEST(BuildMaster, WritesIdsAndCatalog) {
  const fs::path dir = fs::temp_directory_path() / "petacat_test_master";
  fs::remove_all(dir);
  const auto s = make_survey(400, 5, 8);
  ingest_detections(s.detections, 4, dir.string());
  Store store(dir.string());
  const MasterReport rep = build_master(store, 1.0);
  EXPECT_EQ(rep.masters.size(), 400u);
  const Store reopened(dir.string());
  EXPECT_TRUE(reopened.manifest().masters_built);
  EXPECT_EQ(reopened.manifest().master_count, 400u);
  EXPECT_FALSE(reopened.verify().has_value());
  for (const auto& d : reopened.read_all()) {
    EXPECT_GE(d.master_id, 1u);
    EXPECT_LE(d.master_id, 400u);
  }
  const auto back = read_masters_csv(masters_path(reopened));
  ASSERT_EQ(back.size(), rep.masters.size());
  EXPECT_EQ(back[17].n_detections, rep.masters[17].n_detections);
  EXPECT_DOUBLE_EQ(back[17].ra, rep.masters[17].ra);
  const auto chains = chains_by_master(reopened.read_all());
  EXPECT_EQ(chains.size(), 400u);
}

TEST(Classification, NamesRoundTrip) {
  for (auto c : {Classification::kUnclassified, Classification::kStatic, Classification::kVariable,
                 Classification::kTransient, Classification::kMoverCandidate, Classification::kDefect}) {
    EXPECT_EQ(classification_from_name(classification_name(c)), c);
  }
  EXPECT_THROW(classification_from_name("comet"), ValidationError);
}

TEST(CrossMatch, ChainsPartitionDetectionsAndReduceByPassCount) {
  const auto s = make_survey(1000, 50, 10);
  const CrossMatch cm = cross_match(s.detections, 1.0);
  EXPECT_EQ(cm.masters.size(), 1000u);
  std::uint64_t total = 0;
  for (const auto& m : cm.masters) {
    EXPECT_EQ(m.n_detections, 50u);
    total += m.n_detections;
  }
  EXPECT_EQ(total, s.detections.size());
  std::vector<std::uint64_t> per(cm.masters.size() + 1, 0);
  for (auto id : cm.master_of) {
    ASSERT_GE(id, 1u);
    ASSERT_LE(id, cm.masters.size());
    ++per[id];
  }
  for (std::size_t id = 1; id < per.size(); ++id) EXPECT_EQ(per[id], cm.masters[id - 1].n_detections);
  EXPECT_EQ(s.detections.size() / cm.masters.size(), 50u);
}
