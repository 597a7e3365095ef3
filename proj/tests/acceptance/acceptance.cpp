// Acceptance suite: one PASS/FAIL line per criterion.
//   petacat_acceptance [--only NAME] [--work DIR]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "oracles.hpp"
#include "petacat/correlation.hpp"
#include "petacat/lightcurve.hpp"
#include "petacat/master.hpp"
#include "petacat/mixture.hpp"
#include "petacat/movers.hpp"
#include "petacat/neighbors.hpp"
#include "petacat/paircount.hpp"
#include "petacat/planner.hpp"
#include "petacat/random.hpp"
#include "petacat/scan.hpp"
#include "petacat/skygen.hpp"
#include "petacat/spatial_index.hpp"
#include "petacat/store.hpp"
#include "petacat/trigger.hpp"
#include "petacat_cli/cli.hpp"

using namespace petacat;
namespace fs = std::filesystem;

namespace {

constexpr double kDeg = std::numbers::pi / 180.0;

struct Outcome {
  bool pass = true;
  std::ostringstream detail;

  void check(bool ok, const std::string& what) {
    if (!ok) {
      pass = false;
      detail << "[fail] ";
    }
    detail << what << "; ";
  }
};

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

bool within(double v, double target, double rel) { return std::fabs(v - target) <= rel * std::fabs(target); }

// ---------------------------------------------------------------------------

void planner_criterion(Outcome& o, const fs::path&) {
  using namespace petacat::planner;
  const auto t0 = std::chrono::steady_clock::now();
  const auto acq = plan_acquisition({});
  o.check(within(acq.bytes_per_pass, 20e12, 0.02), "pass " + fmt("%.3g B", acq.bytes_per_pass));
  o.check(within(acq.bytes_per_year, 1e15, 0.02), "year " + fmt("%.3g B", acq.bytes_per_year));
  o.check(within(acq.stream_rate, 170e6, 0.02), "stream " + fmt("%.4g B/s", acq.stream_rate));

  PipelineSpec later;
  later.years_ahead = 6;
  const auto cpus0 = plan_pipeline({}), cpus6 = plan_pipeline(later);
  o.check(cpus0 == 284, "cpus year 0 = " + std::to_string(cpus0));
  o.check(cpus6 == 18, "cpus year 6 = " + std::to_string(cpus6));

  const auto st = plan_storage({});
  o.check(within(st.catalog_bytes, 100e12, 0.02), "catalog " + fmt("%.4g", st.catalog_bytes));
  o.check(within(st.indexed_bytes, 120e12, 0.02), "indexed " + fmt("%.4g", st.indexed_bytes));
  o.check(within(st.coadd_bytes, 45e12, 0.02), "coadd " + fmt("%.4g", st.coadd_bytes));
  o.check(within(st.master_bytes, 4e12, 0.25), "master " + fmt("%.4g", st.master_bytes));

  const auto s30 = plan_scan({});
  ScanSpec wide;
  wide.disk_count = 240;
  const auto s240 = plan_scan(wide);
  ScanSpec master;
  master.db_bytes = 4e12;
  master.disk_count = 500;
  const auto sm = plan_scan(master);
  o.check(within(s30.scan_seconds / 3600, 7.4, 0.02), "scan 30 disks " + fmt("%.3f h", s30.scan_seconds / 3600));
  o.check(within(s240.scan_seconds / 3600, 0.93, 0.02) && s240.servers_needed == 8,
          "scan 240 disks " + fmt("%.3f h", s240.scan_seconds / 3600) + " on " + std::to_string(s240.servers_needed) +
              " servers");
  o.check(within(sm.aggregate_rate, 75e9, 0.02) && within(sm.scan_seconds, 53, 0.02),
          "master scan " + fmt("%.1f s", sm.scan_seconds) + " at " + fmt("%.3g B/s", sm.aggregate_rate));

  const auto tr = plan_transfer({});
  TransferSpec bricks;
  bricks.total_bytes = 160e12;
  const auto tb = plan_transfer(bricks);
  o.check(within(tr.network_days, 191, 0.02) && within(tr.network_days, 200, 0.10),
          "network " + fmt("%.1f d", tr.network_days));
  o.check(tb.brick_count == 5, "bricks for 160 TB = " + std::to_string(tb.brick_count));

  const double peak = peak_load_rate(acq.stream_rate, 0.12);
  o.check(within(peak, 20e6, 0.02), "peak load " + fmt("%.4g B/s", peak));
  const double secs = seconds_since(t0);
  o.check(secs < 1.0, "runtime " + fmt("%.4f s", secs));
}

// ---------------------------------------------------------------------------

void spatial_criterion(Outcome& o, const fs::path&) {
  double lib_seconds = 0.0;
  std::size_t regions = 0, mismatched = 0, neighbor_mismatch = 0;
  for (int c = 0; c < 10; ++c) {
    const std::size_t n = 1000 * static_cast<std::size_t>(c + 1);
    const auto sky = oracle::uniform_sky(n, 500 + c);
    std::vector<std::uint64_t> ids(n);
    std::vector<SkyPos> pos(n);
    for (std::size_t i = 0; i < n; ++i) {
      ids[i] = 7 * i + 3;
      pos[i] = {sky[i].ra, sky[i].dec};
    }
    auto t0 = std::chrono::steady_clock::now();
    const SpatialIndex index(ids, pos);
    lib_seconds += seconds_since(t0);

    Rng r(900 + c);
    for (int q = 0; q < 20; ++q) {
      std::vector<std::uint64_t> got, want;
      if (q % 2 == 0) {
        const double ra = r.uniform(0, 360), dec = std::asin(r.uniform(-1, 1)) / kDeg, rad = r.uniform(0.1, 30) * kDeg;
        t0 = std::chrono::steady_clock::now();
        got = index.region_search(make_cone(ra, dec, rad));
        lib_seconds += seconds_since(t0);
        want = oracle::cone(ids, sky, ra, dec, rad);
      } else {
        ConvexPolygon poly;
        std::vector<oracle::Plane> planes;
        const UnitVec centre = to_unit(r.uniform(0, 360), std::asin(r.uniform(-1, 1)) / kDeg);
        const int k = 3 + static_cast<int>(r.below(6));
        for (int h = 0; h < k; ++h) {
          // Halfspaces leaning toward a common centre keep the polygon non-empty.
          const UnitVec tilt = offset_along(centre, r.uniform(0, 2 * std::numbers::pi), r.uniform(0, 0.6));
          const double off = r.uniform(0.2, 0.9);
          poly.halfspaces.push_back({tilt, off});
          planes.push_back({tilt.x, tilt.y, tilt.z, off});
        }
        t0 = std::chrono::steady_clock::now();
        got = index.region_search(poly);
        lib_seconds += seconds_since(t0);
        want = oracle::polygon(ids, sky, planes);
      }
      std::sort(got.begin(), got.end());
      ++regions;
      mismatched += got != want;
    }

    t0 = std::chrono::steady_clock::now();
    const NeighborsResult nb = neighbors_join(ids, pos, 60.0);
    lib_seconds += seconds_since(t0);
    std::vector<std::pair<std::uint64_t, std::uint64_t>> got;
    for (const auto& p : nb.pairs) got.emplace_back(std::min(p.id_a, p.id_b), std::max(p.id_a, p.id_b));
    std::sort(got.begin(), got.end());
    got.erase(std::unique(got.begin(), got.end()), got.end());
    neighbor_mismatch += got != oracle::neighbor_pairs(ids, sky, 60.0 / 3600.0 * kDeg);
  }
  o.check(mismatched == 0, std::to_string(regions - mismatched) + "/" + std::to_string(regions) + " regions exact");
  o.check(neighbor_mismatch == 0, std::to_string(10 - neighbor_mismatch) + "/10 neighbor joins exact");
  o.check(lib_seconds < 30.0, "runtime " + fmt("%.2f s", lib_seconds));
}

// ---------------------------------------------------------------------------

void scan_criterion(Outcome& o, const fs::path& work) {
  const fs::path dir = work / "scan_store";
  if (!fs::exists(Store::manifest_path(dir.string())) ||
      Store(dir.string()).manifest().total_records != 1000000) {
    skygen::SurveyConfig c;
    c.n_objects = 20000;
    c.passes = 50;
    c.seed = 77;
    ingest_detections(skygen::generate_survey(c).detections, 16, dir.string());
  }
  const Store store(dir.string());
  o.check(store.manifest().total_records == 1000000 && store.manifest().partition_count == 16,
          std::to_string(store.manifest().total_records) + " records in " +
              std::to_string(store.manifest().partition_count) + " partitions");

  ScanOptions opt;
  opt.predicate = Predicate::parse("flux > 400 and pass_id < 40");
  opt.region = make_cone(90.0, 20.0, 60 * kDeg);
  opt.workers = 1;
  const ScanResult base = scan(store, opt);
  bool same = true;
  for (unsigned w : {2u, 4u, 8u}) {
    opt.workers = w;
    same = same && scan(store, opt).records == base.records;
  }
  o.check(same, "workers 1/2/4/8 identical (" + std::to_string(base.records.size()) + " matches)");

  // Throughput of a full sequential scan, caches warmed by the runs above.
  ScanOptions full;
  full.collect = false;
  full.predicate = Predicate::parse("flux > 1e9");
  double ratio = 0.0;
  for (int attempt = 0; attempt < 2 && ratio < 2.0; ++attempt) {
    full.workers = 1;
    scan(store, full);
    const double one = scan(store, full).stats.bytes_per_second;
    full.workers = 4;
    const double four = scan(store, full).stats.bytes_per_second;
    ratio = four / one;
    o.detail << "attempt " << attempt + 1 << ": 1w " << fmt("%.3g B/s", one) << ", 4w " << fmt("%.3g B/s", four)
             << "; ";
  }
  o.check(ratio >= 2.0, "4-worker/1-worker throughput " + fmt("%.2f", ratio) + " (hardware threads " +
                            std::to_string(std::thread::hardware_concurrency()) + ")");
}

// ---------------------------------------------------------------------------

void master_criterion(Outcome& o, const fs::path&) {
  skygen::SurveyConfig c;
  c.n_objects = 1000;
  c.passes = 50;
  c.seed = 31;
  c.position_sigma_arcsec = 0.1;
  const auto s = skygen::generate_survey(c);
  const CrossMatch cm = cross_match(s.detections, 1.0);
  std::size_t wrong_length = 0;
  for (const auto& m : cm.masters) wrong_length += m.n_detections != 50;
  std::map<std::uint64_t, std::set<std::uint64_t>> truths;
  for (std::size_t i = 0; i < s.detections.size(); ++i) truths[cm.master_of[i]].insert(s.detection_truth[i]);
  std::size_t mixed = 0;
  for (const auto& [m, t] : truths) mixed += t.size() != 1;
  o.check(cm.masters.size() == 1000, std::to_string(cm.masters.size()) + " masters");
  o.check(wrong_length == 0, std::to_string(wrong_length) + " chains not of length 50");
  o.check(mixed == 0, std::to_string(mixed) + " chains mixing objects");
  o.check(s.detections.size() == 50 * cm.masters.size(),
          "reduction factor " + fmt("%.2f", static_cast<double>(s.detections.size()) / cm.masters.size()));
}

// ---------------------------------------------------------------------------

void trigger_criterion(Outcome& o, const fs::path&) {
  skygen::SurveyConfig c;
  c.n_objects = 1000;
  c.passes = 100;
  c.seed = 404;
  const auto s = skygen::generate_survey(c);
  std::vector<Detection> reference, stream;
  for (const auto& d : s.detections) (d.pass_id < 50 ? reference : stream).push_back(d);
  const auto t0 = std::chrono::steady_clock::now();
  const MasterCatalog catalog(cross_match(reference, 1.0).masters);
  const double build_seconds = seconds_since(t0);

  Rng r(405);
  std::set<std::uint64_t> injected;
  std::uint64_t next_id = 1ull << 40;
  const double radius = 1.0 / 3600.0 * kDeg;
  // 50 new sources at 10 sigma, away from every master.
  while (injected.size() < 50) {
    Detection d;
    d.det_id = next_id++;
    d.pass_id = 50 + static_cast<std::uint32_t>(r.below(50));
    d.mjd = c.start_mjd + d.pass_id * c.cadence_days + r.uniform(0, 1);
    d.ra = r.uniform(0, 360);
    d.dec = std::asin(r.uniform(-1, 1)) / kDeg;
    if (catalog.nearest(to_unit(d.ra, d.dec), 60 * radius) != nullptr) continue;
    d.flux_err = static_cast<float>(r.uniform(1, 10));
    d.flux = 10.0f * d.flux_err;
    stream.push_back(d);
    injected.insert(d.det_id);
  }
  // 50 flux jumps of 10 sigma on existing objects.
  std::set<std::size_t> picked;
  while (picked.size() < 50) picked.insert(r.below(50000));
  for (std::size_t i : picked) {
    Detection& d = stream[i];
    const MasterObject* m = catalog.nearest(to_unit(d.ra, d.dec), radius);
    if (m == nullptr) continue;
    d.flux = static_cast<float>(m->mean_flux + (r.uniform() < 0.5 ? -10 : 10) * combined_error(*m, d.flux_err));
    injected.insert(d.det_id);
  }
  for (auto& d : stream) d.zone = ZoneTable::zone_of(d.dec, 1.0);
  std::sort(stream.begin(), stream.end(), [](const Detection& a, const Detection& b) {
    return a.mjd != b.mjd ? a.mjd < b.mjd : a.zone < b.zone;
  });

  const auto t1 = std::chrono::steady_clock::now();
  const auto alerts = run_trigger(stream, catalog, {});
  const double run_seconds = seconds_since(t1);
  std::size_t true_pos = 0;
  for (const auto& a : alerts) true_pos += injected.contains(a.det_id);
  const double recall = static_cast<double>(true_pos) / injected.size();
  const double precision = alerts.empty() ? 0.0 : static_cast<double>(true_pos) / alerts.size();
  o.check(stream.size() == 50000 + 50 && injected.size() == 100,
          std::to_string(injected.size()) + " injected among " + std::to_string(stream.size() - 50) + " quiescent");
  o.check(recall >= 0.95, "recall " + fmt("%.3f", recall));
  o.check(precision >= 0.95, "precision " + fmt("%.3f", precision));
  o.check(build_seconds + run_seconds < 10.0, "runtime " + fmt("%.2f s", build_seconds + run_seconds));
}

// ---------------------------------------------------------------------------

void lightcurve_criterion(Outcome& o, const fs::path&) {
  int recovered = 0;
  double worst = 0.0;
  for (int seed = 0; seed < 10; ++seed) {
    Rng r(7000 + seed);
    LightCurve lc;
    std::vector<double> t(40);
    for (auto& x : t) x = 60000 + r.uniform(0, 120);
    std::sort(t.begin(), t.end());
    const double phase = r.uniform(0, 2 * std::numbers::pi);
    for (double x : t) {
      const double f = 500 * (1 + 0.3 * std::sin(2 * std::numbers::pi * x / 2.5 + phase));
      lc.epochs.push_back(x);
      lc.flux_errs.push_back(5);
      lc.fluxes.push_back(f + 5 * r.normal());
    }
    const auto fit = fit_lightcurve(lc, default_grid(lc));
    const double err = std::fabs(1.0 / fit.periodic->best_frequency - 2.5) / 2.5;
    worst = std::max(worst, err);
    recovered += err <= 0.01;
  }
  o.check(recovered == 10, std::to_string(recovered) + "/10 periods within 1% (worst " + fmt("%.4f", worst) + ")");

  skygen::SurveyConfig c;
  c.n_objects = 1000;
  c.passes = 30;
  c.seed = 8080;
  const auto s = skygen::generate_survey(c);
  std::vector<Detection> dets = s.detections;
  const CrossMatch cm = cross_match(dets, 1.0);
  for (std::size_t i = 0; i < dets.size(); ++i) dets[i].master_id = cm.master_of[i];
  std::size_t flagged = 0, total = 0;
  for (const auto& [id, chain] : chains_by_master(dets)) {
    const LightCurve lc = make_lightcurve(id, chain);
    FrequencyGrid g = default_grid(lc);
    g.n_steps = std::min<std::size_t>(g.n_steps, 2000);
    const auto cls = classify_chain(cm.masters[id - 1], lc, fit_lightcurve(lc, g), {}, c.passes);
    flagged += cls != Classification::kStatic;
    ++total;
  }
  const double rate = static_cast<double>(flagged) / total;
  o.check(total == 1000 && rate < 0.05, "false-variable rate " + fmt("%.3f", rate) + " over " + std::to_string(total));
}

// ---------------------------------------------------------------------------

void movers_criterion(Outcome& o, const fs::path&) {
  skygen::SurveyConfig c;
  c.n_objects = 3000;
  c.passes = 12;
  c.seed = 1234;
  c.mover_fraction = 0.02;
  c.transient_fraction = 0.02;
  const auto s = skygen::generate_survey(c);
  std::vector<Detection> dets = s.detections;
  const CrossMatch cm = cross_match(dets, 1.0);
  for (std::size_t i = 0; i < dets.size(); ++i) dets[i].master_id = cm.master_of[i];
  std::map<std::uint64_t, std::uint64_t> truth_of;
  for (std::size_t i = 0; i < dets.size(); ++i) truth_of[dets[i].det_id] = s.detection_truth[i];

  const auto tracks = link_movers(select_orphans(dets, cm.masters), {});
  std::map<std::uint64_t, std::vector<std::size_t>> tracks_of_mover;
  std::vector<bool> pure(tracks.size(), true);
  for (std::size_t t = 0; t < tracks.size(); ++t) {
    std::set<std::uint64_t> owners;
    for (auto id : tracks[t].members) owners.insert(truth_of.at(id));
    pure[t] = owners.size() == 1;
    for (auto owner : owners) tracks_of_mover[owner].push_back(t);
  }
  std::size_t movers = 0, recovered = 0;
  for (const auto& t : s.truth) {
    if (t.kind != skygen::ObjectKind::kMover) continue;
    ++movers;
    const auto it = tracks_of_mover.find(t.truth_id);
    if (it != tracks_of_mover.end() && it->second.size() == 1 && pure[it->second[0]] &&
        tracks[it->second[0]].members.size() >= 3) {
      ++recovered;
    }
  }
  const double frac = movers ? static_cast<double>(recovered) / movers : 0.0;
  o.check(frac >= 0.9, std::to_string(recovered) + "/" + std::to_string(movers) + " movers recovered as single tracks");

  skygen::SurveyConfig still = c;
  still.mover_fraction = 0.0;
  still.transient_fraction = 0.0;
  still.seed = 99;
  auto sd = skygen::generate_survey(still).detections;
  const CrossMatch scm = cross_match(sd, 1.0);
  for (std::size_t i = 0; i < sd.size(); ++i) sd[i].master_id = scm.master_of[i];
  const auto none = link_movers(select_orphans(sd, scm.masters), {});
  o.check(none.empty(), std::to_string(none.size()) + " tracks on the static catalog");
}

// ---------------------------------------------------------------------------

std::vector<UnitVec> uniform_vectors(std::size_t n, std::uint64_t seed) {
  std::vector<UnitVec> out;
  for (const auto& s : oracle::uniform_sky(n, seed)) out.push_back(to_unit(s.ra, s.dec));
  return out;
}

void correlation_criterion(Outcome& o, const fs::path&) {
  const AngularBins bins = log_bins(0.05 * kDeg, 5 * kDeg, 10);
  const auto p2k = uniform_vectors(2000, 21);
  const auto naive = pair_count(p2k, bins, PairCountMode::kNaive);
  const auto dual = pair_count(p2k, bins, PairCountMode::kDualTree);
  o.check(naive.counts == dual.counts, "dual-tree equals naive at N=2000");

  const auto p10k = uniform_vectors(10000, 22);
  const auto big = pair_count(p10k, bins, PairCountMode::kDualTree);
  const double frac = static_cast<double>(big.distance_evaluations) / (10000.0 * 9999.0 / 2.0);
  o.check(frac < 0.25, "evaluations at N=10000 " + fmt("%.4f", frac) + " of all pairs");

  const AngularBins wide = log_bins(1 * kDeg, 30 * kDeg, 8);
  const auto same = correlation_ls(p2k, p2k, wide);
  bool zero = true;
  for (const auto& b : same.bins) zero = zero && b.defined && b.w == 0.0;
  o.check(zero, "data=randoms gives w = 0 in every bin");

  const auto data = uniform_vectors(5000, 23), randoms = uniform_vectors(20000, 24);
  const auto null = correlation_ls(data, randoms, wide);
  int inside = 0;
  double worst = 0.0;
  for (const auto& b : null.bins) {
    inside += b.defined && std::fabs(b.w) <= 3 * b.err;
    worst = std::max(worst, std::fabs(b.w) / b.err);
  }
  o.check(inside == static_cast<int>(null.bins.size()),
          std::to_string(inside) + "/" + std::to_string(null.bins.size()) + " null bins within 3 sigma (worst " +
              fmt("%.2f", worst) + ")");
}

// ---------------------------------------------------------------------------

PointMatrix gaussian_blobs(std::uint64_t seed, std::size_t per) {
  const double spec[3][4] = {{0, 0, 1, 1}, {15, 2, 1.5, 0.6}, {4, 18, 0.8, 2}};
  Rng r(seed);
  PointMatrix x(static_cast<Eigen::Index>(3 * per), 2);
  Eigen::Index row = 0;
  for (const auto& b : spec) {
    for (std::size_t i = 0; i < per; ++i, ++row) {
      x(row, 0) = b[0] + b[2] * r.normal();
      x(row, 1) = b[1] + b[3] * r.normal();
    }
  }
  return x;
}

void em_criterion(Outcome& o, const fs::path&) {
  int monotone = 0;
  for (int seed = 1; seed <= 5; ++seed) {
    EmOptions opt;
    opt.k = 2 + static_cast<std::size_t>(seed % 3);
    opt.seed = static_cast<std::uint64_t>(seed);
    opt.tol = 0;
    opt.max_iter = 50;
    const auto m = em_fit(gaussian_blobs(100 + seed, 1000), opt).model;
    bool ok = true;
    for (std::size_t i = 1; i < m.log_likelihood.size(); ++i) {
      ok = ok && m.log_likelihood[i] >= m.log_likelihood[i - 1] - 1e-9 * std::fabs(m.log_likelihood[i - 1]);
    }
    monotone += ok;
  }
  o.check(monotone == 5, std::to_string(monotone) + "/5 runs with monotone log-likelihood");

  const PointMatrix x = gaussian_blobs(7, 1000);
  EmOptions one;
  one.k = 1;
  const auto m1 = em_fit(x, one).model;
  const Eigen::VectorXd mean = x.colwise().mean().transpose();
  const Eigen::MatrixXd centred = x.rowwise() - mean.transpose();
  const Eigen::MatrixXd cov = centred.transpose() * centred / static_cast<double>(x.rows());
  const double dm = (m1.means[0] - mean).norm() / mean.norm();
  const double dc = (m1.covariances[0] - cov).norm() / cov.norm();
  o.check(dm < 1e-12 && dc < 1e-12, "k=1 mean/cov relative error " + fmt("%.2e", std::max(dm, dc)));

  const PointMatrix big = gaussian_blobs(8, 20000);
  EmOptions three;
  three.k = 3;
  three.seed = 5;
  const auto exact = em_fit(big, three);
  three.mode = EmMode::kKd;
  const auto kd = em_fit(big, three);
  const double diff = compare_models(exact.model, kd.model);
  o.check(diff < 1e-3, "kd vs exact max relative difference " + fmt("%.2e", diff));
  o.check(kd.stats.responsibility_evaluations < kd.stats.exact_evaluations,
          "responsibility evaluations " + std::to_string(kd.stats.responsibility_evaluations) + " vs " +
              std::to_string(kd.stats.exact_evaluations) + " exact");
}

// ---------------------------------------------------------------------------

void bench20_criterion(Outcome& o, const fs::path& work) {
  std::ostringstream out, err;
  const auto t0 = std::chrono::steady_clock::now();
  const int code = cli::run_cli({"bench20", "--seed", "20", "--work", (work / "bench20").string()}, out, err);
  const double secs = seconds_since(t0);
  std::istringstream rows(out.str());
  std::string line;
  int queries = 0, ok = 0;
  std::getline(rows, line);
  while (std::getline(rows, line)) {
    if (line.empty()) continue;
    ++queries;
    // query,command,exit_code,seconds,output_bytes; the command may be quoted.
    const auto last = line.rfind(',');
    const auto mid = line.rfind(',', last - 1);
    const auto first = line.rfind(',', mid - 1);
    ok += line.substr(first + 1, mid - first - 1) == "0";
  }
  o.check(code == 0, "harness exit " + std::to_string(code));
  o.check(queries == 20 && ok == 20, std::to_string(ok) + "/" + std::to_string(queries) + " queries exit 0");
  o.check(secs < 60.0, "runtime " + fmt("%.2f s", secs));
}

}  // namespace

int main(int argc, char** argv) {
  std::string only;
  fs::path work = fs::temp_directory_path() / "petacat_acceptance";
  for (int i = 1; i < argc; ++i) {
    const std::string a = argv[i];
    if (a == "--only" && i + 1 < argc) {
      only = argv[++i];
    } else if (a == "--work" && i + 1 < argc) {
      work = argv[++i];
    } else {
      std::cerr << "usage: petacat_acceptance [--only NAME] [--work DIR]\n";
      return 2;
    }
  }
  fs::create_directories(work);

  const std::vector<std::pair<std::string, std::function<void(Outcome&, const fs::path&)>>> criteria = {
      {"planner", planner_criterion},   {"spatial", spatial_criterion},      {"scan", scan_criterion},
      {"master", master_criterion},     {"trigger", trigger_criterion},      {"lightcurves", lightcurve_criterion},
      {"movers", movers_criterion},     {"correlation", correlation_criterion}, {"em", em_criterion},
      {"bench20", bench20_criterion}};

  bool all = true, found = false;
  for (const auto& [name, fn] : criteria) {
    if (!only.empty() && only != name) continue;
    found = true;
    Outcome o;
    try {
      fn(o, work);
    } catch (const std::exception& e) {
      o.check(false, std::string("exception: ") + e.what());
    }
    std::string detail = o.detail.str();
    if (detail.size() >= 2) detail.resize(detail.size() - 2);
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << detail << std::endl;
    all = all && o.pass;
  }
  if (!found) {
    std::cerr << "unknown criterion '" << only << "'\n";
    return 2;
  }
  return all ? 0 : 1;
}
