#include "petacat/movers.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <optional>
#include <ostream>
#include <unordered_map>
#include <unordered_set>

#include <Eigen/Dense>

#include "petacat/errors.hpp"
#include "petacat/spatial_index.hpp"
#include "petacat/units.hpp"

namespace petacat {

UnitVec GreatCircleFit::at(double t) const {
  const double phi = phase + omega * (t - t_ref);
  const double c = std::cos(phi), s = std::sin(phi);
  return normalized(c * e1.x + s * e2.x, c * e1.y + s * e2.y, c * e1.z + s * e2.z);
}

GreatCircleFit fit_great_circle(std::span<const UnitVec> points, std::span<const double> epochs) {
  if (points.size() != epochs.size() || points.size() < 2) {
    throw ValidationError("great-circle fit needs at least 2 timed points");
  }
  const std::size_t n = points.size();
  Eigen::Matrix3d m = Eigen::Matrix3d::Zero();
  for (const auto& p : points) {
    const Eigen::Vector3d v(p.x, p.y, p.z);
    m += v * v.transpose();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d> es(m);
  const Eigen::Vector3d pole = es.eigenvectors().col(0);  // eigenvalues ascend
  const UnitVec k{pole(0), pole(1), pole(2)};

  auto project = [&](const UnitVec& p) {
    const double d = dot(p, k);
    return normalized(p.x - d * k.x, p.y - d * k.y, p.z - d * k.z);
  };
  GreatCircleFit fit;
  fit.e1 = project(points[0]);
  fit.e2 = cross(k, fit.e1);

  std::vector<double> phi(n);
  for (std::size_t i = 0; i < n; ++i) {
    const UnitVec u = project(points[i]);
    double a = std::atan2(dot(u, fit.e2), dot(u, fit.e1));
    if (i > 0) {
      while (a - phi[i - 1] > std::numbers::pi) a -= 2.0 * std::numbers::pi;
      while (a - phi[i - 1] < -std::numbers::pi) a += 2.0 * std::numbers::pi;
    }
    phi[i] = a;
  }
  double tm = 0.0, pm = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    tm += epochs[i];
    pm += phi[i];
  }
  tm /= static_cast<double>(n);
  pm /= static_cast<double>(n);
  double stt = 0.0, stp = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    stt += (epochs[i] - tm) * (epochs[i] - tm);
    stp += (epochs[i] - tm) * (phi[i] - pm);
  }
  if (!(stt > 0.0)) throw ValidationError("great-circle fit needs distinct epochs");
  fit.t_ref = tm;
  fit.phase = pm;
  fit.omega = stp / stt;

  double ss = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const double r = angular_distance(points[i], fit.at(epochs[i]));
    ss += r * r;
  }
  fit.rms = std::sqrt(ss / static_cast<double>(n));
  return fit;
}

std::vector<Detection> select_orphans(std::span<const Detection> detections, std::span<const MasterObject> masters) {
  std::unordered_set<std::uint64_t> singles;
  for (const auto& m : masters) {
    if (m.n_detections == 1) singles.insert(m.master_id);
  }
  std::vector<Detection> out;
  for (const auto& d : detections) {
    if (d.master_id == 0 || singles.contains(d.master_id)) {
      Detection o = d;
      o.master_id = 0;
      out.push_back(o);
    }
  }
  return out;
}

namespace {

struct Pair {
  std::uint32_t a = 0;  // indices into the canonical orphan list
  std::uint32_t b = 0;
  double rate = 0.0;      // radians/day
  double pa_start = 0.0;  // direction of motion at a
  double pa_end = 0.0;    // direction of motion at b
  std::int64_t rate_bin = 0;
  std::int64_t pa_start_bin = 0;
  std::int64_t pa_end_bin = 0;
};

struct Candidate {
  std::vector<std::uint32_t> members;
  GreatCircleFit fit;
};

bool bins_close(std::int64_t x, std::int64_t y) { return x - y <= 1 && y - x <= 1; }

bool angle_bins_close(std::int64_t x, std::int64_t y, std::int64_t wrap) {
  const std::int64_t d = ((x - y) % wrap + wrap) % wrap;
  return d <= 1 || d >= wrap - 1;
}

double median(std::vector<double> v) {
  if (v.empty()) return 0.0;
  const auto mid = v.begin() + static_cast<std::ptrdiff_t>(v.size() / 2);
  std::nth_element(v.begin(), mid, v.end());
  return *mid;
}

}  // namespace

std::vector<MoverTrack> link_movers(std::span<const Detection> orphans, const MoverParams& params) {
  if (!(params.rate_max_deg_per_day > 0.0)) throw ValidationError("rate_max must be positive");
  if (!(params.residual_max_arcsec > 0.0)) throw ValidationError("residual_max must be positive");
  if (params.min_track_length < 3) throw ValidationError("min_track_length must be at least 3");

  std::vector<Detection> dets;
  for (const auto& d : orphans) {
    if (d.master_id == 0) dets.push_back(d);
  }
  std::sort(dets.begin(), dets.end(), [](const Detection& x, const Detection& y) {
    if (x.pass_id != y.pass_id) return x.pass_id < y.pass_id;
    if (x.mjd != y.mjd) return x.mjd < y.mjd;
    return x.det_id < y.det_id;
  });
  if (dets.size() < params.min_track_length) return {};

  const double rate_max = params.rate_max_deg_per_day * kDegToRad;
  const double resid = params.residual_max_arcsec * kArcsecToRad;
  std::vector<UnitVec> vec(dets.size());
  for (std::size_t i = 0; i < dets.size(); ++i) vec[i] = to_unit(dets[i].ra, dets[i].dec);

  // Pass groups as [begin, end) ranges of the canonical list.
  std::vector<std::pair<std::uint32_t, std::uint32_t>> groups;
  for (std::uint32_t i = 0; i < dets.size();) {
    std::uint32_t j = i;
    while (j < dets.size() && dets[j].pass_id == dets[i].pass_id) ++j;
    groups.emplace_back(i, j);
    i = j;
  }

  // Pairs between adjacent passes that move measurably but not too fast.
  std::vector<Pair> pairs;
  for (std::size_t g = 0; g + 1 < groups.size(); ++g) {
    const auto [nb, ne] = groups[g + 1];
    const std::span<const UnitVec> next(vec.data() + nb, ne - nb);
    const KdTree3 tree(next);
    double next_max_mjd = dets[nb].mjd;
    for (std::uint32_t j = nb; j < ne; ++j) next_max_mjd = std::max(next_max_mjd, dets[j].mjd);
    for (std::uint32_t a = groups[g].first; a < groups[g].second; ++a) {
      const double dt_max = next_max_mjd - dets[a].mjd;
      if (!(dt_max > 0.0)) continue;
      const double reach = std::min(rate_max * dt_max, std::numbers::pi);
      const double c = chord_for_angle(reach);
      tree.for_each_within(vec[a], c * c + 1e-15, [&](std::uint32_t k) {
        const std::uint32_t b = nb + k;
        const double dt = dets[b].mjd - dets[a].mjd;
        if (!(dt > 0.0)) return;
        const double sep = angular_distance(vec[a], vec[b]);
        if (sep < resid || sep > rate_max * dt + kAngleSlack) return;
        Pair p;
        p.a = a;
        p.b = b;
        p.rate = sep / dt;
        p.pa_start = position_angle(vec[a], vec[b]);
        p.pa_end = std::fmod(position_angle(vec[b], vec[a]) + std::numbers::pi, 2.0 * std::numbers::pi);
        pairs.push_back(p);
      });
    }
  }
  if (pairs.empty()) return {};
  std::sort(pairs.begin(), pairs.end(), [](const Pair& x, const Pair& y) { return x.a != y.a ? x.a < y.a : x.b < y.b; });

  // Grid cells: a rate cell spans a few residuals over a typical pair
  // interval, an angle cell a few residuals over a typical pair separation.
  std::vector<double> dts, seps;
  for (const auto& p : pairs) {
    dts.push_back(dets[p.b].mjd - dets[p.a].mjd);
    seps.push_back(p.rate * dts.back());
  }
  const double rate_cell = 3.0 * resid / std::max(median(dts), 1e-9);
  const double pa_cell_raw = std::clamp(3.0 * resid / std::max(median(seps), 1e-12), 1e-4, std::numbers::pi / 6.0);
  const auto pa_bins = static_cast<std::int64_t>(std::ceil(2.0 * std::numbers::pi / pa_cell_raw));
  const double pa_cell = 2.0 * std::numbers::pi / static_cast<double>(pa_bins);
  for (auto& p : pairs) {
    p.rate_bin = static_cast<std::int64_t>(std::floor(p.rate / rate_cell));
    p.pa_start_bin = static_cast<std::int64_t>(std::floor(p.pa_start / pa_cell)) % pa_bins;
    p.pa_end_bin = static_cast<std::int64_t>(std::floor(p.pa_end / pa_cell)) % pa_bins;
  }

  // Successor lists: pair q continues pair p when it starts where p ends and
  // sits in a neighbouring cell.
  std::unordered_map<std::uint32_t, std::vector<std::uint32_t>> starting_at;
  for (std::uint32_t i = 0; i < pairs.size(); ++i) starting_at[pairs[i].a].push_back(i);
  auto successors = [&](std::uint32_t pi) {
    std::vector<std::uint32_t> out;
    const auto it = starting_at.find(pairs[pi].b);
    if (it == starting_at.end()) return out;
    for (const std::uint32_t qi : it->second) {
      const Pair& p = pairs[pi];
      const Pair& q = pairs[qi];
      if (bins_close(p.rate_bin, q.rate_bin) && angle_bins_close(p.pa_end_bin, q.pa_start_bin, pa_bins)) {
        out.push_back(qi);
      }
    }
    return out;
  };

  auto fit_members = [&](const std::vector<std::uint32_t>& members) {
    std::vector<UnitVec> pts;
    std::vector<double> ts;
    for (const auto m : members) {
      pts.push_back(vec[m]);
      ts.push_back(dets[m].mjd);
    }
    return fit_great_circle(pts, ts);
  };

  // Grow one candidate from every pair not already walked by an earlier one.
  std::vector<Candidate> candidates;
  std::vector<bool> walked(pairs.size(), false);
  for (std::uint32_t start = 0; start < pairs.size(); ++start) {
    if (walked[start]) continue;
    walked[start] = true;
    Candidate cand;
    cand.members = {pairs[start].a, pairs[start].b};
    std::uint32_t cur = start;
    for (;;) {
      std::optional<std::uint32_t> best;
      GreatCircleFit best_fit;
      for (const std::uint32_t qi : successors(cur)) {
        auto trial = cand.members;
        trial.push_back(pairs[qi].b);
        const GreatCircleFit f = fit_members(trial);
        if (f.rms > resid) continue;
        if (!best || f.rms < best_fit.rms ||
            (f.rms == best_fit.rms && dets[pairs[qi].b].det_id < dets[pairs[*best].b].det_id)) {
          best = qi;
          best_fit = f;
        }
      }
      if (!best) break;
      walked[*best] = true;
      cand.members.push_back(pairs[*best].b);
      cand.fit = best_fit;
      cur = *best;
    }
    if (cand.members.size() >= params.min_track_length) candidates.push_back(std::move(cand));
  }

  std::sort(candidates.begin(), candidates.end(), [&](const Candidate& x, const Candidate& y) {
    if (x.members.size() != y.members.size()) return x.members.size() > y.members.size();
    if (x.fit.rms != y.fit.rms) return x.fit.rms < y.fit.rms;
    return dets[x.members.front()].det_id < dets[y.members.front()].det_id;
  });

  std::vector<bool> used(dets.size(), false);
  std::vector<MoverTrack> tracks;
  for (const auto& c : candidates) {
    if (std::any_of(c.members.begin(), c.members.end(), [&](std::uint32_t m) { return used[m]; })) continue;
    const double t0 = dets[c.members.front()].mjd;
    const double t1 = dets[c.members.back()].mjd;
    const double rate = std::fabs(c.fit.omega);
    if (rate > rate_max + kAngleSlack) continue;
    const UnitVec p0 = c.fit.at(t0);
    if (angular_distance(p0, c.fit.at(t1)) < 3.0 * resid) continue;
    for (const auto m : c.members) used[m] = true;

    MoverTrack t;
    for (const auto m : c.members) t.members.push_back(dets[m].det_id);
    t.ref_mjd = t0;
    const SkyPos ref = to_sky(p0);
    t.ref_ra = ref.ra_deg;
    t.ref_dec = ref.dec_deg;
    t.rate_deg_per_day = rate / kDegToRad;
    const double step = std::min(1e-3, std::max(t1 - t0, 1e-6));
    t.position_angle_deg = position_angle(p0, c.fit.at(t0 + step)) / kDegToRad;
    t.rms_arcsec = c.fit.rms / kArcsecToRad;
    t.debris_candidate = t.rate_deg_per_day > params.debris_rate_deg_per_day;
    tracks.push_back(std::move(t));
  }
  // Stable output order: by first member.
  std::sort(tracks.begin(), tracks.end(),
            [](const MoverTrack& x, const MoverTrack& y) { return x.members.front() < y.members.front(); });
  for (std::size_t i = 0; i < tracks.size(); ++i) tracks[i].track_id = i + 1;
  return tracks;
}

void write_tracks_csv(std::ostream& out, std::span<const MoverTrack> tracks) {
  out << "track_id,n_members,ref_mjd,ref_ra,ref_dec,rate_deg_per_day,position_angle_deg,rms_arcsec,debris,members\n";
  for (const auto& t : tracks) {
    char buf[256];
    std::snprintf(buf, sizeof buf, "%llu,%zu,%.6f,%.9f,%.9f,%.6g,%.4f,%.4f,%d,",
                  static_cast<unsigned long long>(t.track_id), t.members.size(), t.ref_mjd, t.ref_ra, t.ref_dec,
                  t.rate_deg_per_day, t.position_angle_deg, t.rms_arcsec, t.debris_candidate ? 1 : 0);
    out << buf;
    for (std::size_t i = 0; i < t.members.size(); ++i) out << (i ? " " : "") << t.members[i];
    out << '\n';
  }
}

}  // namespace petacat
