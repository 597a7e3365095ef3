#include "petacat/master.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numeric>
#include <sstream>

#include "petacat/errors.hpp"
#include "petacat/sphere.hpp"
#include "petacat/units.hpp"

namespace petacat {

const char* classification_name(Classification c) {
  switch (c) {
    case Classification::kUnclassified: return "unclassified";
    case Classification::kStatic: return "static";
    case Classification::kVariable: return "variable";
    case Classification::kTransient: return "transient";
    case Classification::kMoverCandidate: return "mover-candidate";
    case Classification::kDefect: return "defect";
  }
  return "unclassified";
}

Classification classification_from_name(const std::string& name) {
  for (auto c : {Classification::kUnclassified, Classification::kStatic, Classification::kVariable,
                 Classification::kTransient, Classification::kMoverCandidate, Classification::kDefect}) {
    if (name == classification_name(c)) return c;
  }
  throw ValidationError("unknown classification '" + name + "'");
}

namespace {

struct CellKey {
  std::int64_t x, y, z;
  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct CellHash {
  std::size_t operator()(const CellKey& k) const {
    std::uint64_t h = static_cast<std::uint64_t>(k.x) * 0x9E3779B97F4A7C15ull;
    h ^= static_cast<std::uint64_t>(k.y) * 0xC2B2AE3D27D4EB4Full + (h << 6) + (h >> 2);
    h ^= static_cast<std::uint64_t>(k.z) * 0x165667B19E3779F9ull + (h << 6) + (h >> 2);
    return static_cast<std::size_t>(h);
  }
};

// Hash grid over 3-D unit vectors for masters whose positions move as members
// are added. Cells are at least one match chord wide, so every master within
// the match radius lies in the 27 cells around a query point.
class MasterGrid {
public:
  explicit MasterGrid(double cell) : cell_(cell) {}

  CellKey key(const UnitVec& v) const {
    return {static_cast<std::int64_t>(std::floor(v.x / cell_)), static_cast<std::int64_t>(std::floor(v.y / cell_)),
            static_cast<std::int64_t>(std::floor(v.z / cell_))};
  }

  void insert(std::uint32_t idx, const CellKey& k) { cells_[k].push_back(idx); }

  void move(std::uint32_t idx, const CellKey& from, const CellKey& to) {
    if (from == to) return;
    auto& v = cells_[from];
    v.erase(std::find(v.begin(), v.end(), idx));
    cells_[to].push_back(idx);
  }

  template <typename Fn>
  void for_each_near(const UnitVec& p, Fn&& fn) const {
    const CellKey c = key(p);
    for (std::int64_t dx = -1; dx <= 1; ++dx)
      for (std::int64_t dy = -1; dy <= 1; ++dy)
        for (std::int64_t dz = -1; dz <= 1; ++dz) {
          auto it = cells_.find({c.x + dx, c.y + dy, c.z + dz});
          if (it == cells_.end()) continue;
          for (std::uint32_t idx : it->second) fn(idx);
        }
  }

private:
  double cell_;
  std::unordered_map<CellKey, std::vector<std::uint32_t>, CellHash> cells_;
};

struct Accumulator {
  double sx = 0, sy = 0, sz = 0;
  UnitVec pos;
  CellKey cell{};
  std::uint64_t n = 0;
  double flux_mean = 0, flux_m2 = 0, err_sum = 0;
  double first = 0, last = 0;
  std::uint32_t flags = 0;

  void add(const UnitVec& v, const Detection& d) {
    sx += v.x;
    sy += v.y;
    sz += v.z;
    pos = normalized(sx, sy, sz);
    ++n;
    const double delta = d.flux - flux_mean;
    flux_mean += delta / static_cast<double>(n);
    flux_m2 += delta * (d.flux - flux_mean);
    err_sum += d.flux_err;
    first = n == 1 ? d.mjd : std::min(first, d.mjd);
    last = n == 1 ? d.mjd : std::max(last, d.mjd);
    flags |= d.flags;
  }
};

}  // namespace

CrossMatch cross_match(std::span<const Detection> detections, double match_radius_arcsec) {
  if (!(match_radius_arcsec > 0.0)) throw ValidationError("match_radius must be positive");
  const double radius = match_radius_arcsec * kArcsecToRad;

  std::vector<std::uint32_t> order(detections.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&](std::uint32_t a, std::uint32_t b) {
    const auto& da = detections[a];
    const auto& db = detections[b];
    if (da.pass_id != db.pass_id) return da.pass_id < db.pass_id;
    if (da.mjd != db.mjd) return da.mjd < db.mjd;
    return da.det_id < db.det_id;
  });

  MasterGrid grid(std::max(chord_for_angle(std::min(radius, std::numbers::pi)) * (1.0 + 1e-9), 1e-12));
  std::vector<Accumulator> acc;
  CrossMatch out;
  out.master_of.assign(detections.size(), 0);

  for (std::uint32_t i : order) {
    const Detection& d = detections[i];
    const UnitVec v = to_unit(d.ra, d.dec);
    std::int64_t best = -1;
    double best_angle = 0.0;
    grid.for_each_near(v, [&](std::uint32_t m) {
      const double ang = angular_distance(acc[m].pos, v);
      if (ang > radius + kAngleSlack) return;
      const bool tie = best >= 0 && std::fabs(ang - best_angle) <= 1e-9;
      if (best < 0 || (tie && m < best) || (!tie && ang < best_angle)) {
        best = m;
        best_angle = ang;
      }
    });
    if (best < 0) {
      best = static_cast<std::int64_t>(acc.size());
      acc.emplace_back();
      acc.back().add(v, d);
      acc.back().cell = grid.key(acc.back().pos);
      grid.insert(static_cast<std::uint32_t>(best), acc.back().cell);
    } else {
      auto& a = acc[static_cast<std::size_t>(best)];
      a.add(v, d);
      const CellKey k = grid.key(a.pos);
      grid.move(static_cast<std::uint32_t>(best), a.cell, k);
      a.cell = k;
    }
    out.master_of[i] = static_cast<std::uint64_t>(best) + 1;
  }

  out.masters.reserve(acc.size());
  for (std::size_t m = 0; m < acc.size(); ++m) {
    const auto& a = acc[m];
    MasterObject mo;
    mo.master_id = m + 1;
    const SkyPos p = to_sky(a.pos);
    mo.ra = p.ra_deg;
    mo.dec = p.dec_deg;
    mo.n_detections = a.n;
    mo.mean_flux = a.flux_mean;
    mo.flux_variance = a.flux_m2 / static_cast<double>(a.n);
    mo.mean_flux_err = a.err_sum / static_cast<double>(a.n);
    mo.first_mjd = a.first;
    mo.last_mjd = a.last;
    mo.flags = a.flags;
    out.masters.push_back(mo);
  }
  return out;
}

std::string masters_path(const Store& store) {
  return (std::filesystem::path(store.dir()) / "masters.csv").string();
}

MasterReport build_master(Store& store, double match_radius_arcsec) {
  if (!(match_radius_arcsec > 0.0)) throw ValidationError("match_radius must be positive");
  const auto t0 = std::chrono::steady_clock::now();

  // Remember where each record lives so master ids can be written back in place.
  std::vector<std::vector<Detection>> parts(store.manifest().partitions.size());
  std::vector<Detection> all;
  all.reserve(store.manifest().total_records);
  for (std::size_t p = 0; p < parts.size(); ++p) {
    parts[p] = store.read_partition(p);
    all.insert(all.end(), parts[p].begin(), parts[p].end());
  }
  CrossMatch cm = cross_match(all, match_radius_arcsec);

  std::size_t k = 0;
  for (std::size_t p = 0; p < parts.size(); ++p) {
    for (auto& d : parts[p]) d.master_id = cm.master_of[k++];
    store.rewrite_partition(p, parts[p]);
  }
  auto& m = store.mutable_manifest();
  m.masters_built = true;
  m.master_match_radius_arcsec = match_radius_arcsec;
  m.master_count = cm.masters.size();
  write_masters_csv(masters_path(store), cm.masters);
  store.save_manifest();

  MasterReport report;
  report.detections = all.size();
  report.masters = std::move(cm.masters);
  report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  return report;
}

void write_masters_csv(const std::string& path, std::span<const MasterObject> masters) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw IoError("cannot write " + path);
  out << "master_id,ra,dec,n_detections,mean_flux,flux_variance,mean_flux_err,first_mjd,last_mjd,flags,"
         "classification\n";
  char buf[512];
  for (const auto& m : masters) {
    std::snprintf(buf, sizeof buf, "%llu,%.17g,%.17g,%llu,%.17g,%.17g,%.17g,%.17g,%.17g,%u,%s\n",
                  static_cast<unsigned long long>(m.master_id), m.ra, m.dec,
                  static_cast<unsigned long long>(m.n_detections), m.mean_flux, m.flux_variance,
                  m.mean_flux_err, m.first_mjd, m.last_mjd, m.flags, classification_name(m.classification));
    out << buf;
  }
  if (!out) throw IoError("write failed on " + path);
}

std::vector<MasterObject> read_masters_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path + " (run the master build first)");
  std::vector<MasterObject> out;
  std::string line;
  std::getline(in, line);
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream s(line);
    std::vector<std::string> c;
    std::string cell;
    while (std::getline(s, cell, ',')) c.push_back(cell);
    if (c.size() != 11) throw IoError(path + ": row " + std::to_string(row) + " malformed");
    MasterObject m;
    m.master_id = std::stoull(c[0]);
    m.ra = std::stod(c[1]);
    m.dec = std::stod(c[2]);
    m.n_detections = std::stoull(c[3]);
    m.mean_flux = std::stod(c[4]);
    m.flux_variance = std::stod(c[5]);
    m.mean_flux_err = std::stod(c[6]);
    m.first_mjd = std::stod(c[7]);
    m.last_mjd = std::stod(c[8]);
    m.flags = static_cast<std::uint32_t>(std::stoul(c[9]));
    m.classification = classification_from_name(c[10]);
    out.push_back(m);
    ++row;
  }
  return out;
}

std::unordered_map<std::uint64_t, std::vector<Detection>> chains_by_master(std::span<const Detection> detections) {
  std::unordered_map<std::uint64_t, std::vector<Detection>> chains;
  for (const auto& d : detections) chains[d.master_id].push_back(d);
  for (auto& [id, chain] : chains) {
    std::sort(chain.begin(), chain.end(), [](const Detection& a, const Detection& b) {
      return a.mjd != b.mjd ? a.mjd < b.mjd : a.det_id < b.det_id;
    });
  }
  return chains;
}

}  // namespace petacat
