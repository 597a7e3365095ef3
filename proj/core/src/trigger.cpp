#include "petacat/trigger.hpp"

#include <cmath>
#include <cstdio>
#include <ostream>
#include <string>

#include "petacat/errors.hpp"
#include "petacat/units.hpp"

namespace petacat {

const char* alert_kind_name(AlertKind k) {
  return k == AlertKind::kNewSource ? "new-source" : "flux-anomaly";
}

namespace {

std::vector<std::uint64_t> master_ids(const std::vector<MasterObject>& masters) {
  std::vector<std::uint64_t> ids;
  ids.reserve(masters.size());
  for (const auto& m : masters) ids.push_back(m.master_id);
  return ids;
}

std::vector<SkyPos> master_positions(const std::vector<MasterObject>& masters) {
  std::vector<SkyPos> pos;
  pos.reserve(masters.size());
  for (const auto& m : masters) pos.push_back({m.ra, m.dec});
  return pos;
}

}  // namespace

MasterCatalog::MasterCatalog(std::vector<MasterObject> masters)
    : masters_(std::move(masters)), index_(master_ids(masters_), master_positions(masters_)) {}

const MasterObject* MasterCatalog::nearest(const UnitVec& p, double radius) const {
  if (masters_.empty()) return nullptr;
  const auto row = index_.nearest_within(p, radius);
  return row ? &masters_[*row] : nullptr;
}

double combined_error(const MasterObject& m, double flux_err) {
  const double n = static_cast<double>(std::max<std::uint64_t>(m.n_detections, 1));
  const double excess = std::max(0.0, m.flux_variance - m.mean_flux_err * m.mean_flux_err);
  return std::sqrt(flux_err * flux_err + m.flux_variance / n + excess);
}

std::vector<Alert> run_trigger(std::span<const Detection> stream, const MasterCatalog& catalog,
                               const TriggerParams& params) {
  if (!(params.match_radius_arcsec > 0.0)) throw ValidationError("match radius must be positive");
  if (!(params.k_sigma > 0.0)) throw ValidationError("k_sigma must be positive");
  const double radius = params.match_radius_arcsec * kArcsecToRad;

  std::vector<Alert> alerts;
  for (std::size_t i = 0; i < stream.size(); ++i) {
    const Detection& d = stream[i];
    if (i > 0) {
      const Detection& prev = stream[i - 1];
      if (d.mjd < prev.mjd || (d.mjd == prev.mjd && d.zone < prev.zone)) {
        throw ValidationError("stream out of (mjd, zone) order at record " + std::to_string(i));
      }
    }
    const UnitVec p = to_unit(d.ra, d.dec);
    const MasterObject* m = catalog.nearest(p, radius);
    Alert a;
    a.det_id = d.det_id;
    a.mjd = d.mjd;
    a.ra = d.ra;
    a.dec = d.dec;
    a.flux = d.flux;
    if (m == nullptr) {
      a.kind = AlertKind::kNewSource;
      a.deviation_sigmas = d.flux_err > 0.0f ? d.flux / d.flux_err : 0.0;
      alerts.push_back(a);
      continue;
    }
    const double err = combined_error(*m, d.flux_err);
    const double dev = err > 0.0 ? std::fabs(d.flux - m->mean_flux) / err : 0.0;
    if (dev >= params.k_sigma) {
      a.kind = AlertKind::kFluxAnomaly;
      a.deviation_sigmas = dev;
      a.nearest_master_id = m->master_id;
      alerts.push_back(a);
    }
  }
  return alerts;
}

std::string alert_csv_header() { return "kind,mjd,ra,dec,flux,deviation_sigmas,nearest_master_id"; }

std::string alert_csv_row(const Alert& a) {
  char buf[256];
  std::snprintf(buf, sizeof buf, "%s,%.6f,%.9f,%.9f,%.6g,%.3f,%llu", alert_kind_name(a.kind), a.mjd, a.ra, a.dec,
                a.flux, a.deviation_sigmas, static_cast<unsigned long long>(a.nearest_master_id));
  return buf;
}

void write_alerts_csv(std::ostream& out, std::span<const Alert> alerts) {
  out << alert_csv_header() << '\n';
  for (const auto& a : alerts) out << alert_csv_row(a) << '\n';
  out.flush();
}

}  // namespace petacat
