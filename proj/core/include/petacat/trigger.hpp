#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "petacat/master.hpp"
#include "petacat/record.hpp"
#include "petacat/spatial_index.hpp"

namespace petacat {

enum class AlertKind { kNewSource, kFluxAnomaly };

const char* alert_kind_name(AlertKind k);

struct Alert {
  AlertKind kind = AlertKind::kNewSource;
  std::uint64_t det_id = 0;
  double mjd = 0.0;
  double ra = 0.0;
  double dec = 0.0;
  double flux = 0.0;
  /// Flux-anomaly: |flux - mean| / combined error. New source: flux / flux_err.
  double deviation_sigmas = 0.0;
  std::uint64_t nearest_master_id = 0;  ///< 0 for new sources
};

struct TriggerParams {
  double match_radius_arcsec = 1.0;
  double k_sigma = 5.0;
};

/// Predicted catalog: the master table plus a spatial index over it.
class MasterCatalog {
public:
  explicit MasterCatalog(std::vector<MasterObject> masters);

  const std::vector<MasterObject>& masters() const { return masters_; }
  const SpatialIndex& index() const { return index_; }

  /// Nearest master within `radius` radians, or nullptr.
  const MasterObject* nearest(const UnitVec& p, double radius) const;

private:
  std::vector<MasterObject> masters_;
  SpatialIndex index_;
};

/// Error used to judge a new measurement against a master: the measurement
/// error, the error of the master mean, and any scatter in excess of the
/// master's own measurement errors, added in quadrature.
double combined_error(const MasterObject& m, double flux_err);

/// Streams detections against the predicted catalog. The stream must be
/// ordered by (mjd, zone); the first violation throws ValidationError.
/// Alerts come out in input order.
std::vector<Alert> run_trigger(std::span<const Detection> stream, const MasterCatalog& catalog,
                               const TriggerParams& params);

std::string alert_csv_header();
std::string alert_csv_row(const Alert& a);
void write_alerts_csv(std::ostream& out, std::span<const Alert> alerts);

}  // namespace petacat
