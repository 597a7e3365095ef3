#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include "petacat/record.hpp"
#include "petacat/store.hpp"

namespace petacat {

enum class Classification { kUnclassified, kStatic, kVariable, kTransient, kMoverCandidate, kDefect };

const char* classification_name(Classification c);
Classification classification_from_name(const std::string& name);

/// Summary record for one unique sky location, linked to its detection chain
/// through Detection::master_id.
struct MasterObject {
  std::uint64_t master_id = 0;
  double ra = 0.0;
  double dec = 0.0;
  std::uint64_t n_detections = 0;
  double mean_flux = 0.0;
  double flux_variance = 0.0;  ///< population variance of member fluxes
  double mean_flux_err = 0.0;  ///< mean of member flux errors
  double first_mjd = 0.0;
  double last_mjd = 0.0;
  std::uint32_t flags = 0;     ///< OR of member flags
  Classification classification = Classification::kUnclassified;
};

struct CrossMatch {
  std::vector<MasterObject> masters;  ///< master_id = index + 1
  /// Master id per input detection (parallel to the input span).
  std::vector<std::uint64_t> master_of;
};

/// Single-pass cross-match. Detections are visited in (pass_id, mjd, det_id)
/// order; each joins the nearest existing master within `match_radius_arcsec`
/// (ties within 1e-9 rad go to the lower master_id) or founds a new one.
/// Master positions are the renormalized mean of member unit vectors,
/// updated as members arrive.
CrossMatch cross_match(std::span<const Detection> detections, double match_radius_arcsec);

struct MasterReport {
  std::vector<MasterObject> masters;
  std::uint64_t detections = 0;
  double seconds = 0.0;
};

/// Cross-matches the whole store, writes master ids back into the partition
/// files and the master table to `masters.csv` in the store directory.
MasterReport build_master(Store& store, double match_radius_arcsec);

std::string masters_path(const Store& store);
void write_masters_csv(const std::string& path, std::span<const MasterObject> masters);
std::vector<MasterObject> read_masters_csv(const std::string& path);

/// Detections grouped by master id, each chain ordered by (mjd, det_id).
std::unordered_map<std::uint64_t, std::vector<Detection>> chains_by_master(std::span<const Detection> detections);

}  // namespace petacat
