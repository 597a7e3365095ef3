#pragma once

#include <cstdint>
#include <iosfwd>
#include <span>
#include <vector>

#include "petacat/master.hpp"
#include "petacat/record.hpp"
#include "petacat/sphere.hpp"

namespace petacat {

struct MoverParams {
  double rate_max_deg_per_day = 1.0;
  double residual_max_arcsec = 1.0;
  std::size_t min_track_length = 3;
  /// Tracks faster than this are flagged as debris candidates.
  double debris_rate_deg_per_day = 0.8;
};

struct MoverTrack {
  std::uint64_t track_id = 0;
  std::vector<std::uint64_t> members;  ///< det_ids in time order
  double ref_mjd = 0.0;                ///< epoch of the first member
  double ref_ra = 0.0;                 ///< fitted position at ref_mjd
  double ref_dec = 0.0;
  double rate_deg_per_day = 0.0;
  double position_angle_deg = 0.0;     ///< direction of motion at the reference
  double rms_arcsec = 0.0;
  bool debris_candidate = false;
};

/// Great-circle motion at a constant angular rate.
struct GreatCircleFit {
  UnitVec e1;          ///< in-plane basis; pole = e1 x e2
  UnitVec e2;
  double t_ref = 0.0;  ///< mean epoch
  double phase = 0.0;  ///< angle along the circle at t_ref (radians)
  double omega = 0.0;  ///< radians/day, signed
  double rms = 0.0;    ///< radians

  UnitVec at(double t) const;
};

/// Fits the plane from the smallest-eigenvalue direction of sum(v v^T), then
/// the phase linearly in time. Needs at least 2 points with distinct epochs.
GreatCircleFit fit_great_circle(std::span<const UnitVec> points, std::span<const double> epochs);

/// Detections whose master has a single member, returned with master_id
/// cleared: these are the unmatched orphans the linker works on.
std::vector<Detection> select_orphans(std::span<const Detection> detections, std::span<const MasterObject> masters);

/// Links orphans into tracks. Inputs carrying a master id are excluded.
/// Track membership does not depend on input order.
std::vector<MoverTrack> link_movers(std::span<const Detection> orphans, const MoverParams& params);

void write_tracks_csv(std::ostream& out, std::span<const MoverTrack> tracks);

}  // namespace petacat
