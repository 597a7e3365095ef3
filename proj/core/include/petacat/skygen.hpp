#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "petacat/record.hpp"

namespace petacat::skygen {

enum class ObjectKind { kStatic, kPeriodic, kTransient, kMover };

const char* kind_name(ObjectKind kind);
ObjectKind kind_from_name(const std::string& name);

struct TruthObject {
  std::uint64_t truth_id = 0;
  ObjectKind kind = ObjectKind::kStatic;
  double ra = 0.0;   ///< degrees, position at the survey start
  double dec = 0.0;
  double base_flux = 0.0;
  // periodic
  double period_days = 0.0;
  double amplitude_fraction = 0.0;
  double phase = 0.0;  ///< radians
  // transient: top-hat burst
  double burst_epoch = 0.0;
  double burst_duration_days = 0.0;
  // mover: great-circle motion from (ra, dec) at the survey start
  double motion_rate = 0.0;     ///< degrees/day
  double position_angle = 0.0;  ///< degrees, north through east
};

struct SurveyConfig {
  std::uint64_t n_objects = 1000;
  std::uint32_t passes = 50;
  double cadence_days = 2.0;
  double start_mjd = 60000.0;
  std::uint64_t seed = 1;
  double flux_sigma_fraction = 0.01;
  double position_sigma_arcsec = 0.1;
  double periodic_fraction = 0.0;
  double transient_fraction = 0.0;
  double mover_fraction = 0.0;

  double flux_min = 100.0;
  double flux_max = 1000.0;
  double period_min_days = 0.5;
  double period_max_days = 20.0;
  double amplitude_min = 0.2;
  double amplitude_max = 0.5;
  std::uint32_t burst_passes_min = 3;
  std::uint32_t burst_passes_max = 8;
  double mover_rate_min = 0.05;  ///< degrees/day
  double mover_rate_max = 0.5;
  /// Detection epochs fall in [pass start, pass start + jitter x cadence).
  double epoch_jitter_fraction = 0.8;
};

void validate(const SurveyConfig& config);

struct Survey {
  std::vector<TruthObject> truth;
  /// Ordered by (pass, mjd, truth_id); det_id is 1-based in that order.
  std::vector<Detection> detections;
  /// truth_id of each detection, parallel to `detections`.
  std::vector<std::uint64_t> detection_truth;
};

/// Deterministic synthetic survey. Non-movers are detected once per pass at
/// their fixed position (transients only inside their burst window); movers
/// advance along a great circle at their rate. Fluxes carry Gaussian noise of
/// flux_sigma_fraction times the true flux, which is also the reported error.
Survey generate_survey(const SurveyConfig& config);

/// True flux of `obj` at `mjd`; 0 outside a transient's burst window.
double true_flux(const TruthObject& obj, double mjd);

/// Writes detections.det, truth.csv, det_truth.csv and manifest.json into `dir`.
void write_survey(const std::string& dir, const SurveyConfig& config, const Survey& survey);

std::vector<TruthObject> read_truth_csv(const std::string& path);

}  // namespace petacat::skygen
