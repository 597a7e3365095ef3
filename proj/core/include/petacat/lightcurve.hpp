#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "petacat/master.hpp"
#include "petacat/record.hpp"

namespace petacat {

struct LightCurve {
  std::uint64_t master_id = 0;
  std::vector<double> epochs;  ///< strictly increasing (days)
  std::vector<double> fluxes;
  std::vector<double> flux_errs;
  std::vector<std::uint32_t> pass_ids;  ///< optional, same length when present
  std::uint32_t flags = 0;              ///< OR of member flags

  std::size_t size() const { return epochs.size(); }
};

/// Builds a light curve from one chain (any order); records sharing an epoch
/// keep the first by det_id.
LightCurve make_lightcurve(std::uint64_t master_id, std::span<const Detection> chain);

/// Throws ValidationError unless lengths match, size >= 1, errors are
/// positive and epochs strictly increase.
void validate(const LightCurve& lc);

struct FrequencyGrid {
  double f_min = 0.01;  ///< cycles/day
  double f_max = 2.0;
  std::size_t n_steps = 10000;

  double at(std::size_t i) const {
    return n_steps <= 1 ? f_min : f_min + (f_max - f_min) * static_cast<double>(i) / static_cast<double>(n_steps - 1);
  }
};

/// Grid from 1/span up to f_max, oversampled `oversample` times the
/// 1/span peak width, capped at max_steps.
FrequencyGrid default_grid(const LightCurve& lc, double f_max = 2.0, double oversample = 10.0,
                           std::size_t max_steps = 50000);

struct PeriodicFit {
  double best_frequency = 0.0;     ///< cycles/day, a grid point
  double periodic_power = 0.0;     ///< fraction of chi2_const removed by the sinusoid
  double amplitude_fraction = 0.0; ///< semi-amplitude / |fitted mean|
};

struct LightCurveFit {
  double weighted_mean = 0.0;
  double chi2_const = 0.0;
  std::size_t dof = 0;
  std::optional<PeriodicFit> periodic;  ///< absent for fewer than 3 points
  Classification classification = Classification::kStatic;  ///< static or variable from chi2 alone

  double reduced_chi2() const { return dof > 0 ? chi2_const / static_cast<double>(dof) : 0.0; }
};

struct ClassifyThresholds {
  double variability_chi2_dof = 3.0;
  double periodicity_power = 0.5;
  double transient_sigma = 5.0;
  std::size_t transient_min_run = 3;
  double quiet_sigma = 3.0;  ///< |flux/err| below this counts as a non-detection
};

/// Weighted constant model plus a floating-mean sinusoid scan over `grid`.
LightCurveFit fit_lightcurve(const LightCurve& lc, const FrequencyGrid& grid,
                             const ClassifyThresholds& thresholds = {});

/// Rule order: single detection (defect if flagged, otherwise
/// mover-candidate); transient; variable; static. `survey_passes`, when given,
/// lets missing passes count as non-detections around a burst.
Classification classify_chain(const MasterObject& master, const LightCurve& lc, const LightCurveFit& fit,
                              const ClassifyThresholds& thresholds = {},
                              std::optional<std::uint32_t> survey_passes = std::nullopt);

/// True when the sinusoid explains more than the periodicity threshold.
bool is_periodic(const LightCurveFit& fit, const ClassifyThresholds& thresholds = {});

}  // namespace petacat
