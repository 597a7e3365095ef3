#include "petacat/lightcurve.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>

#include <Eigen/Dense>

#include "petacat/errors.hpp"

namespace petacat {

LightCurve make_lightcurve(std::uint64_t master_id, std::span<const Detection> chain) {
  std::vector<Detection> sorted(chain.begin(), chain.end());
  std::sort(sorted.begin(), sorted.end(), [](const Detection& a, const Detection& b) {
    return a.mjd != b.mjd ? a.mjd < b.mjd : a.det_id < b.det_id;
  });
  LightCurve lc;
  lc.master_id = master_id;
  for (const auto& d : sorted) {
    if (!lc.epochs.empty() && d.mjd == lc.epochs.back()) continue;
    lc.epochs.push_back(d.mjd);
    lc.fluxes.push_back(d.flux);
    lc.flux_errs.push_back(d.flux_err);
    lc.pass_ids.push_back(d.pass_id);
    lc.flags |= d.flags;
  }
  return lc;
}

void validate(const LightCurve& lc) {
  if (lc.epochs.empty()) throw ValidationError("light curve needs at least one point");
  if (lc.fluxes.size() != lc.epochs.size() || lc.flux_errs.size() != lc.epochs.size() ||
      (!lc.pass_ids.empty() && lc.pass_ids.size() != lc.epochs.size())) {
    throw ValidationError("light curve arrays differ in length");
  }
  for (std::size_t i = 0; i < lc.size(); ++i) {
    if (!(lc.flux_errs[i] > 0.0)) throw ValidationError("light curve flux errors must be positive");
    if (!std::isfinite(lc.fluxes[i]) || !std::isfinite(lc.epochs[i])) {
      throw ValidationError("light curve contains non-finite values");
    }
    if (i > 0 && !(lc.epochs[i] > lc.epochs[i - 1])) {
      throw ValidationError("light curve epochs must be strictly increasing");
    }
  }
}

FrequencyGrid default_grid(const LightCurve& lc, double f_max, double oversample, std::size_t max_steps) {
  FrequencyGrid g;
  const double span = lc.size() >= 2 ? lc.epochs.back() - lc.epochs.front() : 1.0;
  g.f_min = 1.0 / std::max(span, 1e-3);
  g.f_max = std::max(f_max, g.f_min);
  const double steps = std::ceil(oversample * span * (g.f_max - g.f_min)) + 1.0;
  g.n_steps = static_cast<std::size_t>(std::clamp(steps, 2.0, static_cast<double>(max_steps)));
  return g;
}

LightCurveFit fit_lightcurve(const LightCurve& lc, const FrequencyGrid& grid, const ClassifyThresholds& thresholds) {
  validate(lc);
  if (!(grid.f_min > 0.0) || !(grid.f_max >= grid.f_min) || grid.n_steps < 1) {
    throw ValidationError("invalid frequency grid");
  }
  const std::size_t n = lc.size();
  std::vector<double> w(n);
  double sw = 0.0, swy = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 1.0 / (lc.flux_errs[i] * lc.flux_errs[i]);
    sw += w[i];
    swy += w[i] * lc.fluxes[i];
  }
  LightCurveFit fit;
  fit.weighted_mean = swy / sw;
  std::vector<double> y(n);
  for (std::size_t i = 0; i < n; ++i) {
    y[i] = lc.fluxes[i] - fit.weighted_mean;
    fit.chi2_const += w[i] * y[i] * y[i];
  }
  fit.dof = n - 1;
  fit.classification = fit.reduced_chi2() > thresholds.variability_chi2_dof ? Classification::kVariable
                                                                              : Classification::kStatic;
  if (n < 3) return fit;

  // Phasors advance by a fixed rotation per grid step.
  const double t0 = lc.epochs.front();
  const double df = grid.n_steps > 1 ? (grid.f_max - grid.f_min) / static_cast<double>(grid.n_steps - 1) : 0.0;
  std::vector<double> s(n), c(n), ds(n), dc(n);
  for (std::size_t i = 0; i < n; ++i) {
    const double t = lc.epochs[i] - t0;
    s[i] = std::sin(2.0 * std::numbers::pi * grid.f_min * t);
    c[i] = std::cos(2.0 * std::numbers::pi * grid.f_min * t);
    ds[i] = std::sin(2.0 * std::numbers::pi * df * t);
    dc[i] = std::cos(2.0 * std::numbers::pi * df * t);
  }

  PeriodicFit best;
  double best_reduction = -1.0;
  Eigen::Vector3d best_beta = Eigen::Vector3d::Zero();
  for (std::size_t k = 0; k < grid.n_steps; ++k) {
    if (k > 0) {
      for (std::size_t i = 0; i < n; ++i) {
        const double sn = s[i] * dc[i] + c[i] * ds[i];
        const double cn = c[i] * dc[i] - s[i] * ds[i];
        s[i] = sn;
        c[i] = cn;
      }
      // Re-anchor periodically against accumulated rounding.
      if (k % 512 == 0) {
        const double f = grid.at(k);
        for (std::size_t i = 0; i < n; ++i) {
          const double t = lc.epochs[i] - t0;
          s[i] = std::sin(2.0 * std::numbers::pi * f * t);
          c[i] = std::cos(2.0 * std::numbers::pi * f * t);
        }
      }
    }
    Eigen::Matrix3d a = Eigen::Matrix3d::Zero();
    Eigen::Vector3d b = Eigen::Vector3d::Zero();
    for (std::size_t i = 0; i < n; ++i) {
      const double x[3] = {1.0, s[i], c[i]};
      for (int r = 0; r < 3; ++r) {
        b(r) += w[i] * x[r] * y[i];
        for (int q = r; q < 3; ++q) a(r, q) += w[i] * x[r] * x[q];
      }
    }
    a(1, 0) = a(0, 1);
    a(2, 0) = a(0, 2);
    a(2, 1) = a(1, 2);
    const Eigen::LDLT<Eigen::Matrix3d> ldlt(a);
    if (ldlt.info() != Eigen::Success) continue;
    const Eigen::Vector3d beta = ldlt.solve(b);
    if (!beta.allFinite()) continue;
    // chi2_const - chi2_model for the centred data.
    const double reduction = beta.dot(b);
    if (reduction > best_reduction) {
      best_reduction = reduction;
      best.best_frequency = grid.at(k);
      best_beta = beta;
    }
  }
  if (best_reduction < 0.0) {
    best.best_frequency = grid.f_min;
    best_reduction = 0.0;
  }
  best.periodic_power =
      fit.chi2_const > 0.0 ? std::clamp(best_reduction / fit.chi2_const, 0.0, 1.0) : 0.0;
  const double mean = fit.weighted_mean + best_beta(0);
  const double amp = std::hypot(best_beta(1), best_beta(2));
  best.amplitude_fraction = mean != 0.0 ? amp / std::fabs(mean) : 0.0;
  fit.periodic = best;
  return fit;
}

bool is_periodic(const LightCurveFit& fit, const ClassifyThresholds& thresholds) {
  return fit.periodic && fit.periodic->periodic_power > thresholds.periodicity_power;
}

namespace {

bool looks_transient(const LightCurve& lc, const ClassifyThresholds& th, std::optional<std::uint32_t> survey_passes) {
  const std::size_t n = lc.size();
  // Longest run of consecutive significant points.
  std::size_t best_start = 0, best_len = 0;
  for (std::size_t i = 0; i < n;) {
    if (lc.fluxes[i] / lc.flux_errs[i] > th.transient_sigma) {
      std::size_t j = i;
      while (j < n && lc.fluxes[j] / lc.flux_errs[j] > th.transient_sigma) ++j;
      if (j - i > best_len) {
        best_len = j - i;
        best_start = i;
      }
      i = j;
    } else {
      ++i;
    }
  }
  if (best_len < th.transient_min_run) return false;
  const std::size_t best_end = best_start + best_len;

  // Consecutive detections: no pass skipped inside the burst.
  if (!lc.pass_ids.empty()) {
    for (std::size_t i = best_start + 1; i < best_end; ++i) {
      if (lc.pass_ids[i] != lc.pass_ids[i - 1] + 1) return false;
    }
  }
  // Everything outside the run must be consistent with zero flux.
  for (std::size_t i = 0; i < n; ++i) {
    if (i >= best_start && i < best_end) continue;
    if (std::fabs(lc.fluxes[i] / lc.flux_errs[i]) >= th.quiet_sigma) return false;
  }
  // Need a non-detection on at least one side: an explicit quiet point, or a
  // survey pass with no detection at all.
  if (best_start > 0 || best_end < n) return true;
  if (survey_passes && !lc.pass_ids.empty()) {
    const std::uint32_t first = lc.pass_ids[best_start];
    const std::uint32_t last = lc.pass_ids[best_end - 1];
    return first > 0 || last + 1 < *survey_passes;
  }
  return false;
}

}  // namespace

Classification classify_chain(const MasterObject& master, const LightCurve& lc, const LightCurveFit& fit,
                              const ClassifyThresholds& thresholds, std::optional<std::uint32_t> survey_passes) {
  validate(lc);
  if (master.master_id != 0 && lc.master_id != 0 && master.master_id != lc.master_id) {
    throw ValidationError("light curve and master refer to different objects");
  }
  if (lc.size() == 1) {
    return (lc.flags | master.flags) != 0 ? Classification::kDefect : Classification::kMoverCandidate;
  }
  if (looks_transient(lc, thresholds, survey_passes)) return Classification::kTransient;
  if (fit.reduced_chi2() > thresholds.variability_chi2_dof) return Classification::kVariable;
  return Classification::kStatic;
}

}  // namespace petacat
