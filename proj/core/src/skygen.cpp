#include "petacat/skygen.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <numbers>
#include <sstream>

#include <json.hpp>

#include "petacat/errors.hpp"
#include "petacat/random.hpp"
#include "petacat/sphere.hpp"
#include "petacat/units.hpp"

namespace petacat::skygen {

namespace {

// Independent sub-streams so that, e.g., changing the flux noise level does not
// move any position or epoch.
std::uint64_t substream_seed(std::uint64_t seed, std::uint64_t stream) {
  std::uint64_t z = seed + 0x9E3779B97F4A7C15ull * (stream + 1);
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ull;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBull;
  return z ^ (z >> 31);
}

UnitVec jitter_position(const UnitVec& p, double sigma_rad, Rng& rng) {
  const double dn = rng.normal() * sigma_rad;
  const double de = rng.normal() * sigma_rad;
  if (sigma_rad == 0.0) return p;
  return offset_along(p, std::atan2(de, dn), std::hypot(dn, de));
}

}  // namespace

const char* kind_name(ObjectKind kind) {
  switch (kind) {
    case ObjectKind::kStatic: return "static";
    case ObjectKind::kPeriodic: return "periodic";
    case ObjectKind::kTransient: return "transient";
    case ObjectKind::kMover: return "mover";
  }
  return "static";
}

ObjectKind kind_from_name(const std::string& name) {
  if (name == "static") return ObjectKind::kStatic;
  if (name == "periodic") return ObjectKind::kPeriodic;
  if (name == "transient") return ObjectKind::kTransient;
  if (name == "mover") return ObjectKind::kMover;
  throw ValidationError("unknown object kind '" + name + "'");
}

void validate(const SurveyConfig& c) {
  require(c.passes >= 1, "passes must be at least 1");
  require(c.cadence_days > 0.0, "cadence_days must be positive");
  require(c.flux_sigma_fraction > 0.0, "flux_sigma_fraction must be positive");
  require(c.position_sigma_arcsec >= 0.0, "position_sigma_arcsec must be non-negative");
  for (double f : {c.periodic_fraction, c.transient_fraction, c.mover_fraction}) {
    require(f >= 0.0 && f <= 1.0, "kind fractions must lie in [0, 1]");
  }
  require(c.periodic_fraction + c.transient_fraction + c.mover_fraction <= 1.0 + 1e-12,
          "kind fractions sum to more than 1");
  require(c.flux_min > 0.0 && c.flux_max >= c.flux_min, "flux range invalid");
  require(c.period_min_days > 0.0 && c.period_max_days >= c.period_min_days, "period range invalid");
  require(c.burst_passes_min >= 1 && c.burst_passes_max >= c.burst_passes_min, "burst length range invalid");
  require(c.mover_rate_min > 0.0 && c.mover_rate_max >= c.mover_rate_min, "mover rate range invalid");
  require(c.epoch_jitter_fraction >= 0.0 && c.epoch_jitter_fraction < 1.0,
          "epoch_jitter_fraction must lie in [0, 1)");
}

double true_flux(const TruthObject& obj, double mjd) {
  switch (obj.kind) {
    case ObjectKind::kPeriodic:
      return obj.base_flux *
             (1.0 + obj.amplitude_fraction * std::sin(2.0 * std::numbers::pi * mjd / obj.period_days + obj.phase));
    case ObjectKind::kTransient:
      return (mjd >= obj.burst_epoch && mjd < obj.burst_epoch + obj.burst_duration_days) ? obj.base_flux : 0.0;
    default:
      return obj.base_flux;
  }
}

Survey generate_survey(const SurveyConfig& config) {
  validate(config);
  Survey survey;
  const std::uint64_t n = config.n_objects;
  if (n == 0) return survey;

  Rng truth_rng(substream_seed(config.seed, 0));
  Rng epoch_rng(substream_seed(config.seed, 1));
  Rng pos_rng(substream_seed(config.seed, 2));
  Rng flux_rng(substream_seed(config.seed, 3));

  // Kind counts are exact (floor of fraction x n), assigned in a shuffled order.
  const auto n_periodic = static_cast<std::uint64_t>(std::floor(config.periodic_fraction * static_cast<double>(n)));
  const auto n_transient = static_cast<std::uint64_t>(std::floor(config.transient_fraction * static_cast<double>(n)));
  const auto n_mover = static_cast<std::uint64_t>(std::floor(config.mover_fraction * static_cast<double>(n)));
  std::vector<ObjectKind> kinds(n, ObjectKind::kStatic);
  std::uint64_t k = 0;
  for (std::uint64_t i = 0; i < n_periodic && k < n; ++i) kinds[k++] = ObjectKind::kPeriodic;
  for (std::uint64_t i = 0; i < n_transient && k < n; ++i) kinds[k++] = ObjectKind::kTransient;
  for (std::uint64_t i = 0; i < n_mover && k < n; ++i) kinds[k++] = ObjectKind::kMover;
  for (std::uint64_t i = n; i > 1; --i) std::swap(kinds[i - 1], kinds[truth_rng.below(i)]);

  const double pass_span = config.cadence_days;
  survey.truth.reserve(n);
  for (std::uint64_t i = 0; i < n; ++i) {
    TruthObject obj;
    obj.truth_id = i + 1;
    obj.kind = kinds[i];
    // Uniform on the sphere: z uniform in [-1, 1], azimuth uniform.
    const double z = truth_rng.uniform(-1.0, 1.0);
    const double phi = truth_rng.uniform(0.0, 360.0);
    obj.ra = phi;
    obj.dec = std::asin(std::clamp(z, -1.0, 1.0)) * kRadToDeg;
    obj.base_flux = truth_rng.uniform(config.flux_min, config.flux_max);
    switch (obj.kind) {
      case ObjectKind::kPeriodic:
        obj.period_days = std::exp(truth_rng.uniform(std::log(config.period_min_days), std::log(config.period_max_days)));
        obj.amplitude_fraction = truth_rng.uniform(config.amplitude_min, config.amplitude_max);
        obj.phase = truth_rng.uniform(0.0, 2.0 * std::numbers::pi);
        break;
      case ObjectKind::kTransient: {
        const std::uint32_t len_max = std::min(config.burst_passes_max, config.passes);
        const std::uint32_t len_min = std::min(config.burst_passes_min, len_max);
        const auto len = static_cast<std::uint32_t>(len_min + truth_rng.below(len_max - len_min + 1));
        // Leave at least one quiet pass on each side when the survey allows it.
        std::uint32_t first = 0;
        if (config.passes >= len + 2) {
          first = 1 + static_cast<std::uint32_t>(truth_rng.below(config.passes - len - 1));
        } else if (config.passes > len) {
          first = static_cast<std::uint32_t>(truth_rng.below(config.passes - len + 1));
        }
        obj.burst_epoch = config.start_mjd + first * pass_span;
        obj.burst_duration_days = len * pass_span;
        break;
      }
      case ObjectKind::kMover:
        obj.motion_rate = truth_rng.uniform(config.mover_rate_min, config.mover_rate_max);
        obj.position_angle = truth_rng.uniform(0.0, 360.0);
        break;
      case ObjectKind::kStatic:
        break;
    }
    survey.truth.push_back(obj);
  }

  struct Pending {
    std::uint32_t pass;
    double mjd;
    std::uint64_t truth_id;
    Detection det;
  };
  std::vector<Pending> pending;
  pending.reserve(n * config.passes);
  const double pos_sigma = config.position_sigma_arcsec * kArcsecToRad;
  for (std::uint32_t p = 0; p < config.passes; ++p) {
    for (const auto& obj : survey.truth) {
      // Every object consumes the same draws each pass regardless of kind or
      // whether it is detected, so sub-streams stay aligned.
      const double mjd = config.start_mjd + p * pass_span +
                         epoch_rng.uniform() * config.epoch_jitter_fraction * pass_span;
      const double flux_noise = flux_rng.normal();
      UnitVec pos = to_unit(obj.ra, obj.dec);
      if (obj.kind == ObjectKind::kMover) {
        pos = offset_along(pos, obj.position_angle * kDegToRad,
                           obj.motion_rate * kDegToRad * (mjd - config.start_mjd));
      }
      pos = jitter_position(pos, pos_sigma, pos_rng);

      const double f = true_flux(obj, mjd);
      if (obj.kind == ObjectKind::kTransient && f <= 0.0) continue;

      Detection d;
      d.pass_id = p;
      d.mjd = mjd;
      const SkyPos sky = to_sky(pos);
      d.ra = sky.ra_deg;
      d.dec = sky.dec_deg;
      const double sigma = config.flux_sigma_fraction * f;
      d.flux = static_cast<float>(f + sigma * flux_noise);
      d.flux_err = static_cast<float>(sigma);
      pending.push_back({p, mjd, obj.truth_id, d});
    }
  }
  std::sort(pending.begin(), pending.end(), [](const Pending& a, const Pending& b) {
    if (a.pass != b.pass) return a.pass < b.pass;
    if (a.mjd != b.mjd) return a.mjd < b.mjd;
    return a.truth_id < b.truth_id;
  });
  survey.detections.reserve(pending.size());
  survey.detection_truth.reserve(pending.size());
  std::uint64_t next_id = 1;
  for (auto& item : pending) {
    item.det.det_id = next_id++;
    survey.detections.push_back(item.det);
    survey.detection_truth.push_back(item.truth_id);
  }
  return survey;
}

void write_survey(const std::string& dir, const SurveyConfig& config, const Survey& survey) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create directory " + dir + ": " + ec.message());

  write_detections((fs::path(dir) / "detections.det").string(), survey.detections);

  {
    std::ofstream out(fs::path(dir) / "truth.csv");
    if (!out) throw IoError("cannot write truth.csv in " + dir);
    out << "truth_id,kind,ra,dec,base_flux,period_days,amplitude_fraction,phase,"
           "burst_epoch,burst_duration_days,motion_rate,position_angle\n";
    char buf[512];
    for (const auto& t : survey.truth) {
      std::snprintf(buf, sizeof buf, "%llu,%s,%.12f,%.12f,%.9g,%.12g,%.9g,%.9g,%.12g,%.12g,%.12g,%.12g\n",
                    static_cast<unsigned long long>(t.truth_id), kind_name(t.kind), t.ra, t.dec,
                    t.base_flux, t.period_days, t.amplitude_fraction, t.phase, t.burst_epoch,
                    t.burst_duration_days, t.motion_rate, t.position_angle);
      out << buf;
    }
  }
  {
    std::ofstream out(fs::path(dir) / "det_truth.csv");
    if (!out) throw IoError("cannot write det_truth.csv in " + dir);
    out << "det_id,truth_id\n";
    for (std::size_t i = 0; i < survey.detections.size(); ++i) {
      out << survey.detections[i].det_id << ',' << survey.detection_truth[i] << '\n';
    }
  }

  std::array<std::uint64_t, 4> kind_counts{};
  for (const auto& t : survey.truth) ++kind_counts[static_cast<std::size_t>(t.kind)];
  nlohmann::ordered_json manifest;
  manifest["generator"] = "petacat-skygen";
  manifest["rng"] = {{"algorithm", std::string(Rng::kAlgorithm)}, {"version", Rng::kAlgorithmVersion}};
  manifest["config"] = {
      {"n_objects", config.n_objects},
      {"passes", config.passes},
      {"cadence_days", config.cadence_days},
      {"start_mjd", config.start_mjd},
      {"seed", config.seed},
      {"flux_sigma_fraction", config.flux_sigma_fraction},
      {"position_sigma_arcsec", config.position_sigma_arcsec},
      {"periodic_fraction", config.periodic_fraction},
      {"transient_fraction", config.transient_fraction},
      {"mover_fraction", config.mover_fraction},
      {"epoch_jitter_fraction", config.epoch_jitter_fraction},
  };
  manifest["counts"] = {
      {"objects", survey.truth.size()},
      {"detections", survey.detections.size()},
      {"static", kind_counts[0]},
      {"periodic", kind_counts[1]},
      {"transient", kind_counts[2]},
      {"mover", kind_counts[3]},
  };
  std::ofstream out(fs::path(dir) / "manifest.json");
  if (!out) throw IoError("cannot write manifest.json in " + dir);
  out << manifest.dump(2) << '\n';
}

std::vector<TruthObject> read_truth_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::vector<TruthObject> out;
  std::string line;
  std::getline(in, line);  // header
  std::size_t row = 0;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    std::istringstream s(line);
    std::vector<std::string> cells;
    std::string cell;
    while (std::getline(s, cell, ',')) cells.push_back(cell);
    if (cells.size() != 12) throw ValidationError(path + ": row " + std::to_string(row) + " malformed");
    TruthObject t;
    t.truth_id = std::stoull(cells[0]);
    t.kind = kind_from_name(cells[1]);
    t.ra = std::stod(cells[2]);
    t.dec = std::stod(cells[3]);
    t.base_flux = std::stod(cells[4]);
    t.period_days = std::stod(cells[5]);
    t.amplitude_fraction = std::stod(cells[6]);
    t.phase = std::stod(cells[7]);
    t.burst_epoch = std::stod(cells[8]);
    t.burst_duration_days = std::stod(cells[9]);
    t.motion_rate = std::stod(cells[10]);
    t.position_angle = std::stod(cells[11]);
    out.push_back(t);
    ++row;
  }
  return out;
}

}  // namespace petacat::skygen
