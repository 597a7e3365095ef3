#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <memory>
#include <numbers>
#include <numeric>
#include <sstream>

#include "commands.hpp"
#include "petacat/correlation.hpp"
#include "petacat/errors.hpp"
#include "petacat/lightcurve.hpp"
#include "petacat/mixture.hpp"
#include "petacat/movers.hpp"
#include "petacat/random.hpp"
#include "petacat/trigger.hpp"
#include "petacat/units.hpp"
#include "util.hpp"

namespace petacat::cli {
namespace {

FrequencyGrid grid_for(const LightCurve& lc, double f_min, double f_max, std::size_t steps) {
  FrequencyGrid g = default_grid(lc, f_max);
  if (f_min > 0.0) g.f_min = f_min;
  if (steps > 0) g.n_steps = steps;
  g.f_max = std::max(g.f_max, g.f_min);
  return g;
}

void add_lc(CLI::App& app, Context& ctx) {
  struct Args {
    std::string store, format = "csv";
    std::uint64_t master = 0;
    double f_min = 0.0, f_max = 2.0;
    std::size_t steps = 0;
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("lc", "Fit light curves (constant and sinusoid models) per master");
  sub->add_option("--store", a->store, "Store directory")->required();
  sub->add_option("--master", a->master, "Fit only this master id");
  sub->add_option("--f-min", a->f_min, "Lowest trial frequency, cycles/day (default 1/span)");
  sub->add_option("--f-max", a->f_max, "Highest trial frequency, cycles/day")->capture_default_str();
  sub->add_option("--steps", a->steps, "Frequency grid size (default from span)");
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    Store store(a->store);
    const auto masters = load_masters(store);
    const auto dets = store.read_all();
    auto chains = chains_by_master(dets);
    Table t{{"master_id", "n", "weighted_mean", "chi2_const", "dof", "reduced_chi2", "best_frequency", "period_days",
             "periodic_power", "amplitude_fraction", "classification"},
            {}};
    bool found = false;
    for (const auto& m : masters) {
      if (a->master != 0 && m.master_id != a->master) continue;
      found = true;
      const auto& chain = chains[m.master_id];
      if (chain.empty()) continue;
      const LightCurve lc = make_lightcurve(m.master_id, chain);
      const LightCurveFit fit = fit_lightcurve(lc, grid_for(lc, a->f_min, a->f_max, a->steps));
      std::vector<Cell> row{Cell(m.master_id), Cell(lc.size()), Cell(fit.weighted_mean), Cell(fit.chi2_const),
                            Cell(fit.dof), Cell(fit.reduced_chi2())};
      if (fit.periodic) {
        row.push_back(Cell(fit.periodic->best_frequency));
        row.push_back(Cell(1.0 / fit.periodic->best_frequency));
        row.push_back(Cell(fit.periodic->periodic_power));
        row.push_back(Cell(fit.periodic->amplitude_fraction));
      } else {
        row.insert(row.end(), 4, Cell());
      }
      row.push_back(classification_name(fit.classification));
      t.add(std::move(row));
    }
    if (a->master != 0 && !found) throw ValidationError("no master with id " + std::to_string(a->master));
    render(t, parse_format(a->format), ctx.out);
  });
}

void add_classify(CLI::App& app, Context& ctx) {
  struct Args {
    std::string store, format = "csv";
    std::uint32_t survey_passes = 0;
    bool summary = false;
    ClassifyThresholds th;
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("classify", "Classify every master and store the labels in the master table");
  sub->add_option("--store", a->store, "Store directory")->required();
  sub->add_option("--survey-passes", a->survey_passes, "Passes in the survey (default: distinct passes in the store)");
  sub->add_option("--variability", a->th.variability_chi2_dof, "Variable above this chi2/dof")->capture_default_str();
  sub->add_option("--periodicity", a->th.periodicity_power, "Periodic above this power")->capture_default_str();
  sub->add_option("--transient-sigma", a->th.transient_sigma, "Burst significance")->capture_default_str();
  sub->add_option("--transient-run", a->th.transient_min_run, "Consecutive significant points")->capture_default_str();
  sub->add_flag("--summary", a->summary, "Print counts per class instead of one row per master");
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    Store store(a->store);
    auto masters = load_masters(store);
    const auto dets = store.read_all();
    const std::uint32_t passes = a->survey_passes > 0 ? a->survey_passes : count_passes(dets);
    auto chains = chains_by_master(dets);
    for (auto& m : masters) {
      const auto& chain = chains[m.master_id];
      if (chain.empty()) continue;
      const LightCurve lc = make_lightcurve(m.master_id, chain);
      FrequencyGrid g = default_grid(lc);
      g.n_steps = std::min<std::size_t>(g.n_steps, 2000);
      const LightCurveFit fit = fit_lightcurve(lc, g, a->th);
      m.classification = classify_chain(m, lc, fit, a->th, passes);
    }
    write_masters_csv(masters_path(store), masters);
    if (a->summary) {
      std::map<std::string, std::uint64_t> counts;
      for (const auto& m : masters) ++counts[classification_name(m.classification)];
      Table t{{"classification", "masters"}, {}};
      for (const auto& [k, v] : counts) t.add({k, Cell(v)});
      render(t, parse_format(a->format), ctx.out);
    } else {
      Table t{{"master_id", "n_detections", "classification"}, {}};
      for (const auto& m : masters) t.add({Cell(m.master_id), Cell(m.n_detections), classification_name(m.classification)});
      render(t, parse_format(a->format), ctx.out);
    }
  });
}

void add_trigger(CLI::App& app, Context& ctx) {
  struct Args {
    std::string store, stream, radius = "1s", format = "csv";
    double k_sigma = 5.0;
    bool sort = false;
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("trigger", "Stream detections against the master catalog and emit alerts");
  sub->add_option("--store", a->store, "Store with a master catalog")->required();
  sub->add_option("--stream", a->stream, "Incoming detections (.det or .csv), ordered by (mjd, zone)")->required();
  sub->add_option("--radius", a->radius, "Match radius (angle, default arcsec)")->capture_default_str();
  sub->add_option("--k-sigma", a->k_sigma, "Flux anomaly threshold in combined sigmas")->capture_default_str();
  sub->add_flag("--sort", a->sort, "Order the stream by (mjd, zone) before streaming");
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    Store store(a->store);
    const MasterCatalog catalog(load_masters(store));
    auto stream = read_detection_file(a->stream);
    if (a->sort) {
      const double h = store.manifest().zone_height_deg;
      for (auto& d : stream) d.zone = ZoneTable::zone_of(d.dec, h);
      std::stable_sort(stream.begin(), stream.end(), [](const Detection& x, const Detection& y) {
        return x.mjd != y.mjd ? x.mjd < y.mjd : x.zone < y.zone;
      });
    }
    TriggerParams p;
    p.match_radius_arcsec = angle_arg(a->radius, "s") * kRadToArcsec;
    p.k_sigma = a->k_sigma;
    const auto alerts = run_trigger(stream, catalog, p);
    const Format f = parse_format(a->format);
    if (f == Format::kCsv) {
      write_alerts_csv(ctx.out, alerts);
      return;
    }
    Table t{{"kind", "mjd", "ra", "dec", "flux", "deviation_sigmas", "nearest_master_id"}, {}};
    for (const auto& al : alerts) {
      t.add({alert_kind_name(al.kind), Cell(al.mjd), Cell(al.ra), Cell(al.dec), Cell(al.flux), Cell(al.deviation_sigmas),
             Cell(al.nearest_master_id)});
    }
    render(t, f, ctx.out);
  });
}

void add_movers(CLI::App& app, Context& ctx) {
  struct Args {
    std::string store, residual = "1s", format = "csv";
    MoverParams p;
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("movers", "Link unmatched detections into moving-object tracks");
  sub->add_option("--store", a->store, "Store with a master catalog")->required();
  sub->add_option("--rate-max", a->p.rate_max_deg_per_day, "Fastest motion, degrees/day")->capture_default_str();
  sub->add_option("--residual", a->residual, "Largest rms residual (angle, default arcsec)")->capture_default_str();
  sub->add_option("--min-length", a->p.min_track_length, "Fewest detections per track")->capture_default_str();
  sub->add_option("--debris-rate", a->p.debris_rate_deg_per_day, "Flag tracks faster than this, degrees/day")
      ->capture_default_str();
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    Store store(a->store);
    const auto masters = load_masters(store);
    const auto dets = store.read_all();
    MoverParams p = a->p;
    p.residual_max_arcsec = angle_arg(a->residual, "s") * kRadToArcsec;
    const auto tracks = link_movers(select_orphans(dets, masters), p);
    const Format f = parse_format(a->format);
    if (f == Format::kCsv) {
      write_tracks_csv(ctx.out, tracks);
      return;
    }
    Table t{{"track_id", "n_members", "ref_mjd", "ref_ra", "ref_dec", "rate_deg_per_day", "position_angle_deg",
             "rms_arcsec", "debris"},
            {}};
    for (const auto& tr : tracks) {
      t.add({Cell(tr.track_id), Cell(tr.members.size()), Cell(tr.ref_mjd), Cell(tr.ref_ra), Cell(tr.ref_dec),
             Cell(tr.rate_deg_per_day), Cell(tr.position_angle_deg), Cell(tr.rms_arcsec), Cell(tr.debris_candidate)});
    }
    render(t, f, ctx.out);
  });
}

std::vector<UnitVec> uniform_sphere(std::size_t n, Rng& rng) {
  std::vector<UnitVec> out(n);
  for (auto& v : out) {
    const double z = rng.uniform(-1.0, 1.0);
    const double phi = rng.uniform(0.0, 2.0 * std::numbers::pi);
    const double r = std::sqrt(std::max(0.0, 1.0 - z * z));
    v = {r * std::cos(phi), r * std::sin(phi), z};
  }
  return out;
}

void add_corr(CLI::App& app, Context& ctx) {
  struct Args {
    std::string store, source = "masters", lo = "0.1d", hi = "10d", spacing = "log", mode = "dual", format = "csv";
    std::size_t bins = 10, randoms = 0;
    std::uint64_t seed = 0;
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("corr", "Two-point angular correlation (Landy-Szalay) against uniform randoms");
  sub->add_option("--store", a->store, "Store directory")->required();
  sub->add_option("--source", a->source, "Use masters or raw detections")
      ->capture_default_str()
      ->check(CLI::IsMember({"masters", "detections"}));
  sub->add_option("--seed", a->seed, "Seed for the random catalog")->required();
  sub->add_option("--randoms", a->randoms, "Random points (default: as many as data)");
  sub->add_option("--min", a->lo, "Smallest separation (angle, default degrees)")->capture_default_str();
  sub->add_option("--max", a->hi, "Largest separation (angle, default degrees)")->capture_default_str();
  sub->add_option("--bins", a->bins, "Number of bins")->capture_default_str();
  sub->add_option("--spacing", a->spacing, "log or linear")->capture_default_str()->check(CLI::IsMember({"log", "linear"}));
  sub->add_option("--mode", a->mode, "dual or naive pair counting")->capture_default_str()->check(CLI::IsMember({"dual", "naive"}));
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    Store store(a->store);
    std::vector<UnitVec> data;
    if (a->source == "masters") {
      for (const auto& m : load_masters(store)) data.push_back(to_unit(m.ra, m.dec));
    } else {
      for (const auto& d : store.read_all()) data.push_back(to_unit(d.ra, d.dec));
    }
    Rng rng(a->seed);
    const auto randoms = uniform_sphere(a->randoms > 0 ? a->randoms : data.size(), rng);
    const double lo = angle_arg(a->lo, "d"), hi = angle_arg(a->hi, "d");
    const AngularBins bins = a->spacing == "log" ? log_bins(lo, hi, a->bins) : linear_bins(lo, hi, a->bins);
    const auto est = correlation_ls(data, randoms, bins, a->mode == "dual" ? PairCountMode::kDualTree : PairCountMode::kNaive);
    const Format f = parse_format(a->format);
    if (f == Format::kCsv) {
      write_correlation_csv(ctx.out, est);
      return;
    }
    Table t{{"bin_lo_deg", "bin_hi_deg", "dd", "dr", "rr", "w", "err"}, {}};
    for (const auto& b : est.bins) {
      t.add({Cell(b.lo * kRadToDeg), Cell(b.hi * kRadToDeg), Cell(b.dd), Cell(b.dr), Cell(b.rr),
             b.defined ? Cell(b.w) : Cell(), b.defined ? Cell(b.err) : Cell()});
    }
    render(t, f, ctx.out);
  });
}

double master_feature(const MasterObject& m, const std::string& name) {
  if (name == "log_flux") return std::log10(std::max(m.mean_flux, 1e-12));
  if (name == "log_scatter") {
    const double err = std::max(m.mean_flux_err, 1e-12);
    return std::log10(std::sqrt(std::max(m.flux_variance, 0.0)) / err + 1e-3);
  }
  if (name == "ra") return m.ra;
  if (name == "dec") return m.dec;
  if (name == "mean_flux") return m.mean_flux;
  if (name == "n_detections") return static_cast<double>(m.n_detections);
  throw ValidationError("unknown master feature '" + name +
                        "' (log_flux, log_scatter, ra, dec, mean_flux, n_detections)");
}

PointMatrix read_points_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path);
  std::string line;
  std::vector<std::vector<double>> rows;
  std::size_t width = 0;
  std::size_t lineno = 0;
  bool header_seen = false;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty() || line[0] == '#') continue;
    std::vector<double> row;
    std::stringstream ss(line);
    std::string cell;
    bool numeric = true;
    while (std::getline(ss, cell, ',')) {
      try {
        std::size_t used = 0;
        row.push_back(std::stod(cell, &used));
        if (used != cell.size()) numeric = false;
      } catch (const std::exception&) {
        numeric = false;
      }
    }
    if (!numeric) {
      if (!header_seen && rows.empty()) {
        header_seen = true;
        continue;
      }
      throw ValidationError(path + ": line " + std::to_string(lineno) + " is not numeric");
    }
    if (width == 0) width = row.size();
    if (row.size() != width) throw ValidationError(path + ": line " + std::to_string(lineno) + " has a different width");
    rows.push_back(std::move(row));
  }
  PointMatrix x(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(width));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < width; ++c) x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  return x;
}

void add_em(CLI::App& app, Context& ctx) {
  struct Args {
    std::string store, input, features = "log_flux,log_scatter", mode = "kd", model_out, format = "csv";
    EmOptions opt;
    std::size_t top = 20;
  };
  auto a = std::make_shared<Args>();
  CLI::App* sub = app.add_subcommand("em", "Gaussian mixture EM (exact or kd-tree) and outlier scores");
  auto* store = sub->add_option("--store", a->store, "Store with a master catalog (features from masters)");
  auto* input = sub->add_option("--input", a->input, "CSV of numeric columns instead of a store")->check(CLI::ExistingFile);
  store->excludes(input);
  sub->add_option("--features", a->features, "Comma-separated master features")->capture_default_str();
  sub->add_option("--k", a->opt.k, "Components")->capture_default_str();
  sub->add_option("--seed", a->opt.seed, "Seed for k-means++ initialization")->required();
  sub->add_option("--mode", a->mode, "exact or kd")->capture_default_str()->check(CLI::IsMember({"exact", "kd"}));
  sub->add_option("--tol", a->opt.tol, "Relative log-likelihood tolerance")->capture_default_str();
  sub->add_option("--max-iter", a->opt.max_iter, "Iteration cap")->capture_default_str();
  sub->add_option("--tau", a->opt.tau, "kd pruning tolerance")->capture_default_str();
  sub->add_option("--model-out", a->model_out, "Write the fitted model as JSON");
  sub->add_option("--top", a->top, "Outliers to list")->capture_default_str();
  add_format_option(sub, a->format);
  sub->callback([a, &ctx] {
    PointMatrix x;
    std::vector<std::uint64_t> ids;
    if (!a->input.empty()) {
      x = read_points_csv(a->input);
      ids.resize(static_cast<std::size_t>(x.rows()));
      std::iota(ids.begin(), ids.end(), std::uint64_t{1});
    } else if (!a->store.empty()) {
      Store store(a->store);
      const auto masters = load_masters(store);
      std::vector<std::string> names;
      std::stringstream ss(a->features);
      std::string f;
      while (std::getline(ss, f, ',')) names.push_back(f);
      if (names.empty()) throw ValidationError("--features is empty");
      x.resize(static_cast<Eigen::Index>(masters.size()), static_cast<Eigen::Index>(names.size()));
      for (std::size_t i = 0; i < masters.size(); ++i) {
        ids.push_back(masters[i].master_id);
        for (std::size_t c = 0; c < names.size(); ++c) {
          x(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = master_feature(masters[i], names[c]);
        }
      }
    } else {
      throw ValidationError("em needs --store or --input");
    }
    EmOptions opt = a->opt;
    opt.mode = a->mode == "kd" ? EmMode::kKd : EmMode::kExact;
    const EmResult res = em_fit(x, opt);
    if (!a->model_out.empty()) {
      std::ofstream out(a->model_out);
      if (!out) throw IoError("cannot write " + a->model_out);
      out << mixture_to_json(res.model) << '\n';
      if (!out) throw IoError("write failed on " + a->model_out);
    }
    const Format f = parse_format(a->format);
    if (f == Format::kJson) {
      ctx.out << mixture_to_json(res.model) << '\n';
      return;
    }
    const auto scores = outlier_scores(res.model, x);
    std::vector<std::size_t> order(scores.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::stable_sort(order.begin(), order.end(), [&](std::size_t p, std::size_t q) { return scores[p] > scores[q]; });
    Table t{{"rank", "id", "score"}, {}};
    for (std::size_t r = 0; r < std::min(a->top, order.size()); ++r) t.add({Cell(r + 1), Cell(ids[order[r]]), Cell(scores[order[r]])});
    render(t, f, ctx.out);
    ctx.err << "em: " << res.model.iterations << " iterations, log-likelihood " << res.model.log_likelihood.back()
            << ", " << res.stats.responsibility_evaluations << " responsibility evaluations ("
            << res.stats.exact_evaluations << " exact), " << res.stats.nodes_pruned << " nodes pruned\n";
  });
}

}  // namespace

void register_mining_commands(CLI::App& app, Context& ctx) {
  add_lc(app, ctx);
  add_classify(app, ctx);
  add_trigger(app, ctx);
  add_movers(app, ctx);
  add_corr(app, ctx);
  add_em(app, ctx);
}

}  // namespace petacat::cli
