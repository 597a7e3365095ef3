#include "petacat/mixture.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <optional>

#include <json.hpp>

#include "petacat/errors.hpp"
#include "petacat/random.hpp"

namespace petacat {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

// Per-component quantities reused during one E-step.
struct Component {
  double log_weight = 0.0;
  Eigen::VectorXd mean;
  Eigen::LLT<Eigen::MatrixXd> chol;
  double log_norm = 0.0;  // -0.5 * (d log 2pi + log det)
  double eig_min = 0.0;
  double eig_max = 0.0;

  double log_density(const Eigen::Ref<const Eigen::VectorXd>& x) const {
    const Eigen::VectorXd z = chol.matrixL().solve(x - mean);
    return log_weight + log_norm - 0.5 * z.squaredNorm();
  }
};

std::vector<Component> prepare(const MixtureModel& m) {
  std::vector<Component> out(m.k());
  const double d = static_cast<double>(m.dim);
  for (std::size_t j = 0; j < m.k(); ++j) {
    Component& c = out[j];
    c.log_weight = m.weights[j] > 0.0 ? std::log(m.weights[j]) : -std::numeric_limits<double>::infinity();
    c.mean = m.means[j];
    c.chol.compute(m.covariances[j]);
    if (c.chol.info() != Eigen::Success) throw ValidationError("covariance is not positive definite");
    const Eigen::MatrixXd l = c.chol.matrixL();
    double logdet = 0.0;
    for (Eigen::Index i = 0; i < l.rows(); ++i) logdet += 2.0 * std::log(l(i, i));
    c.log_norm = -0.5 * (d * kLog2Pi + logdet);
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(m.covariances[j], Eigen::EigenvaluesOnly);
    c.eig_min = es.eigenvalues().minCoeff();
    c.eig_max = es.eigenvalues().maxCoeff();
  }
  return out;
}

double log_sum_exp(const Eigen::VectorXd& v) {
  const double mx = v.maxCoeff();
  if (!std::isfinite(mx)) return mx;
  return mx + std::log((v.array() - mx).exp().sum());
}

// Clamps eigenvalues from below so the matrix stays positive definite.
Eigen::MatrixXd floor_covariance(const Eigen::MatrixXd& cov, double floor) {
  Eigen::MatrixXd sym = 0.5 * (cov + cov.transpose());
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(sym);
  if (es.eigenvalues().minCoeff() >= floor) return sym;
  const Eigen::VectorXd ev = es.eigenvalues().cwiseMax(floor);
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().transpose();
}

void validate_points(const PointMatrix& x) {
  if (x.cols() < 1) throw ValidationError("points need at least one dimension");
  if (!x.allFinite()) throw ValidationError("points contain non-finite values");
}

// kd-tree over rows with per-node sufficient statistics.
struct StatNode {
  Eigen::VectorXd lo, hi;
  Eigen::VectorXd sum;
  Eigen::MatrixXd outer;  // sum of x x^T
  Eigen::VectorXd centroid;
  std::size_t begin = 0, end = 0;
  int left = -1, right = -1;
  bool leaf() const { return left < 0; }
};

class StatTree {
public:
  StatTree(const PointMatrix& x, std::size_t leaf) : x_(x), order_(static_cast<std::size_t>(x.rows())) {
    std::iota(order_.begin(), order_.end(), std::size_t{0});
    build(0, order_.size(), leaf);
  }
  const std::vector<StatNode>& nodes() const { return nodes_; }
  const std::vector<std::size_t>& order() const { return order_; }

private:
  int build(std::size_t b, std::size_t e, std::size_t leaf) {
    const int id = static_cast<int>(nodes_.size());
    nodes_.emplace_back();
    const Eigen::Index d = x_.cols();
    StatNode n;
    n.begin = b;
    n.end = e;
    n.lo = Eigen::VectorXd::Constant(d, std::numeric_limits<double>::infinity());
    n.hi = Eigen::VectorXd::Constant(d, -std::numeric_limits<double>::infinity());
    n.sum = Eigen::VectorXd::Zero(d);
    n.outer = Eigen::MatrixXd::Zero(d, d);
    for (std::size_t i = b; i < e; ++i) {
      const Eigen::VectorXd p = x_.row(static_cast<Eigen::Index>(order_[i])).transpose();
      n.lo = n.lo.cwiseMin(p);
      n.hi = n.hi.cwiseMax(p);
      n.sum += p;
      n.outer.noalias() += p * p.transpose();
    }
    n.centroid = n.sum / static_cast<double>(e - b);
    if (e - b > leaf) {
      Eigen::Index axis = 0;
      (n.hi - n.lo).maxCoeff(&axis);
      if (n.hi(axis) > n.lo(axis)) {
        const std::size_t mid = b + (e - b) / 2;
        std::nth_element(order_.begin() + static_cast<std::ptrdiff_t>(b), order_.begin() + static_cast<std::ptrdiff_t>(mid),
                         order_.begin() + static_cast<std::ptrdiff_t>(e), [&](std::size_t p, std::size_t q) {
                           const double vp = x_(static_cast<Eigen::Index>(p), axis);
                           const double vq = x_(static_cast<Eigen::Index>(q), axis);
                           return vp != vq ? vp < vq : p < q;
                         });
        n.left = build(b, mid, leaf);
        n.right = build(mid, e, leaf);
      }
    }
    nodes_[static_cast<std::size_t>(id)] = std::move(n);
    return id;
  }

  const PointMatrix& x_;
  std::vector<std::size_t> order_;
  std::vector<StatNode> nodes_;
};

// Weighted sufficient statistics gathered by one E-step.
struct Accumulator {
  std::vector<double> n;
  std::vector<Eigen::VectorXd> s1;
  std::vector<Eigen::MatrixXd> s2;
  double log_likelihood = 0.0;

  Accumulator(std::size_t k, Eigen::Index d)
      : n(k, 0.0), s1(k, Eigen::VectorXd::Zero(d)), s2(k, Eigen::MatrixXd::Zero(d, d)) {}
};

class KdEStep {
public:
  KdEStep(const StatTree& tree, const PointMatrix& x, const std::vector<Component>& comps, double tau,
          Accumulator& acc, KdTreeStats& stats)
      : tree_(tree), x_(x), comps_(comps), tau_(tau), acc_(acc), stats_(stats) {}

  void run(int id) {
    const StatNode& node = tree_.nodes()[static_cast<std::size_t>(id)];
    const std::size_t k = comps_.size();
    const double count = static_cast<double>(node.end - node.begin);
    if (node.end - node.begin > 1 && bounds_tight(node)) {
      ++stats_.nodes_pruned;
      stats_.responsibility_evaluations += k;
      Eigen::VectorXd lp(static_cast<Eigen::Index>(k));
      for (std::size_t j = 0; j < k; ++j) lp(static_cast<Eigen::Index>(j)) = comps_[j].log_density(node.centroid);
      const double lse = log_sum_exp(lp);
      acc_.log_likelihood += count * lse;
      for (std::size_t j = 0; j < k; ++j) {
        const double r = std::exp(lp(static_cast<Eigen::Index>(j)) - lse);
        acc_.n[j] += r * count;
        acc_.s1[j] += r * node.sum;
        acc_.s2[j] += r * node.outer;
      }
      return;
    }
    if (node.leaf()) {
      Eigen::VectorXd lp(static_cast<Eigen::Index>(k));
      for (std::size_t i = node.begin; i < node.end; ++i) {
        const Eigen::VectorXd p = x_.row(static_cast<Eigen::Index>(tree_.order()[i])).transpose();
        stats_.responsibility_evaluations += k;
        for (std::size_t j = 0; j < k; ++j) lp(static_cast<Eigen::Index>(j)) = comps_[j].log_density(p);
        const double lse = log_sum_exp(lp);
        acc_.log_likelihood += lse;
        for (std::size_t j = 0; j < k; ++j) {
          const double r = std::exp(lp(static_cast<Eigen::Index>(j)) - lse);
          acc_.n[j] += r;
          acc_.s1[j] += r * p;
          acc_.s2[j].noalias() += r * p * p.transpose();
        }
      }
      return;
    }
    run(node.left);
    run(node.right);
  }

private:
  // Responsibility bounds from Mahalanobis bounds via the covariance
  // eigenvalue range; tight when every component's spread is within tau.
  bool bounds_tight(const StatNode& node) {
    const std::size_t k = comps_.size();
    stats_.responsibility_evaluations += k;
    std::vector<double> lo(k), hi(k);
    for (std::size_t j = 0; j < k; ++j) {
      const Eigen::VectorXd& mu = comps_[j].mean;
      const Eigen::VectorXd nearest = mu.cwiseMax(node.lo).cwiseMin(node.hi);
      const double dmin2 = (nearest - mu).squaredNorm();
      const Eigen::VectorXd far = (node.lo - mu).cwiseAbs().cwiseMax((node.hi - mu).cwiseAbs());
      const double dmax2 = far.squaredNorm();
      hi[j] = comps_[j].log_weight + comps_[j].log_norm - 0.5 * dmin2 / comps_[j].eig_max;
      lo[j] = comps_[j].log_weight + comps_[j].log_norm - 0.5 * dmax2 / comps_[j].eig_min;
    }
    const double ref = *std::max_element(hi.begin(), hi.end());
    std::vector<double> a_lo(k), a_hi(k);
    double sum_lo = 0.0, sum_hi = 0.0;
    for (std::size_t j = 0; j < k; ++j) {
      a_lo[j] = std::exp(lo[j] - ref);
      a_hi[j] = std::exp(hi[j] - ref);
      sum_lo += a_lo[j];
      sum_hi += a_hi[j];
    }
    for (std::size_t j = 0; j < k; ++j) {
      const double others_hi = sum_hi - a_hi[j];
      const double others_lo = sum_lo - a_lo[j];
      const double r_min = a_lo[j] + others_hi > 0.0 ? a_lo[j] / (a_lo[j] + others_hi) : 0.0;
      const double r_max = a_hi[j] + others_lo > 0.0 ? a_hi[j] / (a_hi[j] + others_lo) : 1.0;
      if (r_max - r_min > tau_) return false;
    }
    return true;
  }

  const StatTree& tree_;
  const PointMatrix& x_;
  const std::vector<Component>& comps_;
  double tau_;
  Accumulator& acc_;
  KdTreeStats& stats_;
};

void exact_estep(const PointMatrix& x, const std::vector<Component>& comps, Accumulator& acc,
                 Eigen::MatrixXd& resp, KdTreeStats& stats) {
  const std::size_t k = comps.size();
  const Eigen::Index n = x.rows();
  resp.resize(n, static_cast<Eigen::Index>(k));
  Eigen::VectorXd lp(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd p = x.row(i).transpose();
    for (std::size_t j = 0; j < k; ++j) lp(static_cast<Eigen::Index>(j)) = comps[j].log_density(p);
    stats.responsibility_evaluations += k;
    const double lse = log_sum_exp(lp);
    acc.log_likelihood += lse;
    for (std::size_t j = 0; j < k; ++j) {
      const double r = std::exp(lp(static_cast<Eigen::Index>(j)) - lse);
      resp(i, static_cast<Eigen::Index>(j)) = r;
      acc.n[j] += r;
      acc.s1[j] += r * p;
    }
  }
}

std::vector<Eigen::VectorXd> kmeanspp(const PointMatrix& x, std::size_t k, Rng& rng) {
  const Eigen::Index n = x.rows();
  std::vector<Eigen::VectorXd> centers;
  centers.push_back(x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)))).transpose());
  std::vector<double> d2(static_cast<std::size_t>(n), std::numeric_limits<double>::infinity());
  while (centers.size() < k) {
    double total = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      const double d = (x.row(i).transpose() - centers.back()).squaredNorm();
      d2[static_cast<std::size_t>(i)] = std::min(d2[static_cast<std::size_t>(i)], d);
      total += d2[static_cast<std::size_t>(i)];
    }
    Eigen::Index pick = 0;
    if (total > 0.0) {
      double u = rng.uniform() * total;
      for (Eigen::Index i = 0; i < n; ++i) {
        u -= d2[static_cast<std::size_t>(i)];
        if (u < 0.0) {
          pick = i;
          break;
        }
        pick = i;
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(n)));
    }
    centers.push_back(x.row(pick).transpose());
  }
  return centers;
}

}  // namespace

EmResult em_fit(const PointMatrix& points, const EmOptions& opt) {
  validate_points(points);
  const Eigen::Index n = points.rows();
  const Eigen::Index d = points.cols();
  if (opt.k < 1) throw ValidationError("k must be at least 1");
  if (static_cast<Eigen::Index>(opt.k) > n) throw ValidationError("k exceeds the number of points");
  if (!(opt.tol >= 0.0)) throw ValidationError("tol must be non-negative");
  if (!(opt.tau >= 0.0)) throw ValidationError("tau must be non-negative");
  if (opt.max_iter < 1) throw ValidationError("max_iter must be at least 1");

  const Eigen::VectorXd global_mean = points.colwise().mean().transpose();
  const Eigen::MatrixXd centered = points.rowwise() - global_mean.transpose();
  const Eigen::MatrixXd global_cov = (centered.transpose() * centered) / static_cast<double>(n);
  double var_floor = std::numeric_limits<double>::infinity();
  for (Eigen::Index c = 0; c < d; ++c) var_floor = std::min(var_floor, opt.floor_fraction * global_cov(c, c));
  if (!(var_floor > 0.0)) var_floor = opt.floor_fraction;

  Rng rng(opt.seed);
  EmResult res;
  MixtureModel& m = res.model;
  m.dim = static_cast<std::size_t>(d);
  m.means = kmeanspp(points, opt.k, rng);
  m.weights.assign(opt.k, 1.0 / static_cast<double>(opt.k));
  m.covariances.assign(opt.k, floor_covariance(global_cov, var_floor));

  std::optional<StatTree> tree;
  if (opt.mode == EmMode::kKd) tree.emplace(points, std::max<std::size_t>(opt.leaf_size, 1));

  Eigen::MatrixXd resp;
  for (std::size_t it = 0; it < opt.max_iter; ++it) {
    const std::vector<Component> comps = prepare(m);
    Accumulator acc(opt.k, d);
    res.stats.exact_evaluations += static_cast<std::uint64_t>(n) * opt.k;
    if (opt.mode == EmMode::kExact) {
      exact_estep(points, comps, acc, resp, res.stats);
    } else {
      KdEStep(*tree, points, comps, opt.tau, acc, res.stats).run(0);
    }
    m.log_likelihood.push_back(acc.log_likelihood);
    m.iterations = it + 1;
    if (it > 0) {
      const double prev = m.log_likelihood[it - 1];
      if (std::fabs(acc.log_likelihood - prev) < opt.tol * std::max(1.0, std::fabs(acc.log_likelihood))) {
        m.converged = true;
        break;
      }
    }

    // M-step.
    double total = 0.0;
    for (const double v : acc.n) total += v;
    for (std::size_t j = 0; j < opt.k; ++j) {
      m.weights[j] = acc.n[j] / total;
      if (!(acc.n[j] > 0.0)) continue;  // empty component keeps its shape
      m.means[j] = acc.s1[j] / acc.n[j];
      Eigen::MatrixXd cov;
      if (opt.mode == EmMode::kExact) {
        cov = Eigen::MatrixXd::Zero(d, d);
        for (Eigen::Index i = 0; i < n; ++i) {
          const Eigen::VectorXd dv = points.row(i).transpose() - m.means[j];
          cov.noalias() += resp(i, static_cast<Eigen::Index>(j)) * dv * dv.transpose();
        }
        cov /= acc.n[j];
      } else {
        cov = acc.s2[j] / acc.n[j] - m.means[j] * m.means[j].transpose();
      }
      m.covariances[j] = floor_covariance(cov, var_floor);
    }
    const double wsum = std::accumulate(m.weights.begin(), m.weights.end(), 0.0);
    for (auto& w : m.weights) w /= wsum;
  }
  return res;
}

Eigen::MatrixXd responsibilities(const MixtureModel& model, const PointMatrix& points) {
  validate_points(points);
  if (static_cast<std::size_t>(points.cols()) != model.dim) throw ValidationError("dimension mismatch");
  const auto comps = prepare(model);
  const std::size_t k = comps.size();
  Eigen::MatrixXd r(points.rows(), static_cast<Eigen::Index>(k));
  Eigen::VectorXd lp(static_cast<Eigen::Index>(k));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::VectorXd p = points.row(i).transpose();
    for (std::size_t j = 0; j < k; ++j) lp(static_cast<Eigen::Index>(j)) = comps[j].log_density(p);
    const double lse = log_sum_exp(lp);
    for (std::size_t j = 0; j < k; ++j) r(i, static_cast<Eigen::Index>(j)) = std::exp(lp(static_cast<Eigen::Index>(j)) - lse);
  }
  return r;
}

std::vector<double> outlier_scores(const MixtureModel& model, const PointMatrix& points) {
  validate_points(points);
  if (static_cast<std::size_t>(points.cols()) != model.dim) throw ValidationError("dimension mismatch");
  const auto comps = prepare(model);
  std::vector<double> scores(static_cast<std::size_t>(points.rows()));
  Eigen::VectorXd lp(static_cast<Eigen::Index>(comps.size()));
  for (Eigen::Index i = 0; i < points.rows(); ++i) {
    const Eigen::VectorXd p = points.row(i).transpose();
    for (std::size_t j = 0; j < comps.size(); ++j) lp(static_cast<Eigen::Index>(j)) = comps[j].log_density(p);
    scores[static_cast<std::size_t>(i)] = -log_sum_exp(lp);
  }
  return scores;
}

double compare_models(const MixtureModel& a, const MixtureModel& b) {
  if (a.k() != b.k() || a.dim != b.dim) throw ValidationError("models differ in shape");
  auto rel = [](double x, double y) { return std::fabs(x - y) / std::max(1.0, std::fabs(x)); };
  std::vector<bool> taken(b.k(), false);
  double worst = 0.0;
  for (std::size_t j = 0; j < a.k(); ++j) {
    std::size_t best = b.k();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t q = 0; q < b.k(); ++q) {
      if (taken[q]) continue;
      const double dist = (a.means[j] - b.means[q]).squaredNorm();
      if (dist < best_d) {
        best_d = dist;
        best = q;
      }
    }
    taken[best] = true;
    worst = std::max(worst, rel(a.weights[j], b.weights[best]));
    for (Eigen::Index c = 0; c < a.means[j].size(); ++c) worst = std::max(worst, rel(a.means[j](c), b.means[best](c)));
    for (Eigen::Index r = 0; r < a.covariances[j].rows(); ++r) {
      for (Eigen::Index c = 0; c < a.covariances[j].cols(); ++c) {
        worst = std::max(worst, rel(a.covariances[j](r, c), b.covariances[best](r, c)));
      }
    }
  }
  return worst;
}

std::string mixture_to_json(const MixtureModel& model) {
  nlohmann::ordered_json j;
  j["dim"] = model.dim;
  j["k"] = model.k();
  j["weights"] = model.weights;
  auto means = nlohmann::json::array();
  auto covs = nlohmann::json::array();
  for (std::size_t c = 0; c < model.k(); ++c) {
    means.push_back(std::vector<double>(model.means[c].data(), model.means[c].data() + model.means[c].size()));
    auto rows = nlohmann::json::array();
    for (Eigen::Index r = 0; r < model.covariances[c].rows(); ++r) {
      std::vector<double> row(static_cast<std::size_t>(model.covariances[c].cols()));
      for (Eigen::Index q = 0; q < model.covariances[c].cols(); ++q) row[static_cast<std::size_t>(q)] = model.covariances[c](r, q);
      rows.push_back(row);
    }
    covs.push_back(rows);
  }
  j["means"] = means;
  j["covariances"] = covs;
  j["fit_log"] = {{"iterations", model.iterations}, {"converged", model.converged}, {"log_likelihood", model.log_likelihood}};
  return j.dump(2);
}

MixtureModel mixture_from_json(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("mixture JSON: ") + e.what());
  }
  try {
    MixtureModel m;
    m.dim = j.at("dim").get<std::size_t>();
    m.weights = j.at("weights").get<std::vector<double>>();
    for (const auto& mu : j.at("means")) {
      const auto v = mu.get<std::vector<double>>();
      if (v.size() != m.dim) throw ValidationError("mixture JSON: mean has wrong dimension");
      m.means.emplace_back(Eigen::Map<const Eigen::VectorXd>(v.data(), static_cast<Eigen::Index>(v.size())));
    }
    for (const auto& cov : j.at("covariances")) {
      Eigen::MatrixXd c(static_cast<Eigen::Index>(m.dim), static_cast<Eigen::Index>(m.dim));
      if (cov.size() != m.dim) throw ValidationError("mixture JSON: covariance has wrong dimension");
      for (std::size_t r = 0; r < m.dim; ++r) {
        const auto row = cov.at(r).get<std::vector<double>>();
        if (row.size() != m.dim) throw ValidationError("mixture JSON: covariance has wrong dimension");
        for (std::size_t q = 0; q < m.dim; ++q) c(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(q)) = row[q];
      }
      m.covariances.push_back(c);
    }
    if (m.means.size() != m.weights.size() || m.covariances.size() != m.weights.size() || m.weights.empty()) {
      throw ValidationError("mixture JSON: component counts disagree");
    }
    if (j.contains("fit_log")) {
      const auto& log = j["fit_log"];
      m.iterations = log.value("iterations", std::size_t{0});
      m.converged = log.value("converged", false);
      if (log.contains("log_likelihood")) m.log_likelihood = log["log_likelihood"].get<std::vector<double>>();
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    throw ValidationError(std::string("mixture JSON: ") + e.what());
  }
}

}  // namespace petacat
