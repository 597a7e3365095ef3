#pragma once

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Dense>

namespace petacat {

/// Points as rows.
using PointMatrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

struct MixtureModel {
  std::size_t dim = 0;
  std::vector<double> weights;
  std::vector<Eigen::VectorXd> means;
  std::vector<Eigen::MatrixXd> covariances;
  std::vector<double> log_likelihood;  ///< total, one entry per iteration
  std::size_t iterations = 0;
  bool converged = false;

  std::size_t k() const { return weights.size(); }
};

enum class EmMode { kExact, kKd };

struct EmOptions {
  std::size_t k = 1;
  EmMode mode = EmMode::kExact;
  double tol = 1e-8;            ///< stop when |dLL| < tol * max(1, |LL|)
  std::size_t max_iter = 200;
  std::uint64_t seed = 1;
  double tau = 1e-4;            ///< kd pruning tolerance on responsibility bounds
  std::size_t leaf_size = 16;
  double floor_fraction = 1e-6; ///< covariance floor relative to data variance
};

struct KdTreeStats {
  std::uint64_t nodes_pruned = 0;
  /// Component density evaluations (per point, or per node for bounds and
  /// block assignment).
  std::uint64_t responsibility_evaluations = 0;
  /// What exact mode spends for the same number of iterations: N * k each.
  std::uint64_t exact_evaluations = 0;
  /// Filled by compare_models: largest relative parameter difference.
  double exact_deviation = 0.0;
};

struct EmResult {
  MixtureModel model;
  KdTreeStats stats;
};

/// Seeds with k-means++ and iterates EM. Throws ValidationError for k > N,
/// k == 0, empty dimension or non-finite input.
EmResult em_fit(const PointMatrix& points, const EmOptions& options);

/// Responsibilities for each point under the model (rows sum to 1).
Eigen::MatrixXd responsibilities(const MixtureModel& model, const PointMatrix& points);

/// Negative log-likelihood of each point; higher means more anomalous.
std::vector<double> outlier_scores(const MixtureModel& model, const PointMatrix& points);

/// Largest |a - b| / max(1, |a|) over weights, means and covariances, after
/// pairing components by nearest mean. Models must have equal k and dim.
double compare_models(const MixtureModel& a, const MixtureModel& b);

std::string mixture_to_json(const MixtureModel& model);
MixtureModel mixture_from_json(const std::string& text);

}  // namespace petacat
