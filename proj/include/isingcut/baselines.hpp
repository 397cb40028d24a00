#pragma once

#include <string>
#include <vector>

#include <Eigen/Dense>

#include "isingcut/dataset.hpp"
#include "isingcut/model.hpp"

namespace isingcut {

struct LogisticOptions {
  double tol = 1e-7;        // stop when the largest coordinate change in a sweep is below this
  int max_sweeps = 20000;
  double coef_cap = 30.0;   // |beta_j| and |intercept| are clipped here
};

struct LogisticFit {
  double intercept = 0.0;
  Eigen::VectorXd beta;  // one entry per other node, in increasing node order
  int sweeps = 0;
  bool converged = false;
  bool capped = false;
  std::vector<double> objective_trace;  // objective after each sweep
};

/// (1/n) sum_i log(1 + exp(-y_i (b0 + beta^T z_i))) + lambda ||beta||_1 with
/// y = column v and z = the remaining columns.
double logistic_objective(int v, const Dataset& data, double lambda, double intercept, const Eigen::VectorXd& beta);

/// l1-penalized logistic regression of node v on the others by cyclic
/// coordinate descent. Each coordinate minimizes the quadratic majorizer with
/// curvature 1/4; the intercept is unpenalized.
LogisticFit logistic_lasso(int v, const Dataset& data, double lambda, const LogisticOptions& opts = {});

/// Per-node pseudo-likelihood estimate on the Ising scale.
///
/// coupling(v, u) is the estimate of theta_uv from the regression of node v,
/// i.e. beta_u / 2; fields(v) is the intercept of node v over 2.
struct AsymmetricEstimate {
  int p = 0;
  Eigen::MatrixXd coupling;  // diagonal unused (zero)
  Eigen::VectorXd fields;
  int capped_nodes = 0;
  bool converged = true;
  int total_sweeps = 0;
  double wall_time = 0.0;
};

AsymmetricEstimate fit_pseudo(const Dataset& data, double lambda, const LogisticOptions& opts = {});

enum class SymmetrizeMode { kMin, kMax };

std::string to_string(SymmetrizeMode mode);

/// Per pair keeps the smaller (kMin) or larger (kMax) magnitude of the two
/// directed estimates, ties going to the estimate from the lower-indexed node.
/// Magnitudes <= edge_tol are dropped.
IsingModel symmetrize(const AsymmetricEstimate& est, SymmetrizeMode mode, double edge_tol = 1e-4);

}  // namespace isingcut
