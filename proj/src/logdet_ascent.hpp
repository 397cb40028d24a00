#pragma once

// Internal: maximization of  logdet(S0 + sum_j z_j G_j) + c^T z  with some
// coordinates of z constrained to be nonnegative, by projected Newton steps
// with an Armijo search along the projection arc.

#include <vector>

#include <Eigen/Dense>

namespace isingcut::detail {

struct SymEntry {
  int i = 0;
  int j = 0;  // i <= j; i == j is a diagonal entry
  double value = 0.0;
};

using SymDirection = std::vector<SymEntry>;

struct AffineLogdetProblem {
  Eigen::MatrixXd base;
  std::vector<SymDirection> directions;
  Eigen::VectorXd linear;
  std::vector<char> nonneg;
};

struct AffineLogdetOptions {
  double grad_tol = 1e-10;
  int max_iters = 500;
  double backtrack = 0.5;
  int max_halvings = 30;
  double armijo = 1e-4;
  double divergence_limit = 1e12;
};

struct AffineLogdetResult {
  Eigen::VectorXd z;
  double value = 0.0;
  Eigen::MatrixXd inverse;  // (S0 + sum z_j G_j)^{-1}
  Eigen::VectorXd gradient;
  double projected_gradient = 0.0;
  int iterations = 0;
  bool converged = false;
  bool diverged = false;
};

/// Requires S(z0) positive definite. Throws NumericalError otherwise.
AffineLogdetResult maximize_affine_logdet(const AffineLogdetProblem& problem, Eigen::VectorXd z0,
                                          const AffineLogdetOptions& options);

/// S0 + sum z_j G_j.
Eigen::MatrixXd assemble(const AffineLogdetProblem& problem, const Eigen::VectorXd& z);

/// logdet through a Cholesky factorization; false when not positive definite.
bool logdet_pd(const Eigen::MatrixXd& s, double& logdet, Eigen::LLT<Eigen::MatrixXd>* factor = nullptr);

}  // namespace isingcut::detail
