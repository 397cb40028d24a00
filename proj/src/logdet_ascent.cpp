#include "logdet_ascent.hpp"

#include <algorithm>
#include <cmath>

#include "isingcut/errors.hpp"

namespace isingcut::detail {
namespace {

struct FullEntry {
  int row;
  int col;
  double value;
};

std::vector<FullEntry> expand(const SymDirection& d) {
  std::vector<FullEntry> out;
  out.reserve(2 * d.size());
  for (const auto& e : d) {
    out.push_back({e.i, e.j, e.value});
    if (e.i != e.j) out.push_back({e.j, e.i, e.value});
  }
  return out;
}

}  // namespace

bool logdet_pd(const Eigen::MatrixXd& s, double& logdet, Eigen::LLT<Eigen::MatrixXd>* factor) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) return false;
  const auto diag = llt.matrixLLT().diagonal();
  if ((diag.array() <= 0.0).any() || !diag.allFinite()) return false;
  logdet = 2.0 * diag.array().log().sum();
  if (factor) *factor = std::move(llt);
  return true;
}

Eigen::MatrixXd assemble(const AffineLogdetProblem& problem, const Eigen::VectorXd& z) {
  Eigen::MatrixXd s = problem.base;
  for (std::size_t j = 0; j < problem.directions.size(); ++j) {
    const double zj = z[static_cast<Eigen::Index>(j)];
    if (zj == 0.0) continue;
    for (const auto& e : problem.directions[j]) {
      s(e.i, e.j) += zj * e.value;
      if (e.i != e.j) s(e.j, e.i) += zj * e.value;
    }
  }
  return s;
}

AffineLogdetResult maximize_affine_logdet(const AffineLogdetProblem& problem, Eigen::VectorXd z0,
                                          const AffineLogdetOptions& options) {
  const auto dim = static_cast<Eigen::Index>(problem.directions.size());
  std::vector<std::vector<FullEntry>> full;
  full.reserve(problem.directions.size());
  for (const auto& d : problem.directions) full.push_back(expand(d));
  auto bounded = [&](Eigen::Index j) { return problem.nonneg[static_cast<std::size_t>(j)] != 0; };

  AffineLogdetResult res;
  res.z = std::move(z0);
  for (Eigen::Index j = 0; j < dim; ++j) {
    if (bounded(j)) res.z[j] = std::max(res.z[j], 0.0);
  }

  auto evaluate = [&](const Eigen::VectorXd& z, double& value, Eigen::LLT<Eigen::MatrixXd>* factor) {
    double ld = 0.0;
    if (!logdet_pd(assemble(problem, z), ld, factor)) return false;
    value = ld + problem.linear.dot(z);
    return std::isfinite(value);
  };

  Eigen::LLT<Eigen::MatrixXd> factor;
  if (!evaluate(res.z, res.value, &factor)) {
    throw NumericalError("log-det ascent started from a matrix that is not positive definite");
  }

  const Eigen::Index n = problem.base.rows();
  for (res.iterations = 0; res.iterations <= options.max_iters; ++res.iterations) {
    res.inverse = factor.solve(Eigen::MatrixXd::Identity(n, n));
    const Eigen::MatrixXd& z_inv = res.inverse;

    Eigen::VectorXd grad = problem.linear;
    for (Eigen::Index j = 0; j < dim; ++j) {
      for (const auto& e : full[static_cast<std::size_t>(j)]) grad[j] += e.value * z_inv(e.col, e.row);
    }
    res.gradient = grad;

    // Projected gradient and the Bertsekas active set.
    Eigen::VectorXd step_to_proj(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      const double moved = bounded(j) ? std::max(res.z[j] + grad[j], 0.0) : res.z[j] + grad[j];
      step_to_proj[j] = moved - res.z[j];
    }
    res.projected_gradient = dim ? step_to_proj.cwiseAbs().maxCoeff() : 0.0;
    if (res.projected_gradient <= options.grad_tol) {
      res.converged = true;
      break;
    }
    if (res.iterations == options.max_iters) break;

    const double eps = std::min(1e-8, res.projected_gradient);
    std::vector<Eigen::Index> free_set;
    std::vector<char> active(static_cast<std::size_t>(dim), 0);
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (bounded(j) && res.z[j] <= eps && grad[j] < 0.0) {
        active[static_cast<std::size_t>(j)] = 1;
      } else {
        free_set.push_back(j);
      }
    }

    // Negated Hessian on the free set: tr(Z G_j Z G_k).
    const auto nf = static_cast<Eigen::Index>(free_set.size());
    Eigen::MatrixXd neg_hess(nf, nf);
    for (Eigen::Index a = 0; a < nf; ++a) {
      const auto& fa = full[static_cast<std::size_t>(free_set[static_cast<std::size_t>(a)])];
      for (Eigen::Index b = a; b < nf; ++b) {
        const auto& fb = full[static_cast<std::size_t>(free_set[static_cast<std::size_t>(b)])];
        double h = 0.0;
        for (const auto& x : fa) {
          for (const auto& y : fb) h += x.value * y.value * z_inv(x.col, y.row) * z_inv(y.col, x.row);
        }
        neg_hess(a, b) = neg_hess(b, a) = h;
      }
    }
    Eigen::VectorXd grad_free(nf);
    for (Eigen::Index a = 0; a < nf; ++a) grad_free[a] = grad[free_set[static_cast<std::size_t>(a)]];

    Eigen::VectorXd dir = Eigen::VectorXd::Zero(dim);
    if (nf > 0) {
      const double ridge = 1e-12 * std::max(1.0, neg_hess.diagonal().cwiseAbs().maxCoeff());
      Eigen::LDLT<Eigen::MatrixXd> ldlt(neg_hess + ridge * Eigen::MatrixXd::Identity(nf, nf));
      Eigen::VectorXd d_free = ldlt.solve(grad_free);
      if (ldlt.info() != Eigen::Success || !d_free.allFinite() || d_free.dot(grad_free) <= 0.0) {
        d_free = grad_free;
      }
      for (Eigen::Index a = 0; a < nf; ++a) dir[free_set[static_cast<std::size_t>(a)]] = d_free[a];
    }
    for (Eigen::Index j = 0; j < dim; ++j) {
      if (active[static_cast<std::size_t>(j)]) dir[j] = grad[j];
    }

    double t = 1.0;
    bool accepted = false;
    Eigen::VectorXd trial(dim);
    for (int h = 0; h <= options.max_halvings; ++h, t *= options.backtrack) {
      for (Eigen::Index j = 0; j < dim; ++j) {
        trial[j] = res.z[j] + t * dir[j];
        if (bounded(j)) trial[j] = std::max(trial[j], 0.0);
      }
      double value = 0.0;
      Eigen::LLT<Eigen::MatrixXd> trial_factor;
      if (!evaluate(trial, value, &trial_factor)) continue;
      if (value >= res.value + options.armijo * grad.dot(trial - res.z)) {
        res.z = trial;
        res.value = value;
        factor = std::move(trial_factor);
        accepted = true;
        break;
      }
    }
    if (!accepted) break;
    if (res.z.cwiseAbs().maxCoeff() > options.divergence_limit) {
      res.diverged = true;
      break;
    }
  }
  res.inverse = factor.solve(Eigen::MatrixXd::Identity(n, n));
  return res;
}

}  // namespace isingcut::detail
