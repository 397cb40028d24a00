#include "isingcut/baselines.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <stdexcept>

namespace isingcut {
namespace {

// log(1 + exp(-t)) without overflow.
double log1pexp_neg(double t) { return t > 0.0 ? std::log1p(std::exp(-t)) : -t + std::log1p(std::exp(t)); }

// d/dt log(1 + exp(-t)) = -1 / (1 + exp(t)).
double dloss(double t) { return t > 0.0 ? -std::exp(-t) / (1.0 + std::exp(-t)) : -1.0 / (1.0 + std::exp(t)); }

double soft_threshold(double x, double k) {
  if (x > k) return x - k;
  if (x < -k) return x + k;
  return 0.0;
}

int other_column(int v, int j) { return j < v ? j : j + 1; }

void check_args(int v, const Dataset& data, double lambda) {
  if (data.n < 1) throw std::invalid_argument("logistic regression needs at least one sample");
  if (v < 0 || v >= data.p) throw std::invalid_argument("node index out of range");
  if (!(lambda >= 0.0) || !std::isfinite(lambda)) throw std::invalid_argument("lambda must be finite and >= 0");
}

}  // namespace

double logistic_objective(int v, const Dataset& data, double lambda, double intercept, const Eigen::VectorXd& beta) {
  check_args(v, data, lambda);
  const int q = data.p - 1;
  if (beta.size() != q) throw std::invalid_argument("coefficient vector has the wrong length");
  double loss = 0.0;
  for (int i = 0; i < data.n; ++i) {
    double eta = intercept;
    for (int j = 0; j < q; ++j) eta += beta[j] * data.at(i, other_column(v, j));
    loss += log1pexp_neg(data.at(i, v) * eta);
  }
  return loss / data.n + lambda * beta.lpNorm<1>();
}

LogisticFit logistic_lasso(int v, const Dataset& data, double lambda, const LogisticOptions& opts) {
  check_args(v, data, lambda);
  const int n = data.n;
  const int q = data.p - 1;
  constexpr double kInvCurvature = 4.0;

  LogisticFit fit;
  fit.beta = Eigen::VectorXd::Zero(q);

  // y_i * z_ij and y_i as dense columns; margin_i = y_i (b0 + beta^T z_i).
  Eigen::MatrixXd yz(n, q);
  Eigen::VectorXd y(n);
  for (int i = 0; i < n; ++i) {
    y[i] = data.at(i, v);
    for (int j = 0; j < q; ++j) yz(i, j) = y[i] * data.at(i, other_column(v, j));
  }
  Eigen::VectorXd margin = Eigen::VectorXd::Zero(n);
  Eigen::VectorXd slope(n);

  auto objective = [&] {
    double loss = 0.0;
    for (int i = 0; i < n; ++i) loss += log1pexp_neg(margin[i]);
    return loss / n + lambda * fit.beta.lpNorm<1>();
  };
  auto refresh_slope = [&] {
    for (int i = 0; i < n; ++i) slope[i] = dloss(margin[i]);
  };

  for (fit.sweeps = 1; fit.sweeps <= opts.max_sweeps; ++fit.sweeps) {
    double max_change = 0.0;

    refresh_slope();
    {
      const double g = slope.dot(y) / n;
      double next = fit.intercept - kInvCurvature * g;
      if (std::abs(next) > opts.coef_cap) {
        next = std::copysign(opts.coef_cap, next);
        fit.capped = true;
      }
      const double delta = next - fit.intercept;
      if (delta != 0.0) {
        margin += delta * y;
        fit.intercept = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }

    for (int j = 0; j < q; ++j) {
      refresh_slope();
      const double g = slope.dot(yz.col(j)) / n;
      double next = soft_threshold(fit.beta[j] - kInvCurvature * g, kInvCurvature * lambda);
      if (std::abs(next) > opts.coef_cap) {
        next = std::copysign(opts.coef_cap, next);
        fit.capped = true;
      }
      const double delta = next - fit.beta[j];
      if (delta != 0.0) {
        margin += delta * yz.col(j);
        fit.beta[j] = next;
        max_change = std::max(max_change, std::abs(delta));
      }
    }

    fit.objective_trace.push_back(objective());
    if (max_change < opts.tol) {
      fit.converged = true;
      break;
    }
  }
  fit.sweeps = std::min(fit.sweeps, opts.max_sweeps);
  return fit;
}

AsymmetricEstimate fit_pseudo(const Dataset& data, double lambda, const LogisticOptions& opts) {
  const auto start = std::chrono::steady_clock::now();
  validate(data);
  AsymmetricEstimate est;
  est.p = data.p;
  est.coupling = Eigen::MatrixXd::Zero(data.p, data.p);
  est.fields = Eigen::VectorXd::Zero(data.p);
  for (int v = 0; v < data.p; ++v) {
    const LogisticFit f = logistic_lasso(v, data, lambda, opts);
    est.fields[v] = f.intercept / 2.0;
    for (int j = 0; j < data.p - 1; ++j) est.coupling(v, other_column(v, j)) = f.beta[j] / 2.0;
    est.capped_nodes += f.capped ? 1 : 0;
    est.converged = est.converged && f.converged;
    est.total_sweeps += f.sweeps;
  }
  est.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return est;
}

std::string to_string(SymmetrizeMode mode) { return mode == SymmetrizeMode::kMin ? "min" : "max"; }

IsingModel symmetrize(const AsymmetricEstimate& est, SymmetrizeMode mode, double edge_tol) {
  IsingModel model(est.p);
  for (int v = 0; v < est.p; ++v) model.set_node(v, est.fields[v]);
  for (int u = 0; u < est.p; ++u) {
    for (int v = u + 1; v < est.p; ++v) {
      const double a = est.coupling(u, v);
      const double b = est.coupling(v, u);
      const bool take_b = mode == SymmetrizeMode::kMin ? std::abs(b) < std::abs(a) : std::abs(b) > std::abs(a);
      const double value = take_b ? b : a;
      if (std::abs(value) > edge_tol) model.set_edge(u, v, value);
    }
  }
  return model;
}

}  // namespace isingcut
