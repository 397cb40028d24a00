#include "isingcut/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <numbers>
#include <set>
#include <stdexcept>

#include "isingcut/errors.hpp"
#include "logdet_ascent.hpp"

namespace isingcut {
namespace {

constexpr double kObjectiveNoise = 1e-14;

Eigen::MatrixXd base_matrix(const MeanVector& eta_hat) {
  Eigen::MatrixXd m = moment_matrix(eta_hat);
  m.diagonal() = m_vector(eta_hat.p());
  return m;
}

// sum over non-bias off-diagonals of lambda |G| - W G; zero iff W is optimal
// in the box for gradient G = Y.
double box_gap(const Eigen::MatrixXd& w, const Eigen::MatrixXd& grad, double lambda) {
  const Eigen::Index n = w.rows();
  double gap = 0.0;
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 1; i < n; ++i) {
      if (i != j) gap += lambda * std::abs(grad(i, j)) - w(i, j) * grad(i, j);
    }
  }
  return gap;
}

double cut_residual(const SolverState& state, const Eigen::MatrixXd& z) {
  double worst = 0.0;
  for (std::size_t k = 0; k < state.cuts.size(); ++k) {
    const double a = state.alpha[static_cast<Eigen::Index>(k)];
    const double v = violation(state.cuts[k], z);
    worst = std::max(worst, std::abs(a - std::max(0.0, a + v)));
  }
  return worst;
}

Eigen::MatrixXd inverse_of(const Eigen::LLT<Eigen::MatrixXd>& f, Eigen::Index n) {
  Eigen::MatrixXd inv = f.solve(Eigen::MatrixXd::Identity(n, n));
  return 0.5 * (inv + inv.transpose());
}

void require_finite_nonneg(double x, const char* name) {
  if (!(x >= 0.0) || !std::isfinite(x)) throw std::invalid_argument(std::string(name) + " must be finite and >= 0");
}

// Whether some W in the lambda box satisfies the cut on its own. Only the
// internal entries of the cut move with W.
bool box_reachable(const CycleInequality& cut, const MomentMatrix& eta_hat_matrix, double lambda) {
  double reach = 0.0;
  for (const auto& e : cut.coeff) {
    if (e.i >= 1) reach += 2.0 * lambda * std::abs(e.value);
  }
  return violation(cut, eta_hat_matrix) - reach <= 1e-12;
}

// Unreachable cuts make the multipliers diverge.
void require_box_feasible(const std::vector<CycleInequality>& cuts, const MeanVector& eta_hat, double lambda) {
  const MomentMatrix r = moment_matrix(eta_hat);
  for (const auto& c : cuts) {
    if (!box_reachable(c, r, lambda)) {
      throw NumericalError("cut " + c.signature + " cannot be satisfied within the lambda box");
    }
  }
}

// Runs at most max_steps W updates for fixed alpha; leaves Y coupled.
int run_w_steps(SolverState& s, const Eigen::MatrixXd& m, const Eigen::MatrixXd& k, const SolverConfig& cfg,
                int max_steps, double& gap) {
  const Eigen::Index n = m.rows();
  Eigen::LLT<Eigen::MatrixXd> factor;
  double ld = 0.0;
  if (!detail::logdet_pd(m + s.w, ld, &factor)) {
    throw NumericalError("W + R(eta_hat) + diag(m) is not positive definite");
  }
  auto dual = [&k](const Eigen::MatrixXd& w, double logdet) { return logdet - w.cwiseProduct(k).sum(); };
  double current = dual(s.w, ld);
  Eigen::MatrixXd grad = inverse_of(factor, n) - k;

  int accepted = 0;
  gap = box_gap(s.w, grad, cfg.lambda);
  for (int it = 0; it < max_steps && gap > cfg.gap_tol; ++it) {
    ++s.step_count;
    double gamma = cfg.gamma0;
    if (cfg.step_rule == StepRule::kDiminishing) {
      gamma = cfg.gamma0 / std::sqrt(static_cast<double>(s.step_count));
    } else if (s.has_prev) {
      const Eigen::MatrixXd ds = s.w - s.prev_w;
      const double sy = ds.cwiseProduct(grad - s.prev_grad).sum();
      const double ss = ds.squaredNorm();
      if (sy < 0.0 && ss > 0.0) gamma = std::clamp(ss / -sy, 1e-10, 1e10);
    }

    bool ok = false;
    bool stationary = false;
    Eigen::MatrixXd next;
    Eigen::LLT<Eigen::MatrixXd> next_factor;
    double next_value = 0.0;
    for (int h = 0; h <= cfg.max_halvings; ++h, gamma *= cfg.backtrack) {
      next = project_box(s.w + gamma * grad, cfg.lambda);
      const Eigen::MatrixXd diff = next - s.w;
      if (diff.cwiseAbs().maxCoeff() == 0.0) {
        stationary = true;
        break;
      }
      double next_ld = 0.0;
      if (!detail::logdet_pd(m + next, next_ld, &next_factor)) continue;
      next_value = dual(next, next_ld);
      const double sufficient =
          cfg.step_rule == StepRule::kSpectral ? 1e-4 * grad.cwiseProduct(diff).sum() : 0.0;
      if (next_value >= current + sufficient) {
        ok = true;
        break;
      }
      // Near the optimum objective changes drop below rounding; accept a step
      // within that band when it shrinks the duality gap.
      if (next_value >= current - kObjectiveNoise * std::max(1.0, std::abs(current))) {
        const Eigen::MatrixXd next_grad = inverse_of(next_factor, n) - k;
        if (box_gap(next, next_grad, cfg.lambda) < gap) {
          ok = true;
          break;
        }
      }
    }
    if (!ok || stationary) break;

    s.prev_w = s.w;
    s.prev_grad = grad;
    s.has_prev = true;
    s.w = std::move(next);
    current = next_value;
    factor = std::move(next_factor);
    grad = inverse_of(factor, n) - k;
    gap = box_gap(s.w, grad, cfg.lambda);
    ++accepted;
  }
  s.y = grad;
  return accepted;
}

}  // namespace

double auto_lambda(int p, int n) {
  if (p < 1 || n < 1) throw std::invalid_argument("auto lambda needs p >= 1 and n >= 1");
  return 2.0 * std::sqrt(std::log(static_cast<double>(p)) / n);
}

Eigen::VectorXd m_vector(int p) {
  Eigen::VectorXd m = Eigen::VectorXd::Constant(p + 1, 4.0 / 3.0);
  m[0] = 1.0;
  return m;
}

Eigen::MatrixXd project_box(const Eigen::MatrixXd& w, double lambda) {
  Eigen::MatrixXd out = w.cwiseMax(-lambda).cwiseMin(lambda);
  out.row(0).setZero();
  out.col(0).setZero();
  out.diagonal().setZero();
  return out;
}

Eigen::MatrixXd cut_term(const std::vector<CycleInequality>& cuts, const Eigen::VectorXd& alpha, int p) {
  Eigen::MatrixXd k = Eigen::MatrixXd::Zero(p + 1, p + 1);
  for (std::size_t i = 0; i < cuts.size(); ++i) {
    const double a = alpha[static_cast<Eigen::Index>(i)];
    if (a == 0.0) continue;
    for (const auto& c : cuts[i].coeff) {
      k(c.i, c.j) -= a * c.value;
      k(c.j, c.i) -= a * c.value;
    }
  }
  return k;
}

double dual_objective(const SolverState& state, const MeanVector& eta_hat) {
  const Eigen::MatrixXd k = cut_term(state.cuts, state.alpha, eta_hat.p());
  double ld = 0.0;
  if (!detail::logdet_pd(base_matrix(eta_hat) + state.w, ld)) return -std::numeric_limits<double>::infinity();
  return ld - state.w.cwiseProduct(k).sum();
}

double primal_objective(const SolverState& state, const MeanVector& eta_hat, double lambda) {
  const Eigen::MatrixXd m = base_matrix(eta_hat);
  const Eigen::MatrixXd k = cut_term(state.cuts, state.alpha, eta_hat.p());
  double ld = 0.0;
  if (!detail::logdet_pd(state.y + k, ld)) return -std::numeric_limits<double>::infinity();
  double penalty = 0.0;
  const Eigen::Index n = m.rows();
  for (Eigen::Index j = 1; j < n; ++j) {
    for (Eigen::Index i = 1; i < n; ++i) {
      if (i != j) penalty += std::abs(state.y(i, j));
    }
  }
  double cut_rhs = 0.0;
  for (std::size_t i = 0; i < state.cuts.size(); ++i) cut_rhs += state.alpha[static_cast<Eigen::Index>(i)] * state.cuts[i].rhs;
  return -state.y.cwiseProduct(m).sum() + ld + cut_rhs - lambda * penalty;
}

SolverState initial_state(const MeanVector& eta_hat, const std::vector<CycleInequality>& cuts) {
  const int p = eta_hat.p();
  SolverState s;
  s.m_vec = m_vector(p);
  s.w = Eigen::MatrixXd::Zero(p + 1, p + 1);
  s.alpha = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(cuts.size()));
  s.cuts = cuts;
  Eigen::LLT<Eigen::MatrixXd> factor;
  double ld = 0.0;
  if (!detail::logdet_pd(base_matrix(eta_hat), ld, &factor)) {
    throw NumericalError("R(eta_hat) + diag(m) is not positive definite; means are not realizable");
  }
  s.y = inverse_of(factor, p + 1);
  return s;
}

int w_step(SolverState& state, const MeanVector& eta_hat, const SolverConfig& cfg) {
  require_finite_nonneg(cfg.lambda, "lambda");
  const Eigen::MatrixXd m = base_matrix(eta_hat);
  const Eigen::MatrixXd k = cut_term(state.cuts, state.alpha, eta_hat.p());
  double gap = 0.0;
  const int accepted = run_w_steps(state, m, k, cfg, std::max(cfg.w_batch, 1), gap);
  state.diagnostics.w_steps += accepted;
  state.diagnostics.dual_gap = gap;
  return accepted;
}

void alpha_step(SolverState& state, const SolverConfig& cfg) {
  if (state.cuts.empty()) return;
  detail::AffineLogdetProblem problem;
  problem.base = state.y;
  problem.linear.resize(static_cast<Eigen::Index>(state.cuts.size()));
  for (std::size_t i = 0; i < state.cuts.size(); ++i) {
    detail::SymDirection d;
    for (const auto& c : state.cuts[i].coeff) d.push_back({c.i, c.j, -c.value});
    problem.directions.push_back(std::move(d));
    problem.linear[static_cast<Eigen::Index>(i)] = state.cuts[i].rhs;
  }
  problem.nonneg.assign(state.cuts.size(), 1);

  detail::AffineLogdetOptions options;
  options.grad_tol = cfg.alpha_grad_tol;
  options.max_iters = cfg.alpha_max_iters;
  options.backtrack = cfg.backtrack;
  options.max_halvings = cfg.max_halvings;
  const auto result = detail::maximize_affine_logdet(problem, state.alpha, options);
  if (!result.z.allFinite()) throw NumericalError("alpha update produced non-finite multipliers");
  state.alpha = result.z;
  state.has_prev = false;
}

SolverState inner_solve(const MeanVector& eta_hat, const std::vector<CycleInequality>& cuts,
                        const SolverConfig& cfg, std::optional<SolverState> warm) {
  require_finite_nonneg(cfg.lambda, "lambda");
  const int p = eta_hat.p();
  require_box_feasible(cuts, eta_hat, cfg.lambda);
  SolverState s = warm ? std::move(*warm) : initial_state(eta_hat, cuts);
  s.cuts = cuts;
  const auto old = s.alpha.size();
  s.alpha.conservativeResize(static_cast<Eigen::Index>(cuts.size()));
  for (Eigen::Index i = old; i < s.alpha.size(); ++i) s.alpha[i] = 0.0;
  s.alpha = s.alpha.cwiseMax(0.0);
  s.m_vec = m_vector(p);
  s.w = project_box(s.w, cfg.lambda);
  s.has_prev = false;
  s.step_count = 0;
  s.diagnostics = {};

  const Eigen::MatrixXd m = base_matrix(eta_hat);
  double previous = std::numeric_limits<double>::quiet_NaN();
  while (true) {
    const Eigen::MatrixXd k = cut_term(s.cuts, s.alpha, p);
    const int budget = std::min(std::max(cfg.w_batch, 1), cfg.max_inner_iters - s.diagnostics.w_steps);
    double gap = 0.0;
    const int accepted = run_w_steps(s, m, k, cfg, std::max(budget, 0), gap);
    s.diagnostics.w_steps += accepted;

    const Eigen::VectorXd alpha_before = s.alpha;
    alpha_step(s, cfg);
    const bool alpha_moved = (s.alpha - alpha_before).cwiseAbs().sum() > 0.0;

    // Recouple Y to the current W and alpha.
    const Eigen::MatrixXd z = m + s.w;
    const Eigen::MatrixXd k_new = cut_term(s.cuts, s.alpha, p);
    Eigen::LLT<Eigen::MatrixXd> factor(z);
    s.y = inverse_of(factor, p + 1) - k_new;
    s.diagnostics.dual_gap = box_gap(s.w, s.y, cfg.lambda);
    s.diagnostics.cut_residual = cut_residual(s, z);
    ++s.diagnostics.alternations;

    const double objective = primal_objective(s, eta_hat, cfg.lambda);
    s.diagnostics.objective_trace.push_back(objective);
    const double rel = std::abs(objective - previous) / std::max(1.0, std::abs(objective));
    previous = objective;

    const bool certified = s.diagnostics.dual_gap <= cfg.gap_tol && s.diagnostics.cut_residual <= cfg.alpha_grad_tol;
    if (certified && (s.cuts.empty() || rel < cfg.inner_tol)) {
      s.diagnostics.converged = true;
      break;
    }
    if (s.diagnostics.w_steps >= cfg.max_inner_iters || s.diagnostics.alternations >= cfg.max_inner_iters) break;
    if (accepted == 0 && !alpha_moved) break;
  }
  return s;
}

IsingModel recover_theta(const SolverState& state, double edge_tol) {
  const int p = static_cast<int>(state.y.rows()) - 1;
  IsingModel model(p);
  for (int v = 0; v < p; ++v) model.set_node(v, -state.y(0, v + 1));
  for (int u = 0; u < p; ++u) {
    for (int v = u + 1; v < p; ++v) {
      const double theta = -state.y(u + 1, v + 1);
      if (std::abs(theta) > edge_tol) model.set_edge(u, v, theta);
    }
  }
  return model;
}

MeanVector recover_eta(const SolverState& state, const MeanVector& eta_hat) {
  MeanVector eta = eta_hat;
  const int p = eta_hat.p();
  for (int u = 0; u < p; ++u) {
    for (int v = u + 1; v < p; ++v) eta.set_pair(u, v, eta_hat.pair(u, v) + state.w(u + 1, v + 1));
  }
  return eta;
}

FitResult fit(const MeanVector& eta_hat, const SolverConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  FitResult result;
  std::optional<SolverState> state;
  std::set<std::string> pool;
  const MomentMatrix eta_hat_matrix = moment_matrix(eta_hat);

  const int max_rounds = std::max(cfg.max_outer_rounds, 1);
  for (int round = 1; round <= max_rounds; ++round) {
    state = inner_solve(eta_hat, result.cuts, cfg, std::move(state));
    result.rounds = round;
    result.round_objectives.push_back(state->diagnostics.objective_trace.back());
    if (!cfg.separate_cuts) break;

    const MeanVector eta_star = recover_eta(*state, eta_hat);
    std::vector<SeparatedCut> fresh;
    for (auto& cut : separate(eta_star, cfg.min_violation, -1)) {
      if (pool.contains(cut.inequality.signature)) continue;
      if (!box_reachable(cut.inequality, eta_hat_matrix, cfg.lambda)) {
        ++result.skipped_cuts;
        continue;
      }
      fresh.push_back(std::move(cut));
      if (static_cast<int>(fresh.size()) >= cfg.max_cuts) break;
    }
    if (fresh.empty()) break;
    if (round == max_rounds) {
      result.round_limit_reached = true;
      break;
    }
    const MomentMatrix r = moment_matrix(eta_star);
    for (auto& cut : fresh) {
      pool.insert(cut.inequality.signature);
      result.cut_violations.push_back(violation(cut.inequality, r));
      result.cuts.push_back(std::move(cut.inequality));
    }
    result.cuts_per_round.push_back(static_cast<int>(fresh.size()));
  }

  result.state = std::move(*state);
  result.objective = result.round_objectives.back();
  result.model = recover_theta(result.state, cfg.edge_tol);
  result.fitted_means = recover_eta(result.state, eta_hat);
  result.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return result;
}

KktReport kkt_report(const SolverState& state, const MeanVector& eta_hat, const SolverConfig& cfg) {
  const int p = eta_hat.p();
  const Eigen::MatrixXd m = base_matrix(eta_hat);
  KktReport r;

  const Eigen::Index n = state.w.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const double w = state.w(i, j);
      const double off = (i == 0 || j == 0 || i == j) ? std::abs(w) : std::max(0.0, std::abs(w) - cfg.lambda);
      r.box_violation = std::max(r.box_violation, off);
    }
  }
  r.min_alpha = state.alpha.size() ? std::min(0.0, state.alpha.minCoeff()) : 0.0;

  const MeanVector eta_star = recover_eta(state, eta_hat);
  for (int v = 0; v < p; ++v) {
    r.node_moment_error = std::max(r.node_moment_error, std::abs(eta_star.node(v) - eta_hat.node(v)));
  }

  const Eigen::MatrixXd k = cut_term(state.cuts, state.alpha, p);
  Eigen::LLT<Eigen::MatrixXd> factor(m + state.w);
  r.coupling_residual = (inverse_of(factor, p + 1) - k - state.y).cwiseAbs().maxCoeff();

  const IsingModel theta = recover_theta(state, cfg.edge_tol);
  for (const auto& [e, value] : theta.edges()) {
    r.active_edge_slack = std::max(r.active_edge_slack, cfg.lambda - std::abs(state.w(e.u + 1, e.v + 1)));
  }

  const MomentMatrix fitted = moment_matrix(eta_star);
  for (std::size_t i = 0; i < state.cuts.size(); ++i) {
    const double v = violation(state.cuts[i], fitted);
    r.cut_complementarity = std::max(r.cut_complementarity, state.alpha[static_cast<Eigen::Index>(i)] * std::abs(v));
    r.max_cut_violation = std::max(r.max_cut_violation, v);
  }
  return r;
}

SurrogateResult surrogate_inference(const IsingModel& model, const std::vector<CycleInequality>& cuts,
                                    const SolverConfig& cfg) {
  const int p = model.p();
  const Eigen::Index n = p + 1;
  detail::AffineLogdetProblem problem;
  problem.base = -param_matrix(model);
  const Eigen::VectorXd m = m_vector(p);
  problem.linear.resize(n + static_cast<Eigen::Index>(cuts.size()));
  for (Eigen::Index i = 0; i < n; ++i) {
    problem.directions.push_back({{static_cast<int>(i), static_cast<int>(i), -1.0}});
    problem.linear[i] = m[i];
    problem.nonneg.push_back(0);
  }
  for (std::size_t k = 0; k < cuts.size(); ++k) {
    detail::SymDirection d;
    for (const auto& c : cuts[k].coeff) d.push_back({c.i, c.j, -c.value});
    problem.directions.push_back(std::move(d));
    problem.linear[n + static_cast<Eigen::Index>(k)] = cuts[k].rhs;
    problem.nonneg.push_back(1);
  }

  // nu = -t 1 with t doubled until -R(theta) + t I is positive definite.
  Eigen::VectorXd z0 = Eigen::VectorXd::Zero(problem.linear.size());
  double t = 1.0;
  double ld = 0.0;
  for (int attempt = 0;; ++attempt) {
    if (detail::logdet_pd(problem.base + t * Eigen::MatrixXd::Identity(n, n), ld)) break;
    if (attempt > 200) throw NumericalError("no positive definite starting point for the surrogate dual");
    t *= 2.0;
  }
  z0.head(n).setConstant(-t);

  detail::AffineLogdetOptions options;
  options.grad_tol = 1e-11;
  options.max_iters = std::max(cfg.alpha_max_iters, 200);
  options.backtrack = cfg.backtrack;
  options.max_halvings = cfg.max_halvings;
  const auto res = detail::maximize_affine_logdet(problem, z0, options);
  if (res.diverged || !std::isfinite(res.value)) {
    throw NumericalError("surrogate log-partition dual is unbounded; the cut set leaves no interior");
  }

  SurrogateResult out;
  const double pd = static_cast<double>(p);
  out.log_partition = 0.5 * pd * std::log(std::numbers::e * std::numbers::pi / 2.0) - 0.5 * (pd + 1.0) - 0.5 * res.value;
  out.means = means_from_matrix(res.inverse);
  out.nu = res.z.head(n);
  out.alpha = res.z.tail(static_cast<Eigen::Index>(cuts.size()));
  out.converged = res.converged;
  return out;
}

double surrogate_logpartition(const IsingModel& model, const std::vector<CycleInequality>& cuts,
                              const SolverConfig& cfg) {
  return surrogate_inference(model, cuts, cfg).log_partition;
}

SurrogateRounds surrogate_cutting_plane(const IsingModel& model, const SolverConfig& cfg) {
  SurrogateRounds out;
  std::set<std::string> pool;
  const int max_rounds = std::max(cfg.max_outer_rounds, 1);
  for (int round = 1; round <= max_rounds; ++round) {
    const SurrogateResult res = surrogate_inference(model, out.cuts, cfg);
    out.log_partitions.push_back(res.log_partition);
    out.means = res.means;
    std::vector<CycleInequality> fresh;
    for (auto& cut : separate(res.means, cfg.min_violation, -1)) {
      if (pool.contains(cut.inequality.signature)) continue;
      fresh.push_back(std::move(cut.inequality));
      if (static_cast<int>(fresh.size()) >= cfg.max_cuts) break;
    }
    if (fresh.empty()) break;
    if (round == max_rounds) {
      out.round_limit_reached = true;
      break;
    }
    for (auto& c : fresh) {
      pool.insert(c.signature);
      out.cuts.push_back(std::move(c));
    }
  }
  return out;
}

double surrogate_loglik(const IsingModel& model, const MeanVector& eta_test,
                        const std::vector<CycleInequality>& cuts, const SolverConfig& cfg) {
  return inner_product(model, eta_test) - surrogate_logpartition(model, cuts, cfg);
}

}  // namespace isingcut
