#pragma once

#include <optional>
#include <vector>

#include <Eigen/Dense>

#include "isingcut/model.hpp"
#include "isingcut/separation.hpp"

namespace isingcut {

/// Step-size schedule for the projected ascent on the box-constrained dual.
enum class StepRule {
  kSpectral,     // Barzilai-Borwein length, gamma0 on the first step
  kDiminishing,  // gamma0 / sqrt(t)
};

struct SolverConfig {
  double lambda = 0.1;
  double gamma0 = 0.5;
  StepRule step_rule = StepRule::kSpectral;
  double inner_tol = 1e-7;    // relative objective change between alternations
  double gap_tol = 1e-10;     // duality gap of the W subproblem
  int max_inner_iters = 20000; // cap on W steps and on alternations per inner solve
  int w_batch = 5;            // W steps per alpha update
  int max_outer_rounds = 10;
  bool separate_cuts = true;  // false gives the cut-free log-det fit
  double min_violation = 1e-4;
  int max_cuts = 20;
  double edge_tol = 1e-4;
  double alpha_grad_tol = 1e-6;
  int alpha_max_iters = 500;
  double backtrack = 0.5;
  int max_halvings = 30;
};

/// 2 sqrt(log p / n).
double auto_lambda(int p, int n);

struct SolverDiagnostics {
  std::vector<double> objective_trace;  // objective after each alternation
  int w_steps = 0;
  int alternations = 0;
  bool converged = false;
  double dual_gap = 0.0;
  double cut_residual = 0.0;  // worst complementarity residual over the cuts
};

/// Iterate of the block-coordinate method.
///
/// W lives in the box {W_0k = 0, W_kk = 0, |W_uv| <= lambda}; Y is the primal
/// matrix -R(theta) - diag(nu); alpha holds one multiplier per cut.
struct SolverState {
  Eigen::MatrixXd w;
  Eigen::MatrixXd y;
  Eigen::VectorXd alpha;
  std::vector<CycleInequality> cuts;
  Eigen::VectorXd m_vec;  // (1, 4/3, ..., 4/3)
  SolverDiagnostics diagnostics;

  // Spectral step memory and the diminishing-rule counter.
  Eigen::MatrixXd prev_w;
  Eigen::MatrixXd prev_grad;
  bool has_prev = false;
  int step_count = 0;
};

/// (1, 4/3, ..., 4/3) of length p+1.
Eigen::VectorXd m_vector(int p);

/// Projection onto the box: zero row/column 0 and the diagonal, clip the rest
/// to [-lambda, lambda].
Eigen::MatrixXd project_box(const Eigen::MatrixXd& w, double lambda);

/// -sum_i alpha_i A_i: the term the multipliers add to Y inside the log-det.
Eigen::MatrixXd cut_term(const std::vector<CycleInequality>& cuts, const Eigen::VectorXd& alpha, int p);

/// Dual objective for fixed alpha: logdet(W + R(eta_hat) + diag(m)) - tr(W K).
double dual_objective(const SolverState& state, const MeanVector& eta_hat);

/// Primal objective -tr(Y M) + logdet(Y + K) + alpha^T b - lambda sum |Y_uv|,
/// with M = R(eta_hat) + diag(m) and the sum over all non-bias off-diagonals.
double primal_objective(const SolverState& state, const MeanVector& eta_hat, double lambda);

/// Fresh feasible state: W = 0, alpha = 0, Y coupled to W.
SolverState initial_state(const MeanVector& eta_hat, const std::vector<CycleInequality>& cuts);

/// Up to cfg.w_batch projected ascent steps on W for fixed alpha (at least
/// one). Steps that break positive definiteness or decrease the dual
/// objective are halved; after max_halvings the current W is kept. Returns
/// the number of accepted steps.
int w_step(SolverState& state, const MeanVector& eta_hat, const SolverConfig& cfg);

/// Maximizes logdet(Y - sum alpha_i A_i) + alpha^T b over alpha >= 0 for the
/// current Y by projected Newton steps with backtracking.
void alpha_step(SolverState& state, const SolverConfig& cfg);

/// Alternates W and alpha updates until the relative objective change drops
/// below inner_tol with the W duality gap and the cut residuals converged,
/// or the W-step budget is spent. Starts from warm when given, with alpha
/// padded by zeros for cuts it does not yet cover. Throws NumericalError
/// when a cut cannot be met by any W in the box.
SolverState inner_solve(const MeanVector& eta_hat, const std::vector<CycleInequality>& cuts,
                        const SolverConfig& cfg, std::optional<SolverState> warm = std::nullopt);

/// theta_v = -Y(0, v+1), theta_uv = -Y(u+1, v+1); |theta_uv| <= edge_tol -> 0.
IsingModel recover_theta(const SolverState& state, double edge_tol);

/// eta*_v = eta_hat_v, eta*_uv = eta_hat_uv + W(u+1, v+1).
MeanVector recover_eta(const SolverState& state, const MeanVector& eta_hat);

struct FitResult {
  IsingModel model{1};
  MeanVector fitted_means{1};
  std::vector<CycleInequality> cuts;
  std::vector<double> cut_violations;  // violation when each cut was added
  std::vector<int> cuts_per_round;
  std::vector<double> round_objectives;
  int rounds = 0;
  double objective = 0.0;
  bool round_limit_reached = false;
  int skipped_cuts = 0;  // violated cuts no W in the box can satisfy, left out
  double wall_time = 0.0;
  SolverState state;
};

/// Cutting-plane outer loop around inner_solve, warm-starting every round.
/// With separate_cuts off this is the plain log-det fit. Separated cuts that
/// no W in the box can satisfy are skipped and counted; this cannot happen
/// when eta_hat itself satisfies every cycle inequality, as data means do.
FitResult fit(const MeanVector& eta_hat, const SolverConfig& cfg);

struct KktReport {
  double box_violation = 0.0;        // distance of W from the box
  double min_alpha = 0.0;            // most negative multiplier (0 if none)
  double node_moment_error = 0.0;    // max |eta*_v - eta_hat_v|
  double coupling_residual = 0.0;    // ||(W+M)^{-1} + sum alpha A - Y||_inf
  double active_edge_slack = 0.0;    // max lambda - |W_uv| over recovered edges
  double cut_complementarity = 0.0;  // max alpha_i |violation_i|
  double max_cut_violation = 0.0;    // max violation of pooled cuts at eta*
};

KktReport kkt_report(const SolverState& state, const MeanVector& eta_hat, const SolverConfig& cfg);

struct SurrogateResult {
  double log_partition = 0.0;
  MeanVector means{1};  // off-diagonal of the optimal inverse
  Eigen::VectorXd nu;
  Eigen::VectorXd alpha;
  bool converged = false;
};

/// Log-det relaxation of the log-partition function under the given cuts,
/// through its dual in (nu, alpha >= 0). Throws NumericalError when the dual
/// maximum is not attained.
SurrogateResult surrogate_inference(const IsingModel& model, const std::vector<CycleInequality>& cuts,
                                    const SolverConfig& cfg = {});

double surrogate_logpartition(const IsingModel& model, const std::vector<CycleInequality>& cuts,
                              const SolverConfig& cfg = {});

struct SurrogateRounds {
  std::vector<double> log_partitions;  // B(theta) after each round, starting with no cuts
  std::vector<CycleInequality> cuts;
  MeanVector means{1};                 // surrogate means of the last round
  bool round_limit_reached = false;
};

/// Cutting-plane tightening of the relaxation for a fixed model: infer,
/// separate on the surrogate means, add the cuts, repeat until nothing is
/// violated or cfg.max_outer_rounds rounds have run.
SurrogateRounds surrogate_cutting_plane(const IsingModel& model, const SolverConfig& cfg = {});

/// <theta, eta_test> - B(theta).
double surrogate_loglik(const IsingModel& model, const MeanVector& eta_test,
                        const std::vector<CycleInequality>& cuts, const SolverConfig& cfg = {});

}  // namespace isingcut
