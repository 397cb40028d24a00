#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "isingcut/errors.hpp"
#include "isingcut/exact.hpp"
#include "isingcut/separation.hpp"
#include "isingcut/solver.hpp"
#include "isingcut/synthetic.hpp"
#include "oracles.hpp"

using namespace isingcut;
using isingcut::testing::gram_means;
using isingcut::testing::random_model;

namespace {

MeanVector sampled_means(const IsingModel& m, int n, std::uint64_t seed) {
  SamplerConfig sc;
  sc.n = n;
  sc.seed = seed;
  return empirical_means(gibbs_sample(m, sc));
}

void expect_kkt(const FitResult& r, const MeanVector& eta_hat, const SolverConfig& cfg) {
  const KktReport k = kkt_report(r.state, eta_hat, cfg);
  EXPECT_EQ(k.box_violation, 0.0);
  EXPECT_EQ(k.min_alpha, 0.0);
  EXPECT_LE(k.node_moment_error, 1e-10);
  EXPECT_LE(k.coupling_residual, 1e-6);
  EXPECT_LE(k.active_edge_slack, 1e-4);
}

// Cut violated at the cut-free optimum, chosen from Gram-matrix means.
struct CutInstance {
  MeanVector eta{1};
  double lambda = 0.0;
  CycleInequality cut;
};

std::vector<CutInstance> active_cut_instances(int count) {
  std::vector<CutInstance> out;
  for (std::uint64_t seed = 1; static_cast<int>(out.size()) < count && seed < 500; ++seed) {
    const int p = 4 + static_cast<int>(seed % 4);
    CutInstance inst{gram_means(p, 3, 1.0, seed), 0.2, {}};
    SolverConfig cfg;
    cfg.lambda = inst.lambda;
    cfg.separate_cuts = false;
    const FitResult free_fit = fit(inst.eta, cfg);
    // Keep the first cut that some W in the box satisfies.
    for (const auto& cut : separate(free_fit.fitted_means, 1e-3, -1)) {
      try {
        isingcut::testing::projected_gradient_oracle(inst.eta, {cut.inequality}, inst.lambda, 10);
      } catch (const std::runtime_error&) {
        continue;
      }
      inst.cut = cut.inequality;
      out.push_back(std::move(inst));
      break;
    }
  }
  return out;
}

}  // namespace

TEST(WStep, ZeroLambdaKeepsWZero) {
  const auto eta = gram_means(5, 4, 0.5, 2);
  SolverConfig cfg;
  cfg.lambda = 0.0;
  SolverState s = initial_state(eta, {});
  for (int i = 0; i < 5; ++i) w_step(s, eta, cfg);
  EXPECT_TRUE(s.w.isZero(0.0));
}

TEST(WStep, ProjectionContract) {
  const Eigen::MatrixXd raw = Eigen::MatrixXd::Random(6, 6) * 3.0;
  const Eigen::MatrixXd w = project_box(raw + raw.transpose(), 0.2);
  EXPECT_TRUE(w.row(0).isZero(0.0));
  EXPECT_TRUE(w.col(0).isZero(0.0));
  EXPECT_TRUE(w.diagonal().isZero(0.0));
  EXPECT_LE(w.cwiseAbs().maxCoeff(), 0.2);
  EXPECT_EQ(w, w.transpose());
}

TEST(WStep, DualObjectiveMonotone) {
  const auto m = random_model(6, 1.0, 1.0, 0.6, 4);
  const auto eta = sampled_means(m, 300, 5);
  for (const StepRule rule : {StepRule::kSpectral, StepRule::kDiminishing}) {
    SolverConfig cfg;
    cfg.lambda = 0.05;
    cfg.w_batch = 1;
    cfg.step_rule = rule;
    SolverState s = initial_state(eta, {});
    double prev = dual_objective(s, eta);
    for (int i = 0; i < 200; ++i) {
      if (w_step(s, eta, cfg) == 0) break;
      const double cur = dual_objective(s, eta);
      EXPECT_GE(cur, prev - 1e-12);
      prev = cur;
    }
  }
}

TEST(AlphaStep, NoCutsIsNoop) {
  const auto eta = gram_means(4, 3, 0.5, 1);
  SolverState s = initial_state(eta, {});
  alpha_step(s, SolverConfig{});
  EXPECT_EQ(s.alpha.size(), 0);
}

TEST(AlphaStep, SlackCutGetsZeroMultiplier) {
  const auto eta = gram_means(4, 3, 0.3, 1);
  // Five-cycle through the suspension vertex; rhs -3/2 is far below its value.
  const auto cut = cycle_to_matrix({0, 1, 2, 3, 4}, {{0, 1}}, 4);
  ASSERT_LT(violation(cut, moment_matrix(eta)), -0.5);
  SolverState s = initial_state(eta, {cut});
  s.alpha[0] = 0.5;
  alpha_step(s, SolverConfig{});
  EXPECT_EQ(s.alpha[0], 0.0);
}

TEST(AlphaStep, KktAtConvergence) {
  for (const auto& inst : active_cut_instances(3)) {
    SolverConfig cfg;
    cfg.lambda = inst.lambda;
    const SolverState s = inner_solve(inst.eta, {inst.cut}, cfg);
    ASSERT_TRUE(s.diagnostics.converged);
    EXPECT_GT(s.alpha[0], 0.0);
    const Eigen::MatrixXd z = (s.y + cut_term(s.cuts, s.alpha, inst.eta.p())).inverse();
    const double residual = violation(inst.cut, z);
    EXPECT_LE(std::abs(s.alpha[0] * residual), 1e-5);
    EXPECT_LE(residual, 1e-5);
  }
}

TEST(InnerSolve, IndependentCoins) {
  const auto eta = sampled_means(IsingModel(6), 5000, 3);
  SolverConfig cfg;
  cfg.lambda = auto_lambda(6, 5000);
  const SolverState s = inner_solve(eta, {}, cfg);
  ASSERT_TRUE(s.diagnostics.converged);
  const IsingModel theta = recover_theta(s, 0.0);
  for (const auto& [e, t] : theta.edges()) EXPECT_LE(std::abs(t), 0.05);
  EXPECT_TRUE(edge_set(theta, cfg.edge_tol).empty());
}

TEST(InnerSolve, MatchesProjectedGradientOracleWithoutCuts) {
  for (int t = 0; t < 4; ++t) {
    const int p = 3 + t;
    const auto eta = sampled_means(random_model(p, 1.0, 1.0, 0.7, 50 + t), 400, 60 + t);
    SolverConfig cfg;
    cfg.lambda = 0.05 + 0.03 * t;
    const SolverState s = inner_solve(eta, {}, cfg);
    const auto oracle = isingcut::testing::projected_gradient_oracle(eta, {}, cfg.lambda);
    const double ours = s.diagnostics.objective_trace.back();
    EXPECT_LE(std::abs(ours - oracle.objective) / std::abs(oracle.objective), 1e-5) << "trial " << t;
  }
}

TEST(InnerSolve, MatchesProjectedGradientOracleWithOneCut) {
  const auto instances = active_cut_instances(3);
  ASSERT_EQ(instances.size(), 3u);
  for (const auto& inst : instances) {
    SolverConfig cfg;
    cfg.lambda = inst.lambda;
    const SolverState s = inner_solve(inst.eta, {inst.cut}, cfg);
    const auto oracle = isingcut::testing::projected_gradient_oracle(inst.eta, {inst.cut}, cfg.lambda);
    const double ours = s.diagnostics.objective_trace.back();
    EXPECT_LE(std::abs(ours - oracle.objective) / std::abs(oracle.objective), 1e-5);
  }
}

TEST(InnerSolve, NonBindingCutChangesNothing) {
  const auto eta = sampled_means(random_model(5, 1.0, 1.0, 0.7, 8), 500, 9);
  SolverConfig cfg;
  cfg.lambda = 0.08;
  const auto cut = cycle_to_matrix({0, 1, 2, 3, 4}, {{0, 1}}, 5);
  const SolverState plain = inner_solve(eta, {}, cfg);
  const SolverState with_cut = inner_solve(eta, {cut}, cfg);
  EXPECT_EQ(with_cut.alpha[0], 0.0);
  EXPECT_LE((plain.y - with_cut.y).cwiseAbs().maxCoeff(), 1e-8);
}

TEST(InnerSolve, RejectsUnrealizableMeans) {
  MeanVector eta(3);
  eta.set_pair(0, 1, 1.0);
  eta.set_pair(1, 2, 1.0);
  eta.set_pair(0, 2, -1.0);
  eta.set_node(0, 0.9);
  EXPECT_THROW(inner_solve(eta, {}, SolverConfig{}), NumericalError);
}

TEST(RecoverTheta, ZeroOffDiagonal) {
  SolverState s;
  s.y = Eigen::MatrixXd::Identity(4, 4) * 2.0;
  const IsingModel m = recover_theta(s, 0.0);
  EXPECT_TRUE(m.edges().empty());
  for (const double t : m.nodes()) EXPECT_EQ(t, 0.0);
}

TEST(RecoverTheta, SignRoundTripAndSlackness) {
  const auto eta = sampled_means(random_model(6, 1.0, 1.0, 0.6, 12), 400, 13);
  SolverConfig cfg;
  cfg.lambda = 0.06;
  const SolverState s = inner_solve(eta, {}, cfg);
  const IsingModel raw = recover_theta(s, 0.0);
  Eigen::MatrixXd off = s.y;
  off.diagonal().setZero();
  EXPECT_EQ(param_matrix(raw), -off);
  const IsingModel thr = recover_theta(s, cfg.edge_tol);
  for (int u = 0; u < 6; ++u) {
    for (int v = u + 1; v < 6; ++v) {
      if (std::abs(s.w(u + 1, v + 1)) < cfg.lambda - 1e-4) EXPECT_EQ(thr.edge(u, v), 0.0);
    }
  }
}

TEST(RecoverEta, ZeroLambdaReturnsInput) {
  const auto eta = sampled_means(random_model(5, 1.0, 1.0, 0.6, 14), 300, 15);
  SolverConfig cfg;
  cfg.lambda = 0.0;
  const FitResult r = fit(eta, cfg);
  EXPECT_EQ(r.fitted_means.max_abs_diff(eta), 0.0);
}

TEST(RecoverEta, BoxBound) {
  const auto eta = sampled_means(random_model(6, 1.0, 1.0, 0.6, 16), 300, 17);
  SolverConfig cfg;
  cfg.lambda = 0.1;
  const FitResult r = fit(eta, cfg);
  for (std::size_t k = 0; k < eta.pair_means().size(); ++k) {
    EXPECT_LE(std::abs(r.fitted_means.pair_means()[k] - eta.pair_means()[k]), cfg.lambda);
  }
  for (int v = 0; v < 6; ++v) EXPECT_EQ(r.fitted_means.node(v), eta.node(v));
}

TEST(Fit, SingleNode) {
  MeanVector eta(1);
  eta.set_node(0, 0.4);
  const FitResult r = fit(eta, SolverConfig{});
  EXPECT_TRUE(r.model.edges().empty());
  EXPECT_EQ(r.fitted_means.node(0), 0.4);
  // Single Gaussian coordinate: theta solves the bias/variance stationarity.
  EXPECT_TRUE(std::isfinite(r.model.node(0)));
}

TEST(Fit, HugeLambdaGivesIndependentModel) {
  const auto eta = sampled_means(random_model(6, 1.0, 2.0, 0.8, 18), 300, 19);
  SolverConfig cfg;
  cfg.lambda = 2.5;
  const FitResult r = fit(eta, cfg);
  EXPECT_TRUE(edge_set(r.model, cfg.edge_tol).empty());
}

TEST(Fit, DisabledSeparationEqualsCutFreeInnerSolve) {
  const auto eta = sampled_means(random_model(6, 1.0, 1.0, 0.6, 20), 300, 21);
  SolverConfig cfg;
  cfg.lambda = 0.07;
  cfg.separate_cuts = false;
  const FitResult r = fit(eta, cfg);
  const SolverState s = inner_solve(eta, {}, cfg);
  EXPECT_EQ(r.state.y, s.y);
  EXPECT_TRUE(r.cuts.empty());
}

TEST(Fit, GramMeansTriggerCutsAndObjectiveRises) {
  int with_cuts = 0;
  for (std::uint64_t seed = 1; seed <= 30; ++seed) {
    const auto eta = gram_means(4 + static_cast<int>(seed % 4), 3, 1.0, seed);
    SolverConfig cfg;
    cfg.lambda = 0.2;
    cfg.max_inner_iters = 100000;
    FitResult r;
    try {
      r = fit(eta, cfg);
    } catch (const NumericalError&) {
      continue;  // no feasible W for the pooled cuts
    }
    if (r.cuts.empty()) continue;
    ++with_cuts;
    EXPECT_TRUE(r.state.diagnostics.converged) << "seed " << seed;
    for (std::size_t k = 1; k < r.round_objectives.size(); ++k) {
      EXPECT_GE(r.round_objectives[k], r.round_objectives[k - 1] - 1e-8);
    }
    expect_kkt(r, eta, cfg);
    const KktReport k = kkt_report(r.state, eta, cfg);
    EXPECT_LE(k.cut_complementarity, 1e-5);
    EXPECT_LE(k.max_cut_violation, 1e-5);
  }
  EXPECT_GT(with_cuts, 0);
}

TEST(Fit, CutOutsideTheBoxIsReported) {
  const auto eta = gram_means(6, 3, 0.95, 1);
  SolverConfig cfg;
  cfg.lambda = 0.03;
  const auto cuts = separate(eta, 1e-3, 1);
  ASSERT_FALSE(cuts.empty());
  EXPECT_THROW(inner_solve(eta, {cuts[0].inequality}, cfg), NumericalError);
}

TEST(Fit, KktOnSampledData) {
  for (int t = 0; t < 4; ++t) {
    const auto eta = sampled_means(random_model(8, 1.0, 1.0, 0.5, 70 + t), 500, 80 + t);
    SolverConfig cfg;
    cfg.lambda = auto_lambda(8, 500);
    expect_kkt(fit(eta, cfg), eta, cfg);
  }
}

TEST(Surrogate, ZeroModel) {
  for (int p = 1; p <= 10; ++p) {
    const double b = surrogate_logpartition(IsingModel(p), {});
    EXPECT_NEAR(b, 0.5 * p * std::log(2.0 * std::numbers::pi * std::numbers::e / 3.0), 1e-9);
    EXPECT_GE(b, p * std::numbers::ln2);
  }
}

TEST(Surrogate, UpperBoundAndCutsTighten) {
  for (int t = 0; t < 10; ++t) {
    const int p = 5 + t % 6;
    const auto m = random_model(p, 1.0, 1.0, 0.6, 90 + t);
    const auto rounds = surrogate_cutting_plane(m);
    const double exact = exact_log_partition(m);
    for (std::size_t k = 0; k < rounds.log_partitions.size(); ++k) {
      EXPECT_GE(rounds.log_partitions[k], exact - 1e-8);
      if (k) EXPECT_LE(rounds.log_partitions[k], rounds.log_partitions[k - 1] + 1e-8);
    }
  }
}

TEST(Surrogate, FrustratedModelsGetCutsAndBetterMarginals) {
  int trials = 0;
  int improved = 0;
  for (int t = 0; t < 30 && trials < 10; ++t) {
    const auto m = random_model(6, 0.3, 3.0, 1.0, 300 + t);
    SolverConfig cfg;
    cfg.max_outer_rounds = 2;
    const auto first = surrogate_inference(m, {}, cfg);
    const auto cuts = separate(first.means, cfg.min_violation, cfg.max_cuts);
    if (cuts.empty()) continue;
    std::vector<CycleInequality> pool;
    for (const auto& c : cuts) pool.push_back(c.inequality);
    const auto second = surrogate_inference(m, pool, cfg);
    EXPECT_LE(second.log_partition, first.log_partition + 1e-8);
    const auto exact = exact_mean_parameters(m);
    ++trials;
    if (second.means.max_abs_diff(exact) <= first.means.max_abs_diff(exact)) ++improved;
  }
  ASSERT_GT(trials, 0);
  EXPECT_GT(2 * improved, trials);
}

TEST(Surrogate, Convex) {
  const auto a = random_model(5, 1.0, 1.0, 0.7, 31);
  const auto b = random_model(5, 1.0, 1.0, 0.7, 32);
  for (const double t : {0.25, 0.5, 0.8}) {
    IsingModel mix(5);
    const Eigen::VectorXd v = t * parameter_vector(a) + (1 - t) * parameter_vector(b);
    for (int k = 0; k < 5; ++k) mix.set_node(k, v[k]);
    for (int u = 0; u < 5; ++u) {
      for (int w = u + 1; w < 5; ++w) mix.set_edge(u, w, v[static_cast<Eigen::Index>(5 + pair_index(u, w, 5))]);
    }
    EXPECT_LE(surrogate_logpartition(mix, {}),
              t * surrogate_logpartition(a, {}) + (1 - t) * surrogate_logpartition(b, {}) + 1e-9);
  }
}

TEST(SurrogateLoglik, ZeroModel) {
  const auto eta = gram_means(4, 3, 0.5, 3);
  EXPECT_NEAR(surrogate_loglik(IsingModel(4), eta, {}), -surrogate_logpartition(IsingModel(4), {}), 1e-12);
}

TEST(SurrogateLoglik, BelowExactLikelihood) {
  for (int t = 0; t < 5; ++t) {
    const auto m = random_model(7, 1.0, 1.0, 0.5, 40 + t);
    SamplerConfig sc;
    sc.n = 200;
    sc.seed = 41 + t;
    const auto data = gibbs_sample(m, sc);
    EXPECT_LE(surrogate_loglik(m, empirical_means(data), {}), exact_avg_loglik(m, data) + 1e-8);
  }
}

TEST(SurrogateLoglik, FittedModelIsLocallyOptimalAtZeroLambda) {
  const auto eta = sampled_means(random_model(5, 1.0, 1.0, 0.8, 44), 2000, 45);
  SolverConfig cfg;
  cfg.lambda = 0.0;
  cfg.separate_cuts = false;
  const FitResult r = fit(eta, cfg);
  const double best = surrogate_loglik(r.model, eta, {});
  for (const double scale : {0.9, 1.1}) {
    IsingModel other(5);
    for (int v = 0; v < 5; ++v) other.set_node(v, scale * r.model.node(v));
    for (const auto& [e, t] : r.model.edges()) other.set_edge(e.u, e.v, scale * t);
    EXPECT_LT(surrogate_loglik(other, eta, {}), best);
  }
  // Single-coordinate perturbations as well.
  for (const auto& [e, t] : r.model.edges()) {
    IsingModel other = r.model;
    other.set_edge(e.u, e.v, 1.1 * t);
    EXPECT_LE(surrogate_loglik(other, eta, {}), best + 1e-10);
  }
}
