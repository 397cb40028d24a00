#include <gtest/gtest.h>

#include <cmath>
#include <vector>

#include "isingcut/exact.hpp"
#include "isingcut/model.hpp"
#include "isingcut/synthetic.hpp"

using namespace isingcut;

TEST(ParamMatrix, ZeroModelGivesZeroMatrix) {
  const IsingModel m(3);
  EXPECT_TRUE(param_matrix(m).isZero(0.0));
  EXPECT_EQ(param_matrix(m).rows(), 4);
}

TEST(ParamMatrix, DirectPlacement) {
  IsingModel m(2);
  m.set_node(0, 0.3);
  m.set_node(1, -0.1);
  m.set_edge(0, 1, 0.5);
  Eigen::Matrix3d expected;
  expected << 0, 0.3, -0.1, 0.3, 0, 0.5, -0.1, 0.5, 0;
  EXPECT_TRUE(param_matrix(m).isApprox(expected, 0.0));
}

TEST(ParamMatrix, RoundTrip) {
  IsingModel m(4);
  m.set_node(2, 0.7);
  m.set_edge(0, 3, -1.25);
  m.set_edge(1, 2, 0.125);
  const IsingModel back = model_from_matrix(param_matrix(m));
  EXPECT_EQ(back.edges(), m.edges());
  for (int v = 0; v < 4; ++v) EXPECT_EQ(back.node(v), m.node(v));
}

TEST(ParamMatrix, SymmetricZeroDiagonal) {
  IsingModel m(5);
  for (int v = 0; v < 5; ++v) m.set_node(v, 0.1 * v);
  m.set_edge(1, 4, 0.3);
  const auto r = param_matrix(m);
  EXPECT_EQ(r, r.transpose());
  EXPECT_TRUE(r.diagonal().isZero(0.0));
}

TEST(MomentMatrix, ZeroMeans) { EXPECT_TRUE(moment_matrix(MeanVector(3)).isZero(0.0)); }

TEST(MomentMatrix, IndependentCoinsShrinkToZero) {
  const IsingModel m(6);
  SamplerConfig sc;
  sc.n = 20000;
  sc.seed = 3;
  const auto eta = empirical_means(gibbs_sample(m, sc));
  EXPECT_LT(moment_matrix(eta).cwiseAbs().maxCoeff(), 0.05);
}

TEST(MomentMatrix, SecondMomentMatrixIsPsdForData) {
  IsingModel m(7);
  m.set_edge(0, 1, 1.5);
  m.set_edge(1, 2, -2.0);
  m.set_node(3, 2.0);
  SamplerConfig sc;
  sc.n = 37;
  sc.seed = 11;
  const auto eta = empirical_means(gibbs_sample(m, sc));
  Eigen::MatrixXd m1 = moment_matrix(eta);
  m1.diagonal().setOnes();
  EXPECT_GE(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(m1).eigenvalues().minCoeff(), -1e-12);
}

TEST(SuspensionWeights, Endpoints) {
  MeanVector eta(2);
  eta.set_node(0, 1.0);
  eta.set_node(1, -1.0);
  eta.set_pair(0, 1, 1.0);
  auto w = suspension_weights(eta);
  EXPECT_EQ(w(0, 1), 1.0);
  EXPECT_EQ(w(0, 2), 0.0);
  EXPECT_EQ(w(1, 2), 0.0);
  eta.set_pair(0, 1, -1.0);
  EXPECT_EQ(suspension_weights(eta)(1, 2), 1.0);
}

TEST(SuspensionWeights, ClampsOvershoot) {
  MeanVector eta(2);
  eta.set_pair(0, 1, 1.0003);
  eta.set_node(0, -1.2);
  const auto w = suspension_weights(eta);
  EXPECT_EQ(w(1, 2), 0.0);
  EXPECT_EQ(w(0, 1), 0.0);
}

TEST(SuspensionWeights, BijectionOnTheBox) {
  MeanVector eta(3);
  eta.set_node(0, 0.3);
  eta.set_node(2, -0.77);
  eta.set_pair(0, 2, 0.41);
  eta.set_pair(1, 2, -0.9);
  const auto w = suspension_weights(eta);
  for (int v = 0; v < 3; ++v) EXPECT_NEAR(2.0 * w(0, v + 1) - 1.0, eta.node(v), 1e-15);
  for (int u = 0; u < 3; ++u) {
    for (int v = u + 1; v < 3; ++v) EXPECT_NEAR(1.0 - 2.0 * w(u + 1, v + 1), eta.pair(u, v), 1e-15);
  }
}

TEST(SufficientStatistics, AllOnes) {
  const std::vector<std::int8_t> x{1, 1, 1};
  const auto s = sufficient_statistics(x);
  ASSERT_EQ(s.size(), 6u);
  for (const double v : s) EXPECT_EQ(v, 1.0);
}

TEST(SufficientStatistics, Mixed) {
  const std::vector<std::int8_t> x{1, -1};
  EXPECT_EQ(sufficient_statistics(x), (std::vector<double>{1, -1, -1}));
}

TEST(SufficientStatistics, RejectsNonSpins) {
  const std::vector<std::int8_t> x{1, 0};
  EXPECT_THROW(sufficient_statistics(x), std::invalid_argument);
}

TEST(SufficientStatistics, EnumerationMatchesLogPartition) {
  IsingModel m(4);
  m.set_node(0, 0.4);
  m.set_node(3, -0.2);
  m.set_edge(0, 1, 0.6);
  m.set_edge(2, 3, -0.9);
  const Eigen::VectorXd theta = parameter_vector(m);
  double z = 0.0;
  for (int s = 0; s < 16; ++s) {
    std::vector<std::int8_t> x(4);
    for (int v = 0; v < 4; ++v) x[static_cast<std::size_t>(v)] = (s >> v & 1) ? 1 : -1;
    const auto phi = sufficient_statistics(x);
    const double dot = Eigen::Map<const Eigen::VectorXd>(phi.data(), static_cast<Eigen::Index>(phi.size())).dot(theta);
    EXPECT_NEAR(dot, energy(m, x), 1e-14);
    z += std::exp(dot);
  }
  EXPECT_NEAR(std::log(z), exact_log_partition(m), 1e-12);
}

TEST(SufficientStatistics, Dimension) {
  const std::vector<std::int8_t> x(7, -1);
  EXPECT_EQ(sufficient_statistics(x).size(), IsingModel(7).dimension());
}

TEST(EdgeSet, Thresholding) {
  IsingModel m(3);
  m.set_edge(0, 1, 0.0);
  m.set_edge(0, 2, 1e-6);
  m.set_edge(1, 2, 0.5);
  EXPECT_EQ(edge_set(m, 0.0), (std::vector<Edge>{{0, 2}, {1, 2}}));
  EXPECT_EQ(edge_set(m, 1e-4), (std::vector<Edge>{{1, 2}}));
}

TEST(IsingModel, RejectsBadInput) {
  IsingModel m(3);
  EXPECT_THROW(m.set_edge(1, 1, 0.2), std::invalid_argument);
  EXPECT_THROW(m.set_edge(0, 3, 0.2), std::invalid_argument);
  EXPECT_THROW(m.set_node(0, std::nan("")), std::invalid_argument);
  EXPECT_THROW(IsingModel(0), std::invalid_argument);
}

TEST(PairIndex, RowMajorUpperTriangle) {
  EXPECT_EQ(pair_index(0, 1, 4), 0u);
  EXPECT_EQ(pair_index(0, 3, 4), 2u);
  EXPECT_EQ(pair_index(1, 2, 4), 3u);
  EXPECT_EQ(pair_index(2, 3, 4), 5u);
  EXPECT_EQ(num_pairs(4), 6u);
}
