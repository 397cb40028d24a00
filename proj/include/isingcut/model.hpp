#pragma once

#include <compare>
#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <vector>

#include <Eigen/Dense>

namespace isingcut {

/// Unordered node pair stored with u < v.
struct Edge {
  int u = 0;
  int v = 0;

  auto operator<=>(const Edge&) const = default;
};

/// Builds a normalized edge; throws std::invalid_argument if u == v.
Edge make_edge(int a, int b);

/// Number of unordered pairs over p nodes.
constexpr std::size_t num_pairs(int p) {
  return p < 2 ? 0 : static_cast<std::size_t>(p) * static_cast<std::size_t>(p - 1) / 2;
}

/// Position of pair (u, v), u < v, in the row-major upper-triangular order
/// (0,1), (0,2), ..., (0,p-1), (1,2), ...
std::size_t pair_index(int u, int v, int p);

/// Binary pairwise MRF over p variables taking values in {-1, +1}.
///
/// Edge couplings are stored sparsely; any pair absent from the map has a
/// coupling of exactly zero. Explicit zeros may be stored and are treated as
/// absent by edge_set().
class IsingModel {
 public:
  explicit IsingModel(int p);

  int p() const { return p_; }
  /// Length of the full parameter vector: p node fields plus all pairs.
  std::size_t dimension() const { return static_cast<std::size_t>(p_) + num_pairs(p_); }

  double node(int v) const;
  void set_node(int v, double value);
  std::span<const double> nodes() const { return node_params_; }

  double edge(int u, int v) const;
  void set_edge(int u, int v, double value);
  void erase_edge(int u, int v);
  const std::map<Edge, double>& edges() const { return edge_params_; }

 private:
  void check_node(int v) const;

  int p_;
  std::vector<double> node_params_;
  std::map<Edge, double> edge_params_;
};

/// First and second moments: node means and the means of all pairwise
/// products, the latter held densely in pair_index() order.
class MeanVector {
 public:
  explicit MeanVector(int p);

  int p() const { return p_; }

  double node(int v) const { return node_means_[static_cast<std::size_t>(v)]; }
  void set_node(int v, double value) { node_means_[static_cast<std::size_t>(v)] = value; }
  double pair(int u, int v) const;
  void set_pair(int u, int v, double value);

  std::span<const double> node_means() const { return node_means_; }
  std::span<const double> pair_means() const { return pair_means_; }
  std::span<double> node_means() { return node_means_; }
  std::span<double> pair_means() { return pair_means_; }

  /// Largest absolute coordinate-wise difference to another vector of the same p.
  double max_abs_diff(const MeanVector& other) const;

 private:
  int p_;
  std::vector<double> node_means_;
  std::vector<double> pair_means_;
};

/// Symmetric (p+1)x(p+1) matrix; index 0 is the suspension/bias position and
/// variable v sits at index v+1.
using MomentMatrix = Eigen::MatrixXd;

/// R(theta): node fields in row/column 0, couplings off the diagonal, zero diagonal.
MomentMatrix param_matrix(const IsingModel& model);

/// R(eta), laid out like param_matrix.
MomentMatrix moment_matrix(const MeanVector& eta);

/// Reads node fields and couplings back out of a parameter-layout matrix.
/// Couplings with |value| <= tol are left absent.
IsingModel model_from_matrix(const MomentMatrix& r, double tol = 0.0);

/// Reads node and pair means back out of a moment-layout matrix.
MeanVector means_from_matrix(const MomentMatrix& r);

/// Edge weights on the suspension graph in matrix indexing: vertex 0 is the
/// added suspension vertex, vertex v+1 is variable v. The graph is complete.
struct SuspensionWeights {
  int p = 0;
  Eigen::MatrixXd w;  // symmetric, diagonal unused

  int num_vertices() const { return p + 1; }
  double operator()(int a, int b) const { return w(a, b); }
};

/// Spoke (0, v+1) weight (eta_v + 1)/2 and internal (u+1, v+1) weight
/// (1 - eta_uv)/2, both clamped to [0, 1].
SuspensionWeights suspension_weights(const MeanVector& eta);

/// phi(x): node statistics x_v followed by pair statistics x_u x_v in
/// pair_index() order. Throws std::invalid_argument on entries outside {-1,+1}.
std::vector<double> sufficient_statistics(std::span<const std::int8_t> x);

/// <theta, phi(x)> for one configuration.
double energy(const IsingModel& model, std::span<const std::int8_t> x);

/// <theta, eta> over node and pair coordinates.
double inner_product(const IsingModel& model, const MeanVector& eta);

/// Pairs whose coupling magnitude exceeds tol, sorted.
std::vector<Edge> edge_set(const IsingModel& model, double tol = 1e-4);

/// Full parameter vector in sufficient_statistics() order.
Eigen::VectorXd parameter_vector(const IsingModel& model);

}  // namespace isingcut
