#pragma once

#include <string>
#include <vector>

#include "isingcut/model.hpp"

namespace isingcut {

/// One nonzero of a symmetric coefficient matrix, stored once with i < j.
struct CoeffEntry {
  int i = 0;
  int j = 0;
  double value = 0.0;
};

/// A cycle inequality over the suspension graph written as
/// tr(A R(eta)) >= rhs.
///
/// Vertices use matrix indexing: 0 is the suspension vertex, v+1 is variable
/// v. The cycle is stored rotated to start at its smallest vertex and
/// oriented so the second vertex is smaller than the last.
struct CycleInequality {
  int p = 0;
  std::vector<int> cycle;
  std::vector<Edge> odd_set;  // sorted, odd size, subset of the cycle edges
  std::vector<CoeffEntry> coeff;
  double rhs = 0.0;
  std::string signature;

  /// tr(A R) for a symmetric (p+1)x(p+1) matrix R.
  double apply(const MomentMatrix& r) const;
  /// A as a dense symmetric matrix.
  Eigen::MatrixXd dense() const;
  /// Cycle edges in cycle order, each normalized.
  std::vector<Edge> edges() const;
};

/// Substitutes the cut-polytope coordinates into the cycle inequality for the
/// given cycle and odd edge subset. Spoke edges (0, k) carry +1/2 on eta_k,
/// internal edges -1/2 on eta_uv; edges in odd_set flip sign. rhs = 1 - |C|/2.
///
/// Throws std::invalid_argument for fewer than 3 vertices, repeated or
/// out-of-range vertices, an even odd_set, or odd_set edges off the cycle.
CycleInequality cycle_to_matrix(const std::vector<int>& cycle, const std::vector<Edge>& odd_set, int p);

/// rhs - tr(A R(eta)); positive means violated.
double violation(const CycleInequality& ineq, const MomentMatrix& eta_matrix);

/// Left-hand side of the cut-polytope form sum_{C\F} w + sum_F (1 - w).
double cycle_weight(const CycleInequality& ineq, const SuspensionWeights& weights);

struct SeparatedCut {
  CycleInequality inequality;
  double path_length = 0.0;  // left-hand side under the weights used to find it
};

/// Odd-cycle separation by shortest paths on the doubled suspension graph.
///
/// For every root s the shortest path from s^0 to s^1 is projected back to a
/// closed walk; walks that are not simple cycles are dropped. Cycles with
/// length < 1 - min_violation are returned, deduplicated by signature, sorted
/// by (length, signature) and truncated to max_cuts.
std::vector<SeparatedCut> separate(const SuspensionWeights& weights, double min_violation = 1e-4,
                                   int max_cuts = 20);

/// Separation from mean parameters: builds the clamped weights, separates, and
/// keeps only cuts whose violation against eta itself exceeds min_violation.
std::vector<SeparatedCut> separate(const MeanVector& eta, double min_violation = 1e-4, int max_cuts = 20);

}  // namespace isingcut
