#include "isingcut/separation.hpp"

#include <algorithm>
#include <limits>
#include <map>
#include <set>
#include <sstream>
#include <tuple>
#include <stdexcept>

namespace isingcut {
namespace {

std::vector<int> canonical_cycle(std::vector<int> cycle) {
  const auto first = std::min_element(cycle.begin(), cycle.end());
  std::rotate(cycle.begin(), first, cycle.end());
  if (cycle.size() > 2 && cycle[1] > cycle.back()) std::reverse(cycle.begin() + 1, cycle.end());
  return cycle;
}

std::vector<Edge> cycle_edges(const std::vector<int>& cycle) {
  std::vector<Edge> edges;
  edges.reserve(cycle.size());
  for (std::size_t k = 0; k < cycle.size(); ++k) {
    edges.push_back(make_edge(cycle[k], cycle[(k + 1) % cycle.size()]));
  }
  return edges;
}

std::string make_signature(std::vector<Edge> edges, const std::vector<Edge>& odd_set) {
  std::sort(edges.begin(), edges.end());
  std::ostringstream out;
  for (std::size_t k = 0; k < edges.size(); ++k) out << (k ? "," : "") << edges[k].u << "-" << edges[k].v;
  out << "|";
  for (std::size_t k = 0; k < odd_set.size(); ++k) out << (k ? "," : "") << odd_set[k].u << "-" << odd_set[k].v;
  return out.str();
}

}  // namespace

double CycleInequality::apply(const MomentMatrix& r) const {
  double s = 0.0;
  for (const auto& c : coeff) s += 2.0 * c.value * r(c.i, c.j);
  return s;
}

Eigen::MatrixXd CycleInequality::dense() const {
  Eigen::MatrixXd a = Eigen::MatrixXd::Zero(p + 1, p + 1);
  for (const auto& c : coeff) a(c.i, c.j) = a(c.j, c.i) = c.value;
  return a;
}

std::vector<Edge> CycleInequality::edges() const { return cycle_edges(cycle); }

CycleInequality cycle_to_matrix(const std::vector<int>& cycle, const std::vector<Edge>& odd_set, int p) {
  if (cycle.size() < 3) throw std::invalid_argument("a cycle needs at least 3 vertices");
  std::set<int> seen;
  for (const int v : cycle) {
    if (v < 0 || v > p) throw std::invalid_argument("cycle vertex " + std::to_string(v) + " out of range");
    if (!seen.insert(v).second) throw std::invalid_argument("cycle repeats vertex " + std::to_string(v));
  }
  if (odd_set.size() % 2 == 0) throw std::invalid_argument("odd set must have odd size");

  CycleInequality ineq;
  ineq.p = p;
  ineq.cycle = canonical_cycle(cycle);
  const auto edges = cycle_edges(ineq.cycle);
  std::set<Edge> on_cycle(edges.begin(), edges.end());

  std::set<Edge> flipped;
  for (const auto& e : odd_set) {
    const Edge n = make_edge(e.u, e.v);
    if (!on_cycle.contains(n)) throw std::invalid_argument("odd set edge is not on the cycle");
    if (!flipped.insert(n).second) throw std::invalid_argument("odd set repeats an edge");
  }
  ineq.odd_set.assign(flipped.begin(), flipped.end());

  for (const auto& e : edges) {
    // e.u == 0 marks a spoke to the suspension vertex.
    const double g = e.u == 0 ? 0.5 : -0.5;
    const double sigma = flipped.contains(e) ? -1.0 : 1.0;
    ineq.coeff.push_back({e.u, e.v, 0.5 * sigma * g});
  }
  std::sort(ineq.coeff.begin(), ineq.coeff.end(),
            [](const CoeffEntry& a, const CoeffEntry& b) { return std::tie(a.i, a.j) < std::tie(b.i, b.j); });
  ineq.rhs = 1.0 - 0.5 * static_cast<double>(ineq.cycle.size());
  ineq.signature = make_signature(edges, ineq.odd_set);
  return ineq;
}

double violation(const CycleInequality& ineq, const MomentMatrix& eta_matrix) {
  if (eta_matrix.rows() != ineq.p + 1 || eta_matrix.cols() != ineq.p + 1) {
    throw std::invalid_argument("moment matrix shape does not match the inequality");
  }
  return ineq.rhs - ineq.apply(eta_matrix);
}

double cycle_weight(const CycleInequality& ineq, const SuspensionWeights& weights) {
  const std::set<Edge> flipped(ineq.odd_set.begin(), ineq.odd_set.end());
  double s = 0.0;
  for (const auto& e : ineq.edges()) {
    const double w = weights(e.u, e.v);
    s += flipped.contains(e) ? 1.0 - w : w;
  }
  return s;
}

std::vector<SeparatedCut> separate(const SuspensionWeights& weights, double min_violation, int max_cuts) {
  const int n = weights.num_vertices();
  const int doubled = 2 * n;
  constexpr double kInf = std::numeric_limits<double>::infinity();
  const double threshold = 1.0 - min_violation;

  // Copy c of vertex v is node v + c*n; same-copy edges cost w, cross edges 1 - w.
  auto length = [&](int a, int b) {
    const int va = a % n;
    const int vb = b % n;
    const double w = weights(va, vb);
    return (a < n) == (b < n) ? w : 1.0 - w;
  };

  std::map<std::string, SeparatedCut> found;
  std::vector<double> dist(static_cast<std::size_t>(doubled));
  std::vector<int> prev(static_cast<std::size_t>(doubled));
  std::vector<char> done(static_cast<std::size_t>(doubled));

  for (int root = 0; root < n; ++root) {
    std::fill(dist.begin(), dist.end(), kInf);
    std::fill(prev.begin(), prev.end(), -1);
    std::fill(done.begin(), done.end(), 0);
    const int source = root;
    const int target = root + n;
    dist[static_cast<std::size_t>(source)] = 0.0;

    for (int step = 0; step < doubled; ++step) {
      int best = -1;
      for (int k = 0; k < doubled; ++k) {
        if (!done[static_cast<std::size_t>(k)] &&
            (best < 0 || dist[static_cast<std::size_t>(k)] < dist[static_cast<std::size_t>(best)])) {
          best = k;
        }
      }
      if (best < 0 || dist[static_cast<std::size_t>(best)] == kInf) break;
      done[static_cast<std::size_t>(best)] = 1;
      if (best == target) break;
      for (int k = 0; k < doubled; ++k) {
        if (done[static_cast<std::size_t>(k)] || k % n == best % n) continue;
        const double candidate = dist[static_cast<std::size_t>(best)] + length(best, k);
        if (candidate < dist[static_cast<std::size_t>(k)]) {
          dist[static_cast<std::size_t>(k)] = candidate;
          prev[static_cast<std::size_t>(k)] = best;
        }
      }
    }
    if (!(dist[static_cast<std::size_t>(target)] < threshold)) continue;

    std::vector<int> path;
    for (int k = target; k != -1; k = prev[static_cast<std::size_t>(k)]) path.push_back(k);
    std::reverse(path.begin(), path.end());
    // path runs root^0 ... root^1; drop the closing copy of the root.
    std::vector<int> cycle;
    std::vector<Edge> odd;
    for (std::size_t k = 0; k + 1 < path.size(); ++k) {
      cycle.push_back(path[k] % n);
      if ((path[k] < n) != (path[k + 1] < n)) odd.push_back(make_edge(path[k] % n, path[k + 1] % n));
    }
    if (cycle.size() < 3) continue;
    std::vector<int> sorted = cycle;
    std::sort(sorted.begin(), sorted.end());
    if (std::adjacent_find(sorted.begin(), sorted.end()) != sorted.end()) continue;

    SeparatedCut cut{cycle_to_matrix(cycle, odd, weights.p), 0.0};
    cut.path_length = cycle_weight(cut.inequality, weights);
    if (!(cut.path_length < threshold)) continue;
    found.try_emplace(cut.inequality.signature, std::move(cut));
  }

  std::vector<SeparatedCut> out;
  out.reserve(found.size());
  for (auto& [sig, cut] : found) out.push_back(std::move(cut));
  std::stable_sort(out.begin(), out.end(), [](const SeparatedCut& a, const SeparatedCut& b) {
    if (a.path_length != b.path_length) return a.path_length < b.path_length;
    return a.inequality.signature < b.inequality.signature;
  });
  if (max_cuts >= 0 && static_cast<int>(out.size()) > max_cuts) out.resize(static_cast<std::size_t>(max_cuts));
  return out;
}

std::vector<SeparatedCut> separate(const MeanVector& eta, double min_violation, int max_cuts) {
  auto candidates = separate(suspension_weights(eta), min_violation, -1);
  const MomentMatrix r = moment_matrix(eta);
  std::vector<SeparatedCut> out;
  for (auto& cut : candidates) {
    if (violation(cut.inequality, r) > min_violation) out.push_back(std::move(cut));
    if (max_cuts >= 0 && static_cast<int>(out.size()) >= max_cuts) break;
  }
  return out;
}

}  // namespace isingcut
