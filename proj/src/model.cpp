#include "isingcut/model.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <string>

namespace isingcut {

Edge make_edge(int a, int b) {
  if (a == b) throw std::invalid_argument("edge endpoints must differ, got " + std::to_string(a));
  return a < b ? Edge{a, b} : Edge{b, a};
}

std::size_t pair_index(int u, int v, int p) {
  if (u > v) std::swap(u, v);
  // Pairs preceding row u: sum_{k<u} (p-1-k).
  const auto uu = static_cast<std::size_t>(u);
  const auto pp = static_cast<std::size_t>(p);
  return uu * (2 * pp - uu - 1) / 2 + static_cast<std::size_t>(v - u - 1);
}

IsingModel::IsingModel(int p) : p_(p), node_params_(static_cast<std::size_t>(std::max(p, 0)), 0.0) {
  if (p < 1) throw std::invalid_argument("model needs p >= 1");
}

void IsingModel::check_node(int v) const {
  if (v < 0 || v >= p_) {
    throw std::invalid_argument("node index " + std::to_string(v) + " out of range [0, " +
                                std::to_string(p_) + ")");
  }
}

double IsingModel::node(int v) const {
  check_node(v);
  return node_params_[static_cast<std::size_t>(v)];
}

void IsingModel::set_node(int v, double value) {
  check_node(v);
  if (!std::isfinite(value)) throw std::invalid_argument("node parameter must be finite");
  node_params_[static_cast<std::size_t>(v)] = value;
}

double IsingModel::edge(int u, int v) const {
  check_node(u);
  check_node(v);
  const auto it = edge_params_.find(make_edge(u, v));
  return it == edge_params_.end() ? 0.0 : it->second;
}

void IsingModel::set_edge(int u, int v, double value) {
  check_node(u);
  check_node(v);
  if (!std::isfinite(value)) throw std::invalid_argument("edge parameter must be finite");
  edge_params_[make_edge(u, v)] = value;
}

void IsingModel::erase_edge(int u, int v) { edge_params_.erase(make_edge(u, v)); }

MeanVector::MeanVector(int p)
    : p_(p),
      node_means_(static_cast<std::size_t>(std::max(p, 0)), 0.0),
      pair_means_(num_pairs(p), 0.0) {
  if (p < 1) throw std::invalid_argument("mean vector needs p >= 1");
}

double MeanVector::pair(int u, int v) const {
  if (u == v) throw std::invalid_argument("pair mean needs distinct nodes");
  return pair_means_[pair_index(u, v, p_)];
}

void MeanVector::set_pair(int u, int v, double value) {
  if (u == v) throw std::invalid_argument("pair mean needs distinct nodes");
  pair_means_[pair_index(u, v, p_)] = value;
}

double MeanVector::max_abs_diff(const MeanVector& other) const {
  if (other.p_ != p_) throw std::invalid_argument("mean vectors differ in p");
  double worst = 0.0;
  for (std::size_t i = 0; i < node_means_.size(); ++i) {
    worst = std::max(worst, std::abs(node_means_[i] - other.node_means_[i]));
  }
  for (std::size_t i = 0; i < pair_means_.size(); ++i) {
    worst = std::max(worst, std::abs(pair_means_[i] - other.pair_means_[i]));
  }
  return worst;
}

MomentMatrix param_matrix(const IsingModel& model) {
  const int p = model.p();
  MomentMatrix r = MomentMatrix::Zero(p + 1, p + 1);
  for (int v = 0; v < p; ++v) {
    r(0, v + 1) = r(v + 1, 0) = model.node(v);
  }
  for (const auto& [e, value] : model.edges()) {
    r(e.u + 1, e.v + 1) = r(e.v + 1, e.u + 1) = value;
  }
  return r;
}

MomentMatrix moment_matrix(const MeanVector& eta) {
  const int p = eta.p();
  MomentMatrix r = MomentMatrix::Zero(p + 1, p + 1);
  for (int v = 0; v < p; ++v) {
    r(0, v + 1) = r(v + 1, 0) = eta.node(v);
  }
  for (int u = 0; u < p; ++u) {
    for (int v = u + 1; v < p; ++v) {
      r(u + 1, v + 1) = r(v + 1, u + 1) = eta.pair(u, v);
    }
  }
  return r;
}

IsingModel model_from_matrix(const MomentMatrix& r, double tol) {
  const int p = static_cast<int>(r.rows()) - 1;
  IsingModel model(p);
  for (int v = 0; v < p; ++v) model.set_node(v, r(0, v + 1));
  for (int u = 0; u < p; ++u) {
    for (int v = u + 1; v < p; ++v) {
      const double value = r(u + 1, v + 1);
      if (std::abs(value) > tol) model.set_edge(u, v, value);
    }
  }
  return model;
}

MeanVector means_from_matrix(const MomentMatrix& r) {
  const int p = static_cast<int>(r.rows()) - 1;
  MeanVector eta(p);
  for (int v = 0; v < p; ++v) eta.set_node(v, r(0, v + 1));
  for (int u = 0; u < p; ++u) {
    for (int v = u + 1; v < p; ++v) eta.set_pair(u, v, r(u + 1, v + 1));
  }
  return eta;
}

SuspensionWeights suspension_weights(const MeanVector& eta) {
  const int p = eta.p();
  SuspensionWeights out;
  out.p = p;
  out.w = Eigen::MatrixXd::Zero(p + 1, p + 1);
  auto clamp01 = [](double x) { return std::clamp(x, 0.0, 1.0); };
  for (int v = 0; v < p; ++v) {
    out.w(0, v + 1) = out.w(v + 1, 0) = clamp01(0.5 * (eta.node(v) + 1.0));
  }
  for (int u = 0; u < p; ++u) {
    for (int v = u + 1; v < p; ++v) {
      out.w(u + 1, v + 1) = out.w(v + 1, u + 1) = clamp01(0.5 * (1.0 - eta.pair(u, v)));
    }
  }
  return out;
}

std::vector<double> sufficient_statistics(std::span<const std::int8_t> x) {
  const int p = static_cast<int>(x.size());
  for (const auto xv : x) {
    if (xv != 1 && xv != -1) {
      throw std::invalid_argument("configuration entries must be -1 or +1, got " +
                                  std::to_string(static_cast<int>(xv)));
    }
  }
  std::vector<double> stats;
  stats.reserve(static_cast<std::size_t>(p) + num_pairs(p));
  for (const auto xv : x) stats.push_back(xv);
  for (int u = 0; u < p; ++u) {
    for (int v = u + 1; v < p; ++v) stats.push_back(x[static_cast<std::size_t>(u)] * x[static_cast<std::size_t>(v)]);
  }
  return stats;
}

double energy(const IsingModel& model, std::span<const std::int8_t> x) {
  if (static_cast<int>(x.size()) != model.p()) throw std::invalid_argument("configuration length != p");
  double e = 0.0;
  for (int v = 0; v < model.p(); ++v) e += model.node(v) * x[static_cast<std::size_t>(v)];
  for (const auto& [edge, value] : model.edges()) {
    e += value * x[static_cast<std::size_t>(edge.u)] * x[static_cast<std::size_t>(edge.v)];
  }
  return e;
}

double inner_product(const IsingModel& model, const MeanVector& eta) {
  if (model.p() != eta.p()) throw std::invalid_argument("model and means differ in p");
  double s = 0.0;
  for (int v = 0; v < model.p(); ++v) s += model.node(v) * eta.node(v);
  for (const auto& [e, value] : model.edges()) s += value * eta.pair(e.u, e.v);
  return s;
}

std::vector<Edge> edge_set(const IsingModel& model, double tol) {
  if (tol < 0) throw std::invalid_argument("edge tolerance must be >= 0");
  std::vector<Edge> out;
  for (const auto& [e, value] : model.edges()) {
    if (std::abs(value) > tol) out.push_back(e);
  }
  return out;
}

Eigen::VectorXd parameter_vector(const IsingModel& model) {
  const int p = model.p();
  Eigen::VectorXd theta = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(model.dimension()));
  for (int v = 0; v < p; ++v) theta[v] = model.node(v);
  for (const auto& [e, value] : model.edges()) {
    theta[static_cast<Eigen::Index>(static_cast<std::size_t>(p) + pair_index(e.u, e.v, p))] = value;
  }
  return theta;
}

}  // namespace isingcut
