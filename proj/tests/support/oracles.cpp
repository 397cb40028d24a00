#include "oracles.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <functional>
#include <limits>
#include <random>
#include <stdexcept>

#include "isingcut/exact.hpp"

namespace isingcut::testing {
namespace {

// Calls visit(cycle) once per simple cycle (>= 3 vertices) of the complete
// graph on n vertices, rotated to its smallest vertex and with one orientation.
void for_each_cycle(int n, const std::function<void(const std::vector<int>&)>& visit) {
  std::vector<int> path;
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  std::function<void()> extend = [&] {
    if (path.size() >= 3 && path[1] < path.back()) visit(path);
    for (int v = path[0] + 1; v < n; ++v) {
      if (used[static_cast<std::size_t>(v)]) continue;
      used[static_cast<std::size_t>(v)] = 1;
      path.push_back(v);
      extend();
      path.pop_back();
      used[static_cast<std::size_t>(v)] = 0;
    }
  };
  for (int s = 0; s < n; ++s) {
    path = {s};
    used[static_cast<std::size_t>(s)] = 1;
    extend();
    used[static_cast<std::size_t>(s)] = 0;
  }
}

IsingModel model_from_vector(int p, const Eigen::VectorXd& theta) {
  IsingModel m(p);
  for (int v = 0; v < p; ++v) m.set_node(v, theta[v]);
  for (int u = 0; u < p; ++u) {
    for (int v = u + 1; v < p; ++v) {
      const double t = theta[static_cast<Eigen::Index>(p + pair_index(u, v, p))];
      if (t != 0.0) m.set_edge(u, v, t);
    }
  }
  return m;
}

double logdet_or_nan(const Eigen::MatrixXd& s) {
  Eigen::LLT<Eigen::MatrixXd> llt(s);
  if (llt.info() != Eigen::Success) return std::numeric_limits<double>::quiet_NaN();
  return 2.0 * llt.matrixLLT().diagonal().array().log().sum();
}

}  // namespace

CycleMinimum exhaustive_cycle_minimum(const SuspensionWeights& weights) {
  CycleMinimum best;
  best.value = std::numeric_limits<double>::infinity();
  for_each_cycle(weights.num_vertices(), [&](const std::vector<int>& cycle) {
    const std::size_t k = cycle.size();
    std::vector<double> w(k);
    for (std::size_t e = 0; e < k; ++e) w[e] = weights(cycle[e], cycle[(e + 1) % k]);
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      if (std::popcount(mask) % 2 == 0) continue;
      double s = 0.0;
      for (std::size_t e = 0; e < k; ++e) s += (mask >> e & 1u) ? 1.0 - w[e] : w[e];
      if (s < best.value) {
        best.value = s;
        best.cycle = cycle;
        best.odd_set.clear();
        for (std::size_t e = 0; e < k; ++e) {
          if (mask >> e & 1u) best.odd_set.push_back(make_edge(cycle[e], cycle[(e + 1) % k]));
        }
        best.found = true;
      }
    }
  });
  return best;
}

std::vector<CycleInequality> all_cycle_inequalities(int p) {
  std::vector<CycleInequality> out;
  for_each_cycle(p + 1, [&](const std::vector<int>& cycle) {
    const std::size_t k = cycle.size();
    for (unsigned mask = 0; mask < (1u << k); ++mask) {
      if (std::popcount(mask) % 2 == 0) continue;
      std::vector<Edge> odd;
      for (std::size_t e = 0; e < k; ++e) {
        if (mask >> e & 1u) odd.push_back(make_edge(cycle[e], cycle[(e + 1) % k]));
      }
      out.push_back(cycle_to_matrix(cycle, odd, p));
    }
  });
  return out;
}

Eigen::VectorXd finite_difference_gradient(const IsingModel& model, double h) {
  const int p = model.p();
  const Eigen::VectorXd theta = parameter_vector(model);
  Eigen::VectorXd grad(theta.size());
  for (Eigen::Index i = 0; i < theta.size(); ++i) {
    Eigen::VectorXd up = theta;
    Eigen::VectorXd down = theta;
    up[i] += h;
    down[i] -= h;
    grad[i] = (exact_log_partition(model_from_vector(p, up)) - exact_log_partition(model_from_vector(p, down))) /
              (2.0 * h);
  }
  return grad;
}

PgOracleResult projected_gradient_oracle(const MeanVector& eta_hat, const std::vector<CycleInequality>& cuts,
                                         double lambda, int max_iters) {
  if (cuts.size() > 1) throw std::invalid_argument("the oracle handles at most one cut");
  const int p = eta_hat.p();
  const int n = p + 1;

  Eigen::MatrixXd base = moment_matrix(eta_hat);
  base(0, 0) = 1.0;
  for (int k = 1; k < n; ++k) base(k, k) = 4.0 / 3.0;

  // Free coordinates: (i, j) with 1 <= i < j.
  std::vector<std::pair<int, int>> coords;
  for (int i = 1; i < n; ++i) {
    for (int j = i + 1; j < n; ++j) coords.emplace_back(i, j);
  }
  const auto dim = static_cast<Eigen::Index>(coords.size());
  auto to_matrix = [&](const Eigen::VectorXd& x) {
    Eigen::MatrixXd w = Eigen::MatrixXd::Zero(n, n);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const auto [i, j] = coords[static_cast<std::size_t>(k)];
      w(i, j) = w(j, i) = x[k];
    }
    return w;
  };

  // Cut as g^T x >= c over the free coordinates.
  Eigen::VectorXd g = Eigen::VectorXd::Zero(dim);
  double c = 0.0;
  const bool has_cut = !cuts.empty();
  if (has_cut) {
    const Eigen::MatrixXd a = cuts[0].dense();
    for (Eigen::Index k = 0; k < dim; ++k) {
      const auto [i, j] = coords[static_cast<std::size_t>(k)];
      g[k] = 2.0 * a(i, j);
    }
    c = cuts[0].rhs - cuts[0].apply(moment_matrix(eta_hat));
  }

  auto clip = [&](const Eigen::VectorXd& y) { return y.cwiseMax(-lambda).cwiseMin(lambda).eval(); };
  auto project = [&](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    Eigen::VectorXd x = clip(y);
    if (!has_cut || g.dot(x) >= c) return x;
    double lo = 0.0;
    double hi = 1.0;
    while (g.dot(clip(y + hi * g)) < c) {
      hi *= 2.0;
      if (hi > 1e12) throw std::runtime_error("cut is infeasible within the box");
    }
    for (int it = 0; it < 200; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (g.dot(clip(y + mid * g)) < c) {
        lo = mid;
      } else {
        hi = mid;
      }
    }
    return clip(y + hi * g);
  };
  auto value = [&](const Eigen::VectorXd& x) { return logdet_or_nan(base + to_matrix(x)); };
  auto gradient = [&](const Eigen::VectorXd& x) {
    const Eigen::MatrixXd inv = (base + to_matrix(x)).inverse();
    Eigen::VectorXd grad(dim);
    for (Eigen::Index k = 0; k < dim; ++k) {
      const auto [i, j] = coords[static_cast<std::size_t>(k)];
      grad[k] = inv(i, j) + inv(j, i);
    }
    return grad;
  };

  PgOracleResult res;
  Eigen::VectorXd x = project(Eigen::VectorXd::Zero(dim));
  double fx = value(x);
  if (!std::isfinite(fx)) throw std::runtime_error("oracle start is not positive definite");
  double step = 1.0;
  for (res.iterations = 0; res.iterations < max_iters; ++res.iterations) {
    const Eigen::VectorXd grad = gradient(x);
    Eigen::VectorXd next;
    double fnext = 0.0;
    step *= 2.0;
    while (true) {
      next = project(x + step * grad);
      fnext = value(next);
      const Eigen::VectorXd d = next - x;
      if (std::isfinite(fnext) && fnext >= fx + grad.dot(d) - d.squaredNorm() / (2.0 * step)) break;
      step *= 0.5;
      if (step < 1e-20) break;
    }
    const double change = (next - x).cwiseAbs().maxCoeff();
    x = next;
    fx = fnext;
    if (change < 1e-14) {
      res.converged = true;
      break;
    }
  }
  res.w = to_matrix(x);
  res.objective = -static_cast<double>(n) - fx;
  return res;
}

ProxLogisticResult proximal_logistic(int v, const Dataset& data, double lambda, int max_iters) {
  const int n = data.n;
  const int q = data.p - 1;
  // Column 0 is the intercept; columns 1..q are y * z.
  Eigen::MatrixXd x(n, q + 1);
  for (int i = 0; i < n; ++i) {
    const double y = data.at(i, v);
    x(i, 0) = y;
    for (int j = 0; j < q; ++j) x(i, j + 1) = y * data.at(i, j < v ? j : j + 1);
  }
  const double lip = 0.25 * Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(x.transpose() * x / n).eigenvalues().maxCoeff();
  const double step = 1.0 / lip;

  auto loss = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd m = x * b;
    double s = 0.0;
    for (int i = 0; i < n; ++i) s += m[i] > 0 ? std::log1p(std::exp(-m[i])) : -m[i] + std::log1p(std::exp(m[i]));
    return s / n;
  };
  auto grad = [&](const Eigen::VectorXd& b) {
    const Eigen::VectorXd m = x * b;
    Eigen::VectorXd d(n);
    for (int i = 0; i < n; ++i) d[i] = -1.0 / (1.0 + std::exp(m[i]));
    return (x.transpose() * d / n).eval();
  };
  auto prox = [&](Eigen::VectorXd b) {
    for (int j = 1; j <= q; ++j) {
      const double t = step * lambda;
      b[j] = b[j] > t ? b[j] - t : (b[j] < -t ? b[j] + t : 0.0);
    }
    return b;
  };

  Eigen::VectorXd b = Eigen::VectorXd::Zero(q + 1);
  Eigen::VectorXd z = b;
  double t = 1.0;
  for (int it = 0; it < max_iters; ++it) {
    const Eigen::VectorXd next = prox(z - step * grad(z));
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    z = next + ((t - 1.0) / t_next) * (next - b);
    const double change = (next - b).cwiseAbs().maxCoeff();
    b = next;
    t = t_next;
    if (change < 1e-13) break;
  }
  ProxLogisticResult r;
  r.intercept = b[0];
  r.beta = b.tail(q);
  r.objective = loss(b) + lambda * r.beta.lpNorm<1>();
  return r;
}

MeanVector gram_means(int p, int dim, double scale, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  Eigen::MatrixXd vecs(dim, p + 1);
  for (int k = 0; k <= p; ++k) {
    for (int d = 0; d < dim; ++d) vecs(d, k) = normal(rng);
    vecs.col(k).normalize();
  }
  const Eigen::MatrixXd g = vecs.transpose() * vecs;
  MeanVector eta(p);
  for (int v = 0; v < p; ++v) eta.set_node(v, scale * g(0, v + 1));
  for (int u = 0; u < p; ++u) {
    for (int v = u + 1; v < p; ++v) eta.set_pair(u, v, scale * g(u + 1, v + 1));
  }
  return eta;
}

IsingModel random_model(int p, double field, double xi, double density, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(-1.0, 1.0);
  std::uniform_real_distribution<double> coin(0.0, 1.0);
  IsingModel m(p);
  for (int v = 0; v < p; ++v) m.set_node(v, field * unit(rng));
  for (int u = 0; u < p; ++u) {
    for (int v = u + 1; v < p; ++v) {
      if (coin(rng) < density) m.set_edge(u, v, xi * unit(rng));
    }
  }
  return m;
}

}  // namespace isingcut::testing
