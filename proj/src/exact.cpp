#include "isingcut/exact.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <string>
#include <vector>

#include "isingcut/errors.hpp"

namespace isingcut {
namespace {

void check_limit(const IsingModel& model, OracleLimit limit) {
  if (model.p() > limit.max_p || model.p() > 30) {
    throw NumericalError("exact enumeration refused: p=" + std::to_string(model.p()) +
                         " exceeds max_p=" + std::to_string(limit.max_p));
  }
}

// State s encodes x_v = +1 when bit v is set.
std::vector<double> state_energies(const IsingModel& model) {
  const int p = model.p();
  const std::uint64_t count = std::uint64_t{1} << p;
  std::vector<std::pair<Edge, double>> edges(model.edges().begin(), model.edges().end());
  std::vector<double> energies(count);
  for (std::uint64_t s = 0; s < count; ++s) {
    double e = 0.0;
    for (int v = 0; v < p; ++v) e += ((s >> v) & 1U) ? model.node(v) : -model.node(v);
    for (const auto& [edge, value] : edges) {
      const bool same = (((s >> edge.u) ^ (s >> edge.v)) & 1U) == 0;
      e += same ? value : -value;
    }
    energies[s] = e;
  }
  return energies;
}

double log_sum_exp(const std::vector<double>& energies) {
  const double top = *std::max_element(energies.begin(), energies.end());
  double sum = 0.0;
  for (const double e : energies) sum += std::exp(e - top);
  return top + std::log(sum);
}

}  // namespace

double exact_log_partition(const IsingModel& model, OracleLimit limit) {
  check_limit(model, limit);
  return log_sum_exp(state_energies(model));
}

MeanVector exact_mean_parameters(const IsingModel& model, OracleLimit limit) {
  check_limit(model, limit);
  const int p = model.p();
  const auto energies = state_energies(model);
  const double log_z = log_sum_exp(energies);

  std::vector<double> node(static_cast<std::size_t>(p), 0.0);
  std::vector<double> pair(num_pairs(p), 0.0);
  std::vector<int> x(static_cast<std::size_t>(p));
  for (std::uint64_t s = 0; s < energies.size(); ++s) {
    const double prob = std::exp(energies[s] - log_z);
    for (int v = 0; v < p; ++v) x[static_cast<std::size_t>(v)] = ((s >> v) & 1U) ? 1 : -1;
    std::size_t k = 0;
    for (int u = 0; u < p; ++u) {
      node[static_cast<std::size_t>(u)] += prob * x[static_cast<std::size_t>(u)];
      for (int v = u + 1; v < p; ++v, ++k) {
        pair[k] += prob * x[static_cast<std::size_t>(u)] * x[static_cast<std::size_t>(v)];
      }
    }
  }

  MeanVector eta(p);
  std::copy(node.begin(), node.end(), eta.node_means().begin());
  std::copy(pair.begin(), pair.end(), eta.pair_means().begin());
  return eta;
}

double exact_avg_loglik(const IsingModel& model, const Dataset& data, OracleLimit limit) {
  if (data.n < 1) throw std::invalid_argument("log-likelihood needs a non-empty dataset");
  if (data.p != model.p()) throw std::invalid_argument("dataset and model differ in p");
  check_limit(model, limit);
  return inner_product(model, empirical_means(data)) - exact_log_partition(model, limit);
}

}  // namespace isingcut
