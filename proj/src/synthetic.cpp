#include "isingcut/synthetic.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <set>
#include <stdexcept>

namespace isingcut {
namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

std::vector<Edge> grid_edges(int rows, int cols) {
  std::vector<Edge> edges;
  for (int r = 0; r < rows; ++r) {
    for (int c = 0; c < cols; ++c) {
      const int v = r * cols + c;
      if (c + 1 < cols) edges.push_back({v, v + 1});
      if (r + 1 < rows) edges.push_back({v, v + cols});
    }
  }
  return edges;
}

// Adds uniform random pairs to `present` until it holds `target` edges.
void fill_random(int p, int target, int max_degree, Rng& rng, std::set<Edge>& present,
                 std::vector<int>& degree) {
  std::uniform_int_distribution<int> pick(0, p - 1);
  const long long budget = 100LL * std::max(target, 1);
  long long draws = 0;
  while (static_cast<int>(present.size()) < target) {
    if (draws++ >= budget) {
      throw std::invalid_argument("graph spec infeasible: placed " + std::to_string(present.size()) +
                                  " of " + std::to_string(target) + " edges within the retry cap");
    }
    const int a = pick(rng);
    const int b = pick(rng);
    if (a == b) continue;
    const Edge e = make_edge(a, b);
    if (present.contains(e)) continue;
    if (max_degree > 0 && (degree[static_cast<std::size_t>(a)] >= max_degree ||
                           degree[static_cast<std::size_t>(b)] >= max_degree)) {
      continue;
    }
    present.insert(e);
    ++degree[static_cast<std::size_t>(a)];
    ++degree[static_cast<std::size_t>(b)];
  }
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = splitmix64(base);
  for (const auto i : indices) h = splitmix64(h ^ splitmix64(i + 0x632be59bd9b4e019ULL));
  return h;
}

std::string to_string(GraphKind kind) {
  switch (kind) {
    case GraphKind::kGrid4: return "grid4";
    case GraphKind::kRandomSparse: return "random_sparse";
    case GraphKind::kDenseSubgraphs: return "dense_subgraphs";
  }
  return "unknown";
}

GraphKind parse_graph_kind(const std::string& name) {
  if (name == "grid4") return GraphKind::kGrid4;
  if (name == "random_sparse") return GraphKind::kRandomSparse;
  if (name == "dense_subgraphs") return GraphKind::kDenseSubgraphs;
  throw std::invalid_argument("unknown graph kind '" + name + "'");
}

void validate(const GraphSpec& spec) {
  const auto pairs = static_cast<long long>(num_pairs(spec.p));
  switch (spec.kind) {
    case GraphKind::kGrid4:
      if (spec.rows < 1 || spec.cols < 1) throw std::invalid_argument("grid4 needs rows, cols >= 1");
      if (spec.p != spec.rows * spec.cols) throw std::invalid_argument("grid4 needs p = rows * cols");
      break;
    case GraphKind::kRandomSparse:
      if (spec.p < 2) throw std::invalid_argument("random_sparse needs p >= 2");
      if (spec.n_edges < 0 || spec.n_edges > pairs) throw std::invalid_argument("n_edges out of range");
      if (spec.max_degree < 0) throw std::invalid_argument("max_degree must be >= 0");
      break;
    case GraphKind::kDenseSubgraphs: {
      if (spec.block_size < 2 || spec.n_blocks < 1) {
        throw std::invalid_argument("dense_subgraphs needs block_size >= 2 and n_blocks >= 1");
      }
      if (spec.n_blocks * spec.block_size > spec.p) throw std::invalid_argument("blocks do not fit in p nodes");
      const long long clique = static_cast<long long>(spec.n_blocks) * spec.block_size * (spec.block_size - 1) / 2;
      if (spec.n_edges < clique || spec.n_edges > pairs) {
        throw std::invalid_argument("n_edges must lie between the clique edge count and p(p-1)/2");
      }
      break;
    }
  }
}

std::vector<Edge> make_graph(const GraphSpec& spec, std::uint64_t seed) {
  validate(spec);
  if (spec.kind == GraphKind::kGrid4) {
    auto edges = grid_edges(spec.rows, spec.cols);
    std::sort(edges.begin(), edges.end());
    return edges;
  }

  Rng rng(seed);
  std::set<Edge> present;
  std::vector<int> degree(static_cast<std::size_t>(spec.p), 0);
  if (spec.kind == GraphKind::kDenseSubgraphs) {
    for (int b = 0; b < spec.n_blocks; ++b) {
      const int first = b * spec.block_size;
      for (int u = first; u < first + spec.block_size; ++u) {
        for (int v = u + 1; v < first + spec.block_size; ++v) {
          present.insert({u, v});
          ++degree[static_cast<std::size_t>(u)];
          ++degree[static_cast<std::size_t>(v)];
        }
      }
    }
    fill_random(spec.p, spec.n_edges, 0, rng, present, degree);
  } else {
    fill_random(spec.p, spec.n_edges, spec.max_degree, rng, present, degree);
  }
  return {present.begin(), present.end()};
}

IsingModel assign_parameters(int p, const std::vector<Edge>& edges, double xi, std::uint64_t seed) {
  if (!(xi >= 0.0)) throw std::invalid_argument("coupling strength must be >= 0");
  Rng rng(seed);
  std::uniform_real_distribution<double> field(-1.0, 1.0);
  IsingModel model(p);
  for (int v = 0; v < p; ++v) model.set_node(v, field(rng));
  std::uniform_real_distribution<double> coupling(-1.0, 1.0);
  for (const auto& e : edges) model.set_edge(e.u, e.v, xi * coupling(rng));
  return model;
}

Dataset gibbs_sample(const IsingModel& model, const SamplerConfig& cfg) {
  if (cfg.n < 1 || cfg.burn_in < 0 || cfg.thin < 1) {
    throw std::invalid_argument("sampler needs n >= 1, burn_in >= 0, thin >= 1");
  }
  const int p = model.p();
  std::vector<std::vector<std::pair<int, double>>> neighbours(static_cast<std::size_t>(p));
  for (const auto& [e, value] : model.edges()) {
    if (value == 0.0) continue;
    neighbours[static_cast<std::size_t>(e.u)].emplace_back(e.v, value);
    neighbours[static_cast<std::size_t>(e.v)].emplace_back(e.u, value);
  }

  Rng rng(cfg.seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::vector<std::int8_t> x(static_cast<std::size_t>(p));
  for (auto& xv : x) xv = unit(rng) < 0.5 ? -1 : 1;

  auto sweep = [&] {
    for (int v = 0; v < p; ++v) {
      double field = model.node(v);
      for (const auto& [u, value] : neighbours[static_cast<std::size_t>(v)]) {
        field += value * x[static_cast<std::size_t>(u)];
      }
      const double prob_up = 1.0 / (1.0 + std::exp(-2.0 * field));
      x[static_cast<std::size_t>(v)] = unit(rng) < prob_up ? 1 : -1;
    }
  };

  for (int s = 0; s < cfg.burn_in; ++s) sweep();

  Dataset data;
  data.p = p;
  data.n = cfg.n;
  data.seed = cfg.seed;
  data.generator = kRngName;
  data.model_hash = model_hash(model);
  data.values.reserve(static_cast<std::size_t>(cfg.n) * static_cast<std::size_t>(p));
  for (int i = 0; i < cfg.n; ++i) {
    for (int s = 0; s < cfg.thin; ++s) sweep();
    data.values.insert(data.values.end(), x.begin(), x.end());
  }
  return data;
}

std::string model_hash(const IsingModel& model) {
  // FNV-1a over p, node parameter bits, then (u, v, bits) per stored edge.
  std::uint64_t h = 0xcbf29ce484222325ULL;
  auto mix = [&h](std::uint64_t word) {
    for (int i = 0; i < 8; ++i) {
      h ^= (word >> (8 * i)) & 0xffU;
      h *= 0x100000001b3ULL;
    }
  };
  mix(static_cast<std::uint64_t>(model.p()));
  for (const double t : model.nodes()) mix(std::bit_cast<std::uint64_t>(t));
  for (const auto& [e, value] : model.edges()) {
    mix(static_cast<std::uint64_t>(e.u));
    mix(static_cast<std::uint64_t>(e.v));
    mix(std::bit_cast<std::uint64_t>(value));
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

void validate(const Dataset& data) {
  if (data.p < 1) throw std::invalid_argument("dataset needs p >= 1");
  if (data.n < 0) throw std::invalid_argument("dataset has negative n");
  if (data.values.size() != static_cast<std::size_t>(data.n) * static_cast<std::size_t>(data.p)) {
    throw std::invalid_argument("dataset value count does not match n * p");
  }
  for (const auto x : data.values) {
    if (x != 1 && x != -1) throw std::invalid_argument("dataset entries must be -1 or +1");
  }
}

MeanVector empirical_means(const Dataset& data) {
  validate(data);
  if (data.n < 1) throw std::invalid_argument("empirical means need a non-empty dataset");
  const int p = data.p;
  std::vector<long long> node(static_cast<std::size_t>(p), 0);
  std::vector<long long> pair(num_pairs(p), 0);
  for (int i = 0; i < data.n; ++i) {
    const auto x = data.row(i);
    std::size_t k = 0;
    for (int u = 0; u < p; ++u) {
      const int xu = x[static_cast<std::size_t>(u)];
      node[static_cast<std::size_t>(u)] += xu;
      for (int v = u + 1; v < p; ++v, ++k) pair[k] += xu * x[static_cast<std::size_t>(v)];
    }
  }
  MeanVector eta(p);
  const double inv_n = 1.0 / data.n;
  for (std::size_t i = 0; i < node.size(); ++i) eta.node_means()[i] = static_cast<double>(node[i]) * inv_n;
  for (std::size_t i = 0; i < pair.size(); ++i) eta.pair_means()[i] = static_cast<double>(pair[i]) * inv_n;
  return eta;
}

}  // namespace isingcut
