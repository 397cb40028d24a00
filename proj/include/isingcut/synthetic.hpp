#pragma once

#include <cstdint>
#include <initializer_list>
#include <random>
#include <string>
#include <vector>

#include "isingcut/dataset.hpp"
#include "isingcut/model.hpp"

namespace isingcut {

using Rng = std::mt19937_64;
inline constexpr const char* kRngName = "mt19937_64";

/// Mixes a base seed with a list of indices (splitmix64 chaining).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> indices);

enum class GraphKind { kGrid4, kRandomSparse, kDenseSubgraphs };

std::string to_string(GraphKind kind);
GraphKind parse_graph_kind(const std::string& name);

struct GraphSpec {
  GraphKind kind = GraphKind::kRandomSparse;
  int p = 0;
  int n_edges = 0;
  int max_degree = 0;  // 0 = unbounded (random_sparse only)
  int block_size = 8;  // dense_subgraphs
  int n_blocks = 0;    // dense_subgraphs
  int rows = 0;        // grid4
  int cols = 0;        // grid4
};

/// Throws std::invalid_argument when the fields are inconsistent with the kind.
void validate(const GraphSpec& spec);

/// Edge list of the requested family, sorted.
///
/// - grid4: 4-neighbour lattice, node index r*cols + c.
/// - random_sparse: n_edges distinct uniform pairs; pairs that would push an
///   endpoint past max_degree are rejected. Gives up after 100*n_edges draws.
/// - dense_subgraphs: n_blocks disjoint cliques of block_size on the first
///   nodes, then uniform extra pairs until n_edges.
std::vector<Edge> make_graph(const GraphSpec& spec, std::uint64_t seed);

/// theta_v ~ U[-1, 1] for every node, theta_uv ~ U[-xi, xi] for every edge.
IsingModel assign_parameters(int p, const std::vector<Edge>& edges, double xi, std::uint64_t seed);

struct SamplerConfig {
  int n = 1;
  int burn_in = 1000;
  int thin = 5;
  std::uint64_t seed = 0;
};

/// Single-chain systematic-scan Gibbs sampler. After burn_in sweeps one state
/// is kept every thin sweeps until n are collected.
Dataset gibbs_sample(const IsingModel& model, const SamplerConfig& cfg);

/// Stable 64-bit fingerprint of a model's parameters, as 16 hex digits.
std::string model_hash(const IsingModel& model);

}  // namespace isingcut
