#pragma once

#include <cstdint>
#include <utility>
#include <vector>

namespace pdmm {

// Undirected graph with dense node indices 0..N-1. Immutable after
// construction; adjacency lists are sorted ascending, which fixes the
// directed-edge stacking order used everywhere downstream.
struct Graph {
  int n_nodes = 0;
  std::vector<std::pair<int, int>> edges;    // normalized i < j, lexicographic
  std::vector<std::vector<int>> adjacency;   // sorted ascending, symmetric

  // Normalizes, validates (no self-loops, no duplicates, indices in range)
  // and builds adjacency. Throws StructuralError on violations.
  static Graph from_edges(int n_nodes, std::vector<std::pair<int, int>> edges);

  int degree(int v) const { return static_cast<int>(adjacency[v].size()); }
};

// G(n, p): every unordered pair is included independently with probability p.
// Deterministic for a fixed seed; no connectivity rejection.
Graph er_generate(int n, double p, std::uint64_t seed);

// BFS hop distances from `source`; -1 marks unreachable nodes.
std::vector<int> bfs_distances(const Graph& g, int source);

bool is_connected(const Graph& g);

// Maximum shortest-path hop count; throws StructuralError when disconnected.
int diameter(const Graph& g);

}  // namespace pdmm
