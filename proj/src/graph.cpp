#include "pdmm/graph.hpp"

#include <algorithm>
#include <deque>
#include <set>
#include <string>

#include "pdmm/errors.hpp"
#include "pdmm/rng.hpp"

namespace pdmm {

Graph Graph::from_edges(int n_nodes, std::vector<std::pair<int, int>> edges) {
  if (n_nodes < 1) throw StructuralError("graph needs at least one node");
  std::set<std::pair<int, int>> seen;
  for (auto& [i, j] : edges) {
    if (i == j) throw StructuralError("self-loop at node " + std::to_string(i));
    if (i > j) std::swap(i, j);
    if (i < 0 || j >= n_nodes)
      throw StructuralError("edge (" + std::to_string(i) + "," + std::to_string(j) +
                            ") out of range");
    if (!seen.insert({i, j}).second)
      throw StructuralError("duplicate edge (" + std::to_string(i) + "," +
                            std::to_string(j) + ")");
  }
  Graph g;
  g.n_nodes = n_nodes;
  g.edges.assign(seen.begin(), seen.end());
  g.adjacency.assign(n_nodes, {});
  for (const auto& [i, j] : g.edges) {
    g.adjacency[i].push_back(j);
    g.adjacency[j].push_back(i);
  }
  for (auto& nb : g.adjacency) std::sort(nb.begin(), nb.end());
  return g;
}

Graph er_generate(int n, double p, std::uint64_t seed) {
  if (n < 1) throw ParameterError("node count must be >= 1");
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("edge probability must lie in [0,1]");
  Rng rng(seed);
  std::vector<std::pair<int, int>> edges;
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (rng.uniform01() < p) edges.emplace_back(i, j);
  return Graph::from_edges(n, std::move(edges));
}

std::vector<int> bfs_distances(const Graph& g, int source) {
  std::vector<int> dist(g.n_nodes, -1);
  dist[source] = 0;
  std::deque<int> queue{source};
  while (!queue.empty()) {
    const int v = queue.front();
    queue.pop_front();
    for (int u : g.adjacency[v]) {
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        queue.push_back(u);
      }
    }
  }
  return dist;
}

bool is_connected(const Graph& g) {
  const auto dist = bfs_distances(g, 0);
  return std::none_of(dist.begin(), dist.end(), [](int d) { return d < 0; });
}

int diameter(const Graph& g) {
  int best = 0;
  for (int s = 0; s < g.n_nodes; ++s) {
    for (int d : bfs_distances(g, s)) {
      if (d < 0) throw StructuralError("diameter undefined: graph is disconnected");
      best = std::max(best, d);
    }
  }
  return best;
}

}  // namespace pdmm
