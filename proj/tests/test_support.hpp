#pragma once

// Shared instance builders for the test suites.

#include <Eigen/Dense>
#include <utility>
#include <vector>

#include "pdmm/graph.hpp"
#include "pdmm/problem.hpp"
#include "pdmm/rng.hpp"

namespace pdmm::testing {

inline Eigen::VectorXd normal_vector(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

inline Eigen::MatrixXd normal_matrix(Rng& rng, int rows, int cols) {
  Eigen::MatrixXd m(rows, cols);
  for (int r = 0; r < rows; ++r)
    for (int c = 0; c < cols; ++c) m(r, c) = rng.normal();
  return m;
}

inline Eigen::MatrixXd spd_matrix(Rng& rng, int dim, double shift = 1.0) {
  const Eigen::MatrixXd g = normal_matrix(rng, dim, dim);
  return g.transpose() * g + shift * Eigen::MatrixXd::Identity(dim, dim);
}

// The worked two-node instance: scalar consensus, Q = 1 at both nodes,
// q = (0, 2); the shared optimum is x = 1.
inline ProblemInstance two_node_quadratic() {
  Graph g = Graph::from_edges(2, {{0, 1}});
  std::vector<NodeObjective> objectives;
  objectives.emplace_back(Quadratic{Eigen::MatrixXd::Constant(1, 1, 1.0),
                                    Eigen::VectorXd::Zero(1)});
  objectives.emplace_back(Quadratic{Eigen::MatrixXd::Constant(1, 1, 1.0),
                                    Eigen::VectorXd::Constant(1, 2.0)});
  auto constraints = build_consensus_constraints(g, 1);
  return ProblemInstance::build(std::move(g), std::move(objectives), std::move(constraints));
}

inline ProblemInstance quadratic_consensus(const Graph& g, int dim, Rng& rng,
                                           double shift = 1.0) {
  std::vector<NodeObjective> objectives;
  for (int i = 0; i < g.n_nodes; ++i)
    objectives.emplace_back(Quadratic{spd_matrix(rng, dim, shift), normal_vector(rng, dim)});
  return ProblemInstance::build(g, std::move(objectives), build_consensus_constraints(g, dim));
}

inline ProblemInstance pnorm_consensus(const Graph& g, int dim, int p, Rng& rng) {
  std::vector<NodeObjective> objectives;
  for (int i = 0; i < g.n_nodes; ++i)
    objectives.emplace_back(PNormPower{p, normal_vector(rng, dim)});
  return ProblemInstance::build(g, std::move(objectives), build_consensus_constraints(g, dim));
}

inline ProblemInstance l1_consensus(const Graph& g, int dim, Rng& rng) {
  std::vector<NodeObjective> objectives;
  for (int i = 0; i < g.n_nodes; ++i) objectives.emplace_back(L1{normal_vector(rng, dim)});
  return ProblemInstance::build(g, std::move(objectives), build_consensus_constraints(g, dim));
}

// Quadratic objectives with general affine edge constraints; node and edge
// block dimensions vary. b is chosen as A_ij x~_i + A_ji x~_j for a random
// x~, so a feasible point exists by construction.
inline ProblemInstance random_general_quadratic(const Graph& g, Rng& rng) {
  std::vector<int> dims(g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i) dims[i] = 1 + static_cast<int>(rng.below(3));
  std::vector<NodeObjective> objectives;
  std::vector<Eigen::VectorXd> feasible(g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i) {
    objectives.emplace_back(Quadratic{spd_matrix(rng, dims[i]), normal_vector(rng, dims[i])});
    feasible[i] = normal_vector(rng, dims[i]);
  }
  std::vector<EdgeConstraint> constraints;
  for (const auto& [i, j] : g.edges) {
    EdgeConstraint c;
    c.i = i;
    c.j = j;
    const int rows = 1 + static_cast<int>(rng.below(2));
    c.A_ij = normal_matrix(rng, rows, dims[i]);
    c.A_ji = normal_matrix(rng, rows, dims[j]);
    c.b = c.A_ij * feasible[i] + c.A_ji * feasible[j];
    constraints.push_back(std::move(c));
  }
  return ProblemInstance::build(g, std::move(objectives), std::move(constraints));
}

}  // namespace pdmm::testing
