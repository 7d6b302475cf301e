#pragma once

#include <Eigen/Dense>
#include <string>
#include <variant>
#include <vector>

#include "pdmm/graph.hpp"

namespace pdmm {

// f_i(x) = 0.5 x'Qx - q'x with Q symmetric PSD.
struct Quadratic {
  Eigen::MatrixXd Q;
  Eigen::VectorXd q;
};

// f_i(x) = ||x - a||_p^p for integer p >= 2.
struct PNormPower {
  int p = 2;
  Eigen::VectorXd a;
};

// f_i(x) = ||x - a||_1.
struct L1 {
  Eigen::VectorXd a;
};

using NodeObjective = std::variant<Quadratic, PNormPower, L1>;

int objective_dim(const NodeObjective& f);
double objective_value(const NodeObjective& f, const Eigen::VectorXd& x);
// Throws SolverError for L1 (nondifferentiable).
Eigen::VectorXd objective_gradient(const NodeObjective& f, const Eigen::VectorXd& x);

// Affine coupling A_{i|j} x_i + A_{j|i} x_j = b along an undirected edge,
// stored once for i < j.
struct EdgeConstraint {
  int i = 0, j = 0;      // i < j
  Eigen::MatrixXd A_ij;  // rows x M_i, the block applied to x_i
  Eigen::MatrixXd A_ji;  // rows x M_j, the block applied to x_j
  Eigen::VectorXd b;
};

struct DirectedEdgeBlock {
  int from = 0, to = 0;
  int undirected = 0;  // index into ProblemInstance::constraints
  int offset = 0;      // block offset into R^{M_E}
  int size = 0;        // M_ij
  int partner = 0;     // index of the (to|from) block
};

// Canonical ordering of directed-edge blocks: (i|j) for i ascending then j
// ascending over existing edges. This is the indexing contract shared by
// C, P, d and every iterate vector in R^{M_E}.
struct EdgeLayout {
  std::vector<DirectedEdgeBlock> directed;
  std::vector<int> node_offset;       // size N+1, offsets into R^{M_V}
  std::vector<int> node_edge_offset;  // size N+1, offset of node's first (i|.) block
  std::vector<std::vector<int>> node_directed;  // per node, directed indices, `to` ascending
  int edge_dim = 0;  // M_E
  int node_dim_total = 0;  // M_V

  int node_dim(int i) const { return node_offset[i + 1] - node_offset[i]; }
  int node_edge_rows(int i) const { return node_edge_offset[i + 1] - node_edge_offset[i]; }
  int directed_index(int i, int j) const;  // -1 when the edge does not exist
};

struct ProblemInstance {
  Graph graph;
  std::vector<NodeObjective> objectives;   // one per node
  std::vector<EdgeConstraint> constraints; // aligned with graph.edges
  EdgeLayout layout;

  // Per-node stacked constraint blocks: C_i holds the A_{i|j} for j in N(i)
  // ascending. Gram caches C_i' * C_i.
  std::vector<Eigen::MatrixXd> node_stack;
  std::vector<Eigen::MatrixXd> node_gram;
  bool consensus_like = false;  // every block is +/-I and every b is zero

  // Derives the layout and caches. Throws StructuralError when the inputs are
  // too malformed to index (counts not matching the graph); softer issues are
  // left for validate().
  static ProblemInstance build(Graph g, std::vector<NodeObjective> objectives,
                               std::vector<EdgeConstraint> constraints);

  const EdgeConstraint& edge(int undirected) const { return constraints[undirected]; }
  // A_{from|to} for a directed block.
  const Eigen::MatrixXd& directed_block(const DirectedEdgeBlock& e) const;
  // Node-i block of d, i.e. the stack of b_ij / 2 for j in N(i) ascending.
  Eigen::VectorXd node_d(int i) const;

  double objective_total(const Eigen::VectorXd& x) const;
  Eigen::VectorXd gradient_total(const Eigen::VectorXd& x) const;
  Eigen::VectorXd node_slice(const Eigen::VectorXd& x, int i) const;
};

// Consensus x_i - x_j = 0: the lower-index endpoint gets +I, the other -I,
// b = 0. Any consistent sign choice satisfies the constraint; this one is
// fixed so tests can freeze expected matrices.
std::vector<EdgeConstraint> build_consensus_constraints(const Graph& g, int dim);

Eigen::MatrixXd assemble_C(const ProblemInstance& prob);
Eigen::MatrixXd assemble_P(const EdgeLayout& layout);
Eigen::VectorXd assemble_d(const ProblemInstance& prob);

// Blockwise equivalents of C*x, C'*v and P*v. These evaluate per directed
// edge in layout order, which keeps the matrix-form engine and the
// distributed simulator bit-identical.
Eigen::VectorXd apply_C(const ProblemInstance& prob, const Eigen::VectorXd& x);
Eigen::VectorXd apply_C_transpose(const ProblemInstance& prob, const Eigen::VectorXd& v);
Eigen::VectorXd apply_P(const EdgeLayout& layout, const Eigen::VectorXd& v);

// Dimension, PSD and connectivity checks; returns human-readable violations
// instead of throwing.
std::vector<std::string> validate(const ProblemInstance& prob);

}  // namespace pdmm
