#include "pdmm/problem.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "pdmm/errors.hpp"

namespace pdmm {

namespace {

double ipow(double base, int e) {
  double r = 1.0;
  for (int k = 0; k < e; ++k) r *= base;
  return r;
}

bool is_signed_identity(const Eigen::MatrixXd& A, double sign) {
  if (A.rows() != A.cols()) return false;
  return A == sign * Eigen::MatrixXd::Identity(A.rows(), A.cols());
}

}  // namespace

int objective_dim(const NodeObjective& f) {
  return std::visit(
      [](const auto& v) -> int {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Quadratic>)
          return static_cast<int>(v.q.size());
        else
          return static_cast<int>(v.a.size());
      },
      f);
}

double objective_value(const NodeObjective& f, const Eigen::VectorXd& x) {
  return std::visit(
      [&](const auto& v) -> double {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          return 0.5 * x.dot(v.Q * x) - v.q.dot(x);
        } else if constexpr (std::is_same_v<T, PNormPower>) {
          double s = 0.0;
          for (int k = 0; k < x.size(); ++k) s += ipow(std::abs(x[k] - v.a[k]), v.p);
          return s;
        } else {
          return (x - v.a).cwiseAbs().sum();
        }
      },
      f);
}

Eigen::VectorXd objective_gradient(const NodeObjective& f, const Eigen::VectorXd& x) {
  return std::visit(
      [&](const auto& v) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Quadratic>) {
          return v.Q * x - v.q;
        } else if constexpr (std::is_same_v<T, PNormPower>) {
          Eigen::VectorXd g(x.size());
          for (int k = 0; k < x.size(); ++k) {
            const double u = x[k] - v.a[k];
            g[k] = v.p * ipow(std::abs(u), v.p - 1) * (u < 0 ? -1.0 : (u > 0 ? 1.0 : 0.0));
          }
          return g;
        } else {
          throw SolverError("gradient of an l1 objective is undefined");
        }
      },
      f);
}

int EdgeLayout::directed_index(int i, int j) const {
  for (int idx : node_directed[i])
    if (directed[idx].to == j) return idx;
  return -1;
}

ProblemInstance ProblemInstance::build(Graph g, std::vector<NodeObjective> objectives,
                                       std::vector<EdgeConstraint> constraints) {
  const int n = g.n_nodes;
  if (static_cast<int>(objectives.size()) != n)
    throw StructuralError("expected one objective per node");
  if (constraints.size() != g.edges.size())
    throw StructuralError("expected one constraint per undirected edge");
  for (std::size_t u = 0; u < constraints.size(); ++u) {
    auto& c = constraints[u];
    if (c.i > c.j) {
      std::swap(c.i, c.j);
      std::swap(c.A_ij, c.A_ji);
    }
    if (std::pair{c.i, c.j} != g.edges[u])
      throw StructuralError("constraint order must match graph.edges");
    if (c.b.size() == 0) throw StructuralError("empty constraint block");
  }

  ProblemInstance prob;
  prob.graph = std::move(g);
  prob.objectives = std::move(objectives);
  prob.constraints = std::move(constraints);

  std::map<std::pair<int, int>, int> undirected_index;
  for (std::size_t u = 0; u < prob.graph.edges.size(); ++u)
    undirected_index[prob.graph.edges[u]] = static_cast<int>(u);

  EdgeLayout& lay = prob.layout;
  lay.node_offset.assign(n + 1, 0);
  for (int i = 0; i < n; ++i)
    lay.node_offset[i + 1] = lay.node_offset[i] + objective_dim(prob.objectives[i]);
  lay.node_dim_total = lay.node_offset[n];

  lay.node_edge_offset.assign(n + 1, 0);
  lay.node_directed.assign(n, {});
  int offset = 0;
  for (int i = 0; i < n; ++i) {
    lay.node_edge_offset[i] = offset;
    for (int j : prob.graph.adjacency[i]) {
      const int u = undirected_index.at({std::min(i, j), std::max(i, j)});
      DirectedEdgeBlock e;
      e.from = i;
      e.to = j;
      e.undirected = u;
      e.offset = offset;
      e.size = static_cast<int>(prob.constraints[u].b.size());
      lay.node_directed[i].push_back(static_cast<int>(lay.directed.size()));
      lay.directed.push_back(e);
      offset += e.size;
    }
  }
  lay.node_edge_offset[n] = offset;
  lay.edge_dim = offset;
  for (auto& e : lay.directed) e.partner = lay.directed_index(e.to, e.from);

  prob.node_stack.resize(n);
  prob.node_gram.resize(n);
  for (int i = 0; i < n; ++i) {
    const int rows = lay.node_edge_rows(i);
    const int cols = lay.node_dim(i);
    Eigen::MatrixXd stack = Eigen::MatrixXd::Zero(rows, cols);
    for (int idx : lay.node_directed[i]) {
      const auto& e = lay.directed[idx];
      const Eigen::MatrixXd& A = prob.directed_block(e);
      if (A.cols() == cols)  // wrong widths are reported by validate()
        stack.block(e.offset - lay.node_edge_offset[i], 0, e.size, cols) = A;
    }
    prob.node_stack[i] = stack;
    prob.node_gram[i] = stack.transpose() * stack;
  }

  prob.consensus_like = true;
  for (const auto& c : prob.constraints) {
    if (!(is_signed_identity(c.A_ij, 1.0) && is_signed_identity(c.A_ji, -1.0) &&
          c.b.isZero(0.0))) {
      prob.consensus_like = false;
      break;
    }
  }
  return prob;
}

const Eigen::MatrixXd& ProblemInstance::directed_block(const DirectedEdgeBlock& e) const {
  const EdgeConstraint& c = constraints[e.undirected];
  return e.from < e.to ? c.A_ij : c.A_ji;
}

Eigen::VectorXd ProblemInstance::node_d(int i) const {
  Eigen::VectorXd d(layout.node_edge_rows(i));
  for (int idx : layout.node_directed[i]) {
    const auto& e = layout.directed[idx];
    d.segment(e.offset - layout.node_edge_offset[i], e.size) = 0.5 * constraints[e.undirected].b;
  }
  return d;
}

double ProblemInstance::objective_total(const Eigen::VectorXd& x) const {
  double s = 0.0;
  for (int i = 0; i < graph.n_nodes; ++i) s += objective_value(objectives[i], node_slice(x, i));
  return s;
}

Eigen::VectorXd ProblemInstance::gradient_total(const Eigen::VectorXd& x) const {
  Eigen::VectorXd g(layout.node_dim_total);
  for (int i = 0; i < graph.n_nodes; ++i)
    g.segment(layout.node_offset[i], layout.node_dim(i)) =
        objective_gradient(objectives[i], node_slice(x, i));
  return g;
}

Eigen::VectorXd ProblemInstance::node_slice(const Eigen::VectorXd& x, int i) const {
  return x.segment(layout.node_offset[i], layout.node_dim(i));
}

std::vector<EdgeConstraint> build_consensus_constraints(const Graph& g, int dim) {
  if (dim < 1) throw ParameterError("consensus dimension must be >= 1");
  std::vector<EdgeConstraint> constraints;
  constraints.reserve(g.edges.size());
  for (const auto& [i, j] : g.edges) {
    EdgeConstraint c;
    c.i = i;
    c.j = j;
    c.A_ij = Eigen::MatrixXd::Identity(dim, dim);
    c.A_ji = -Eigen::MatrixXd::Identity(dim, dim);
    c.b = Eigen::VectorXd::Zero(dim);
    constraints.push_back(std::move(c));
  }
  return constraints;
}

Eigen::MatrixXd assemble_C(const ProblemInstance& prob) {
  const auto& lay = prob.layout;
  Eigen::MatrixXd C = Eigen::MatrixXd::Zero(lay.edge_dim, lay.node_dim_total);
  for (const auto& e : lay.directed) {
    const Eigen::MatrixXd& A = prob.directed_block(e);
    const int cols = lay.node_dim(e.from);
    if (A.rows() != e.size || A.cols() != cols)
      throw StructuralError("constraint block on edge (" + std::to_string(e.from) + "|" +
                            std::to_string(e.to) + ") has inconsistent dimensions");
    C.block(e.offset, lay.node_offset[e.from], e.size, cols) = A;
  }
  return C;
}

Eigen::MatrixXd assemble_P(const EdgeLayout& lay) {
  Eigen::MatrixXd P = Eigen::MatrixXd::Zero(lay.edge_dim, lay.edge_dim);
  for (const auto& e : lay.directed) {
    const auto& partner = lay.directed[e.partner];
    P.block(e.offset, partner.offset, e.size, partner.size) =
        Eigen::MatrixXd::Identity(e.size, e.size);
  }
  return P;
}

Eigen::VectorXd assemble_d(const ProblemInstance& prob) {
  const auto& lay = prob.layout;
  Eigen::VectorXd d(lay.edge_dim);
  for (const auto& e : lay.directed)
    d.segment(e.offset, e.size) = 0.5 * prob.constraints[e.undirected].b;
  return d;
}

Eigen::VectorXd apply_C(const ProblemInstance& prob, const Eigen::VectorXd& x) {
  const auto& lay = prob.layout;
  Eigen::VectorXd out(lay.edge_dim);
  for (const auto& e : lay.directed)
    out.segment(e.offset, e.size).noalias() =
        prob.directed_block(e) * x.segment(lay.node_offset[e.from], lay.node_dim(e.from));
  return out;
}

Eigen::VectorXd apply_C_transpose(const ProblemInstance& prob, const Eigen::VectorXd& v) {
  const auto& lay = prob.layout;
  Eigen::VectorXd out = Eigen::VectorXd::Zero(lay.node_dim_total);
  for (const auto& e : lay.directed)
    out.segment(lay.node_offset[e.from], lay.node_dim(e.from)).noalias() +=
        prob.directed_block(e).transpose() * v.segment(e.offset, e.size);
  return out;
}

Eigen::VectorXd apply_P(const EdgeLayout& lay, const Eigen::VectorXd& v) {
  Eigen::VectorXd out(lay.edge_dim);
  for (const auto& e : lay.directed)
    out.segment(e.offset, e.size) = v.segment(lay.directed[e.partner].offset, e.size);
  return out;
}

std::vector<std::string> validate(const ProblemInstance& prob) {
  std::vector<std::string> violations;
  const auto& lay = prob.layout;

  for (std::size_t u = 0; u < prob.constraints.size(); ++u) {
    const auto& c = prob.constraints[u];
    const int rows = static_cast<int>(c.b.size());
    const std::string tag = "edge (" + std::to_string(c.i) + "," + std::to_string(c.j) + ")";
    if (c.A_ij.rows() != rows || c.A_ji.rows() != rows)
      violations.push_back(tag + ": row counts of A_ij, A_ji and b disagree");
    if (c.A_ij.cols() != lay.node_dim(c.i))
      violations.push_back(tag + ": A_ij has " + std::to_string(c.A_ij.cols()) +
                           " columns, node dimension is " + std::to_string(lay.node_dim(c.i)));
    if (c.A_ji.cols() != lay.node_dim(c.j))
      violations.push_back(tag + ": A_ji has " + std::to_string(c.A_ji.cols()) +
                           " columns, node dimension is " + std::to_string(lay.node_dim(c.j)));
  }

  for (int i = 0; i < prob.graph.n_nodes; ++i) {
    if (lay.node_dim(i) < 1)
      violations.push_back("node " + std::to_string(i) + ": empty variable");
    if (const auto* quad = std::get_if<Quadratic>(&prob.objectives[i])) {
      if (quad->Q.rows() != quad->Q.cols() || quad->Q.rows() != lay.node_dim(i)) {
        violations.push_back("node " + std::to_string(i) + ": Q dimension mismatch");
        continue;
      }
      const double asym = (quad->Q - quad->Q.transpose()).cwiseAbs().maxCoeff();
      if (asym > 1e-12 * std::max(1.0, quad->Q.cwiseAbs().maxCoeff()))
        violations.push_back("node " + std::to_string(i) + ": Q is not symmetric");
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(quad->Q);
      const double top = std::max(std::abs(eig.eigenvalues().minCoeff()),
                                  std::abs(eig.eigenvalues().maxCoeff()));
      if (eig.eigenvalues().minCoeff() < -1e-10 * top)
        violations.push_back("node " + std::to_string(i) + ": Q is not positive semidefinite");
    } else if (const auto* pn = std::get_if<PNormPower>(&prob.objectives[i])) {
      if (pn->p < 2)
        violations.push_back("node " + std::to_string(i) + ": p-norm power needs p >= 2");
    }
  }

  if (!is_connected(prob.graph)) violations.push_back("graph is not connected");
  return violations;
}

}  // namespace pdmm
