#include "pdmm/stepsize.hpp"

#include <algorithm>
#include <string>

#include "pdmm/analysis.hpp"
#include "pdmm/errors.hpp"

namespace pdmm {

NodeEstimates local_init(const ProblemInstance& prob, int node) {
  const Eigen::MatrixXd& stack = prob.node_stack[node];
  if (stack.rows() == 0 || stack.isZero(0.0))
    throw SolverError("node " + std::to_string(node) + " has a degenerate constraint block");
  NodeEstimates est;
  const SingularExtremes se = singular_extremes(stack);
  est.sigma_max = se.sigma_max;
  est.sigma_min_nz = se.sigma_min_nz;
  const auto* quad = std::get_if<Quadratic>(&prob.objectives[node]);
  if (!quad)
    throw ParameterError("step-size selection needs quadratic objectives; node " +
                         std::to_string(node) + " has none");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(quad->Q);
  est.mu = eig.eigenvalues().minCoeff();
  est.beta = eig.eigenvalues().maxCoeff();
  return est;
}

DiffusionResult diffuse(const Graph& g, const std::vector<NodeEstimates>& init, int rounds) {
  if (static_cast<int>(init.size()) != g.n_nodes)
    throw ParameterError("one estimate per node expected");
  if (rounds < 0) throw ParameterError("round count must be nonnegative");

  DiffusionResult out;
  out.rounds.push_back(init);
  std::vector<NodeEstimates> current = init;
  for (int r = 0; r < rounds; ++r) {
    std::vector<NodeEstimates> next(current.size());
    for (int i = 0; i < g.n_nodes; ++i) {
      NodeEstimates e = current[i];
      for (int j : g.adjacency[i]) {
        e.sigma_max = std::max(e.sigma_max, current[j].sigma_max);
        e.sigma_min_nz = std::min(e.sigma_min_nz, current[j].sigma_min_nz);
        e.mu = std::min(e.mu, current[j].mu);
        e.beta = std::max(e.beta, current[j].beta);
      }
      next[i] = e;
      out.messages += g.degree(i);
    }
    current = std::move(next);
    out.rounds.push_back(current);
  }
  out.estimates = current;
  out.rho_star.resize(g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i)
    out.rho_star[i] = optimal_rho(current[i].mu, current[i].beta, current[i].sigma_max,
                                  current[i].sigma_min_nz)
                          .rho_star;
  out.insufficient_rounds = !is_connected(g) || rounds < diameter(g);
  return out;
}

DiffusionResult select_stepsize(const ProblemInstance& prob) {
  std::vector<NodeEstimates> init(prob.graph.n_nodes);
  for (int i = 0; i < prob.graph.n_nodes; ++i) init[i] = local_init(prob, i);
  return diffuse(prob.graph, init, diameter(prob.graph));
}

}  // namespace pdmm
