#pragma once

#include <vector>

#include "pdmm/graph.hpp"
#include "pdmm/problem.hpp"

namespace pdmm {

// Per-node ingredients of the optimal step size: extremes of the local
// constraint block's singular values and of the local Hessian spectrum.
struct NodeEstimates {
  double sigma_max = 0.0;
  double sigma_min_nz = 0.0;
  double mu = 0.0;
  double beta = 0.0;
};

// Extremes of sigma(C_i) and, for quadratic objectives, the eigenvalue range
// of Q_i. Throws SolverError for an all-zero constraint block and
// ParameterError for objective families without curvature constants.
NodeEstimates local_init(const ProblemInstance& prob, int node);

struct DiffusionResult {
  std::vector<NodeEstimates> estimates;               // after the final round
  std::vector<double> rho_star;                       // per node
  std::vector<std::vector<NodeEstimates>> rounds;     // rounds[0] = initial values
  long long messages = 0;                             // total transmissions
  bool insufficient_rounds = false;                   // rounds < diameter
};

// Round-synchronous max/min diffusion: every round each node replaces
// sigma_max/beta by the maximum and sigma_min_nz/mu by the minimum over
// itself and its neighbors. After diameter-many rounds every node holds the
// global extremes and computes the identical rho*.
DiffusionResult diffuse(const Graph& g, const std::vector<NodeEstimates>& init, int rounds);

// local_init on every node followed by diffuse over diameter-many rounds; the
// one-shot setup phase run before iterating.
DiffusionResult select_stepsize(const ProblemInstance& prob);

}  // namespace pdmm
