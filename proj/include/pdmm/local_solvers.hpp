#pragma once

#include <Eigen/Dense>
#include <functional>

#include "pdmm/problem.hpp"

namespace pdmm {

// Per-node slice of the iteration state consumed by one primal update. Each
// update minimizes  f_i(x) - <C_i' z_i, x> + (rho/2) ||C_i x - d_i||^2.
struct LocalUpdateInput {
  int node = 0;
  Eigen::MatrixXd C_i;  // stacked A_{i|j} blocks, j ascending
  Eigen::VectorXd d_i;  // matching stack of b_ij / 2 (or a caller-supplied target)
  Eigen::VectorXd z_i;  // matching stack of z blocks
  double rho = 1.0;
};

// Root of a nondecreasing scalar derivative. Brackets by geometric expansion
// from `hint` (at most 200 doublings), then bisects until
// |derivative| <= 1e-12 * (1 + |derivative_scale|) or the bracket is narrower
// than 1e-14. Throws SolverError when no sign change is found.
double scalar_convex_minimize(const std::function<double(double)>& derivative, double hint,
                              double derivative_scale = 0.0);

// Exact minimizer x = (Q + rho C'C)^{-1} (q + C'z + rho C'd); refuses results
// whose linear residual exceeds 1e-10 * ||rhs||.
Eigen::VectorXd primal_update_quadratic(const Quadratic& f, const LocalUpdateInput& in);

// Coordinatewise soft-threshold solution; requires C_i to stack signed
// identity blocks (consensus constraints), which makes coordinates separable.
Eigen::VectorXd primal_update_l1(const L1& f, const LocalUpdateInput& in);

// Coordinatewise safeguarded root-finding on the strictly increasing update
// derivative; same consensus-constraint requirement as the l1 solver.
Eigen::VectorXd primal_update_pnorm(const PNormPower& f, const LocalUpdateInput& in);

// Dispatch on the objective family.
Eigen::VectorXd primal_update(const NodeObjective& f, const LocalUpdateInput& in);

// sign(u) * |u|^e for integer e >= 0.
double signed_power(double u, int e);

}  // namespace pdmm
