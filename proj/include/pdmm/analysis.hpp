#pragma once

#include <Eigen/Dense>
#include <limits>
#include <optional>

#include "pdmm/pdmm.hpp"
#include "pdmm/problem.hpp"

namespace pdmm {

struct SingularExtremes {
  double sigma_max = 0.0;
  double sigma_min_nz = 0.0;
};

// Largest and smallest nonzero singular values; the nonzero threshold is
// 1e-10 * sigma_max. Throws SolverError for an all-zero matrix.
SingularExtremes singular_extremes(const Eigen::MatrixXd& C);

// Orthonormal basis of the column space, rank-truncated at 1e-10 * sigma_max.
Eigen::MatrixXd range_basis(const Eigen::MatrixXd& M);

// Smallest principal angle above 1e-7 rad between the column spaces of two
// orthonormal bases. Returns pi/2 when no such angle exists (the subspaces
// coincide up to the tolerance) or when all angles are right angles.
double friedrichs_angle_from_bases(const Eigen::MatrixXd& U, const Eigen::MatrixXd& W);

// Friedrichs angle between ran(C) and ran(PC).
double friedrichs_angle(const Eigen::MatrixXd& C, const Eigen::MatrixXd& P);

// Subspace contraction factor of the reflected resolvent:
// max((rho s_max^2/mu - 1)/(rho s_max^2/mu + 1),
//     (1 - rho s_min^2/beta)/(1 + rho s_min^2/beta)), always in [0, 1).
double contraction_delta(double rho, double mu, double beta, double sigma_max,
                         double sigma_min_nz);

// Two-step rate bound: the larger root
// delta + c (c/2 +- sqrt(c^2/4 + delta)) with c = (1-delta) cos(theta_F),
// in absolute value. Strictly below 1 for delta in [0,1), theta_F in (0, pi/2].
double gap_rate_gamma(double delta, double theta_F);

struct OptimalRho {
  double rho_star = 0.0;
  double delta_star = 0.0;
  double kappa = 0.0;
};

// rho* = sqrt(beta mu) / (s_max s_min), kappa = s_max^2 beta / (s_min^2 mu),
// delta* = (sqrt(kappa)-1)/(sqrt(kappa)+1); contraction_delta(rho*) == delta*.
OptimalRho optimal_rho(double mu, double beta, double sigma_max, double sigma_min_nz);

// Inverse of gap_rate_gamma in delta: the contraction factor whose rate bound
// equals `target` at the given angle, found by bisection to 1e-13. Throws
// SolverError when cos^2(theta_F) already exceeds the target.
double delta_for_rate_target(double target, double theta_F);

// Reference primal solution. Quadratic objectives: consensus -> sum solve,
// general affine constraints -> KKT system. p-norm / l1 objectives require
// consensus constraints and reduce to per-coordinate scalar problems.
Eigen::VectorXd centralized_oracle(const ProblemInstance& prob);

// Minimum / maximum eigenvalue of the node Hessians; quadratic-only.
struct ConvexityBounds {
  double mu = 0.0;
  double beta = 0.0;
};
ConvexityBounds quadratic_convexity_bounds(const ProblemInstance& prob);

struct FixedPointRef {
  Eigen::VectorXd x_star;
  Eigen::VectorXd z_tilde_0;  // reference for even iterates
  Eigen::VectorXd z_tilde_1;  // = T(z_tilde_0), reference for odd iterates
  Eigen::VectorXd g_hat;      // stacked right-hand side with the primal shift
  // True when the shifted right-hand side already produced a consistent
  // system; otherwise the stationarity form (the closed form of the two-step
  // iteration limit) was used.
  bool shifted_rhs_consistent = false;
};

// Builds the auxiliary reference points: the minimum-norm solution of
// [C PC]' w = g plus the projection of z0 onto ker(C') intersect ker((PC)'),
// the component the iteration never moves. Requires a differentiable,
// strictly convex objective (quadratic or p-norm families).
FixedPointRef reference_point(const ProblemInstance& prob, double rho,
                              const Eigen::VectorXd& x_star, const Eigen::VectorXd& z0);

// epsilon = (s_max^2 / (rho s_min^2)) ||z0 - z_tilde_0||^2 / gamma.
double epsilon_bound(double sigma_max, double sigma_min_nz, double rho, double gamma,
                     const Eigen::VectorXd& z0, const Eigen::VectorXd& z_tilde_0);

struct ErrorRecord {
  double aux_even = std::numeric_limits<double>::quiet_NaN();
  double aux_odd = std::numeric_limits<double>::quiet_NaN();
  double aux_selected = std::numeric_limits<double>::quiet_NaN();  // parity of k
  double primal_sq = std::numeric_limits<double>::quiet_NaN();
  double objective_subopt = std::numeric_limits<double>::quiet_NaN();
};

ErrorRecord error_metrics(const ProblemInstance& prob, const PdmmState& state,
                          const FixedPointRef& ref, std::optional<double> f_star = {});

struct SpectralReport {
  double sigma_max = std::numeric_limits<double>::quiet_NaN();
  double sigma_min_nz = std::numeric_limits<double>::quiet_NaN();
  double mu = std::numeric_limits<double>::quiet_NaN();
  double beta = std::numeric_limits<double>::quiet_NaN();
  double kappa = std::numeric_limits<double>::quiet_NaN();
  double theta_F = std::numeric_limits<double>::quiet_NaN();
  double delta = std::numeric_limits<double>::quiet_NaN();
  double gamma = std::numeric_limits<double>::quiet_NaN();
  double rho_star = std::numeric_limits<double>::quiet_NaN();
  double rho = std::numeric_limits<double>::quiet_NaN();  // value delta/gamma refer to
  double epsilon = std::numeric_limits<double>::quiet_NaN();
};

// Rate-bound ingredients for a problem instance. mu/beta and the derived
// quantities are filled for all-quadratic objectives only; rho <= 0 selects
// rho = rho_star.
SpectralReport analyze(const ProblemInstance& prob, double rho = 0.0);

// Orthonormal basis of ker(C') intersect ker((PC)'), the nonconvergent
// component of the auxiliary iterates. May have zero columns.
Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& C, const Eigen::MatrixXd& P);

// Minimum-norm least-squares solution of A w = b via SVD with singular values
// below 1e-10 * sigma_max treated as zero. Writes ||A w - b|| to *residual.
Eigen::VectorXd min_norm_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                       double* residual = nullptr);

// lambda -> C grad f*(C' lambda) for all-quadratic objectives with Q > 0;
// the map whose Lipschitz/strong-monotonicity constants drive the rate bound.
Eigen::VectorXd quadratic_dual_map(const ProblemInstance& prob, const Eigen::VectorXd& lambda);

// Limit of the plain two-step iteration started from z0, or nullopt when the
// difference between consecutive two-step iterates does not fall below
// tol * (1 + ||z||) within max_pairs pairs.
std::optional<Eigen::VectorXd> auxiliary_limit_by_iteration(const ProblemInstance& prob,
                                                            double rho,
                                                            const Eigen::VectorXd& z0,
                                                            int max_pairs = 100000,
                                                            double tol = 1e-13);

}  // namespace pdmm
