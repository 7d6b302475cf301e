#include "pdmm/analysis.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>
#include <vector>

#include "pdmm/errors.hpp"
#include "pdmm/local_solvers.hpp"

namespace pdmm {

namespace {

constexpr double kRankTolerance = 1e-10;   // relative singular-value cutoff
constexpr double kAngleTolerance = 1e-7;   // rad, separates zero principal angles

bool all_quadratic(const ProblemInstance& prob) {
  for (const auto& f : prob.objectives)
    if (!std::holds_alternative<Quadratic>(f)) return false;
  return true;
}

template <typename T>
bool all_of_family(const ProblemInstance& prob) {
  for (const auto& f : prob.objectives)
    if (!std::holds_alternative<T>(f)) return false;
  return true;
}

int common_consensus_dim(const ProblemInstance& prob, const char* what) {
  if (!prob.consensus_like)
    throw SolverError(std::string(what) + " requires consensus constraints");
  const int dim = prob.layout.node_dim(0);
  for (int i = 0; i < prob.graph.n_nodes; ++i)
    if (prob.layout.node_dim(i) != dim)
      throw SolverError(std::string(what) + ": node dimensions differ");
  return dim;
}

Eigen::VectorXd replicate_across_nodes(const ProblemInstance& prob, const Eigen::VectorXd& v) {
  Eigen::VectorXd x(prob.layout.node_dim_total);
  for (int i = 0; i < prob.graph.n_nodes; ++i)
    x.segment(prob.layout.node_offset[i], prob.layout.node_dim(i)) = v;
  return x;
}

}  // namespace

SingularExtremes singular_extremes(const Eigen::MatrixXd& C) {
  if (C.size() == 0) throw SolverError("singular extremes of an empty matrix");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(C);
  const Eigen::VectorXd& sv = svd.singularValues();
  const double sigma_max = sv[0];
  if (sigma_max <= 0.0) throw SolverError("singular extremes of an all-zero matrix");
  const double threshold = kRankTolerance * sigma_max;
  double sigma_min = sigma_max;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > threshold) sigma_min = sv[i];
  return {sigma_max, sigma_min};
}

Eigen::MatrixXd range_basis(const Eigen::MatrixXd& M) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(M, Eigen::ComputeThinU);
  const Eigen::VectorXd& sv = svd.singularValues();
  if (sv.size() == 0 || sv[0] <= 0.0) throw SolverError("range basis of an all-zero matrix");
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > kRankTolerance * sv[0]) ++rank;
  return svd.matrixU().leftCols(rank);
}

double friedrichs_angle_from_bases(const Eigen::MatrixXd& U, const Eigen::MatrixXd& W) {
  if (U.cols() == 0 || W.cols() == 0)
    throw SolverError("Friedrichs angle of a rank-0 subspace");
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(U.transpose() * W);
  const Eigen::VectorXd& sv = svd.singularValues();
  double best = std::numbers::pi / 2.0;
  bool found = false;
  for (int i = 0; i < sv.size(); ++i) {
    const double c = std::clamp(sv[i], 0.0, 1.0);
    const double theta = std::acos(c);
    if (theta > kAngleTolerance && (!found || theta < best)) {
      best = theta;
      found = true;
    }
  }
  return found ? best : std::numbers::pi / 2.0;
}

double friedrichs_angle(const Eigen::MatrixXd& C, const Eigen::MatrixXd& P) {
  return friedrichs_angle_from_bases(range_basis(C), range_basis(P * C));
}

double contraction_delta(double rho, double mu, double beta, double sigma_max,
                         double sigma_min_nz) {
  if (!(rho > 0.0)) throw ParameterError("contraction factor needs rho > 0");
  if (!(mu > 0.0) || !(beta >= mu))
    throw ParameterError("contraction factor needs 0 < mu <= beta");
  const double a = rho * sigma_max * sigma_max / mu;
  const double b = rho * sigma_min_nz * sigma_min_nz / beta;
  return std::max((a - 1.0) / (a + 1.0), (1.0 - b) / (1.0 + b));
}

double gap_rate_gamma(double delta, double theta_F) {
  if (!(delta >= 0.0 && delta < 1.0))
    throw ParameterError("rate bound needs delta in [0, 1)");
  if (!(theta_F > 0.0 && theta_F <= std::numbers::pi / 2.0 + 1e-12))
    throw ParameterError("rate bound needs theta_F in (0, pi/2]");
  const double c = (1.0 - delta) * std::cos(theta_F);
  const double root = std::sqrt(c * c / 4.0 + delta);
  const double hi = delta + c * (c / 2.0 + root);
  const double lo = delta + c * (c / 2.0 - root);
  const double gamma = std::abs(std::max(hi, lo));
  if (!(gamma < 1.0)) throw SolverError("rate bound did not fall below one");
  return gamma;
}

double delta_for_rate_target(double target, double theta_F) {
  if (!(target > 0.0 && target < 1.0))
    throw ParameterError("rate target must lie in (0, 1)");
  double lo = 0.0, hi = 1.0 - 1e-12;
  if (gap_rate_gamma(lo, theta_F) > target)
    throw SolverError("rate target is unreachable: cos^2(theta_F) already exceeds it");
  for (int it = 0; it < 200 && hi - lo > 1e-15; ++it) {
    const double mid = 0.5 * (lo + hi);
    const double g = gap_rate_gamma(mid, theta_F);
    if (std::abs(g - target) <= 1e-13) return mid;
    if (g < target)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

OptimalRho optimal_rho(double mu, double beta, double sigma_max, double sigma_min_nz) {
  if (!(mu > 0.0 && beta > 0.0 && sigma_max > 0.0 && sigma_min_nz > 0.0))
    throw ParameterError("optimal step size needs positive inputs");
  OptimalRho out;
  out.rho_star = std::sqrt(beta * mu) / (sigma_max * sigma_min_nz);
  out.kappa = (sigma_max * sigma_max * beta) / (sigma_min_nz * sigma_min_nz * mu);
  const double rt = std::sqrt(out.kappa);
  out.delta_star = (rt - 1.0) / (rt + 1.0);
  return out;
}

Eigen::VectorXd centralized_oracle(const ProblemInstance& prob) {
  const auto& lay = prob.layout;
  if (all_quadratic(prob)) {
    if (prob.consensus_like) {
      const int dim = common_consensus_dim(prob, "quadratic consensus oracle");
      Eigen::MatrixXd Q = Eigen::MatrixXd::Zero(dim, dim);
      Eigen::VectorXd q = Eigen::VectorXd::Zero(dim);
      for (const auto& f : prob.objectives) {
        const auto& quad = std::get<Quadratic>(f);
        Q += quad.Q;
        q += quad.q;
      }
      Eigen::LDLT<Eigen::MatrixXd> ldlt(Q);
      Eigen::VectorXd xbar = ldlt.solve(q);
      if (!xbar.allFinite() || (Q * xbar - q).norm() > 1e-8 * (1.0 + q.norm()))
        throw SolverError("centralized oracle: summed quadratic system is singular");
      return replicate_across_nodes(prob, xbar);
    }
    // General affine constraints: stacked KKT system.
    int rows = 0;
    for (const auto& c : prob.constraints) rows += static_cast<int>(c.b.size());
    const int n = lay.node_dim_total;
    Eigen::MatrixXd E = Eigen::MatrixXd::Zero(rows, n);
    Eigen::VectorXd b(rows);
    int r = 0;
    for (const auto& c : prob.constraints) {
      const int m = static_cast<int>(c.b.size());
      E.block(r, lay.node_offset[c.i], m, lay.node_dim(c.i)) = c.A_ij;
      E.block(r, lay.node_offset[c.j], m, lay.node_dim(c.j)) = c.A_ji;
      b.segment(r, m) = c.b;
      r += m;
    }
    Eigen::MatrixXd kkt = Eigen::MatrixXd::Zero(n + rows, n + rows);
    Eigen::VectorXd rhs(n + rows);
    for (int i = 0; i < prob.graph.n_nodes; ++i) {
      const auto& quad = std::get<Quadratic>(prob.objectives[i]);
      kkt.block(lay.node_offset[i], lay.node_offset[i], lay.node_dim(i), lay.node_dim(i)) =
          quad.Q;
      rhs.segment(lay.node_offset[i], lay.node_dim(i)) = quad.q;
    }
    kkt.block(0, n, n, rows) = E.transpose();
    kkt.block(n, 0, rows, n) = E;
    rhs.segment(n, rows) = b;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(kkt);
    Eigen::VectorXd sol = lu.solve(rhs);
    if (!sol.allFinite() || (kkt * sol - rhs).norm() > 1e-8 * (1.0 + rhs.norm()))
      throw SolverError("centralized oracle: KKT system is singular");
    return sol.head(n);
  }

  if (all_of_family<PNormPower>(prob)) {
    const int dim = common_consensus_dim(prob, "p-norm oracle");
    Eigen::VectorXd xbar(dim);
    for (int k = 0; k < dim; ++k) {
      double mean = 0.0;
      for (const auto& f : prob.objectives) mean += std::get<PNormPower>(f).a[k];
      mean /= prob.graph.n_nodes;
      auto derivative = [&](double t) {
        double s = 0.0;
        for (const auto& f : prob.objectives) {
          const auto& pn = std::get<PNormPower>(f);
          s += pn.p * signed_power(t - pn.a[k], pn.p - 1);
        }
        return s;
      };
      xbar[k] = scalar_convex_minimize(derivative, mean);
    }
    return replicate_across_nodes(prob, xbar);
  }

  if (all_of_family<L1>(prob)) {
    const int dim = common_consensus_dim(prob, "l1 oracle");
    Eigen::VectorXd xbar(dim);
    std::vector<double> values(prob.objectives.size());
    for (int k = 0; k < dim; ++k) {
      for (std::size_t i = 0; i < prob.objectives.size(); ++i)
        values[i] = std::get<L1>(prob.objectives[i]).a[k];
      std::sort(values.begin(), values.end());
      const std::size_t n = values.size();
      xbar[k] = n % 2 == 1 ? values[n / 2] : 0.5 * (values[n / 2 - 1] + values[n / 2]);
    }
    return replicate_across_nodes(prob, xbar);
  }

  throw SolverError("centralized oracle: unsupported objective mix");
}

ConvexityBounds quadratic_convexity_bounds(const ProblemInstance& prob) {
  if (!all_quadratic(prob))
    throw ParameterError("convexity bounds are defined for quadratic objectives");
  ConvexityBounds out{std::numeric_limits<double>::infinity(), 0.0};
  for (const auto& f : prob.objectives) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(std::get<Quadratic>(f).Q);
    out.mu = std::min(out.mu, eig.eigenvalues().minCoeff());
    out.beta = std::max(out.beta, eig.eigenvalues().maxCoeff());
  }
  return out;
}

Eigen::MatrixXd kernel_basis(const Eigen::MatrixXd& C, const Eigen::MatrixXd& P) {
  const int m = static_cast<int>(C.rows());
  Eigen::MatrixXd At(2 * C.cols(), m);
  At.topRows(C.cols()) = C.transpose();
  At.bottomRows(C.cols()) = (P * C).transpose();
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(At, Eigen::ComputeFullV);
  const Eigen::VectorXd& sv = svd.singularValues();
  int rank = 0;
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > kRankTolerance * sv[0]) ++rank;
  return svd.matrixV().rightCols(m - rank);
}

Eigen::VectorXd min_norm_least_squares(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                                       double* residual) {
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const Eigen::VectorXd& sv = svd.singularValues();
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(sv.size());
  for (int i = 0; i < sv.size(); ++i)
    if (sv[i] > kRankTolerance * sv[0]) inv[i] = 1.0 / sv[i];
  const Eigen::VectorXd w = svd.matrixV() * inv.asDiagonal() * (svd.matrixU().transpose() * b);
  if (residual) *residual = (A * w - b).norm();
  return w;
}

FixedPointRef reference_point(const ProblemInstance& prob, double rho,
                              const Eigen::VectorXd& x_star, const Eigen::VectorXd& z0) {
  if (!(rho > 0.0)) throw ParameterError("reference point needs rho > 0");
  const Eigen::MatrixXd C = assemble_C(prob);
  const Eigen::MatrixXd P = assemble_P(prob.layout);
  const Eigen::VectorXd d = assemble_d(prob);
  const Eigen::VectorXd grad = prob.gradient_total(x_star);  // rejects l1
  const Eigen::VectorXd r = C * x_star - d;
  if ((r + P * r).norm() > 1e-9 * (1.0 + d.norm()))
    throw SolverError("reference point: x_star is not primal feasible");

  const int mv = prob.layout.node_dim_total;
  Eigen::MatrixXd At(2 * mv, prob.layout.edge_dim);
  At.topRows(mv) = C.transpose();
  At.bottomRows(mv) = (P * C).transpose();

  FixedPointRef ref;
  ref.x_star = x_star;
  ref.g_hat.resize(2 * mv);
  ref.g_hat.head(mv) = grad - x_star + rho * (C.transpose() * r);
  ref.g_hat.tail(mv) = grad - x_star + rho * (C.transpose() * (P * r));

  double residual = 0.0;
  Eigen::VectorXd w = min_norm_least_squares(At, ref.g_hat, &residual);
  if (residual <= 1e-8 * ref.g_hat.norm()) {
    ref.shifted_rhs_consistent = true;
  } else {
    // The shifted right-hand side is not reachable by any auxiliary vector;
    // fall back to the stationarity form, whose minimum-norm solution is the
    // projection of every fixed point onto ran(C) + ran(PC) and therefore the
    // closed form of the two-step iteration limit.
    Eigen::VectorXd g(2 * mv);
    g.head(mv) = grad + rho * (C.transpose() * r);
    g.tail(mv) = grad + rho * (C.transpose() * (P * r));
    w = min_norm_least_squares(At, g, &residual);
    if (residual > 1e-8 * std::max(g.norm(), 1e-30))
      throw SolverError("reference point: stationarity system is inconsistent; "
                        "x_star is not optimal for this instance");
  }

  const Eigen::MatrixXd K = kernel_basis(C, P);
  ref.z_tilde_0 = w;
  if (K.cols() > 0) ref.z_tilde_0 += K * (K.transpose() * z0);
  ref.z_tilde_1 = PdmmEngine(prob, rho).apply(ref.z_tilde_0);
  return ref;
}

double epsilon_bound(double sigma_max, double sigma_min_nz, double rho, double gamma,
                     const Eigen::VectorXd& z0, const Eigen::VectorXd& z_tilde_0) {
  if (!(gamma > 0.0)) throw SolverError("epsilon bound is degenerate at gamma = 0");
  return (sigma_max * sigma_max) / (rho * sigma_min_nz * sigma_min_nz) *
         (z0 - z_tilde_0).squaredNorm() / gamma;
}

ErrorRecord error_metrics(const ProblemInstance& prob, const PdmmState& state,
                          const FixedPointRef& ref, std::optional<double> f_star) {
  ErrorRecord rec;
  rec.aux_even = (state.z - ref.z_tilde_0).squaredNorm();
  rec.aux_odd = (state.z - ref.z_tilde_1).squaredNorm();
  rec.aux_selected = state.k % 2 == 0 ? rec.aux_even : rec.aux_odd;
  if (state.x.size() == ref.x_star.size() && state.x.size() > 0) {
    rec.primal_sq = (state.x - ref.x_star).squaredNorm();
    const double f_ref = f_star ? *f_star : prob.objective_total(ref.x_star);
    const double gap = prob.objective_total(state.x) - f_ref;
    rec.objective_subopt = gap * gap;
  }
  return rec;
}

SpectralReport analyze(const ProblemInstance& prob, double rho) {
  SpectralReport rep;
  if (prob.layout.edge_dim == 0) return rep;  // no constraints, nothing spectral
  const Eigen::MatrixXd C = assemble_C(prob);
  const Eigen::MatrixXd P = assemble_P(prob.layout);
  const SingularExtremes se = singular_extremes(C);
  rep.sigma_max = se.sigma_max;
  rep.sigma_min_nz = se.sigma_min_nz;
  rep.theta_F = friedrichs_angle(C, P);
  if (all_quadratic(prob)) {
    const ConvexityBounds cb = quadratic_convexity_bounds(prob);
    rep.mu = cb.mu;
    rep.beta = cb.beta;
    if (cb.mu > 0.0) {
      const OptimalRho opt = optimal_rho(cb.mu, cb.beta, se.sigma_max, se.sigma_min_nz);
      rep.kappa = opt.kappa;
      rep.rho_star = opt.rho_star;
      rep.rho = rho > 0.0 ? rho : opt.rho_star;
      rep.delta = contraction_delta(rep.rho, cb.mu, cb.beta, se.sigma_max, se.sigma_min_nz);
      rep.gamma = gap_rate_gamma(rep.delta, rep.theta_F);
    }
  }
  return rep;
}

Eigen::VectorXd quadratic_dual_map(const ProblemInstance& prob, const Eigen::VectorXd& lambda) {
  if (!all_quadratic(prob))
    throw ParameterError("dual map is implemented for quadratic objectives");
  const Eigen::VectorXd s = apply_C_transpose(prob, lambda);
  Eigen::VectorXd x(prob.layout.node_dim_total);
  for (int i = 0; i < prob.graph.n_nodes; ++i) {
    const auto& quad = std::get<Quadratic>(prob.objectives[i]);
    Eigen::LDLT<Eigen::MatrixXd> ldlt(quad.Q);
    const Eigen::VectorXd rhs =
        s.segment(prob.layout.node_offset[i], prob.layout.node_dim(i)) + quad.q;
    const Eigen::VectorXd xi = ldlt.solve(rhs);
    if (!xi.allFinite() || (quad.Q * xi - rhs).norm() > 1e-8 * (1.0 + rhs.norm()))
      throw SolverError("dual map needs strictly positive definite Q at node " +
                        std::to_string(i));
    x.segment(prob.layout.node_offset[i], prob.layout.node_dim(i)) = xi;
  }
  return apply_C(prob, x);
}

std::optional<Eigen::VectorXd> auxiliary_limit_by_iteration(const ProblemInstance& prob,
                                                            double rho,
                                                            const Eigen::VectorXd& z0,
                                                            int max_pairs, double tol) {
  PdmmEngine engine(prob, rho);
  Eigen::VectorXd z = z0;
  for (int pair = 0; pair < max_pairs; ++pair) {
    const Eigen::VectorXd z2 = engine.apply(engine.apply(z));
    if ((z2 - z).norm() <= tol * (1.0 + z.norm())) return z2;
    z = z2;
  }
  return std::nullopt;
}

}  // namespace pdmm
