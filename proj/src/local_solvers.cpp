#include "pdmm/local_solvers.hpp"

#include <cmath>
#include <string>

#include "pdmm/errors.hpp"

namespace pdmm {

namespace {

double soft_threshold(double w, double tau) {
  if (w > tau) return w - tau;
  if (w < -tau) return w + tau;
  return 0.0;
}

// The separable solvers rely on C_i' C_i = m I, which holds exactly when every
// stacked block is a signed identity.
int consensus_degree_or_throw(const Eigen::MatrixXd& C_i, int dim, const char* family, int node) {
  if (dim < 1 || C_i.cols() != dim || C_i.rows() % dim != 0)
    throw SolverError(std::string(family) +
                      " update at node " + std::to_string(node) +
                      ": constraint stack does not match the node dimension");
  const int m = static_cast<int>(C_i.rows()) / dim;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(dim, dim);
  for (int blk = 0; blk < m; ++blk) {
    const Eigen::MatrixXd B = C_i.block(blk * dim, 0, dim, dim);
    if (B != I && B != -I)
      throw SolverError(std::string(family) + " update at node " + std::to_string(node) +
                        " supports consensus constraints only");
  }
  return m;
}

}  // namespace

double signed_power(double u, int e) {
  double mag = 1.0;
  const double a = std::abs(u);
  for (int k = 0; k < e; ++k) mag *= a;
  return u < 0 ? -mag : (u > 0 ? mag : 0.0);
}

double scalar_convex_minimize(const std::function<double(double)>& derivative, double hint,
                              double derivative_scale) {
  const double tol = 1e-12 * (1.0 + std::abs(derivative_scale));
  double g = derivative(hint);
  if (std::abs(g) <= tol) return hint;

  double lo, hi;
  if (g > 0.0) {
    hi = hint;
    double step = 1.0;
    lo = hint - step;
    int doublings = 0;
    while (derivative(lo) > 0.0) {
      if (++doublings > 200) throw SolverError("scalar minimizer: no sign change below hint");
      step *= 2.0;
      lo = hint - step;
    }
  } else {
    lo = hint;
    double step = 1.0;
    hi = hint + step;
    int doublings = 0;
    while (derivative(hi) < 0.0) {
      if (++doublings > 200) throw SolverError("scalar minimizer: no sign change above hint");
      step *= 2.0;
      hi = hint + step;
    }
  }

  for (int it = 0; it < 200 && hi - lo > 1e-14; ++it) {
    const double mid = 0.5 * (lo + hi);
    if (mid <= lo || mid >= hi) break;  // bracket at floating-point resolution
    const double gm = derivative(mid);
    if (std::abs(gm) <= tol) return mid;
    if (gm < 0.0)
      lo = mid;
    else
      hi = mid;
  }
  return 0.5 * (lo + hi);
}

Eigen::VectorXd primal_update_quadratic(const Quadratic& f, const LocalUpdateInput& in) {
  const Eigen::MatrixXd M = f.Q + in.rho * (in.C_i.transpose() * in.C_i);
  const Eigen::VectorXd rhs =
      f.q + in.C_i.transpose() * in.z_i + in.rho * (in.C_i.transpose() * in.d_i);
  Eigen::LDLT<Eigen::MatrixXd> ldlt(M);
  Eigen::VectorXd x = ldlt.solve(rhs);
  x += ldlt.solve(rhs - M * x);  // one refinement step
  const double resid = (M * x - rhs).norm();
  if (!x.allFinite() || resid > 1e-10 * rhs.norm())
    throw SolverError("quadratic primal update at node " + std::to_string(in.node) +
                      ": system Q + rho C'C is singular or ill-conditioned");
  return x;
}

Eigen::VectorXd primal_update_l1(const L1& f, const LocalUpdateInput& in) {
  const int dim = static_cast<int>(f.a.size());
  const int m = consensus_degree_or_throw(in.C_i, dim, "l1", in.node);
  if (m == 0) return f.a;  // unconstrained node: the objective's own minimizer
  const Eigen::VectorXd s = in.C_i.transpose() * in.z_i;
  const Eigen::VectorXd h = in.C_i.transpose() * in.d_i;
  const double rm = in.rho * m;
  Eigen::VectorXd x(dim);
  for (int k = 0; k < dim; ++k) {
    const double w = (s[k] + in.rho * h[k] - rm * f.a[k]) / rm;
    x[k] = f.a[k] + soft_threshold(w, 1.0 / rm);
  }
  return x;
}

Eigen::VectorXd primal_update_pnorm(const PNormPower& f, const LocalUpdateInput& in) {
  const int dim = static_cast<int>(f.a.size());
  const int m = consensus_degree_or_throw(in.C_i, dim, "p-norm", in.node);
  if (f.p < 2) throw SolverError("p-norm update needs integer p >= 2");
  const Eigen::VectorXd s = in.C_i.transpose() * in.z_i;
  const Eigen::VectorXd h = in.C_i.transpose() * in.d_i;
  const double rho = in.rho;
  Eigen::VectorXd x(dim);
  for (int k = 0; k < dim; ++k) {
    const double a = f.a[k];
    const double lin = s[k] + rho * h[k];
    auto derivative = [&](double t) {
      return f.p * signed_power(t - a, f.p - 1) - lin + rho * m * t;
    };
    x[k] = scalar_convex_minimize(derivative, a, s[k]);
  }
  return x;
}

Eigen::VectorXd primal_update(const NodeObjective& f, const LocalUpdateInput& in) {
  return std::visit(
      [&](const auto& v) -> Eigen::VectorXd {
        using T = std::decay_t<decltype(v)>;
        if constexpr (std::is_same_v<T, Quadratic>)
          return primal_update_quadratic(v, in);
        else if constexpr (std::is_same_v<T, PNormPower>)
          return primal_update_pnorm(v, in);
        else
          return primal_update_l1(v, in);
      },
      f);
}

}  // namespace pdmm
