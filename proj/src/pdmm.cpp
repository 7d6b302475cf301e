#include "pdmm/pdmm.hpp"

#include <cmath>
#include <string>

#include "pdmm/errors.hpp"
#include "pdmm/local_solvers.hpp"

namespace pdmm {

namespace {

TraceRow make_row(const ProblemInstance& prob, const PdmmState& st, const RunReferences& refs,
                  double fp_residual_sq) {
  TraceRow row;
  row.k = st.k;
  if (refs.z_tilde_even) row.aux_error_even_ref = (st.z - *refs.z_tilde_even).squaredNorm();
  if (refs.z_tilde_odd) row.aux_error_odd_ref = (st.z - *refs.z_tilde_odd).squaredNorm();
  if (refs.x_star) row.primal_sq_error = (st.x - *refs.x_star).squaredNorm();
  if (refs.f_star) {
    const double gap = prob.objective_total(st.x) - *refs.f_star;
    row.objective_subopt = gap * gap;
  }
  row.fp_residual_sq = fp_residual_sq;
  return row;
}

bool stop_satisfied(const PdmmConfig& cfg, const TraceRow& row) {
  switch (cfg.stop_rule) {
    case StopRule::None:
      return false;
    case StopRule::AuxError: {
      const double aux = row.k % 2 == 0 ? row.aux_error_even_ref : row.aux_error_odd_ref;
      return aux <= cfg.tol;
    }
    case StopRule::ObjectiveSubopt:
      return row.objective_subopt <= cfg.tol;
  }
  return false;
}

void check_run_inputs(const ProblemInstance& prob, const PdmmConfig& cfg,
                      const Eigen::VectorXd& z0, const RunReferences& refs) {
  cfg.check();
  if (z0.size() != prob.layout.edge_dim)
    throw ParameterError("z0 has dimension " + std::to_string(z0.size()) + ", expected " +
                         std::to_string(prob.layout.edge_dim));
  if (cfg.stop_rule == StopRule::AuxError && (!refs.z_tilde_even || !refs.z_tilde_odd))
    throw ParameterError("auxiliary-error stopping needs both reference points");
  if (cfg.stop_rule == StopRule::ObjectiveSubopt && !refs.f_star)
    throw ParameterError("objective stopping needs the optimal value");
}

}  // namespace

void PdmmConfig::check() const {
  if (!(rho > 0.0)) throw ParameterError("step size rho must be positive");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in (0, 1]");
  if (max_iter < 0) throw ParameterError("max_iter must be nonnegative");
  if (admm_half_form && alpha != 0.5)
    throw ParameterError("the half-averaged update form requires alpha == 0.5");
}

PdmmEngine::PdmmEngine(const ProblemInstance& prob, double rho) : prob_(&prob), rho_(rho) {
  if (!(rho > 0.0)) throw ParameterError("step size rho must be positive");
  d_ = assemble_d(prob);
}

Eigen::VectorXd PdmmEngine::primal(const Eigen::VectorXd& z) const {
  return primal_with_target(z, d_);
}

Eigen::VectorXd PdmmEngine::primal_with_target(const Eigen::VectorXd& z,
                                               const Eigen::VectorXd& target) const {
  const auto& lay = prob_->layout;
  Eigen::VectorXd x(lay.node_dim_total);
  for (int i = 0; i < prob_->graph.n_nodes; ++i) {
    const int off = lay.node_edge_offset[i];
    const int rows = lay.node_edge_rows(i);
    LocalUpdateInput in{i, prob_->node_stack[i], target.segment(off, rows),
                        z.segment(off, rows), rho_};
    x.segment(lay.node_offset[i], lay.node_dim(i)) = primal_update(prob_->objectives[i], in);
  }
  return x;
}

ReflectResult PdmmEngine::reflect(const Eigen::VectorXd& z) const {
  ReflectResult out;
  out.x = primal(z);
  const auto& lay = prob_->layout;
  out.lambda.resize(lay.edge_dim);
  out.y.resize(lay.edge_dim);
  for (const auto& e : lay.directed) {
    const Eigen::VectorXd res =
        prob_->directed_block(e) * out.x.segment(lay.node_offset[e.from], lay.node_dim(e.from)) -
        d_.segment(e.offset, e.size);
    out.lambda.segment(e.offset, e.size) = z.segment(e.offset, e.size) - rho_ * res;
    out.y.segment(e.offset, e.size) =
        2.0 * out.lambda.segment(e.offset, e.size) - z.segment(e.offset, e.size);
  }
  return out;
}

Eigen::VectorXd PdmmEngine::apply(const Eigen::VectorXd& z) const {
  return exchange(prob_->layout, reflect(z).y);
}

ReflectResult reflect_T1(const ProblemInstance& prob, double rho, const Eigen::VectorXd& z) {
  return PdmmEngine(prob, rho).reflect(z);
}

Eigen::VectorXd exchange(const EdgeLayout& layout, const Eigen::VectorXd& y) {
  return apply_P(layout, y);
}

PdmmState pdmm_step(const ProblemInstance& prob, const PdmmConfig& cfg, const PdmmState& state) {
  cfg.check();
  PdmmEngine engine(prob, cfg.rho);
  ReflectResult r = engine.reflect(state.z);
  const Eigen::VectorXd t = exchange(prob.layout, r.y);
  PdmmState next;
  if (cfg.admm_half_form)
    next.z = 0.5 * (state.z + t);
  else if (cfg.alpha == 1.0)
    next.z = t;
  else
    next.z = (1.0 - cfg.alpha) * state.z + cfg.alpha * t;
  next.x = std::move(r.x);
  next.lambda = std::move(r.lambda);
  next.y = std::move(r.y);
  next.k = state.k + 1;
  return next;
}

RunResult run(const ProblemInstance& prob, const PdmmConfig& cfg, const Eigen::VectorXd& z0,
              const RunReferences& refs) {
  check_run_inputs(prob, cfg, z0, refs);
  PdmmEngine engine(prob, cfg.rho);
  RunResult out;
  out.state.z = z0;
  out.state.k = 0;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    ReflectResult r = engine.reflect(out.state.z);
    const Eigen::VectorXd t = exchange(prob.layout, r.y);
    const double resid = (t - out.state.z).squaredNorm();
    if (cfg.admm_half_form)
      out.state.z = 0.5 * (out.state.z + t);
    else if (cfg.alpha == 1.0)
      out.state.z = t;
    else
      out.state.z = ((1.0 - cfg.alpha) * out.state.z + cfg.alpha * t).eval();
    out.state.x = std::move(r.x);
    out.state.lambda = std::move(r.lambda);
    out.state.y = std::move(r.y);
    out.state.k = k;
    out.trace.rows.push_back(make_row(prob, out.state, refs, resid));
    if (cfg.record_vectors) {
      out.trace.x_history.push_back(out.state.x);
      out.trace.z_history.push_back(out.state.z);
    }
    if (stop_satisfied(cfg, out.trace.rows.back())) break;
  }
  return out;
}

DistributedRunResult run_distributed_sim(const ProblemInstance& prob, const PdmmConfig& cfg,
                                         const Eigen::VectorXd& z0, const RunReferences& refs,
                                         bool record_messages) {
  check_run_inputs(prob, cfg, z0, refs);
  const auto& lay = prob.layout;
  const Eigen::VectorXd d = assemble_d(prob);
  DistributedRunResult out;
  out.state.z = z0;
  out.state.k = 0;

  Eigen::VectorXd x(lay.node_dim_total), lambda(lay.edge_dim), half(lay.edge_dim);
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Eigen::VectorXd& z = out.state.z;
    // Primal update, one node at a time using only local blocks.
    for (int i = 0; i < prob.graph.n_nodes; ++i) {
      const int off = lay.node_edge_offset[i];
      const int rows = lay.node_edge_rows(i);
      LocalUpdateInput in{i, prob.node_stack[i], d.segment(off, rows), z.segment(off, rows),
                          cfg.rho};
      x.segment(lay.node_offset[i], lay.node_dim(i)) = primal_update(prob.objectives[i], in);
    }
    // Dual update and half-step per neighbor.
    for (int i = 0; i < prob.graph.n_nodes; ++i) {
      for (int idx : lay.node_directed[i]) {
        const auto& e = lay.directed[idx];
        const Eigen::VectorXd res =
            prob.directed_block(e) * x.segment(lay.node_offset[i], lay.node_dim(i)) -
            d.segment(e.offset, e.size);
        lambda.segment(e.offset, e.size) = z.segment(e.offset, e.size) - cfg.rho * res;
        half.segment(e.offset, e.size) =
            2.0 * lambda.segment(e.offset, e.size) - z.segment(e.offset, e.size);
      }
    }
    // One-way transmissions: node i sends its half-step block for (i|j) to j.
    if (record_messages) {
      for (int i = 0; i < prob.graph.n_nodes; ++i)
        for (int idx : lay.node_directed[i]) {
          const auto& e = lay.directed[idx];
          out.messages.push_back({k, i, e.to, half.segment(e.offset, e.size)});
        }
    }
    // Assignment z_{i|j} <- z^{(k+1/2)}_{j|i}, averaged when alpha < 1. The
    // residual diagnostic reduces over the full vector so it matches run()
    // bit for bit.
    const Eigen::VectorXd incoming = exchange(lay, half);
    const double resid = (incoming - z).squaredNorm();
    Eigen::VectorXd z_next(lay.edge_dim);
    for (int i = 0; i < prob.graph.n_nodes; ++i)
      for (int idx : lay.node_directed[i]) {
        const auto& e = lay.directed[idx];
        const auto block = incoming.segment(e.offset, e.size);
        if (cfg.admm_half_form)
          z_next.segment(e.offset, e.size) = 0.5 * (z.segment(e.offset, e.size) + block);
        else if (cfg.alpha == 1.0)
          z_next.segment(e.offset, e.size) = block;
        else
          z_next.segment(e.offset, e.size) =
              (1.0 - cfg.alpha) * z.segment(e.offset, e.size) + cfg.alpha * block;
      }
    out.state.z = std::move(z_next);
    out.state.x = x;
    out.state.lambda = lambda;
    out.state.y = half;
    out.state.k = k;
    out.trace.rows.push_back(make_row(prob, out.state, refs, resid));
    if (cfg.record_vectors) {
      out.trace.x_history.push_back(out.state.x);
      out.trace.z_history.push_back(out.state.z);
    }
    if (stop_satisfied(cfg, out.trace.rows.back())) break;
  }
  return out;
}

Eigen::VectorXd matched_z0(const ProblemInstance& prob, double rho,
                           const Eigen::VectorXd& lambda0, const Eigen::VectorXd& x0) {
  const Eigen::VectorXd d = assemble_d(prob);
  return apply_P(prob.layout, lambda0 - rho * (apply_C(prob, x0) - d));
}

LambdaFormResult run_lambda_form(const ProblemInstance& prob, const PdmmConfig& cfg,
                                 const Eigen::VectorXd& lambda0, const Eigen::VectorXd& x0) {
  cfg.check();
  if (cfg.alpha != 1.0)
    throw ParameterError("the lambda/x recursion is defined for the plain iteration only");
  if (lambda0.size() != prob.layout.edge_dim || x0.size() != prob.layout.node_dim_total)
    throw ParameterError("lambda0/x0 dimensions do not match the layout");
  PdmmEngine engine(prob, cfg.rho);
  const Eigen::VectorXd d = engine.d();

  LambdaFormResult out;
  out.lambda = lambda0;
  out.x = x0;
  for (int k = 1; k <= cfg.max_iter; ++k) {
    const Eigen::VectorXd z_lin = apply_P(prob.layout, out.lambda);
    // || C x + P C x_prev - 2 d ||^2 = || C x - target ||^2
    const Eigen::VectorXd target = 2.0 * d - apply_P(prob.layout, apply_C(prob, out.x));
    const Eigen::VectorXd x_next = engine.primal_with_target(z_lin, target);
    out.lambda = z_lin - cfg.rho * (apply_C(prob, x_next) - target);
    out.x = x_next;
    out.x_history.push_back(out.x);
  }
  return out;
}

bool is_fixed_point(const ProblemInstance& prob, double rho, const Eigen::VectorXd& z) {
  PdmmEngine engine(prob, rho);
  return (engine.apply(z) - z).norm() <= 1e-9 * (1.0 + z.norm());
}

}  // namespace pdmm
