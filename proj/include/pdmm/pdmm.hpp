#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

#include "pdmm/problem.hpp"

namespace pdmm {

enum class StopRule { None, AuxError, ObjectiveSubopt };

struct PdmmConfig {
  double rho = 1.0;
  double alpha = 1.0;  // 1 = plain fixed-point iteration, 0.5 = ADMM
  int max_iter = 100;
  StopRule stop_rule = StopRule::None;
  double tol = 0.0;
  bool record_vectors = false;  // keep x/z snapshots per iteration
  // Evaluate the averaged update as (z + Tz)/2 instead of
  // (1-alpha) z + alpha Tz; requires alpha == 0.5.
  bool admm_half_form = false;

  void check() const;  // throws ParameterError
};

struct PdmmState {
  Eigen::VectorXd z;       // auxiliary iterate in R^{M_E}
  Eigen::VectorXd x;       // last primal, R^{M_V}
  Eigen::VectorXd lambda;  // last dual, R^{M_E}
  Eigen::VectorXd y;       // last reflected point, R^{M_E}
  int k = 0;
};

struct TraceRow {
  int k = 0;
  double aux_error_even_ref = std::numeric_limits<double>::quiet_NaN();
  double aux_error_odd_ref = std::numeric_limits<double>::quiet_NaN();
  double primal_sq_error = std::numeric_limits<double>::quiet_NaN();
  double objective_subopt = std::numeric_limits<double>::quiet_NaN();
  // ||T z - z||^2 measured at the iterate the step was applied to, i.e. at
  // z^{(k-1)} for row k.
  double fp_residual_sq = std::numeric_limits<double>::quiet_NaN();
};

struct IterationTrace {
  std::vector<TraceRow> rows;  // one per completed iteration, k = 1,2,...
  std::vector<Eigen::VectorXd> x_history;  // filled when record_vectors
  std::vector<Eigen::VectorXd> z_history;
};

// Optional reference data; when present the matching trace columns are filled.
struct RunReferences {
  std::optional<Eigen::VectorXd> z_tilde_even;  // reference for even k
  std::optional<Eigen::VectorXd> z_tilde_odd;   // reference for odd k
  std::optional<Eigen::VectorXd> x_star;
  std::optional<double> f_star;
};

struct ReflectResult {
  Eigen::VectorXd x, lambda, y;
};

// Evaluates the operator pieces for one (problem, rho) pair. Stateless apart
// from the cached d vector; safe to share across const calls.
class PdmmEngine {
 public:
  PdmmEngine(const ProblemInstance& prob, double rho);

  const ProblemInstance& problem() const { return *prob_; }
  double rho() const { return rho_; }
  const Eigen::VectorXd& d() const { return d_; }

  // Primal update of every node against the standard target d; node order is
  // ascending, which pins the floating-point evaluation order.
  Eigen::VectorXd primal(const Eigen::VectorXd& z) const;
  // Primal update against a caller-supplied target vector in R^{M_E}.
  Eigen::VectorXd primal_with_target(const Eigen::VectorXd& z,
                                     const Eigen::VectorXd& target) const;
  ReflectResult reflect(const Eigen::VectorXd& z) const;
  Eigen::VectorXd apply(const Eigen::VectorXd& z) const;  // full operator T(z)

 private:
  const ProblemInstance* prob_;
  double rho_;
  Eigen::VectorXd d_;
};

// Reflected-resolvent step: x minimizes the stacked update objective,
// lambda = z - rho (Cx - d), y = 2 lambda - z.
ReflectResult reflect_T1(const ProblemInstance& prob, double rho, const Eigen::VectorXd& z);

// Directed-edge swap z_{i|j} <- y_{j|i}; an isometric involution.
Eigen::VectorXd exchange(const EdgeLayout& layout, const Eigen::VectorXd& y);

// One averaged iteration z' = (1-alpha) z + alpha * exchange(reflect(z).y).
PdmmState pdmm_step(const ProblemInstance& prob, const PdmmConfig& cfg, const PdmmState& state);

struct RunResult {
  PdmmState state;
  IterationTrace trace;
};

RunResult run(const ProblemInstance& prob, const PdmmConfig& cfg, const Eigen::VectorXd& z0,
              const RunReferences& refs = {});

struct Message {
  int k = 0;      // iteration the transmission belongs to
  int from = 0, to = 0;
  Eigen::VectorXd payload;  // the half-step block z^{(k+1/2)}_{from|to}
};

struct DistributedRunResult {
  PdmmState state;
  IterationTrace trace;
  std::vector<Message> messages;
};

// Node-message simulation of the same iteration: per-node primal update,
// per-neighbor dual/half-step, one message per directed edge, then the swap
// assignment. Produces bit-identical iterates to run() because every
// floating-point expression is evaluated per directed edge in the same order.
DistributedRunResult run_distributed_sim(const ProblemInstance& prob, const PdmmConfig& cfg,
                                         const Eigen::VectorXd& z0,
                                         const RunReferences& refs = {},
                                         bool record_messages = true);

struct LambdaFormResult {
  Eigen::VectorXd lambda;
  Eigen::VectorXd x;
  std::vector<Eigen::VectorXd> x_history;
};

// The two-variable recursion in (lambda, x). With lambda0, x0 matched to a
// starting auxiliary vector via z0 = P (lambda0 - rho (C x0 - d)), its
// x-sequence coincides with run()'s.
LambdaFormResult run_lambda_form(const ProblemInstance& prob, const PdmmConfig& cfg,
                                 const Eigen::VectorXd& lambda0, const Eigen::VectorXd& x0);

// Matching z0 for run_lambda_form initial data.
Eigen::VectorXd matched_z0(const ProblemInstance& prob, double rho,
                           const Eigen::VectorXd& lambda0, const Eigen::VectorXd& x0);

// ||T(z) - z|| <= 1e-9 (1 + ||z||).
bool is_fixed_point(const ProblemInstance& prob, double rho, const Eigen::VectorXd& z);

}  // namespace pdmm
