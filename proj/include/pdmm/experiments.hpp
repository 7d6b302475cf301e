#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <json.hpp>

#include "pdmm/analysis.hpp"
#include "pdmm/pdmm.hpp"

namespace pdmm {

struct ExperimentConfig {
  std::string kind;  // "pnorm_sweep" | "l1_compare" | "quadratic_bound"
  int n_nodes = 10;
  double er_probability = -1.0;  // <= 0 selects ln(N)/N
  std::uint64_t seed = 1;
  int iterations = -1;           // <= 0 selects the per-kind default
  double rho = -1.0;             // <= 0 selects the per-kind default
  double alpha = 1.0;
  std::vector<int> p_values = {3, 4, 5, 6, 7, 8, 9, 10};
  int n_instances = 200;         // quadratic_bound
  double gamma_target = 0.9;     // quadratic_bound
  int node_dim = -1;             // <= 0 selects the per-kind default
  bool rho_sweep = false;        // pnorm_sweep: also run the step-size sweep
  int sweep_points = 25;
  int sweep_p = 3;
  int sweep_max_iter = 200000;
  double aux_precision = 1e-5;   // sweep target on the auxiliary error
  std::string out_dir = "out";

  double effective_er_probability() const;
  int effective_iterations() const;
  int effective_node_dim() const;
  void check() const;
};

ExperimentConfig config_from_json(const nlohmann::json& j);
nlohmann::json config_to_json(const ExperimentConfig& cfg);

std::string trace_to_csv(const IterationTrace& trace);
std::string format_double(double v);  // %.17g, deterministic
std::uint64_t fnv1a(const std::string& s);

// Samples ER graphs at the derived attempt seeds until one is connected,
// recording the seeds that were skipped. Throws SolverError after 1000 tries.
Graph connected_er_graph(int n, double p, std::uint64_t base_seed,
                         std::vector<std::uint64_t>* skipped);

struct PnormRunSummary {
  int p = 0;
  double rho = 0.0;
  double final_primal_sq_error = 0.0;
  double initial_aux_even = std::numeric_limits<double>::quiet_NaN();
  std::string trace_path;
};

struct RhoSweepPoint {
  double rho = 0.0;
  int iterations_to_precision = -1;  // -1 when the cap was hit
};

struct PnormSweepResult {
  Graph graph;
  std::vector<std::uint64_t> skipped_graph_seeds;
  std::vector<PnormRunSummary> runs;
  std::vector<IterationTrace> traces;  // aligned with runs
  std::vector<RhoSweepPoint> sweep;
};

PnormSweepResult run_pnorm_sweep(const ExperimentConfig& cfg);

struct L1CompareResult {
  Graph graph;
  std::vector<std::uint64_t> skipped_graph_seeds;
  double rho = 0.0;
  double averaged_final_subopt = 0.0;
  double plain_last_quarter_min = 0.0;
  int plain_sign_changes = 0;
  bool plain_oscillatory = false;
  bool admm_bit_identical = false;
  IterationTrace plain_trace, averaged_trace, admm_trace;
};

L1CompareResult run_l1_compare(const ExperimentConfig& cfg);

struct BoundViolation {
  int instance = 0;
  int k = 0;
  double value = 0.0;
  double bound = 0.0;
};

struct SkippedInstance {
  int instance = 0;
  std::string reason;
};

struct QuadBoundInstanceReport {
  int instance = 0;
  SpectralReport spectral;
  double delta_target = 0.0;   // bisection solution
  double epsilon = 0.0;        // should be 1 by construction
  std::uint64_t graph_seed = 0;
};

struct QuadBoundResult {
  std::vector<QuadBoundInstanceReport> instances;
  std::vector<SkippedInstance> skipped;
  std::vector<BoundViolation> violations;        // geometric bound
  std::vector<BoundViolation> fejer_violations;  // even-subsequence monotonicity
  std::vector<BoundViolation> eq24_violations;   // primal-from-auxiliary chain
  std::vector<IterationTrace> traces;            // aligned with instances
  std::vector<double> initial_aux_even;          // ||z0 - z_tilde_0||^2 per instance
};

QuadBoundResult run_quadratic_bound(const ExperimentConfig& cfg);

}  // namespace pdmm
