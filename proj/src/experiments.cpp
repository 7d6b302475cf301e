#include "pdmm/experiments.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdio>
#include <filesystem>

#include "pdmm/errors.hpp"
#include "pdmm/json_io.hpp"
#include "pdmm/rng.hpp"

namespace pdmm {

namespace {

constexpr const char* kVersion = "0.1.0";

// Seed-stream tags so the graph, the data and the initial vector draw from
// independent deterministic streams.
constexpr std::uint64_t kGraphStream = 1000;
constexpr std::uint64_t kDataStream = 2;
constexpr std::uint64_t kInitStream = 3;
constexpr std::uint64_t kInstanceStream = 10000;

Eigen::VectorXd normal_vector(Rng& rng, int n) {
  Eigen::VectorXd v(n);
  for (int i = 0; i < n; ++i) v[i] = rng.normal();
  return v;
}

bool bits_equal(double a, double b) {
  return std::bit_cast<std::uint64_t>(a) == std::bit_cast<std::uint64_t>(b);
}

bool traces_bit_identical(const IterationTrace& a, const IterationTrace& b) {
  if (a.rows.size() != b.rows.size()) return false;
  for (std::size_t i = 0; i < a.rows.size(); ++i) {
    const TraceRow& ra = a.rows[i];
    const TraceRow& rb = b.rows[i];
    if (ra.k != rb.k || !bits_equal(ra.aux_error_even_ref, rb.aux_error_even_ref) ||
        !bits_equal(ra.aux_error_odd_ref, rb.aux_error_odd_ref) ||
        !bits_equal(ra.primal_sq_error, rb.primal_sq_error) ||
        !bits_equal(ra.objective_subopt, rb.objective_subopt) ||
        !bits_equal(ra.fp_residual_sq, rb.fp_residual_sq))
      return false;
  }
  return true;
}

void ensure_out_dir(const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw ParameterError("cannot create output directory " + dir);
}

std::string path_join(const std::string& dir, const std::string& name) {
  return (std::filesystem::path(dir) / name).string();
}

void write_manifest(const ExperimentConfig& cfg, const std::vector<std::string>& outputs,
                    const std::vector<std::uint64_t>& skipped_graph_seeds,
                    nlohmann::json extra = nlohmann::json::object()) {
  nlohmann::json m;
  m["experiment"] = cfg.kind;
  m["seed"] = cfg.seed;
  m["config"] = config_to_json(cfg);
  char hash[32];
  std::snprintf(hash, sizeof(hash), "%016llx",
                static_cast<unsigned long long>(fnv1a(m["config"].dump())));
  m["config_hash"] = hash;
  m["version"] = kVersion;
  m["skipped_graph_seeds"] = skipped_graph_seeds;
  m["outputs"] = outputs;
  for (auto& [key, value] : extra.items()) m[key] = value;
  write_text_file(path_join(cfg.out_dir, "manifest.json"), m.dump(2) + "\n");
}

double default_pnorm_rho(int p) {
  // Pinned per-exponent step sizes, calibrated so 180 plain iterations reach
  // the solver floor on the reference instance (seed 5, scalar nodes). The
  // useful step size grows with p because the update objective's curvature
  // range widens like spread^(p-2).
  if (p <= 4) return 8.0;
  if (p <= 6) return 16.0;
  if (p <= 8) return 32.0;
  return 64.0;
}

// Objective suboptimality series is "oscillatory" when its last-quarter
// minimum stays an order of magnitude above the averaged run's final value
// and its first differences keep changing sign.
struct OscillationVerdict {
  double window_min = 0.0;
  int sign_changes = 0;
  bool oscillatory = false;
};

OscillationVerdict classify_oscillation(const std::vector<TraceRow>& rows,
                                        double averaged_final) {
  OscillationVerdict v;
  if (rows.size() < 8) return v;
  const std::size_t start = rows.size() - rows.size() / 4;
  std::vector<double> window;
  for (std::size_t i = start; i < rows.size(); ++i) window.push_back(rows[i].objective_subopt);
  v.window_min = *std::min_element(window.begin(), window.end());
  int prev_sign = 0;
  for (std::size_t i = 0; i + 1 < window.size(); ++i) {
    const double diff = window[i + 1] - window[i];
    const int sign = diff > 0 ? 1 : (diff < 0 ? -1 : 0);
    if (sign != 0 && prev_sign != 0 && sign != prev_sign) ++v.sign_changes;
    if (sign != 0) prev_sign = sign;
  }
  v.oscillatory = v.window_min > 10.0 * averaged_final && v.sign_changes >= 1;
  return v;
}

Eigen::MatrixXd random_orthogonal(Rng& rng, int dim) {
  Eigen::MatrixXd G(dim, dim);
  for (int r = 0; r < dim; ++r)
    for (int c = 0; c < dim; ++c) G(r, c) = rng.normal();
  Eigen::HouseholderQR<Eigen::MatrixXd> qr(G);
  return qr.householderQ() * Eigen::MatrixXd::Identity(dim, dim);
}

}  // namespace

double ExperimentConfig::effective_er_probability() const {
  return er_probability > 0.0 ? er_probability : std::log(static_cast<double>(n_nodes)) / n_nodes;
}

int ExperimentConfig::effective_iterations() const {
  if (iterations > 0) return iterations;
  if (kind == "pnorm_sweep") return 180;
  if (kind == "l1_compare") return 2000;
  return 120;
}

int ExperimentConfig::effective_node_dim() const {
  if (node_dim > 0) return node_dim;
  return kind == "pnorm_sweep" ? 1 : 3;
}

void ExperimentConfig::check() const {
  if (kind != "pnorm_sweep" && kind != "l1_compare" && kind != "quadratic_bound")
    throw ParameterError("unknown experiment kind '" + kind + "'");
  if (n_nodes < 1) throw ParameterError("n_nodes must be positive");
  if (node_dim == 0 || node_dim < -1) throw ParameterError("node_dim must be positive");
  if (n_instances < 1) throw ParameterError("n_instances must be positive");
  if (!(gamma_target > 0.0 && gamma_target < 1.0))
    throw ParameterError("gamma_target must lie in (0,1)");
  if (!(alpha > 0.0 && alpha <= 1.0)) throw ParameterError("alpha must lie in (0,1]");
  if (sweep_points < 1) throw ParameterError("sweep_points must be positive");
  const double p = effective_er_probability();
  if (!(p >= 0.0 && p <= 1.0)) throw ParameterError("edge probability must lie in [0,1]");
  for (int p_value : p_values)
    if (p_value < 2) throw ParameterError("p values must be integers >= 2");
}

ExperimentConfig config_from_json(const nlohmann::json& j) {
  ExperimentConfig cfg;
  if (j.contains("kind")) cfg.kind = j["kind"].get<std::string>();
  if (j.contains("n_nodes")) cfg.n_nodes = j["n_nodes"].get<int>();
  if (j.contains("er_probability")) cfg.er_probability = j["er_probability"].get<double>();
  if (j.contains("seed")) cfg.seed = j["seed"].get<std::uint64_t>();
  if (j.contains("iterations")) cfg.iterations = j["iterations"].get<int>();
  if (j.contains("rho")) cfg.rho = j["rho"].get<double>();
  if (j.contains("alpha")) cfg.alpha = j["alpha"].get<double>();
  if (j.contains("p_values")) cfg.p_values = j["p_values"].get<std::vector<int>>();
  if (j.contains("n_instances")) cfg.n_instances = j["n_instances"].get<int>();
  if (j.contains("gamma_target")) cfg.gamma_target = j["gamma_target"].get<double>();
  if (j.contains("node_dim")) cfg.node_dim = j["node_dim"].get<int>();
  if (j.contains("rho_sweep")) cfg.rho_sweep = j["rho_sweep"].get<bool>();
  if (j.contains("sweep_points")) cfg.sweep_points = j["sweep_points"].get<int>();
  if (j.contains("sweep_p")) cfg.sweep_p = j["sweep_p"].get<int>();
  if (j.contains("sweep_max_iter")) cfg.sweep_max_iter = j["sweep_max_iter"].get<int>();
  if (j.contains("aux_precision")) cfg.aux_precision = j["aux_precision"].get<double>();
  if (j.contains("out_dir")) cfg.out_dir = j["out_dir"].get<std::string>();
  return cfg;
}

nlohmann::json config_to_json(const ExperimentConfig& cfg) {
  return {{"kind", cfg.kind},
          {"n_nodes", cfg.n_nodes},
          {"er_probability", cfg.er_probability},
          {"seed", cfg.seed},
          {"iterations", cfg.iterations},
          {"rho", cfg.rho},
          {"alpha", cfg.alpha},
          {"p_values", cfg.p_values},
          {"n_instances", cfg.n_instances},
          {"gamma_target", cfg.gamma_target},
          {"node_dim", cfg.node_dim},
          {"rho_sweep", cfg.rho_sweep},
          {"sweep_points", cfg.sweep_points},
          {"sweep_p", cfg.sweep_p},
          {"sweep_max_iter", cfg.sweep_max_iter},
          {"aux_precision", cfg.aux_precision},
          {"out_dir", cfg.out_dir}};
}

std::string format_double(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string trace_to_csv(const IterationTrace& trace) {
  std::string out =
      "k,aux_error_even_ref,aux_error_odd_ref,primal_sq_error,objective_subopt,fp_residual_sq\n";
  for (const auto& r : trace.rows) {
    out += std::to_string(r.k);
    out += ',';
    out += format_double(r.aux_error_even_ref);
    out += ',';
    out += format_double(r.aux_error_odd_ref);
    out += ',';
    out += format_double(r.primal_sq_error);
    out += ',';
    out += format_double(r.objective_subopt);
    out += ',';
    out += format_double(r.fp_residual_sq);
    out += '\n';
  }
  return out;
}

std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

Graph connected_er_graph(int n, double p, std::uint64_t base_seed,
                         std::vector<std::uint64_t>* skipped) {
  for (int attempt = 0; attempt < 1000; ++attempt) {
    const std::uint64_t seed = mix_seed(base_seed, kGraphStream + attempt);
    Graph g = er_generate(n, p, seed);
    if (is_connected(g)) return g;
    if (skipped) skipped->push_back(seed);
  }
  throw SolverError("no connected graph found in 1000 attempts");
}

PnormSweepResult run_pnorm_sweep(const ExperimentConfig& cfg) {
  cfg.check();
  ensure_out_dir(cfg.out_dir);
  PnormSweepResult result;
  result.graph = connected_er_graph(cfg.n_nodes, cfg.effective_er_probability(), cfg.seed,
                                    &result.skipped_graph_seeds);
  const Graph& g = result.graph;
  const int dim = cfg.effective_node_dim();

  Rng data_rng(mix_seed(cfg.seed, kDataStream));
  std::vector<Eigen::VectorXd> a(g.n_nodes);
  for (int i = 0; i < g.n_nodes; ++i) a[i] = normal_vector(data_rng, dim);

  auto make_problem = [&](int p) {
    std::vector<NodeObjective> objectives;
    for (int i = 0; i < g.n_nodes; ++i) objectives.emplace_back(PNormPower{p, a[i]});
    return ProblemInstance::build(g, std::move(objectives),
                                  build_consensus_constraints(g, dim));
  };

  const int edge_dim = make_problem(2).layout.edge_dim;
  Rng init_rng(mix_seed(cfg.seed, kInitStream));
  const Eigen::VectorXd z0 = normal_vector(init_rng, edge_dim);

  std::vector<std::string> outputs;
  const int iterations = cfg.effective_iterations();
  for (int p : cfg.p_values) {
    const ProblemInstance prob = make_problem(p);
    const Eigen::VectorXd x_star = centralized_oracle(prob);
    const double rho = cfg.rho > 0.0 ? cfg.rho : default_pnorm_rho(p);

    RunReferences refs;
    refs.x_star = x_star;
    refs.f_star = prob.objective_total(x_star);
    double initial_aux = std::numeric_limits<double>::quiet_NaN();
    if (edge_dim > 0) {
      const FixedPointRef ref = reference_point(prob, rho, x_star, z0);
      refs.z_tilde_even = ref.z_tilde_0;
      refs.z_tilde_odd = ref.z_tilde_1;
      initial_aux = (z0 - ref.z_tilde_0).squaredNorm();
    }

    PdmmConfig run_cfg;
    run_cfg.rho = rho;
    run_cfg.alpha = cfg.alpha;
    run_cfg.max_iter = iterations;
    RunResult rr = run(prob, run_cfg, z0, refs);

    PnormRunSummary summary;
    summary.p = p;
    summary.rho = rho;
    summary.initial_aux_even = initial_aux;
    summary.final_primal_sq_error =
        rr.trace.rows.empty() ? 0.0 : rr.trace.rows.back().primal_sq_error;
    summary.trace_path = path_join(cfg.out_dir, "trace_pnorm_p" + std::to_string(p) + ".csv");
    write_text_file(summary.trace_path, trace_to_csv(rr.trace));
    outputs.push_back(summary.trace_path);
    result.runs.push_back(summary);
    result.traces.push_back(std::move(rr.trace));
  }

  if (cfg.rho_sweep && edge_dim > 0) {
    const ProblemInstance prob = make_problem(cfg.sweep_p);
    const Eigen::VectorXd x_star = centralized_oracle(prob);
    const double center = cfg.rho > 0.0 ? cfg.rho : 1.0;
    std::string sweep_csv = "rho,iterations_to_precision\n";
    for (int i = 0; i < cfg.sweep_points; ++i) {
      const double frac =
          cfg.sweep_points == 1 ? 0.5 : static_cast<double>(i) / (cfg.sweep_points - 1);
      const double rho = center / 30.0 * std::pow(900.0, frac);  // [center/30, 30*center]
      const FixedPointRef ref = reference_point(prob, rho, x_star, z0);
      RunReferences refs;
      refs.z_tilde_even = ref.z_tilde_0;
      refs.z_tilde_odd = ref.z_tilde_1;
      PdmmConfig run_cfg;
      run_cfg.rho = rho;
      run_cfg.alpha = cfg.alpha;
      run_cfg.max_iter = cfg.sweep_max_iter;
      run_cfg.stop_rule = StopRule::AuxError;
      run_cfg.tol = cfg.aux_precision;
      const RunResult rr = run(prob, run_cfg, z0, refs);
      RhoSweepPoint pt;
      pt.rho = rho;
      const bool reached = !rr.trace.rows.empty() &&
                           (rr.state.k % 2 == 0 ? rr.trace.rows.back().aux_error_even_ref
                                                : rr.trace.rows.back().aux_error_odd_ref) <=
                               cfg.aux_precision;
      pt.iterations_to_precision = reached ? rr.state.k : -1;
      result.sweep.push_back(pt);
      sweep_csv += format_double(rho) + "," + std::to_string(pt.iterations_to_precision) + "\n";
    }
    const std::string sweep_path = path_join(cfg.out_dir, "sweep_pnorm.csv");
    write_text_file(sweep_path, sweep_csv);
    outputs.push_back(sweep_path);
  }

  if (edge_dim > 0) {
    SpectralReport rep = analyze(make_problem(cfg.p_values.empty() ? 3 : cfg.p_values.front()),
                                 cfg.rho > 0.0 ? cfg.rho : 1.0);
    const std::string report_path = path_join(cfg.out_dir, "report_pnorm.json");
    write_text_file(report_path, report_to_json(rep).dump(2) + "\n");
    outputs.push_back(report_path);
  }

  nlohmann::json summary;
  summary["graph"] = graph_to_json(g);
  nlohmann::json runs = nlohmann::json::array();
  for (const auto& r : result.runs)
    runs.push_back({{"p", r.p},
                    {"rho", r.rho},
                    {"final_primal_sq_error", r.final_primal_sq_error},
                    {"trace", std::filesystem::path(r.trace_path).filename().string()}});
  summary["runs"] = runs;
  if (!result.sweep.empty()) {
    nlohmann::json sweep = nlohmann::json::array();
    for (const auto& pt : result.sweep)
      sweep.push_back({{"rho", pt.rho}, {"iterations", pt.iterations_to_precision}});
    summary["rho_sweep"] = sweep;
  }
  const std::string summary_path = path_join(cfg.out_dir, "summary.json");
  write_text_file(summary_path, summary.dump(2) + "\n");
  outputs.push_back(summary_path);
  write_manifest(cfg, outputs, result.skipped_graph_seeds);
  return result;
}

L1CompareResult run_l1_compare(const ExperimentConfig& cfg) {
  cfg.check();
  ensure_out_dir(cfg.out_dir);
  L1CompareResult result;
  result.graph = connected_er_graph(cfg.n_nodes, cfg.effective_er_probability(), cfg.seed,
                                    &result.skipped_graph_seeds);
  const Graph& g = result.graph;
  const int dim = cfg.effective_node_dim();

  Rng data_rng(mix_seed(cfg.seed, kDataStream));
  std::vector<NodeObjective> objectives;
  for (int i = 0; i < g.n_nodes; ++i)
    objectives.emplace_back(L1{normal_vector(data_rng, dim)});
  const ProblemInstance prob = ProblemInstance::build(
      g, std::move(objectives), build_consensus_constraints(g, dim));

  Rng init_rng(mix_seed(cfg.seed, kInitStream));
  const Eigen::VectorXd z0 = normal_vector(init_rng, prob.layout.edge_dim);

  const Eigen::VectorXd x_star = centralized_oracle(prob);
  RunReferences refs;
  refs.x_star = x_star;
  refs.f_star = prob.objective_total(x_star);

  result.rho = cfg.rho > 0.0 ? cfg.rho : 0.5;
  const int iterations = cfg.effective_iterations();

  PdmmConfig plain_cfg;
  plain_cfg.rho = result.rho;
  plain_cfg.alpha = 1.0;
  plain_cfg.max_iter = iterations;
  result.plain_trace = run(prob, plain_cfg, z0, refs).trace;

  PdmmConfig avg_cfg = plain_cfg;
  avg_cfg.alpha = 0.5;
  result.averaged_trace = run(prob, avg_cfg, z0, refs).trace;

  PdmmConfig admm_cfg = avg_cfg;
  admm_cfg.admm_half_form = true;
  result.admm_trace = run(prob, admm_cfg, z0, refs).trace;

  result.admm_bit_identical = traces_bit_identical(result.averaged_trace, result.admm_trace);
  result.averaged_final_subopt = result.averaged_trace.rows.back().objective_subopt;
  const OscillationVerdict verdict =
      classify_oscillation(result.plain_trace.rows, result.averaged_final_subopt);
  result.plain_last_quarter_min = verdict.window_min;
  result.plain_sign_changes = verdict.sign_changes;
  result.plain_oscillatory = verdict.oscillatory;

  std::vector<std::string> outputs;
  for (const auto& [name, trace] :
       {std::pair<const char*, const IterationTrace*>{"trace_l1_plain.csv", &result.plain_trace},
        {"trace_l1_averaged.csv", &result.averaged_trace},
        {"trace_l1_admm.csv", &result.admm_trace}}) {
    const std::string path = path_join(cfg.out_dir, name);
    write_text_file(path, trace_to_csv(*trace));
    outputs.push_back(path);
  }

  const std::string report_path = path_join(cfg.out_dir, "report_l1.json");
  write_text_file(report_path, report_to_json(analyze(prob, result.rho)).dump(2) + "\n");
  outputs.push_back(report_path);

  nlohmann::json summary;
  summary["rho"] = result.rho;
  summary["averaged_final_subopt"] = result.averaged_final_subopt;
  summary["plain_last_quarter_min"] = result.plain_last_quarter_min;
  summary["plain_sign_changes"] = result.plain_sign_changes;
  summary["plain_oscillatory"] = result.plain_oscillatory;
  summary["admm_bit_identical"] = result.admm_bit_identical;
  const std::string summary_path = path_join(cfg.out_dir, "summary.json");
  write_text_file(summary_path, summary.dump(2) + "\n");
  outputs.push_back(summary_path);
  write_manifest(cfg, outputs, result.skipped_graph_seeds);
  return result;
}

QuadBoundResult run_quadratic_bound(const ExperimentConfig& cfg) {
  cfg.check();
  if (cfg.n_nodes < 2) throw ParameterError("quadratic_bound needs at least two nodes");
  ensure_out_dir(cfg.out_dir);
  QuadBoundResult result;
  std::vector<std::string> outputs;
  std::vector<std::uint64_t> skipped_graph_seeds;
  const int iterations = cfg.effective_iterations();
  const int dim = cfg.effective_node_dim();
  const double slack = 1.0 + 1e-8;

  for (int inst = 0; inst < cfg.n_instances; ++inst) {
    const std::uint64_t inst_seed = mix_seed(cfg.seed, kInstanceStream + inst);
    Graph g;
    try {
      g = connected_er_graph(cfg.n_nodes, cfg.effective_er_probability(), inst_seed,
                             &skipped_graph_seeds);
    } catch (const SolverError&) {
      result.skipped.push_back({inst, "no connected graph"});
      continue;
    }

    // The constraint geometry depends only on the graph and dimension;
    // measure it with placeholder quadratics before the real ones exist.
    std::vector<NodeObjective> placeholder;
    for (int i = 0; i < g.n_nodes; ++i)
      placeholder.emplace_back(Quadratic{Eigen::MatrixXd::Identity(dim, dim),
                                         Eigen::VectorXd::Zero(dim)});
    const ProblemInstance geometry = ProblemInstance::build(
        g, std::move(placeholder), build_consensus_constraints(g, dim));
    const Eigen::MatrixXd C = assemble_C(geometry);
    const Eigen::MatrixXd P = assemble_P(geometry.layout);
    const SingularExtremes se = singular_extremes(C);
    const double theta_F = friedrichs_angle(C, P);

    double delta_target = 0.0;
    try {
      delta_target = delta_for_rate_target(cfg.gamma_target, theta_F);
    } catch (const SolverError&) {
      result.skipped.push_back({inst, "gamma target unreachable for this graph"});
      continue;
    }
    const double sqrt_kappa = (1.0 + delta_target) / (1.0 - delta_target);
    const double kappa = sqrt_kappa * sqrt_kappa;
    const double mu = 1.0;
    const double beta = kappa * se.sigma_min_nz * se.sigma_min_nz /
                        (se.sigma_max * se.sigma_max) * mu;
    if (beta < mu) {
      result.skipped.push_back({inst, "required smoothness below strong convexity"});
      continue;
    }

    // Node Hessians with spectra inside [mu, beta], hitting both endpoints.
    Rng q_rng(mix_seed(inst_seed, kDataStream));
    std::vector<NodeObjective> objectives;
    for (int i = 0; i < g.n_nodes; ++i) {
      Eigen::VectorXd eigs(dim);
      for (int k = 0; k < dim; ++k) eigs[k] = q_rng.uniform(mu, beta);
      if (i == 0) eigs[0] = mu;
      if (i == std::min(1, g.n_nodes - 1)) eigs[0] = beta;
      const Eigen::MatrixXd V = random_orthogonal(q_rng, dim);
      Eigen::MatrixXd Q = V * eigs.asDiagonal() * V.transpose();
      Q = 0.5 * (Q + Q.transpose());
      objectives.emplace_back(Quadratic{Q, normal_vector(q_rng, dim)});
    }
    const ProblemInstance prob = ProblemInstance::build(
        g, std::move(objectives), build_consensus_constraints(g, dim));

    const ConvexityBounds cb = quadratic_convexity_bounds(prob);
    const OptimalRho opt = optimal_rho(cb.mu, cb.beta, se.sigma_max, se.sigma_min_nz);
    const double rho = opt.rho_star;
    const double delta = contraction_delta(rho, cb.mu, cb.beta, se.sigma_max, se.sigma_min_nz);
    const double gamma = gap_rate_gamma(delta, theta_F);

    const Eigen::VectorXd x_star = centralized_oracle(prob);
    Rng init_rng(mix_seed(inst_seed, kInitStream));
    Eigen::VectorXd z0_raw = normal_vector(init_rng, prob.layout.edge_dim);
    FixedPointRef ref = reference_point(prob, rho, x_star, z0_raw);
    Eigen::VectorXd direction = z0_raw - ref.z_tilde_0;
    while (direction.norm() < 1e-9) {
      z0_raw = normal_vector(init_rng, prob.layout.edge_dim);
      ref = reference_point(prob, rho, x_star, z0_raw);
      direction = z0_raw - ref.z_tilde_0;
    }
    // ||z0 - z_tilde_0||^2 chosen so the bound constant is exactly one.
    const double target_sq =
        rho * se.sigma_min_nz * se.sigma_min_nz * gamma / (se.sigma_max * se.sigma_max);
    const Eigen::VectorXd z0 =
        ref.z_tilde_0 + std::sqrt(target_sq) / direction.norm() * direction;
    const double epsilon = epsilon_bound(se.sigma_max, se.sigma_min_nz, rho, gamma, z0,
                                         ref.z_tilde_0);

    RunReferences refs;
    refs.z_tilde_even = ref.z_tilde_0;
    refs.z_tilde_odd = ref.z_tilde_1;
    refs.x_star = x_star;
    refs.f_star = prob.objective_total(x_star);

    PdmmConfig run_cfg;
    run_cfg.rho = rho;
    run_cfg.alpha = 1.0;
    run_cfg.max_iter = iterations;
    RunResult rr = run(prob, run_cfg, z0, refs);

    const double aux0 = (z0 - ref.z_tilde_0).squaredNorm();
    const double eq24_const =
        se.sigma_max * se.sigma_max / (rho * se.sigma_min_nz * se.sigma_min_nz);
    for (const auto& row : rr.trace.rows) {
      const double aux =
          row.k % 2 == 0 ? row.aux_error_even_ref : row.aux_error_odd_ref;
      const double bound = std::pow(cfg.gamma_target, row.k) * epsilon * slack;
      if (aux > bound) result.violations.push_back({inst, row.k, aux, bound});
      if (row.k % 2 == 0 && row.k >= 2) {
        const double prev = row.k == 2 ? aux0 : rr.trace.rows[row.k - 3].aux_error_even_ref;
        if (row.aux_error_even_ref > prev + 1e-10)
          result.fejer_violations.push_back({inst, row.k, row.aux_error_even_ref, prev});
      }
      // primal-from-auxiliary chain: x^{(k+1)} against z^{(k)} for even k
      const int k_prev = row.k - 1;
      if (k_prev % 2 == 0) {
        const double aux_prev =
            k_prev == 0 ? aux0 : rr.trace.rows[k_prev - 1].aux_error_even_ref;
        const double rhs = eq24_const * aux_prev;
        if (row.primal_sq_error > rhs)
          result.eq24_violations.push_back({inst, row.k, row.primal_sq_error, rhs});
      }
    }

    QuadBoundInstanceReport rep;
    rep.instance = inst;
    rep.spectral.sigma_max = se.sigma_max;
    rep.spectral.sigma_min_nz = se.sigma_min_nz;
    rep.spectral.mu = cb.mu;
    rep.spectral.beta = cb.beta;
    rep.spectral.kappa = opt.kappa;
    rep.spectral.theta_F = theta_F;
    rep.spectral.delta = delta;
    rep.spectral.gamma = gamma;
    rep.spectral.rho_star = opt.rho_star;
    rep.spectral.rho = rho;
    rep.spectral.epsilon = epsilon;
    rep.delta_target = delta_target;
    rep.epsilon = epsilon;
    result.initial_aux_even.push_back(aux0);

    const std::string trace_path =
        path_join(cfg.out_dir, "trace_quad_" + std::to_string(inst) + ".csv");
    write_text_file(trace_path, trace_to_csv(rr.trace));
    outputs.push_back(trace_path);
    nlohmann::json rj = report_to_json(rep.spectral);
    rj["delta_target"] = delta_target;
    rj["instance"] = inst;
    const std::string report_path =
        path_join(cfg.out_dir, "report_" + std::to_string(inst) + ".json");
    write_text_file(report_path, rj.dump(2) + "\n");
    outputs.push_back(report_path);

    result.instances.push_back(std::move(rep));
    result.traces.push_back(std::move(rr.trace));
  }

  nlohmann::json summary;
  summary["instances_run"] = result.instances.size();
  nlohmann::json skipped = nlohmann::json::array();
  for (const auto& s : result.skipped)
    skipped.push_back({{"instance", s.instance}, {"reason", s.reason}});
  summary["skipped"] = skipped;
  auto violations_json = [](const std::vector<BoundViolation>& vs) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& v : vs)
      arr.push_back(
          {{"instance", v.instance}, {"k", v.k}, {"value", v.value}, {"bound", v.bound}});
    return arr;
  };
  summary["violations"] = violations_json(result.violations);
  summary["fejer_violations"] = violations_json(result.fejer_violations);
  summary["eq24_violations"] = violations_json(result.eq24_violations);
  const std::string summary_path = path_join(cfg.out_dir, "summary.json");
  write_text_file(summary_path, summary.dump(2) + "\n");
  outputs.push_back(summary_path);
  write_manifest(cfg, outputs, skipped_graph_seeds);
  return result;
}

}  // namespace pdmm
