#include <CLI11.hpp>
#include <cstdio>
#include <iostream>
#include <string>

#include "pdmm/analysis.hpp"
#include "pdmm/errors.hpp"
#include "pdmm/experiments.hpp"
#include "pdmm/json_io.hpp"
#include "pdmm/rng.hpp"
#include "pdmm/stepsize.hpp"

namespace {

using pdmm::ExperimentConfig;

void add_common_options(CLI::App* cmd, ExperimentConfig& cfg, std::string& config_path) {
  cmd->add_option("--config", config_path, "JSON config file; flags override its fields");
  cmd->add_option("--n", cfg.n_nodes, "node count");
  cmd->add_option("--p-edge", cfg.er_probability, "edge probability (default ln(N)/N)");
  cmd->add_option("--seed", cfg.seed, "base seed");
  cmd->add_option("--iters", cfg.iterations, "iteration count");
  cmd->add_option("--rho", cfg.rho, "step size (default per experiment)");
  cmd->add_option("--alpha", cfg.alpha, "averaging weight in (0,1]");
  cmd->add_option("--dim", cfg.node_dim, "per-node variable dimension");
  cmd->add_option("--out", cfg.out_dir, "output directory");
}

ExperimentConfig merge_config(const ExperimentConfig& flags, const std::string& config_path,
                              const CLI::App* cmd) {
  ExperimentConfig cfg = flags;
  if (!config_path.empty()) {
    cfg = pdmm::config_from_json(nlohmann::json::parse(pdmm::read_text_file(config_path)));
    // Re-apply any flag the user passed explicitly.
    auto take = [&](const char* name, auto member) {
      if (cmd->count(name) > 0) cfg.*member = flags.*member;
    };
    take("--n", &ExperimentConfig::n_nodes);
    take("--p-edge", &ExperimentConfig::er_probability);
    take("--seed", &ExperimentConfig::seed);
    take("--iters", &ExperimentConfig::iterations);
    take("--rho", &ExperimentConfig::rho);
    take("--alpha", &ExperimentConfig::alpha);
    take("--dim", &ExperimentConfig::node_dim);
    take("--out", &ExperimentConfig::out_dir);
  }
  return cfg;
}

pdmm::ProblemInstance generated_instance(const std::string& family, int n, double p_edge,
                                         std::uint64_t seed, int dim, int pnorm_p) {
  std::vector<std::uint64_t> skipped;
  const double p = p_edge > 0.0 ? p_edge : std::log(static_cast<double>(n)) / n;
  pdmm::Graph g = pdmm::connected_er_graph(n, p, seed, &skipped);
  pdmm::Rng rng(pdmm::mix_seed(seed, 2));
  std::vector<pdmm::NodeObjective> objectives;
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd a(dim);
    for (int k = 0; k < dim; ++k) a[k] = rng.normal();
    if (family == "quadratic") {
      Eigen::MatrixXd G(dim, dim);
      for (int r = 0; r < dim; ++r)
        for (int c = 0; c < dim; ++c) G(r, c) = rng.normal();
      Eigen::MatrixXd Q = G.transpose() * G + Eigen::MatrixXd::Identity(dim, dim);
      objectives.emplace_back(pdmm::Quadratic{Q, a});
    } else if (family == "pnorm") {
      objectives.emplace_back(pdmm::PNormPower{pnorm_p, a});
    } else if (family == "l1") {
      objectives.emplace_back(pdmm::L1{a});
    } else {
      throw pdmm::ParameterError("unknown objective family '" + family + "'");
    }
  }
  return pdmm::ProblemInstance::build(g, std::move(objectives),
                                      pdmm::build_consensus_constraints(g, dim));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"PDMM solver and experiment harness"};
  app.require_subcommand(1);

  ExperimentConfig pnorm_cfg, l1_cfg, quad_cfg;
  std::string pnorm_config_path, l1_config_path, quad_config_path;

  auto* pnorm = app.add_subcommand("pnorm", "p-norm consensus convergence runs");
  add_common_options(pnorm, pnorm_cfg, pnorm_config_path);
  pnorm->add_option("--p-values", pnorm_cfg.p_values, "list of p exponents");
  pnorm->add_flag("--sweep", pnorm_cfg.rho_sweep, "also run the step-size sweep");
  pnorm->add_option("--sweep-p", pnorm_cfg.sweep_p, "p used by the sweep");
  pnorm->add_option("--sweep-points", pnorm_cfg.sweep_points, "sweep grid size");

  auto* l1 = app.add_subcommand("l1", "l1 consensus: plain vs averaged comparison");
  add_common_options(l1, l1_cfg, l1_config_path);

  auto* quad = app.add_subcommand("quad-bound", "geometric rate bound over random instances");
  add_common_options(quad, quad_cfg, quad_config_path);
  quad->add_option("--instances", quad_cfg.n_instances, "instance count");
  quad->add_option("--gamma", quad_cfg.gamma_target, "target rate bound in (0,1)");

  std::string analyze_problem_path, analyze_family = "quadratic", analyze_out;
  int analyze_n = 10, analyze_dim = 3, analyze_p = 3;
  double analyze_rho = 0.0, analyze_p_edge = -1.0;
  std::uint64_t analyze_seed = 1;
  auto* analyze_cmd = app.add_subcommand("analyze", "spectral / rate report for an instance");
  analyze_cmd->add_option("--problem", analyze_problem_path, "problem JSON file");
  analyze_cmd->add_option("--family", analyze_family, "generated family: quadratic|pnorm|l1");
  analyze_cmd->add_option("--n", analyze_n, "node count");
  analyze_cmd->add_option("--p-edge", analyze_p_edge, "edge probability");
  analyze_cmd->add_option("--seed", analyze_seed, "seed");
  analyze_cmd->add_option("--dim", analyze_dim, "node dimension");
  analyze_cmd->add_option("--pnorm-p", analyze_p, "p for the pnorm family");
  analyze_cmd->add_option("--rho", analyze_rho, "step size (default rho*)");
  analyze_cmd->add_option("--out", analyze_out, "write the report here instead of stdout");

  int step_n = 10, step_dim = 3, step_rounds = -1;
  double step_p_edge = -1.0;
  std::uint64_t step_seed = 1;
  std::string step_out;
  auto* step_cmd = app.add_subcommand("stepsize", "distributed step-size selection protocol");
  step_cmd->add_option("--n", step_n, "node count");
  step_cmd->add_option("--p-edge", step_p_edge, "edge probability");
  step_cmd->add_option("--seed", step_seed, "seed");
  step_cmd->add_option("--dim", step_dim, "node dimension");
  step_cmd->add_option("--rounds", step_rounds, "rounds (default: graph diameter)");
  step_cmd->add_option("--out", step_out, "write the transcript here");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (pnorm->parsed()) {
      ExperimentConfig cfg = merge_config(pnorm_cfg, pnorm_config_path, pnorm);
      cfg.kind = "pnorm_sweep";
      pdmm::run_pnorm_sweep(cfg);
      std::cout << "pnorm traces written to " << cfg.out_dir << "\n";
    } else if (l1->parsed()) {
      ExperimentConfig cfg = merge_config(l1_cfg, l1_config_path, l1);
      cfg.kind = "l1_compare";
      const auto result = pdmm::run_l1_compare(cfg);
      std::cout << "averaged final suboptimality: " << result.averaged_final_subopt
                << "\nplain flagged oscillatory: " << (result.plain_oscillatory ? "yes" : "no")
                << "\noutputs in " << cfg.out_dir << "\n";
    } else if (quad->parsed()) {
      ExperimentConfig cfg = merge_config(quad_cfg, quad_config_path, quad);
      cfg.kind = "quadratic_bound";
      const auto result = pdmm::run_quadratic_bound(cfg);
      std::cout << "instances run: " << result.instances.size()
                << ", skipped: " << result.skipped.size()
                << ", bound violations: " << result.violations.size() << "\noutputs in "
                << cfg.out_dir << "\n";
      if (!result.violations.empty()) return 3;
    } else if (analyze_cmd->parsed()) {
      pdmm::ProblemInstance prob =
          analyze_problem_path.empty()
              ? generated_instance(analyze_family, analyze_n, analyze_p_edge, analyze_seed,
                                   analyze_dim, analyze_p)
              : pdmm::problem_from_json(
                    nlohmann::json::parse(pdmm::read_text_file(analyze_problem_path)));
      const auto report = pdmm::analyze(prob, analyze_rho);
      const std::string text = pdmm::report_to_json(report).dump(2) + "\n";
      if (analyze_out.empty())
        std::cout << text;
      else
        pdmm::write_text_file(analyze_out, text);
    } else if (step_cmd->parsed()) {
      pdmm::ProblemInstance prob = generated_instance("quadratic", step_n, step_p_edge,
                                                      step_seed, step_dim, 3);
      pdmm::DiffusionResult result;
      if (step_rounds < 0) {
        result = pdmm::select_stepsize(prob);
      } else {
        std::vector<pdmm::NodeEstimates> init(prob.graph.n_nodes);
        for (int i = 0; i < prob.graph.n_nodes; ++i) init[i] = pdmm::local_init(prob, i);
        result = pdmm::diffuse(prob.graph, init, step_rounds);
      }
      std::cout << "rounds: " << result.rounds.size() - 1
                << ", messages: " << result.messages << "\n";
      for (int i = 0; i < prob.graph.n_nodes; ++i)
        std::cout << "node " << i << ": rho* = " << pdmm::format_double(result.rho_star[i])
                  << "\n";
      if (result.insufficient_rounds)
        std::cout << "warning: fewer rounds than the graph diameter; values may be local\n";
      if (!step_out.empty()) {
        nlohmann::json transcript = nlohmann::json::array();
        for (const auto& round : result.rounds) {
          nlohmann::json row = nlohmann::json::array();
          for (const auto& e : round)
            row.push_back({{"sigma_max", e.sigma_max},
                           {"sigma_min_nz", e.sigma_min_nz},
                           {"mu", e.mu},
                           {"beta", e.beta}});
          transcript.push_back(row);
        }
        nlohmann::json out = {{"rho_star", result.rho_star},
                              {"messages", result.messages},
                              {"insufficient_rounds", result.insufficient_rounds},
                              {"rounds", transcript}};
        pdmm::write_text_file(step_out, out.dump(2) + "\n");
      }
    }
  } catch (const pdmm::ParameterError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 2;
  } catch (const pdmm::StructuralError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const pdmm::SolverError& e) {
    std::cerr << "numerical failure: " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  }
  return 0;
}
