#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <filesystem>

#include "pdmm/errors.hpp"
#include "pdmm/experiments.hpp"
#include "pdmm/json_io.hpp"
#include "test_support.hpp"

using namespace pdmm;

namespace {

std::string temp_dir(const std::string& name) {
  const auto dir = std::filesystem::temp_directory_path() / "pdmm_tests" / name;
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir.string();
}

}  // namespace

TEST_CASE("trace CSV has the frozen schema and deterministic formatting") {
  IterationTrace trace;
  TraceRow row;
  row.k = 1;
  row.aux_error_even_ref = 0.5;
  row.aux_error_odd_ref = 0.25;
  row.primal_sq_error = 1e-9;
  row.objective_subopt = std::numeric_limits<double>::quiet_NaN();
  row.fp_residual_sq = 2.0;
  trace.rows.push_back(row);
  const std::string csv = trace_to_csv(trace);
  CHECK(csv ==
        "k,aux_error_even_ref,aux_error_odd_ref,primal_sq_error,objective_subopt,"
        "fp_residual_sq\n1,0.5,0.25,1.0000000000000001e-09,nan,2\n");
}

TEST_CASE("config json round trip and hashing") {
  ExperimentConfig cfg;
  cfg.kind = "l1_compare";
  cfg.seed = 42;
  cfg.rho = 0.5;
  cfg.out_dir = "somewhere";
  const ExperimentConfig back = config_from_json(config_to_json(cfg));
  CHECK(back.kind == cfg.kind);
  CHECK(back.seed == cfg.seed);
  CHECK(back.rho == cfg.rho);
  CHECK(back.out_dir == cfg.out_dir);
  CHECK(fnv1a(config_to_json(cfg).dump()) == fnv1a(config_to_json(back).dump()));
  CHECK(fnv1a("a") != fnv1a("b"));
}

TEST_CASE("config validation rejects bad values") {
  ExperimentConfig cfg;
  cfg.kind = "nonsense";
  CHECK_THROWS_AS(cfg.check(), ParameterError);
  cfg.kind = "l1_compare";
  cfg.gamma_target = 1.5;
  CHECK_THROWS_AS(cfg.check(), ParameterError);
  cfg.gamma_target = 0.9;
  cfg.p_values = {1};
  CHECK_THROWS_AS(cfg.check(), ParameterError);
}

TEST_CASE("connected_er_graph records the skipped seeds") {
  std::vector<std::uint64_t> skipped;
  const Graph g = connected_er_graph(10, 0.15, 3, &skipped);
  CHECK(is_connected(g));
  // reproducible: the same base seed walks the same attempt seeds
  std::vector<std::uint64_t> skipped2;
  const Graph g2 = connected_er_graph(10, 0.15, 3, &skipped2);
  CHECK(g.edges == g2.edges);
  CHECK(skipped == skipped2);
}

TEST_CASE("pnorm experiment writes traces and is byte deterministic") {
  ExperimentConfig cfg;
  cfg.kind = "pnorm_sweep";
  cfg.n_nodes = 6;
  cfg.seed = 5;
  cfg.iterations = 60;
  cfg.p_values = {3, 4};
  cfg.out_dir = temp_dir("pnorm_a");
  const PnormSweepResult a = run_pnorm_sweep(cfg);
  REQUIRE(a.runs.size() == 2);
  CHECK(a.traces[0].rows.size() == 60);
  for (const auto& r : a.runs) CHECK(std::filesystem::exists(r.trace_path));
  CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / "manifest.json"));
  CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / "report_pnorm.json"));

  ExperimentConfig cfg2 = cfg;
  cfg2.out_dir = temp_dir("pnorm_b");
  run_pnorm_sweep(cfg2);
  for (const auto& name : {"trace_pnorm_p3.csv", "trace_pnorm_p4.csv", "summary.json"}) {
    const std::string one = read_text_file((std::filesystem::path(cfg.out_dir) / name).string());
    const std::string two = read_text_file((std::filesystem::path(cfg2.out_dir) / name).string());
    CHECK(one == two);
  }
}

TEST_CASE("single-node pnorm instance is exact after one iteration") {
  ExperimentConfig cfg;
  cfg.kind = "pnorm_sweep";
  cfg.n_nodes = 1;
  cfg.er_probability = 0.5;
  cfg.seed = 9;
  cfg.iterations = 1;
  cfg.p_values = {3};
  cfg.out_dir = temp_dir("pnorm_single");
  const PnormSweepResult out = run_pnorm_sweep(cfg);
  REQUIRE(out.runs.size() == 1);
  CHECK(out.runs[0].final_primal_sq_error <= 1e-20);
}

TEST_CASE("pnorm rho sweep reaches the auxiliary precision on a tiny instance") {
  ExperimentConfig cfg;
  cfg.kind = "pnorm_sweep";
  cfg.n_nodes = 5;
  cfg.seed = 3;
  cfg.iterations = 40;
  cfg.p_values = {3};
  cfg.rho_sweep = true;
  cfg.sweep_points = 7;
  cfg.sweep_max_iter = 100000;
  cfg.out_dir = temp_dir("pnorm_sweep");
  const PnormSweepResult out = run_pnorm_sweep(cfg);
  REQUIRE(out.sweep.size() == 7);
  for (const auto& pt : out.sweep) {
    CHECK(pt.iterations_to_precision > 0);
    CHECK(pt.iterations_to_precision < cfg.sweep_max_iter);
  }
  CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / "sweep_pnorm.csv"));
}

TEST_CASE("l1 experiment classifies the plain run and matches the half-form trace") {
  ExperimentConfig cfg;
  cfg.kind = "l1_compare";
  cfg.n_nodes = 8;
  cfg.seed = 1;
  cfg.iterations = 800;
  cfg.out_dir = temp_dir("l1");
  const L1CompareResult out = run_l1_compare(cfg);
  CHECK(out.rho == 0.5);
  CHECK(out.averaged_final_subopt <= 1e-6);
  CHECK(out.plain_oscillatory);
  CHECK(out.admm_bit_identical);
  CHECK(out.plain_trace.rows.size() == 800);
  for (const auto& name :
       {"trace_l1_plain.csv", "trace_l1_averaged.csv", "trace_l1_admm.csv", "summary.json"})
    CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) / name));
  const std::string avg =
      read_text_file((std::filesystem::path(cfg.out_dir) / "trace_l1_averaged.csv").string());
  const std::string admm =
      read_text_file((std::filesystem::path(cfg.out_dir) / "trace_l1_admm.csv").string());
  CHECK(avg == admm);
}

TEST_CASE("quadratic bound experiment holds on a small batch") {
  ExperimentConfig cfg;
  cfg.kind = "quadratic_bound";
  cfg.n_nodes = 8;
  cfg.seed = 11;
  cfg.n_instances = 10;
  cfg.iterations = 80;
  cfg.out_dir = temp_dir("quad");
  const QuadBoundResult out = run_quadratic_bound(cfg);
  CHECK(out.instances.size() + out.skipped.size() == 10);
  REQUIRE(!out.instances.empty());
  CHECK(out.violations.empty());
  CHECK(out.fejer_violations.empty());
  CHECK(out.eq24_violations.empty());
  for (const auto& inst : out.instances) {
    CHECK(inst.epsilon == doctest::Approx(1.0).epsilon(1e-9));
    // the realized contraction matches the bisection target
    CHECK(inst.spectral.delta == doctest::Approx(inst.delta_target).epsilon(1e-9));
    CHECK(inst.spectral.gamma == doctest::Approx(cfg.gamma_target).epsilon(1e-9));
    CHECK(std::filesystem::exists(std::filesystem::path(cfg.out_dir) /
                                  ("report_" + std::to_string(inst.instance) + ".json")));
    CHECK(std::filesystem::exists(
        std::filesystem::path(cfg.out_dir) /
        ("trace_quad_" + std::to_string(inst.instance) + ".csv")));
  }

  // determinism of one full trace file
  ExperimentConfig cfg2 = cfg;
  cfg2.out_dir = temp_dir("quad_b");
  run_quadratic_bound(cfg2);
  const std::string name = "trace_quad_" + std::to_string(out.instances[0].instance) + ".csv";
  CHECK(read_text_file((std::filesystem::path(cfg.out_dir) / name).string()) ==
        read_text_file((std::filesystem::path(cfg2.out_dir) / name).string()));
}

TEST_CASE("quadratic bound skips record their reasons in the summary") {
  ExperimentConfig cfg;
  cfg.kind = "quadratic_bound";
  cfg.n_nodes = 8;
  cfg.seed = 11;
  cfg.n_instances = 10;
  cfg.iterations = 20;
  cfg.out_dir = temp_dir("quad_skips");
  const QuadBoundResult out = run_quadratic_bound(cfg);
  const auto summary = nlohmann::json::parse(
      read_text_file((std::filesystem::path(cfg.out_dir) / "summary.json").string()));
  CHECK(summary["skipped"].size() == out.skipped.size());
  CHECK(summary["violations"].empty());
  const auto manifest = nlohmann::json::parse(
      read_text_file((std::filesystem::path(cfg.out_dir) / "manifest.json").string()));
  CHECK(manifest["experiment"] == "quadratic_bound");
  CHECK(manifest.contains("config_hash"));
  CHECK(manifest.contains("outputs"));
}
