#include "pdmm/json_io.hpp"

#include <fstream>
#include <sstream>

#include "pdmm/errors.hpp"

namespace pdmm {

namespace {

nlohmann::json number_or_null(double v) {
  if (std::isfinite(v)) return v;
  return nullptr;
}

}  // namespace

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m) {
  nlohmann::json rows = nlohmann::json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    nlohmann::json row = nlohmann::json::array();
    for (Eigen::Index c = 0; c < m.cols(); ++c) row.push_back(m(r, c));
    rows.push_back(std::move(row));
  }
  return rows;
}

Eigen::MatrixXd matrix_from_json(const nlohmann::json& j) {
  if (!j.is_array() || j.empty()) throw ParameterError("matrix JSON must be a nonempty array");
  const Eigen::Index rows = static_cast<Eigen::Index>(j.size());
  const Eigen::Index cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(rows, cols);
  for (Eigen::Index r = 0; r < rows; ++r) {
    if (static_cast<Eigen::Index>(j[r].size()) != cols)
      throw ParameterError("matrix JSON rows have uneven lengths");
    for (Eigen::Index c = 0; c < cols; ++c) m(r, c) = j[r][c].get<double>();
  }
  return m;
}

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json out = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  if (!j.is_array()) throw ParameterError("vector JSON must be an array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) v[i] = j[i].get<double>();
  return v;
}

nlohmann::json graph_to_json(const Graph& g) {
  nlohmann::json edges = nlohmann::json::array();
  for (const auto& [i, j] : g.edges) edges.push_back({i, j});
  return {{"n", g.n_nodes}, {"edges", edges}};
}

Graph graph_from_json(const nlohmann::json& j) {
  std::vector<std::pair<int, int>> edges;
  for (const auto& e : j.at("edges")) edges.emplace_back(e.at(0).get<int>(), e.at(1).get<int>());
  return Graph::from_edges(j.at("n").get<int>(), std::move(edges));
}

nlohmann::json problem_to_json(const ProblemInstance& prob) {
  nlohmann::json j;
  j["graph"] = graph_to_json(prob.graph);
  nlohmann::json objectives = nlohmann::json::array();
  for (const auto& f : prob.objectives) {
    nlohmann::json o;
    std::visit(
        [&](const auto& v) {
          using T = std::decay_t<decltype(v)>;
          if constexpr (std::is_same_v<T, Quadratic>) {
            o["kind"] = "quadratic";
            o["Q"] = matrix_to_json(v.Q);
            o["q"] = vector_to_json(v.q);
          } else if constexpr (std::is_same_v<T, PNormPower>) {
            o["kind"] = "pnorm";
            o["p"] = v.p;
            o["a"] = vector_to_json(v.a);
          } else {
            o["kind"] = "l1";
            o["a"] = vector_to_json(v.a);
          }
        },
        f);
    objectives.push_back(std::move(o));
  }
  j["objectives"] = objectives;
  if (prob.consensus_like && prob.graph.n_nodes > 0) {
    j["constraints"] = {{"consensus", {{"dim", prob.layout.node_dim(0)}}}};
  } else {
    nlohmann::json cons = nlohmann::json::array();
    for (const auto& c : prob.constraints)
      cons.push_back({{"i", c.i},
                      {"j", c.j},
                      {"A_ij", matrix_to_json(c.A_ij)},
                      {"A_ji", matrix_to_json(c.A_ji)},
                      {"b", vector_to_json(c.b)}});
    j["constraints"] = cons;
  }
  return j;
}

ProblemInstance problem_from_json(const nlohmann::json& j) {
  Graph g = graph_from_json(j.at("graph"));
  std::vector<NodeObjective> objectives;
  for (const auto& o : j.at("objectives")) {
    const std::string kind = o.at("kind").get<std::string>();
    if (kind == "quadratic")
      objectives.emplace_back(Quadratic{matrix_from_json(o.at("Q")), vector_from_json(o.at("q"))});
    else if (kind == "pnorm")
      objectives.emplace_back(PNormPower{o.at("p").get<int>(), vector_from_json(o.at("a"))});
    else if (kind == "l1")
      objectives.emplace_back(L1{vector_from_json(o.at("a"))});
    else
      throw ParameterError("unknown objective kind '" + kind + "'");
  }
  std::vector<EdgeConstraint> constraints;
  const auto& c = j.at("constraints");
  if (c.is_object() && c.contains("consensus")) {
    constraints = build_consensus_constraints(g, c["consensus"].at("dim").get<int>());
  } else {
    for (const auto& e : c) {
      EdgeConstraint ec;
      ec.i = e.at("i").get<int>();
      ec.j = e.at("j").get<int>();
      ec.A_ij = matrix_from_json(e.at("A_ij"));
      ec.A_ji = matrix_from_json(e.at("A_ji"));
      ec.b = vector_from_json(e.at("b"));
      constraints.push_back(std::move(ec));
    }
  }
  return ProblemInstance::build(std::move(g), std::move(objectives), std::move(constraints));
}

nlohmann::json report_to_json(const SpectralReport& rep) {
  return {{"sigma_max", number_or_null(rep.sigma_max)},
          {"sigma_min_nz", number_or_null(rep.sigma_min_nz)},
          {"mu", number_or_null(rep.mu)},
          {"beta", number_or_null(rep.beta)},
          {"kappa", number_or_null(rep.kappa)},
          {"theta_F", number_or_null(rep.theta_F)},
          {"delta", number_or_null(rep.delta)},
          {"gamma", number_or_null(rep.gamma)},
          {"rho_star", number_or_null(rep.rho_star)},
          {"rho", number_or_null(rep.rho)},
          {"epsilon", number_or_null(rep.epsilon)}};
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParameterError("cannot read " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text_file(const std::string& path, const std::string& content) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw ParameterError("cannot write " + path);
  out << content;
  if (!out) throw ParameterError("write failed for " + path);
}

}  // namespace pdmm
