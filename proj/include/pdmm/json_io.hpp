#pragma once

#include <json.hpp>
#include <string>

#include "pdmm/analysis.hpp"
#include "pdmm/graph.hpp"
#include "pdmm/problem.hpp"

namespace pdmm {

// Graph <-> {"n": N, "edges": [[i, j], ...]}
nlohmann::json graph_to_json(const Graph& g);
Graph graph_from_json(const nlohmann::json& j);

// Problem <-> {"graph": ..., "objectives": [{"kind": ...}, ...],
//              "constraints": [{"i","j","A_ij","A_ji","b"}, ...] | {"consensus": {"dim": M}}}
// Matrices are row-major nested arrays.
nlohmann::json problem_to_json(const ProblemInstance& prob);
ProblemInstance problem_from_json(const nlohmann::json& j);

nlohmann::json report_to_json(const SpectralReport& rep);

nlohmann::json matrix_to_json(const Eigen::MatrixXd& m);
Eigen::MatrixXd matrix_from_json(const nlohmann::json& j);
nlohmann::json vector_to_json(const Eigen::VectorXd& v);
Eigen::VectorXd vector_from_json(const nlohmann::json& j);

std::string read_text_file(const std::string& path);
void write_text_file(const std::string& path, const std::string& content);

}  // namespace pdmm
