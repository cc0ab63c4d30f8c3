#pragma once

// File formats. Matrices are JSON {"dim", "rows"} or headerless row-major
// CSV; everything structured is JSON, per-step streams are CSV.

#include <json.hpp>

#include <iosfwd>
#include <string>
#include <vector>

#include "greedyopt/dynamic.hpp"
#include "greedyopt/endpoints.hpp"
#include "greedyopt/switch.hpp"

namespace greedyopt::io {

using json = nlohmann::json;
using Eigen::MatrixXd;
using Eigen::VectorXd;

std::string read_text(const std::string& path);
void write_text(const std::string& path, const std::string& text);

json matrix_to_json(const MatrixXd& m);
/// Accepts {"dim", "rows"} or a bare array of rows.
MatrixXd matrix_from_json(const json& j);
json vector_to_json(const VectorXd& v);
VectorXd vector_from_json(const json& j);

std::string matrix_to_csv(const MatrixXd& m);
MatrixXd matrix_from_csv(const std::string& text);

/// Picks CSV or JSON by file extension.
MatrixXd load_matrix(const std::string& path);
/// Vector from a JSON array, a {"dim","rows"} column, or a one-row/one-column CSV.
VectorXd load_vector(const std::string& path);

json lag_moments_to_json(const LagMoments<double>& r);
LagMoments<double> lag_moments_from_json(const json& j);

json filter_to_json(const MatrixFilter<double>& q);
MatrixFilter<double> filter_from_json(const json& j);

json region_params(const TrustRegion<double>& region);
json solution_to_json(const TrustRegion<double>& region, const OptimalSolution<double>& sol);

LeastSquaresProblem<double> problem_from_json(const json& j);

/// step, selected, J_0..J_{K-1}, ||delta||_2
std::string step_records_csv(const std::vector<StepRecord<double>>& records);

/// Shortest round-trip decimal form of a double.
std::string format_double(double x);

/// Stable JSON dump with full double precision.
std::string dump(const json& j);

/// 64-bit FNV-1a, printed as 16 hex digits.
std::string fnv1a_hex(const std::string& bytes);

}  // namespace greedyopt::io
