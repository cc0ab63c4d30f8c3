#include "greedyopt/io.hpp"

#include <charconv>
#include <cstdint>
#include <cstdio>
#include <fstream>
#include <sstream>

namespace greedyopt::io {

namespace {

bool ends_with(const std::string& s, const std::string& suffix) {
  return s.size() >= suffix.size() && s.compare(s.size() - suffix.size(), suffix.size(), suffix) == 0;
}

json parse(const std::string& text, const std::string& what) {
  try {
    return json::parse(text);
  } catch (const json::exception& e) {
    fail(ErrorKind::ConfigError, what + ": " + e.what());
  }
}

double number(const json& j) {
  require(j.is_number(), ErrorKind::ConfigError, "expected a number");
  return j.get<double>();
}

}  // namespace

std::string read_text(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  require(in.good(), ErrorKind::ConfigError, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  require(out.good(), ErrorKind::ConfigError, "cannot write " + path);
  out << text;
  require(out.good(), ErrorKind::ConfigError, "write failed for " + path);
}

json matrix_to_json(const MatrixXd& m) {
  json rows = json::array();
  for (Index i = 0; i < m.rows(); ++i) {
    json row = json::array();
    for (Index j = 0; j < m.cols(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return {{"dim", m.rows()}, {"rows", rows}};
}

MatrixXd matrix_from_json(const json& j) {
  const json& rows = j.is_object() ? j.at("rows") : j;
  require(rows.is_array() && !rows.empty(), ErrorKind::ConfigError, "matrix rows must be a non-empty array");
  const std::size_t cols = rows.front().is_array() ? rows.front().size() : 0;
  require(cols > 0, ErrorKind::ConfigError, "matrix rows must be non-empty arrays");
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(cols));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    require(rows[i].is_array() && rows[i].size() == cols, ErrorKind::ConfigError, "ragged matrix rows");
    for (std::size_t k = 0; k < cols; ++k) m(Index(i), Index(k)) = number(rows[i][k]);
  }
  if (j.is_object() && j.contains("dim"))
    require(j.at("dim").is_number_integer() && j.at("dim").get<Index>() == m.rows(), ErrorKind::ConfigError,
            "matrix dim field disagrees with rows");
  return m;
}

json vector_to_json(const VectorXd& v) {
  json a = json::array();
  for (Index i = 0; i < v.size(); ++i) a.push_back(v(i));
  return a;
}

VectorXd vector_from_json(const json& j) {
  if (j.is_object()) {
    MatrixXd m = matrix_from_json(j);
    require(m.cols() == 1 || m.rows() == 1, ErrorKind::ConfigError, "expected a vector");
    return m.reshaped();
  }
  require(j.is_array(), ErrorKind::ConfigError, "expected a JSON array");
  VectorXd v(static_cast<Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) v(Index(i)) = number(j[i]);
  return v;
}

std::string format_double(double x) {
  char buf[64];
  auto res = std::to_chars(buf, buf + sizeof(buf), x);
  return std::string(buf, res.ptr);
}

std::string matrix_to_csv(const MatrixXd& m) {
  std::string out;
  for (Index i = 0; i < m.rows(); ++i) {
    for (Index j = 0; j < m.cols(); ++j) {
      if (j) out += ',';
      out += format_double(m(i, j));
    }
    out += '\n';
  }
  return out;
}

MatrixXd matrix_from_csv(const std::string& text) {
  std::vector<std::vector<double>> rows;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    std::vector<double> row;
    std::istringstream cells(line);
    std::string cell;
    while (std::getline(cells, cell, ',')) {
      const auto first = cell.find_first_not_of(" \t");
      const auto last = cell.find_last_not_of(" \t");
      require(first != std::string::npos, ErrorKind::ConfigError, "empty CSV cell");
      const std::string token = cell.substr(first, last - first + 1);
      double value = 0;
      auto res = std::from_chars(token.data(), token.data() + token.size(), value);
      require(res.ec == std::errc() && res.ptr == token.data() + token.size(), ErrorKind::ConfigError,
              "bad CSV number '" + token + "'");
      row.push_back(value);
    }
    require(rows.empty() || row.size() == rows.front().size(), ErrorKind::ConfigError, "ragged CSV rows");
    rows.push_back(std::move(row));
  }
  require(!rows.empty(), ErrorKind::ConfigError, "empty CSV");
  MatrixXd m(static_cast<Index>(rows.size()), static_cast<Index>(rows.front().size()));
  for (std::size_t i = 0; i < rows.size(); ++i)
    for (std::size_t j = 0; j < rows[i].size(); ++j) m(Index(i), Index(j)) = rows[i][j];
  return m;
}

MatrixXd load_matrix(const std::string& path) {
  const std::string text = read_text(path);
  if (ends_with(path, ".csv")) return matrix_from_csv(text);
  return matrix_from_json(parse(text, path));
}

VectorXd load_vector(const std::string& path) {
  const std::string text = read_text(path);
  if (ends_with(path, ".csv")) {
    MatrixXd m = matrix_from_csv(text);
    require(m.rows() == 1 || m.cols() == 1, ErrorKind::ConfigError, "expected a single CSV row or column");
    return m.reshaped();
  }
  return vector_from_json(parse(text, path));
}

json lag_moments_to_json(const LagMoments<double>& r) {
  json lags = json::array();
  for (const auto& m : r.lags()) lags.push_back(matrix_to_json(m));
  return {{"dim", r.dim()}, {"max_lag", r.max_lag()}, {"lags", lags}};
}

LagMoments<double> lag_moments_from_json(const json& j) {
  require(j.is_object() && j.contains("lags") && j.at("lags").is_array(), ErrorKind::ConfigError,
          "lag moments need a \"lags\" array");
  std::vector<MatrixXd> lags;
  for (const auto& m : j.at("lags")) lags.push_back(matrix_from_json(m));
  LagMoments<double> r(std::move(lags));
  if (j.contains("max_lag"))
    require(j.at("max_lag").get<long>() == static_cast<long>(r.max_lag()), ErrorKind::ConfigError,
            "max_lag disagrees with lag count");
  if (j.contains("dim"))
    require(j.at("dim").get<Index>() == r.dim(), ErrorKind::ConfigError, "dim disagrees with lag shape");
  return r;
}

json filter_to_json(const MatrixFilter<double>& q) {
  json taps = json::array();
  for (const auto& t : q.taps()) taps.push_back(matrix_to_json(t));
  return {{"dim", q.dim()}, {"taps", taps}};
}

MatrixFilter<double> filter_from_json(const json& j) {
  require(j.is_object() && j.contains("taps") && j.at("taps").is_array(), ErrorKind::ConfigError,
          "filter needs a \"taps\" array");
  std::vector<MatrixXd> taps;
  for (const auto& m : j.at("taps")) taps.push_back(matrix_from_json(m));
  return MatrixFilter<double>(std::move(taps));
}

json region_params(const TrustRegion<double>& region) {
  return std::visit(overloaded{[](const Frobenius<double>& r) { return json{{"budget", r.budget}}; },
                               [](const Spectral<double>& r) { return json{{"tau", r.tau}, {"lambda", r.lambda}}; },
                               [](const Lyapunov<double>& r) { return json{{"budget", r.budget}}; },
                               [](const Diagonal<double>& r) {
                                 return json{{"budget", r.budget}, {"costs", vector_to_json(r.costs)}};
                               }},
                    region);
}

json solution_to_json(const TrustRegion<double>& region, const OptimalSolution<double>& sol) {
  return {{"family", family_name(region)},
          {"params", region_params(region)},
          {"q", matrix_to_json(sol.q)},
          {"power", sol.power}};
}

LeastSquaresProblem<double> problem_from_json(const json& j) {
  require(j.is_object() && j.contains("jac") && j.contains("y"), ErrorKind::ConfigError,
          "problem needs \"jac\" and \"y\"");
  LeastSquaresProblem<double> p{matrix_from_json(j.at("jac")), vector_from_json(j.at("y"))};
  validate(p);
  return p;
}

std::string step_records_csv(const std::vector<StepRecord<double>>& records) {
  std::string out = "step,selected";
  const std::size_t k = records.empty() ? 0 : records.front().objectives.size();
  for (std::size_t i = 0; i < k; ++i) out += ",J_" + std::to_string(i);
  out += ",update_norm\n";
  for (const auto& r : records) {
    out += std::to_string(r.step) + "," + std::to_string(r.selected);
    for (double j : r.objectives) out += "," + format_double(j);
    out += "," + format_double(r.update.norm()) + "\n";
  }
  return out;
}

std::string dump(const json& j) { return j.dump(2) + "\n"; }

std::string fnv1a_hex(const std::string& bytes) {
  std::uint64_t h = 14695981039346656037ull;
  for (unsigned char c : bytes) {
    h ^= c;
    h *= 1099511628211ull;
  }
  char buf[17];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

}  // namespace greedyopt::io
