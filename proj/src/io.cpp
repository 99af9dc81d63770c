#include "glasso/io.hpp"

#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include <json.hpp>

#include "glasso/errors.hpp"

namespace glasso {

namespace {

using nlohmann::json;

std::string trim(const std::string& s) {
  std::size_t b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  std::size_t e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_line(const std::string& line) {
  std::vector<std::string> cells;
  std::size_t start = 0;
  for (;;) {
    const std::size_t comma = line.find(',', start);
    if (comma == std::string::npos) {
      cells.push_back(trim(line.substr(start)));
      break;
    }
    cells.push_back(trim(line.substr(start, comma - start)));
    start = comma + 1;
  }
  return cells;
}

bool parse_number(const std::string& cell, double& out) {
  const char* first = cell.data();
  const char* last = first + cell.size();
  auto [ptr, ec] = std::from_chars(first, last, out);
  return ec == std::errc{} && ptr == last && !cell.empty();
}

struct RawTable {
  std::vector<std::string> names;  // empty entries filled with col#
  std::vector<std::vector<double>> rows;
  std::vector<std::size_t> line_numbers;  // 1-based source line per data row
};

RawTable read_table(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open file: " + path, 0, 0);

  RawTable table;
  std::string line;
  std::size_t line_no = 0;
  bool header_decided = false;
  std::size_t width = 0;

  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    const std::vector<std::string> cells = split_line(line);

    if (!header_decided) {
      header_decided = true;
      width = cells.size();
      bool all_numeric = true;
      std::vector<double> values(cells.size());
      for (std::size_t c = 0; c < cells.size(); ++c)
        if (!parse_number(cells[c], values[c])) {
          all_numeric = false;
          break;
        }
      if (all_numeric) {
        for (std::size_t c = 0; c < width; ++c) table.names.push_back("col" + std::to_string(c));
        table.rows.push_back(std::move(values));
        table.line_numbers.push_back(line_no);
      } else {
        table.names = cells;
      }
      continue;
    }

    if (cells.size() != width)
      throw ParseError("line " + std::to_string(line_no) + ": expected " + std::to_string(width) +
                           " cells, found " + std::to_string(cells.size()),
                       line_no, cells.size());
    std::vector<double> values(width);
    for (std::size_t c = 0; c < width; ++c)
      if (!parse_number(cells[c], values[c]))
        throw NonNumericCell("line " + std::to_string(line_no) + ", column " +
                                 std::to_string(c + 1) + ": not a number: '" + cells[c] + "'",
                             line_no, c + 1);
    table.rows.push_back(std::move(values));
    table.line_numbers.push_back(line_no);
  }

  if (table.names.empty()) throw ParseError("empty input: " + path, line_no, 0);
  return table;
}

json matrix_json(const SymMatrix& m) {
  json rows = json::array();
  for (std::size_t i = 0; i < m.dim(); ++i) {
    json row = json::array();
    for (std::size_t j = 0; j < m.dim(); ++j) row.push_back(m(i, j));
    rows.push_back(std::move(row));
  }
  return rows;
}

json edges_json(const GlassoSolution& sol, const std::vector<std::string>& names) {
  json out = json::array();
  for (const Edge& e : edge_set(sol.theta, default_zero_tol(sol.theta))) {
    json item;
    item["i"] = e.first;
    item["j"] = e.second;
    item["source"] = names[e.first];
    item["target"] = names[e.second];
    item["theta"] = sol.theta(e.first, e.second);
    out.push_back(std::move(item));
  }
  return out;
}

}  // namespace

Dataset read_observations_csv(const std::string& path) {
  RawTable table = read_table(path);
  if (table.rows.size() < 2)
    throw ParseError("observations: need at least 2 data rows", table.line_numbers.empty() ? 1 : table.line_numbers.back(), 0);
  Matrix rows(table.rows.size(), table.names.size());
  for (std::size_t i = 0; i < table.rows.size(); ++i)
    for (std::size_t j = 0; j < table.names.size(); ++j) rows(i, j) = table.rows[i][j];
  return Dataset::from_rows(std::move(rows), std::move(table.names));
}

CovarianceInput read_covariance_csv(const std::string& path) {
  RawTable table = read_table(path);
  const std::size_t p = table.names.size();
  if (table.rows.size() != p)
    throw ParseError("covariance: expected " + std::to_string(p) + " rows for " +
                         std::to_string(p) + " columns, found " + std::to_string(table.rows.size()),
                     table.line_numbers.empty() ? 1 : table.line_numbers.back(), 0);

  constexpr double kSymTol = 1e-10;
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j)
      if (std::abs(table.rows[i][j] - table.rows[j][i]) > kSymTol)
        throw AsymmetricInput("covariance: entries (" + std::to_string(i) + "," + std::to_string(j) +
                                  ") and (" + std::to_string(j) + "," + std::to_string(i) +
                                  ") differ by more than 1e-10",
                              i, j);

  CovarianceInput out;
  out.s = SymMatrix(p);
  for (std::size_t i = 0; i < p; ++i) {
    out.s.set(i, i, table.rows[i][i]);
    for (std::size_t j = i + 1; j < p; ++j)
      out.s.set(i, j, 0.5 * (table.rows[i][j] + table.rows[j][i]));
  }
  out.names = std::move(table.names);
  return out;
}

std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::string dataset_csv(const Dataset& data) {
  std::ostringstream out;
  for (std::size_t j = 0; j < data.p(); ++j) {
    if (j) out << ',';
    out << data.names[j];
  }
  out << '\n';
  for (std::size_t i = 0; i < data.n(); ++i) {
    for (std::size_t j = 0; j < data.p(); ++j) {
      if (j) out << ',';
      out << format_double(data.rows(i, j));
    }
    out << '\n';
  }
  return out.str();
}

std::string fit_result_json(const GlassoSolution& sol, const SymMatrix& s,
                            const KKTReport& kkt, const std::vector<std::string>& names) {
  json out;
  out["command"] = sol.mode == Mode::InvertOnly ? "invert" : "fit";
  out["mode"] = mode_name(sol.mode);
  out["rho"] = sol.rho;
  out["p"] = sol.w.dim();
  out["converged"] = sol.converged;
  out["outer_sweeps"] = sol.outer_sweeps;
  out["final_change"] = sol.final_change;
  out["names"] = names;
  out["W"] = matrix_json(sol.w);
  out["Theta"] = matrix_json(sol.theta);
  out["edges"] = edges_json(sol, names);
  out["kkt"] = {{"passed", kkt.passed},
                {"max_offdiag_violation", kkt.max_offdiag_violation},
                {"max_sign_violation", kkt.max_sign_violation}};
  try {
    out["objective"] = penalized_loglik(sol.theta, s, sol.rho);
  } catch (const NotPositiveDefinite&) {
    out["objective"] = nullptr;  // approximate Theta can leave the cone
  }
  return out.dump(2) + "\n";
}

std::string fit_result_csv(const GlassoSolution& sol, const std::vector<std::string>& names) {
  std::ostringstream out;
  out << "i,j,source,target,theta\n";
  for (const Edge& e : edge_set(sol.theta, default_zero_tol(sol.theta)))
    out << e.first << ',' << e.second << ',' << names[e.first] << ',' << names[e.second] << ','
        << format_double(sol.theta(e.first, e.second)) << '\n';
  return out.str();
}

std::string fit_result_dot(const GlassoSolution& sol, const std::vector<std::string>& names) {
  std::ostringstream out;
  out << "graph precision {\n";
  for (const std::string& name : names) out << "  \"" << name << "\";\n";
  for (const Edge& e : edge_set(sol.theta, default_zero_tol(sol.theta)))
    out << "  \"" << names[e.first] << "\" -- \"" << names[e.second] << "\" [weight="
        << format_double(sol.theta(e.first, e.second)) << "];\n";
  out << "}\n";
  return out.str();
}

std::string path_result_json(const PathResult& path, const std::vector<std::string>& names) {
  json out;
  out["command"] = "path";
  out["rho_grid"] = path.rho_grid;
  out["names"] = names;
  json points = json::array();
  const std::size_t p = names.size();
  for (const PathPoint& pt : path.points) {
    json item;
    item["rho"] = pt.rho;
    item["ok"] = pt.ok;
    if (!pt.ok) {
      item["error"] = pt.error;
      points.push_back(std::move(item));
      continue;
    }
    item["converged"] = pt.converged;
    item["kkt_passed"] = pt.kkt_passed;
    item["outer_sweeps"] = pt.outer_sweeps;
    item["coef_l1"] = pt.coef_l1;
    json edges = json::array();
    for (const Edge& e : pt.edges)
      edges.push_back({{"i", e.first}, {"j", e.second}, {"source", names[e.first]}, {"target", names[e.second]}});
    item["edges"] = std::move(edges);
    json coefs;
    std::size_t k = 0;
    for (std::size_t i = 0; i < p; ++i)
      for (std::size_t j = i + 1; j < p; ++j) coefs[names[i] + ":" + names[j]] = pt.pair_coefs[k++];
    item["pair_coefs"] = std::move(coefs);
    points.push_back(std::move(item));
  }
  out["points"] = std::move(points);
  return out.dump(2) + "\n";
}

std::string path_result_csv(const PathResult& path, const std::vector<std::string>& names) {
  std::ostringstream out;
  const std::size_t p = names.size();
  out << "rho,ok,converged,kkt_passed,edges,coef_l1";
  for (std::size_t i = 0; i < p; ++i)
    for (std::size_t j = i + 1; j < p; ++j) out << ',' << names[i] << ':' << names[j];
  out << '\n';
  for (const PathPoint& pt : path.points) {
    out << format_double(pt.rho) << ',' << (pt.ok ? 1 : 0) << ',' << (pt.converged ? 1 : 0) << ','
        << (pt.kkt_passed ? 1 : 0) << ',' << pt.edges.size() << ',' << format_double(pt.coef_l1);
    if (pt.ok)
      for (double c : pt.pair_coefs) out << ',' << format_double(c);
    else
      for (std::size_t k = 0; k < p * (p - 1) / 2; ++k) out << ',';
    out << '\n';
  }
  return out.str();
}

std::string cv_result_json(const CVResult& cv) {
  json out;
  out["command"] = "cv";
  out["scheme"] = cv.scheme == CVScheme::Regression ? "regression" : "likelihood";
  out["higher_is_better"] = cv.scheme == CVScheme::Likelihood;
  out["folds"] = cv.folds;
  out["rho_grid"] = cv.rho_grid;
  out["mean_scores"] = cv.mean_scores;
  out["std_errors"] = cv.std_errors;
  json scores = json::array();
  for (int f = 0; f < cv.folds; ++f) {
    json row = json::array();
    for (std::size_t g = 0; g < cv.rho_grid.size(); ++g) {
      const double v = cv.scores(f, g);
      if (std::isnan(v))
        row.push_back(nullptr);
      else
        row.push_back(v);
    }
    scores.push_back(std::move(row));
  }
  out["scores"] = std::move(scores);
  json failures = json::array();
  for (const CVFailure& f : cv.failures) {
    json item;
    item["fold"] = f.fold;
    if (f.rho_index)
      item["rho_index"] = *f.rho_index;
    else
      item["rho_index"] = nullptr;
    item["message"] = f.message;
    failures.push_back(std::move(item));
  }
  out["failures"] = std::move(failures);
  return out.dump(2) + "\n";
}

std::string cv_result_csv(const CVResult& cv) {
  std::ostringstream out;
  out << "rho,mean_score,std_error";
  for (int f = 0; f < cv.folds; ++f) out << ",fold" << f;
  out << '\n';
  for (std::size_t g = 0; g < cv.rho_grid.size(); ++g) {
    out << format_double(cv.rho_grid[g]) << ',' << format_double(cv.mean_scores[g]) << ','
        << format_double(cv.std_errors[g]);
    for (int f = 0; f < cv.folds; ++f) {
      const double v = cv.scores(f, g);
      out << ',';
      if (!std::isnan(v)) out << format_double(v);
    }
    out << '\n';
  }
  return out.str();
}

std::string bench_records_json(std::span<const BenchRecord> records) {
  json out;
  out["command"] = "bench";
  json rows = json::array();
  for (const BenchRecord& r : records) {
    json item;
    item["kind"] = scenario_kind_name(r.scenario.kind);
    item["p"] = r.scenario.p;
    item["n"] = r.scenario.n;
    item["seed"] = r.scenario.seed;
    item["method"] = mode_name(r.method);
    item["rho"] = r.rho;
    item["ok"] = r.ok;
    if (!r.ok) item["error"] = r.error;
    item["wall_seconds"] = r.wall_seconds;
    item["exact_time_ratio"] = r.exact_time_ratio;
    item["outer_sweeps"] = r.outer_sweeps;
    item["nonzeros_found"] = r.nonzeros_found;
    item["nonzeros_true"] = r.nonzeros_true;
    rows.push_back(std::move(item));
  }
  out["records"] = std::move(rows);
  return out.dump(2) + "\n";
}

std::string bench_records_csv(std::span<const BenchRecord> records) {
  std::ostringstream out;
  out << "kind,p,n,seed,method,rho,ok,wall_seconds,exact_time_ratio,outer_sweeps,nonzeros_found,nonzeros_true,error\n";
  for (const BenchRecord& r : records) {
    out << scenario_kind_name(r.scenario.kind) << ',' << r.scenario.p << ',' << r.scenario.n << ','
        << r.scenario.seed << ',' << mode_name(r.method) << ',' << format_double(r.rho) << ','
        << (r.ok ? 1 : 0) << ',' << format_double(r.wall_seconds) << ','
        << format_double(r.exact_time_ratio) << ',' << r.outer_sweeps << ',' << r.nonzeros_found
        << ',' << r.nonzeros_true << ',' << r.error << '\n';
  }
  return out.str();
}

const char* mode_name(Mode mode) {
  switch (mode) {
    case Mode::Exact: return "exact";
    case Mode::MBor: return "mb-or";
    case Mode::MBand: return "mb-and";
    case Mode::InvertOnly: return "invert";
  }
  return "unknown";
}

const char* scenario_kind_name(ScenarioKind kind) {
  switch (kind) {
    case ScenarioKind::SparseAR1: return "sparse";
    case ScenarioKind::Dense: return "dense";
  }
  return "unknown";
}

}  // namespace glasso
