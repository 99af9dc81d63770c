#include <functional>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "glasso/errors.hpp"
#include "glasso/glasso.hpp"
#include "glasso/io.hpp"
#include "glasso/model_select.hpp"
#include "glasso/synthgen.hpp"

namespace {

using namespace glasso;

// Exit codes: 0 ok, 1 usage, 2 input parse/validation, 3 not positive
// definite, 4 did not converge (output still written), 5 degenerate data,
// 6 calibration bounds, 7 internal.
enum ExitCode {
  kOk = 0,
  kInputError = 2,
  kNotPd = 3,
  kNoConvergence = 4,
  kDegenerate = 5,
  kBounds = 6,
  kInternal = 7,
};

void diag(const char* kind, const std::string& message) {
  std::cerr << "error: " << kind << ": " << message << "\n";
}

int run_guarded(const std::function<int()>& body) {
  try {
    return body();
  } catch (const NonNumericCell& e) {
    diag("NonNumericCell", e.what());
    return kInputError;
  } catch (const ParseError& e) {
    diag("ParseError", e.what());
    return kInputError;
  } catch (const AsymmetricInput& e) {
    diag("AsymmetricInput", e.what());
    return kInputError;
  } catch (const DegenerateData& e) {
    diag("DegenerateData", e.what());
    return kDegenerate;
  } catch (const BoundsDoNotBracket& e) {
    diag("BoundsDoNotBracket", e.what());
    return kBounds;
  } catch (const NonPositivePivot& e) {
    diag("NonPositivePivot", e.what());
    return kNotPd;
  } catch (const NotPositiveDefinite& e) {
    diag("NotPositiveDefinite", e.what());
    return kNotPd;
  } catch (const InvalidDiagonal& e) {
    diag("InvalidDiagonal", e.what());
    return kNotPd;
  } catch (const Error& e) {
    diag("Error", e.what());
    return kInternal;
  } catch (const std::exception& e) {
    diag("Error", e.what());
    return kInternal;
  }
}

void write_output(const std::string& path, const std::string& text) {
  if (path == "-") {
    std::cout << text;
    return;
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open output file for writing: " + path);
  out << text;
}

struct IoOpts {
  std::string input;
  std::string input_kind = "observations";
  std::string format = "json";
  std::string output = "-";
};

void add_io_opts(CLI::App* cmd, IoOpts& io, const std::string& formats,
                 const std::string& default_kind = "observations") {
  io.input_kind = default_kind;
  cmd->add_option("-i,--input", io.input, "input CSV file")->required();
  cmd->add_option("--input-kind", io.input_kind, "observations|covariance")
      ->check(CLI::IsMember({"observations", "covariance"}));
  cmd->add_option("-f,--format", io.format, "output format: " + formats)
      ->check(CLI::IsMember(CLI::detail::split(formats, '|')));
  cmd->add_option("-o,--output", io.output, "output file, '-' for stdout");
}

CovarianceInput load_covariance(const IoOpts& io) {
  if (io.input_kind == "covariance") return read_covariance_csv(io.input);
  const Dataset data = read_observations_csv(io.input);
  CovarianceInput out;
  out.s = empirical_covariance(data);
  out.names = data.names;
  return out;
}

Mode parse_mode(const std::string& name) {
  if (name == "exact") return Mode::Exact;
  if (name == "mb-or") return Mode::MBor;
  if (name == "mb-and") return Mode::MBand;
  if (name == "invert") return Mode::InvertOnly;
  throw std::invalid_argument("unknown mode: " + name);
}

std::vector<double> parse_rho_grid(const std::string& text) {
  std::vector<double> grid;
  for (const std::string& tok : CLI::detail::split(text, ',')) {
    try {
      grid.push_back(std::stod(tok));
    } catch (const std::exception&) {
      throw std::invalid_argument("bad rho grid entry: '" + tok + "'");
    }
  }
  return grid;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"sparse inverse covariance estimation via the covariance lasso"};
  app.require_subcommand(1);

  // ---- fit ----
  auto* fit = app.add_subcommand("fit", "fit a penalized precision matrix");
  IoOpts fit_io;
  add_io_opts(fit, fit_io, "json|csv|dot");
  double fit_rho = -1.0;
  std::size_t fit_auto_target = 0;
  bool fit_has_auto = false;
  std::string fit_mode = "exact";
  double fit_tol = 1e-4;
  int fit_max_iter = 100;
  int fit_bisections = 8;
  auto* rho_opt = fit->add_option("--rho", fit_rho, "penalty value (>= 0)");
  auto* auto_opt = fit->add_option("--rho-auto", fit_auto_target,
                                   "calibrate rho toward this off-diagonal nonzero count (ordered pairs)");
  rho_opt->excludes(auto_opt);
  fit->add_option("--mode", fit_mode, "exact|mb-or|mb-and")
      ->check(CLI::IsMember({"exact", "mb-or", "mb-and"}));
  fit->add_option("--tol", fit_tol, "outer convergence threshold (default 1e-4)");
  fit->add_option("--max-iter", fit_max_iter, "outer sweep limit (default 100)");
  fit->add_option("--max-bisections", fit_bisections, "calibration bisection limit");

  // ---- invert ----
  auto* invert = app.add_subcommand("invert", "invert an SPD matrix via one regression sweep");
  IoOpts inv_io;
  add_io_opts(invert, inv_io, "json|csv|dot", "covariance");

  // ---- path ----
  auto* path = app.add_subcommand("path", "regularization path over a penalty grid");
  IoOpts path_io;
  add_io_opts(path, path_io, "json|csv");
  std::string path_grid_text;
  double path_tol = 1e-4;
  int path_max_iter = 100;
  path->add_option("--rho-grid", path_grid_text, "comma-separated penalties (default: 12 log-spaced)");
  path->add_option("--tol", path_tol, "outer convergence threshold");
  path->add_option("--max-iter", path_max_iter, "outer sweep limit");

  // ---- cv ----
  auto* cv = app.add_subcommand("cv", "k-fold cross-validation over a penalty grid");
  IoOpts cv_io;
  add_io_opts(cv, cv_io, "json|csv");
  std::string cv_grid_text;
  int cv_folds = 10;
  std::string cv_scheme = "likelihood";
  std::uint64_t cv_seed = 0;
  double cv_tol = 1e-4;
  int cv_max_iter = 100;
  int cv_threads = 1;
  cv->add_option("--rho-grid", cv_grid_text, "comma-separated penalties (default: 12 log-spaced)");
  cv->add_option("--folds", cv_folds, "fold count (default 10)");
  cv->add_option("--scheme", cv_scheme, "regression|likelihood")
      ->check(CLI::IsMember({"regression", "likelihood"}));
  cv->add_option("--seed", cv_seed, "fold assignment seed");
  cv->add_option("--tol", cv_tol, "outer convergence threshold");
  cv->add_option("--max-iter", cv_max_iter, "outer sweep limit");
  cv->add_option("--threads", cv_threads, "worker cap for fold fits");

  // ---- bench ----
  auto* bench = app.add_subcommand("bench", "synthetic timing benchmark");
  std::string bench_sizes = "100,200,400";
  std::string bench_kinds = "sparse,dense";
  std::string bench_methods = "exact,mb-or";
  std::size_t bench_n = 0;
  int bench_reps = 1;
  std::uint64_t bench_seed = 1;
  double bench_tol = 1e-4;
  int bench_max_iter = 100;
  int bench_bisections = 6;
  std::string bench_format = "csv";
  std::string bench_output = "-";
  bench->add_option("--sizes", bench_sizes, "comma-separated problem sizes");
  bench->add_option("--kinds", bench_kinds, "comma-separated: sparse,dense");
  bench->add_option("--methods", bench_methods, "comma-separated: exact,mb-or,mb-and");
  bench->add_option("--n", bench_n, "sample size (default 2p)");
  bench->add_option("--reps", bench_reps, "repetitions per cell (median reported)");
  bench->add_option("--seed", bench_seed, "base seed");
  bench->add_option("--tol", bench_tol, "outer convergence threshold");
  bench->add_option("--max-iter", bench_max_iter, "outer sweep limit");
  bench->add_option("--max-bisections", bench_bisections, "calibration bisection limit");
  bench->add_option("-f,--format", bench_format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  bench->add_option("-o,--output", bench_output, "output file, '-' for stdout");

  // ---- simulate ----
  auto* simulate = app.add_subcommand("simulate", "sample Gaussian data from a scenario");
  std::string sim_kind = "sparse";
  std::size_t sim_p = 10;
  std::size_t sim_n = 100;
  std::uint64_t sim_seed = 1;
  std::string sim_format = "csv";
  std::string sim_output = "-";
  simulate->add_option("--kind", sim_kind, "sparse|dense")
      ->check(CLI::IsMember({"sparse", "dense"}));
  simulate->add_option("--p", sim_p, "dimension");
  simulate->add_option("--n", sim_n, "sample size");
  simulate->add_option("--seed", sim_seed, "sampling seed");
  simulate->add_option("-f,--format", sim_format, "csv|json")->check(CLI::IsMember({"csv", "json"}));
  simulate->add_option("-o,--output", sim_output, "output file, '-' for stdout");

  CLI11_PARSE(app, argc, argv);

  if (fit->parsed()) {
    return run_guarded([&]() -> int {
      fit_has_auto = auto_opt->count() > 0;
      if (rho_opt->count() == 0 && !fit_has_auto)
        throw std::invalid_argument("fit: provide --rho or --rho-auto");
      const CovarianceInput in = load_covariance(fit_io);
      FitOptions fo;
      fo.tol = fit_tol;
      fo.max_iter = fit_max_iter;
      double rho = fit_rho;
      if (fit_has_auto) {
        const double top = max_abs_offdiag(in.s);
        if (!(top > 0.0)) {
          if (fit_auto_target > 0)
            throw BoundsDoNotBracket("fit: no off-diagonal mass to calibrate against");
          rho = 0.0;
        } else {
          rho = calibrate_rho(in.s, fit_auto_target, {top * 1e-3, top}, fit_bisections, fo);
        }
      }
      GlassoConfig cfg;
      cfg.rho = rho;
      cfg.outer_tol = fit_tol;
      cfg.max_outer_sweeps = fit_max_iter;
      cfg.mode = parse_mode(fit_mode);
      const GlassoSolution sol = glasso_fit(in.s, cfg);
      const KKTReport kkt = kkt_check(in.s, sol, 10.0 * fit_tol);
      std::string text;
      if (fit_io.format == "json")
        text = fit_result_json(sol, in.s, kkt, in.names);
      else if (fit_io.format == "csv")
        text = fit_result_csv(sol, in.names);
      else
        text = fit_result_dot(sol, in.names);
      write_output(fit_io.output, text);
      if (!sol.converged) {
        diag("NonConvergence", "sweep limit reached; best iterate written with converged=false");
        return kNoConvergence;
      }
      return kOk;
    });
  }

  if (invert->parsed()) {
    return run_guarded([&]() -> int {
      const CovarianceInput in = load_covariance(inv_io);
      GlassoConfig cfg;
      cfg.rho = 0.0;
      cfg.mode = Mode::InvertOnly;
      const GlassoSolution sol = glasso_fit(in.s, cfg);
      const KKTReport kkt = kkt_check(in.s, sol, 10.0 * cfg.outer_tol);
      std::string text;
      if (inv_io.format == "json")
        text = fit_result_json(sol, in.s, kkt, in.names);
      else if (inv_io.format == "csv")
        text = fit_result_csv(sol, in.names);
      else
        text = fit_result_dot(sol, in.names);
      write_output(inv_io.output, text);
      return kOk;
    });
  }

  if (path->parsed()) {
    return run_guarded([&]() -> int {
      const CovarianceInput in = load_covariance(path_io);
      const std::vector<double> grid =
          path_grid_text.empty() ? default_rho_grid(in.s) : parse_rho_grid(path_grid_text);
      FitOptions fo;
      fo.tol = path_tol;
      fo.max_iter = path_max_iter;
      const PathResult res = path_run(in.s, grid, fo);
      write_output(path_io.output, path_io.format == "json" ? path_result_json(res, in.names)
                                                            : path_result_csv(res, in.names));
      for (const PathPoint& pt : res.points)
        if (!pt.ok) {
          diag("PathPointFailed", "rho=" + format_double(pt.rho) + ": " + pt.error);
          return kInternal;
        }
      return kOk;
    });
  }

  if (cv->parsed()) {
    return run_guarded([&]() -> int {
      if (cv_io.input_kind != "observations")
        throw ParseError("cv: requires observations input", 0, 0);
      const Dataset data = read_observations_csv(cv_io.input);
      const SymMatrix s = empirical_covariance(data);
      const std::vector<double> grid =
          cv_grid_text.empty() ? default_rho_grid(s) : parse_rho_grid(cv_grid_text);
      FitOptions fo;
      fo.tol = cv_tol;
      fo.max_iter = cv_max_iter;
      fo.threads = cv_threads;
      const CVScheme scheme =
          cv_scheme == "regression" ? CVScheme::Regression : CVScheme::Likelihood;
      const CVResult res = cv_run(data, grid, cv_folds, scheme, cv_seed, fo);
      write_output(cv_io.output, cv_io.format == "json" ? cv_result_json(res) : cv_result_csv(res));
      return kOk;
    });
  }

  if (bench->parsed()) {
    return run_guarded([&]() -> int {
      std::vector<Scenario> scenarios;
      std::uint64_t seed = bench_seed;
      for (const std::string& kind_tok : CLI::detail::split(bench_kinds, ',')) {
        ScenarioKind kind;
        if (kind_tok == "sparse")
          kind = ScenarioKind::SparseAR1;
        else if (kind_tok == "dense")
          kind = ScenarioKind::Dense;
        else
          throw std::invalid_argument("unknown scenario kind: " + kind_tok);
        for (const std::string& size_tok : CLI::detail::split(bench_sizes, ',')) {
          Scenario scn;
          scn.kind = kind;
          scn.p = std::stoul(size_tok);
          scn.n = bench_n > 0 ? bench_n : 2 * scn.p;
          scn.seed = seed++;
          scenarios.push_back(scn);
        }
      }
      std::vector<Mode> methods;
      for (const std::string& tok : CLI::detail::split(bench_methods, ','))
        methods.push_back(parse_mode(tok));
      BenchOptions bo;
      bo.repetitions = bench_reps;
      bo.tol = bench_tol;
      bo.max_iter = bench_max_iter;
      bo.max_bisections = bench_bisections;
      const std::vector<BenchRecord> records = run_benchmark(scenarios, methods, bo);
      write_output(bench_output,
                   bench_format == "json" ? bench_records_json(records) : bench_records_csv(records));
      for (const BenchRecord& r : records)
        if (!r.ok) {
          diag("BenchCellFailed", r.error);
          return kInternal;
        }
      return kOk;
    });
  }

  // simulate
  return run_guarded([&]() -> int {
    Scenario scn;
    scn.kind = sim_kind == "sparse" ? ScenarioKind::SparseAR1 : ScenarioKind::Dense;
    scn.p = sim_p;
    scn.n = sim_n;
    scn.seed = sim_seed;
    const Dataset data = sample_gaussian(true_precision(scn), scn.n, scn.seed);
    if (sim_format == "csv") {
      write_output(sim_output, dataset_csv(data));
    } else {
      nlohmann::json out;
      out["command"] = "simulate";
      out["kind"] = sim_kind;
      out["p"] = scn.p;
      out["n"] = scn.n;
      out["seed"] = scn.seed;
      out["names"] = data.names;
      nlohmann::json rows = nlohmann::json::array();
      for (std::size_t i = 0; i < data.n(); ++i) {
        nlohmann::json row = nlohmann::json::array();
        for (std::size_t j = 0; j < data.p(); ++j) row.push_back(data.rows(i, j));
        rows.push_back(std::move(row));
      }
      out["rows"] = std::move(rows);
      write_output(sim_output, out.dump(2) + "\n");
    }
    return kOk;
  });
}
