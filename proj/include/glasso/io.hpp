#pragma once

#include <span>
#include <string>
#include <vector>

#include "glasso/glasso.hpp"
#include "glasso/model_select.hpp"
#include "glasso/synthgen.hpp"

namespace glasso {

enum class InputKind { ObservationsCsv, CovarianceCsv };

struct CovarianceInput {
  SymMatrix s{1};
  std::vector<std::string> names;
};

// CSV dialect: comma-separated cells, no quoting, optional header row.
// A first row that parses entirely as numbers is treated as data and names
// default to col0..col(p-1). Numeric failures raise NonNumericCell with
// 1-based line/column; structural problems raise ParseError.
Dataset read_observations_csv(const std::string& path);

// p x p numeric matrix, same header convention. Entries must match across
// the diagonal within 1e-10 (AsymmetricInput otherwise) and are symmetrized
// by averaging.
CovarianceInput read_covariance_csv(const std::string& path);

// 17 significant digits, enough to round-trip a double through text.
std::string format_double(double v);

std::string dataset_csv(const Dataset& data);

std::string fit_result_json(const GlassoSolution& sol, const SymMatrix& s,
                            const KKTReport& kkt, const std::vector<std::string>& names);
std::string fit_result_csv(const GlassoSolution& sol, const std::vector<std::string>& names);
std::string fit_result_dot(const GlassoSolution& sol, const std::vector<std::string>& names);

std::string path_result_json(const PathResult& path, const std::vector<std::string>& names);
std::string path_result_csv(const PathResult& path, const std::vector<std::string>& names);

std::string cv_result_json(const CVResult& cv);
std::string cv_result_csv(const CVResult& cv);

std::string bench_records_json(std::span<const BenchRecord> records);
std::string bench_records_csv(std::span<const BenchRecord> records);

const char* mode_name(Mode mode);
const char* scenario_kind_name(ScenarioKind kind);

}  // namespace glasso
