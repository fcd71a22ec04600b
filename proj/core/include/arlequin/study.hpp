#pragma once

#include <cstdint>
#include <functional>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "arlequin/coefficients.hpp"
#include "arlequin/geometry.hpp"
#include "arlequin/optimizer.hpp"
#include "arlequin/solver.hpp"

namespace arlequin {

struct MeshConfig {
  double H = 0.5;
  int refine_ratio = 0;           // fixed m; 0 means derive from cells_per_period
  double cells_per_period = 10.0; // h = eps / cells_per_period
};

struct AcceptanceThresholds {
  std::optional<double> max_final_rel_error;  // relative error at the smallest eps
  bool monotone_error = false;                // error strictly decreasing as eps shrinks
};

enum class OptimizationMode { Scalar, Matrix };

struct StudyConfig {
  DomainSpec geometry;
  MeshConfig mesh;
  std::string coefficient;
  ParamMap coefficient_params;
  std::vector<double> eps;
  OptimizationMode mode = OptimizationMode::Scalar;
  OptimizerSettings optimizer;
  SolverOptions solver;
  std::string enrichment = "auto";  // auto | none | both
  int bc_direction = 1;
  std::vector<int> oracle_resolutions{64, 128, 256};
  std::string output = "results";
  std::uint64_t seed = 12345;
  AcceptanceThresholds acceptance;

  static StudyConfig from_json(const std::string& text);
  static StudyConfig from_file(const std::string& path);

  void validate() const;
  int refine_ratio_for(double eps) const;
  std::vector<int> enrichment_directions() const;
  // canonical echo of every input that affects results (output path excluded)
  std::string canonical_json() const;
  std::string hash() const;
};

struct ResultRow {
  std::string config_hash;
  std::string coefficient;
  std::string mode;
  int bc_direction = 1;
  double eps = 0.0;
  double H = 0.0;
  double h = 0.0;
  int refine_ratio = 0;
  Matrix2 kbar_opt = Matrix2::Zero();
  double J_final = 0.0;
  Matrix2 kstar = Matrix2::Zero();
  double error = 0.0;
  double rel_error = 0.0;
  double rhs1 = 0.0;
  double rhs2 = 0.0;
  bool condition1 = false;
  bool condition2 = false;
  int iterations = 0;
  int evaluations = 0;
  std::string termination;
  bool under_resolved = false;
  bool outside_theory = false;
  bool ok = false;
  std::string message;
  double wall_time = 0.0;  // not part of the deterministic CSV
};

using ProgressFn = std::function<void(const std::string&)>;

std::vector<ResultRow> run_sweep(const StudyConfig& config, int workers = 1, const ProgressFn& progress = {});

// kbar error against the oracle: scalar |k - k*_jj|, matrix |k e_j - k* e_j|
void fill_error(ResultRow& row);

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows);
void write_timings_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::vector<ResultRow> read_results_csv(std::istream& is);
void write_manifest(std::ostream& os, const StudyConfig& config, const std::vector<ResultRow>& rows);

bool thresholds_met(const StudyConfig& config, const std::vector<ResultRow>& rows, std::string* why = nullptr);

std::string hex_hash(const std::string& text);

// report
struct ReportLine {
  double eps = 0.0;
  double error = 0.0;
  std::optional<double> slope;  // against the previous (larger) eps
};

std::vector<ReportLine> convergence_table(const std::vector<ResultRow>& rows);
std::optional<double> fitted_slope(const std::vector<ReportLine>& lines);
std::string render_report(const std::vector<ResultRow>& rows);
void write_report_csv(std::ostream& os, const std::vector<ResultRow>& rows);
std::string plot_script(const std::string& results_csv);

}  // namespace arlequin
