#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>

#include "arlequin/errors.hpp"
#include "arlequin/objective.hpp"
#include "arlequin/optimizer.hpp"
#include "arlequin/oracle.hpp"
#include "arlequin/solver.hpp"
#include "arlequin/study.hpp"

namespace fs = std::filesystem;
using namespace arlequin;

namespace {

struct Common {
  std::string config;
  std::string out;
  int workers = 1;
  bool verbose = false;
};

struct Context {
  StudyConfig config;
  fs::path out;
  bool verbose;

  std::ofstream open(const std::string& name) const {
    fs::create_directories(out);
    std::ofstream f(out / name);
    if (!f) throw ConfigError("cannot write " + (out / name).string());
    return f;
  }
  void log(const std::string& msg) const {
    if (verbose) std::cerr << msg << '\n';
  }
};

Context load(const Common& c) {
  Context ctx{StudyConfig::from_file(c.config), {}, c.verbose};
  ctx.out = c.out.empty() ? fs::path(ctx.config.output) : fs::path(c.out);
  return ctx;
}

CoupledProblem make_problem(const Context& ctx, double eps) {
  const auto& c = ctx.config;
  auto disc = Discretization::create(c.geometry, c.mesh.H, c.refine_ratio_for(eps));
  return CoupledProblem(disc, coefficient_zoo(c.coefficient, c.coefficient_params), eps, c.enrichment_directions(),
                        c.solver);
}

Matrix2 kbar_from(const std::vector<double>& v) {
  Matrix2 k;
  if (v.size() == 1)
    k = v[0] * Matrix2::Identity();
  else if (v.size() == 3)
    k << v[0], v[2], v[2], v[1];
  else
    throw ConfigError("--kbar takes one value (scalar) or three (k11 k22 k12)");
  return k;
}

std::string tag(double eps) {
  std::ostringstream os;
  os << "eps_" << eps;
  return os.str();
}

int cmd_oracle(const Context& ctx) {
  const auto& c = ctx.config;
  const auto t = homogenized_tensor(coefficient_zoo(c.coefficient, c.coefficient_params), c.oracle_resolutions);
  write_oracle_csv(std::cout, t);
  auto f = ctx.open("oracle.csv");
  write_oracle_csv(f, t);
  return 0;
}

int cmd_solve(const Context& ctx, const std::vector<double>& kbar) {
  for (double eps : ctx.config.eps) {
    const auto p = make_problem(ctx, eps);
    const auto s = p.solve(kbar_from(kbar), ctx.config.bc_direction);
    auto f = ctx.open("solution_" + tag(eps) + ".csv");
    write_solution_csv(f, p, s);
    std::cout << "eps=" << eps << " residual=" << s.residual << " constraint=" << s.constraint_residual << '\n';
  }
  return 0;
}

int cmd_objective(const Context& ctx, const std::vector<double>& kbar) {
  const Matrix2 k = kbar_from(kbar);
  const bool scalar = kbar.size() == 1;
  auto f = ctx.open("objective.csv");
  f.precision(17);
  std::cout.precision(12);
  f << "eps,k11,k22,k12,J,dJ,d2J\n";
  for (double eps : ctx.config.eps) {
    const auto p = make_problem(ctx, eps);
    const auto e = eval_J(p, k, ctx.config.bc_direction, scalar);
    f << eps << ',' << k(0, 0) << ',' << k(1, 1) << ',' << k(0, 1) << ',' << e.J << ',';
    if (e.dJ) f << *e.dJ;
    f << ',';
    if (e.d2J) f << *e.d2J;
    f << '\n';
    std::cout << "eps=" << eps << " J=" << e.J;
    if (e.dJ) std::cout << " dJ=" << *e.dJ << " d2J=" << *e.d2J;
    std::cout << '\n';
  }
  return 0;
}

OptimizationTrace optimize(const Context& ctx, const CoupledProblem& p) {
  const auto& c = ctx.config;
  return c.mode == OptimizationMode::Scalar ? optimize_scalar(p, c.bc_direction, c.optimizer)
                                            : optimize_matrix(p, c.bc_direction, c.optimizer);
}

int cmd_optimize(const Context& ctx) {
  for (double eps : ctx.config.eps) {
    const auto p = make_problem(ctx, eps);
    const auto t = optimize(ctx, p);
    auto f = ctx.open("trace_" + tag(eps) + ".csv");
    write_trace_csv(f, t);
    std::cout << "eps=" << eps << " kbar=[" << t.kbar_opt(0, 0) << ' ' << t.kbar_opt(1, 1) << ' ' << t.kbar_opt(0, 1)
              << "] J=" << t.J_opt << " evals=" << t.evaluations << " stop=" << t.termination << '\n';
  }
  return 0;
}

int cmd_check_conditions(const Context& ctx, std::optional<double> best_j) {
  auto f = ctx.open("conditions.csv");
  bool header = true;
  for (double eps : ctx.config.eps) {
    const auto p = make_problem(ctx, eps);
    const double j = best_j ? *best_j : optimize(ctx, p).J_opt;
    const auto r = check_conditions(p.discretization(), ctx.config.bc_direction, j);
    write_conditions_csv(f, r, header);
    write_conditions_csv(std::cout, r, header);
    header = false;
  }
  return 0;
}

int cmd_sweep(const Context& ctx, int workers) {
  const auto rows = run_sweep(ctx.config, workers, [&](const std::string& m) { ctx.log(m); });
  {
    auto f = ctx.open("results.csv");
    write_results_csv(f, rows);
  }
  {
    auto f = ctx.open("timings.csv");
    write_timings_csv(f, rows);
  }
  {
    auto f = ctx.open("manifest.json");
    write_manifest(f, ctx.config, rows);
  }
  {
    auto f = ctx.open("report.txt");
    f << render_report(rows);
  }
  {
    auto f = ctx.open("plot.gp");
    f << plot_script("results.csv");
  }
  std::cout << render_report(rows);
  std::string why;
  if (!thresholds_met(ctx.config, rows, &why)) {
    std::cerr << "acceptance: " << why << '\n';
    return 1;
  }
  return 0;
}

int cmd_report(const std::string& results, const std::string& out) {
  std::ifstream in(results);
  if (!in) throw ConfigError("cannot open " + results);
  const auto rows = read_results_csv(in);
  std::cout << render_report(rows);
  if (!out.empty()) {
    fs::create_directories(out);
    std::ofstream f(fs::path(out) / "report.csv");
    write_report_csv(f, rows);
    std::ofstream g(fs::path(out) / "plot.gp");
    g << plot_script(fs::absolute(results).string());
  }
  bool all_ok = true;
  for (const auto& r : rows) all_ok = all_ok && r.ok;
  return all_ok ? 0 : 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Arlequin coupling and homogenized-coefficient identification"};
  app.require_subcommand(1);
  Common common;
  auto add_common = [&](CLI::App* sub, bool need_config = true) {
    auto* opt = sub->add_option("--config", common.config, "study configuration (JSON)");
    if (need_config) opt->required()->check(CLI::ExistingFile);
    sub->add_option("--out", common.out, "output directory (defaults to the config's output)");
    sub->add_option("--workers", common.workers, "worker threads for sweeps")->check(CLI::PositiveNumber);
    sub->add_flag("--verbose", common.verbose, "progress on stderr");
  };

  auto* oracle = app.add_subcommand("oracle", "homogenized tensor from periodic cell problems");
  add_common(oracle);
  std::vector<double> kbar{1.0};
  auto* solve = app.add_subcommand("solve", "coupled solve for a given kbar; writes nodal CSV");
  add_common(solve);
  solve->add_option("--kbar", kbar, "kbar: one value or k11 k22 k12")->expected(1, 3);
  auto* objective = app.add_subcommand("objective", "evaluate J (and derivatives for scalar kbar)");
  add_common(objective);
  objective->add_option("--kbar", kbar, "kbar: one value or k11 k22 k12")->expected(1, 3);
  auto* opt = app.add_subcommand("optimize", "optimize kbar for every eps");
  add_common(opt);
  auto* sweep = app.add_subcommand("sweep", "full convergence sweep with oracle comparison");
  add_common(sweep);
  std::optional<double> best_j;
  auto* cond = app.add_subcommand("check-conditions", "existence conditions against the best J");
  add_common(cond);
  cond->add_option("--best-j", best_j, "use this J instead of running the optimizer");
  std::string results;
  auto* report = app.add_subcommand("report", "convergence report from a results CSV");
  report->add_option("--results", results, "results.csv from a sweep")->required()->check(CLI::ExistingFile);
  report->add_option("--out", common.out, "directory for report.csv and plot.gp");
  report->add_flag("--verbose", common.verbose);

  CLI11_PARSE(app, argc, argv);
  try {
    if (report->parsed()) return cmd_report(results, common.out);
    const Context ctx = load(common);
    if (oracle->parsed()) return cmd_oracle(ctx);
    if (solve->parsed()) return cmd_solve(ctx, kbar);
    if (objective->parsed()) return cmd_objective(ctx, kbar);
    if (opt->parsed()) return cmd_optimize(ctx);
    if (cond->parsed()) return cmd_check_conditions(ctx, best_j);
    if (sweep->parsed()) return cmd_sweep(ctx, common.workers);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 2;
  }
  return 0;
}
