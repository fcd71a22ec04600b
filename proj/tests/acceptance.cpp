// Acceptance suite: one PASS/FAIL line per criterion, CSV evidence in --out.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

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

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) { return std::chrono::duration<double>(Clock::now() - t0).count(); }

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Context {
  fs::path out;
  fs::path configs;
  std::optional<fs::path> reference;
};

std::ofstream open_csv(const Context& ctx, const std::string& name) {
  std::ofstream os(ctx.out / name);
  if (!os) throw std::runtime_error("cannot write " + (ctx.out / name).string());
  os << std::setprecision(17);
  return os;
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(3) << v;
  return os.str();
}

HomogenizedTensor smooth_trig_oracle() {
  static const HomogenizedTensor t = homogenized_tensor(coefficient_zoo("smooth_trig"), {64, 128, 256});
  return t;
}

Outcome homogeneous_exactness(const Context& ctx) {
  auto csv = open_csv(ctx, "c1_homogeneous.csv");
  csv << "c,bc_direction,u_bar_error,u_check_error,psi_coef_error,wh_coef_max,residual\n";
  Outcome o{true, ""};
  double worst_u = 0.0, worst_psi = 0.0, slowest = 0.0;
  for (double c : {0.5, 1.0, 3.0})
    for (int dir : {1, 2}) {
      const auto t0 = Clock::now();
      clear_enrichment_cache();
      const auto disc = Discretization::create(DomainSpec{}, 0.5, 5);
      const CoupledProblem p(disc, coefficient_zoo("constant", {{"c", c}}), 0.5, {dir});
      const auto s = p.solve(c * Matrix2::Identity(), dir);
      const double t = seconds_since(t0);
      const double eu = (s.u_bar - disc->coarse().linear(dir)).cwiseAbs().maxCoeff();
      const double ec = (s.u_check - disc->fine().linear(dir)).cwiseAbs().maxCoeff();
      const int n = static_cast<int>(s.psi.size());
      const double ep = std::abs(s.psi[n - 1] - c);
      const double wh = s.psi.head(n - 1).cwiseAbs().maxCoeff();
      csv << c << ',' << dir << ',' << eu << ',' << ec << ',' << ep << ',' << wh << ',' << s.residual << '\n';
      worst_u = std::max({worst_u, eu, ec});
      worst_psi = std::max(worst_psi, ep);
      slowest = std::max(slowest, t);
      if (!(eu <= 1e-9 && ec <= 1e-9 && ep <= 1e-8 && t <= 10.0)) o.pass = false;
    }
  o.detail = "max nodal error " + fmt(worst_u) + ", psi coefficient error " + fmt(worst_psi) + ", slowest case " +
             fmt(slowest) + " s";
  return o;
}

Outcome matrix_exactness(const Context& ctx) {
  auto csv = open_csv(ctx, "c2_matrix_homogeneous.csv");
  csv << "kbar22,u_bar_error,coef1,coef2\n";
  const auto disc = Discretization::create(DomainSpec{}, 0.5, 5);
  const CoupledProblem p(disc, coefficient_zoo("constant", {{"k11", 2.0}, {"k22", 3.0}, {"k12", 0.5}}), 0.5, {1, 2});
  Outcome o{true, ""};
  double worst_u = 0.0, worst_c = 0.0;
  for (double k22 : {3.0, 1.0, 7.0}) {
    Matrix2 kbar;
    kbar << 2.0, 0.5, 0.5, k22;
    const auto s = p.solve(kbar, 1);
    const int n = static_cast<int>(s.psi.size());
    const double eu = (s.u_bar - disc->coarse().linear(1)).cwiseAbs().maxCoeff();
    const double ec = std::max(std::abs(s.psi[n - 2] - 2.0), std::abs(s.psi[n - 1] - 0.5));
    csv << k22 << ',' << eu << ',' << s.psi[n - 2] << ',' << s.psi[n - 1] << '\n';
    worst_u = std::max(worst_u, eu);
    worst_c = std::max(worst_c, ec);
    if (!(eu <= 1e-9 && ec <= 1e-6)) o.pass = false;
  }
  o.detail = "max u_bar error " + fmt(worst_u) + ", coefficient error " + fmt(worst_c);
  return o;
}

Outcome j_decay(const Context& ctx) {
  auto csv = open_csv(ctx, "c3_J_at_kstar.csv");
  csv << "eps,H,refine_ratio,kstar,J\n";
  const double kstar = smooth_trig_oracle().kstar(0, 0);
  std::vector<double> js;
  for (double eps : {0.5, 0.25, 0.125}) {
    const int m = static_cast<int>(std::lround(0.5 * 10.0 / eps));
    const auto disc = Discretization::create(DomainSpec{}, 0.5, m);
    const CoupledProblem p(disc, coefficient_zoo("smooth_trig"), eps, {1});
    const double j = eval_J(p, kstar, 1).J;
    csv << eps << ',' << 0.5 << ',' << m << ',' << kstar << ',' << j << '\n';
    js.push_back(j);
  }
  const bool pass = js[1] < js[0] && js[2] < js[1] && js[2] <= 0.5 * js[0];
  return {pass, "J(k*) = " + fmt(js[0]) + ", " + fmt(js[1]) + ", " + fmt(js[2])};
}

StudyConfig load(const Context& ctx, const std::string& name) {
  return StudyConfig::from_file((ctx.configs / name).string());
}

std::vector<ResultRow> sweep_to_csv(const Context& ctx, const StudyConfig& config, const std::string& name) {
  const auto rows = run_sweep(config);
  auto csv = open_csv(ctx, name);
  write_results_csv(csv, rows);
  return rows;
}

Outcome main_convergence(const Context& ctx) {
  const auto config = load(ctx, "smooth_trig.json");
  const auto t0 = Clock::now();
  const auto rows = sweep_to_csv(ctx, config, "c4_smooth_trig_sweep.csv");
  const double t = seconds_since(t0);
  std::string why;
  const bool met = thresholds_met(config, rows, &why);
  std::ostringstream d;
  d << "errors";
  for (const auto& r : rows) d << ' ' << fmt(r.error);
  if (!rows.empty()) d << ", final relative error " << fmt(rows.back().rel_error);
  d << ", sweep " << fmt(t) << " s";
  if (!met) d << " (" << why << ")";
  return {met && t <= 1200.0, d.str()};
}

Outcome column_recovery(const Context& ctx) {
  Outcome o{true, ""};
  for (int dir : {1, 2}) {
    const std::string name = "anisotropic_laminate_bc" + std::to_string(dir);
    const auto config = load(ctx, name + ".json");
    const auto rows = sweep_to_csv(ctx, config, "c5_" + name + ".csv");
    std::string why;
    const bool ok = !rows.empty() && rows.back().ok && rows.back().rel_error <= 0.1;
    if (!ok) o.pass = false;
    o.detail += (dir == 1 ? "" : ", ") + std::string("column ") + std::to_string(dir) + " relative error " +
                (rows.empty() ? "n/a" : fmt(rows.back().rel_error));
    if (!rows.empty() && !rows.back().ok) o.detail += " (" + rows.back().message + ")";
  }
  return o;
}

Outcome derivative_consistency(const Context& ctx) {
  auto csv = open_csv(ctx, "c6_derivatives.csv");
  csv << "coefficient,kbar,dJ,dJ_fd,dJ_rel,d2J,d2J_fd,d2J_rel\n";
  const auto disc = Discretization::create(DomainSpec{}, 0.5, 20);
  double worst1 = 0.0, worst2 = 0.0;
  const std::vector<std::pair<std::string, std::vector<double>>> cases{{"smooth_trig", {1.0, 1.5, 3.0}},
                                                                      {"laminate", {0.8, 1.2, 2.5}}};
  for (const auto& [name, probes] : cases) {
    const CoupledProblem p(disc, coefficient_zoo(name), 0.25, {1});
    for (double k : probes) {
      const auto e = eval_J(p, k, 1, true);
      const double h1 = 1e-4 * k, h2 = 1e-3 * k;
      const double fd1 = (eval_J(p, k + h1, 1).J - eval_J(p, k - h1, 1).J) / (2.0 * h1);
      const double fd2 = (eval_J(p, k + h2, 1).J - 2.0 * e.J + eval_J(p, k - h2, 1).J) / (h2 * h2);
      const double r1 = std::abs(*e.dJ - fd1) / std::abs(fd1);
      const double r2 = std::abs(*e.d2J - fd2) / std::abs(fd2);
      csv << name << ',' << k << ',' << *e.dJ << ',' << fd1 << ',' << r1 << ',' << *e.d2J << ',' << fd2 << ',' << r2
          << '\n';
      worst1 = std::max(worst1, r1);
      worst2 = std::max(worst2, r2);
    }
  }
  return {worst1 <= 1e-5 && worst2 <= 1e-4, "max relative mismatch dJ " + fmt(worst1) + ", d2J " + fmt(worst2)};
}

Outcome conditions(const Context& ctx) {
  auto csv = open_csv(ctx, "c7_conditions.csv");
  csv << "L,L_c,L_f,bc_direction,I_estimate,rhs1,rhs2,area_Dc,condition1,condition2\n";
  Outcome o{true, ""};
  double margin = std::numeric_limits<double>::infinity();
  for (const DomainSpec s : {DomainSpec{4.0, 2.0, 1.0}, DomainSpec{3.0, 2.0, 1.0}, DomainSpec{2.0, 1.0, 0.5}}) {
    const auto disc = Discretization::create(s, 0.5, 2);
    for (int dir : {1, 2}) {
      const auto r = check_conditions(*disc, dir, 0.0);
      csv << s.L << ',' << s.L_c << ',' << s.L_f << ',' << dir << ',' << r.I_estimate << ',' << r.rhs1 << ','
          << r.rhs2 << ',' << r.area_Dc << ',' << r.condition1 << ',' << r.condition2 << '\n';
      margin = std::min(margin, r.rhs2 - r.area_Dc);
      if (!(r.rhs2 >= r.area_Dc - 1e-12)) o.pass = false;
    }
  }
  const auto disc = Discretization::create(DomainSpec{}, 0.5, 5);
  const CoupledProblem p(disc, coefficient_zoo("constant", {{"c", 2.0}}), 0.5, {1});
  const auto trace = optimize_scalar(p, 1, {});
  const auto r = check_conditions(*disc, 1, trace.J_opt);
  csv << "4,2,1,1," << r.I_estimate << ',' << r.rhs1 << ',' << r.rhs2 << ',' << r.area_Dc << ',' << r.condition1
      << ',' << r.condition2 << '\n';
  if (!(r.condition1 && r.condition2)) o.pass = false;
  o.detail = "min(rhs2 - |D_c|) = " + fmt(margin) + ", homogeneous flags " + (r.condition1 ? "1" : "0") +
             (r.condition2 ? "1" : "0");
  return o;
}

Outcome oracle_self_tests(const Context& ctx) {
  auto csv = open_csv(ctx, "c8_oracle.csv");
  csv << "case,k11,k22,k12,target11,target22,target12\n";
  Outcome o{true, ""};
  auto row = [&](const std::string& name, const Matrix2& k, const Matrix2& target) {
    csv << name << ',' << k(0, 0) << ',' << k(1, 1) << ',' << k(0, 1) << ',' << target(0, 0) << ',' << target(1, 1)
        << ',' << target(0, 1) << '\n';
  };

  Matrix2 kc;
  kc << 2.0, 0.5, 0.5, 3.0;
  auto field = coefficient_zoo("constant", {{"k11", 2.0}, {"k22", 3.0}, {"k12", 0.5}});
  field.set_constant(false);  // force the corrector solve
  const Matrix2 k1 = homogenized_tensor(field, 64).kstar;
  row("constant", k1, kc);
  const double e1 = (k1 - kc).cwiseAbs().maxCoeff();
  if (!(e1 <= 1e-12)) o.pass = false;

  const Matrix2 lam_target = Eigen::Vector2d(1.6, 2.5).asDiagonal();
  const Matrix2 k2 = homogenized_tensor(coefficient_zoo("laminate"), {64, 128, 256}).kstar;
  row("laminate", k2, lam_target);
  const double e2 = (k2 - lam_target).cwiseAbs().maxCoeff();
  if (!(e2 <= 1e-3)) o.pass = false;

  const Matrix2 k3 = homogenized_tensor(coefficient_zoo("checkerboard"), {64, 128, 256}).kstar;
  row("checkerboard", k3, 2.0 * Matrix2::Identity());
  const double iso = std::max(std::abs(k3(0, 0) - k3(1, 1)), std::abs(k3(0, 1)));
  const double dual = std::abs(k3(0, 0) * k3(0, 0) - 4.0) / 4.0;
  if (!(iso <= 1e-8 && dual <= 0.02)) o.pass = false;

  o.detail = "constant error " + fmt(e1) + ", laminate error " + fmt(e2) + ", checkerboard (k11^2 - 4)/4 = " +
             fmt(dual);
  return o;
}

Outcome h_robustness(const Context& ctx) {
  const auto coarse_config = load(ctx, "smooth_trig_H1.json");
  auto half = coarse_config;
  half.mesh.H = 0.5;
  const auto a = sweep_to_csv(ctx, half, "c9_H0.5.csv");
  const auto b = sweep_to_csv(ctx, coarse_config, "c9_H1.0.csv");
  const double tol = 0.05;
  const bool pass = !a.empty() && !b.empty() && a.back().ok && b.back().ok && a.back().rel_error <= tol &&
                    b.back().rel_error <= tol;
  return {pass, "relative error H=0.5 " + (a.empty() ? "n/a" : fmt(a.back().rel_error)) + ", H=1.0 " +
                    (b.empty() ? "n/a" : fmt(b.back().rel_error))};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> csv_names(const fs::path& dir) {
  std::vector<std::string> names;
  for (const auto& e : fs::directory_iterator(dir))
    if (e.path().extension() == ".csv") names.push_back(e.path().filename().string());
  std::sort(names.begin(), names.end());
  return names;
}

Outcome determinism(const Context& ctx) {
  if (!ctx.reference) {
    // without a reference run, repeat one criterion in-process and compare bytes
    const fs::path a = ctx.out / "repeat_a", b = ctx.out / "repeat_b";
    fs::create_directories(a);
    fs::create_directories(b);
    j_decay({a, ctx.configs, {}});
    j_decay({b, ctx.configs, {}});
    const bool same = slurp(a / "c3_J_at_kstar.csv") == slurp(b / "c3_J_at_kstar.csv");
    fs::remove_all(a);
    fs::remove_all(b);
    return {same, std::string("in-process repeat ") + (same ? "identical" : "differs") +
                      "; full comparison needs --compare-with"};
  }
  const auto mine = csv_names(ctx.out);
  const auto theirs = csv_names(*ctx.reference);
  if (mine != theirs) return {false, "different CSV file sets"};
  std::vector<std::string> differing;
  for (const auto& n : mine)
    if (slurp(ctx.out / n) != slurp(*ctx.reference / n)) differing.push_back(n);
  if (!differing.empty()) {
    std::string list;
    for (const auto& n : differing) list += " " + n;
    return {false, "differing files:" + list};
  }
  return {true, std::to_string(mine.size()) + " CSV files byte-identical to " + ctx.reference->string()};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance suite"};
  std::string out = "acceptance_out";
  std::string configs = "configs";
  std::string reference;
  std::vector<int> only;
  app.add_option("--out", out, "directory for CSV evidence");
  app.add_option("--configs", configs, "directory holding the study configurations")->check(CLI::ExistingDirectory);
  app.add_option("--compare-with", reference, "earlier output directory for the determinism check")
      ->check(CLI::ExistingDirectory);
  app.add_option("--only", only, "run a subset of criteria");
  CLI11_PARSE(app, argc, argv);

  Context ctx{out, configs, {}};
  if (!reference.empty()) ctx.reference = fs::path(reference);
  fs::remove_all(ctx.out);
  fs::create_directories(ctx.out);

  const std::vector<std::pair<std::string, std::function<Outcome(const Context&)>>> criteria{
      {"homogeneous exactness", homogeneous_exactness},
      {"matrix homogeneous exactness", matrix_exactness},
      {"J(k*) decay", j_decay},
      {"main convergence", main_convergence},
      {"matrix column recovery", column_recovery},
      {"derivative consistency", derivative_consistency},
      {"conditions checker", conditions},
      {"oracle self-tests", oracle_self_tests},
      {"H robustness", h_robustness},
      {"determinism", determinism},
  };

  int failures = 0;
  for (size_t i = 0; i < criteria.size(); ++i) {
    const int id = static_cast<int>(i) + 1;
    if (!only.empty() && std::find(only.begin(), only.end(), id) == only.end()) continue;
    const auto t0 = Clock::now();
    Outcome o;
    try {
      o = criteria[i].second(ctx);
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::cout << (o.pass ? "PASS" : "FAIL") << "  " << std::setw(2) << id << "  " << criteria[i].first << ": "
              << o.detail << "  [" << fmt(seconds_since(t0)) << " s]" << std::endl;
  }
  return failures == 0 ? 0 : 1;
}
