#include "arlequin/study.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <fstream>
#include <map>
#include <mutex>
#include <set>
#include <sstream>
#include <thread>

#include <json.hpp>

#include "arlequin/errors.hpp"
#include "arlequin/linear_solver.hpp"
#include "arlequin/oracle.hpp"

namespace arlequin {

using nlohmann::json;

namespace {

void check_keys(const json& j, const std::string& where, const std::set<std::string>& allowed) {
  if (!j.is_object()) throw ConfigError("'" + where + "' must be an object");
  for (const auto& [key, value] : j.items()) {
    (void)value;
    if (!allowed.count(key)) throw ConfigError("unknown key '" + key + "' in " + where);
  }
}

template <class T>
T get(const json& j, const std::string& key, const std::string& where, T fallback) {
  if (!j.contains(key)) return fallback;
  try {
    return j.at(key).get<T>();
  } catch (const json::exception& e) {
    throw ConfigError("bad value for '" + key + "' in " + where + ": " + e.what());
  }
}

}  // namespace

StudyConfig StudyConfig::from_json(const std::string& text) {
  json root;
  try {
    root = json::parse(text);
  } catch (const json::exception& e) {
    throw ConfigError(std::string("invalid JSON: ") + e.what());
  }
  check_keys(root, "config",
             {"geometry", "mesh", "coefficient", "eps", "optimizer", "solver", "enrichment", "bc_direction", "oracle",
              "output", "seed", "acceptance"});
  StudyConfig c;
  if (root.contains("geometry")) {
    const auto& g = root["geometry"];
    check_keys(g, "geometry", {"L", "L_c", "L_f"});
    c.geometry.L = get(g, "L", "geometry", c.geometry.L);
    c.geometry.L_c = get(g, "L_c", "geometry", c.geometry.L_c);
    c.geometry.L_f = get(g, "L_f", "geometry", c.geometry.L_f);
  }
  if (root.contains("mesh")) {
    const auto& m = root["mesh"];
    check_keys(m, "mesh", {"H", "refine_ratio", "cells_per_period"});
    if (m.contains("refine_ratio") && m.contains("cells_per_period"))
      throw ConfigError("mesh: give refine_ratio or cells_per_period, not both");
    c.mesh.H = get(m, "H", "mesh", c.mesh.H);
    c.mesh.refine_ratio = get(m, "refine_ratio", "mesh", c.mesh.refine_ratio);
    c.mesh.cells_per_period = get(m, "cells_per_period", "mesh", c.mesh.cells_per_period);
  }
  if (!root.contains("coefficient")) throw ConfigError("missing 'coefficient'");
  {
    const auto& k = root["coefficient"];
    check_keys(k, "coefficient", {"name", "params"});
    if (!k.contains("name")) throw ConfigError("coefficient needs a name");
    c.coefficient = get<std::string>(k, "name", "coefficient", "");
    if (k.contains("params")) {
      if (!k["params"].is_object()) throw ConfigError("coefficient params must be an object");
      for (const auto& [key, value] : k["params"].items()) {
        if (!value.is_number()) throw ConfigError("coefficient parameter '" + key + "' must be a number");
        c.coefficient_params[key] = value.get<double>();
      }
    }
  }
  if (!root.contains("eps")) throw ConfigError("missing 'eps'");
  c.eps = get<std::vector<double>>(root, "eps", "config", {});
  if (root.contains("optimizer")) {
    const auto& o = root["optimizer"];
    check_keys(o, "optimizer",
               {"mode", "method", "init", "c_minus", "c_plus", "grad_tol", "step_tol", "max_evals", "fd_step", "f_tol"});
    const std::string mode = get<std::string>(o, "mode", "optimizer", "scalar");
    if (mode == "scalar")
      c.mode = OptimizationMode::Scalar;
    else if (mode == "matrix")
      c.mode = OptimizationMode::Matrix;
    else
      throw ConfigError("optimizer mode must be scalar or matrix");
    try {
      c.optimizer.method = scalar_method_from_string(get<std::string>(o, "method", "optimizer", "newton_safeguarded"));
    } catch (const InvalidParameter& e) {
      throw ConfigError(e.what());
    }
    auto& s = c.optimizer;
    s.init = get(o, "init", "optimizer", s.init);
    s.c_minus = get(o, "c_minus", "optimizer", s.c_minus);
    s.c_plus = get(o, "c_plus", "optimizer", s.c_plus);
    s.grad_tol = get(o, "grad_tol", "optimizer", s.grad_tol);
    s.step_tol = get(o, "step_tol", "optimizer", s.step_tol);
    s.max_evals = get(o, "max_evals", "optimizer", s.max_evals);
    s.fd_step = get(o, "fd_step", "optimizer", s.fd_step);
    s.f_tol = get(o, "f_tol", "optimizer", s.f_tol);
  }
  if (root.contains("solver")) {
    const auto& s = root["solver"];
    check_keys(s, "solver", {"strategy", "pivot_threshold", "residual_tol"});
    try {
      c.solver.strategy = kkt_strategy_from_string(get<std::string>(s, "strategy", "solver", "condensed"));
    } catch (const InvalidParameter& e) {
      throw ConfigError(e.what());
    }
    c.solver.pivot_threshold = get(s, "pivot_threshold", "solver", c.solver.pivot_threshold);
    c.solver.residual_tol = get(s, "residual_tol", "solver", c.solver.residual_tol);
  }
  c.enrichment = get<std::string>(root, "enrichment", "config", c.enrichment);
  c.bc_direction = get(root, "bc_direction", "config", c.bc_direction);
  if (root.contains("oracle")) {
    const auto& o = root["oracle"];
    check_keys(o, "oracle", {"resolutions"});
    c.oracle_resolutions = get(o, "resolutions", "oracle", c.oracle_resolutions);
  }
  c.output = get<std::string>(root, "output", "config", c.output);
  c.seed = get<std::uint64_t>(root, "seed", "config", c.seed);
  if (root.contains("acceptance")) {
    const auto& a = root["acceptance"];
    check_keys(a, "acceptance", {"max_final_rel_error", "monotone_error"});
    if (a.contains("max_final_rel_error"))
      c.acceptance.max_final_rel_error = get<double>(a, "max_final_rel_error", "acceptance", 0.0);
    c.acceptance.monotone_error = get(a, "monotone_error", "acceptance", false);
  }
  c.validate();
  return c;
}

StudyConfig StudyConfig::from_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return from_json(ss.str());
}

void StudyConfig::validate() const {
  try {
    geometry.validate();
  } catch (const DegenerateSpec& e) {
    throw ConfigError(e.what());
  }
  if (eps.empty()) throw ConfigError("eps list is empty");
  for (double e : eps) {
    if (!(e > 0.0)) throw ConfigError("eps values must be positive");
    const double periods = geometry.L_f / e;
    if (std::abs(periods - std::round(periods)) > 1e-9 * periods)
      throw ConfigError("L_f / eps must be an integer for eps = " + std::to_string(e));
    refine_ratio_for(e);
  }
  if (bc_direction != 1 && bc_direction != 2) throw ConfigError("bc_direction must be 1 or 2");
  if (enrichment != "auto" && enrichment != "none" && enrichment != "both")
    throw ConfigError("enrichment must be auto, none or both");
  if (mesh.refine_ratio != 0 && mesh.refine_ratio < 2) throw ConfigError("refine_ratio must be >= 2");
  if (!(mesh.cells_per_period > 0.0)) throw ConfigError("cells_per_period must be positive");
  if (oracle_resolutions.empty()) throw ConfigError("oracle resolutions are empty");
  for (int n : oracle_resolutions)
    if (n < 8 || n % 2) throw ConfigError("oracle resolutions must be even and >= 8");
  if (optimizer.max_evals < 1) throw ConfigError("max_evals must be positive");
  if (!(optimizer.init > 0.0)) throw ConfigError("optimizer init must be positive");
  if (mode == OptimizationMode::Matrix && !(optimizer.c_minus > 0.0 && optimizer.c_minus < optimizer.c_plus))
    throw ConfigError("matrix mode needs 0 < c_minus < c_plus");
  try {
    coefficient_zoo(coefficient, coefficient_params);
  } catch (const Error& e) {
    throw ConfigError(e.what());
  }
}

int StudyConfig::refine_ratio_for(double e) const {
  if (mesh.refine_ratio > 0) return mesh.refine_ratio;
  const double m = mesh.H * mesh.cells_per_period / e;
  const double r = std::round(m);
  if (r < 2.0 || std::abs(m - r) > 1e-9 * m)
    throw ConfigError("H * cells_per_period / eps is not an integer >= 2 for eps = " + std::to_string(e));
  return static_cast<int>(r);
}

std::vector<int> StudyConfig::enrichment_directions() const {
  if (enrichment == "none") return {};
  if (enrichment == "both" || mode == OptimizationMode::Matrix) return {1, 2};
  return {bc_direction};
}

std::string StudyConfig::canonical_json() const {
  json j;
  j["geometry"] = {{"L", geometry.L}, {"L_c", geometry.L_c}, {"L_f", geometry.L_f}};
  j["mesh"] = {{"H", mesh.H}};
  if (mesh.refine_ratio > 0)
    j["mesh"]["refine_ratio"] = mesh.refine_ratio;
  else
    j["mesh"]["cells_per_period"] = mesh.cells_per_period;
  json params = json::object();
  for (const auto& [k, v] : coefficient_params) params[k] = v;
  j["coefficient"] = {{"name", coefficient}, {"params", params}};
  j["eps"] = eps;
  j["optimizer"] = {{"mode", mode == OptimizationMode::Scalar ? "scalar" : "matrix"},
                    {"method", to_string(optimizer.method)},
                    {"init", optimizer.init},
                    {"c_minus", optimizer.c_minus},
                    {"c_plus", optimizer.c_plus},
                    {"grad_tol", optimizer.grad_tol},
                    {"step_tol", optimizer.step_tol},
                    {"max_evals", optimizer.max_evals},
                    {"fd_step", optimizer.fd_step},
                    {"f_tol", optimizer.f_tol}};
  j["solver"] = {{"strategy", to_string(solver.strategy)},
                 {"pivot_threshold", solver.pivot_threshold},
                 {"residual_tol", solver.residual_tol}};
  j["enrichment"] = enrichment;
  j["bc_direction"] = bc_direction;
  j["oracle"] = {{"resolutions", oracle_resolutions}};
  j["seed"] = seed;
  json acc = json::object();
  if (acceptance.max_final_rel_error) acc["max_final_rel_error"] = *acceptance.max_final_rel_error;
  acc["monotone_error"] = acceptance.monotone_error;
  j["acceptance"] = acc;
  return j.dump();
}

std::string hex_hash(const std::string& text) {
  std::uint64_t h = 14695981039346656037ULL;
  for (unsigned char c : text) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

std::string StudyConfig::hash() const { return hex_hash(canonical_json()); }

void fill_error(ResultRow& row) {
  const int j = row.bc_direction - 1;
  if (row.mode == "matrix") {
    const Eigen::Vector2d diff = row.kbar_opt.col(j) - row.kstar.col(j);
    row.error = diff.norm();
    row.rel_error = row.error / row.kstar.col(j).norm();
  } else {
    row.error = std::abs(row.kbar_opt(0, 0) - row.kstar(j, j));
    row.rel_error = row.error / row.kstar(j, j);
  }
}

std::vector<ResultRow> run_sweep(const StudyConfig& config, int workers, const ProgressFn& progress) {
  config.validate();
  const CoefficientField field = coefficient_zoo(config.coefficient, config.coefficient_params);
  const std::string hash = config.hash();
  auto log = [&](const std::string& msg) {
    if (progress) progress(msg);
  };

  log("oracle: " + config.coefficient);
  const HomogenizedTensor oracle = homogenized_tensor(field, config.oracle_resolutions);

  std::vector<double> eps = config.eps;
  std::stable_sort(eps.begin(), eps.end(), std::greater<>());
  std::vector<ResultRow> rows(eps.size());

  std::mutex disc_mutex;
  std::map<int, std::shared_ptr<const Discretization>> discs;
  auto discretization = [&](int m) {
    std::lock_guard<std::mutex> lock(disc_mutex);
    auto it = discs.find(m);
    if (it != discs.end()) return it->second;
    auto d = Discretization::create(config.geometry, config.mesh.H, m);
    discs.emplace(m, d);
    return d;
  };

  std::mutex log_mutex;
  auto run_row = [&](size_t i) {
    ResultRow& row = rows[i];
    const auto t0 = std::chrono::steady_clock::now();
    row.config_hash = hash;
    row.coefficient = config.coefficient;
    row.mode = config.mode == OptimizationMode::Scalar ? "scalar" : "matrix";
    row.bc_direction = config.bc_direction;
    row.eps = eps[i];
    row.H = config.mesh.H;
    row.kstar = oracle.kstar;
    row.outside_theory = !field.continuous();
    try {
      row.refine_ratio = config.refine_ratio_for(row.eps);
      row.h = row.H / row.refine_ratio;
      row.under_resolved = row.h > row.eps / 10.0 * (1.0 + 1e-9);
      const auto disc = discretization(row.refine_ratio);
      const CoupledProblem problem(disc, field, row.eps, config.enrichment_directions(), config.solver);
      const OptimizationTrace trace = config.mode == OptimizationMode::Scalar
                                          ? optimize_scalar(problem, config.bc_direction, config.optimizer)
                                          : optimize_matrix(problem, config.bc_direction, config.optimizer);
      row.kbar_opt = trace.kbar_opt;
      row.J_final = trace.J_opt;
      row.iterations = trace.iterations;
      row.evaluations = trace.evaluations;
      row.termination = trace.termination;
      const ConditionReport cond = check_conditions(*disc, config.bc_direction, row.J_final);
      row.rhs1 = cond.rhs1;
      row.rhs2 = cond.rhs2;
      row.condition1 = cond.condition1;
      row.condition2 = cond.condition2;
      fill_error(row);
      row.ok = trace.termination != "max_evals" && trace.termination != "stalled";
      if (!row.ok) row.message = "optimizer did not converge (" + trace.termination + ")";
    } catch (const std::exception& e) {
      row.ok = false;
      row.message = e.what();
    }
    row.wall_time = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    std::lock_guard<std::mutex> lock(log_mutex);
    std::ostringstream msg;
    msg << "eps=" << row.eps << " m=" << row.refine_ratio << (row.ok ? " ok" : " FAILED: " + row.message)
        << " kbar11=" << row.kbar_opt(0, 0) << " rel_error=" << row.rel_error << " (" << row.wall_time << " s)";
    log(msg.str());
  };

  const int n_workers = std::max(1, std::min<int>(workers, static_cast<int>(rows.size())));
  if (n_workers == 1) {
    for (size_t i = 0; i < rows.size(); ++i) run_row(i);
  } else {
    std::atomic<size_t> next{0};
    std::vector<std::thread> pool;
    for (int w = 0; w < n_workers; ++w)
      pool.emplace_back([&]() {
        for (size_t i = next++; i < rows.size(); i = next++) run_row(i);
      });
    for (auto& t : pool) t.join();
  }
  return rows;
}

namespace {

std::string csv_quote(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c == '\n' ? ' ' : c;
  }
  return out + "\"";
}

std::vector<std::string> csv_split(const std::string& line) {
  std::vector<std::string> out;
  std::string cur;
  bool quoted = false;
  for (size_t i = 0; i < line.size(); ++i) {
    const char c = line[i];
    if (quoted) {
      if (c == '"' && i + 1 < line.size() && line[i + 1] == '"') {
        cur += '"';
        ++i;
      } else if (c == '"') {
        quoted = false;
      } else {
        cur += c;
      }
    } else if (c == '"') {
      quoted = true;
    } else if (c == ',') {
      out.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  out.push_back(cur);
  return out;
}

const char* kResultsHeader =
    "config_hash,coefficient,mode,bc_direction,eps,H,h,refine_ratio,k11,k22,k12,J_final,kstar11,kstar22,kstar12,"
    "error,rel_error,rhs1,rhs2,condition1,condition2,iterations,evaluations,termination,under_resolved,"
    "outside_theory,status,message";

}  // namespace

void write_results_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  const auto old_precision = os.precision(17);
  os << kResultsHeader << '\n';
  for (const auto& r : rows) {
    os << r.config_hash << ',' << csv_quote(r.coefficient) << ',' << r.mode << ',' << r.bc_direction << ',' << r.eps
       << ',' << r.H << ',' << r.h << ',' << r.refine_ratio << ',' << r.kbar_opt(0, 0) << ',' << r.kbar_opt(1, 1)
       << ',' << r.kbar_opt(0, 1) << ',' << r.J_final << ',' << r.kstar(0, 0) << ',' << r.kstar(1, 1) << ','
       << r.kstar(0, 1) << ',' << r.error << ',' << r.rel_error << ',' << r.rhs1 << ',' << r.rhs2 << ','
       << r.condition1 << ',' << r.condition2 << ',' << r.iterations << ',' << r.evaluations << ','
       << csv_quote(r.termination) << ',' << r.under_resolved << ',' << r.outside_theory << ','
       << (r.ok ? "ok" : "failed") << ',' << csv_quote(r.message) << '\n';
  }
  os.precision(old_precision);
}

void write_timings_csv(std::ostream& os, const std::vector<ResultRow>& rows) {
  const auto old_precision = os.precision(6);
  os << "config_hash,eps,wall_time\n";
  for (const auto& r : rows) os << r.config_hash << ',' << r.eps << ',' << r.wall_time << '\n';
  os.precision(old_precision);
}

std::vector<ResultRow> read_results_csv(std::istream& is) {
  std::string line;
  if (!std::getline(is, line) || line != kResultsHeader) throw ConfigError("not a results CSV (header mismatch)");
  std::vector<ResultRow> rows;
  while (std::getline(is, line)) {
    if (line.empty()) continue;
    const auto f = csv_split(line);
    if (f.size() != 28) throw ConfigError("results CSV row with " + std::to_string(f.size()) + " fields");
    ResultRow r;
    size_t k = 0;
    auto d = [&]() { return std::stod(f[k++]); };
    auto i = [&]() { return std::stoi(f[k++]); };
    r.config_hash = f[k++];
    r.coefficient = f[k++];
    r.mode = f[k++];
    r.bc_direction = i();
    r.eps = d();
    r.H = d();
    r.h = d();
    r.refine_ratio = i();
    r.kbar_opt(0, 0) = d();
    r.kbar_opt(1, 1) = d();
    r.kbar_opt(0, 1) = r.kbar_opt(1, 0) = d();
    r.J_final = d();
    r.kstar(0, 0) = d();
    r.kstar(1, 1) = d();
    r.kstar(0, 1) = r.kstar(1, 0) = d();
    r.error = d();
    r.rel_error = d();
    r.rhs1 = d();
    r.rhs2 = d();
    r.condition1 = i() != 0;
    r.condition2 = i() != 0;
    r.iterations = i();
    r.evaluations = i();
    r.termination = f[k++];
    r.under_resolved = i() != 0;
    r.outside_theory = i() != 0;
    r.ok = f[k++] == "ok";
    r.message = f[k++];
    rows.push_back(r);
  }
  return rows;
}

void write_manifest(std::ostream& os, const StudyConfig& config, const std::vector<ResultRow>& rows) {
  json m;
  m["tool"] = "arlequin";
  m["version"] = "0.1.0";
  m["eigen"] = std::to_string(EIGEN_WORLD_VERSION) + "." + std::to_string(EIGEN_MAJOR_VERSION) + "." +
               std::to_string(EIGEN_MINOR_VERSION);
  m["sparse_lu_backend"] = SparseLu::backend();
  m["cholesky_backend"] = SparseCholesky::backend();
  m["config_hash"] = config.hash();
  m["config"] = json::parse(config.canonical_json());
  m["output"] = config.output;
  json rs = json::array();
  double total = 0.0;
  for (const auto& r : rows) {
    rs.push_back({{"eps", r.eps}, {"status", r.ok ? "ok" : "failed"}, {"wall_time", r.wall_time}});
    total += r.wall_time;
  }
  m["rows"] = rs;
  m["total_wall_time"] = total;
  os << m.dump(2) << '\n';
}

bool thresholds_met(const StudyConfig& config, const std::vector<ResultRow>& rows, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  for (const auto& r : rows)
    if (!r.ok) return fail("row eps=" + std::to_string(r.eps) + " failed: " + r.message);
  if (rows.empty()) return fail("no rows");
  if (config.acceptance.max_final_rel_error && rows.back().rel_error > *config.acceptance.max_final_rel_error)
    return fail("final relative error " + std::to_string(rows.back().rel_error) + " above threshold");
  if (config.acceptance.monotone_error)
    for (size_t i = 1; i < rows.size(); ++i)
      if (!(rows[i].error < rows[i - 1].error)) return fail("error column is not strictly decreasing");
  return true;
}

}  // namespace arlequin
