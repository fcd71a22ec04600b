#include "arlequin/optimizer.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>
#include <ostream>
#include <vector>

#include <Eigen/Dense>
#include <boost/math/tools/minima.hpp>

#include "arlequin/errors.hpp"

namespace arlequin {

const char* to_string(ScalarMethod m) { return m == ScalarMethod::Brent ? "brent" : "newton_safeguarded"; }

ScalarMethod scalar_method_from_string(const std::string& s) {
  if (s == "newton_safeguarded" || s == "newton") return ScalarMethod::NewtonSafeguarded;
  if (s == "brent") return ScalarMethod::Brent;
  throw InvalidParameter("unknown scalar method '" + s + "'");
}

Matrix2 project_onto_bounds(const Matrix2& k, double c_minus, double c_plus) {
  if (!(c_minus > 0.0) || !(c_minus < c_plus)) throw InfeasibleBounds("need 0 < c_minus < c_plus");
  const Matrix2 sym = 0.5 * (k + k.transpose());
  Eigen::SelfAdjointEigenSolver<Matrix2> eig(sym);
  const Eigen::Vector2d lam = eig.eigenvalues().cwiseMax(c_minus).cwiseMin(c_plus);
  Matrix2 out = eig.eigenvectors() * lam.asDiagonal() * eig.eigenvectors().transpose();
  out(1, 0) = out(0, 1);
  return out;
}

namespace {

using Clock = std::chrono::steady_clock;
constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

class Recorder {
 public:
  explicit Recorder(OptimizationTrace& t) : trace_(t) {}

  void add(const Matrix2& k, double J, double dJ = kNaN, double d2J = kNaN) {
    TraceEntry e{k, J, dJ, d2J, J <= best_};
    if (e.accepted) {
      best_ = J;
      trace_.kbar_opt = k;
      trace_.J_opt = J;
    }
    trace_.iterates.push_back(e);
  }
  double best() const { return best_; }

 private:
  OptimizationTrace& trace_;
  double best_ = std::numeric_limits<double>::infinity();
};

void check_init(double init) {
  if (!(init > 0.0)) throw NonPositiveIterate("initial kbar must be positive");
}

void newton(const CoupledProblem& problem, int bc, const OptimizerSettings& s, OptimizationTrace& trace) {
  Recorder rec(trace);
  auto eval = [&](double k) {
    if (!(k > 0.0)) throw NonPositiveIterate("iterate left (0, inf)");
    const ObjectiveEval e = eval_J(problem, k, bc, true);
    ++trace.evaluations;
    rec.add(e.kbar, e.J, *e.dJ, *e.d2J);
    return e;
  };
  auto converged = [&](const ObjectiveEval& e) { return std::abs(*e.dJ) <= s.grad_tol * std::max(1.0, e.J); };
  auto budget = [&]() { return trace.evaluations < s.max_evals; };

  ObjectiveEval cur = eval(s.init);
  if (converged(cur)) {
    trace.termination = "gradient";
    return;
  }

  // grow a bracket [lo, hi] with dJ(lo) < 0 < dJ(hi); Newton steps are used when they point the right way
  double lo = 0.0, hi = std::numeric_limits<double>::infinity();
  const double lower_limit = 1e-6 * s.init, upper_limit = 1e6 * s.init;
  while (!(lo > 0.0 && std::isfinite(hi))) {
    const double x = cur.kbar(0, 0);
    if (*cur.dJ < 0.0)
      lo = x;
    else
      hi = x;
    if (lo > 0.0 && std::isfinite(hi)) break;
    if (!budget()) {
      trace.termination = "max_evals";
      return;
    }
    double next;
    const double newton_x = *cur.d2J > 0.0 ? x - *cur.dJ / *cur.d2J : kNaN;
    if (*cur.dJ < 0.0) {
      next = (std::isfinite(newton_x) && newton_x > x) ? std::min(newton_x, 4.0 * x) : 2.0 * x;
      if (next > upper_limit) throw NoDescent("J keeps decreasing as kbar grows");
    } else {
      next = (std::isfinite(newton_x) && newton_x < x && newton_x > 0.0) ? std::max(newton_x, 0.25 * x) : 0.5 * x;
      if (next < lower_limit) throw NoDescent("J keeps decreasing as kbar shrinks");
    }
    cur = eval(next);
    if (converged(cur)) {
      trace.termination = "gradient";
      return;
    }
  }

  double dx_old = hi - lo, dx = dx_old;
  while (true) {
    ++trace.iterations;
    if (hi - lo <= s.step_tol * std::max(1.0, lo)) {
      trace.termination = "bracket";
      return;
    }
    if (!budget()) {
      trace.termination = "max_evals";
      return;
    }
    const double x = cur.kbar(0, 0);
    double next;
    const bool newton_ok = *cur.d2J > 0.0 && std::abs(2.0 * *cur.dJ) <= std::abs(dx_old * *cur.d2J);
    const double newton_x = newton_ok ? x - *cur.dJ / *cur.d2J : kNaN;
    if (newton_ok && newton_x > lo && newton_x < hi) {
      dx_old = dx;
      dx = x - newton_x;
      next = newton_x;
    } else {
      dx_old = dx;
      dx = 0.5 * (hi - lo);
      next = lo + dx;
    }
    cur = eval(next);
    if (converged(cur)) {
      trace.termination = "gradient";
      return;
    }
    if (std::abs(dx) <= s.step_tol * std::max(1.0, next)) {
      trace.termination = "step";
      return;
    }
    if (*cur.dJ < 0.0)
      lo = next;
    else
      hi = next;
  }
}

void brent(const CoupledProblem& problem, int bc, const OptimizerSettings& s, OptimizationTrace& trace) {
  Recorder rec(trace);
  auto J = [&](double k) {
    if (!(k > 0.0)) throw NonPositiveIterate("iterate left (0, inf)");
    if (trace.evaluations >= s.max_evals) throw NoDescent("evaluation budget exhausted while bracketing");
    const ObjectiveEval e = eval_J(problem, k, bc, false);
    ++trace.evaluations;
    rec.add(e.kbar, e.J);
    return e.J;
  };
  double a = s.init, fa = J(a);
  double b = 2.0 * a, fb = J(b);
  double lo, hi;
  if (fb < fa) {
    while (true) {
      const double c = 2.0 * b, fc = J(c);
      if (fc > fb) {
        lo = a;
        hi = c;
        break;
      }
      if (c > 1e6 * s.init) throw NoDescent("J keeps decreasing as kbar grows");
      a = b;
      b = c;
      fb = fc;
    }
  } else {
    while (true) {
      const double c = 0.5 * a, fc = J(c);
      if (fc > fa) {
        lo = c;
        hi = b;
        break;
      }
      if (c < 1e-6 * s.init) throw NoDescent("J keeps decreasing as kbar shrinks");
      b = a;
      a = c;
      fa = fc;
    }
  }
  const int bits = std::numeric_limits<double>::digits / 2;
  std::uintmax_t iters = static_cast<std::uintmax_t>(std::max(1, s.max_evals - trace.evaluations - 1));
  const auto [xmin, fmin] = boost::math::tools::brent_find_minima(J, lo, hi, bits, iters);
  (void)fmin;
  trace.iterations = static_cast<int>(iters);
  const ObjectiveEval e = eval_J(problem, xmin, bc, true);
  ++trace.evaluations;
  rec.add(e.kbar, e.J, *e.dJ, *e.d2J);
  trace.termination = "brent";
}

}  // namespace

OptimizationTrace optimize_scalar(const CoupledProblem& problem, int bc_direction, const OptimizerSettings& settings) {
  check_init(settings.init);
  const auto t0 = Clock::now();
  OptimizationTrace trace;
  if (settings.method == ScalarMethod::Brent)
    brent(problem, bc_direction, settings, trace);
  else
    newton(problem, bc_direction, settings, trace);
  trace.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return trace;
}

OptimizationTrace optimize_matrix(const CoupledProblem& problem, int bc_direction, const OptimizerSettings& s) {
  if (!(s.c_minus > 0.0) || !(s.c_minus < s.c_plus)) throw InfeasibleBounds("need 0 < c_minus < c_plus");
  check_init(s.init);
  const auto t0 = Clock::now();
  const auto& disc = problem.discretization();
  const SparseMatrix& lap = disc.laplace();
  const Eigen::VectorXd g = disc.coarse().linear(bc_direction);

  OptimizationTrace trace;
  Recorder rec(trace);
  auto to_matrix = [](const Eigen::Vector3d& t) {
    Matrix2 k;
    k << t[0], t[2], t[2], t[1];
    return k;
  };
  auto to_params = [](const Matrix2& k) { return Eigen::Vector3d(k(0, 0), k(1, 1), k(0, 1)); };
  auto state = [&](const Eigen::Vector3d& t) {
    ++trace.evaluations;
    return Eigen::VectorXd(problem.solve(to_matrix(t), bc_direction).u_bar - g);
  };
  auto check_bounds = [&](const Eigen::Vector3d& t) {
    const Eigen::Vector2d ev = sym_eigenvalues(to_matrix(t));
    const double tol = 1e-12 * s.c_plus;
    if (ev[0] < s.c_minus - tol || ev[1] > s.c_plus + tol) throw SolverFailure("projection left the feasible set");
  };
  auto project = [&](const Eigen::Vector3d& t) { return to_params(project_onto_bounds(to_matrix(t), s.c_minus, s.c_plus)); };

  Eigen::Vector3d theta = project(Eigen::Vector3d(s.init, s.init, 0.0));
  check_bounds(theta);
  Eigen::VectorXd d = state(theta);
  double J = d.dot(lap * d);
  rec.add(to_matrix(theta), J);
  double mu = 1e-3;

  while (true) {
    if (trace.evaluations + 19 > s.max_evals) {
      trace.termination = "max_evals";
      break;
    }
    ++trace.iterations;
    const double delta = s.fd_step * std::max(1.0, theta.cwiseAbs().maxCoeff());
    const Eigen::VectorXd ld = lap * d;
    Eigen::MatrixXd jac(d.size(), 3);
    Eigen::Matrix3d second;  // 2 (d^2 u / d theta_i d theta_j)^T L d
    for (int i = 0; i < 3; ++i) {
      Eigen::Vector3d tp = theta, tm = theta;
      tp[i] += delta;
      tm[i] -= delta;
      const Eigen::VectorXd up = state(tp), um = state(tm);
      jac.col(i) = (up - um) / (2.0 * delta);
      second(i, i) = 2.0 * (up - 2.0 * d + um).dot(ld) / (delta * delta);
    }
    for (int i = 0; i < 3; ++i)
      for (int j = i + 1; j < 3; ++j) {
        auto at = [&](double a, double b) {
          Eigen::Vector3d t = theta;
          t[i] += a * delta;
          t[j] += b * delta;
          return state(t);
        };
        const Eigen::VectorXd mixed = at(1, 1) - at(1, -1) - at(-1, 1) + at(-1, -1);
        second(i, j) = second(j, i) = 2.0 * mixed.dot(ld) / (4.0 * delta * delta);
      }
    const Eigen::MatrixXd ljac = lap * jac;
    const Eigen::Vector3d grad = 2.0 * ljac.transpose() * d;
    const Eigen::Matrix3d gn = 2.0 * jac.transpose() * ljac;
    Eigen::Matrix3d hess = gn + second;
    // keep the Gauss-Newton model when the full Hessian is not positive definite
    if (Eigen::SelfAdjointEigenSolver<Eigen::Matrix3d>(hess).eigenvalues().minCoeff() <= 0.0) hess = gn;
    if ((theta - project(theta - grad)).cwiseAbs().maxCoeff() <= s.grad_tol * std::max(1.0, J)) {
      trace.termination = "gradient";
      break;
    }
    bool accepted = false;
    bool small_step = false;
    bool stalled = false;
    while (trace.evaluations < s.max_evals) {
      Eigen::Matrix3d m = hess;
      for (int i = 0; i < 3; ++i) m(i, i) += mu * (hess(i, i) + 1e-12 * hess.trace());
      Eigen::Vector3d step = m.ldlt().solve(-grad);
      // eigenvalues sitting on a bound that the step would push outside are held fixed
      const Eigen::SelfAdjointEigenSolver<Matrix2> es(to_matrix(theta));
      std::vector<Eigen::Vector3d> held;
      for (int k = 0; k < 2; ++k) {
        const Eigen::Vector2d v = es.eigenvectors().col(k);
        const Eigen::Vector3d a(v[0] * v[0], v[1] * v[1], 2.0 * v[0] * v[1]);
        const double lam = es.eigenvalues()[k];
        const double tol = 1e-8 * s.c_plus;
        if ((lam >= s.c_plus - tol && a.dot(step) > 0.0) || (lam <= s.c_minus + tol && a.dot(step) < 0.0))
          held.push_back(a);
      }
      if (!held.empty()) {
        Eigen::MatrixXd a(held.size(), 3);
        for (size_t k = 0; k < held.size(); ++k) a.row(k) = held[k].transpose();
        const Eigen::MatrixXd z = Eigen::FullPivLU<Eigen::MatrixXd>(a).kernel();
        const Eigen::MatrixXd mz = z.transpose() * m * z;
        step = z * mz.ldlt().solve(-z.transpose() * grad);
      }
      const Eigen::Vector3d cand = project(theta + step);
      check_bounds(cand);
      const double move = (cand - theta).cwiseAbs().maxCoeff();
      if (move <= s.step_tol * std::max(1.0, theta.cwiseAbs().maxCoeff())) {
        small_step = true;
        break;
      }
      const Eigen::VectorXd dc = state(cand);
      const double jc = dc.dot(lap * dc);
      rec.add(to_matrix(cand), jc);
      if (jc < J) {
        stalled = J - jc <= s.f_tol * J;
        theta = cand;
        d = dc;
        J = jc;
        mu = std::max(mu / 3.0, 1e-12);
        accepted = true;
        break;
      }
      mu *= 4.0;
      if (mu > 1e12) break;
    }
    if (small_step) {
      trace.termination = "step";
      break;
    }
    if (stalled) {
      trace.termination = "objective";
      break;
    }
    if (!accepted) {
      trace.termination = trace.evaluations >= s.max_evals ? "max_evals" : "stalled";
      break;
    }
  }
  trace.wall_time = std::chrono::duration<double>(Clock::now() - t0).count();
  return trace;
}

ConvexityReport convexity_probe(const CoupledProblem& problem, int bc_direction, const std::vector<double>& window,
                                double fd_step) {
  ConvexityReport r;
  double best = std::numeric_limits<double>::infinity();
  for (double k : window) {
    const ObjectiveEval e = eval_J(problem, k, bc_direction, true);
    const double h = fd_step * k;
    const double jp = eval_J(problem, k + h, bc_direction).J;
    const double jm = eval_J(problem, k - h, bc_direction).J;
    ConvexitySample smp{k, e.J, *e.dJ, *e.d2J, (jp - jm) / (2.0 * h), (jp - 2.0 * e.J + jm) / (h * h)};
    if (!r.samples.empty() && (r.samples.back().dJ < 0.0) != (smp.dJ < 0.0)) r.dJ_changes_sign = true;
    if (e.J < best) {
      best = e.J;
      r.kbar_near_min = k;
      r.d2J_near_min = smp.d2J;
    }
    r.samples.push_back(smp);
  }
  return r;
}

namespace {

struct PrecisionGuard {
  explicit PrecisionGuard(std::ostream& os) : os_(os), old_(os.precision(17)) {}
  ~PrecisionGuard() { os_.precision(old_); }
  std::ostream& os_;
  std::streamsize old_;
};

}  // namespace

void write_trace_csv(std::ostream& os, const OptimizationTrace& trace) {
  PrecisionGuard g(os);
  os << "index,k11,k22,k12,J,dJ,d2J,accepted\n";
  for (size_t i = 0; i < trace.iterates.size(); ++i) {
    const auto& e = trace.iterates[i];
    os << i << ',' << e.kbar(0, 0) << ',' << e.kbar(1, 1) << ',' << e.kbar(0, 1) << ',' << e.J << ',';
    if (!std::isnan(e.dJ)) os << e.dJ;
    os << ',';
    if (!std::isnan(e.d2J)) os << e.d2J;
    os << ',' << (e.accepted ? 1 : 0) << '\n';
  }
}

void write_conditions_csv(std::ostream& os, const ConditionReport& r, bool header) {
  PrecisionGuard g(os);
  if (header) os << "I_estimate,rhs1,rhs2,area_Dc,condition1,condition2,comparison\n";
  os << r.I_estimate << ',' << r.rhs1 << ',' << r.rhs2 << ',' << r.area_Dc << ',' << (r.condition1 ? 1 : 0) << ','
     << (r.condition2 ? 1 : 0) << ",empirical\n";
}

void write_convexity_csv(std::ostream& os, const ConvexityReport& r) {
  PrecisionGuard g(os);
  os << "kbar,J,dJ,d2J,dJ_fd,d2J_fd\n";
  for (const auto& s : r.samples)
    os << s.kbar << ',' << s.J << ',' << s.dJ << ',' << s.d2J << ',' << s.dJ_fd << ',' << s.d2J_fd << '\n';
}

}  // namespace arlequin
