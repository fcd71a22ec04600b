#include "arlequin/coefficients.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <set>
#include <sstream>

#include "arlequin/errors.hpp"

namespace arlequin {

CoefficientField::CoefficientField(std::string name, Evaluator k_per, double c1, double c2, bool continuous)
    : name_(std::move(name)), k_per_(std::move(k_per)), c1_(c1), c2_(c2), continuous_(continuous) {
  if (!(c1_ > 0.0) || c2_ < c1_) throw InvalidParameter("coefficient bounds must satisfy 0 < c1 <= c2");
}

Matrix2 CoefficientField::operator()(const Point& y) const {
  const Point cell(y.x() - std::floor(y.x()), y.y() - std::floor(y.y()));
  return k_per_(cell);
}

std::vector<Matrix2> sample_k_eps(const CoefficientField& field, double eps, const std::vector<Point>& points) {
  if (!(eps > 0.0)) throw InvalidParameter("eps must be positive");
  std::vector<Matrix2> out;
  out.reserve(points.size());
  for (const auto& p : points) out.push_back(field.at_scale(p, eps));
  return out;
}

Eigen::Vector2d sym_eigenvalues(const Matrix2& k) {
  const double a = k(0, 0), d = k(1, 1), b = 0.5 * (k(0, 1) + k(1, 0));
  const double mean = 0.5 * (a + d);
  const double rad = std::hypot(0.5 * (a - d), b);
  return {mean - rad, mean + rad};
}

bool is_spd(const Matrix2& k, double tol) {
  if (!k.allFinite()) return false;
  if (std::abs(k(0, 1) - k(1, 0)) > tol * std::max(1.0, k.cwiseAbs().maxCoeff())) return false;
  return sym_eigenvalues(k)[0] > 0.0;
}

namespace {

class Params {
 public:
  Params(std::string coefficient, const ParamMap& given) : coefficient_(std::move(coefficient)), given_(given) {}

  double get(const std::string& key, double fallback) {
    used_.insert(key);
    auto it = given_.find(key);
    return it == given_.end() ? fallback : it->second;
  }
  bool has(const std::string& key) const { return given_.count(key) != 0; }

  void finish() const {
    for (const auto& [k, v] : given_)
      if (!used_.count(k)) throw InvalidParameter("unknown parameter '" + k + "' for " + coefficient_);
  }

 private:
  std::string coefficient_;
  const ParamMap& given_;
  std::set<std::string> used_;
};

void require_positive(double v, const char* what) {
  if (!(v > 0.0)) throw InvalidParameter(std::string(what) + " must be positive");
}

int direction_param(Params& p) {
  const double d = p.get("direction", 1.0);
  if (d != 1.0 && d != 2.0) throw InvalidParameter("direction must be 1 or 2");
  return static_cast<int>(d);
}

Matrix2 diag(double a, double b) { return Eigen::Vector2d(a, b).asDiagonal(); }

}  // namespace

std::vector<std::string> coefficient_names() {
  return {"constant", "laminate", "checkerboard", "smooth_trig", "anisotropic_laminate"};
}

CoefficientField coefficient_zoo(const std::string& name, const ParamMap& params) {
  Params p(name, params);
  if (name == "constant") {
    Matrix2 k;
    if (p.has("k11") || p.has("k22") || p.has("k12")) {
      if (p.has("c")) throw InvalidParameter("constant: give either c or k11/k22/k12");
      const double k11 = p.get("k11", 1.0), k22 = p.get("k22", 1.0), k12 = p.get("k12", 0.0);
      k << k11, k12, k12, k22;
    } else {
      k = p.get("c", 1.0) * Matrix2::Identity();
    }
    p.finish();
    if (!is_spd(k)) throw InvalidParameter("constant: tensor must be SPD");
    const auto ev = sym_eigenvalues(k);
    CoefficientField f("constant", [k](const Point&) { return k; }, ev[0], ev[1], true);
    f.set_constant(true);
    return f;
  }
  if (name == "laminate") {
    const double a = p.get("a", 1.0), b = p.get("b", 4.0);
    const int dir = direction_param(p);
    p.finish();
    require_positive(a, "laminate a");
    require_positive(b, "laminate b");
    return CoefficientField(
        "laminate",
        [a, b, dir](const Point& y) { return (y[dir - 1] < 0.5 ? a : b) * Matrix2::Identity(); },
        std::min(a, b), std::max(a, b), a == b);
  }
  if (name == "checkerboard") {
    const double a = p.get("a", 1.0), b = p.get("b", 4.0);
    p.finish();
    require_positive(a, "checkerboard a");
    require_positive(b, "checkerboard b");
    return CoefficientField(
        "checkerboard",
        [a, b](const Point& y) {
          const bool same = (y.x() < 0.5) == (y.y() < 0.5);
          return (same ? a : b) * Matrix2::Identity();
        },
        std::min(a, b), std::max(a, b), a == b);
  }
  if (name == "smooth_trig") {
    const double base = p.get("base", 2.0), amp = p.get("amp", 1.0);
    p.finish();
    if (!(base > std::abs(amp))) throw InvalidParameter("smooth_trig needs base > |amp|");
    return CoefficientField(
        "smooth_trig",
        [base, amp](const Point& y) {
          const double two_pi = 2.0 * std::numbers::pi;
          return (base + amp * std::sin(two_pi * y.x()) * std::sin(two_pi * y.y())) * Matrix2::Identity();
        },
        base - std::abs(amp), base + std::abs(amp), true);
  }
  if (name == "anisotropic_laminate") {
    const double a11 = p.get("a11", 1.0), a22 = p.get("a22", 2.0);
    const double b11 = p.get("b11", 4.0), b22 = p.get("b22", 3.0);
    const int dir = direction_param(p);
    p.finish();
    for (double v : {a11, a22, b11, b22}) require_positive(v, "anisotropic_laminate entries");
    const Matrix2 ka = diag(a11, a22), kb = diag(b11, b22);
    const double lo = std::min({a11, a22, b11, b22}), hi = std::max({a11, a22, b11, b22});
    return CoefficientField(
        "anisotropic_laminate", [ka, kb, dir](const Point& y) { return y[dir - 1] < 0.5 ? ka : kb; }, lo, hi,
        ka == kb);
  }
  throw UnknownCoefficient("'" + name + "'");
}

}  // namespace arlequin
