#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "arlequin/geometry.hpp"

namespace arlequin {

using Matrix2 = Eigen::Matrix2d;
using ParamMap = std::map<std::string, double>;

class CoefficientField {
 public:
  using Evaluator = std::function<Matrix2(const Point& y)>;

  CoefficientField(std::string name, Evaluator k_per, double c1, double c2, bool continuous);

  // k_per(y); y is reduced to the unit cell first
  Matrix2 operator()(const Point& y) const;
  Matrix2 at_scale(const Point& x, double eps) const { return (*this)(x / eps); }

  const std::string& name() const { return name_; }
  double c1() const { return c1_; }
  double c2() const { return c2_; }
  bool continuous() const { return continuous_; }
  // true when the field is the same everywhere (no oscillation)
  bool is_constant() const { return constant_; }
  void set_constant(bool v) { constant_ = v; }

 private:
  std::string name_;
  Evaluator k_per_;
  double c1_;
  double c2_;
  bool continuous_;
  bool constant_ = false;
};

std::vector<Matrix2> sample_k_eps(const CoefficientField& field, double eps, const std::vector<Point>& points);

CoefficientField coefficient_zoo(const std::string& name, const ParamMap& params = {});

std::vector<std::string> coefficient_names();

// smallest and largest eigenvalue of a symmetric 2x2 matrix
Eigen::Vector2d sym_eigenvalues(const Matrix2& k);
bool is_spd(const Matrix2& k, double tol = 1e-12);

}  // namespace arlequin
