#include <gtest/gtest.h>

#include <sstream>

#include "arlequin/errors.hpp"
#include "arlequin/oracle.hpp"

using namespace arlequin;

TEST(Oracle, ConstantIsExact) {
  Matrix2 k;
  k << 2.0, 0.5, 0.5, 3.0;
  const auto t = homogenized_tensor(coefficient_zoo("constant", {{"k11", 2.0}, {"k22", 3.0}, {"k12", 0.5}}), 16);
  EXPECT_LT((t.kstar - k).cwiseAbs().maxCoeff(), 1e-12);
  // without the shortcut the corrector vanishes as well
  const auto c = coefficient_zoo("constant", {{"c", 3.0}});
  const auto w = solve_corrector(c, 16, 1);
  EXPECT_LT(w.w.cwiseAbs().maxCoeff(), 1e-12);
}

TEST(Oracle, Laminate) {
  const auto t = homogenized_tensor(coefficient_zoo("laminate"), {64, 128, 256});
  EXPECT_NEAR(t.kstar(0, 0), 1.6, 1e-3);
  EXPECT_NEAR(t.kstar(1, 1), 2.5, 1e-3);
  EXPECT_NEAR(t.kstar(0, 1), 0.0, 1e-10);
  // the interface is resolved by the grid, so every level is already exact
  for (const auto& l : t.levels) EXPECT_NEAR(l(0, 0), 1.6, 1e-10);
}

TEST(Oracle, AnisotropicLaminate) {
  const auto t = homogenized_tensor(coefficient_zoo("anisotropic_laminate"), 32);
  EXPECT_NEAR(t.kstar(0, 0), 1.6, 1e-10);
  EXPECT_NEAR(t.kstar(1, 1), 2.5, 1e-10);
  const auto t2 = homogenized_tensor(coefficient_zoo("anisotropic_laminate", {{"direction", 2.0}}), 32);
  EXPECT_NEAR(t2.kstar(0, 0), 2.5, 1e-10);
  EXPECT_NEAR(t2.kstar(1, 1), 2.0 / (1.0 / 2.0 + 1.0 / 3.0), 1e-10);
}

TEST(Oracle, CheckerboardDuality) {
  const auto t = homogenized_tensor(coefficient_zoo("checkerboard"), {64, 128, 256});
  EXPECT_NEAR(t.kstar(0, 0), t.kstar(1, 1), 1e-8);
  EXPECT_NEAR(t.kstar(0, 1), 0.0, 1e-8);
  EXPECT_NEAR(t.kstar(0, 0) * t.kstar(0, 0), 4.0, 0.08);
}

TEST(Oracle, SmoothTrigConverges) {
  const auto t = homogenized_tensor(coefficient_zoo("smooth_trig"), {32, 64, 128});
  EXPECT_NEAR(t.kstar(0, 0), t.kstar(1, 1), 1e-10);
  // between the harmonic and arithmetic bounds
  EXPECT_LT(t.kstar(0, 0), 2.0);
  EXPECT_GT(t.kstar(0, 0), std::sqrt(3.0));
  EXPECT_NEAR(t.kstar(0, 0), 1.9353592, 2e-5);
  EXPECT_GT(t.error_estimate, 0.0);
  EXPECT_LT(t.error_estimate, 1e-3);
}

TEST(Oracle, Corrector) {
  const auto cell = CellProblem::build(coefficient_zoo("smooth_trig"), 16);
  EXPECT_EQ(cell.stiffness.rows(), 256);
  EXPECT_LT((cell.stiffness * Eigen::VectorXd::Ones(256)).cwiseAbs().maxCoeff(), 1e-12);
  const auto w = solve_corrector(cell, 1);
  EXPECT_NEAR(w.w.mean(), 0.0, 1e-14);
  EXPECT_LE(w.residual, 1e-10);
  EXPECT_THROW(CellProblem::build(coefficient_zoo("constant"), 7), InvalidParameter);
  EXPECT_THROW(CellProblem::build(coefficient_zoo("constant"), 4), InvalidParameter);
  EXPECT_THROW(solve_corrector(cell, 0), InvalidParameter);
}

TEST(Oracle, Richardson) {
  // first-order sequence 1 + 1/n
  EXPECT_NEAR(richardson(1.0 + 1.0 / 64, 1.0 + 1.0 / 128, 1.0 + 1.0 / 256), 1.0, 1e-14);
  EXPECT_NEAR(richardson(1.0 + 1.0 / 4096, 1.0 + 1.0 / 16384, 1.0 + 1.0 / 65536), 1.0, 1e-14);
  EXPECT_DOUBLE_EQ(richardson(2.0, 2.0, 2.0), 2.0);
  // oscillating or non-contracting sequences are left alone
  EXPECT_DOUBLE_EQ(richardson(1.0, 2.0, 1.5), 1.5);
  EXPECT_DOUBLE_EQ(richardson(1.0, 2.0, 3.0), 3.0);
  EXPECT_THROW(homogenized_tensor(coefficient_zoo("constant"), std::vector<int>{}), InvalidParameter);
}

TEST(Oracle, Csv) {
  const auto t = homogenized_tensor(coefficient_zoo("laminate"), {16, 32});
  std::ostringstream os;
  write_oracle_csv(os, t);
  EXPECT_EQ(os.str().rfind("k11,k22,k12,resolutions,error_estimate,asymmetry\n", 0), 0u);
  EXPECT_NE(os.str().find("16;32"), std::string::npos);
}
