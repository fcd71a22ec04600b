#include <gtest/gtest.h>

#include "arlequin/coefficients.hpp"
#include "arlequin/errors.hpp"

using namespace arlequin;

TEST(Coefficients, Constant) {
  const auto k = coefficient_zoo("constant", {{"c", 3.0}});
  EXPECT_TRUE(k.is_constant());
  EXPECT_TRUE(k({0.3, 0.7}).isApprox(3.0 * Matrix2::Identity()));
  const auto a = coefficient_zoo("constant", {{"k11", 2.0}, {"k22", 3.0}, {"k12", 0.5}});
  EXPECT_DOUBLE_EQ(a({0.1, 0.1})(0, 1), 0.5);
  EXPECT_DOUBLE_EQ(a({0.1, 0.1})(1, 0), 0.5);
  EXPECT_THROW(coefficient_zoo("constant", {{"c", 1.0}, {"k11", 1.0}}), InvalidParameter);
  EXPECT_THROW(coefficient_zoo("constant", {{"k11", 1.0}, {"k22", 1.0}, {"k12", 2.0}}), InvalidParameter);
}

TEST(Coefficients, Laminate) {
  const auto k = coefficient_zoo("laminate", {{"a", 1.0}, {"b", 4.0}});
  EXPECT_DOUBLE_EQ(k({0.25, 0.9})(0, 0), 1.0);
  EXPECT_DOUBLE_EQ(k({0.75, 0.1})(0, 0), 4.0);
  const auto k2 = coefficient_zoo("laminate", {{"direction", 2.0}});
  EXPECT_DOUBLE_EQ(k2({0.75, 0.1})(0, 0), 1.0);
  EXPECT_THROW(coefficient_zoo("laminate", {{"direction", 3.0}}), InvalidParameter);
  EXPECT_THROW(coefficient_zoo("laminate", {{"a", -1.0}}), InvalidParameter);
}

TEST(Coefficients, Checkerboard) {
  const auto k = coefficient_zoo("checkerboard", {{"a", 1.0}, {"b", 4.0}});
  EXPECT_TRUE(k({0.25, 0.25}).isApprox(Matrix2::Identity()));
  EXPECT_TRUE(k({0.6, 0.6}).isApprox(Matrix2::Identity()));
  EXPECT_TRUE(k({0.6, 0.1}).isApprox(4.0 * Matrix2::Identity()));
  EXPECT_TRUE(k({0.1, 0.6}).isApprox(4.0 * Matrix2::Identity()));
}

TEST(Coefficients, SmoothTrig) {
  const auto k = coefficient_zoo("smooth_trig");
  EXPECT_NEAR(k({0.25, 0.25})(0, 0), 3.0, 1e-14);
  EXPECT_NEAR(k({0.75, 0.25})(0, 0), 1.0, 1e-14);
  EXPECT_NEAR(k({0.0, 0.4})(0, 0), 2.0, 1e-14);
  EXPECT_DOUBLE_EQ(k.c1(), 1.0);
  EXPECT_DOUBLE_EQ(k.c2(), 3.0);
  EXPECT_THROW(coefficient_zoo("smooth_trig", {{"base", 1.0}, {"amp", 1.0}}), InvalidParameter);
}

TEST(Coefficients, AnisotropicLaminate) {
  const auto k = coefficient_zoo("anisotropic_laminate");
  EXPECT_TRUE(k({0.2, 0.0}).isApprox(Eigen::Vector2d(1.0, 2.0).asDiagonal().toDenseMatrix()));
  EXPECT_TRUE(k({0.7, 0.0}).isApprox(Eigen::Vector2d(4.0, 3.0).asDiagonal().toDenseMatrix()));
}

TEST(Coefficients, Periodicity) {
  const auto k = coefficient_zoo("smooth_trig");
  for (double x : {0.13, 0.5, 0.91})
    for (double y : {0.07, 0.33}) {
      EXPECT_NEAR(k({x, y})(0, 0), k({x + 3.0, y - 2.0})(0, 0), 1e-12);
      EXPECT_NEAR(k({x, y})(0, 0), k({x - 1.0, y + 5.0})(0, 0), 1e-12);
    }
  const auto c = coefficient_zoo("checkerboard");
  EXPECT_TRUE(c.at_scale({0.15, 0.15}, 0.25).isApprox(c({0.6, 0.6})));
}

TEST(Coefficients, Bounds) {
  for (const auto& name : coefficient_names()) {
    const auto k = coefficient_zoo(name);
    for (int i = 0; i < 20; ++i)
      for (int j = 0; j < 20; ++j) {
        const auto ev = sym_eigenvalues(k({(i + 0.5) / 20.0, (j + 0.5) / 20.0}));
        EXPECT_GE(ev[0], k.c1() - 1e-12) << name;
        EXPECT_LE(ev[1], k.c2() + 1e-12) << name;
      }
  }
}

TEST(Coefficients, Errors) {
  EXPECT_THROW(coefficient_zoo("marble"), UnknownCoefficient);
  EXPECT_THROW(coefficient_zoo("laminate", {{"c", 1.0}}), InvalidParameter);
  EXPECT_THROW(sample_k_eps(coefficient_zoo("smooth_trig"), 0.0, {{0.0, 0.0}}), InvalidParameter);
}

TEST(Coefficients, Sampling) {
  const auto k = coefficient_zoo("laminate");
  const auto s = sample_k_eps(k, 0.5, {{0.1, 0.0}, {0.3, 0.0}, {-0.1, 0.0}});
  ASSERT_EQ(s.size(), 3u);
  EXPECT_DOUBLE_EQ(s[0](0, 0), 1.0);
  EXPECT_DOUBLE_EQ(s[1](0, 0), 4.0);
  EXPECT_DOUBLE_EQ(s[2](0, 0), 4.0);
}

TEST(Coefficients, Spd) {
  Matrix2 k;
  k << 2.0, 0.5, 0.5, 3.0;
  EXPECT_TRUE(is_spd(k));
  const auto ev = sym_eigenvalues(k);
  EXPECT_NEAR(ev[0] + ev[1], 5.0, 1e-14);
  EXPECT_NEAR(ev[0] * ev[1], 5.75, 1e-14);
  k(0, 1) = 0.4;
  EXPECT_FALSE(is_spd(k));
  EXPECT_FALSE(is_spd(-Matrix2::Identity()));
}
