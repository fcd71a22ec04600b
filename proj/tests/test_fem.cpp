#include <gtest/gtest.h>

#include <sstream>

#include "arlequin/errors.hpp"
#include "arlequin/fem.hpp"
#include "test_support.hpp"

using namespace arlequin;
using arlequin::testing::small_disc;

TEST(Fem, Dofs) {
  const auto& d = *small_disc();
  EXPECT_EQ(d.coarse().dirichlet_dofs().size(), 64u);
  EXPECT_EQ(d.coarse().free_dofs().size() + 64u, static_cast<size_t>(d.coarse().size()));
  EXPECT_EQ(d.coarse().coupling_dofs().size(), 9u * 9u - 3u * 3u);
  EXPECT_TRUE(d.fine().dirichlet_dofs().empty());
  EXPECT_EQ(static_cast<int>(d.fine().coupling_dofs().size()), 41 * 41 - 19 * 19);
  for (int v : d.coarse().dirichlet_dofs()) EXPECT_LT(d.coarse().free_index()[v], 0);
}

TEST(Fem, StiffnessAndMassIdentities) {
  const auto& d = *small_disc();
  const Mesh& cm = d.coarse().mesh();
  const SparseMatrix a = assemble_stiffness(cm, {1.0, 1.0, 0.0});
  const Eigen::VectorXd one = Eigen::VectorXd::Ones(cm.num_vertices());
  const Eigen::VectorXd x1 = d.coarse().linear(1);
  EXPECT_LT((a * one).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_NEAR(x1.dot(a * x1), 60.0, 1e-10);
  const SparseMatrix m = assemble_mass(cm, {1.0, 0.0, 0.0});
  EXPECT_NEAR(one.dot(m * one), 48.0, 1e-10);
  EXPECT_TRUE(a.isApprox(SparseMatrix(a.transpose())));
}

TEST(Fem, AbarComponents) {
  const auto& d = *small_disc();
  Matrix2 k;
  k << 2.0, 0.5, 0.5, 3.0;
  const SparseMatrix direct = assemble_Abar(d.coarse(), k).matrix;
  EXPECT_LT((direct - d.abar().combine(k)).norm(), 1e-12 * direct.norm());
  const Eigen::VectorXd x1 = d.coarse().linear(1), x2 = d.coarse().linear(2);
  // D weighted 1, D_c weighted 1/2
  EXPECT_NEAR(x1.dot(d.abar_unit() * x1), 54.0, 1e-10);
  EXPECT_NEAR(x1.dot(direct * x2), 0.5 * 54.0, 1e-10);
  Matrix2 bad;
  bad << 1.0, 2.0, 2.0, 1.0;
  EXPECT_THROW(assemble_Abar(d.coarse(), bad), NonSpdCoefficient);
  EXPECT_THROW(assemble_Abar(d.fine(), k), MismatchedRegion);
}

TEST(Fem, Acheck) {
  const auto& d = *small_disc();
  const SparseMatrix a = assemble_Acheck(d.fine(), coefficient_zoo("constant", {{"c", 3.0}}), 0.5).matrix;
  const Eigen::VectorXd x1 = d.fine().linear(1);
  // D_c weighted 1/2, D_f weighted 1
  EXPECT_NEAR(x1.dot(a * x1), 3.0 * (0.5 * 12.0 + 4.0), 1e-10);
  EXPECT_LT((a * Eigen::VectorXd::Ones(d.fine().size())).cwiseAbs().maxCoeff(), 1e-12);
  EXPECT_THROW(assemble_Acheck(d.coarse(), coefficient_zoo("constant"), 0.5), MismatchedRegion);
}

TEST(Fem, CouplingForm) {
  const auto& d = *small_disc();
  const SparseMatrix cc = assemble_C(d.coarse(), d.coarse()).matrix;
  const SparseMatrix cf = assemble_C(d.fine(), d.fine()).matrix;
  const Eigen::VectorXd xc = d.coarse().linear(1), xf = d.fine().linear(1);
  // |D_c| + \int_{D_c} x^2
  EXPECT_NEAR(xc.dot(cc * xc), 32.0, 1e-10);
  EXPECT_NEAR(xf.dot(cf * xf), 32.0, 1e-10);
  const SparseMatrix cross = assemble_C(d.coarse(), d.fine()).matrix;
  EXPECT_NEAR(xc.dot(cross * xf), 32.0, 1e-10);
  const SparseMatrix p = prolongation(d.coarse(), d.fine());
  EXPECT_LT((SparseMatrix(p.transpose()) * cf * p - cc).norm(), 1e-10 * cc.norm());
}

TEST(Fem, Prolongation) {
  const auto& d = *small_disc();
  const SparseMatrix p = prolongation(d.coarse(), d.fine());
  EXPECT_EQ(p.rows(), d.fine().size());
  EXPECT_EQ(p.cols(), d.coarse().size());
  const Eigen::VectorXd one = p * Eigen::VectorXd::Ones(d.coarse().size());
  for (int v = 0; v < d.fine().size(); ++v) {
    const bool in_dc = d.fine().coupling_index()[v] >= 0;
    EXPECT_NEAR(one[v], in_dc ? 1.0 : 0.0, 1e-13);
  }
  const Eigen::VectorXd g = d.coarse().interpolate([](const Point& x) { return x.x() * x.x() + x.y(); });
  const Eigen::VectorXd pg = p * g;
  // exact at coarse vertices
  for (int v : d.coarse().coupling_dofs()) {
    const Point& x = d.coarse().mesh().vertices[v];
    for (int w = 0; w < d.fine().size(); ++w)
      if ((d.fine().mesh().vertices[w] - x).norm() < 1e-12) EXPECT_NEAR(pg[w], g[v], 1e-12);
  }
}

TEST(Fem, ProjectionReproducesWH) {
  const auto& d = *small_disc();
  const Eigen::VectorXd g = d.coarse().interpolate([](const Point& x) { return std::sin(x.x()) + x.y(); });
  Eigen::VectorXd gc = Eigen::VectorXd::Zero(d.coarse().size());
  for (int v : d.coarse().coupling_dofs()) gc[v] = g[v];
  const Eigen::VectorXd v = prolongation(d.coarse(), d.fine()) * g;
  const auto proj = project_WH(d.coarse(), d.fine(), v);
  EXPECT_LT((proj.coarse - gc).cwiseAbs().maxCoeff(), 1e-10);
  const auto with_e = project_WH(d.coarse(), d.fine(), v, {d.enrichment().psi[0]});
  EXPECT_NEAR(with_e.enrichment[0], 0.0, 1e-10);
  EXPECT_THROW(project_WH(d.coarse(), d.fine(), v, {v}), SingularGram);
  EXPECT_THROW(project_WH(d.coarse(), d.fine(), g), MismatchedRegion);
}

TEST(Fem, SelectAndCoo) {
  SparseMatrix m(3, 3);
  m.insert(0, 0) = 1.0;
  m.insert(2, 1) = 2.0;
  m.insert(1, 2) = 3.0;
  const SparseMatrix r = select_rows(m, {2, 0});
  EXPECT_DOUBLE_EQ(r.coeff(0, 1), 2.0);
  EXPECT_DOUBLE_EQ(r.coeff(1, 0), 1.0);
  const SparseMatrix c = select_cols(m, {2});
  EXPECT_DOUBLE_EQ(c.coeff(1, 0), 3.0);
  std::ostringstream os;
  write_coo(os, m);
  EXPECT_EQ(os.str().substr(0, 6), "3 3 3\n");
}
