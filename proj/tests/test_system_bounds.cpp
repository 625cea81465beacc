#include <cmath>
#include <complex>
#include <random>

#include <gtest/gtest.h>

#include "resbound/ode_bounds.hpp"
#include "resbound/oracle/catalog.hpp"
#include "resbound/oracle/integrators.hpp"
#include "resbound/system_bounds.hpp"

using namespace resbound;

namespace {

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::SchemaError;
}

SampledFunction sample(const Grid& g, auto&& f) { return SampledFunction::from_function(g, f); }

JordanSpec scalar(double a) {
  JordanSpec j;
  j.P = Eigen::MatrixXcd::Identity(1, 1);
  j.blocks = {{std::complex<double>(a, 0.0), 1}};
  return j;
}

}  // namespace

TEST(Cond2, Examples) {
  EXPECT_NEAR(cond2(Eigen::MatrixXd(Eigen::MatrixXd::Identity(4, 4))), 1.0, 1e-15);
  Eigen::MatrixXd D = Eigen::MatrixXd::Zero(2, 2);
  D(0, 0) = 10;
  D(1, 1) = 1;
  EXPECT_NEAR(cond2(D), 10.0, 1e-13);
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    const Eigen::MatrixXd Q = oracle::random_orthogonal(6, seed);
    EXPECT_LT((Q.transpose() * Q - Eigen::MatrixXd::Identity(6, 6)).norm(), 1e-12);
    EXPECT_NEAR(cond2(Q), 1.0, 1e-8);
  }
}

TEST(Cond2, SingularMatrix) {
  const Eigen::MatrixXd S = Eigen::MatrixXd::Ones(3, 3);
  EXPECT_EQ(kind_of([&] { cond2(S); }), ErrorKind::SingularMatrix);
}

TEST(JordanFromMatrix, Diagonal) {
  Eigen::MatrixXd A = Eigen::MatrixXd::Zero(2, 2);
  A(0, 0) = 1;
  A(1, 1) = 2;
  const auto j = jordan_from_matrix(A);
  ASSERT_EQ(j.blocks.size(), 2u);
  EXPECT_NEAR(j.blocks[0].lambda.real(), 1.0, 1e-12);
  EXPECT_NEAR(j.blocks[1].lambda.real(), 2.0, 1e-12);
  EXPECT_EQ(j.blocks[0].size, 1u);
  // columns are scaled unit vectors
  EXPECT_NEAR(std::abs(j.P(1, 0)), 0.0, 1e-12);
  EXPECT_NEAR(std::abs(j.P(0, 1)), 0.0, 1e-12);
}

TEST(JordanFromMatrix, DefectiveNeedsExplicitForm) {
  Eigen::MatrixXd A(2, 2);
  A << 4, 1, 0, 4;
  EXPECT_EQ(kind_of([&] { jordan_from_matrix(A); }), ErrorKind::NeedExplicitJordan);
}

TEST(JordanFromMatrix, RecoversConstructedSpectrum) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  for (int trial = 0; trial < 10; ++trial) {
    Eigen::MatrixXd P(3, 3);
    for (Eigen::Index i = 0; i < 9; ++i) P.data()[i] = u(rng);
    P += 3.0 * Eigen::MatrixXd::Identity(3, 3);  // keeps P well conditioned
    Eigen::MatrixXd D = Eigen::MatrixXd::Zero(3, 3);
    D.diagonal() << 1, 2, 3;
    const Eigen::MatrixXd A = P * D * P.inverse();
    const auto j = jordan_from_matrix(A);
    ASSERT_EQ(j.blocks.size(), 3u);
    for (int i = 0; i < 3; ++i) EXPECT_NEAR(j.blocks[i].lambda.real(), i + 1.0, 1e-9);
    EXPECT_LE((j.reassemble() - A.cast<std::complex<double>>()).norm(), 1e-8 * A.norm());
  }
}

TEST(BlockApply, SingleBlockReducesToApplyI) {
  const Grid g(1.0, 1000);
  const auto q = sample(g, [](double t) { return 1.0 + std::sin(t); });
  const auto out = operator_block_apply({2.0, 5.0}, {q});
  const auto want = apply_I(-2.0, q);
  for (std::size_t k = 0; k < g.size(); ++k) EXPECT_DOUBLE_EQ(out[0][k], want[k]);
}

TEST(BlockApply, TwoByTwoBlock) {
  const Grid g(1.0, 1000);
  const auto q1 = sample(g, [](double t) { return 1.0 + t; });
  const auto q2 = sample(g, [](double t) { return std::exp(-t); });
  const auto out = operator_block_apply({1.5, 0.0}, {q1, q2});
  const auto row1 = apply_I(-1.5, q1) + apply_I(-1.5, apply_I(-1.5, q2), 0.0, false);
  const auto row2 = apply_I(-1.5, q2);
  for (std::size_t k = 0; k < g.size(); ++k) {
    EXPECT_NEAR(out[0][k], row1[k], 1e-15 * std::max(1.0, row1[k]));
    EXPECT_NEAR(out[1][k], row2[k], 1e-15 * std::max(1.0, row2[k]));
  }
}

TEST(BlockApply, ZeroInput) {
  const Grid g(1.0, 100);
  const auto z = sample(g, [](double) { return 0.0; });
  for (const auto& row : operator_block_apply({-1.0, 2.0}, {z, z, z})) {
    for (double v : row.values()) EXPECT_EQ(v, 0.0);
  }
}

TEST(SystemBound, ScalarReducesToOdeTightBound) {
  SystemProblem sp;
  sp.jordan = scalar(2.0);
  sp.residual = {ResidualProvider(Expression::parse("cos(4*t)+0.5"))};
  LinearODEProblem op;
  op.coefficients = {2.0};
  op.residual = ResidualProvider(Expression::parse("cos(4*t)+0.5"));
  const auto comp = componentwise_bound(sp);
  const auto norm = norm_bound(sp);
  const auto tight = tight_bound(op);
  for (std::size_t k = 0; k < tight.t.size(); ++k) {
    EXPECT_NEAR(comp.componentwise[k][0], tight.bound[k], 1e-10 * std::max(tight.bound[k], 1e-300));
    EXPECT_NEAR(norm.norm[k], comp.componentwise[k][0], 1e-10 * std::max(tight.bound[k], 1e-300));
  }
}

TEST(SystemBound, ZeroResidual) {
  const auto sc = oracle::make_system_case(oracle::kDefaultSeed, 0.0);
  const auto p = sc.problem(500);
  for (const auto& row : componentwise_bound(p).componentwise) {
    for (double v : row) EXPECT_LE(v, 1e-12);
  }
}

TEST(SystemBound, DimensionMismatchRejected) {
  SystemProblem sp;
  sp.jordan = scalar(1.0);
  sp.residual = {ResidualProvider(), ResidualProvider()};
  EXPECT_THROW(componentwise_bound(sp), Error);
}

TEST(SystemBound, ManufacturedSystemIsContained) {
  const auto sc = oracle::make_system_case(oracle::kDefaultSeed, 1e-2);
  const auto p = sc.problem(4000);
  const auto comp = componentwise_bound(p);
  const auto norm = norm_bound(p);
  for (std::size_t k = 0; k < comp.t.size(); ++k) {
    double sq = 0.0;
    for (std::size_t i = 0; i < sc.exact.size(); ++i) {
      const double eta = std::abs(sc.perturbation[i].eval(Bindings::at_t(comp.t[k])));
      EXPECT_LE(eta, comp.componentwise[k][i] + 1e-15);
      sq += eta * eta;
    }
    EXPECT_LE(std::sqrt(sq), norm.norm[k] + 1e-15);
  }
}

// The manufactured exact solution really solves v' + A v = f: RK4 from v(0)
// reproduces it.
TEST(SystemCase, ExactSolutionSolvesTheSystem) {
  const auto sc = oracle::make_system_case(oracle::kDefaultSeed, 1e-2);
  const auto f = system_forcing_from_exact(sc.A, sc.exact);
  const std::size_t n = sc.exact.size();
  oracle::State y0(n);
  for (std::size_t i = 0; i < n; ++i) y0[i] = sc.exact[i].eval(Bindings::at_t(0.0));
  const Grid g(1.0, 2000);
  const auto ys = oracle::rk4_solve(
      [&](double t, std::span<const double> y, std::span<double> dy) {
        for (std::size_t i = 0; i < n; ++i) {
          double s = f[i](t);
          for (std::size_t j = 0; j < n; ++j) s -= sc.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * y[j];
          dy[i] = s;
        }
      },
      y0, g);
  for (std::size_t k = 0; k < g.size(); k += 200) {
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(ys[k][i], sc.exact[i].eval(Bindings::at_t(g.node(k))), 1e-8);
    }
  }
}
