#include <cmath>

#include <gtest/gtest.h>

#include "resbound/oracle/catalog.hpp"
#include "resbound/pde_bounds.hpp"

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

PDEProblem transport(const char* a, const char* b, const char* c, const char* r, Rectangle d,
                     std::vector<BoundarySegment> gamma) {
  PDEProblem p;
  p.a = Expression::parse(a);
  p.b = Expression::parse(b);
  p.c = Expression::parse(c);
  p.f = Expression::constant(0.0);
  p.domain = d;
  p.gamma = std::move(gamma);
  p.residual = FieldResidual(Expression::parse(r));
  return p;
}

constexpr Rectangle kUnit{0.0, 1.0, 0.0, 1.0};
constexpr Rectangle kSquare{-1.0, 1.0, -1.0, 1.0};

}  // namespace

TEST(ConstantBound, ZeroResidual) {
  const auto p = transport("1", "0", "2", "0", kUnit, {{Edge::Left}});
  EXPECT_EQ(constant_bound(p, 64, 64).bound, 0.0);
}

TEST(ConstantBound, MinimumOfCoefficient) {
  const auto p = transport("1", "0", "3-2*x", "0.5", kSquare, {{Edge::Left}});
  const auto rep = constant_bound(p, 64, 64);
  EXPECT_NEAR(rep.bound, 0.5, 1e-15);
  EXPECT_NEAR(rep.min_abs_c, 1.0, 1e-15);
  EXPECT_NEAR(rep.x_at_max, 1.0, 1e-15);
}

TEST(ConstantBound, SignChangeRejected) {
  const auto p = transport("1", "0", "x", "1", kSquare, {{Edge::Left}});
  EXPECT_EQ(kind_of([&] { constant_bound(p, 64, 64); }), ErrorKind::CoefficientVanishes);
}

TEST(Trace, ConstantField) {
  const auto p = transport("1", "0", "1", "0", kUnit, {{Edge::Left}});
  const auto curve = trace_characteristic(p, 0.5, 0.3);
  EXPECT_NEAR(curve.s_star, 0.5, 1e-9);
  EXPECT_NEAR(curve.x.front(), 0.0, 1e-9);
  EXPECT_NEAR(curve.y.front(), 0.3, 1e-12);
  for (double y : curve.y) EXPECT_NEAR(y, 0.3, 1e-12);
  EXPECT_EQ(curve.x.back(), 0.5);
}

TEST(Trace, SpiralMatchesClosedForm) {
  const auto p = transport("-x-y", "x-y", "1", "0", kSquare,
                           {{Edge::Left}, {Edge::Right}, {Edge::Bottom}, {Edge::Top}});
  for (double theta : {0.1, 1.0, 2.5, 4.0}) {
    // start on the boundary, integrate forward, compare with R0 e^{-s}(cos, sin)(s + theta0)
    const double x0 = std::cos(theta) / std::max(std::abs(std::cos(theta)), std::abs(std::sin(theta)));
    const double y0 = std::sin(theta) / std::max(std::abs(std::cos(theta)), std::abs(std::sin(theta)));
    const double r0 = std::hypot(x0, y0);
    const double th0 = std::atan2(y0, x0);
    const auto curve = trace_from_boundary(p, x0, y0, 3.0);
    for (std::size_t i = 0; i < curve.size(); ++i) {
      const double s = curve.s[i];
      EXPECT_NEAR(curve.x[i], r0 * std::exp(-s) * std::cos(s + th0), 1e-6);
      EXPECT_NEAR(curve.y[i], r0 * std::exp(-s) * std::sin(s + th0), 1e-6);
    }
  }
}

TEST(Trace, BackwardSpiralEndsOnBoundary) {
  const auto p = transport("-x-y", "x-y", "1", "0", kSquare,
                           {{Edge::Left}, {Edge::Right}, {Edge::Bottom}, {Edge::Top}});
  const auto curve = trace_characteristic(p, 0.2, -0.1);
  const double bx = curve.x.front();
  const double by = curve.y.front();
  EXPECT_NEAR(std::max(std::abs(bx), std::abs(by)), 1.0, 1e-9);
  // along the spiral, r e^{s} is invariant
  EXPECT_NEAR(std::hypot(bx, by) * std::exp(-curve.s_star), std::hypot(0.2, -0.1), 1e-6);
}

TEST(Trace, StagnationPoint) {
  const auto p = transport("0", "0", "1", "0", kUnit, {{Edge::Left}});
  EXPECT_EQ(kind_of([&] { trace_characteristic(p, 0.5, 0.5); }), ErrorKind::StagnationPoint);
}

TEST(Trace, ExitOffGammaRejected) {
  const auto p = transport("1", "0", "1", "0", kUnit, {{Edge::Right}});
  EXPECT_EQ(kind_of([&] { trace_characteristic(p, 0.5, 0.5); }), ErrorKind::NotOnDirichletBoundary);
}

TEST(Trace, PartialEdgeSegment) {
  auto p = transport("1", "0", "1", "0", kUnit, {{Edge::Left, 0.0, 0.5}});
  EXPECT_NO_THROW(trace_characteristic(p, 0.5, 0.25));
  EXPECT_EQ(kind_of([&] { trace_characteristic(p, 0.5, 0.75); }), ErrorKind::NotOnDirichletBoundary);
}

TEST(CurveBound, ZeroResidual) {
  const auto p = transport("1", "1", "1", "0", kUnit, {{Edge::Left}, {Edge::Bottom}});
  EXPECT_EQ(curve_bound(p, trace_characteristic(p, 0.6, 0.4)), 0.0);
}

TEST(CurveBound, ConstantCoefficients) {
  const double c0 = 2.0;
  const double R = 0.3;
  const auto p = transport("1", "0", "2", "0.3", kUnit, {{Edge::Left}});
  const auto curve = trace_characteristic(p, 0.8, 0.5, 1e-4);
  const double want = R / c0 * (1 - std::exp(-c0 * curve.s_star));
  EXPECT_NEAR(curve_bound(p, curve, false), want, 1e-8 * want);
}

TEST(CurveBound, DominatedByConstantBoundWhenCPositive) {
  const auto pc = oracle::make_const_case(1e-2).pde;
  const auto rep = constant_bound(pc, 128, 128);
  for (double x : {-0.5, 0.0, 0.7}) {
    for (double y : {-0.3, 0.4, 0.9}) {
      const auto curve = trace_characteristic(pc, x, y);
      double along = 0.0;
      for (std::size_t i = 0; i < curve.size(); ++i) {
        along = std::max(along, std::abs(pc.residual.at(curve.x[i], curve.y[i]) / pc.coef_c(curve.x[i], curve.y[i])));
      }
      EXPECT_LE(curve_bound(pc, curve, false), along * (1 + 1e-6) + 1e-12);
      EXPECT_LE(along, rep.bound * (1 + 1e-2));
    }
  }
}

TEST(CurveBound, SpiralManufacturedSolutionContained) {
  const auto sc = oracle::make_spiral_case(1e-2);
  for (double x : {-0.8, -0.3, 0.25, 0.6}) {
    for (double y : {-0.7, 0.15, 0.55}) {
      const double eta = std::abs(sc.perturbation.eval(Bindings::at_xy(x, y)));
      EXPECT_LE(eta, characteristic_bounds(sc.pde, {{x, y}}).front() + 1e-15) << x << "," << y;
    }
  }
}
