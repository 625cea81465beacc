#include <cmath>

#include <gtest/gtest.h>

#include "resbound/oracle/catalog.hpp"
#include "resbound/oracle/integrators.hpp"
#include "resbound/oracle/verify.hpp"

using namespace resbound;
using namespace resbound::oracle;

namespace {

Rhs duffing(double eps) {
  return [eps](double t, std::span<const double> y, std::span<double> dy) {
    dy[0] = y[1];
    dy[1] = std::cos(t) - 3 * y[1] - 2 * y[0] - eps * y[0] * y[0] * y[0];
  };
}

double duffing_linear(double t) {
  return 2.5 * std::exp(-t) - 1.6 * std::exp(-2 * t) + 0.1 * std::cos(t) + 0.3 * std::sin(t);
}

}  // namespace

TEST(Rk4, Exponential) {
  const auto ys = rk4_solve([](double, std::span<const double> y, std::span<double> dy) { dy[0] = y[0]; }, {1.0},
                            Grid(1.0, 10000));
  EXPECT_NEAR(ys.back()[0], std::exp(1.0), 1e-10);
}

TEST(Rk4, ConstantTrajectory) {
  const auto ys = rk4_solve([](double, std::span<const double>, std::span<double> dy) { dy[0] = 0.0; }, {3.25},
                            Grid(2.0, 17));
  for (const auto& y : ys) EXPECT_EQ(y[0], 3.25);
}

TEST(Rkf45, Decay) {
  const auto sol = rkf45_solve([](double, std::span<const double> y, std::span<double> dy) { dy[0] = -y[0]; }, {1.0},
                               0.0, 2.0, 1e-10);
  for (double t = 0.0; t <= 2.0; t += 0.05) EXPECT_NEAR(sol.at(t)[0], std::exp(-t), 1e-9);
}

TEST(Rkf45, DuffingAtZeroEpsMatchesClosedForm) {
  const auto sol = rkf45_solve(duffing(0.0), {1.0, 1.0}, 0.0, 2.0, 1e-10);
  for (double t = 0.0; t <= 2.0; t += 0.01) EXPECT_NEAR(sol.at(t)[0], duffing_linear(t), 1e-7);
}

TEST(Rkf45, NonlinearityActive) {
  const auto plus = rkf45_solve(duffing(0.5), {1.0, 1.0}, 0.0, 2.0, 1e-10);
  const auto minus = rkf45_solve(duffing(-0.5), {1.0, 1.0}, 0.0, 2.0, 1e-10);
  EXPECT_GT(std::abs(plus.at(1.0)[0] - minus.at(1.0)[0]), 1e-3);
}

TEST(Rkf45, LandsOnStopTimes) {
  const std::vector<double> stops{0.3, 0.77, 1.5};
  const auto sol = rkf45_solve(duffing(0.25), {1.0, 1.0}, 0.0, 2.0, 1e-8, stops);
  for (double s : stops) {
    EXPECT_TRUE(std::find(sol.times().begin(), sol.times().end(), s) != sol.times().end()) << s;
  }
}

TEST(Rkf45, ToleranceRange) {
  const Rhs zero = [](double, std::span<const double>, std::span<double> dy) { dy[0] = 0.0; };
  EXPECT_THROW(rkf45_solve(zero, {1.0}, 0.0, 1.0, 1e-13), Error);
  EXPECT_THROW(rkf45_solve(zero, {1.0}, 0.0, 1.0, 1e-3), Error);
}

TEST(Catalog, HasTheSevenCases) {
  const auto all = catalog();
  ASSERT_EQ(all.size(), 7u);
  for (std::size_t i = 0; i < all.size(); ++i) EXPECT_EQ(all[i].id, case_ids()[i]);
  EXPECT_THROW(make_case("ODE-Z"), Error);
}

TEST(Catalog, OdeSurrogatesKeepInitialConditions) {
  for (const char* id : {"ODE-A", "ODE-B", "ODE-C"}) {
    const auto c = std::get<OdeCase>(make_case(id).definition);
    const auto d = c.perturbation.eval_dual(Var::t, Bindings::at_t(0.0), static_cast<int>(c.coefficients.size()) - 1);
    EXPECT_NEAR(d.value, 0.0, 1e-10) << id;
    for (double v : d.derivatives) EXPECT_NEAR(v, 0.0, 1e-10) << id;
  }
}

TEST(Catalog, SystemSurrogatesKeepInitialConditions) {
  const auto c = make_system_case(kDefaultSeed, 1e-2);
  for (const auto& p : c.perturbation) EXPECT_NEAR(p.eval(Bindings::at_t(0.0)), 0.0, 1e-10);
}

TEST(Catalog, PdeSurrogatesVanishOnGamma) {
  for (const char* id : {"PDE-SPIRAL", "PDE-CONST"}) {
    const auto c = std::get<PdeCase>(make_case(id).definition);
    for (const auto& seg : c.pde.gamma) {
      for (double s = -1.0; s <= 1.0; s += 0.125) {
        const auto& d = c.pde.domain;
        double x = s, y = s;
        switch (seg.edge) {
          case Edge::Left: x = d.x_min; break;
          case Edge::Right: x = d.x_max; break;
          case Edge::Bottom: y = d.y_min; break;
          case Edge::Top: y = d.y_max; break;
        }
        EXPECT_NEAR(c.perturbation.eval(Bindings::at_xy(x, y)), 0.0, 1e-10) << id;
      }
    }
  }
}

// Residuals recomputed from the surrogate by finite differences.
TEST(Catalog, ResidualsMatchFiniteDifferences) {
  for (const char* id : {"ODE-A", "ODE-B", "ODE-C"}) {
    const auto c = std::get<OdeCase>(make_case(id).definition);
    const auto p = c.problem(100);
    const Expression u = c.surrogate();
    const double h = 1e-4;
    for (double t = 0.1; t < 0.95; t += 0.1) {
      auto f = [&](double s) { return u.eval(Bindings::at_t(s)); };
      const double d1 = (f(t + h) - f(t - h)) / (2 * h);
      const double d2 = (f(t + h) - 2 * f(t) + f(t - h)) / (h * h);
      const double fd = d2 + c.coefficients[1] * d1 + c.coefficients[0] * f(t) - c.forcing.eval(Bindings::at_t(t));
      EXPECT_NEAR(fd, p.residual.at(t), 1e-6) << id << " t=" << t;
    }
  }
  for (const char* id : {"PDE-SPIRAL", "PDE-CONST"}) {
    const auto c = std::get<PdeCase>(make_case(id).definition);
    const Expression u = c.surrogate();
    const double h = 1e-5;
    for (double x : {-0.6, 0.1, 0.8}) {
      for (double y : {-0.4, 0.3}) {
        auto f = [&](double a, double b) { return u.eval(Bindings::at_xy(a, b)); };
        const double ux = (f(x + h, y) - f(x - h, y)) / (2 * h);
        const double uy = (f(x, y + h) - f(x, y - h)) / (2 * h);
        const auto at = Bindings::at_xy(x, y);
        const double fd = c.pde.a.eval(at) * ux + c.pde.b.eval(at) * uy + c.pde.c.eval(at) * f(x, y) - c.pde.f.eval(at);
        EXPECT_NEAR(fd, c.pde.residual.at(x, y), 1e-6) << id;
      }
    }
  }
}

TEST(ExactError, Examples) {
  const auto a = std::get<OdeCase>(make_case("ODE-A").definition);
  EXPECT_NEAR(exact_error(a, 1.0), 0.01 * std::exp(-1.0), 1e-15);
  const auto zero = std::get<OdeCase>(make_case("ODE-B", kDefaultSeed, 0.0).definition);
  EXPECT_EQ(exact_error(zero, 0.6), 0.0);
  const auto pde = std::get<PdeCase>(make_case("PDE-CONST", kDefaultSeed, 0.0).definition);
  EXPECT_EQ(exact_error(pde, 0.2, 0.3), 0.0);
}

// Integrating the perturbed system from the exact initial state recovers
// u - v = eta at every node.
TEST(ExactError, SystemMatchesRk4Reconstruction) {
  const auto c = make_system_case(kDefaultSeed, 1e-2);
  const auto p = c.problem(100);
  const std::size_t n = c.exact.size();
  const auto f = system_forcing_from_exact(c.A, c.exact);
  oracle::State y0(n);
  for (std::size_t i = 0; i < n; ++i) y0[i] = c.surrogate()[i].eval(Bindings::at_t(0.0));
  // v' + A v = f; the surrogate solves it with forcing f + r
  const Grid g(1.0, 4000);
  const auto ys = rk4_solve(
      [&](double t, std::span<const double> y, std::span<double> dy) {
        for (std::size_t i = 0; i < n; ++i) {
          double s = f[i](t) + p.residual[i].at(t);
          for (std::size_t j = 0; j < n; ++j) s -= c.A(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) * y[j];
          dy[i] = s;
        }
      },
      y0, g);
  for (std::size_t k = 0; k < g.size(); k += 400) {
    const auto eta = exact_error(c, g.node(k));
    for (std::size_t i = 0; i < n; ++i) {
      EXPECT_NEAR(ys[k][i] - c.exact[i].eval(Bindings::at_t(g.node(k))), eta[i], 1e-8);
    }
  }
}

// Polynomial fits stand in for trained networks: residuals are nonzero but
// the certified error of each component is tiny next to the component.
TEST(Duffing, FittedComponentsAreAccurate) {
  const auto dc = make_duffing_case(0.0);
  ASSERT_EQ(dc.order(), 6);
  const auto b = component_bounds(dc.problem(2000));
  for (std::size_t j = 0; j < b.u.size(); ++j) {
    EXPECT_GT(max_abs(b.residual[j]), 0.0) << j;
    EXPECT_LT(max_abs(b.bound[j]), 1e-3 * max_abs(b.u[j])) << j;
  }
}

TEST(Duffing, ZeroEpsReconstructionWithinLinearBound) {
  const auto dc = make_duffing_case(0.0);
  const auto b = component_bounds(dc.problem(2000));
  for (std::size_t k = 0; k < b.grid.size(); k += 100) {
    const double t = b.grid.node(k);
    EXPECT_LE(std::abs(dc.components[0].eval(Bindings::at_t(t)) - duffing_linear(t)), b.bound[0][k] + 1e-12) << t;
  }
}

TEST(Verify, EveryCatalogCasePasses) {
  VerifyOptions opt;
  for (const auto& id : case_ids()) {
    if (id == "DUFF") continue;  // covered by the acceptance run
    for (const auto& row : verify_case(make_case(id), opt)) EXPECT_TRUE(row.pass) << id << " " << row.method;
  }
}

TEST(Verify, ZeroPerturbationIsExact) {
  VerifyOptions opt;
  opt.scale = 0.0;
  for (const char* id : {"ODE-A", "SYS-6", "PDE-CONST"}) {
    for (const auto& row : verify_case(make_case(id, kDefaultSeed, 0.0), opt)) {
      EXPECT_TRUE(row.pass);
      if (!std::isnan(row.max_error)) {
        EXPECT_EQ(row.max_error, 0.0);
      }
    }
  }
}
