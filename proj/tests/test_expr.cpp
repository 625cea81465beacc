#include <cmath>
#include <random>
#include <string>

#include <gtest/gtest.h>

#include "resbound/error.hpp"
#include "resbound/expr.hpp"

using resbound::Bindings;
using resbound::Error;
using resbound::ErrorKind;
using resbound::Expression;
using resbound::Var;

namespace {

double at_t(const std::string& text, double t) { return Expression::parse(text).eval(Bindings::at_t(t)); }

ErrorKind kind_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.kind();
  }
  ADD_FAILURE() << "no error raised";
  return ErrorKind::SchemaError;
}

}  // namespace

TEST(Parse, PolynomialEvaluates) { EXPECT_DOUBLE_EQ(at_t("2*t^2+8*t+7", 1.0), 17.0); }

TEST(Parse, SinOfZero) { EXPECT_EQ(at_t("sin(0)", 0.0), 0.0); }

TEST(Parse, DanglingOperatorReportsOffset) {
  try {
    Expression::parse("2*+t");
    FAIL() << "parsed";
  } catch (const resbound::SyntaxError& e) {
    EXPECT_EQ(e.kind(), ErrorKind::SyntaxError);
    EXPECT_EQ(e.offset(), 2u);
  }
}

TEST(Parse, PrecedenceAndAssociativity) {
  EXPECT_DOUBLE_EQ(at_t("2^3^2", 0.0), 512.0);
  EXPECT_DOUBLE_EQ(at_t("-2^2", 0.0), -4.0);
  EXPECT_DOUBLE_EQ(at_t("8/4/2", 0.0), 1.0);
  EXPECT_DOUBLE_EQ(at_t("1-2-3", 0.0), -4.0);
  EXPECT_DOUBLE_EQ(at_t("1.5e2 + 2E-1", 0.0), 150.2);
}

TEST(Parse, FunctionsAndConstants) {
  EXPECT_NEAR(at_t("exp(1)", 0.0), std::exp(1.0), 1e-15);
  EXPECT_NEAR(at_t("ln(t)", 2.0), std::log(2.0), 1e-15);
  EXPECT_NEAR(at_t("cos(3.141592653589793)", 0.0), -1.0, 1e-15);
  EXPECT_NEAR(at_t("abs(-3)", 0.0), 3.0, 0.0);
  EXPECT_NEAR(Expression::parse("atan2(y, x)").eval(Bindings::at_xy(1.0, 1.0)), std::atan2(1.0, 1.0), 1e-15);
}

TEST(Parse, Errors) {
  EXPECT_EQ(kind_of([] { Expression::parse("foo(t)"); }), ErrorKind::UnknownIdentifier);
  EXPECT_EQ(kind_of([] { Expression::parse("sin(t"); }), ErrorKind::SyntaxError);
  EXPECT_EQ(kind_of([] { Expression::parse(""); }), ErrorKind::SyntaxError);
  EXPECT_EQ(kind_of([] { Expression::parse("t t"); }), ErrorKind::SyntaxError);
  EXPECT_EQ(kind_of([] { Expression::parse("x").eval(Bindings::at_t(1.0)); }), ErrorKind::UnboundVariable);
}

TEST(Parse, RoundTripThroughText) {
  for (const char* text : {"2*t^2+8*t+7", "-(t-1)/(t+2)", "exp(-t)*sin(3*t+0.1)", "x^2-y^2+2", "1e-300*t"}) {
    const Expression e = Expression::parse(text);
    const Expression back = Expression::parse(e.to_string());
    EXPECT_EQ(back.to_string(), e.to_string()) << text;
    const auto at = Bindings::at_t(0.37).set(Var::x, 0.2).set(Var::y, -0.4);
    EXPECT_EQ(back.eval(at), e.eval(at)) << text;
  }
}

TEST(EvalDual, PolynomialDerivatives) {
  const auto d = Expression::parse("t^2+t+1").eval_dual(Var::t, Bindings::at_t(2.0), 2);
  EXPECT_DOUBLE_EQ(d.value, 7.0);
  ASSERT_EQ(d.derivatives.size(), 2u);
  EXPECT_DOUBLE_EQ(d.derivatives[0], 5.0);
  EXPECT_DOUBLE_EQ(d.derivatives[1], 2.0);
}

TEST(EvalDual, ExpDerivatives) {
  const auto d = Expression::parse("exp(t)").eval_dual(Var::t, Bindings::at_t(0.0), 3);
  EXPECT_DOUBLE_EQ(d.value, 1.0);
  for (double v : d.derivatives) EXPECT_DOUBLE_EQ(v, 1.0);
}

TEST(EvalDual, LogAtZeroIsDomainError) {
  EXPECT_EQ(kind_of([] { Expression::parse("ln(t)").eval_dual(Var::t, Bindings::at_t(0.0), 1); }),
            ErrorKind::DomainError);
}

TEST(EvalDual, OrderAboveFourRejected) {
  EXPECT_EQ(kind_of([] { Expression::parse("t").eval_dual(Var::t, Bindings::at_t(0.0), 5); }),
            ErrorKind::DomainError);
}

TEST(EvalDual, PartialDerivativesInTwoVariables) {
  const Expression e = Expression::parse("x^2*y + sin(x*y)");
  const auto at = Bindings::at_xy(0.3, -0.7);
  const auto dx = e.eval_dual(Var::x, at, 1);
  const auto dy = e.eval_dual(Var::y, at, 1);
  EXPECT_NEAR(dx.derivatives[0], 2 * 0.3 * -0.7 + -0.7 * std::cos(0.3 * -0.7), 1e-14);
  EXPECT_NEAR(dy.derivatives[0], 0.09 + 0.3 * std::cos(0.3 * -0.7), 1e-14);
}

// Random expression trees against central differences.
TEST(EvalDual, MatchesFiniteDifferencesOnRandomExpressions) {
  std::mt19937_64 rng(7);
  std::uniform_int_distribution<int> pick(0, 7);
  std::uniform_real_distribution<double> coef(0.5, 2.0);
  auto leaf = [&] { return pick(rng) % 2 ? std::string("t") : resbound::format_number(coef(rng)); };
  std::function<std::string(int)> gen = [&](int depth) -> std::string {
    if (depth == 0) return leaf();
    switch (pick(rng)) {
      case 0: return "(" + gen(depth - 1) + "+" + gen(depth - 1) + ")";
      case 1: return "(" + gen(depth - 1) + "-" + gen(depth - 1) + ")";
      case 2: return "(" + gen(depth - 1) + "*" + gen(depth - 1) + ")";
      case 3: return "sin(" + gen(depth - 1) + ")";
      case 4: return "cos(" + gen(depth - 1) + ")";
      case 5: return "exp(0.3*" + gen(depth - 1) + ")";
      case 6: return "(" + gen(depth - 1) + ")^2";
      default: return "(" + gen(depth - 1) + ")/(2+sin(" + gen(depth - 1) + "))";
    }
  };
  for (int trial = 0; trial < 200; ++trial) {
    const Expression e = Expression::parse(gen(3));
    const double t = 0.1 + 0.8 * (trial % 10) / 10.0;
    const double h = 1e-5;
    const auto d = e.eval_dual(Var::t, Bindings::at_t(t), 2);
    const double f0 = e.eval(Bindings::at_t(t));
    const double fp = e.eval(Bindings::at_t(t + h));
    const double fm = e.eval(Bindings::at_t(t - h));
    const double d1 = (fp - fm) / (2 * h);
    EXPECT_NEAR(d.value, f0, 1e-14 * std::max(1.0, std::abs(f0))) << e.to_string();
    EXPECT_NEAR(d.derivatives[0], d1, 1e-6 * std::max(1.0, std::abs(d1))) << e.to_string();
    const double h2 = 1e-3;
    const double d2 = (e.eval(Bindings::at_t(t + h2)) - 2 * f0 + e.eval(Bindings::at_t(t - h2))) / (h2 * h2);
    EXPECT_NEAR(d.derivatives[1], d2, 1e-4 * std::max(1.0, std::abs(d2))) << e.to_string();
  }
}
