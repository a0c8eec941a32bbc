#include <cmath>
#include <numbers>
#include <random>

#include <gtest/gtest.h>

#include "dralloc/error.hpp"
#include "dralloc/transform.hpp"
#include "fixtures.hpp"

using namespace dralloc;
using dralloc::testing::min1;
using dralloc::testing::row;

namespace {

constexpr double kE = std::numbers::e;

// Closed forms for f = min(x, 1) with 0 <= x <= 1.
double u_min1(double x) { return (1.0 + x * kE - std::exp(x)) / (kE - 1.0); }
double du_min1(double x) { return (kE - std::exp(x)) / (kE - 1.0); }

std::vector<dralloc::testing::Named> everything() {
  auto all = dralloc::testing::node_zoo();
  for (auto& z : dralloc::testing::closure_zoo()) all.push_back(z);
  return all;
}

}  // namespace

TEST(Transform, SchemeValidation) {
  EXPECT_THROW((QuadratureScheme{32, 1e-6}.validate()), Error);
  EXPECT_THROW((QuadratureScheme{31, 1e-6}.validate()), Error);
  EXPECT_THROW((QuadratureScheme{257, 1e-3}.validate()), Error);
  EXPECT_THROW((QuadratureScheme{257, 0.0}.validate()), Error);
  EXPECT_NO_THROW((QuadratureScheme{33, 1e-4}.validate()));
}

TEST(Transform, GridIntegratesTheWeight) {
  // With f linear the integrand is e^t f(x), so the weights sum to 1.
  const QuadGrid g = make_grid({}, {0.25, 0.5});
  EXPECT_NEAR(pairwise_sum(g.w), 1.0, 1e-10);
}

TEST(Transform, LinearIsFixedPoint) {
  const UTransform T(Expr::linear(row({2, 3})));
  for (const Vec& x : {Vec{1, 0.5}, Vec{0.2, 3}, Vec{0, 0}}) {
    EXPECT_NEAR(u_eval(T, x), 2 * x[0] + 3 * x[1], 1e-8);
    const Vec g = u_grad(T, x);
    EXPECT_NEAR(g[0], 2.0, 1e-8);
    EXPECT_NEAR(g[1], 3.0, 1e-8);
    EXPECT_NEAR(fhat_upper_at_ugrad(T, x), 0.0, 1e-12);
    EXPECT_NEAR(balanced_check(T, x), (2 * x[0] + 3 * x[1]) * (1.0 / kGammaBalanced - 1.0), 1e-7);
  }
}

TEST(Transform, MinOneClosedForms) {
  const UTransform T(min1());
  EXPECT_NEAR(u_eval(T, Vec{0.5}), 0.41345, 1e-5);
  EXPECT_NEAR(u_eval(T, Vec{0.5}), u_min1(0.5), 1e-8);
  EXPECT_NEAR(u_grad(T, Vec{0.5})[0], 0.62246, 1e-5);
  EXPECT_NEAR(u_grad(T, Vec{0.5})[0], du_min1(0.5), 1e-8);
  EXPECT_NEAR(u_grad(T, Vec{0.0})[0], 1.0, 1e-8);
  EXPECT_NEAR(fhat_upper_at_ugrad(T, Vec{0.5}), 0.37754, 1e-5);
  EXPECT_NEAR(fhat_upper_at_ugrad(T, Vec{0.5}), 1.0 - du_min1(0.5), 1e-8);
  EXPECT_EQ(u_eval(T, Vec{0.0}), 0.0);
  EXPECT_EQ(fhat_upper_at_ugrad(T, Vec{0.0}), 0.0);
}

TEST(Transform, BalancedIsTightForMinOne) {
  const UTransform T(min1());
  for (int i = 1; i <= 9; ++i) {
    const double x = 0.1 * i;
    EXPECT_NEAR(u_eval(T, Vec{x}) + fhat_upper_at_ugrad(T, Vec{x}), kE * x / (kE - 1.0), 1e-8);
    EXPECT_NEAR(balanced_check(T, Vec{x}), 0.0, 1e-6) << x;
  }
  EXPECT_EQ(balanced_check(T, Vec{0.0}), 0.0);
  EXPECT_THROW(balanced_check(T, Vec{0.5}, 0.0), Error);
  EXPECT_THROW(balanced_check(T, Vec{0.5}, 1.5), Error);
}

TEST(Transform, NegativeInputRejected) {
  const UTransform T(min1());
  EXPECT_THROW(u_eval(T, Vec{-0.5}), Error);
  EXPECT_THROW(u_grad(T, Vec{NAN}), Error);
}

TEST(Transform, ConjugateHelpers) {
  const Expr m = min1();
  EXPECT_DOUBLE_EQ(fhat_at_fgrad(m, Vec{2.0}), 1.0);
  EXPECT_DOUBLE_EQ(fhat_at_fgrad(m, Vec{0.5}), 0.0);
  EXPECT_DOUBLE_EQ(fhat_at_fgrad(Expr::linear(row({2, 3})), Vec{0.4, 0.1}), 0.0);
  EXPECT_GE(fhat_numeric(m, Vec{0.3}, 10.0), 0.7 - 1e-4);
  EXPECT_LE(fhat_numeric(m, Vec{0.3}, 10.0), 0.7 + 1e-12);
  EXPECT_EQ(fhat_numeric(m, Vec{1.5}, 10.0), 0.0);
  EXPECT_EQ(fhat_numeric(Expr::linear(row({2, 3})), Vec{2, 3}, 10.0), 0.0);
}

TEST(Transform, UpperBoundDominatesNumericConjugate) {
  // fhat_upper >= fhat(grad U) >= any numeric lower bound of it.
  for (const auto& z : everything()) {
    const UTransform T(z.f);
    const Vec x{0.4, 0.8, 0.3, 0.6};
    const Vec xs(x.begin(), x.begin() + static_cast<long>(z.dim));
    const Vec alpha = u_grad(T, xs);
    EXPECT_GE(fhat_upper_at_ugrad(T, xs) + 1e-7, fhat_numeric(z.f, alpha, 20.0)) << z.name;
  }
}

TEST(Transform, SerialAndParallelAreBitIdentical) {
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (const auto& z : everything()) {
    const UTransform T(z.f, {129, 1e-6});
    for (int p = 0; p < 5; ++p) {
      Vec x(z.dim);
      for (double& v : x) v = u(rng);
      EXPECT_EQ(u_eval(T, x), u_eval_serial(T, x)) << z.name;
      EXPECT_EQ(u_grad(T, x), u_grad_serial(T, x)) << z.name;
      EXPECT_EQ(fhat_upper_at_ugrad(T, x), fhat_upper_at_ugrad_serial(T, x)) << z.name;
    }
  }
}

TEST(Transform, UTransformIsCdr) {
  for (const auto& z : everything()) {
    const UTransform T(z.f);
    const CdrReport r = check_cdr(as_function(T, z.dim), PointSampler{.seed = 21}, 60, 1e-6);
    EXPECT_TRUE(r.passed()) << z.name << ": " << (r.violation ? to_string(r.violation->property) : "");
    EXPECT_LT(r.max_fd_rel_error, 1e-5) << z.name;
  }
}

TEST(Transform, BalancedOnRandomPoints) {
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 2.0);
  for (const auto& z : everything()) {
    const UTransform T(z.f);
    for (int p = 0; p < 10; ++p) {
      Vec x(z.dim);
      for (double& v : x) v = u(rng);
      EXPECT_GE(balanced_check(T, x), -1e-5 * (1.0 + eval(z.f, x))) << z.name;
    }
  }
}
