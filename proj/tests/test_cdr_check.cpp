#include <cmath>

#include <gtest/gtest.h>

#include "dralloc/cdr_check.hpp"
#include "dralloc/error.hpp"
#include "fixtures.hpp"

using namespace dralloc;

namespace {

DifferentiableFn raw(std::function<double(std::span<const double>)> v, std::function<Vec(std::span<const double>)> g) {
  return {1, std::move(v), std::move(g)};
}

}  // namespace

TEST(CdrCheck, BudgetAdditivePasses) {
  const Expr f = Expr::budget_additive(dralloc::testing::row({1, 1}), 1.0);
  const CdrReport r = check_cdr(f, 2, PointSampler{}, 1000, 1e-6);
  EXPECT_TRUE(r.passed());
  EXPECT_EQ(r.samples, 1000u);
  EXPECT_GT(r.fd_checked, 0u);
  EXPECT_NO_THROW(require_cdr(r));
}

TEST(CdrCheck, EveryNodeKindAndClosurePasses) {
  auto all = dralloc::testing::node_zoo();
  for (auto& z : dralloc::testing::closure_zoo()) all.push_back(z);
  for (const auto& z : all) {
    const CdrReport r = check_cdr(z.f, z.dim, PointSampler{.seed = 3}, 300, 1e-6);
    EXPECT_TRUE(r.passed()) << z.name << ": " << (r.violation ? to_string(r.violation->property) : "");
    EXPECT_LT(r.max_fd_rel_error, 1e-5) << z.name;
  }
}

TEST(CdrCheck, SquareIsRejected) {
  const auto sq = raw([](std::span<const double> x) { return x[0] * x[0]; },
                      [](std::span<const double> x) { return Vec{2 * x[0]}; });
  const CdrReport r = check_cdr(sq, PointSampler{}, 200, 1e-6);
  ASSERT_FALSE(r.passed());
  EXPECT_TRUE(r.violation->property == CdrProperty::DiminishingReturns ||
              r.violation->property == CdrProperty::Concavity);
  try {
    require_cdr(r);
    FAIL() << "expected PropertyViolation";
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::PropertyViolation);
  }
}

TEST(CdrCheck, OtherViolations) {
  const auto offset = raw([](std::span<const double> x) { return 1.0 + x[0]; },
                          [](std::span<const double>) { return Vec{1.0}; });
  EXPECT_EQ(check_cdr(offset, PointSampler{}, 50, 1e-6).violation->property, CdrProperty::ZeroAtOrigin);

  const auto decreasing = raw([](std::span<const double> x) { return -x[0]; },
                              [](std::span<const double>) { return Vec{-1.0}; });
  EXPECT_EQ(check_cdr(decreasing, PointSampler{}, 50, 1e-6).violation->property, CdrProperty::Monotone);

  const auto wrong_grad = raw([](std::span<const double> x) { return 2.0 * x[0]; },
                              [](std::span<const double>) { return Vec{1.0}; });
  EXPECT_EQ(check_cdr(wrong_grad, PointSampler{}, 50, 1e-6).violation->property, CdrProperty::GradientMismatch);
}

TEST(CdrCheck, ArityMismatch) {
  const Expr f = Expr::linear(dralloc::testing::row({1, 1, 1}));
  EXPECT_THROW(check_cdr(f, 2, PointSampler{}, 10, 1e-6), Error);
}

TEST(CdrCheck, Deterministic) {
  const Expr f = dralloc::testing::closure_zoo()[1].f;
  const CdrReport a = check_cdr(f, 3, PointSampler{.seed = 9}, 100, 1e-6);
  const CdrReport b = check_cdr(f, 3, PointSampler{.seed = 9}, 100, 1e-6);
  EXPECT_EQ(a.fd_checked, b.fd_checked);
  EXPECT_EQ(a.kinks_skipped, b.kinks_skipped);
  EXPECT_EQ(a.max_fd_rel_error, b.max_fd_rel_error);
}
