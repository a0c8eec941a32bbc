#include <cmath>

#include <gtest/gtest.h>

#include "dralloc/error.hpp"
#include "dralloc/expr.hpp"
#include "dralloc/expr_json.hpp"
#include "fixtures.hpp"

using namespace dralloc;
using dralloc::testing::row;

namespace {

ErrorCode code_of(auto&& fn) {
  try {
    fn();
  } catch (const Error& e) {
    return e.code();
  }
  ADD_FAILURE() << "no error thrown";
  return ErrorCode::BadParams;
}

const Expr kBA = Expr::budget_additive(row({1, 1}), 1.0);

}  // namespace

TEST(Expr, LinearValueAndGradient) {
  const Expr f = Expr::linear(row({2, 3}));
  EXPECT_DOUBLE_EQ(eval(f, Vec{1, 0.5}), 3.5);
  EXPECT_EQ(grad(f, Vec{4, 9}), (Vec{2, 3}));
  EXPECT_EQ(f.arity(), 2u);
  EXPECT_DOUBLE_EQ(f.gradient_bound(), 3.0);
}

TEST(Expr, BudgetAdditive) {
  EXPECT_DOUBLE_EQ(eval(kBA, Vec{0.7, 0.6}), 1.0);
  EXPECT_EQ(grad(kBA, Vec{0.7, 0.6}), (Vec{0, 0}));
  EXPECT_EQ(grad(kBA, Vec{0.2, 0.3}), (Vec{1, 1}));
  // Exactly at the budget the right-derivative is already 0.
  EXPECT_EQ(grad(kBA, Vec{0.5, 0.5}), (Vec{0, 0}));
}

TEST(Expr, ConcaveScalarLog1p) {
  const Expr f = Expr::concave_scalar(ScalarConcave::log1p(1.0), Expr::linear(row({1})));
  EXPECT_NEAR(eval(f, Vec{1.0}), std::log(2.0), 1e-15);
  EXPECT_NEAR(grad(f, Vec{1.0})[0], 0.5, 1e-15);
}

TEST(Expr, ComposeChainRule) {
  const Expr f = Expr::compose(Expr::linear(row({1, 2})), {Expr::linear(row({1, 0})), Expr::linear(row({0, 3}))});
  for (const Vec& x : {Vec{0, 0}, Vec{0.3, 1.7}, Vec{5, 2}}) EXPECT_EQ(grad(f, x), (Vec{1, 6}));
  EXPECT_DOUBLE_EQ(eval(f, Vec{1, 1}), 7.0);
}

TEST(Expr, LinTransformAndSum) {
  const Expr f = Expr::lin_transform({row({1, 1}), row({0, 2})}, Expr::sum({{1.0, Expr::budget_additive(row({1}), 1.0)},
                                                                            {0.5, Expr::linear(row({0, 1}))}}));
  // y = (0.3 + 0.4, 0.8); f = min(0.7, 1) + 0.5 * 0.8
  EXPECT_NEAR(eval(f, Vec{0.3, 0.4}), 1.1, 1e-15);
  EXPECT_EQ(grad(f, Vec{0.3, 0.4}), (Vec{1.0, 2.0}));
  EXPECT_EQ(grad(f, Vec{0.8, 0.4}), (Vec{0.0, 1.0}));
}

TEST(Expr, Polymatroid) {
  const Expr f = Expr::polymatroid(RankOracle::cardinality_cap(1.0), row({1, 1}));
  EXPECT_NEAR(eval(f, Vec{0.3, 0.4}), 0.7, 1e-15);
  EXPECT_DOUBLE_EQ(eval(f, Vec{0.6, 0.7}), 1.0);
  EXPECT_EQ(grad(f, Vec{0.3, 0.4}), (Vec{1, 1}));
  EXPECT_EQ(grad(f, Vec{0.6, 0.7}), (Vec{0, 0}));
  // Scale enters as z_i = w_i x_c.
  const Expr g = Expr::polymatroid(RankOracle::cardinality_cap(5.0), row({2, 0.5}));
  EXPECT_DOUBLE_EQ(eval(g, Vec{0.25, 1}), 1.0);
  EXPECT_EQ(grad(g, Vec{0.25, 1}), (Vec{2, 0.5}));
  // Singletons have rank 1, so z_0 = 2 saturates.
  EXPECT_DOUBLE_EQ(eval(g, Vec{1, 1}), 1.5);
  EXPECT_EQ(grad(g, Vec{1, 1}), (Vec{0, 0.5}));
}

TEST(Expr, Restrict) {
  const Expr lin = Expr::linear(row({2, 3}));
  const std::vector<CoordId> keep1{1};
  EXPECT_DOUBLE_EQ(eval(restrict(lin, keep1), Vec{5, 7}), 21.0);
  const std::vector<CoordId> keep0{0};
  EXPECT_DOUBLE_EQ(eval(restrict(lin, keep0), Vec{5, 7}), 10.0);
  EXPECT_DOUBLE_EQ(eval(restrict(lin, std::span<const CoordId>{}), Vec{5, 7}), 0.0);
  EXPECT_DOUBLE_EQ(eval(restrict(kBA, keep0), Vec{2, 9}), 1.0);
  for (const auto& z : dralloc::testing::closure_zoo()) {
    const Vec x{0.4, 0.9, 0.3};
    const Vec masked{0.4, 0.0, 0.3};
    const std::vector<CoordId> keep{0, 2};
    EXPECT_NEAR(eval(restrict(z.f, keep), x), eval(z.f, masked), 1e-14) << z.name;
  }
}

TEST(Expr, ShortInputReadsAsZero) {
  const Expr f = Expr::linear(row({2, 3}));
  EXPECT_DOUBLE_EQ(eval(f, Vec{1}), 2.0);
  EXPECT_EQ(support(f), (std::vector<CoordId>{0, 1}));
}

TEST(Expr, ConstructionErrors) {
  EXPECT_EQ(code_of([] { Expr::linear(make_row({{0, -1.0}})); }), ErrorCode::NegativeWeight);
  EXPECT_EQ(code_of([] { Expr::budget_additive(row({1}), -0.5); }), ErrorCode::NegativeWeight);
  EXPECT_EQ(code_of([] { Expr::sum({{-1.0, kBA}}); }), ErrorCode::NegativeWeight);
  // Inner reads 2 coordinates but the map produces only 1.
  EXPECT_EQ(code_of([] { Expr::lin_transform({row({1, 1})}, kBA); }), ErrorCode::ArityMismatch);
  EXPECT_EQ(code_of([] { Expr::compose(kBA, {Expr::linear(row({1}))}); }), ErrorCode::ArityMismatch);
  EXPECT_EQ(code_of([] { eval(kBA, Vec{-0.1, 0}); }), ErrorCode::NegativeInput);
  std::vector<double> big(21, 1.0);
  EXPECT_EQ(code_of([&] { Expr::polymatroid(RankOracle::cardinality_cap(1), row(big)); }),
            ErrorCode::GroundSetTooLarge);
  // Not submodular: r({0,1}) > r({0}) + r({1}).
  EXPECT_EQ(code_of([] { Expr::polymatroid(RankOracle::explicit_table(2, {0, 1, 1, 3}), row({1, 1})); }),
            ErrorCode::BadParams);
}

TEST(ExprJson, RoundTripEveryKind) {
  auto all = dralloc::testing::node_zoo();
  for (auto& z : dralloc::testing::closure_zoo()) all.push_back(z);
  for (const auto& z : all) {
    const nlohmann::json j = to_json(z.f);
    const Expr back = expr_from_json(j);
    EXPECT_TRUE(back == z.f) << z.name;
    const Vec x{0.3, 1.1, 0.7, 0.2};
    EXPECT_EQ(eval(back, x), eval(z.f, x)) << z.name;
  }
}

TEST(ExprJson, Errors) {
  using nlohmann::json;
  EXPECT_EQ(code_of([] { expr_from_json(json{{"kind", "bogus"}}); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { expr_from_json(json{{"kind", "linear"}}); }), ErrorCode::ParseError);
  EXPECT_EQ(code_of([] { expr_from_json(json{{"kind", "linear"}, {"weights", {{"0", -2.0}}}}); }),
            ErrorCode::NegativeWeight);
  EXPECT_EQ(code_of([] { expr_from_json(json{{"kind", "linear"}, {"weights", {{"4", 1.0}}}}, 3); }),
            ErrorCode::UnknownCoord);
  const json pw = {{"kind", "concave_scalar"},
                   {"fn", {{"name", "pow"}, {"params", {0.5}}}},
                   {"inner", {{"kind", "linear"}, {"weights", {{"0", 1.0}}}}}};
  EXPECT_EQ(code_of([&] { expr_from_json(pw); }), ErrorCode::UnboundedGradient);
}
