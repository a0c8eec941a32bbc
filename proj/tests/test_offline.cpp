#include <gtest/gtest.h>

#include "dralloc/error.hpp"
#include "dralloc/instance.hpp"
#include "dralloc/offline.hpp"

using namespace dralloc;

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

Instance single(Expr f, std::vector<std::vector<CoordId>> blocks, std::vector<CoordId> coords) {
  Instance t;
  t.coords = std::move(coords);
  for (std::size_t j = 0; j < blocks.size(); ++j) t.arrivals.push_back({j, blocks[j]});
  t.valuation = std::move(f);
  return t;
}

void expect_feasible(const Instance& inst, const OptEstimate& e) {
  for (double v : e.x_star) EXPECT_GE(v, 0.0);
  for (const auto& a : inst.arrivals) {
    double s = 0.0;
    for (CoordId c : a.options) s += e.x_star[c];
    EXPECT_LE(s, 1.0 + 1e-12);
  }
  EXPECT_NEAR(eval(inst.valuation, e.x_star), e.lower_bound, 1e-12);
}

}  // namespace

TEST(FrankWolfe, TwoAgentTie) {
  const Instance t = generate("two_agent_tie", {}, 0);
  const OptEstimate e = frank_wolfe(t);
  EXPECT_GE(e.lower_bound, 2.0 - 1e-3);
  EXPECT_LE(e.lower_bound, 2.0 + 1e-12);
  expect_feasible(t, e);
}

TEST(FrankWolfe, Triangular) {
  const Instance t = generate("triangular", {.n = 5}, 0);
  const OptEstimate e = frank_wolfe(t);
  EXPECT_GE(e.lower_bound, 5.0 - 1e-2);
  expect_feasible(t, e);
}

TEST(FrankWolfe, EmptyInstance) {
  const OptEstimate e = frank_wolfe(Instance{});
  EXPECT_EQ(e.lower_bound, 0.0);
  EXPECT_TRUE(e.converged);
}

TEST(FrankWolfe, BelowGridOnSmallFamilies) {
  for (const auto& fam : families()) {
    const Instance t = generate(fam, {.n = 3, .m = 3, .k = 2}, 2);
    std::size_t options = 0;
    for (const auto& a : t.arrivals) options += a.options.size();
    if (options > 6) continue;
    const OptEstimate e = frank_wolfe(t);
    expect_feasible(t, e);
    // The grid optimum is itself a lower bound; FW should reach it closely.
    EXPECT_GE(e.lower_bound, grid_brute_force(t, 0.25) - 1e-3) << fam;
  }
}

TEST(FrankWolfe, BadParams) { EXPECT_THROW(frank_wolfe(Instance{}, 0), Error); }

TEST(GridBruteForce, Examples) {
  const Instance one = single(Expr::budget_additive(make_row({{0, 1.0}}), 1.0), {{0}}, {0});
  EXPECT_DOUBLE_EQ(grid_brute_force(one, 0.1), 1.0);
  EXPECT_DOUBLE_EQ(grid_brute_force(generate("two_agent_tie", {}, 0), 0.05), 2.0);
  // Linear: every block picks its largest weight.
  const Instance lin = single(Expr::linear(make_row({{0, 1.0}, {1, 3.0}, {2, 2.0}, {3, 0.5}})), {{0, 1}, {2, 3}},
                              {0, 1, 2, 3});
  EXPECT_DOUBLE_EQ(grid_brute_force(lin, 0.25), 5.0);
  EXPECT_NEAR(frank_wolfe(lin).lower_bound, 5.0, 1e-12);
}

TEST(GridBruteForce, Limits) {
  EXPECT_EQ(code_of([] { grid_brute_force(generate("two_agent_tie", {}, 0), 0.3); }), ErrorCode::BadParams);
  EXPECT_EQ(code_of([] { grid_brute_force(generate("triangular", {.n = 4}, 0), 0.25); }),
            ErrorCode::DimensionTooLarge);
}
