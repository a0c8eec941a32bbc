#include <algorithm>
#include <random>

#include <gtest/gtest.h>

#include "dralloc/arrival_kernel.hpp"
#include "dralloc/instance.hpp"
#include "dralloc/transform.hpp"

using namespace dralloc;

namespace {

// Walks arrivals in order, revealing each and bumping its options at random,
// and compares the kernel against the generic transform at every stop.
void cross_check(const Instance& inst, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const QuadratureScheme scheme{129, 1e-6};
  Vec x(inst.dim(), 0.0);
  std::vector<CoordId> revealed;
  for (const auto& arr : inst.arrivals) {
    revealed.insert(revealed.end(), arr.options.begin(), arr.options.end());
    std::sort(revealed.begin(), revealed.end());
    const Expr fr = restrict(inst.valuation, revealed);
    const UTransform T(fr, scheme);
    ArrivalKernel k(fr, arr.options, x, scheme);
    ASSERT_EQ(k.size(), arr.options.size());
    for (int step = 0; step < 12; ++step) {
      Vec ku, kf, ku_serial;
      k.u_grad(ku);
      k.u_grad(ku_serial, false);
      k.f_grad(kf);
      EXPECT_EQ(ku, ku_serial);
      const Vec gu = u_grad(T, x);
      const Vec gf = grad(fr, x);
      for (std::size_t s = 0; s < arr.options.size(); ++s) {
        const CoordId c = arr.options[s];
        EXPECT_NEAR(ku[s], gu[c], 1e-7 * std::max(1.0, std::abs(gu[c]))) << inst.meta.family << " coord " << c;
        EXPECT_NEAR(kf[s], gf[c], 1e-12 * std::max(1.0, std::abs(gf[c]))) << inst.meta.family << " coord " << c;
      }
      const std::size_t slot = rng() % arr.options.size();
      const double amount = 0.01 * static_cast<double>(1 + rng() % 8);
      k.bump(slot, amount);
      x[arr.options[slot]] += amount;
    }
  }
}

}  // namespace

TEST(ArrivalKernel, MatchesGenericTransformOnEveryFamily) {
  for (const auto& fam : families())
    for (std::uint64_t seed : {0u, 1u}) cross_check(generate(fam, {.n = 4, .m = 4, .k = 2}, seed), seed);
}

TEST(ArrivalKernel, ConcaveReturnsKinds) {
  for (const char* kind : {"cap", "log1p", "exp_sat", "pwl"})
    cross_check(generate("concave_returns", {.n = 3, .m = 4, .kind = kind}, 7), 7);
}

TEST(ArrivalKernel, MoveKeepsState) {
  const Instance inst = generate("two_agent_tie", {}, 0);
  const std::vector<CoordId> rev{0, 1};
  const Expr fr = restrict(inst.valuation, rev);
  const Vec x(inst.dim(), 0.0);
  ArrivalKernel a(fr, inst.arrivals[0].options, x, {});
  a.bump(0, 0.25);
  ArrivalKernel b = std::move(a);
  Vec g;
  b.u_grad(g);
  const Vec ref = u_grad(UTransform(fr), Vec{0.25, 0, 0});
  EXPECT_NEAR(g[0], ref[0], 1e-9);
  EXPECT_NEAR(g[1], ref[1], 1e-9);
}
