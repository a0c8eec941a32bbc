#pragma once

// Valuations shared by the unit and acceptance tests: one per node kind and
// one per closure operation, all over at most 6 coordinates.

#include <string>
#include <utility>
#include <vector>

#include "dralloc/expr.hpp"

namespace dralloc::testing {

struct Named {
  std::string name;
  Expr f;
  std::size_t dim;
};

inline SparseRow row(std::vector<double> w) {
  std::vector<WeightEntry> e;
  for (std::size_t i = 0; i < w.size(); ++i)
    if (w[i] != 0.0) e.push_back({static_cast<CoordId>(i), w[i]});
  return make_row(std::move(e));
}

inline Expr min1(CoordId c = 0) { return Expr::budget_additive(make_row({{c, 1.0}}), 1.0); }

inline std::vector<Named> node_zoo() {
  std::vector<Named> z;
  z.push_back({"linear", Expr::linear(row({2, 3, 0.5})), 3});
  z.push_back({"budget_additive", Expr::budget_additive(row({1, 1, 0.5}), 1.0), 3});
  z.push_back({"scalar_cap", Expr::concave_scalar(ScalarConcave::cap(1.2), Expr::linear(row({1, 0.5}))), 2});
  z.push_back({"scalar_log1p", Expr::concave_scalar(ScalarConcave::log1p(1.5), Expr::linear(row({1, 2}))), 2});
  z.push_back({"scalar_exp_sat", Expr::concave_scalar(ScalarConcave::exp_sat(0.8), Expr::linear(row({1, 1, 1}))), 3});
  z.push_back({"scalar_pwl", Expr::concave_scalar(ScalarConcave::piecewise_linear({2, 1, 0.25}, {0.5, 1.5}),
                                                  Expr::linear(row({1, 0.7}))),
               2});
  z.push_back({"polymatroid_cap", Expr::polymatroid(RankOracle::cardinality_cap(1.5), row({1, 0.5, 2})), 3});
  z.push_back({"polymatroid_partition",
               Expr::polymatroid(RankOracle::partition({{0, 1}, {2, 3}}, {1, 1.5}), row({1, 1, 1, 1})), 4});
  z.push_back({"polymatroid_coverage",
               Expr::polymatroid(RankOracle::coverage({1, 0.5, 2}, {{0, 1}, {1, 2}, {2}}), row({1, 1, 1})), 3});
  return z;
}

inline std::vector<Named> closure_zoo() {
  std::vector<Named> z;
  // Nonnegative combination.
  z.push_back({"sum", Expr::sum({{1.0, min1(0)}, {0.5, Expr::linear(row({0, 1}))}, {2.0, min1(1)}}), 2});
  // Composition with a linear map.
  z.push_back({"lin_transform",
               Expr::lin_transform({row({1, 1, 0}), row({0, 0.5, 2})},
                                   Expr::sum({{1.0, min1(0)},
                                              {1.0, Expr::concave_scalar(ScalarConcave::log1p(1.0),
                                                                         Expr::linear(make_row({{1, 1.0}})))}})),
               3});
  // Monotone concave outer over CDR inners.
  z.push_back({"compose",
               Expr::compose(Expr::budget_additive(row({1, 1}), 1.5),
                             {Expr::budget_additive(row({1, 1}), 1.0),
                              Expr::concave_scalar(ScalarConcave::exp_sat(1.0), Expr::linear(row({0, 1, 1})))}),
               3});
  z.push_back({"compose_log_outer",
               Expr::compose(Expr::concave_scalar(ScalarConcave::log1p(1.0), Expr::linear(row({1, 2}))),
                             {Expr::budget_additive(row({1, 0, 1}), 1.0), Expr::linear(row({0, 0.5}))}),
               3});
  z.push_back({"nested",
               Expr::sum({{1.0, Expr::polymatroid(RankOracle::cardinality_cap(1.0), row({1, 1}))},
                          {0.5, Expr::lin_transform({row({0, 1, 1})},
                                                    Expr::concave_scalar(ScalarConcave::cap(1.0),
                                                                         Expr::linear(row({1}))))}}),
               3});
  return z;
}

}  // namespace dralloc::testing
