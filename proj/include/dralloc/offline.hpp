#pragma once

#include <cstddef>

#include "dralloc/instance.hpp"

namespace dralloc {

struct OptEstimate {
  double lower_bound = 0.0;  // f(x_star)
  std::size_t iterations = 0;
  bool converged = false;
  Vec x_star;  // feasible: x >= 0 and every block sums to at most 1
};

/// Conditional-gradient ascent over the product of capped simplices, one per
/// arrival. Returns the best feasible iterate seen.
OptEstimate frank_wolfe(const Instance& inst, std::size_t max_iters = 5000, double tol = 1e-5);

/// Exhaustive search over the feasible grid with the given spacing.
/// Throws DimensionTooLarge when more than 6 options exist and BadParams
/// unless grid_step is 0.05, 0.1 or 0.25.
double grid_brute_force(const Instance& inst, double grid_step);

}  // namespace dralloc
