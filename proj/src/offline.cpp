#include "dralloc/offline.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

#include "dralloc/error.hpp"

namespace dralloc {

OptEstimate frank_wolfe(const Instance& inst, std::size_t max_iters, double tol) {
  if (max_iters < 1) throw Error(ErrorCode::BadParams, "max_iters must be at least 1");
  const std::size_t dim = std::max(inst.dim(), inst.valuation.arity());
  OptEstimate best;
  Vec x(dim, 0.0);
  best.x_star = x;
  best.lower_bound = detail::value_at(inst.valuation, x);
  Vec g(dim);
  Vec s(dim);
  std::size_t k = 0;
  for (; k < max_iters; ++k) {
    std::fill(g.begin(), g.end(), 0.0);
    detail::add_grad(inst.valuation, x, 1.0, g);
    // Linear maximizer: all of each block's mass on its best option, lowest id
    // on ties. A zero gradient still takes the mass: both vertices maximize
    // the linear model, and f is monotone so the fuller one is never worse.
    std::fill(s.begin(), s.end(), 0.0);
    for (const auto& a : inst.arrivals) {
      CoordId arg = a.options.front();
      for (CoordId c : a.options)
        if (g[c] > g[arg] || (g[c] == g[arg] && c < arg)) arg = c;
      if (g[arg] >= 0.0) s[arg] = 1.0;
    }
    double gap = 0.0;
    for (std::size_t i = 0; i < dim; ++i) gap += g[i] * (s[i] - x[i]);
    if (gap < tol) {
      best.converged = true;
      break;
    }
    const double step = 2.0 / (static_cast<double>(k) + 2.0);
    for (std::size_t i = 0; i < dim; ++i) x[i] += step * (s[i] - x[i]);
    const double v = detail::value_at(inst.valuation, x);
    if (v > best.lower_bound) {
      best.lower_bound = v;
      best.x_star = x;
    }
  }
  best.iterations = k;
  return best;
}

double grid_brute_force(const Instance& inst, double grid_step) {
  long units = 0;
  for (double allowed : {0.05, 0.1, 0.25})
    if (std::abs(grid_step - allowed) < 1e-12) units = std::lround(1.0 / allowed);
  if (units == 0) throw Error(ErrorCode::BadParams, "grid_step must be 0.05, 0.1 or 0.25");
  std::size_t total = 0;
  for (const auto& a : inst.arrivals) total += a.options.size();
  if (total > 6)
    throw Error(ErrorCode::DimensionTooLarge, "grid search limited to 6 options, instance has " + std::to_string(total));

  std::vector<CoordId> coords;
  std::vector<std::size_t> block_end;
  for (const auto& a : inst.arrivals) {
    coords.insert(coords.end(), a.options.begin(), a.options.end());
    block_end.push_back(coords.size());
  }
  Vec x(std::max(inst.dim(), inst.valuation.arity()), 0.0);
  double best = detail::value_at(inst.valuation, x);
  // Assign grid units coordinate by coordinate, keeping each block within budget.
  std::function<void(std::size_t, std::size_t, long)> rec = [&](std::size_t idx, std::size_t block, long left) {
    if (idx == coords.size()) {
      best = std::max(best, detail::value_at(inst.valuation, x));
      return;
    }
    if (idx == block_end[block]) {
      rec(idx, block + 1, units);
      return;
    }
    for (long u = 0; u <= left; ++u) {
      x[coords[idx]] = static_cast<double>(u) / static_cast<double>(units);
      rec(idx + 1, block, left - u);
    }
    x[coords[idx]] = 0.0;
  };
  if (!coords.empty()) rec(0, 0, units);
  return best;
}

}  // namespace dralloc
