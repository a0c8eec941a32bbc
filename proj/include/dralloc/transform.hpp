#pragma once

// The auxiliary function U(x) = 1/(e-1) * int_0^1 e^t t f(x/t) dt, its
// gradient, and the conjugate quantities used by the primal-dual certificate.
//
// The integral is discretized by composite Simpson in s with t = s^3, on
// pieces aligned to every t where t -> f(x/t) has a kink. Below t_min the
// integrand is extended by its value at t_min.

#include <cstddef>
#include <span>
#include <vector>

#include "dralloc/cdr_check.hpp"
#include "dralloc/expr.hpp"

namespace dralloc {

inline constexpr double kGammaBalanced = 0.63212055882855767;  // 1 - 1/e

struct QuadratureScheme {
  std::size_t nodes = 257;
  double t_min = 1e-6;

  /// Throws BadParams unless nodes is odd and >= 33 and 0 < t_min <= 1e-4.
  void validate() const;
};

/// Quadrature nodes in t with weights that already include e^t/(e-1), the
/// change of variables and the constant tail below t_min.
struct QuadGrid {
  Vec t;
  Vec w;
};

/// kinks: t values in (t_min, 1), any order, duplicates allowed.
QuadGrid make_grid(const QuadratureScheme& scheme, Vec kinks);

/// Grid aligned to the kinks of t -> f(x/t).
QuadGrid grid_for(const Expr& f, std::span<const double> x, const QuadratureScheme& scheme);

/// Deterministic pairwise summation.
double pairwise_sum(std::span<const double> v);

class UTransform {
 public:
  explicit UTransform(Expr f, QuadratureScheme scheme = {});

  const Expr& base() const noexcept { return f_; }
  const QuadratureScheme& scheme() const noexcept { return scheme_; }

 private:
  Expr f_;
  QuadratureScheme scheme_;
};

// The parallel versions split the nodes into fixed blocks and combine the
// block sums pairwise, so they are bit-identical to the _serial versions
// for any thread count.

double u_eval(const UTransform& T, std::span<const double> x);
Vec u_grad(const UTransform& T, std::span<const double> x);
/// Upper bound on fhat(grad U(x)): the quadrature of e^t (f(p) - <grad f(p), p>), p = x/t.
double fhat_upper_at_ugrad(const UTransform& T, std::span<const double> x);

double u_eval_serial(const UTransform& T, std::span<const double> x);
Vec u_grad_serial(const UTransform& T, std::span<const double> x);
double fhat_upper_at_ugrad_serial(const UTransform& T, std::span<const double> x);

/// f(x) - <grad f(x), x>, the exact conjugate at the gradient.
double fhat_at_fgrad(const Expr& f, std::span<const double> x);

/// Lower bound on sup_{0 <= y <= R} f(y) - <alpha, y> by projected
/// supergradient ascent with step halving.
double fhat_numeric(const Expr& f, std::span<const double> alpha, double R, std::size_t iters = 20000);

/// f(x)/gamma - U(x) - fhat_upper(x); nonnegative certifies the balanced
/// inequality at x.
double balanced_check(const UTransform& T, std::span<const double> x, double gamma = kGammaBalanced);

/// u_eval / u_grad packaged for check_cdr.
DifferentiableFn as_function(const UTransform& T, std::size_t dim);

}  // namespace dralloc
