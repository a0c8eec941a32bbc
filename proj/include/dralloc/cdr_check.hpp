#pragma once

// Randomized verifier for the CDR conditions: f(0) = 0, monotonicity,
// coordinate-wise nonincreasing gradient, concavity, and agreement of the
// reported gradient with finite differences away from kinks.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>

#include "dralloc/expr.hpp"

namespace dralloc {

/// Anything with a value and an upward-gradient on R_+^dim.
struct DifferentiableFn {
  std::size_t dim = 0;
  std::function<double(std::span<const double>)> value;
  std::function<Vec(std::span<const double>)> gradient;
};

DifferentiableFn as_function(const Expr& f, std::size_t dim);

struct PointSampler {
  std::uint64_t seed = 1;
  double box = 2.0;        // coordinates drawn from [0, box]
  double zero_prob = 0.2;  // chance a coordinate is exactly 0
  std::size_t fd_coords = 0;  // coordinates differenced per sample; 0 = all
};

enum class CdrProperty { ZeroAtOrigin, Monotone, DiminishingReturns, Concavity, GradientMismatch };

std::string_view to_string(CdrProperty p);

struct CdrViolation {
  CdrProperty property;
  Vec witness;
  Vec other;  // second point (y for monotone checks, z for concavity)
  std::size_t coord = 0;
  double magnitude = 0.0;
};

struct CdrReport {
  std::size_t samples = 0;
  std::size_t fd_checked = 0;
  std::size_t kinks_skipped = 0;
  /// max over checked coordinates of |grad - fd| / max(1, ||grad||_inf)
  double max_fd_rel_error = 0.0;
  std::optional<CdrViolation> violation;

  bool passed() const noexcept { return !violation.has_value(); }
};

/// Stops at the first violation. Value comparisons use tol * (1 + |f|),
/// gradient comparisons use tol * max(1, ||grad||_inf).
CdrReport check_cdr(const DifferentiableFn& f, const PointSampler& sampler, std::size_t n_samples, double tol);
CdrReport check_cdr(const Expr& f, std::size_t dim, const PointSampler& sampler, std::size_t n_samples, double tol);

/// Throws Error(PropertyViolation) describing the witness when the check fails.
void require_cdr(const CdrReport& report);

}  // namespace dralloc
