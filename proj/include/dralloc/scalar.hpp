#pragma once

#include <variant>
#include <vector>

namespace dralloc {

/// One-dimensional concave, nondecreasing M with M(0) = 0 and a finite
/// right-derivative at 0.
class ScalarConcave {
 public:
  struct Cap {
    double bound;  // s -> min(s, bound)
  };
  struct Log1p {
    double c;  // s -> log(1 + c s)
  };
  struct ExpSat {
    double c;  // s -> 1 - exp(-c s)
  };
  struct Pow {
    double p;  // s -> s^p; only p == 1 passes validation
  };
  /// Slope slopes[0] on [0, breaks[0]), slopes[k] on [breaks[k-1], breaks[k]),
  /// last slope extends to infinity. breaks.size() == slopes.size() - 1.
  struct PiecewiseLinear {
    std::vector<double> slopes;
    std::vector<double> breaks;
  };

  using Variant = std::variant<Cap, Log1p, ExpSat, Pow, PiecewiseLinear>;

  /// Throws Error(InvalidScalar / UnboundedGradient / NegativeWeight) when the
  /// parameters violate the invariants above.
  explicit ScalarConcave(Variant v);

  static ScalarConcave cap(double bound) { return ScalarConcave(Cap{bound}); }
  static ScalarConcave log1p(double c) { return ScalarConcave(Log1p{c}); }
  static ScalarConcave exp_sat(double c) { return ScalarConcave(ExpSat{c}); }
  static ScalarConcave pow(double p) { return ScalarConcave(Pow{p}); }
  static ScalarConcave piecewise_linear(std::vector<double> slopes, std::vector<double> breaks) {
    return ScalarConcave(PiecewiseLinear{std::move(slopes), std::move(breaks)});
  }

  double value(double s) const;
  /// Right-derivative at s.
  double slope(double s) const;
  /// Points where the right-derivative jumps.
  std::vector<double> kinks() const;
  double slope_at_zero() const { return slope(0.0); }

  const Variant& variant() const noexcept { return v_; }

 private:
  Variant v_;
};

}  // namespace dralloc
