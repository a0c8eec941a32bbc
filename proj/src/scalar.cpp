#include "dralloc/scalar.hpp"

#include <cmath>
#include <string>

#include "dralloc/error.hpp"

namespace dralloc {

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

void require_nonneg(double v, const char* what) {
  if (!std::isfinite(v)) throw Error(ErrorCode::InvalidScalar, std::string(what) + " must be finite");
  if (v < 0.0) throw Error(ErrorCode::NegativeWeight, std::string(what) + " must be >= 0");
}

}  // namespace

ScalarConcave::ScalarConcave(Variant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [](const Cap& c) { require_nonneg(c.bound, "cap bound"); },
                 [](const Log1p& l) { require_nonneg(l.c, "log1p rate"); },
                 [](const ExpSat& e) { require_nonneg(e.c, "exp_sat rate"); },
                 [](const Pow& p) {
                   if (!(p.p > 0.0) || p.p > 1.0)
                     throw Error(ErrorCode::InvalidScalar, "pow exponent must lie in (0, 1]");
                   if (p.p < 1.0)
                     throw Error(ErrorCode::UnboundedGradient,
                                 "s^p with p < 1 has infinite slope at 0");
                 },
                 [](const PiecewiseLinear& pl) {
                   if (pl.slopes.empty())
                     throw Error(ErrorCode::InvalidScalar, "piecewise-linear needs at least one slope");
                   if (pl.breaks.size() + 1 != pl.slopes.size())
                     throw Error(ErrorCode::InvalidScalar, "piecewise-linear needs one break per slope change");
                   for (double s : pl.slopes) require_nonneg(s, "piecewise-linear slope");
                   for (std::size_t k = 1; k < pl.slopes.size(); ++k)
                     if (pl.slopes[k] > pl.slopes[k - 1])
                       throw Error(ErrorCode::InvalidScalar, "piecewise-linear slopes must be nonincreasing");
                   double prev = 0.0;
                   for (double b : pl.breaks) {
                     if (!std::isfinite(b) || b <= prev)
                       throw Error(ErrorCode::InvalidScalar,
                                   "piecewise-linear breaks must be positive and strictly increasing");
                     prev = b;
                   }
                 },
             },
             v_);
}

double ScalarConcave::value(double s) const {
  return std::visit(overloaded{
                        [s](const Cap& c) { return std::min(s, c.bound); },
                        [s](const Log1p& l) { return std::log1p(l.c * s); },
                        [s](const ExpSat& e) { return -std::expm1(-e.c * s); },
                        [s](const Pow&) { return s; },
                        [s](const PiecewiseLinear& pl) {
                          double acc = 0.0;
                          double left = 0.0;
                          for (std::size_t k = 0; k < pl.breaks.size(); ++k) {
                            if (s <= pl.breaks[k]) return acc + pl.slopes[k] * (s - left);
                            acc += pl.slopes[k] * (pl.breaks[k] - left);
                            left = pl.breaks[k];
                          }
                          return acc + pl.slopes.back() * (s - left);
                        },
                    },
                    v_);
}

double ScalarConcave::slope(double s) const {
  return std::visit(overloaded{
                        [s](const Cap& c) { return s < c.bound ? 1.0 : 0.0; },
                        [s](const Log1p& l) { return l.c / (1.0 + l.c * s); },
                        [s](const ExpSat& e) { return e.c * std::exp(-e.c * s); },
                        [](const Pow&) { return 1.0; },
                        [s](const PiecewiseLinear& pl) {
                          for (std::size_t k = 0; k < pl.breaks.size(); ++k)
                            if (s < pl.breaks[k]) return pl.slopes[k];
                          return pl.slopes.back();
                        },
                    },
                    v_);
}

std::vector<double> ScalarConcave::kinks() const {
  if (const auto* c = std::get_if<Cap>(&v_)) return {c->bound};
  if (const auto* pl = std::get_if<PiecewiseLinear>(&v_)) return pl->breaks;
  return {};
}

}  // namespace dralloc
