#include "dralloc/transform.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <string>

#include "dralloc/error.hpp"
#include "reduce.hpp"

namespace dralloc {

namespace {

constexpr double kInvEm1 = 1.0 / (std::numbers::e - 1.0);
// Piece endpoints are evaluated this far (relative) inside the piece so the
// integrand takes its one-sided limit at a kink.
constexpr double kNudge = 1e-9;

void require_input(std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= 0.0) || !std::isfinite(x[i]))
      throw Error(ErrorCode::NegativeInput, "coordinate " + std::to_string(i) + " is negative or not finite");
}

void scaled(std::span<const double> x, double t, Vec& p) {
  p.resize(x.size());
  const double inv = 1.0 / t;
  for (std::size_t i = 0; i < x.size(); ++i) p[i] = x[i] * inv;
}

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

double u_eval_impl(const UTransform& T, std::span<const double> x, bool parallel) {
  require_input(x);
  const QuadGrid g = grid_for(T.base(), x, T.scheme());
  return detail::reduce_scalar(
      g.t.size(),
      [&](std::size_t k) {
        Vec p;
        scaled(x, g.t[k], p);
        return g.w[k] * g.t[k] * detail::value_at(T.base(), p);
      },
      parallel);
}

Vec u_grad_impl(const UTransform& T, std::span<const double> x, bool parallel) {
  require_input(x);
  const QuadGrid g = grid_for(T.base(), x, T.scheme());
  return detail::reduce_vector(
      g.t.size(), x.size(),
      [&](std::size_t k, Vec& out) {
        Vec p;
        scaled(x, g.t[k], p);
        detail::add_grad(T.base(), p, g.w[k], out);
      },
      parallel);
}

double fhat_upper_impl(const UTransform& T, std::span<const double> x, bool parallel) {
  require_input(x);
  const QuadGrid g = grid_for(T.base(), x, T.scheme());
  return detail::reduce_scalar(
      g.t.size(),
      [&](std::size_t k) {
        Vec p;
        scaled(x, g.t[k], p);
        Vec gp(p.size(), 0.0);
        detail::add_grad(T.base(), p, 1.0, gp);
        // Nonnegative by concavity; clamping rounding noise keeps the bound an upper bound.
        return g.w[k] * std::max(0.0, detail::value_at(T.base(), p) - dot(gp, p));
      },
      parallel);
}

}  // namespace

void QuadratureScheme::validate() const {
  if (nodes < 33 || nodes % 2 == 0)
    throw Error(ErrorCode::BadParams, "quadrature node count must be odd and >= 33, got " + std::to_string(nodes));
  if (!(t_min > 0.0) || t_min > 1e-4)
    throw Error(ErrorCode::BadParams, "t_min must lie in (0, 1e-4]");
}

double pairwise_sum(std::span<const double> v) {
  if (v.size() <= 8) {
    double s = 0.0;
    for (double a : v) s += a;
    return s;
  }
  const std::size_t half = v.size() / 2;
  return pairwise_sum(v.first(half)) + pairwise_sum(v.subspan(half));
}

QuadGrid make_grid(const QuadratureScheme& scheme, Vec kinks) {
  scheme.validate();
  const double s_min = std::cbrt(scheme.t_min);
  Vec cuts{s_min};
  for (double& k : kinks) k = std::cbrt(k);
  std::sort(kinks.begin(), kinks.end());
  for (double s : kinks) {
    if (!(s > s_min) || !(s < 1.0)) continue;
    if (s - cuts.back() <= 1e-8 * s) continue;
    cuts.push_back(s);
  }
  if (1.0 - cuts.back() <= 1e-8 && cuts.size() > 1) cuts.pop_back();
  cuts.push_back(1.0);

  const double panels_total = static_cast<double>((scheme.nodes - 1) / 2);
  const double span = 1.0 - s_min;
  QuadGrid g;
  auto push = [&](double s, double t, double simpson_w) {
    g.t.push_back(t);
    g.w.push_back(simpson_w * 3.0 * s * s * std::exp(t) * kInvEm1);
  };
  // Constant extension of the integrand below t_min.
  g.t.push_back(scheme.t_min);
  g.w.push_back(scheme.t_min * std::exp(scheme.t_min) * kInvEm1);

  for (std::size_t piece = 0; piece + 1 < cuts.size(); ++piece) {
    const double a = cuts[piece];
    const double b = cuts[piece + 1];
    const auto np = std::max<long>(1, std::lround(panels_total * (b - a) / span));
    const double h = (b - a) / static_cast<double>(np);
    const long last = 2 * np;
    const std::size_t first = g.w.size();
    for (long i = 0; i <= last; ++i) {
      const double s = (i == last) ? b : a + static_cast<double>(i) * 0.5 * h;
      double t = s * s * s;
      if (i == 0) t *= 1.0 + kNudge;
      if (i == last) t *= 1.0 - kNudge;
      const double c = (i == 0 || i == last) ? 1.0 : (i % 2 == 1 ? 4.0 : 2.0);
      push(s, t, c * h / 6.0);
    }
    // Rescale so the piece integrates constants exactly; the factor is
    // 1 + O(h^4) and keeps U(f) = f for homogeneous f to rounding.
    const double ta = a * a * a;
    const double exact = std::exp(ta) * std::expm1(b * b * b - ta) * kInvEm1;
    const double approx = pairwise_sum(std::span<const double>(g.w).subspan(first));
    for (std::size_t k = first; k < g.w.size(); ++k) g.w[k] *= exact / approx;
  }
  return g;
}

QuadGrid grid_for(const Expr& f, std::span<const double> x, const QuadratureScheme& scheme) {
  scheme.validate();
  const Vec base(x.begin(), x.end());
  Vec kinks;
  collect_kinks(f, Path::ray(base), scheme.t_min, 1.0, kinks);
  return make_grid(scheme, std::move(kinks));
}

UTransform::UTransform(Expr f, QuadratureScheme scheme) : f_(std::move(f)), scheme_(scheme) { scheme_.validate(); }

double u_eval(const UTransform& T, std::span<const double> x) { return u_eval_impl(T, x, true); }
Vec u_grad(const UTransform& T, std::span<const double> x) { return u_grad_impl(T, x, true); }
double fhat_upper_at_ugrad(const UTransform& T, std::span<const double> x) { return fhat_upper_impl(T, x, true); }

double u_eval_serial(const UTransform& T, std::span<const double> x) { return u_eval_impl(T, x, false); }
Vec u_grad_serial(const UTransform& T, std::span<const double> x) { return u_grad_impl(T, x, false); }
double fhat_upper_at_ugrad_serial(const UTransform& T, std::span<const double> x) {
  return fhat_upper_impl(T, x, false);
}

double fhat_at_fgrad(const Expr& f, std::span<const double> x) {
  const Vec g = grad(f, x);
  return std::max(0.0, detail::value_at(f, x) - dot(g, x));
}

double fhat_numeric(const Expr& f, std::span<const double> alpha, double R, std::size_t iters) {
  if (!(R > 0.0)) throw Error(ErrorCode::BadParams, "box radius must be positive");
  const std::size_t dim = std::max(alpha.size(), f.arity());
  auto phi = [&](const Vec& y) {
    double v = detail::value_at(f, y);
    for (std::size_t i = 0; i < alpha.size(); ++i) v -= alpha[i] * y[i];
    return v;
  };
  Vec x(dim, 0.0);
  double best = phi(x);
  double step = R;
  Vec g(dim);
  Vec y(dim);
  for (std::size_t k = 0; k < iters && step > 1e-13 * R; ++k) {
    std::fill(g.begin(), g.end(), 0.0);
    detail::add_grad(f, x, 1.0, g);
    double norm = 0.0;
    for (std::size_t i = 0; i < dim; ++i) {
      if (i < alpha.size()) g[i] -= alpha[i];
      // Directions leaving the box are projected away.
      if ((x[i] <= 0.0 && g[i] < 0.0) || (x[i] >= R && g[i] > 0.0)) g[i] = 0.0;
      norm = std::max(norm, std::abs(g[i]));
    }
    if (norm == 0.0) break;
    for (std::size_t i = 0; i < dim; ++i) y[i] = std::clamp(x[i] + step * g[i] / norm, 0.0, R);
    const double v = phi(y);
    if (v > best) {
      best = v;
      x = y;
      step *= 1.5;
    } else {
      step *= 0.5;
    }
  }
  return best;
}

double balanced_check(const UTransform& T, std::span<const double> x, double gamma) {
  if (!(gamma > 0.0) || gamma > 1.0) throw Error(ErrorCode::BadParams, "gamma must lie in (0, 1]");
  return eval(T.base(), x) / gamma - u_eval(T, x) - fhat_upper_at_ugrad(T, x);
}

DifferentiableFn as_function(const UTransform& T, std::size_t dim) {
  return {dim, [T](std::span<const double> x) { return u_eval(T, x); },
          [T](std::span<const double> x) { return u_grad(T, x); }};
}

}  // namespace dralloc
