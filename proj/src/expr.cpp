#include "dralloc/expr.hpp"

#include <algorithm>
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

double dot(const SparseRow& row, std::span<const double> x) {
  double s = 0.0;
  for (const auto& [c, w] : row)
    if (c < x.size()) s += w * x[c];
  return s;
}

std::size_t row_arity(const SparseRow& row) { return row.empty() ? 0 : std::size_t{row.back().coord} + 1; }

void require_coeff(double c, const char* what) {
  if (!std::isfinite(c)) throw Error(ErrorCode::NegativeWeight, std::string(what) + " must be finite");
  if (c < 0.0) throw Error(ErrorCode::NegativeWeight, std::string(what) + " must be >= 0");
}

Vec apply_rows(const std::vector<SparseRow>& rows, std::span<const double> x) {
  Vec y(rows.size());
  for (std::size_t k = 0; k < rows.size(); ++k) y[k] = dot(rows[k], x);
  return y;
}

Vec scaled_ground(const nodes::Polymatroid& p, std::span<const double> x) {
  Vec z(p.scale.size());
  for (std::size_t i = 0; i < p.scale.size(); ++i) {
    const CoordId c = p.scale[i].coord;
    z[i] = c < x.size() ? p.scale[i].weight * x[c] : 0.0;
  }
  return z;
}

}  // namespace

SparseRow make_row(std::vector<WeightEntry> entries) {
  for (const auto& e : entries) require_coeff(e.weight, "weight");
  std::sort(entries.begin(), entries.end(), [](const WeightEntry& a, const WeightEntry& b) { return a.coord < b.coord; });
  SparseRow out;
  out.reserve(entries.size());
  for (const auto& e : entries) {
    if (!out.empty() && out.back().coord == e.coord)
      out.back().weight += e.weight;
    else
      out.push_back(e);
  }
  return out;
}

namespace {

SparseRow checked_row(SparseRow row) {
  for (std::size_t i = 0; i < row.size(); ++i) {
    require_coeff(row[i].weight, "weight");
    if (i > 0 && row[i].coord <= row[i - 1].coord) return make_row(std::move(row));
  }
  return row;
}

}  // namespace

Expr::Expr() : Expr(std::make_shared<const Node>(Node{nodes::Sum{}})) {}

Expr::Expr(std::shared_ptr<const Node> n) : node_(std::move(n)) {
  std::visit(overloaded{
                 [&](const nodes::Linear& l) { arity_ = row_arity(l.weights); },
                 [&](const nodes::BudgetAdditive& b) { arity_ = row_arity(b.weights); },
                 [&](const nodes::ConcaveScalar& c) {
                   arity_ = c.inner.arity();
                   size_ += c.inner.size();
                 },
                 [&](const nodes::Sum& s) {
                   for (const auto& t : s.terms) {
                     arity_ = std::max(arity_, t.expr.arity());
                     size_ += t.expr.size();
                   }
                 },
                 [&](const nodes::LinTransform& lt) {
                   for (const auto& r : lt.rows) arity_ = std::max(arity_, row_arity(r));
                   size_ += lt.inner.size();
                 },
                 [&](const nodes::Compose& c) {
                   for (const auto& g : c.inners) {
                     arity_ = std::max(arity_, g.arity());
                     size_ += g.size();
                   }
                   size_ += c.outer.size();
                 },
                 [&](const nodes::Polymatroid& p) { arity_ = row_arity(p.scale); },
             },
             node_->v);
  Vec zero(arity_, 0.0);
  Vec g(arity_, 0.0);
  detail::add_grad(*this, zero, 1.0, g);
  for (double v : g) {
    if (!std::isfinite(v)) throw Error(ErrorCode::UnboundedGradient, "gradient at 0 is not finite");
    gmax_ = std::max(gmax_, v);
  }
}

Expr Expr::linear(SparseRow weights) {
  return Expr(std::make_shared<const Node>(Node{nodes::Linear{checked_row(std::move(weights))}}));
}

Expr Expr::budget_additive(SparseRow weights, double budget) {
  require_coeff(budget, "budget");
  return Expr(std::make_shared<const Node>(Node{nodes::BudgetAdditive{checked_row(std::move(weights)), budget}}));
}

Expr Expr::concave_scalar(ScalarConcave fn, Expr inner) {
  return Expr(std::make_shared<const Node>(Node{nodes::ConcaveScalar{std::move(fn), std::move(inner)}}));
}

Expr Expr::sum(std::vector<std::pair<double, Expr>> terms) {
  nodes::Sum s;
  s.terms.reserve(terms.size());
  for (auto& [c, e] : terms) {
    require_coeff(c, "sum coefficient");
    s.terms.push_back({c, std::move(e)});
  }
  return Expr(std::make_shared<const Node>(Node{std::move(s)}));
}

Expr Expr::lin_transform(std::vector<SparseRow> rows, Expr inner) {
  if (inner.arity() > rows.size())
    throw Error(ErrorCode::ArityMismatch, "inner expression reads " + std::to_string(inner.arity()) +
                                              " coordinates but the transform has " + std::to_string(rows.size()) +
                                              " rows");
  for (auto& r : rows) r = checked_row(std::move(r));
  return Expr(std::make_shared<const Node>(Node{nodes::LinTransform{std::move(rows), std::move(inner)}}));
}

Expr Expr::compose(Expr outer, std::vector<Expr> inners) {
  if (outer.arity() > inners.size())
    throw Error(ErrorCode::ArityMismatch, "outer expression reads " + std::to_string(outer.arity()) +
                                              " coordinates but only " + std::to_string(inners.size()) +
                                              " inner expressions were given");
  return Expr(std::make_shared<const Node>(Node{nodes::Compose{std::move(outer), std::move(inners)}}));
}

Expr Expr::polymatroid(RankOracle rank, SparseRow scale) {
  for (std::size_t i = 1; i < scale.size(); ++i)
    if (scale[i].coord <= scale[i - 1].coord)
      throw Error(ErrorCode::ArityMismatch, "polymatroid scale must list distinct coordinates in increasing order");
  for (const auto& e : scale) require_coeff(e.weight, "polymatroid scale");
  if (scale.size() > kMaxGroundSize)
    throw Error(ErrorCode::GroundSetTooLarge, "polymatroid ground set limited to 20 elements");
  if (auto g = rank.ground_size(); g && *g > scale.size())
    throw Error(ErrorCode::ArityMismatch, "rank oracle ground set larger than the scale map");
  if (std::holds_alternative<RankOracle::ExplicitTable>(rank.variant())) {
    if (auto bad = find_rank_violation(rank, scale.size()))
      throw Error(ErrorCode::BadParams, "explicit rank table is not a polymatroid rank: " + *bad);
  }
  auto table = std::make_shared<const RankTable>(rank, scale.size());
  return Expr(std::make_shared<const Node>(Node{nodes::Polymatroid{std::move(rank), std::move(scale), std::move(table)}}));
}

namespace detail {

double value_at(const Expr& f, std::span<const double> x) {
  return std::visit(overloaded{
                        [&](const nodes::Linear& l) { return dot(l.weights, x); },
                        [&](const nodes::BudgetAdditive& b) { return std::min(dot(b.weights, x), b.budget); },
                        [&](const nodes::ConcaveScalar& c) { return c.fn.value(value_at(c.inner, x)); },
                        [&](const nodes::Sum& s) {
                          double acc = 0.0;
                          for (const auto& t : s.terms) acc += t.coeff * value_at(t.expr, x);
                          return acc;
                        },
                        [&](const nodes::LinTransform& lt) { return value_at(lt.inner, apply_rows(lt.rows, x)); },
                        [&](const nodes::Compose& c) {
                          Vec g(c.inners.size());
                          for (std::size_t i = 0; i < g.size(); ++i) g[i] = value_at(c.inners[i], x);
                          return value_at(c.outer, g);
                        },
                        [&](const nodes::Polymatroid& p) { return pm_solve(*p.table, scaled_ground(p, x)).value; },
                    },
                    f.node().v);
}

void add_grad(const Expr& f, std::span<const double> x, double scale, std::span<double> out) {
  if (scale == 0.0) return;
  std::visit(overloaded{
                 [&](const nodes::Linear& l) {
                   for (const auto& [c, w] : l.weights)
                     if (c < out.size()) out[c] += scale * w;
                 },
                 [&](const nodes::BudgetAdditive& b) {
                   if (dot(b.weights, x) >= b.budget) return;
                   for (const auto& [c, w] : b.weights)
                     if (c < out.size()) out[c] += scale * w;
                 },
                 [&](const nodes::ConcaveScalar& c) {
                   add_grad(c.inner, x, scale * c.fn.slope(value_at(c.inner, x)), out);
                 },
                 [&](const nodes::Sum& s) {
                   for (const auto& t : s.terms) add_grad(t.expr, x, scale * t.coeff, out);
                 },
                 [&](const nodes::LinTransform& lt) {
                   const Vec y = apply_rows(lt.rows, x);
                   Vec gy(y.size(), 0.0);
                   add_grad(lt.inner, y, 1.0, gy);
                   for (std::size_t k = 0; k < lt.rows.size(); ++k) {
                     if (gy[k] == 0.0) continue;
                     for (const auto& [c, w] : lt.rows[k])
                       if (c < out.size()) out[c] += scale * gy[k] * w;
                   }
                 },
                 [&](const nodes::Compose& c) {
                   Vec g(c.inners.size());
                   for (std::size_t i = 0; i < g.size(); ++i) g[i] = value_at(c.inners[i], x);
                   Vec go(g.size(), 0.0);
                   add_grad(c.outer, g, 1.0, go);
                   for (std::size_t i = 0; i < g.size(); ++i) add_grad(c.inners[i], x, scale * go[i], out);
                 },
                 [&](const nodes::Polymatroid& p) {
                   const Subset tight = pm_solve(*p.table, scaled_ground(p, x)).tight;
                   for (std::size_t i = 0; i < p.scale.size(); ++i) {
                     const CoordId c = p.scale[i].coord;
                     if (c < out.size() && !((tight >> i) & 1u)) out[c] += scale * p.scale[i].weight;
                   }
                 },
             },
             f.node().v);
}

}  // namespace detail

namespace {

void require_input(std::span<const double> x) {
  for (std::size_t i = 0; i < x.size(); ++i)
    if (!(x[i] >= 0.0) || !std::isfinite(x[i]))
      throw Error(ErrorCode::NegativeInput, "coordinate " + std::to_string(i) + " is negative or not finite");
}

}  // namespace

double eval(const Expr& f, std::span<const double> x) {
  require_input(x);
  return detail::value_at(f, x);
}

Vec grad(const Expr& f, std::span<const double> x) {
  require_input(x);
  Vec g(x.size(), 0.0);
  detail::add_grad(f, x, 1.0, g);
  return g;
}

namespace {

SparseRow filter_row(const SparseRow& row, const std::vector<bool>& keep) {
  SparseRow out;
  for (const auto& e : row)
    if (e.coord < keep.size() && keep[e.coord]) out.push_back(e);
  return out;
}

Expr restrict_mask(const Expr& f, const std::vector<bool>& keep) {
  return std::visit(overloaded{
                        [&](const nodes::Linear& l) { return Expr::linear(filter_row(l.weights, keep)); },
                        [&](const nodes::BudgetAdditive& b) {
                          return Expr::budget_additive(filter_row(b.weights, keep), b.budget);
                        },
                        [&](const nodes::ConcaveScalar& c) {
                          return Expr::concave_scalar(c.fn, restrict_mask(c.inner, keep));
                        },
                        [&](const nodes::Sum& s) {
                          std::vector<std::pair<double, Expr>> terms;
                          terms.reserve(s.terms.size());
                          for (const auto& t : s.terms) terms.emplace_back(t.coeff, restrict_mask(t.expr, keep));
                          return Expr::sum(std::move(terms));
                        },
                        [&](const nodes::LinTransform& lt) {
                          std::vector<SparseRow> rows;
                          rows.reserve(lt.rows.size());
                          for (const auto& r : lt.rows) rows.push_back(filter_row(r, keep));
                          return Expr::lin_transform(std::move(rows), lt.inner);
                        },
                        [&](const nodes::Compose& c) {
                          std::vector<Expr> inners;
                          inners.reserve(c.inners.size());
                          for (const auto& g : c.inners) inners.push_back(restrict_mask(g, keep));
                          return Expr::compose(c.outer, std::move(inners));
                        },
                        [&](const nodes::Polymatroid& p) {
                          SparseRow scale = p.scale;
                          for (auto& e : scale)
                            if (e.coord >= keep.size() || !keep[e.coord]) e.weight = 0.0;
                          return Expr::polymatroid(p.rank, std::move(scale));
                        },
                    },
                    f.node().v);
}

void collect_support(const Expr& f, std::vector<CoordId>& out) {
  std::visit(overloaded{
                 [&](const nodes::Linear& l) {
                   for (const auto& e : l.weights) out.push_back(e.coord);
                 },
                 [&](const nodes::BudgetAdditive& b) {
                   for (const auto& e : b.weights) out.push_back(e.coord);
                 },
                 [&](const nodes::ConcaveScalar& c) { collect_support(c.inner, out); },
                 [&](const nodes::Sum& s) {
                   for (const auto& t : s.terms) collect_support(t.expr, out);
                 },
                 [&](const nodes::LinTransform& lt) {
                   for (const auto& r : lt.rows)
                     for (const auto& e : r) out.push_back(e.coord);
                 },
                 [&](const nodes::Compose& c) {
                   for (const auto& g : c.inners) collect_support(g, out);
                 },
                 [&](const nodes::Polymatroid& p) {
                   for (const auto& e : p.scale) out.push_back(e.coord);
                 },
             },
             f.node().v);
}

}  // namespace

Expr restrict(const Expr& f, std::span<const CoordId> keep) {
  std::vector<bool> mask(f.arity(), false);
  for (CoordId c : keep)
    if (c < mask.size()) mask[c] = true;
  return restrict_mask(f, mask);
}

std::vector<CoordId> support(const Expr& f) {
  std::vector<CoordId> out;
  collect_support(f, out);
  std::sort(out.begin(), out.end());
  out.erase(std::unique(out.begin(), out.end()), out.end());
  return out;
}

void Path::at(double t, Vec& out) const {
  if (ray_base) {
    out.resize(ray_base->size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = (*ray_base)[i] / t;
  } else {
    general(t, out);
  }
}

namespace {

// q is nonincreasing in t. Returns the t in (lo, hi) where q drops below
// theta, if the drop happens strictly inside the interval.
template <class Q>
void bisect_crossing(Q&& q, double theta, double lo, double hi, Vec& out) {
  if (!(q(lo) >= theta) || !(q(hi) < theta)) return;
  double a = lo;
  double b = hi;
  for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
    const double mid = 0.5 * (a + b);
    if (q(mid) >= theta)
      a = mid;
    else
      b = mid;
  }
  const double t = 0.5 * (a + b);
  if (t > lo && t < hi) out.push_back(t);
}

void push_in_range(double t, double lo, double hi, Vec& out) {
  if (t > lo && t < hi) out.push_back(t);
}

}  // namespace

void collect_kinks(const Expr& f, const Path& path, double t_lo, double t_hi, Vec& out) {
  const bool ray = path.ray_base != nullptr;
  Vec scratch;
  auto linear_form = [&](const SparseRow& row) {
    return [&path, &row, scratch = Vec{}](double t) mutable {
      path.at(t, scratch);
      return dot(row, scratch);
    };
  };

  std::visit(overloaded{
                 [&](const nodes::Linear&) {},
                 [&](const nodes::BudgetAdditive& b) {
                   if (ray) {
                     const double s1 = dot(b.weights, *path.ray_base);
                     if (b.budget > 0.0 && s1 > 0.0) push_in_range(s1 / b.budget, t_lo, t_hi, out);
                   } else if (b.budget > 0.0) {
                     bisect_crossing(linear_form(b.weights), b.budget, t_lo, t_hi, out);
                   }
                 },
                 [&](const nodes::ConcaveScalar& c) {
                   collect_kinks(c.inner, path, t_lo, t_hi, out);
                   const auto thresholds = c.fn.kinks();
                   if (thresholds.empty()) return;
                   const auto* lin = std::get_if<nodes::Linear>(&c.inner.node().v);
                   for (double theta : thresholds) {
                     if (!(theta > 0.0)) continue;
                     if (ray && lin) {
                       const double s1 = dot(lin->weights, *path.ray_base);
                       if (s1 > 0.0) push_in_range(s1 / theta, t_lo, t_hi, out);
                     } else {
                       bisect_crossing(
                           [&](double t) {
                             path.at(t, scratch);
                             return detail::value_at(c.inner, scratch);
                           },
                           theta, t_lo, t_hi, out);
                     }
                   }
                 },
                 [&](const nodes::Sum& s) {
                   for (const auto& t : s.terms)
                     if (t.coeff > 0.0) collect_kinks(t.expr, path, t_lo, t_hi, out);
                 },
                 [&](const nodes::LinTransform& lt) {
                   if (ray) {
                     const Vec base = apply_rows(lt.rows, *path.ray_base);
                     collect_kinks(lt.inner, Path::ray(base), t_lo, t_hi, out);
                   } else {
                     Path mapped{nullptr, [&path, &lt](double t, Vec& y) {
                                   Vec p;
                                   path.at(t, p);
                                   y = apply_rows(lt.rows, p);
                                 }};
                     collect_kinks(lt.inner, mapped, t_lo, t_hi, out);
                   }
                 },
                 [&](const nodes::Compose& c) {
                   for (const auto& g : c.inners) collect_kinks(g, path, t_lo, t_hi, out);
                   Path mapped{nullptr, [&path, &c](double t, Vec& g) {
                                 Vec p;
                                 path.at(t, p);
                                 g.resize(c.inners.size());
                                 for (std::size_t i = 0; i < g.size(); ++i) g[i] = detail::value_at(c.inners[i], p);
                               }};
                   collect_kinks(c.outer, mapped, t_lo, t_hi, out);
                 },
                 [&](const nodes::Polymatroid& p) {
                   if (ray) {
                     const Vec z = scaled_ground(p, *path.ray_base);
                     const RayEnvelope env(*p.table, z, 1.0 / t_lo);
                     for (double tau : env.breakpoints()) push_in_range(1.0 / tau, t_lo, t_hi, out);
                     return;
                   }
                   for (std::size_t i = 0; i < p.scale.size(); ++i) {
                     if (p.scale[i].weight <= 0.0) continue;
                     // Membership in the tight set shrinks as t grows.
                     auto member = [&, i](double t) {
                       path.at(t, scratch);
                       return ((pm_solve(*p.table, scaled_ground(p, scratch)).tight >> i) & 1u) ? 1.0 : 0.0;
                     };
                     bisect_crossing(member, 0.5, t_lo, t_hi, out);
                   }
                 },
             },
             f.node().v);
}

}  // namespace dralloc
