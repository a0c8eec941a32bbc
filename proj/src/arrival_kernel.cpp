#include "dralloc/arrival_kernel.hpp"

#include <algorithm>
#include <cmath>

#include "dralloc/rank.hpp"
#include "reduce.hpp"

namespace dralloc {

namespace kernel {

// Every node is evaluated along the ray tau -> tau * x. value() is only
// called on nodes built with need_value; backprop() adds scale * d/dx for
// target coordinates into out, indexed by slot.
struct KNode {
  virtual ~KNode() = default;
  virtual double value(double tau) const = 0;
  virtual void backprop(double tau, double scale, double* out) const = 0;
  virtual void bump(std::size_t slot, double amount) = 0;
  /// Kinks along t -> x / t for t in (t_lo, t_hi).
  virtual void kinks(double t_lo, double t_hi, Vec& out) const = 0;
  bool touches = false;
};

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

struct SlotWeight {
  std::size_t slot;
  double weight;
};

void push_in_range(double t, double lo, double hi, Vec& out) {
  if (t > lo && t < hi) out.push_back(t);
}

// q nonincreasing in t; the t in (lo, hi) where q drops below theta.
template <class Q>
void bisect_crossing(Q&& q, double theta, double lo, double hi, Vec& out) {
  if (!(q(lo) >= theta) || !(q(hi) < theta)) return;
  double a = lo;
  double b = hi;
  for (int it = 0; it < 200 && b - a > 1e-15 * b; ++it) {
    const double mid = 0.5 * (a + b);
    (q(mid) >= theta ? a : b) = mid;
  }
  push_in_range(0.5 * (a + b), lo, hi, out);
}

// Shared state of Linear and BudgetAdditive: s = <w, x> and the target entries.
struct RowState {
  double s = 0.0;
  std::vector<SlotWeight> targets;

  RowState(const SparseRow& row, std::span<const double> base, std::span<const long> slots) {
    for (const auto& [c, w] : row) {
      if (c < base.size()) s += w * base[c];
      if (c < slots.size() && slots[c] >= 0 && w != 0.0) targets.push_back({static_cast<std::size_t>(slots[c]), w});
    }
  }
  void bump(std::size_t slot, double amount) {
    for (const auto& t : targets)
      if (t.slot == slot) s += t.weight * amount;
  }
  void add(double scale, double* out) const {
    for (const auto& t : targets) out[t.slot] += scale * t.weight;
  }
};

struct LinearNode final : KNode {
  RowState row;
  LinearNode(const SparseRow& r, std::span<const double> base, std::span<const long> slots) : row(r, base, slots) {
    touches = !row.targets.empty();
  }
  double value(double tau) const override { return tau * row.s; }
  void backprop(double, double scale, double* out) const override { row.add(scale, out); }
  void bump(std::size_t slot, double amount) override { row.bump(slot, amount); }
  void kinks(double, double, Vec&) const override {}
};

struct BudgetNode final : KNode {
  RowState row;
  double budget;
  BudgetNode(const nodes::BudgetAdditive& b, std::span<const double> base, std::span<const long> slots)
      : row(b.weights, base, slots), budget(b.budget) {
    touches = !row.targets.empty();
  }
  double value(double tau) const override { return std::min(tau * row.s, budget); }
  void backprop(double tau, double scale, double* out) const override {
    if (tau * row.s < budget) row.add(scale, out);
  }
  void bump(std::size_t slot, double amount) override { row.bump(slot, amount); }
  void kinks(double lo, double hi, Vec& out) const override {
    if (budget > 0.0 && row.s > 0.0) push_in_range(row.s / budget, lo, hi, out);
  }
};

struct Level {
  std::span<const double> base;
  std::span<const long> slots;  // coordinate -> slot, or -1
  std::size_t n_slots;
  double tau_max;  // polymatroid envelopes must cover the tail node at t_min
};

std::unique_ptr<KNode> build(const Expr& f, const Level& lv, bool need_value);

struct ScalarNode final : KNode {
  ScalarConcave fn;
  std::unique_ptr<KNode> inner;
  std::vector<double> thresholds;
  ScalarNode(const nodes::ConcaveScalar& c, const Level& lv)
      : fn(c.fn), inner(build(c.inner, lv, true)), thresholds(c.fn.kinks()) {
    touches = inner->touches;
  }
  double value(double tau) const override { return fn.value(inner->value(tau)); }
  void backprop(double tau, double scale, double* out) const override {
    const double slope = fn.slope(inner->value(tau));
    if (slope != 0.0) inner->backprop(tau, scale * slope, out);
  }
  void bump(std::size_t slot, double amount) override { inner->bump(slot, amount); }
  void kinks(double lo, double hi, Vec& out) const override {
    inner->kinks(lo, hi, out);
    const auto* lin = dynamic_cast<const LinearNode*>(inner.get());
    for (double theta : thresholds) {
      if (!(theta > 0.0)) continue;
      if (lin) {
        if (lin->row.s > 0.0) push_in_range(lin->row.s / theta, lo, hi, out);
      } else {
        bisect_crossing([&](double t) { return inner->value(1.0 / t); }, theta, lo, hi, out);
      }
    }
  }
};

struct SumNode final : KNode {
  std::vector<std::pair<double, std::unique_ptr<KNode>>> terms;
  double value(double tau) const override {
    double acc = 0.0;
    for (const auto& [c, t] : terms) acc += c * t->value(tau);
    return acc;
  }
  void backprop(double tau, double scale, double* out) const override {
    for (const auto& [c, t] : terms)
      if (t->touches) t->backprop(tau, scale * c, out);
  }
  void bump(std::size_t slot, double amount) override {
    for (auto& [c, t] : terms)
      if (t->touches) t->bump(slot, amount);
  }
  void kinks(double lo, double hi, Vec& out) const override {
    for (const auto& [c, t] : terms) t->kinks(lo, hi, out);
  }
};

// The inner node lives on the synthetic coordinates y = A x, itself a ray.
struct LinTransformNode final : KNode {
  struct Entry {
    std::size_t inner_slot;
    double weight;
  };
  std::vector<double> y;
  std::vector<std::vector<Entry>> by_slot;       // outer slot -> rows it feeds
  std::vector<std::vector<SlotWeight>> by_row;   // inner slot -> (outer slot, weight)
  std::unique_ptr<KNode> inner;

  LinTransformNode(const nodes::LinTransform& lt, const Level& lv, bool need_value) {
    const auto base = lv.base;
    const auto slots = lv.slots;
    y.resize(lt.rows.size());
    std::vector<long> row_slot(lt.rows.size(), -1);
    by_slot.resize(lv.n_slots);
    for (std::size_t k = 0; k < lt.rows.size(); ++k) {
      for (const auto& [c, w] : lt.rows[k]) {
        if (c < base.size()) y[k] += w * base[c];
        if (c < slots.size() && slots[c] >= 0 && w != 0.0) {
          if (row_slot[k] < 0) {
            row_slot[k] = static_cast<long>(by_row.size());
            by_row.emplace_back();
          }
          const auto r = static_cast<std::size_t>(row_slot[k]);
          by_row[r].push_back({static_cast<std::size_t>(slots[c]), w});
          by_slot[static_cast<std::size_t>(slots[c])].push_back({r, w});
        }
      }
    }
    inner = build(lt.inner, Level{y, row_slot, by_row.size(), lv.tau_max}, need_value);
    touches = inner && inner->touches;
  }
  double value(double tau) const override { return inner->value(tau); }
  void backprop(double tau, double scale, double* out) const override {
    std::vector<double> gy(by_row.size(), 0.0);
    inner->backprop(tau, scale, gy.data());
    for (std::size_t r = 0; r < by_row.size(); ++r) {
      if (gy[r] == 0.0) continue;
      for (const auto& e : by_row[r]) out[e.slot] += gy[r] * e.weight;
    }
  }
  void bump(std::size_t slot, double amount) override {
    for (const auto& e : by_slot[slot]) inner->bump(e.inner_slot, amount * e.weight);
  }
  void kinks(double lo, double hi, Vec& out) const override { inner->kinks(lo, hi, out); }
};

// The outer expression sees (g_1(tau x), ..., g_k(tau x)), which is not a
// ray, so it is evaluated through the generic tree routines.
struct ComposeNode final : KNode {
  Expr outer;
  std::vector<std::unique_ptr<KNode>> inners;

  std::vector<double> inner_values(double tau) const {
    std::vector<double> g(inners.size());
    for (std::size_t i = 0; i < g.size(); ++i) g[i] = inners[i]->value(tau);
    return g;
  }
  double value(double tau) const override { return detail::value_at(outer, inner_values(tau)); }
  void backprop(double tau, double scale, double* out) const override {
    const auto g = inner_values(tau);
    std::vector<double> go(g.size(), 0.0);
    detail::add_grad(outer, g, 1.0, go);
    for (std::size_t i = 0; i < g.size(); ++i)
      if (inners[i]->touches && go[i] != 0.0) inners[i]->backprop(tau, scale * go[i], out);
  }
  void bump(std::size_t slot, double amount) override {
    for (auto& g : inners)
      if (g->touches) g->bump(slot, amount);
  }
  void kinks(double lo, double hi, Vec& out) const override {
    for (const auto& g : inners) g->kinks(lo, hi, out);
    const Path path{nullptr, [this](double t, Vec& g) { g = inner_values(1.0 / t); }};
    collect_kinks(outer, path, lo, hi, out);
  }
};

struct PolymatroidNode final : KNode {
  std::shared_ptr<const RankTable> table;
  std::vector<double> z;
  std::vector<std::vector<SlotWeight>> by_slot;  // slot -> (ground element, scale)
  double tau_max;
  RayEnvelope env;

  PolymatroidNode(const nodes::Polymatroid& p, const Level& lv)
      : table(p.table), z(p.scale.size(), 0.0), by_slot(lv.n_slots), tau_max(lv.tau_max) {
    const auto base = lv.base;
    const auto slots = lv.slots;
    for (std::size_t i = 0; i < p.scale.size(); ++i) {
      const auto [c, w] = p.scale[i];
      if (c < base.size()) z[i] = w * base[c];
      if (c < slots.size() && slots[c] >= 0 && w != 0.0) {
        by_slot[static_cast<std::size_t>(slots[c])].push_back({i, w});
        touches = true;
      }
    }
    env = RayEnvelope(*table, z, tau_max);
  }
  double value(double tau) const override { return env.value(tau); }
  void backprop(double tau, double scale, double* out) const override {
    const Subset tight = env.at(tau).tight;
    for (std::size_t s = 0; s < by_slot.size(); ++s)
      for (const auto& e : by_slot[s])
        if (!((tight >> e.slot) & 1u)) out[s] += scale * e.weight;
  }
  void bump(std::size_t slot, double amount) override {
    if (by_slot[slot].empty()) return;
    for (const auto& e : by_slot[slot]) z[e.slot] += e.weight * amount;
    env = RayEnvelope(*table, z, tau_max);
  }
  void kinks(double lo, double hi, Vec& out) const override {
    for (double tau : env.breakpoints()) push_in_range(1.0 / tau, lo, hi, out);
  }
};

std::unique_ptr<KNode> build(const Expr& f, const Level& lv, bool need_value) {
  std::unique_ptr<KNode> node = std::visit(
      overloaded{
          [&](const nodes::Linear& l) -> std::unique_ptr<KNode> {
            return std::make_unique<LinearNode>(l.weights, lv.base, lv.slots);
          },
          [&](const nodes::BudgetAdditive& b) -> std::unique_ptr<KNode> {
            return std::make_unique<BudgetNode>(b, lv.base, lv.slots);
          },
          [&](const nodes::ConcaveScalar& c) -> std::unique_ptr<KNode> {
            return std::make_unique<ScalarNode>(c, lv);
          },
          [&](const nodes::Sum& s) -> std::unique_ptr<KNode> {
            auto out = std::make_unique<SumNode>();
            for (const auto& t : s.terms) {
              if (t.coeff == 0.0 && !need_value) continue;
              auto child = build(t.expr, lv, need_value);
              if (!child) continue;
              out->touches = out->touches || child->touches;
              out->terms.emplace_back(t.coeff, std::move(child));
            }
            return out;
          },
          [&](const nodes::LinTransform& lt) -> std::unique_ptr<KNode> {
            return std::make_unique<LinTransformNode>(lt, lv, need_value);
          },
          [&](const nodes::Compose& c) -> std::unique_ptr<KNode> {
            auto out = std::make_unique<ComposeNode>();
            out->outer = c.outer;
            for (const auto& g : c.inners) {
              out->inners.push_back(build(g, lv, true));
              out->touches = out->touches || out->inners.back()->touches;
            }
            return out;
          },
          [&](const nodes::Polymatroid& p) -> std::unique_ptr<KNode> {
            return std::make_unique<PolymatroidNode>(p, lv);
          },
      },
      f.node().v);
  if (!need_value && !node->touches) return nullptr;
  return node;
}

}  // namespace

}  // namespace kernel

ArrivalKernel::ArrivalKernel(const Expr& f, std::span<const CoordId> targets, std::span<const double> x,
                             QuadratureScheme scheme)
    : n_targets_(targets.size()), scheme_(scheme) {
  scheme_.validate();
  std::size_t dim = std::max(x.size(), f.arity());
  for (CoordId c : targets) dim = std::max(dim, std::size_t{c} + 1);
  std::vector<long> slots(dim, -1);
  for (std::size_t s = 0; s < targets.size(); ++s) slots[targets[s]] = static_cast<long>(s);
  Vec base(dim, 0.0);
  std::copy(x.begin(), x.end(), base.begin());

  const kernel::Level top{base, slots, targets.size(), (1.0 / scheme_.t_min) * (1.0 + 1e-6)};
  root_ = kernel::build(f, top, false);
}

ArrivalKernel::~ArrivalKernel() = default;
ArrivalKernel::ArrivalKernel(ArrivalKernel&&) noexcept = default;
ArrivalKernel& ArrivalKernel::operator=(ArrivalKernel&&) noexcept = default;

void ArrivalKernel::u_grad(Vec& out, bool parallel) const {
  if (!root_) {
    out.assign(n_targets_, 0.0);
    return;
  }
  Vec kinks;
  root_->kinks(scheme_.t_min, 1.0, kinks);
  const QuadGrid g = make_grid(scheme_, std::move(kinks));
  out = detail::reduce_vector(
      g.t.size(), n_targets_, [&](std::size_t k, Vec& acc) { root_->backprop(1.0 / g.t[k], g.w[k], acc.data()); },
      parallel);
}

void ArrivalKernel::f_grad(Vec& out) const {
  out.assign(n_targets_, 0.0);
  if (root_) root_->backprop(1.0, 1.0, out.data());
}

void ArrivalKernel::bump(std::size_t slot, double amount) {
  if (root_) root_->bump(slot, amount);
}

}  // namespace dralloc
