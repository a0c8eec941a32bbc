#pragma once

// Expression trees for concave diminishing-returns (CDR) valuations.
//
// Every Expr is immutable once built. Its input is a nonnegative vector over
// a dense coordinate space; coordinates beyond the supplied vector read as 0.
// Gradients are upward-gradients: the right-derivative along each coordinate.

#include <cstddef>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <utility>
#include <variant>
#include <vector>

#include "dralloc/rank.hpp"
#include "dralloc/scalar.hpp"

namespace dralloc {

using CoordId = std::uint32_t;
using Vec = std::vector<double>;

struct WeightEntry {
  CoordId coord;
  double weight;
  friend bool operator==(const WeightEntry&, const WeightEntry&) = default;
};

/// Sparse nonnegative row, sorted by coordinate with unique entries.
using SparseRow = std::vector<WeightEntry>;

/// Sorts, merges duplicates and validates nonnegativity.
SparseRow make_row(std::vector<WeightEntry> entries);

struct Node;

class Expr {
 public:
  /// The zero function.
  Expr();

  static Expr linear(SparseRow weights);
  static Expr budget_additive(SparseRow weights, double budget);
  static Expr concave_scalar(ScalarConcave fn, Expr inner);
  static Expr sum(std::vector<std::pair<double, Expr>> terms);
  /// inner is evaluated at y = A x where row k of A is rows[k].
  static Expr lin_transform(std::vector<SparseRow> rows, Expr inner);
  /// outer is evaluated at (g_1(x), ..., g_k(x)).
  static Expr compose(Expr outer, std::vector<Expr> inners);
  /// Element i of the ground set is coordinate scale[i].coord, scaled by
  /// scale[i].weight before entering the polymatroid.
  static Expr polymatroid(RankOracle rank, SparseRow scale);

  const Node& node() const noexcept { return *node_; }

  /// One past the largest coordinate referenced (0 for constant zero).
  std::size_t arity() const noexcept { return arity_; }
  /// ||grad f(0)||_inf; finite by construction.
  double gradient_bound() const noexcept { return gmax_; }
  /// Number of nodes in the tree.
  std::size_t size() const noexcept { return size_; }

  friend bool operator==(const Expr& a, const Expr& b);

 private:
  explicit Expr(std::shared_ptr<const Node> n);
  std::shared_ptr<const Node> node_;
  std::size_t arity_ = 0;
  std::size_t size_ = 1;
  double gmax_ = 0.0;
};

namespace nodes {

struct Linear {
  SparseRow weights;
};
struct BudgetAdditive {
  SparseRow weights;
  double budget;
};
struct ConcaveScalar {
  ScalarConcave fn;
  Expr inner;
};
struct SumTerm {
  double coeff;
  Expr expr;
};
struct Sum {
  std::vector<SumTerm> terms;
};
struct LinTransform {
  std::vector<SparseRow> rows;
  Expr inner;
};
struct Compose {
  Expr outer;
  std::vector<Expr> inners;
};
struct Polymatroid {
  RankOracle rank;
  SparseRow scale;
  std::shared_ptr<const RankTable> table;
};

}  // namespace nodes

struct Node {
  std::variant<nodes::Linear, nodes::BudgetAdditive, nodes::ConcaveScalar, nodes::Sum, nodes::LinTransform,
               nodes::Compose, nodes::Polymatroid>
      v;
};

/// f(x). Throws NegativeInput for negative or non-finite entries.
double eval(const Expr& f, std::span<const double> x);
/// Upward-gradient of f at x, same length as x.
Vec grad(const Expr& f, std::span<const double> x);
/// f with every coordinate outside keep zeroed out.
Expr restrict(const Expr& f, std::span<const CoordId> keep);

/// Every coordinate referenced by f at the top level, sorted.
std::vector<CoordId> support(const Expr& f);

namespace detail {

/// Unchecked evaluation used by the quadrature loops.
double value_at(const Expr& f, std::span<const double> x);
/// out[i] += scale * df/dx_i for i < out.size().
void add_grad(const Expr& f, std::span<const double> x, double scale, std::span<double> out);

}  // namespace detail

/// A path t -> p(t) in the input space of an expression, coordinate-wise
/// nonincreasing in t. A ray path is p(t) = base / t.
struct Path {
  const Vec* ray_base = nullptr;
  std::function<void(double t, Vec& out)> general;

  static Path ray(const Vec& base) { return Path{&base, {}}; }
  void at(double t, Vec& out) const;
};

/// Appends every t in (t_lo, t_hi) where t -> (f(p(t)), grad f(p(t))) is not
/// smooth: budget saturation, scalar breakpoints, polymatroid tight-set
/// changes, recursively through the tree.
void collect_kinks(const Expr& f, const Path& path, double t_lo, double t_hi, Vec& out);

}  // namespace dralloc
