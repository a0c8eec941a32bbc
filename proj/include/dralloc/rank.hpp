#pragma once

// Polymatroid budget-additive valuations over small ground sets.
//
// The value is max{ sum(z) : 0 <= z <= x, z(S) <= r(S) for all S } and is
// computed through its min-form  min_S ( r(S) + x([m] \ S) ),  which is exact
// by enumeration for m <= 20. The upward-gradient is the 0/1 indicator of
// the complement of the maximal minimizer ("tight set").

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <variant>
#include <vector>

namespace dralloc {

using Subset = std::uint32_t;
inline constexpr std::size_t kMaxGroundSize = 20;

class RankOracle {
 public:
  /// r(S) = min(|S|, k)
  struct CardinalityCap {
    double k;
  };
  /// r(S) = total weight of the universe items covered by the elements of S.
  struct WeightedCoverage {
    std::vector<double> weights;                 // per universe item
    std::vector<std::vector<std::size_t>> sets;  // per ground element
  };
  /// All 2^m values in subset-bitmask order.
  struct ExplicitTable {
    std::size_t m;
    std::vector<double> values;
  };
  /// r(S) = sum_b min(|S cap block_b|, caps_b)
  struct Partition {
    std::vector<std::vector<std::size_t>> blocks;
    std::vector<double> caps;
  };

  using Variant = std::variant<CardinalityCap, WeightedCoverage, ExplicitTable, Partition>;

  explicit RankOracle(Variant v);

  static RankOracle cardinality_cap(double k) { return RankOracle(CardinalityCap{k}); }
  static RankOracle explicit_table(std::size_t m, std::vector<double> values) {
    return RankOracle(ExplicitTable{m, std::move(values)});
  }
  static RankOracle partition(std::vector<std::vector<std::size_t>> blocks, std::vector<double> caps) {
    return RankOracle(Partition{std::move(blocks), std::move(caps)});
  }
  static RankOracle coverage(std::vector<double> weights, std::vector<std::vector<std::size_t>> sets) {
    return RankOracle(WeightedCoverage{std::move(weights), std::move(sets)});
  }

  /// Unchecked evaluation; bits beyond the ground set are ignored where the
  /// oracle has no fixed ground set.
  double operator()(Subset s) const;

  /// Size of the ground set when the oracle fixes one (explicit, coverage,
  /// partition); CardinalityCap works on any ground set.
  std::optional<std::size_t> ground_size() const;

  const Variant& variant() const noexcept { return v_; }

 private:
  Variant v_;
};

/// r(S); throws OutOfRange when S references elements outside the ground set.
double rank(const RankOracle& r, Subset s);

/// Exhaustive monotonicity + submodularity check on ground size m.
/// Returns a description of the first violation, or nullopt.
std::optional<std::string> find_rank_violation(const RankOracle& r, std::size_t m);

/// Rank values over a fixed ground set, shared by the enumeration routines.
/// The ground set is split into blocks the oracle never couples (partition
/// blocks, coverage components); each block stores its own dense table, so
/// enumeration costs the sum of 2^|block| rather than 2^m.
class RankTable {
 public:
  struct Block {
    std::vector<std::size_t> elems;
    std::vector<double> values;  // indexed by subsets of elems in local bits
  };

  RankTable(const RankOracle& r, std::size_t m);

  double operator[](Subset s) const;
  std::size_t ground_size() const noexcept { return m_; }
  const std::vector<Block>& blocks() const noexcept { return blocks_; }

 private:
  std::size_t m_;
  std::vector<Block> blocks_;
};

struct PmPoint {
  double value;
  Subset tight;  // maximal minimizer of S -> r(S) + x(complement of S)
};

PmPoint pm_solve(const RankTable& table, std::span<const double> x);

double pm_value(const RankOracle& r, std::span<const double> x);
Subset tight_set(const RankOracle& r, std::span<const double> x);
std::vector<double> pm_grad(const RankOracle& r, std::span<const double> x);

/// Lovász extension via the sorted-threshold telescoping sum.
double lovasz(const RankOracle& r, std::span<const double> w);

/// Lower envelope of tau -> pm_value(tau * z) for tau in [0, tau_max]; the
/// function is concave piecewise linear in tau and the tight set is constant
/// on each open piece.
class RayEnvelope {
 public:
  struct Segment {
    double start;   // tau where the segment begins
    double offset;  // r(T)
    double slope;   // z(complement of T)
    Subset tight;
  };

  RayEnvelope() = default;
  RayEnvelope(const RankTable& table, std::span<const double> z, double tau_max);

  /// Segment active at tau (the one starting at or before tau).
  const Segment& at(double tau) const;
  double value(double tau) const {
    const Segment& s = at(tau);
    return s.offset + tau * s.slope;
  }
  /// Interior breakpoints in (0, tau_max).
  std::vector<double> breakpoints() const;
  const std::vector<Segment>& segments() const noexcept { return segments_; }

 private:
  std::vector<Segment> segments_;
};

}  // namespace dralloc
