#pragma once

// Incremental gradient evaluation for one arrival of the online loop.
//
// Within an arrival only the coordinates of A_j move, one step at a time.
// The kernel keeps, for every subtree that can influence d/dx_a for a in
// A_j, the linear statistics of the current x (row sums, transformed bases,
// scaled polymatroid inputs) and updates them in O(touched entries) per
// step. Evaluating along the ray tau * x then costs one pass over the
// relevant subtrees instead of a full tree evaluation over all of x.

#include <memory>
#include <span>

#include "dralloc/expr.hpp"
#include "dralloc/transform.hpp"

namespace dralloc {

namespace kernel {
struct KNode;
}

class ArrivalKernel {
 public:
  /// f must already be restricted to the revealed coordinates. targets are
  /// the options of the arrival; gradients are reported in that order.
  ArrivalKernel(const Expr& f, std::span<const CoordId> targets, std::span<const double> x,
                QuadratureScheme scheme);
  ~ArrivalKernel();
  ArrivalKernel(ArrivalKernel&&) noexcept;
  ArrivalKernel& operator=(ArrivalKernel&&) noexcept;

  std::size_t size() const noexcept { return n_targets_; }

  /// grad U restricted to the targets at the current x.
  void u_grad(Vec& out, bool parallel = true) const;
  /// grad f restricted to the targets at the current x.
  void f_grad(Vec& out) const;
  /// x[targets[slot]] += amount.
  void bump(std::size_t slot, double amount);

 private:
  std::unique_ptr<kernel::KNode> root_;
  std::size_t n_targets_;
  QuadratureScheme scheme_;
};

}  // namespace dralloc
