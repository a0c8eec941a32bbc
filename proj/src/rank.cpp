#include "dralloc/rank.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numeric>

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
  if (!std::isfinite(v) || v < 0.0)
    throw Error(ErrorCode::NegativeWeight, std::string(what) + " must be finite and >= 0");
}

constexpr double kTieTol = 1e-12;

bool near(double a, double b) { return std::abs(a - b) <= kTieTol * (1.0 + std::max(std::abs(a), std::abs(b))); }

}  // namespace

RankOracle::RankOracle(Variant v) : v_(std::move(v)) {
  std::visit(overloaded{
                 [](const CardinalityCap& c) { require_nonneg(c.k, "cardinality cap"); },
                 [](const WeightedCoverage& c) {
                   if (c.sets.size() > kMaxGroundSize)
                     throw Error(ErrorCode::GroundSetTooLarge, "coverage ground set exceeds 20");
                   for (double w : c.weights) require_nonneg(w, "coverage weight");
                   for (const auto& s : c.sets)
                     for (std::size_t u : s)
                       if (u >= c.weights.size())
                         throw Error(ErrorCode::OutOfRange, "coverage set references unknown item");
                 },
                 [](const ExplicitTable& t) {
                   if (t.m > kMaxGroundSize)
                     throw Error(ErrorCode::GroundSetTooLarge, "explicit rank table limited to m <= 20");
                   if (t.values.size() != (std::size_t{1} << t.m))
                     throw Error(ErrorCode::BadParams, "explicit rank table needs 2^m values");
                   for (double v : t.values) require_nonneg(v, "rank value");
                   if (t.values[0] != 0.0) throw Error(ErrorCode::BadParams, "rank of the empty set must be 0");
                 },
                 [](const Partition& p) {
                   if (p.blocks.size() != p.caps.size())
                     throw Error(ErrorCode::BadParams, "partition needs one cap per block");
                   for (double c : p.caps) require_nonneg(c, "partition cap");
                   std::vector<bool> seen(kMaxGroundSize, false);
                   for (const auto& b : p.blocks)
                     for (std::size_t e : b) {
                       if (e >= kMaxGroundSize)
                         throw Error(ErrorCode::GroundSetTooLarge, "partition element beyond 20");
                       if (seen[e]) throw Error(ErrorCode::BadParams, "partition blocks must be disjoint");
                       seen[e] = true;
                     }
                 },
             },
             v_);
}

double RankOracle::operator()(Subset s) const {
  return std::visit(overloaded{
                        [s](const CardinalityCap& c) { return std::min<double>(std::popcount(s), c.k); },
                        [s](const WeightedCoverage& c) {
                          std::vector<bool> covered(c.weights.size(), false);
                          double total = 0.0;
                          for (std::size_t e = 0; e < c.sets.size(); ++e) {
                            if (!((s >> e) & 1u)) continue;
                            for (std::size_t u : c.sets[e]) {
                              if (!covered[u]) {
                                covered[u] = true;
                                total += c.weights[u];
                              }
                            }
                          }
                          return total;
                        },
                        [s](const ExplicitTable& t) { return t.values[s & ((Subset{1} << t.m) - 1)]; },
                        [s](const Partition& p) {
                          double total = 0.0;
                          for (std::size_t b = 0; b < p.blocks.size(); ++b) {
                            int count = 0;
                            for (std::size_t e : p.blocks[b]) count += (s >> e) & 1u;
                            total += std::min<double>(count, p.caps[b]);
                          }
                          return total;
                        },
                    },
                    v_);
}

std::optional<std::size_t> RankOracle::ground_size() const {
  return std::visit(overloaded{
                        [](const CardinalityCap&) -> std::optional<std::size_t> { return std::nullopt; },
                        [](const WeightedCoverage& c) -> std::optional<std::size_t> { return c.sets.size(); },
                        [](const ExplicitTable& t) -> std::optional<std::size_t> { return t.m; },
                        [](const Partition& p) -> std::optional<std::size_t> {
                          std::size_t m = 0;
                          for (const auto& b : p.blocks)
                            for (std::size_t e : b) m = std::max(m, e + 1);
                          return m;
                        },
                    },
                    v_);
}

double rank(const RankOracle& r, Subset s) {
  if (auto m = r.ground_size(); m && *m < 32 && (s >> *m) != 0)
    throw Error(ErrorCode::OutOfRange, "subset references elements outside the ground set");
  return r(s);
}

std::optional<std::string> find_rank_violation(const RankOracle& r, std::size_t m) {
  if (m > kMaxGroundSize) throw Error(ErrorCode::GroundSetTooLarge, "exhaustive check limited to m <= 20");
  const RankTable t(r, m);
  if (std::abs(t[0]) > 0.0) return "r(empty) != 0";
  const Subset full = (Subset{1} << m);
  for (Subset s = 0; s < full; ++s) {
    for (std::size_t i = 0; i < m; ++i) {
      const Subset bi = Subset{1} << i;
      if (s & bi) continue;
      if (t[s | bi] < t[s] - 1e-12) return "not monotone at S=" + std::to_string(s) + " i=" + std::to_string(i);
      for (std::size_t j = i + 1; j < m; ++j) {
        const Subset bj = Subset{1} << j;
        if (s & bj) continue;
        if (t[s | bi] + t[s | bj] < t[s | bi | bj] + t[s] - 1e-12)
          return "not submodular at S=" + std::to_string(s) + " i=" + std::to_string(i) +
                 " j=" + std::to_string(j);
      }
    }
  }
  return std::nullopt;
}

namespace {

// Elements that provably never interact: r(S) = sum over blocks of r(S cap B).
std::vector<std::vector<std::size_t>> separate(const RankOracle& r, std::size_t m) {
  std::vector<std::size_t> parent(m);
  std::iota(parent.begin(), parent.end(), 0);
  auto find = [&](std::size_t a) {
    while (parent[a] != a) a = parent[a] = parent[parent[a]];
    return a;
  };
  auto join = [&](std::size_t a, std::size_t b) { parent[find(a)] = find(b); };
  std::visit(overloaded{
                 [&](const RankOracle::CardinalityCap&) {
                   for (std::size_t i = 1; i < m; ++i) join(i, 0);
                 },
                 [&](const RankOracle::ExplicitTable&) {
                   for (std::size_t i = 1; i < m; ++i) join(i, 0);
                 },
                 [&](const RankOracle::Partition& p) {
                   for (const auto& b : p.blocks)
                     for (std::size_t k = 1; k < b.size(); ++k) join(b[k], b[0]);
                 },
                 [&](const RankOracle::WeightedCoverage& c) {
                   std::vector<std::size_t> owner(c.weights.size(), m);
                   for (std::size_t e = 0; e < c.sets.size() && e < m; ++e)
                     for (std::size_t u : c.sets[e]) {
                       if (owner[u] == m)
                         owner[u] = e;
                       else
                         join(e, owner[u]);
                     }
                 },
             },
             r.variant());
  std::vector<std::vector<std::size_t>> blocks;
  std::vector<std::size_t> index(m, m);
  for (std::size_t e = 0; e < m; ++e) {
    const std::size_t root = find(e);
    if (index[root] == m) {
      index[root] = blocks.size();
      blocks.emplace_back();
    }
    blocks[index[root]].push_back(e);
  }
  return blocks;
}

Subset local_bits(Subset s, const std::vector<std::size_t>& elems) {
  Subset out = 0;
  for (std::size_t k = 0; k < elems.size(); ++k) out |= ((s >> elems[k]) & 1u) << k;
  return out;
}

Subset global_bits(Subset local, const std::vector<std::size_t>& elems) {
  Subset out = 0;
  for (std::size_t k = 0; k < elems.size(); ++k) out |= ((local >> k) & 1u) << elems[k];
  return out;
}

std::vector<double> gather(std::span<const double> x, const std::vector<std::size_t>& elems) {
  std::vector<double> out(elems.size());
  for (std::size_t k = 0; k < elems.size(); ++k) out[k] = elems[k] < x.size() ? x[elems[k]] : 0.0;
  return out;
}

// Complement mass x(block \ S) for every local subset S.
std::vector<double> complement_mass(const std::vector<double>& x) {
  const std::size_t count = std::size_t{1} << x.size();
  std::vector<double> inside(count, 0.0);
  for (Subset s = 1; s < count; ++s) {
    const auto i = static_cast<std::size_t>(std::countr_zero(s));
    inside[s] = inside[s & (s - 1)] + x[i];
  }
  const double total = inside[count - 1];
  for (double& v : inside) v = std::max(0.0, total - v);
  return inside;
}

}  // namespace

RankTable::RankTable(const RankOracle& r, std::size_t m) : m_(m) {
  if (m > kMaxGroundSize) throw Error(ErrorCode::GroundSetTooLarge, "enumeration limited to m <= 20");
  if (auto g = r.ground_size(); g && *g > m)
    throw Error(ErrorCode::ArityMismatch, "rank oracle ground set larger than the scaled coordinates");
  for (auto& elems : separate(r, m)) {
    Block b;
    b.values.resize(std::size_t{1} << elems.size());
    for (Subset s = 0; s < b.values.size(); ++s) b.values[s] = r(global_bits(s, elems));
    b.elems = std::move(elems);
    blocks_.push_back(std::move(b));
  }
}

double RankTable::operator[](Subset s) const {
  double v = 0.0;
  for (const auto& b : blocks_) v += b.values[local_bits(s, b.elems)];
  return v;
}

PmPoint pm_solve(const RankTable& table, std::span<const double> x) {
  PmPoint out{0.0, 0};
  for (const auto& b : table.blocks()) {
    const std::vector<double> xb = gather(x, b.elems);
    const std::vector<double> outside = complement_mass(xb);
    const std::size_t count = b.values.size();
    double best = b.values[0] + outside[0];
    for (Subset s = 1; s < count; ++s) best = std::min(best, b.values[s] + outside[s]);
    const double tol = kTieTol * (1.0 + std::abs(best) + outside[0]);
    Subset tight = 0;
    for (Subset s = 0; s < count; ++s)
      if (b.values[s] + outside[s] <= best + tol) tight |= s;
    out.value += best;
    out.tight |= global_bits(tight, b.elems);
  }
  return out;
}

namespace {
std::size_t ground_for(const RankOracle& r, std::span<const double> x) {
  const std::size_t m = std::max(x.size(), r.ground_size().value_or(0));
  if (m > kMaxGroundSize) throw Error(ErrorCode::GroundSetTooLarge, "enumeration limited to m <= 20");
  return m;
}
}  // namespace

double pm_value(const RankOracle& r, std::span<const double> x) {
  return pm_solve(RankTable(r, ground_for(r, x)), x).value;
}

Subset tight_set(const RankOracle& r, std::span<const double> x) {
  return pm_solve(RankTable(r, ground_for(r, x)), x).tight;
}

std::vector<double> pm_grad(const RankOracle& r, std::span<const double> x) {
  const Subset t = tight_set(r, x);
  std::vector<double> g(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) g[i] = ((t >> i) & 1u) ? 0.0 : 1.0;
  return g;
}

double lovasz(const RankOracle& r, std::span<const double> w) {
  if (w.size() > 32) throw Error(ErrorCode::GroundSetTooLarge, "lovasz limited to 32 elements");
  std::vector<std::size_t> order(w.size());
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) { return w[a] > w[b]; });
  double acc = 0.0;
  double prev_rank = 0.0;
  Subset prefix = 0;
  for (std::size_t k = 0; k < order.size(); ++k) {
    prefix |= Subset{1} << order[k];
    const double rk = r(prefix);
    acc += w[order[k]] * (rk - prev_rank);
    prev_rank = rk;
  }
  return acc;
}

namespace {

// Lower envelope of tau -> min_S values[S] + tau * slope[S] for one block,
// tight sets in local bits.
std::vector<RayEnvelope::Segment> block_envelope(const std::vector<double>& values, const std::vector<double>& z,
                                                 double tau_max) {
  using Segment = RayEnvelope::Segment;
  const std::size_t count = values.size();
  const std::vector<double> slope = complement_mass(z);
  const double total = slope[0];

  // Starting at tau: the active line has minimum value, ties broken toward
  // the smallest slope (it stays minimal just to the right).
  auto activate = [&](double tau) {
    double best_val = values[0] + tau * slope[0];
    for (Subset s = 1; s < count; ++s) best_val = std::min(best_val, values[s] + tau * slope[s]);
    const double vtol = kTieTol * (1.0 + std::abs(best_val) + tau * total);
    double best_slope = slope[0];
    bool have = false;
    for (Subset s = 0; s < count; ++s) {
      if (values[s] + tau * slope[s] <= best_val + vtol) {
        if (!have || slope[s] < best_slope) best_slope = slope[s];
        have = true;
      }
    }
    Subset tight = 0;
    for (Subset s = 0; s < count; ++s)
      if (values[s] + tau * slope[s] <= best_val + vtol && near(slope[s], best_slope)) tight |= s;
    return Segment{tau, values[tight], slope[tight], tight};
  };

  std::vector<Segment> segs{activate(0.0)};
  double tau = 0.0;
  while (true) {
    const Segment& cur = segs.back();
    double next = tau_max;
    for (Subset s = 0; s < count; ++s) {
      const double dc = cur.slope - slope[s];
      if (dc <= kTieTol * (1.0 + cur.slope)) continue;
      const double cross = (values[s] - cur.offset) / dc;
      if (cross > tau && cross < next) next = cross;
    }
    if (next >= tau_max) break;
    Segment seg = activate(next);
    if (seg.tight == cur.tight) break;  // numerical stall; envelope is exhausted
    tau = next;
    segs.push_back(seg);
  }
  return segs;
}

const RayEnvelope::Segment& active(const std::vector<RayEnvelope::Segment>& segs, double tau) {
  auto it = std::upper_bound(segs.begin(), segs.end(), tau,
                             [](double t, const RayEnvelope::Segment& s) { return t < s.start; });
  return it == segs.begin() ? segs.front() : *(it - 1);
}

}  // namespace

RayEnvelope::RayEnvelope(const RankTable& table, std::span<const double> z, double tau_max) {
  std::vector<std::vector<Segment>> parts;
  std::vector<double> starts{0.0};
  for (const auto& b : table.blocks()) {
    parts.push_back(block_envelope(b.values, gather(z, b.elems), tau_max));
    for (std::size_t k = 1; k < parts.back().size(); ++k) starts.push_back(parts.back()[k].start);
  }
  std::sort(starts.begin(), starts.end());
  starts.erase(std::unique(starts.begin(), starts.end()), starts.end());
  // A sum of concave piecewise-linear functions breaks wherever a summand does.
  for (double tau : starts) {
    Segment seg{tau, 0.0, 0.0, 0};
    for (std::size_t k = 0; k < parts.size(); ++k) {
      const Segment& p = active(parts[k], tau);
      seg.offset += p.offset;
      seg.slope += p.slope;
      seg.tight |= global_bits(p.tight, table.blocks()[k].elems);
    }
    segments_.push_back(seg);
  }
}

const RayEnvelope::Segment& RayEnvelope::at(double tau) const { return active(segments_, tau); }

std::vector<double> RayEnvelope::breakpoints() const {
  std::vector<double> out;
  for (std::size_t k = 1; k < segments_.size(); ++k) out.push_back(segments_[k].start);
  return out;
}

}  // namespace dralloc
