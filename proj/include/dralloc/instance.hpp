#pragma once

#include <cstddef>
#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "dralloc/expr.hpp"
#include "json.hpp"

namespace dralloc {

struct Arrival {
  std::size_t j = 0;
  std::vector<CoordId> options;
  friend bool operator==(const Arrival&, const Arrival&) = default;
};

struct InstanceMeta {
  std::string family;
  nlohmann::json params = nlohmann::json::object();
  std::uint64_t seed = 0;
  friend bool operator==(const InstanceMeta&, const InstanceMeta&) = default;
};

struct Instance {
  std::vector<CoordId> coords;  // declared coordinate ids, increasing
  std::vector<Arrival> arrivals;
  Expr valuation;
  InstanceMeta meta;

  /// Size of the dense coordinate space (one past the largest id).
  std::size_t dim() const noexcept { return coords.empty() ? 0 : std::size_t{coords.back()} + 1; }
  std::size_t n() const noexcept { return arrivals.size(); }

  friend bool operator==(const Instance&, const Instance&) = default;
};

/// Structural checks: arrival indices in order, nonempty and pairwise
/// disjoint option sets, every option and valuation coordinate declared.
/// Throws ValidationError naming the offending arrival.
void validate(const Instance& inst);

/// Generator parameters; which fields matter depends on the family.
///   triangular             n
///   two_agent_tie          (none)
///   concave_returns        n agents, m arrivals, kind in {cap, log1p, exp_sat, pwl, mixed}
///   whole_page             n agents, m arrivals, k configurations per arrival
///   polymatroid_assignment n agents, m coordinates (<= 20), k ratio levels
///   random_mixture         n agents, m arrivals
struct GenParams {
  std::size_t n = 5;
  std::size_t m = 5;
  std::size_t k = 2;
  std::string kind = "mixed";
};

const std::vector<std::string>& families();

/// Deterministic for a fixed (family, params, seed). Throws BadParams.
Instance generate(const std::string& family, const GenParams& params, std::uint64_t seed);

nlohmann::json to_json(const Instance& inst);
/// Throws ParseError for malformed documents and ValidationError for
/// documents that parse but violate an instance invariant, including a
/// 100-sample CDR smoke test of the valuation.
Instance instance_from_json(const nlohmann::json& j);

void save(const Instance& inst, const std::filesystem::path& path);
Instance load(const std::filesystem::path& path);

}  // namespace dralloc
