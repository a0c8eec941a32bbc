#pragma once

#include <cstddef>
#include <optional>

#include "dralloc/expr.hpp"
#include "json.hpp"

namespace dralloc {

nlohmann::json to_json(const Expr& f);
nlohmann::json to_json(const RankOracle& r);
nlohmann::json to_json(const ScalarConcave& fn);

/// Builds a validated expression. When dim is given, every top-level
/// coordinate must be < dim (UnknownCoord otherwise). Malformed documents
/// raise ParseError; semantic violations raise the construction errors.
Expr expr_from_json(const nlohmann::json& j, std::optional<std::size_t> dim = std::nullopt);
RankOracle rank_from_json(const nlohmann::json& j);
ScalarConcave scalar_from_json(const nlohmann::json& j);

}  // namespace dralloc
