#include "dralloc/expr_json.hpp"

#include <charconv>
#include <string>

#include "dralloc/error.hpp"

namespace dralloc {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts... {
  using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json row_to_json(const SparseRow& row) {
  json j = json::object();
  for (const auto& [c, w] : row) j[std::to_string(c)] = w;
  return j;
}

const json& field(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  return j.at(key);
}

double number(const json& j, const char* what) {
  if (!j.is_number()) throw Error(ErrorCode::ParseError, std::string(what) + " must be a number");
  return j.get<double>();
}

std::size_t index(const json& j, const char* what) {
  if (!j.is_number_integer() || j.get<long long>() < 0)
    throw Error(ErrorCode::ParseError, std::string(what) + " must be a nonnegative integer");
  return j.get<std::size_t>();
}

CoordId parse_coord(const std::string& key) {
  CoordId c = 0;
  const auto* end = key.data() + key.size();
  auto [ptr, ec] = std::from_chars(key.data(), end, c);
  if (ec != std::errc() || ptr != end || key.empty())
    throw Error(ErrorCode::ParseError, "coordinate key '" + key + "' is not a nonnegative integer");
  return c;
}

SparseRow row_from_json(const json& j, std::optional<std::size_t> dim) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "weights must be an object keyed by coordinate id");
  std::vector<WeightEntry> entries;
  for (const auto& [key, value] : j.items()) {
    const CoordId c = parse_coord(key);
    if (dim && c >= *dim)
      throw Error(ErrorCode::UnknownCoord, "coordinate " + key + " is not declared (dimension " +
                                               std::to_string(*dim) + ")");
    entries.push_back({c, number(value, "weight")});
  }
  return make_row(std::move(entries));
}

std::vector<std::vector<std::size_t>> index_lists(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array of arrays");
  std::vector<std::vector<std::size_t>> out;
  for (const auto& inner : j) {
    if (!inner.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array of arrays");
    auto& row = out.emplace_back();
    for (const auto& v : inner) row.push_back(index(v, what));
  }
  return out;
}

std::vector<double> numbers(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array");
  std::vector<double> out;
  for (const auto& v : j) out.push_back(number(v, what));
  return out;
}

}  // namespace

json to_json(const ScalarConcave& fn) {
  return std::visit(overloaded{
                        [](const ScalarConcave::Cap& c) { return json{{"name", "cap"}, {"params", {c.bound}}}; },
                        [](const ScalarConcave::Log1p& l) { return json{{"name", "log1p"}, {"params", {l.c}}}; },
                        [](const ScalarConcave::ExpSat& e) { return json{{"name", "exp_sat"}, {"params", {e.c}}}; },
                        [](const ScalarConcave::Pow& p) { return json{{"name", "pow"}, {"params", {p.p}}}; },
                        [](const ScalarConcave::PiecewiseLinear& pl) {
                          json params = json::array();
                          params.push_back(pl.slopes[0]);
                          for (std::size_t k = 0; k < pl.breaks.size(); ++k) {
                            params.push_back(pl.breaks[k]);
                            params.push_back(pl.slopes[k + 1]);
                          }
                          return json{{"name", "pwl"}, {"params", params}};
                        },
                    },
                    fn.variant());
}

ScalarConcave scalar_from_json(const json& j) {
  const json& name_j = field(j, "name");
  if (!name_j.is_string()) throw Error(ErrorCode::ParseError, "fn.name must be a string");
  const auto name = name_j.get<std::string>();
  const auto params = numbers(field(j, "params"), "fn.params");
  auto one = [&]() {
    if (params.size() != 1) throw Error(ErrorCode::ParseError, name + " takes exactly one parameter");
    return params[0];
  };
  if (name == "cap") return ScalarConcave::cap(one());
  if (name == "log1p") return ScalarConcave::log1p(one());
  if (name == "exp_sat") return ScalarConcave::exp_sat(one());
  if (name == "pow") return ScalarConcave::pow(one());
  if (name == "pwl") {
    if (params.size() % 2 != 1) throw Error(ErrorCode::ParseError, "pwl params are slope0, break1, slope1, ...");
    std::vector<double> slopes{params[0]};
    std::vector<double> breaks;
    for (std::size_t k = 1; k + 1 < params.size(); k += 2) {
      breaks.push_back(params[k]);
      slopes.push_back(params[k + 1]);
    }
    return ScalarConcave::piecewise_linear(std::move(slopes), std::move(breaks));
  }
  throw Error(ErrorCode::ParseError, "unknown scalar function '" + name + "'");
}

json to_json(const RankOracle& r) {
  return std::visit(overloaded{
                        [](const RankOracle::CardinalityCap& c) { return json{{"kind", "cardinality_cap"}, {"k", c.k}}; },
                        [](const RankOracle::ExplicitTable& t) {
                          return json{{"kind", "explicit"}, {"m", t.m}, {"values", t.values}};
                        },
                        [](const RankOracle::Partition& p) {
                          return json{{"kind", "partition"}, {"blocks", p.blocks}, {"caps", p.caps}};
                        },
                        [](const RankOracle::WeightedCoverage& c) {
                          return json{{"kind", "coverage"}, {"weights", c.weights}, {"sets", c.sets}};
                        },
                    },
                    r.variant());
}

RankOracle rank_from_json(const json& j) {
  const json& kind_j = field(j, "kind");
  if (!kind_j.is_string()) throw Error(ErrorCode::ParseError, "rank.kind must be a string");
  const auto kind = kind_j.get<std::string>();
  if (kind == "cardinality_cap") return RankOracle::cardinality_cap(number(field(j, "k"), "k"));
  if (kind == "explicit") return RankOracle::explicit_table(index(field(j, "m"), "m"), numbers(field(j, "values"), "values"));
  if (kind == "partition")
    return RankOracle::partition(index_lists(field(j, "blocks"), "blocks"), numbers(field(j, "caps"), "caps"));
  if (kind == "coverage")
    return RankOracle::coverage(numbers(field(j, "weights"), "weights"), index_lists(field(j, "sets"), "sets"));
  throw Error(ErrorCode::ParseError, "unknown rank kind '" + kind + "'");
}

json to_json(const Expr& f) {
  return std::visit(
      overloaded{
          [](const nodes::Linear& l) { return json{{"kind", "linear"}, {"weights", row_to_json(l.weights)}}; },
          [](const nodes::BudgetAdditive& b) {
            return json{{"kind", "budget_additive"}, {"weights", row_to_json(b.weights)}, {"budget", b.budget}};
          },
          [](const nodes::ConcaveScalar& c) {
            return json{{"kind", "concave_scalar"}, {"fn", to_json(c.fn)}, {"inner", to_json(c.inner)}};
          },
          [](const nodes::Sum& s) {
            json terms = json::array();
            for (const auto& t : s.terms) terms.push_back(json{{"coeff", t.coeff}, {"expr", to_json(t.expr)}});
            return json{{"kind", "sum"}, {"terms", terms}};
          },
          [](const nodes::LinTransform& lt) {
            json rows = json::array();
            for (const auto& r : lt.rows) rows.push_back(row_to_json(r));
            return json{{"kind", "lin_transform"}, {"rows", rows}, {"inner", to_json(lt.inner)}};
          },
          [](const nodes::Compose& c) {
            json inners = json::array();
            for (const auto& g : c.inners) inners.push_back(to_json(g));
            return json{{"kind", "compose"}, {"outer", to_json(c.outer)}, {"inners", inners}};
          },
          [](const nodes::Polymatroid& p) {
            return json{{"kind", "polymatroid"}, {"rank", to_json(p.rank)}, {"scale", row_to_json(p.scale)}};
          },
      },
      f.node().v);
}

Expr expr_from_json(const json& j, std::optional<std::size_t> dim) {
  const json& kind_j = field(j, "kind");
  if (!kind_j.is_string()) throw Error(ErrorCode::ParseError, "kind must be a string");
  const auto kind = kind_j.get<std::string>();
  if (kind == "linear") return Expr::linear(row_from_json(field(j, "weights"), dim));
  if (kind == "budget_additive")
    return Expr::budget_additive(row_from_json(field(j, "weights"), dim), number(field(j, "budget"), "budget"));
  if (kind == "concave_scalar")
    return Expr::concave_scalar(scalar_from_json(field(j, "fn")), expr_from_json(field(j, "inner"), dim));
  if (kind == "sum") {
    const json& terms_j = field(j, "terms");
    if (!terms_j.is_array()) throw Error(ErrorCode::ParseError, "terms must be an array");
    std::vector<std::pair<double, Expr>> terms;
    for (const auto& t : terms_j) terms.emplace_back(number(field(t, "coeff"), "coeff"), expr_from_json(field(t, "expr"), dim));
    return Expr::sum(std::move(terms));
  }
  if (kind == "lin_transform") {
    const json& rows_j = field(j, "rows");
    if (!rows_j.is_array()) throw Error(ErrorCode::ParseError, "rows must be an array");
    std::vector<SparseRow> rows;
    for (const auto& r : rows_j) rows.push_back(row_from_json(r, dim));
    return Expr::lin_transform(std::move(rows), expr_from_json(field(j, "inner")));
  }
  if (kind == "compose") {
    const json& inners_j = field(j, "inners");
    if (!inners_j.is_array()) throw Error(ErrorCode::ParseError, "inners must be an array");
    std::vector<Expr> inners;
    for (const auto& g : inners_j) inners.push_back(expr_from_json(g, dim));
    return Expr::compose(expr_from_json(field(j, "outer")), std::move(inners));
  }
  if (kind == "polymatroid") {
    // The scale map must keep zero entries so the ground-set order is stable.
    const json& scale_j = field(j, "scale");
    if (!scale_j.is_object()) throw Error(ErrorCode::ParseError, "scale must be an object");
    SparseRow scale = row_from_json(scale_j, dim);
    return Expr::polymatroid(rank_from_json(field(j, "rank")), std::move(scale));
  }
  throw Error(ErrorCode::ParseError, "unknown expression kind '" + kind + "'");
}

bool operator==(const Expr& a, const Expr& b) {
  if (a.node_ == b.node_) return true;
  return to_json(a) == to_json(b);
}

}  // namespace dralloc
