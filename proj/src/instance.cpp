#include "dralloc/instance.hpp"

#include <algorithm>
#include <fstream>
#include <map>
#include <random>
#include <set>
#include <sstream>

#include "dralloc/cdr_check.hpp"
#include "dralloc/error.hpp"
#include "dralloc/expr_json.hpp"

namespace dralloc {

using nlohmann::json;

namespace {

[[noreturn]] void invalid(std::size_t j, const std::string& what) {
  throw Error(ErrorCode::ValidationError, "arrival " + std::to_string(j) + ": " + what);
}

// Builds arrivals and coordinates one option at a time; coordinate ids are
// handed out sequentially in arrival order.
struct Builder {
  Instance inst;
  CoordId next = 0;

  Arrival& open_arrival() {
    Arrival& a = inst.arrivals.emplace_back();
    a.j = inst.arrivals.size() - 1;
    return a;
  }
  CoordId option(Arrival& a) {
    const CoordId c = next++;
    a.options.push_back(c);
    inst.coords.push_back(c);
    return c;
  }
};

using Rng = std::mt19937_64;

double uniform(Rng& rng, double lo, double hi) { return std::uniform_real_distribution<double>(lo, hi)(rng); }

std::size_t pick(Rng& rng, std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng); }

// Random nonempty subset of [0, n), each member kept with probability p.
std::vector<std::size_t> random_agents(Rng& rng, std::size_t n, double p) {
  std::vector<std::size_t> out;
  std::bernoulli_distribution keep(std::min(1.0, p));
  for (std::size_t i = 0; i < n; ++i)
    if (keep(rng)) out.push_back(i);
  if (out.empty()) out.push_back(pick(rng, n));
  return out;
}

void require(bool ok, const std::string& what) {
  if (!ok) throw Error(ErrorCode::BadParams, what);
}

Instance triangular(const GenParams& p) {
  require(p.n >= 1, "triangular needs n >= 1");
  Builder b;
  std::vector<std::vector<WeightEntry>> rows(p.n);
  for (std::size_t j = 0; j < p.n; ++j) {
    Arrival& a = b.open_arrival();
    for (std::size_t i = j; i < p.n; ++i) rows[i].push_back({b.option(a), 1.0});
  }
  std::vector<std::pair<double, Expr>> terms;
  for (auto& r : rows) terms.emplace_back(1.0, Expr::budget_additive(make_row(std::move(r)), 1.0));
  b.inst.valuation = Expr::sum(std::move(terms));
  b.inst.meta.params = {{"n", p.n}};
  return std::move(b.inst);
}

Instance two_agent_tie() {
  // Item 1 can go to either agent, item 2 only to agent 1; unit budgets.
  Builder b;
  Arrival& first = b.open_arrival();
  const CoordId item1_agent1 = b.option(first);
  const CoordId item1_agent2 = b.option(first);
  Arrival& second = b.open_arrival();
  const CoordId item2_agent1 = b.option(second);
  b.inst.valuation = Expr::sum({
      {1.0, Expr::budget_additive(make_row({{item1_agent1, 1.0}, {item2_agent1, 1.0}}), 1.0)},
      {1.0, Expr::budget_additive(make_row({{item1_agent2, 1.0}}), 1.0)},
  });
  b.inst.meta.params = json::object();
  return std::move(b.inst);
}

ScalarConcave random_scalar(Rng& rng, const std::string& kind, std::size_t m) {
  static const std::vector<std::string> kinds{"cap", "log1p", "exp_sat", "pwl"};
  const std::string& k = kind == "mixed" ? kinds[pick(rng, kinds.size())] : kind;
  if (k == "cap") return ScalarConcave::cap(uniform(rng, 0.5, std::max(1.0, 0.5 * static_cast<double>(m))));
  if (k == "log1p") return ScalarConcave::log1p(uniform(rng, 0.5, 3.0));
  if (k == "exp_sat") return ScalarConcave::exp_sat(uniform(rng, 0.5, 3.0));
  const double s0 = uniform(rng, 0.5, 1.5);
  const double s1 = s0 * uniform(rng, 0.2, 0.8);
  const double s2 = s1 * uniform(rng, 0.0, 0.5);
  const double b1 = uniform(rng, 0.3, 1.0);
  const double b2 = b1 + uniform(rng, 0.3, 1.0);
  return ScalarConcave::piecewise_linear({s0, s1, s2}, {b1, b2});
}

Instance concave_returns(const GenParams& p, Rng& rng) {
  require(p.n >= 1 && p.m >= 1, "concave_returns needs n >= 1 agents and m >= 1 arrivals");
  static const std::set<std::string> kinds{"cap", "log1p", "exp_sat", "pwl", "mixed"};
  require(kinds.count(p.kind) == 1, "unknown concave kind '" + p.kind + "'");
  Builder b;
  std::vector<std::vector<WeightEntry>> rows(p.n);
  for (std::size_t j = 0; j < p.m; ++j) {
    Arrival& a = b.open_arrival();
    for (std::size_t i : random_agents(rng, p.n, 0.6)) rows[i].push_back({b.option(a), uniform(rng, 0.2, 1.0)});
  }
  std::vector<std::pair<double, Expr>> terms;
  for (auto& r : rows) {
    ScalarConcave fn = random_scalar(rng, p.kind, p.m);
    if (r.empty()) continue;
    terms.emplace_back(1.0, Expr::concave_scalar(std::move(fn), Expr::linear(make_row(std::move(r)))));
  }
  b.inst.valuation = Expr::sum(std::move(terms));
  b.inst.meta.params = {{"n", p.n}, {"m", p.m}, {"kind", p.kind}};
  return std::move(b.inst);
}

// Agent i with budget B and options (coord, cost, reward): the fractional
// knapsack value equals sum over distinct reward/cost levels rho_1 > ... of
// (rho_l - rho_{l+1}) * min(cost of options at level >= rho_l, B).
struct KnapsackOption {
  CoordId coord;
  double cost;
  double ratio;
};

Expr knapsack_agent(const std::vector<KnapsackOption>& opts, double budget) {
  std::vector<double> levels;
  for (const auto& o : opts) levels.push_back(o.ratio);
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<SparseRow> rows;
  std::vector<std::pair<double, Expr>> inner;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    std::vector<WeightEntry> row;
    for (const auto& o : opts)
      if (o.ratio >= levels[l]) row.push_back({o.coord, o.cost});
    rows.push_back(make_row(std::move(row)));
    const double next = l + 1 < levels.size() ? levels[l + 1] : 0.0;
    inner.emplace_back(levels[l] - next,
                       Expr::budget_additive(make_row({{static_cast<CoordId>(l), 1.0}}), budget));
  }
  return Expr::lin_transform(std::move(rows), Expr::sum(std::move(inner)));
}

Instance whole_page(const GenParams& p, Rng& rng) {
  require(p.n >= 1 && p.m >= 1 && p.k >= 1, "whole_page needs n >= 1 agents, m >= 1 arrivals, k >= 1 configurations");
  static const double kLevels[] = {1.0, 0.75, 0.5, 0.25};
  Builder b;
  std::vector<std::vector<KnapsackOption>> per_agent(p.n);
  for (std::size_t j = 0; j < p.m; ++j) {
    Arrival& a = b.open_arrival();
    for (std::size_t c = 0; c < p.k; ++c) {
      const CoordId coord = b.option(a);
      for (std::size_t i : random_agents(rng, p.n, 2.0 / static_cast<double>(p.n)))
        per_agent[i].push_back({coord, uniform(rng, 0.2, 1.0), kLevels[pick(rng, 4)]});
    }
  }
  std::vector<std::pair<double, Expr>> terms;
  for (auto& opts : per_agent) {
    const double budget = uniform(rng, 0.5, 1.5);
    if (opts.empty()) continue;
    terms.emplace_back(1.0, knapsack_agent(opts, budget));
  }
  b.inst.valuation = Expr::sum(std::move(terms));
  b.inst.meta.params = {{"n", p.n}, {"m", p.m}, {"k", p.k}};
  return std::move(b.inst);
}

Instance polymatroid_assignment(const GenParams& p, Rng& rng) {
  require(p.n >= 1 && p.m >= 1 && p.k >= 1, "polymatroid_assignment needs n, m, k >= 1");
  require(p.m <= kMaxGroundSize, "polymatroid_assignment supports at most 20 coordinates, got " + std::to_string(p.m));
  // Coordinate a is an edge to agent a mod n; arrival a / n offers one edge per agent.
  Builder b;
  std::vector<std::vector<std::size_t>> blocks(std::min(p.n, p.m));
  std::vector<double> cost(p.m);
  std::vector<double> ratio(p.m);
  for (std::size_t a = 0; a < p.m; ++a) {
    if (a % p.n == 0) b.open_arrival();
    b.option(b.inst.arrivals.back());
    blocks[a % p.n].push_back(a);
    cost[a] = uniform(rng, 0.5, 1.5);
    ratio[a] = static_cast<double>(p.k - pick(rng, p.k)) / static_cast<double>(p.k);
  }
  std::vector<double> caps(blocks.size());
  for (double& c : caps) c = static_cast<double>(1 + pick(rng, 2));
  const RankOracle rank = RankOracle::partition(blocks, caps);

  std::vector<double> levels(ratio);
  std::sort(levels.begin(), levels.end(), std::greater<>());
  levels.erase(std::unique(levels.begin(), levels.end()), levels.end());
  std::vector<std::pair<double, Expr>> terms;
  for (std::size_t l = 0; l < levels.size(); ++l) {
    SparseRow scale;
    for (std::size_t a = 0; a < p.m; ++a)
      scale.push_back({static_cast<CoordId>(a), ratio[a] >= levels[l] ? cost[a] : 0.0});
    const double next = l + 1 < levels.size() ? levels[l + 1] : 0.0;
    terms.emplace_back(levels[l] - next, Expr::polymatroid(rank, std::move(scale)));
  }
  b.inst.valuation = Expr::sum(std::move(terms));
  b.inst.meta.params = {{"n", p.n}, {"m", p.m}, {"k", p.k}};
  return std::move(b.inst);
}

Instance random_mixture(const GenParams& p, Rng& rng) {
  require(p.n >= 1 && p.m >= 1, "random_mixture needs n >= 1 agents and m >= 1 arrivals");
  Builder b;
  std::vector<std::vector<WeightEntry>> rows(p.n);
  for (std::size_t j = 0; j < p.m; ++j) {
    Arrival& a = b.open_arrival();
    for (std::size_t i : random_agents(rng, p.n, 0.5)) rows[i].push_back({b.option(a), uniform(rng, 0.2, 1.0)});
  }
  std::vector<std::pair<double, Expr>> terms;
  for (auto& r : rows) {
    const std::size_t type = pick(rng, 5);
    const double budget = uniform(rng, 0.5, 2.0);
    const double coeff = uniform(rng, 0.5, 1.5);
    ScalarConcave fn = random_scalar(rng, "mixed", p.m);
    if (r.empty()) continue;
    SparseRow row = make_row(std::move(r));
    Expr e;
    switch (type) {
      case 0: e = Expr::linear(std::move(row)); break;
      case 1: e = Expr::budget_additive(std::move(row), budget); break;
      case 2: e = Expr::concave_scalar(std::move(fn), Expr::linear(std::move(row))); break;
      case 3: {
        SparseRow half = row;
        for (auto& w : half) w.weight *= 0.5;
        const Expr outer = Expr::concave_scalar(ScalarConcave::log1p(1.0), Expr::linear({{0, 1.0}, {1, 1.0}}));
        e = Expr::compose(outer, {Expr::budget_additive(std::move(row), budget), Expr::linear(std::move(half))});
        break;
      }
      default:
        e = Expr::lin_transform({std::move(row)}, Expr::concave_scalar(std::move(fn), Expr::linear({{0, 1.0}})));
        break;
    }
    terms.emplace_back(coeff, std::move(e));
  }
  b.inst.valuation = Expr::sum(std::move(terms));
  b.inst.meta.params = {{"n", p.n}, {"m", p.m}};
  return std::move(b.inst);
}

std::vector<CoordId> ids(const json& j, const char* what) {
  if (!j.is_array()) throw Error(ErrorCode::ParseError, std::string(what) + " must be an array");
  std::vector<CoordId> out;
  for (const auto& v : j) {
    if (!v.is_number_integer() || v.get<long long>() < 0)
      throw Error(ErrorCode::ParseError, std::string(what) + " must hold nonnegative integers");
    out.push_back(v.get<CoordId>());
  }
  return out;
}

}  // namespace

void validate(const Instance& inst) {
  if (!std::is_sorted(inst.coords.begin(), inst.coords.end()) ||
      std::adjacent_find(inst.coords.begin(), inst.coords.end()) != inst.coords.end())
    throw Error(ErrorCode::ValidationError, "coordinate ids must be distinct and increasing");
  const std::set<CoordId> declared(inst.coords.begin(), inst.coords.end());
  std::map<CoordId, std::size_t> owner;
  for (std::size_t j = 0; j < inst.arrivals.size(); ++j) {
    const Arrival& a = inst.arrivals[j];
    if (a.j != j) invalid(j, "index field is " + std::to_string(a.j));
    if (a.options.empty()) invalid(j, "empty option set");
    for (CoordId c : a.options) {
      if (!declared.count(c)) invalid(j, "option " + std::to_string(c) + " is not a declared coordinate");
      auto [it, fresh] = owner.emplace(c, j);
      if (!fresh)
        invalid(j, "option " + std::to_string(c) + " already offered by arrival " + std::to_string(it->second));
    }
  }
  for (CoordId c : support(inst.valuation))
    if (!declared.count(c))
      throw Error(ErrorCode::ValidationError, "valuation references undeclared coordinate " + std::to_string(c));
}

const std::vector<std::string>& families() {
  static const std::vector<std::string> f{"triangular",    "two_agent_tie",          "concave_returns",
                                          "whole_page",    "polymatroid_assignment", "random_mixture"};
  return f;
}

Instance generate(const std::string& family, const GenParams& params, std::uint64_t seed) {
  Rng rng(seed);
  Instance inst;
  if (family == "triangular")
    inst = triangular(params);
  else if (family == "two_agent_tie")
    inst = two_agent_tie();
  else if (family == "concave_returns")
    inst = concave_returns(params, rng);
  else if (family == "whole_page")
    inst = whole_page(params, rng);
  else if (family == "polymatroid_assignment")
    inst = polymatroid_assignment(params, rng);
  else if (family == "random_mixture")
    inst = random_mixture(params, rng);
  else
    throw Error(ErrorCode::BadParams, "unknown family '" + family + "'");
  inst.meta.family = family;
  inst.meta.seed = seed;
  validate(inst);
  return inst;
}

json to_json(const Instance& inst) {
  json arrivals = json::array();
  for (const auto& a : inst.arrivals) arrivals.push_back({{"j", a.j}, {"options", a.options}});
  return {{"coords", inst.coords},
          {"arrivals", arrivals},
          {"valuation", to_json(inst.valuation)},
          {"meta", {{"family", inst.meta.family}, {"params", inst.meta.params}, {"seed", inst.meta.seed}}}};
}

Instance instance_from_json(const json& j) {
  if (!j.is_object()) throw Error(ErrorCode::ParseError, "instance must be a JSON object");
  for (const char* key : {"coords", "arrivals", "valuation"})
    if (!j.contains(key)) throw Error(ErrorCode::ParseError, std::string("missing field '") + key + "'");
  Instance inst;
  inst.coords = ids(j.at("coords"), "coords");
  const json& arr = j.at("arrivals");
  if (!arr.is_array()) throw Error(ErrorCode::ParseError, "arrivals must be an array");
  for (const auto& a : arr) {
    if (!a.is_object() || !a.contains("options")) throw Error(ErrorCode::ParseError, "arrival needs an options list");
    Arrival out;
    out.j = a.contains("j") && a.at("j").is_number_unsigned() ? a.at("j").get<std::size_t>() : inst.arrivals.size();
    out.options = ids(a.at("options"), "options");
    inst.arrivals.push_back(std::move(out));
  }
  if (j.contains("meta")) {
    const json& m = j.at("meta");
    if (m.contains("family") && m.at("family").is_string()) inst.meta.family = m.at("family").get<std::string>();
    if (m.contains("params")) inst.meta.params = m.at("params");
    if (m.contains("seed") && m.at("seed").is_number_unsigned()) inst.meta.seed = m.at("seed").get<std::uint64_t>();
  }

  const std::size_t dim = inst.coords.empty() ? 0 : std::size_t{*std::max_element(inst.coords.begin(), inst.coords.end())} + 1;
  try {
    inst.valuation = expr_from_json(j.at("valuation"), dim);
  } catch (const Error& e) {
    if (e.code() == ErrorCode::ParseError) throw;
    throw Error(ErrorCode::ValidationError, std::string("valuation: ") + e.what());
  }
  validate(inst);

  PointSampler smoke;
  smoke.seed = 0x5eed;
  smoke.fd_coords = 8;
  const CdrReport report = check_cdr(inst.valuation, dim, smoke, 100, 1e-6);
  if (!report.passed())
    throw Error(ErrorCode::ValidationError,
                std::string("valuation failed the CDR smoke test: ") + std::string(to_string(report.violation->property)));
  return inst;
}

void save(const Instance& inst, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw Error(ErrorCode::ValidationError, "cannot open " + path.string() + " for writing");
  out << to_json(inst).dump(2) << '\n';
  if (!out) throw Error(ErrorCode::ValidationError, "failed writing " + path.string());
}

Instance load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::ParseError, "cannot open " + path.string());
  json j;
  try {
    j = json::parse(in);
  } catch (const json::exception& e) {
    throw Error(ErrorCode::ParseError, path.string() + ": " + e.what());
  }
  return instance_from_json(j);
}

}  // namespace dralloc
