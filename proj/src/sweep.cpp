#include "dralloc/sweep.hpp"

#include <algorithm>
#include <iomanip>
#include <optional>
#include <tuple>

#include "dralloc/error.hpp"
#include "dralloc/offline.hpp"

#ifdef _OPENMP
#include <omp.h>
#endif

namespace dralloc {

namespace {

struct Source {
  std::string family;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  GenParams params;
  std::optional<std::filesystem::path> file;
};

struct Prepared {
  std::optional<Instance> inst;
  double opt = 0.0;
  std::string error;
};

Prepared prepare(const Source& src) {
  Prepared p;
  try {
    p.inst = src.file ? load(*src.file) : generate(src.family, src.params, src.seed);
    p.opt = frank_wolfe(*p.inst).lower_bound;
  } catch (const std::exception& e) {
    p.error = e.what();
  }
  return p;
}

auto sort_key(const SweepRow& r) {
  return std::make_tuple(r.family, r.n, r.seed, std::string(to_string(r.policy)), r.delta, r.quad_nodes);
}

}  // namespace

std::vector<SweepRow> run_sweep(const SweepSpec& spec) {
  std::vector<Source> sources;
  for (const auto& fam : spec.families)
    for (std::size_t n : spec.n_values)
      for (std::uint64_t seed : spec.seeds) {
        Source s{fam, n, seed, spec.base, std::nullopt};
        s.params.n = n;
        sources.push_back(std::move(s));
      }
  for (const auto& path : spec.instance_files) sources.push_back({path.stem().string(), 0, 0, {}, path});
  if (sources.empty() || spec.policies.empty() || spec.deltas.empty())
    throw Error(ErrorCode::BadParams, "sweep grid is empty");

  // Instances and their offline estimates are shared by every run on them.
  std::vector<Prepared> prepared(sources.size());
  const int threads = spec.jobs > 0 ? spec.jobs : 0;
#pragma omp parallel for schedule(dynamic) num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (std::size_t i = 0; i < sources.size(); ++i) prepared[i] = prepare(sources[i]);

  struct Task {
    std::size_t source;
    Policy policy;
    double delta;
  };
  std::vector<Task> tasks;
  for (std::size_t i = 0; i < sources.size(); ++i)
    for (Policy p : spec.policies)
      for (double d : spec.deltas) tasks.push_back({i, p, d});

  std::vector<SweepRow> rows(tasks.size());
#pragma omp parallel for schedule(dynamic) num_threads(threads > 0 ? threads : omp_get_max_threads())
  for (std::size_t t = 0; t < tasks.size(); ++t) {
    const Task& task = tasks[t];
    const Source& src = sources[task.source];
    const Prepared& prep = prepared[task.source];
    SweepRow& row = rows[t];
    row.family = src.file ? (prep.inst && !prep.inst->meta.family.empty() ? prep.inst->meta.family : src.family)
                          : src.family;
    row.n = src.file ? (prep.inst ? prep.inst->n() : 0) : src.n;
    row.seed = src.file ? (prep.inst ? prep.inst->meta.seed : 0) : src.seed;
    row.policy = task.policy;
    row.delta = task.delta;
    row.quad_nodes = spec.scheme.nodes;
    if (!prep.inst) {
      row.error = prep.error;
      continue;
    }
    try {
      EngineConfig cfg;
      cfg.policy = task.policy;
      cfg.delta = task.delta;
      cfg.scheme = spec.scheme;
      RunResult res = run_online(*prep.inst, cfg);
      res.report.set_opt_lower_bound(prep.opt);
      const CertificateVerdict v = inspect_certificate(res.cert, spec.gamma);
      row.primal = res.report.primal;
      row.dual = res.report.dual;
      row.certified_ratio = res.report.certified_ratio;
      row.empirical_ratio = res.report.empirical_ratio;
      row.wall_ms = res.report.wall_ms;
      row.dual_feasible = v.feasible;
      if (!v.feasible) row.error = "InfeasibleDual";
    } catch (const std::exception& e) {
      row.error = e.what();
    }
  }
  std::stable_sort(rows.begin(), rows.end(),
                   [](const SweepRow& a, const SweepRow& b) { return sort_key(a) < sort_key(b); });
  return rows;
}

namespace {

std::string csv_field(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  return out + "\"";
}

}  // namespace

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows) {
  out << "family,n,seed,policy,delta,quad_nodes,primal,dual,certified_ratio,empirical_ratio,wall_ms,error\n";
  const auto flags = out.flags();
  const auto prec = out.precision();
  out << std::setprecision(10);
  for (const auto& r : rows) {
    out << csv_field(r.family) << ',' << r.n << ',' << r.seed << ',' << to_string(r.policy) << ',' << r.delta << ','
        << r.quad_nodes << ',' << r.primal << ',' << r.dual << ',' << r.certified_ratio << ',' << r.empirical_ratio
        << ',' << std::fixed << std::setprecision(1) << r.wall_ms << std::defaultfloat << std::setprecision(10) << ','
        << csv_field(r.error) << '\n';
  }
  out.flags(flags);
  out.precision(prec);
}

}  // namespace dralloc
