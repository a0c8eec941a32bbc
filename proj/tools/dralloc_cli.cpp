// Command-line front end: gen, run, sweep.
//
// Exit codes: 0 ok, 2 usage or validation problem, 3 certificate failure.

#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>

#include "CLI11.hpp"
#include "dralloc/engine.hpp"
#include "dralloc/error.hpp"
#include "dralloc/instance.hpp"
#include "dralloc/offline.hpp"
#include "dralloc/sweep.hpp"

namespace {

constexpr int kOk = 0;
constexpr int kUsage = 2;
constexpr int kCertificate = 3;

using dralloc::Error;
using dralloc::ErrorCode;

int exit_code_for(const Error& e) {
  switch (e.code()) {
    case ErrorCode::InfeasibleDual:
    case ErrorCode::RatioShortfall: return kCertificate;
    default: return kUsage;
  }
}

struct GenArgs {
  std::string family;
  dralloc::GenParams params;
  std::uint64_t seed = 0;
  std::string out;
};

struct RunArgs {
  std::string instance;
  std::string policy = "balanced";
  double delta = 1e-3;
  std::size_t quad_nodes = 257;
  double t_min = 1e-6;
  double gamma = dralloc::kGammaBalanced;
  std::size_t fw_iters = 5000;
  std::string out;
};

struct SweepArgs {
  std::vector<std::string> families;
  std::vector<std::size_t> n_values;
  std::vector<std::uint64_t> seeds{0};
  dralloc::GenParams base;
  std::vector<std::string> instances;
  std::vector<std::string> policies{"balanced"};
  std::vector<double> deltas{1e-3};
  std::size_t quad_nodes = 257;
  double t_min = 1e-6;
  double gamma = dralloc::kGammaBalanced;
  int jobs = 0;
  std::string out;
};

int cmd_gen(const GenArgs& a) {
  const dralloc::Instance inst = dralloc::generate(a.family, a.params, a.seed);
  if (a.out.empty()) {
    std::cout << dralloc::to_json(inst).dump(2) << '\n';
  } else {
    dralloc::save(inst, a.out);
    std::cerr << "wrote " << a.out << " (" << inst.n() << " arrivals, " << inst.coords.size() << " options)\n";
  }
  return kOk;
}

int cmd_run(const RunArgs& a) {
  const dralloc::Instance inst = dralloc::load(a.instance);
  dralloc::EngineConfig cfg;
  cfg.policy = dralloc::policy_from_string(a.policy);
  cfg.delta = a.delta;
  cfg.scheme = {a.quad_nodes, a.t_min};
  if (!(a.gamma > 0.0) || a.gamma > 1.0) throw Error(ErrorCode::BadParams, "--gamma must lie in (0, 1]");

  dralloc::RunResult res = dralloc::run_online(inst, cfg);
  const dralloc::OptEstimate opt = dralloc::frank_wolfe(inst, a.fw_iters);
  res.report.set_opt_lower_bound(opt.lower_bound);
  const dralloc::CertificateVerdict v = dralloc::inspect_certificate(res.cert, a.gamma);

  if (!a.out.empty()) {
    nlohmann::json j = res.report.to_json();
    j["gamma"] = a.gamma;
    j["dual_feasible"] = v.feasible;
    j["feasibility_slack"] = v.feasibility_slack;
    j["ratio_slack"] = v.ratio_slack;
    j["discretization_tolerance"] = v.tolerance;
    std::ofstream f(a.out);
    if (!f) throw Error(ErrorCode::ValidationError, "cannot write " + a.out);
    f << j.dump(2) << '\n';
  }
  std::cout << std::setprecision(8) << res.report.primal << ' ' << res.report.dual << ' '
            << res.report.certified_ratio << ' ' << res.report.empirical_ratio << '\n';
  try {
    dralloc::verify_certificate(res.cert, a.gamma);
  } catch (const Error& e) {
    std::cerr << "certificate: " << e.what() << '\n';
    return kCertificate;
  }
  return kOk;
}

int cmd_sweep(const SweepArgs& a) {
  dralloc::SweepSpec spec;
  spec.families = a.families;
  spec.n_values = a.n_values;
  spec.seeds = a.seeds;
  spec.base = a.base;
  for (const auto& p : a.instances) spec.instance_files.emplace_back(p);
  spec.policies.clear();
  for (const auto& p : a.policies) spec.policies.push_back(dralloc::policy_from_string(p));
  spec.deltas = a.deltas;
  spec.scheme = {a.quad_nodes, a.t_min};
  spec.scheme.validate();
  spec.gamma = a.gamma;
  spec.jobs = a.jobs;

  const auto rows = dralloc::run_sweep(spec);
  if (a.out.empty()) {
    dralloc::write_csv(std::cout, rows);
  } else {
    std::ofstream f(a.out);
    if (!f) throw Error(ErrorCode::ValidationError, "cannot write " + a.out);
    dralloc::write_csv(f, rows);
  }
  std::size_t failed = 0;
  bool infeasible = false;
  for (const auto& r : rows) {
    if (!r.error.empty()) ++failed;
    infeasible = infeasible || !r.dual_feasible;
  }
  if (failed > 0) std::cerr << failed << " of " << rows.size() << " runs reported an error\n";
  if (failed == rows.size()) return infeasible ? kCertificate : kUsage;
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online allocation with CDR valuations: generate instances, run, sweep"};
  app.require_subcommand(1);

  GenArgs gen;
  auto* g = app.add_subcommand("gen", "Generate an instance file");
  g->add_option("--family", gen.family, "triangular | two_agent_tie | concave_returns | whole_page | "
                                        "polymatroid_assignment | random_mixture")
      ->required();
  g->add_option("--n", gen.params.n, "Agents (arrivals for triangular)")->capture_default_str();
  g->add_option("--m", gen.params.m, "Arrivals, or coordinates for polymatroid_assignment")->capture_default_str();
  g->add_option("--k", gen.params.k, "Configurations per arrival / ratio levels")->capture_default_str();
  g->add_option("--kind", gen.params.kind, "cap | log1p | exp_sat | pwl | mixed")->capture_default_str();
  g->add_option("--seed", gen.seed, "Generator seed")->capture_default_str();
  g->add_option("--out", gen.out, "Output path (stdout when omitted)");

  RunArgs run;
  auto* r = app.add_subcommand("run", "Run the online algorithm and certify it");
  r->add_option("--instance", run.instance, "Instance JSON")->required();
  r->add_option("--policy", run.policy, "balanced | plain_greedy")->capture_default_str();
  r->add_option("--delta", run.delta, "Step size, 1/delta integral")->capture_default_str();
  r->add_option("--quad-nodes", run.quad_nodes, "Quadrature nodes (odd, >= 33)")->capture_default_str();
  r->add_option("--t-min", run.t_min, "Quadrature lower cutoff")->capture_default_str();
  r->add_option("--gamma", run.gamma, "Target ratio for the certificate (default 1-1/e)")->capture_default_str();
  r->add_option("--fw-iters", run.fw_iters, "Frank-Wolfe iterations for the OPT estimate")->capture_default_str();
  r->add_option("--out", run.out, "RunReport JSON path");

  SweepArgs sw;
  auto* s = app.add_subcommand("sweep", "Run a grid of experiments and write CSV");
  s->add_option("--family", sw.families, "Generator families");
  s->add_option("--n", sw.n_values, "Values of n");
  s->add_option("--seed", sw.seeds, "Seeds")->capture_default_str();
  s->add_option("--m", sw.base.m, "Generator m")->capture_default_str();
  s->add_option("--k", sw.base.k, "Generator k")->capture_default_str();
  s->add_option("--kind", sw.base.kind, "Generator scalar kind")->capture_default_str();
  s->add_option("--instance", sw.instances, "Instance files");
  s->add_option("--policy", sw.policies, "Policies")->capture_default_str();
  s->add_option("--delta", sw.deltas, "Step sizes")->capture_default_str();
  s->add_option("--quad-nodes", sw.quad_nodes, "Quadrature nodes")->capture_default_str();
  s->add_option("--t-min", sw.t_min, "Quadrature lower cutoff")->capture_default_str();
  s->add_option("--gamma", sw.gamma, "Certificate ratio")->capture_default_str();
  s->add_option("--jobs", sw.jobs, "Parallel runs (0 = all cores)")->capture_default_str();
  s->add_option("--out", sw.out, "CSV path (stdout when omitted)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsage;
  }

  try {
    if (g->parsed()) return cmd_gen(gen);
    if (r->parsed()) return cmd_run(run);
    return cmd_sweep(sw);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code_for(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
}
