#include "dralloc/engine.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <limits>

#include "dralloc/arrival_kernel.hpp"
#include "dralloc/error.hpp"

namespace dralloc {

std::string_view to_string(Policy p) { return p == Policy::Balanced ? "balanced" : "plain_greedy"; }

Policy policy_from_string(std::string_view s) {
  if (s == "balanced") return Policy::Balanced;
  if (s == "plain_greedy") return Policy::PlainGreedy;
  throw Error(ErrorCode::BadParams, "unknown policy '" + std::string(s) + "'");
}

void RunReport::set_opt_lower_bound(double opt) {
  opt_lower_bound = opt;
  empirical_ratio = opt > 0.0 ? primal / opt : 1.0;
}

nlohmann::json RunReport::to_json() const {
  auto num = [](double v) { return std::isfinite(v) ? nlohmann::json(v) : nlohmann::json(nullptr); };
  return {{"primal", primal},
          {"dual", dual},
          {"certified_ratio", certified_ratio},
          {"opt_lower_bound", num(opt_lower_bound)},
          {"empirical_ratio", num(empirical_ratio)},
          {"policy", std::string(to_string(policy))},
          {"delta", delta},
          {"quad_nodes", quad_nodes},
          {"t_min", t_min},
          {"n_arrivals", n_arrivals},
          {"wall_ms", wall_ms},
          {"per_arrival_beta", per_arrival_beta}};
}

namespace {

std::size_t step_count(double delta) {
  if (!(delta > 0.0) || delta > 0.1)
    throw Error(ErrorCode::InvalidStepSize, "step size must lie in (0, 0.1], got " + std::to_string(delta));
  const double steps = std::round(1.0 / delta);
  if (std::abs(steps * delta - 1.0) > 1e-9)
    throw Error(ErrorCode::InvalidStepSize, "1/delta must be an integer, got delta = " + std::to_string(delta));
  return static_cast<std::size_t>(steps);
}

// Lowest CoordId among the maximizers.
std::size_t argmax_slot(const Vec& g, const std::vector<CoordId>& options) {
  std::size_t best = 0;
  for (std::size_t s = 1; s < g.size(); ++s)
    if (g[s] > g[best] || (g[s] == g[best] && options[s] < options[best])) best = s;
  return best;
}

}  // namespace

RunResult run_online(const Instance& inst, const EngineConfig& config) {
  const auto start = std::chrono::steady_clock::now();
  const std::size_t steps = step_count(config.delta);
  config.scheme.validate();
  try {
    validate(inst);
  } catch (const Error& e) {
    throw Error(ErrorCode::MalformedInstance, e.what());
  }

  const std::size_t dim = std::max(inst.dim(), inst.valuation.arity());
  RunResult res;
  AllocationState& st = res.state;
  DualCertificate& cert = res.cert;
  st.x.assign(dim, 0.0);
  st.revealed.assign(dim, false);
  st.mass.assign(inst.n(), 0.0);
  cert.beta.assign(inst.n(), 0.0);
  cert.delta = config.delta;
  cert.g_max = inst.valuation.gradient_bound();

  std::vector<CoordId> revealed_ids;
  Vec g;
  for (std::size_t j = 0; j < inst.n(); ++j) {
    const auto& options = inst.arrivals[j].options;
    cert.options.push_back(options);
    for (CoordId c : options) {
      st.revealed[c] = true;
      revealed_ids.push_back(c);
    }
    // Only the valuation restricted to what has been revealed is visible.
    const Expr visible = restrict(inst.valuation, revealed_ids);
    ArrivalKernel kernel(visible, options, st.x, config.scheme);
    std::vector<std::size_t> count(options.size(), 0);
    for (std::size_t step = 0; step < steps; ++step) {
      if (config.policy == Policy::Balanced)
        kernel.u_grad(g, config.parallel);
      else
        kernel.f_grad(g);
      const std::size_t s = argmax_slot(g, options);
      if (!(g[s] > 0.0)) break;
      // x is kept as an exact multiple of delta.
      const double before = st.x[options[s]];
      const double after = static_cast<double>(++count[s]) * config.delta;
      st.x[options[s]] = after;
      kernel.bump(s, after - before);
      cert.beta[j] += g[s] * config.delta;
    }
    for (CoordId c : options) st.mass[j] += st.x[c];
  }

  const Expr visible = restrict(inst.valuation, revealed_ids);
  cert.primal_value = eval(visible, st.x);
  if (config.policy == Policy::Balanced) {
    const UTransform T(visible, config.scheme);
    cert.alpha = config.parallel ? u_grad(T, st.x) : u_grad_serial(T, st.x);
    cert.fhat_upper = config.parallel ? fhat_upper_at_ugrad(T, st.x) : fhat_upper_at_ugrad_serial(T, st.x);
  } else {
    cert.alpha = grad(visible, st.x);
    cert.fhat_upper = fhat_at_fgrad(visible, st.x);
  }
  double beta_sum = 0.0;
  for (double b : cert.beta) beta_sum += b;
  cert.dual_value = cert.fhat_upper + beta_sum;

  RunReport& r = res.report;
  r.primal = cert.primal_value;
  r.dual = cert.dual_value;
  r.certified_ratio = cert.dual_value > 0.0 ? cert.primal_value / cert.dual_value : 1.0;
  r.policy = config.policy;
  r.delta = config.delta;
  r.quad_nodes = config.scheme.nodes;
  r.t_min = config.scheme.t_min;
  r.n_arrivals = inst.n();
  r.per_arrival_beta = cert.beta;
  r.wall_ms = std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
  return res;
}

CertificateVerdict inspect_certificate(const DualCertificate& cert, double gamma, double C) {
  CertificateVerdict v;
  v.feasibility_slack = std::numeric_limits<double>::infinity();
  for (std::size_t j = 0; j < cert.options.size(); ++j) {
    double top = 0.0;
    for (CoordId c : cert.options[j])
      if (c < cert.alpha.size()) top = std::max(top, cert.alpha[c]);
    const double beta = j < cert.beta.size() ? cert.beta[j] : 0.0;
    v.feasibility_slack = std::min(v.feasibility_slack, beta - top);
  }
  if (cert.options.empty()) v.feasibility_slack = 0.0;
  v.feasible = v.feasibility_slack >= -kDualFeasibilityTol;
  v.tolerance = C * cert.delta * static_cast<double>(cert.options.size()) * cert.g_max;
  v.ratio_slack = cert.primal_value - gamma * cert.dual_value + v.tolerance;
  v.ratio_ok = v.ratio_slack >= 0.0;
  return v;
}

CertificateVerdict verify_certificate(const DualCertificate& cert, double gamma, double C) {
  const CertificateVerdict v = inspect_certificate(cert, gamma, C);
  if (!v.feasible)
    throw Error(ErrorCode::InfeasibleDual,
                "dual infeasible: min_j beta_j - max alpha = " + std::to_string(v.feasibility_slack));
  if (!v.ratio_ok)
    throw Error(ErrorCode::RatioShortfall, "primal " + std::to_string(cert.primal_value) + " < gamma * dual " +
                                               std::to_string(gamma * cert.dual_value) + " beyond tolerance " +
                                               std::to_string(v.tolerance));
  return v;
}

double dual_upper_bound(const DualCertificate& cert) {
  const CertificateVerdict v = inspect_certificate(cert);
  if (!v.feasible) throw Error(ErrorCode::InfeasibleDual, "certificate is not dual feasible");
  return cert.dual_value;
}

}  // namespace dralloc
