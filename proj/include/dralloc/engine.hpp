#pragma once

#include <cstddef>
#include <limits>
#include <string>
#include <string_view>
#include <vector>

#include "dralloc/instance.hpp"
#include "dralloc/transform.hpp"
#include "json.hpp"

namespace dralloc {

enum class Policy { Balanced, PlainGreedy };

std::string_view to_string(Policy p);
/// "balanced" or "plain_greedy"; throws BadParams otherwise.
Policy policy_from_string(std::string_view s);

struct EngineConfig {
  Policy policy = Policy::Balanced;
  double delta = 1e-3;
  QuadratureScheme scheme;
  /// Parallelize the per-step quadrature; the result is identical either way.
  bool parallel = true;
};

struct AllocationState {
  Vec x;
  std::vector<bool> revealed;
  Vec mass;  // per arrival, sum of x over its options
};

struct DualCertificate {
  Vec alpha;
  Vec beta;
  double fhat_upper = 0.0;
  double primal_value = 0.0;
  double dual_value = 0.0;
  // Context needed to re-check the certificate on its own.
  std::vector<std::vector<CoordId>> options;
  double delta = 0.0;
  double g_max = 0.0;
};

struct RunReport {
  double primal = 0.0;
  double dual = 0.0;
  double certified_ratio = 1.0;
  /// Filled in by callers that also solve the offline problem; NaN otherwise.
  double opt_lower_bound = std::numeric_limits<double>::quiet_NaN();
  double empirical_ratio = std::numeric_limits<double>::quiet_NaN();
  Policy policy = Policy::Balanced;
  double delta = 0.0;
  std::size_t quad_nodes = 0;
  double t_min = 0.0;
  std::size_t n_arrivals = 0;
  double wall_ms = 0.0;
  Vec per_arrival_beta;

  void set_opt_lower_bound(double opt);
  nlohmann::json to_json() const;
};

struct RunResult {
  AllocationState state;
  DualCertificate cert;
  RunReport report;
};

/// Discretized continuous greedy. Throws InvalidStepSize unless delta is in
/// (0, 0.1] with 1/delta integral, and MalformedInstance for invalid
/// instances (e.g. overlapping option sets).
RunResult run_online(const Instance& inst, const EngineConfig& config = {});

inline constexpr double kDualFeasibilityTol = 1e-9;
inline constexpr double kDiscretizationC = 2.0;

struct CertificateVerdict {
  bool feasible = true;
  bool ratio_ok = true;
  /// min_j (beta_j - max_{a in A_j} alpha_a); +inf with no arrivals.
  double feasibility_slack = 0.0;
  /// primal - gamma * dual + tolerance.
  double ratio_slack = 0.0;
  /// C * delta * n * G_max
  double tolerance = 0.0;

  bool ok() const noexcept { return feasible && ratio_ok; }
};

/// Computes the verdict without throwing.
CertificateVerdict inspect_certificate(const DualCertificate& cert, double gamma = kGammaBalanced,
                                       double C = kDiscretizationC);
/// Same, but throws InfeasibleDual or RatioShortfall when a check fails.
CertificateVerdict verify_certificate(const DualCertificate& cert, double gamma = kGammaBalanced,
                                      double C = kDiscretizationC);

/// The dual value, an upper bound on OPT; throws InfeasibleDual when the
/// certificate is not dual feasible.
double dual_upper_bound(const DualCertificate& cert);

}  // namespace dralloc
