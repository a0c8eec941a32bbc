#pragma once

#include <cstdint>
#include <filesystem>
#include <ostream>
#include <string>
#include <vector>

#include "dralloc/engine.hpp"
#include "dralloc/instance.hpp"

namespace dralloc {

/// Cross product of instances x policies x step sizes. Instances come from
/// generator grids (families x n_values x seeds, other parameters from
/// base) and from instance files.
struct SweepSpec {
  std::vector<std::string> families;
  std::vector<std::size_t> n_values;
  std::vector<std::uint64_t> seeds{0};
  GenParams base;
  std::vector<std::filesystem::path> instance_files;
  std::vector<Policy> policies{Policy::Balanced};
  std::vector<double> deltas{1e-3};
  QuadratureScheme scheme;
  double gamma = kGammaBalanced;
  int jobs = 0;  // 0 = OpenMP default
};

struct SweepRow {
  std::string family;
  std::size_t n = 0;
  std::uint64_t seed = 0;
  Policy policy = Policy::Balanced;
  double delta = 0.0;
  std::size_t quad_nodes = 0;
  double primal = 0.0;
  double dual = 0.0;
  double certified_ratio = 0.0;
  double empirical_ratio = 0.0;
  double wall_ms = 0.0;
  bool dual_feasible = true;
  std::string error;  // empty on success
};

/// Throws BadParams when the grid is empty. Failed runs become rows with
/// the error column set; rows come back sorted.
std::vector<SweepRow> run_sweep(const SweepSpec& spec);

void write_csv(std::ostream& out, const std::vector<SweepRow>& rows);

}  // namespace dralloc
