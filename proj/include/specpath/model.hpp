#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <string>
#include <vector>

#include "specpath/errors.hpp"
#include "specpath/paths.hpp"
#include "specpath/scaling.hpp"

namespace specpath {

// Knobs of the greedy fit. Defaults follow the experimental protocol used
// throughout: support sizes 1..4, up to 512 paths, blocks of 8 bounded by
// [1, 32], five-decade lambda grid, patience 3 at 1e-4 improvement.
struct FitConfig {
  std::vector<int> k_set = {1, 2, 3, 4};
  int max_paths = 512;
  int block_size = 8;
  int block_size_min = 1;
  int block_size_max = 32;
  std::vector<double> lambda_grid = {1e-5, 1e-4, 1e-3, 1e-2, 1e-1};
  int patience = 3;
  double min_improvement = 1e-4;
  bool final_resweep = true;
  std::uint64_t seed = 42;

  void validate() const {
    if (max_paths < 1) throw ConfigError("fit config: max_paths must be >= 1");
    if (lambda_grid.empty())
      throw ConfigError("fit config: lambda grid is empty");
    for (std::size_t i = 1; i < lambda_grid.size(); ++i) {
      if (lambda_grid[i] <= lambda_grid[i - 1])
        throw ConfigError("fit config: lambda grid must be ascending");
    }
    for (double l : lambda_grid) {
      if (l <= 0.0) throw ConfigError("fit config: lambdas must be positive");
    }
    if (k_set.empty()) throw ConfigError("fit config: k set is empty");
    for (int k : k_set) {
      if (k < 1) throw ConfigError("fit config: support sizes must be >= 1");
    }
    if (block_size_min < 1 || block_size_max < block_size_min ||
        block_size < block_size_min || block_size > block_size_max)
      throw ConfigError("fit config: block size out of bounds");
    if (patience < 1) throw ConfigError("fit config: patience must be >= 1");
    if (min_improvement < 0.0)
      throw ConfigError("fit config: min_improvement must be >= 0");
  }
};

// One greedy iteration as recorded in the fit trace. Rejected proposals are
// kept too (accepted == false) so the full search is reconstructable; the
// capacity curve filters on accepted entries.
struct TraceEntry {
  int iteration = 0;
  bool accepted = false;
  int support_size = 0;
  int block_size = 0;
  std::vector<FrequencyVector> added;
  std::size_t n_paths = 0;  // dictionary size after this iteration
  double train_r2 = 0.0;
  double val_r2 = 0.0;
  double lambda = 0.0;
};

// The complete fitted artifact: dictionary, amplitudes, intercept, the
// scaling that defines theta, the selected ridge strength, and the trace.
struct SpectralModel {
  std::vector<FrequencyVector> paths;
  Eigen::VectorXd amplitudes;
  double intercept = 0.0;
  ScalingParams scaling;
  double lambda_star = 0.0;
  std::vector<TraceEntry> fit_trace;

  bool is_fitted() const { return !scaling.centers.empty(); }
  std::size_t dimension() const { return scaling.dimension(); }
  std::size_t path_count() const { return paths.size(); }
};

}  // namespace specpath
