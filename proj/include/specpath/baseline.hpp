#pragma once

#include <Eigen/Dense>

#include <limits>
#include <vector>

#include "specpath/errors.hpp"
#include "specpath/model.hpp"
#include "specpath/scaling.hpp"
#include "specpath/solver.hpp"

namespace specpath {

// Plain ridge regression on robust-scaled inputs (no angular map), with the
// penalty strength chosen on the validation split. Serves as the in-space
// linear reference point.
struct RidgeBaseline {
  Eigen::VectorXd beta;  // (intercept, weights)
  ScalingParams scaling;
  double lambda = 0.0;
};

inline Eigen::MatrixXd baseline_design(const Eigen::MatrixXd& x,
                                       const ScalingParams& params) {
  if (static_cast<std::size_t>(x.cols()) != params.dimension())
    throw ConfigError("baseline: dimension mismatch");
  Eigen::MatrixXd phi(x.rows(), x.cols() + 1);
  phi.col(0).setOnes();
  for (Eigen::Index j = 0; j < x.cols(); ++j)
    phi.col(j + 1) =
        (x.col(j).array() - params.centers[static_cast<std::size_t>(j)]) /
        params.scales[static_cast<std::size_t>(j)];
  return phi;
}

inline RidgeBaseline fit_ridge_baseline(const Eigen::MatrixXd& x_train,
                                        const Eigen::VectorXd& y_train,
                                        const Eigen::MatrixXd& x_val,
                                        const Eigen::VectorXd& y_val,
                                        const std::vector<double>& lambda_grid) {
  if (lambda_grid.empty()) throw ConfigError("baseline: empty lambda grid");
  RidgeBaseline baseline;
  baseline.scaling = fit_scaler(x_train);
  auto [y_centered, mean] = center_target(y_train);
  baseline.scaling.target_mean = mean;

  GramSystem system(static_cast<std::size_t>(x_train.cols()));
  accumulate(system, baseline_design(x_train, baseline.scaling), y_centered);
  const Eigen::MatrixXd phi_val = baseline_design(x_val, baseline.scaling);

  double best = -std::numeric_limits<double>::infinity();
  for (double lambda : lambda_grid) {
    RidgeSolution sol = solve_ridge(system, lambda);
    const double r2 = validation_score(sol, phi_val, y_val, mean);
    if (r2 >= best) {
      best = r2;
      baseline.beta = sol.beta;
      baseline.lambda = lambda;
    }
  }
  return baseline;
}

inline Eigen::VectorXd predict_baseline(const RidgeBaseline& baseline,
                                        const Eigen::MatrixXd& x) {
  return (baseline_design(x, baseline.scaling) * baseline.beta).array() +
         baseline.scaling.target_mean;
}

}  // namespace specpath
