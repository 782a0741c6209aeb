#pragma once

#include <Eigen/Dense>

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "specpath/errors.hpp"
#include "specpath/model.hpp"
#include "specpath/paths.hpp"

namespace specpath {

// A slab of the cosine design matrix: one column per path, rows aligned with
// the angular matrix the block was evaluated on. Entries live in [-1, 1].
struct DesignBlock {
  Eigen::MatrixXd values;
  std::vector<FrequencyVector> paths;
};

// Directional phase m . theta_n accumulated over the sparse support.
inline double path_phase(const FrequencyVector& m, const Eigen::MatrixXd& theta,
                         Eigen::Index row) {
  double phase = 0.0;
  for (std::size_t i = 0; i < m.support.size(); ++i)
    phase += m.coeffs[i] * theta(row, m.support[i]);
  return phase;
}

// Evaluates cos(m . theta) for each path over all rows. Phases stay within
// |phase| <= L * pi, well inside the accurate range of std::cos, so no extra
// range reduction is applied.
inline DesignBlock evaluate_block(const Eigen::MatrixXd& theta,
                                  std::span<const FrequencyVector> paths) {
  DesignBlock block;
  block.paths.assign(paths.begin(), paths.end());
  block.values.resize(theta.rows(), static_cast<Eigen::Index>(paths.size()));
  for (std::size_t q = 0; q < paths.size(); ++q) {
    const FrequencyVector& m = paths[q];
    if (m.dimension != static_cast<int>(theta.cols()))
      throw ConfigError("evaluate_block: path dimension " +
                        std::to_string(m.dimension) + " != data dimension " +
                        std::to_string(theta.cols()));
    for (Eigen::Index n = 0; n < theta.rows(); ++n)
      block.values(n, static_cast<Eigen::Index>(q)) =
          std::cos(path_phase(m, theta, n));
  }
  return block;
}

// Design matrix with the leading intercept column of ones.
inline Eigen::MatrixXd design_with_intercept(
    const Eigen::MatrixXd& theta, std::span<const FrequencyVector> paths) {
  Eigen::MatrixXd phi(theta.rows(), 1 + static_cast<Eigen::Index>(paths.size()));
  phi.col(0).setOnes();
  if (!paths.empty())
    phi.rightCols(static_cast<Eigen::Index>(paths.size())) =
        evaluate_block(theta, paths).values;
  return phi;
}

// Predicts on angular coordinates: c0 + sum_q A_q cos(m_q . theta), then
// de-centers with the stored target mean.
inline Eigen::VectorXd predict(const SpectralModel& model,
                               const Eigen::MatrixXd& theta) {
  if (!model.is_fitted()) throw StateError("predict: model is not fitted");
  if (static_cast<std::size_t>(theta.cols()) != model.dimension())
    throw ConfigError("predict: data dimension " + std::to_string(theta.cols()) +
                      " != model dimension " +
                      std::to_string(model.dimension()));
  Eigen::VectorXd yhat = Eigen::VectorXd::Constant(
      theta.rows(), model.intercept + model.scaling.target_mean);
  for (std::size_t q = 0; q < model.paths.size(); ++q) {
    const FrequencyVector& m = model.paths[q];
    const double amp = model.amplitudes[static_cast<Eigen::Index>(q)];
    for (Eigen::Index n = 0; n < theta.rows(); ++n)
      yhat[n] += amp * std::cos(path_phase(m, theta, n));
  }
  return yhat;
}

// Raw-feature convenience: applies the model's own scaling first.
inline Eigen::VectorXd predict_raw(const SpectralModel& model,
                                   const Eigen::MatrixXd& x) {
  if (!model.is_fitted()) throw StateError("predict: model is not fitted");
  return predict(model, transform_to_angles(x, model.scaling));
}

}  // namespace specpath
