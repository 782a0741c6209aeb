#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <string>
#include <utility>
#include <vector>

#include "specpath/errors.hpp"

namespace specpath {

// Per-feature robust location/scale plus the training-target mean.
// Defines the map x -> theta = arccos(tanh((x - c) / s)) used everywhere
// downstream, and the de-centering constant added back to predictions.
struct ScalingParams {
  std::vector<double> centers;
  std::vector<double> scales;
  double target_mean = 0.0;

  std::size_t dimension() const { return centers.size(); }
};

// Linearly interpolated quantile (the "type 7" convention): with sorted
// values x_0..x_{n-1}, the q-quantile sits at rank h = (n-1)q and is
// interpolated between the bracketing order statistics.
inline double quantile_type7(std::vector<double> values, double q) {
  if (values.empty()) throw ConfigError("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double h = static_cast<double>(values.size() - 1) * q;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= values.size()) return values.back();
  return values[lo] + (h - lo) * (values[lo + 1] - values[lo]);
}

// Estimates per-column median and IQR/1.349 from the training matrix.
// A zero IQR (constant column) falls back to scale 1 so such columns map to
// the constant angle pi/2 instead of failing the whole fit.
inline ScalingParams fit_scaler(const Eigen::MatrixXd& x_train) {
  if (x_train.rows() == 0 || x_train.cols() == 0)
    throw ConfigError("fit_scaler: empty training matrix");
  if (x_train.rows() < 2)
    throw ConfigError("fit_scaler: need at least 2 rows, got " +
                      std::to_string(x_train.rows()));

  const auto n = static_cast<std::size_t>(x_train.rows());
  const auto d = static_cast<std::size_t>(x_train.cols());
  ScalingParams params;
  params.centers.resize(d);
  params.scales.resize(d);

  std::vector<double> column(n);
  for (std::size_t j = 0; j < d; ++j) {
    for (std::size_t i = 0; i < n; ++i) {
      const double v = x_train(static_cast<Eigen::Index>(i),
                               static_cast<Eigen::Index>(j));
      if (!std::isfinite(v))
        throw DataError("fit_scaler: non-finite value at row " +
                        std::to_string(i) + ", column " + std::to_string(j));
      column[i] = v;
    }
    params.centers[j] = quantile_type7(column, 0.5);
    const double iqr =
        quantile_type7(column, 0.75) - quantile_type7(column, 0.25);
    const double scale = iqr / 1.349;
    params.scales[j] = scale > 0.0 ? scale : 1.0;
  }
  return params;
}

// Maps raw features to angular coordinates theta in (0, pi). tanh keeps the
// scaled value strictly inside (-1, 1); the clamp only guards rounding at
// saturation.
inline Eigen::MatrixXd transform_to_angles(const Eigen::MatrixXd& x,
                                           const ScalingParams& params) {
  if (static_cast<std::size_t>(x.cols()) != params.dimension())
    throw ConfigError("transform_to_angles: matrix has " +
                      std::to_string(x.cols()) + " columns, scaler expects " +
                      std::to_string(params.dimension()));

  Eigen::MatrixXd theta(x.rows(), x.cols());
  for (Eigen::Index j = 0; j < x.cols(); ++j) {
    const double c = params.centers[static_cast<std::size_t>(j)];
    const double s = params.scales[static_cast<std::size_t>(j)];
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      const double v = x(i, j);
      if (!std::isfinite(v))
        throw DataError("transform_to_angles: non-finite value at row " +
                        std::to_string(i) + ", column " + std::to_string(j));
      const double u = std::tanh((v - c) / s);
      theta(i, j) = std::acos(std::clamp(u, -1.0, 1.0));
    }
  }
  return theta;
}

// Subtracts the training mean from the target; the mean is stored in
// ScalingParams::target_mean by the caller and added back after prediction.
inline std::pair<Eigen::VectorXd, double> center_target(
    const Eigen::VectorXd& y) {
  if (y.size() == 0) throw ConfigError("center_target: empty target");
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (!std::isfinite(y[i]))
      throw DataError("center_target: non-finite target at row " +
                      std::to_string(i));
  }
  const double mean = y.mean();
  return {y.array() - mean, mean};
}

}  // namespace specpath
