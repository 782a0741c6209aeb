#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <string>
#include <vector>

#include "specpath/errors.hpp"
#include "specpath/features.hpp"
#include "specpath/model.hpp"

namespace specpath {

// Exact partial derivatives of the fitted predictor with respect to the raw
// inputs. Composing theta = arccos(tanh(v)) with v = (x - c)/s gives
// d(theta)/dx = -sech(v)/s: the 1/sqrt(1-u^2) factor of arccos cancels one
// power of sech, leaving a bounded expression even at tanh saturation.
// Hence d(yhat)/dx_j = (1/s_j) sech(v_j) sum_q A_q m_qj sin(m_q . theta).
inline Eigen::MatrixXd sensitivity(const SpectralModel& model,
                                   const Eigen::MatrixXd& x) {
  if (!model.is_fitted()) throw StateError("sensitivity: model is not fitted");
  if (static_cast<std::size_t>(x.cols()) != model.dimension())
    throw ConfigError("sensitivity: data dimension mismatch");

  const Eigen::MatrixXd theta = transform_to_angles(x, model.scaling);
  Eigen::MatrixXd grad = Eigen::MatrixXd::Zero(x.rows(), x.cols());
  for (Eigen::Index n = 0; n < x.rows(); ++n) {
    for (std::size_t q = 0; q < model.paths.size(); ++q) {
      const FrequencyVector& m = model.paths[q];
      const double weight =
          model.amplitudes[static_cast<Eigen::Index>(q)] *
          std::sin(path_phase(m, theta, n));
      for (std::size_t i = 0; i < m.support.size(); ++i)
        grad(n, m.support[i]) += weight * m.coeffs[i];
    }
    for (Eigen::Index j = 0; j < x.cols(); ++j) {
      const double c = model.scaling.centers[static_cast<std::size_t>(j)];
      const double s = model.scaling.scales[static_cast<std::size_t>(j)];
      const double v = (x(n, j) - c) / s;
      grad(n, j) *= 1.0 / (s * std::cosh(v));
    }
  }
  return grad;
}

struct ImportanceResult {
  Eigen::VectorXd scores;  // normalized to sum 1
  bool degenerate = false;  // true when all sensitivities vanish
};

// Mean absolute partial derivative per feature, normalized to sum to one.
// An all-zero model (no paths, or amplitudes that never move the output)
// yields the uniform vector with the degenerate flag set.
inline ImportanceResult importance(const SpectralModel& model,
                                   const Eigen::MatrixXd& x) {
  if (x.rows() < 1) throw ConfigError("importance: need at least one sample");
  const Eigen::MatrixXd grad = sensitivity(model, x);
  ImportanceResult result;
  result.scores = grad.cwiseAbs().colwise().mean();
  const double total = result.scores.sum();
  if (total > 0.0) {
    result.scores /= total;
  } else {
    result.scores.setConstant(1.0 / static_cast<double>(x.cols()));
    result.degenerate = true;
  }
  return result;
}

namespace detail {

inline std::string format_fixed(double value, int decimals) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.*f", decimals, value);
  return buf;
}

inline std::string format_general(double value) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", value);
  return buf;
}

// "2theta_a - theta_b" style rendering of a path's phase.
inline std::string render_phase(const FrequencyVector& m,
                                const std::vector<std::string>& names) {
  std::string out;
  for (std::size_t i = 0; i < m.support.size(); ++i) {
    const int coeff = m.coeffs[i];
    if (i == 0) {
      if (coeff < 0) out += "-";  // cannot happen for canonical paths
    } else {
      out += coeff < 0 ? " - " : " + ";
    }
    const int mag = std::abs(coeff);
    if (mag != 1) out += std::to_string(mag);
    out += "θ_" + names[static_cast<std::size_t>(m.support[i])];
  }
  return out;
}

}  // namespace detail

// Renders the fitted model as an explicit harmonic expansion: the
// de-centered intercept, the top_n terms by |amplitude| (ties keep dictionary
// order), and a footer defining each referenced angular variable with its
// fitted center and scale.
inline std::string render_expression(const SpectralModel& model, int top_n,
                                     std::vector<std::string> feature_names = {}) {
  if (!model.is_fitted())
    throw StateError("render_expression: model is not fitted");
  if (feature_names.empty()) {
    feature_names.resize(model.dimension());
    for (std::size_t j = 0; j < feature_names.size(); ++j)
      feature_names[j] = "x" + std::to_string(j);
  }
  if (feature_names.size() != model.dimension())
    throw ConfigError("render_expression: feature name count mismatch");

  std::vector<std::size_t> by_amplitude(model.paths.size());
  std::iota(by_amplitude.begin(), by_amplitude.end(), 0u);
  std::stable_sort(by_amplitude.begin(), by_amplitude.end(),
                   [&](std::size_t a, std::size_t b) {
                     return std::abs(model.amplitudes[static_cast<Eigen::Index>(a)]) >
                            std::abs(model.amplitudes[static_cast<Eigen::Index>(b)]);
                   });
  const std::size_t shown =
      std::min<std::size_t>(by_amplitude.size(),
                            top_n < 0 ? 0u : static_cast<std::size_t>(top_n));

  std::string out = "y = ";
  out += detail::format_fixed(model.intercept + model.scaling.target_mean, 2);
  std::vector<bool> used(model.dimension(), false);
  for (std::size_t rank = 0; rank < shown; ++rank) {
    const std::size_t q = by_amplitude[rank];
    const double amp = model.amplitudes[static_cast<Eigen::Index>(q)];
    out += amp < 0 ? " - " : " + ";
    out += detail::format_fixed(std::abs(amp), 2);
    out += "·cos(" + detail::render_phase(model.paths[q], feature_names) + ")";
    for (int j : model.paths[q].support) used[static_cast<std::size_t>(j)] = true;
  }
  if (shown < model.paths.size()) out += " + …";

  for (std::size_t j = 0; j < used.size(); ++j) {
    if (!used[j]) continue;
    out += "\nθ_" + feature_names[j] + " = arccos(tanh((" +
           feature_names[j] + " - " +
           detail::format_general(model.scaling.centers[j]) + ")/" +
           detail::format_general(model.scaling.scales[j]) + "))";
  }
  return out;
}

}  // namespace specpath
