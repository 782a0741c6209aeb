#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "specpath/errors.hpp"
#include "specpath/features.hpp"
#include "specpath/paths.hpp"

namespace specpath {

// Accumulated normal equations G = Phi^T Phi, b = Phi^T y over the design
// with intercept column. The full design never has to be materialized:
// chunks stream through accumulate/augment. y_sq_sum tracks sum(y^2) so the
// training residual is recoverable from Gram quantities alone.
struct GramSystem {
  Eigen::MatrixXd gram;    // (1+Q) x (1+Q)
  Eigen::VectorXd moment;  // (1+Q)
  std::size_t n_rows = 0;
  double y_sq_sum = 0.0;

  explicit GramSystem(std::size_t n_paths = 0) {
    const auto dim = static_cast<Eigen::Index>(1 + n_paths);
    gram = Eigen::MatrixXd::Zero(dim, dim);
    moment = Eigen::VectorXd::Zero(dim);
  }

  Eigen::Index dim() const { return gram.rows(); }
};

struct RidgeSolution {
  Eigen::VectorXd beta;  // (c0, A_1, ..., A_Q)
  double lambda = 0.0;
  double jitter_used = 0.0;
};

// Folds one chunk of the design (intercept column included) into the system.
// Associative across chunks up to floating-point reordering.
inline void accumulate(GramSystem& system, const Eigen::MatrixXd& phi,
                       const Eigen::VectorXd& y) {
  if (phi.rows() != y.size())
    throw ConfigError("accumulate: design rows " + std::to_string(phi.rows()) +
                      " != target length " + std::to_string(y.size()));
  if (phi.cols() != system.dim())
    throw ConfigError("accumulate: design has " + std::to_string(phi.cols()) +
                      " columns, system expects " +
                      std::to_string(system.dim()));
  if (phi.rows() == 0) return;
  system.gram.noalias() += phi.transpose() * phi;
  system.moment.noalias() += phi.transpose() * y;
  system.n_rows += static_cast<std::size_t>(phi.rows());
  system.y_sq_sum += y.squaredNorm();
}

// Builds the Gram system for a dictionary in one streaming pass.
inline GramSystem build_gram(const Eigen::MatrixXd& theta,
                             const Eigen::VectorXd& y,
                             std::span<const FrequencyVector> paths,
                             std::size_t chunk_rows = 256) {
  GramSystem system(paths.size());
  const auto n = theta.rows();
  for (Eigen::Index start = 0; start < n;
       start += static_cast<Eigen::Index>(chunk_rows)) {
    const auto count =
        std::min<Eigen::Index>(static_cast<Eigen::Index>(chunk_rows), n - start);
    accumulate(system,
               design_with_intercept(theta.middleRows(start, count), paths),
               y.segment(start, count));
  }
  return system;
}

// Trial system for old + new paths. Copies the old blocks and accumulates
// only the cross term C = Phi_old^T Phi_new, the new Gram block, and the new
// moment entries in a single pass over the training rows. Non-destructive:
// rejecting the trial simply drops the returned value.
inline GramSystem augment(const GramSystem& old_system,
                          const Eigen::MatrixXd& theta,
                          const Eigen::VectorXd& y,
                          std::span<const FrequencyVector> old_paths,
                          std::span<const FrequencyVector> new_paths,
                          std::size_t chunk_rows = 256) {
  if (old_system.dim() != static_cast<Eigen::Index>(1 + old_paths.size()))
    throw ConfigError("augment: old system does not match old dictionary");
  for (const auto& candidate : new_paths) {
    for (const auto& existing : old_paths) {
      if (candidate == existing)
        throw ConfigError("augment: candidate " + candidate.to_string() +
                          " already in dictionary");
    }
  }

  const auto q_old = static_cast<Eigen::Index>(old_paths.size());
  const auto q_new = static_cast<Eigen::Index>(new_paths.size());
  GramSystem trial(old_paths.size() + new_paths.size());
  trial.n_rows = old_system.n_rows;
  trial.y_sq_sum = old_system.y_sq_sum;
  trial.gram.topLeftCorner(1 + q_old, 1 + q_old) = old_system.gram;
  trial.moment.head(1 + q_old) = old_system.moment;
  if (q_new == 0) return trial;

  Eigen::MatrixXd cross = Eigen::MatrixXd::Zero(1 + q_old, q_new);
  Eigen::MatrixXd gram_new = Eigen::MatrixXd::Zero(q_new, q_new);
  Eigen::VectorXd moment_new = Eigen::VectorXd::Zero(q_new);
  const auto n = theta.rows();
  for (Eigen::Index start = 0; start < n;
       start += static_cast<Eigen::Index>(chunk_rows)) {
    const auto count =
        std::min<Eigen::Index>(static_cast<Eigen::Index>(chunk_rows), n - start);
    const Eigen::MatrixXd chunk = theta.middleRows(start, count);
    const Eigen::MatrixXd phi_old = design_with_intercept(chunk, old_paths);
    const Eigen::MatrixXd phi_new = evaluate_block(chunk, new_paths).values;
    cross.noalias() += phi_old.transpose() * phi_new;
    gram_new.noalias() += phi_new.transpose() * phi_new;
    moment_new.noalias() += phi_new.transpose() * y.segment(start, count);
  }
  trial.gram.topRightCorner(1 + q_old, q_new) = cross;
  trial.gram.bottomLeftCorner(q_new, 1 + q_old) = cross.transpose();
  trial.gram.bottomRightCorner(q_new, q_new) = gram_new;
  trial.moment.tail(q_new) = moment_new;
  return trial;
}

// Solves (G + lambda I) beta = b by Cholesky factorization. The penalty
// applies to every coefficient including the intercept; targets are centered
// upstream, so the intercept penalty is benign. Near-singular systems (e.g.
// collinear candidate directions) get a diagonal jitter ladder: starting at
// 1e-10 * trace/dim and escalating tenfold up to three retries.
inline RidgeSolution solve_ridge(const GramSystem& system, double lambda) {
  if (lambda < 0.0) throw ConfigError("solve_ridge: lambda must be >= 0");
  if (system.n_rows == 0) throw ConfigError("solve_ridge: empty system");

  const auto dim = system.dim();
  const double base_jitter =
      1e-10 * system.gram.trace() / static_cast<double>(dim);
  double jitter = 0.0;
  for (int attempt = 0; attempt <= 3; ++attempt) {
    Eigen::MatrixXd lhs = system.gram;
    lhs.diagonal().array() += lambda + jitter;
    Eigen::LLT<Eigen::MatrixXd> llt(lhs);
    if (llt.info() == Eigen::Success) {
      RidgeSolution solution;
      solution.beta = llt.solve(system.moment);
      solution.lambda = lambda;
      solution.jitter_used = jitter;
      if (solution.beta.allFinite()) return solution;
    }
    jitter = (attempt == 0) ? base_jitter : jitter * 10.0;
  }

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eigs(system.gram);
  const double lo = eigs.eigenvalues().minCoeff();
  const double hi = eigs.eigenvalues().maxCoeff();
  throw NumericalError(
      "solve_ridge: factorization failed after max jitter (dim=" +
      std::to_string(dim) + ", eigenvalue range [" + std::to_string(lo) + ", " +
      std::to_string(hi) + "], lambda=" + std::to_string(lambda) + ")");
}

// Coefficient of determination of de-centered predictions against the raw
// validation target. Scoring is always done with explicit predictions, never
// from Gram quantities.
inline double validation_score(const RidgeSolution& solution,
                               const Eigen::MatrixXd& phi_val,
                               const Eigen::VectorXd& y_val,
                               double target_mean) {
  if (phi_val.rows() != y_val.size() || phi_val.cols() != solution.beta.size())
    throw ConfigError("validation_score: dimension mismatch");
  const double mean = y_val.mean();
  const double ss_tot = (y_val.array() - mean).square().sum();
  if (ss_tot <= 0.0)
    throw DataError("validation_score: zero-variance validation target");
  const Eigen::VectorXd yhat =
      (phi_val * solution.beta).array() + target_mean;
  const double ss_res = (y_val - yhat).squaredNorm();
  return 1.0 - ss_res / ss_tot;
}

// Training residual sum of squares recovered from Gram quantities:
// ||y - Phi beta||^2 = y'y - 2 beta'b + beta'G beta. Used for trace
// diagnostics only.
inline double rss_from_gram(const GramSystem& system,
                            const Eigen::VectorXd& beta) {
  return system.y_sq_sum - 2.0 * beta.dot(system.moment) +
         beta.dot(system.gram * beta);
}

inline double train_r2_from_gram(const GramSystem& system,
                                 const Eigen::VectorXd& beta) {
  const double n = static_cast<double>(system.n_rows);
  const double mean = system.moment[0] / n;  // intercept column of ones
  const double ss_tot = system.y_sq_sum - n * mean * mean;
  if (ss_tot <= 0.0) return 0.0;
  return 1.0 - rss_from_gram(system, beta) / ss_tot;
}

// Ridge objective ||y - Phi beta||^2 + lambda ||beta||^2 from the
// accumulated system.
inline double penalized_objective(const GramSystem& system,
                                  const Eigen::VectorXd& beta, double lambda) {
  return rss_from_gram(system, beta) + lambda * beta.squaredNorm();
}

}  // namespace specpath
