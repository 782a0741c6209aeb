#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "specpath/errors.hpp"
#include "specpath/features.hpp"
#include "specpath/model.hpp"
#include "specpath/paths.hpp"
#include "specpath/scaling.hpp"
#include "specpath/solver.hpp"

namespace specpath {

// Features ranked by |Pearson correlation| between their angular column and
// the centered target, strongest first; undefined correlations (constant
// columns) rank last. Ties break toward the lower index, so the ranking is
// deterministic.
inline std::vector<int> pearson_importance_order(const Eigen::MatrixXd& theta,
                                                 const Eigen::VectorXd& y_centered) {
  const auto d = theta.cols();
  std::vector<std::pair<double, int>> scored;
  scored.reserve(static_cast<std::size_t>(d));
  const double y_var = y_centered.squaredNorm();
  for (Eigen::Index j = 0; j < d; ++j) {
    const Eigen::VectorXd col =
        theta.col(j).array() - theta.col(j).mean();
    const double col_var = col.squaredNorm();
    double strength = 0.0;
    if (col_var > 0.0 && y_var > 0.0)
      strength = std::abs(col.dot(y_centered)) / std::sqrt(col_var * y_var);
    scored.emplace_back(strength, static_cast<int>(j));
  }
  std::stable_sort(scored.begin(), scored.end(), [](const auto& a, const auto& b) {
    return a.first > b.first;
  });
  std::vector<int> order;
  order.reserve(scored.size());
  for (const auto& [strength, j] : scored) order.push_back(j);
  return order;
}

// Doubles the block size after two consecutive strong accepts (improvement
// at least 10x the acceptance tolerance), halves it after any reject, always
// staying inside the configured bounds.
class BlockSizeController {
 public:
  BlockSizeController(int initial, int lower, int upper)
      : size_(initial), lower_(lower), upper_(upper) {}

  int size() const { return size_; }

  void record_accept(double improvement, double min_improvement) {
    if (improvement >= 10.0 * min_improvement) {
      if (++strong_streak_ >= 2) {
        size_ = std::min(size_ * 2, upper_);
        strong_streak_ = 0;
      }
    } else {
      strong_streak_ = 0;
    }
  }

  void record_reject() {
    strong_streak_ = 0;
    size_ = std::max(size_ / 2, lower_);
  }

 private:
  int size_;
  int lower_;
  int upper_;
  int strong_streak_ = 0;
};

// Per-support-size supply of candidates. Enumeration streams in increasing
// total order; accepted paths additionally queue the next harmonic along
// their primitive ray, which is served ahead of fresh enumeration.
//
// Proposal is non-destructive: a block that loses the per-iteration
// comparison stays at the head of its stream and is re-proposed later.
// Candidates leave the frontier only through consume_block, which the
// search invokes for the selected block -- whether it was accepted into the
// dictionary or rejected for insufficient improvement. Rejected candidates
// never return.
class CandidateFrontier {
 public:
  CandidateFrontier(int dimension, const std::vector<int>& k_set,
                    std::vector<int> feature_order) {
    for (int k : k_set) {
      if (lanes_.count(k)) continue;
      lanes_.emplace(k, Lane{CandidateStream(dimension, k, feature_order),
                             {}, {}, {}});
    }
  }

  // The next `count` available candidates for support size k: queued
  // harmonic-ladder successors first, then fresh enumeration. Exhausted
  // streams (k > D) yield empty blocks forever.
  std::vector<FrequencyVector> next_block(int k, int count) {
    std::vector<FrequencyVector> block;
    auto it = lanes_.find(k);
    if (it == lanes_.end()) return block;
    Lane& lane = it->second;

    collect(lane.ladder, count, block);
    collect(lane.buffer, count, block);
    while (static_cast<int>(block.size()) < count &&
           !lane.stream.exhausted()) {
      FrequencyVector m = lane.stream.next();
      const Key key = key_of(m);
      if (lane.queued.count(key)) continue;  // already waiting in the ladder
      lane.queued.insert(key);
      if (!removed_.count(key)) block.push_back(m);
      lane.buffer.push_back(std::move(m));
    }
    return block;
  }

  // Permanently removes a selected block from the frontier.
  void consume_block(const std::vector<FrequencyVector>& block) {
    for (const auto& m : block) removed_.insert(key_of(m));
  }

  // Queues the harmonic ladder successors of an accepted block.
  void notify_accepted(const std::vector<FrequencyVector>& accepted) {
    for (const auto& m : accepted) {
      const RayDecomposition decomp = primitive_decompose(m);
      FrequencyVector next = harmonic_of(decomp.ray, decomp.harmonic + 1);
      auto it = lanes_.find(next.sparsity());
      if (it == lanes_.end()) continue;
      const Key key = key_of(next);
      if (removed_.count(key) || it->second.queued.count(key)) continue;
      it->second.queued.insert(key);
      it->second.ladder.push_back(std::move(next));
    }
  }

 private:
  using Key = std::pair<std::vector<int>, std::vector<int>>;

  struct Lane {
    CandidateStream stream;
    std::deque<FrequencyVector> ladder;  // served before fresh enumeration
    std::deque<FrequencyVector> buffer;  // enumerated but not yet selected
    std::set<Key> queued;                // everything in ladder or buffer
  };

  static Key key_of(const FrequencyVector& m) { return {m.support, m.coeffs}; }

  // Appends up to `count` still-available entries, dropping removed ones.
  void collect(std::deque<FrequencyVector>& queue, int count,
               std::vector<FrequencyVector>& block) {
    for (auto it = queue.begin();
         it != queue.end() && static_cast<int>(block.size()) < count;) {
      if (removed_.count(key_of(*it))) {
        it = queue.erase(it);
      } else {
        block.push_back(*it);
        ++it;
      }
    }
  }

  std::map<int, Lane> lanes_;
  std::set<Key> removed_;
};

// Index of the winning ridge strength: argmax of the validation scores, ties
// broken toward the larger lambda (the grids are ascending, so stronger
// regularization wins a dead heat).
inline std::size_t select_lambda_index(const std::vector<double>& scores) {
  if (scores.empty()) throw ConfigError("select_lambda: no scores");
  std::size_t best = 0;
  for (std::size_t i = 1; i < scores.size(); ++i) {
    if (scores[i] >= scores[best]) best = i;
  }
  return best;
}

namespace detail {

// Deterministic tie-break between equally scoring blocks: compare the path
// lists under the (L, support, coeffs) total order.
inline bool block_order_less(const std::vector<FrequencyVector>& a,
                             const std::vector<FrequencyVector>& b) {
  return std::lexicographical_compare(a.begin(), a.end(), b.begin(), b.end(),
                                      path_less);
}

struct CandidateOutcome {
  std::vector<FrequencyVector> block;
  GramSystem trial;
  RidgeSolution solution;
  double val_r2 = 0.0;
  double lambda = 0.0;

  CandidateOutcome() : trial(0) {}
};

}  // namespace detail

// Forward greedy selection. Proposes one candidate block per support size
// each iteration, evaluates each by an exact ridge solve on the augmented
// normal equations, scores on the validation split, and appends the best
// block when it clears the improvement tolerance. The ridge strength is
// chosen on the first iteration and held fixed, with an optional final
// resweep over the full grid.
inline SpectralModel fit(const Eigen::MatrixXd& x_train,
                         const Eigen::VectorXd& y_train,
                         const Eigen::MatrixXd& x_val,
                         const Eigen::VectorXd& y_val,
                         const FitConfig& config = {}) {
  config.validate();
  if (x_train.cols() != x_val.cols())
    throw ConfigError("fit: train/validation dimension mismatch");
  if (x_train.rows() != y_train.size() || x_val.rows() != y_val.size())
    throw ConfigError("fit: feature/target row mismatch");
  if (x_train.rows() < 2) throw ConfigError("fit: need at least 2 training rows");

  const int dimension = static_cast<int>(x_train.cols());
  SpectralModel model;
  model.scaling = fit_scaler(x_train);
  auto [y_centered, target_mean] = center_target(y_train);
  model.scaling.target_mean = target_mean;

  const Eigen::MatrixXd theta_train = transform_to_angles(x_train, model.scaling);
  const Eigen::MatrixXd theta_val = transform_to_angles(x_val, model.scaling);

  // Intercept-only starting point.
  GramSystem gram = build_gram(theta_train, y_centered, {});
  Eigen::MatrixXd phi_val = Eigen::MatrixXd::Ones(theta_val.rows(), 1);

  model.intercept = 0.0;
  model.amplitudes = Eigen::VectorXd();
  model.lambda_star = config.lambda_grid.back();

  // A flat target cannot be scored; return the degenerate intercept model.
  const double val_mean = y_val.mean();
  const double val_ss = (y_val.array() - val_mean).square().sum();
  const double train_ss = y_centered.squaredNorm();
  if (val_ss <= 0.0 || train_ss <= 0.0) return model;

  const std::vector<int> importance =
      pearson_importance_order(theta_train, y_centered);
  std::vector<int> k_set = config.k_set;  // treated as a set
  std::sort(k_set.begin(), k_set.end());
  k_set.erase(std::unique(k_set.begin(), k_set.end()), k_set.end());
  CandidateFrontier frontier(dimension, k_set, importance);
  BlockSizeController block_size(config.block_size, config.block_size_min,
                                 config.block_size_max);

  // Baseline score of the intercept-only model.
  RidgeSolution current = solve_ridge(gram, config.lambda_grid.back());
  double best_val_r2 = validation_score(current, phi_val, y_val, target_mean);

  std::optional<double> lambda_star;
  int strikes = 0;
  int iteration = 0;

  while (static_cast<int>(model.paths.size()) < config.max_paths &&
         strikes < config.patience) {
    ++iteration;
    std::optional<detail::CandidateOutcome> best;
    bool any_candidates = false;

    for (int k : k_set) {
      std::vector<FrequencyVector> block = frontier.next_block(k, block_size.size());
      if (block.empty()) continue;
      if (static_cast<int>(model.paths.size() + block.size()) > config.max_paths)
        block.resize(static_cast<std::size_t>(config.max_paths) -
                     model.paths.size());
      if (block.empty()) continue;
      any_candidates = true;

      detail::CandidateOutcome outcome;
      outcome.block = block;
      outcome.trial = augment(gram, theta_train, y_centered, model.paths, block);
      const Eigen::MatrixXd phi_val_new =
          evaluate_block(theta_val, block).values;
      Eigen::MatrixXd phi_val_trial(phi_val.rows(),
                                    phi_val.cols() + phi_val_new.cols());
      phi_val_trial << phi_val, phi_val_new;

      const std::vector<double> lambdas =
          lambda_star ? std::vector<double>{*lambda_star} : config.lambda_grid;
      std::vector<RidgeSolution> solutions;
      std::vector<double> scores;
      for (double lambda : lambdas) {
        solutions.push_back(solve_ridge(outcome.trial, lambda));
        scores.push_back(
            validation_score(solutions.back(), phi_val_trial, y_val, target_mean));
      }
      const std::size_t pick = select_lambda_index(scores);
      outcome.val_r2 = scores[pick];
      outcome.lambda = lambdas[pick];
      outcome.solution = std::move(solutions[pick]);

      if (!best || outcome.val_r2 > best->val_r2 ||
          (outcome.val_r2 == best->val_r2 &&
           detail::block_order_less(outcome.block, best->block))) {
        best = std::move(outcome);
      }
    }

    if (!any_candidates) break;  // every frontier exhausted

    TraceEntry entry;
    entry.iteration = iteration;
    entry.block_size = block_size.size();
    entry.support_size = best->block.front().sparsity();
    entry.added = best->block;
    entry.lambda = best->lambda;
    entry.val_r2 = best->val_r2;
    entry.train_r2 = train_r2_from_gram(best->trial, best->solution.beta);

    frontier.consume_block(best->block);
    const double improvement = best->val_r2 - best_val_r2;
    if (improvement >= config.min_improvement) {
      model.paths.insert(model.paths.end(), best->block.begin(),
                         best->block.end());
      gram = std::move(best->trial);
      const Eigen::MatrixXd phi_val_new =
          evaluate_block(theta_val, best->block).values;
      Eigen::MatrixXd grown(phi_val.rows(), phi_val.cols() + phi_val_new.cols());
      grown << phi_val, phi_val_new;
      phi_val = std::move(grown);
      current = std::move(best->solution);
      best_val_r2 = best->val_r2;
      frontier.notify_accepted(best->block);
      block_size.record_accept(improvement, config.min_improvement);
      strikes = 0;
      entry.accepted = true;
    } else {
      block_size.record_reject();
      ++strikes;
      entry.accepted = false;
    }
    if (!lambda_star) lambda_star = best->lambda;

    entry.n_paths = model.paths.size();
    model.fit_trace.push_back(std::move(entry));
  }

  if (!lambda_star) lambda_star = config.lambda_grid.back();

  // Re-solve the accepted dictionary at the fixed lambda (the kept solution
  // may correspond to a rejected trial's lambda on iteration 1).
  current = solve_ridge(gram, *lambda_star);

  if (config.final_resweep) {
    std::vector<RidgeSolution> solutions;
    std::vector<double> scores;
    for (double lambda : config.lambda_grid) {
      solutions.push_back(solve_ridge(gram, lambda));
      scores.push_back(
          validation_score(solutions.back(), phi_val, y_val, target_mean));
    }
    const std::size_t pick = select_lambda_index(scores);
    current = std::move(solutions[pick]);
    *lambda_star = config.lambda_grid[pick];
  }

  model.lambda_star = *lambda_star;
  model.intercept = current.beta[0];
  model.amplitudes = current.beta.tail(current.beta.size() - 1);
  return model;
}

}  // namespace specpath
