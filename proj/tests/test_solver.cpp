#include <catch_amalgamated.hpp>

#include <algorithm>
#include <numeric>
#include <random>

#include "oracles.hpp"
#include "specpath/features.hpp"
#include "specpath/solver.hpp"

using namespace specpath;
using Catch::Approx;

TEST_CASE("accumulate basics") {
  GramSystem system(0);
  Eigen::MatrixXd ones = Eigen::MatrixXd::Ones(4, 1);
  Eigen::VectorXd y(4);
  y << 1, 2, 3, 4;
  accumulate(system, ones, y);
  CHECK(system.gram(0, 0) == Approx(4.0));
  CHECK(system.moment[0] == Approx(10.0));
  CHECK(system.n_rows == 4);
  CHECK(system.y_sq_sum == Approx(30.0));

  // empty chunk leaves the system unchanged
  accumulate(system, Eigen::MatrixXd(0, 1), Eigen::VectorXd(0));
  CHECK(system.gram(0, 0) == Approx(4.0));
  CHECK(system.n_rows == 4);

  CHECK_THROWS_AS(accumulate(system, Eigen::MatrixXd::Ones(2, 2), y),
                  ConfigError);
}

TEST_CASE("chunked accumulation agrees with one-shot accumulation") {
  const auto theta = oracles::random_angles(21, 3, 201);
  const auto paths = oracles::random_paths(3, 5, 3, 202);
  std::mt19937 rng(203);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::VectorXd y(21);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = noise(rng);

  const GramSystem whole = build_gram(theta, y, paths, 64);
  const GramSystem rows = build_gram(theta, y, paths, 1);
  const GramSystem odd = build_gram(theta, y, paths, 7);
  CHECK((whole.gram - rows.gram).norm() <= 1e-12 * whole.gram.norm());
  CHECK((whole.gram - odd.gram).norm() <= 1e-12 * whole.gram.norm());
  CHECK((whole.moment - rows.moment).norm() <=
        1e-12 * std::max(1.0, whole.moment.norm()));
  CHECK(whole.n_rows == rows.n_rows);
  CHECK(whole.y_sq_sum == Approx(rows.y_sq_sum));
}

TEST_CASE("gram system matches the dense normal equations") {
  const auto theta = oracles::random_angles(40, 4, 301);
  const auto paths = oracles::random_paths(4, 6, 4, 302);
  std::mt19937 rng(303);
  std::normal_distribution<double> noise(0.0, 2.0);
  Eigen::VectorXd y(40);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = noise(rng);

  std::vector<std::vector<int>> dense;
  for (const auto& m : paths) dense.push_back(to_dense(m));
  const Eigen::MatrixXd phi = oracles::dense_design(theta, dense, true);
  const Eigen::MatrixXd g = phi.transpose() * phi;
  const Eigen::VectorXd b = phi.transpose() * y;

  const GramSystem system = build_gram(theta, y, paths, 13);
  CHECK((system.gram - g).norm() <= 1e-10 * g.norm());
  CHECK((system.moment - b).norm() <= 1e-10 * std::max(1.0, b.norm()));
  CHECK(system.gram(0, 0) == Approx(static_cast<double>(system.n_rows)));
  CHECK((system.gram - system.gram.transpose()).norm() <=
        1e-12 * system.gram.norm());
}

TEST_CASE("augment equals a from-scratch rebuild") {
  const auto theta = oracles::random_angles(35, 4, 401);
  auto paths = oracles::random_paths(4, 8, 3, 402);
  std::mt19937 rng(403);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::VectorXd y(35);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = noise(rng);

  const std::vector<FrequencyVector> old_paths(paths.begin(), paths.begin() + 5);
  const std::vector<FrequencyVector> new_paths(paths.begin() + 5, paths.end());
  const GramSystem old_system = build_gram(theta, y, old_paths, 9);
  const GramSystem trial =
      augment(old_system, theta, y, old_paths, new_paths, 11);
  const GramSystem rebuilt = build_gram(theta, y, paths, 8);
  CHECK((trial.gram - rebuilt.gram).norm() <= 1e-12 * rebuilt.gram.norm());
  CHECK((trial.moment - rebuilt.moment).norm() <=
        1e-12 * std::max(1.0, rebuilt.moment.norm()));
  CHECK(trial.n_rows == rebuilt.n_rows);

  // augmenting with an empty block copies the system
  const GramSystem copy = augment(old_system, theta, y, old_paths, {});
  CHECK((copy.gram - old_system.gram).norm() == 0.0);
  CHECK((copy.moment - old_system.moment).norm() == 0.0);

  // non-destructive: the old system is unchanged by the trial
  const GramSystem again = build_gram(theta, y, old_paths, 9);
  CHECK((old_system.gram - again.gram).norm() == 0.0);

  // duplicates are rejected
  const std::vector<FrequencyVector> dup = {old_paths[2]};
  CHECK_THROWS_AS(augment(old_system, theta, y, old_paths, dup), ConfigError);
}

TEST_CASE("ridge solve on diagonal systems") {
  GramSystem system(1);
  system.gram << 2, 0, 0, 2;
  system.moment << 2, 4;
  system.n_rows = 2;
  const RidgeSolution unpenalized = solve_ridge(system, 0.0);
  CHECK(unpenalized.beta[0] == Approx(1.0));
  CHECK(unpenalized.beta[1] == Approx(2.0));
  const RidgeSolution penalized = solve_ridge(system, 2.0);
  CHECK(penalized.beta[0] == Approx(0.5));
  CHECK(penalized.beta[1] == Approx(1.0));
  CHECK(penalized.jitter_used == 0.0);

  CHECK_THROWS_AS(solve_ridge(system, -1.0), ConfigError);
  CHECK_THROWS_AS(solve_ridge(GramSystem(1), 0.1), ConfigError);
}

TEST_CASE("ridge solve matches an explicit inverse oracle") {
  std::mt19937 rng(71);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::MatrixXd a(12, 6);
  for (Eigen::Index i = 0; i < a.rows(); ++i)
    for (Eigen::Index j = 0; j < a.cols(); ++j) a(i, j) = noise(rng);
  Eigen::VectorXd y(12);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = noise(rng);

  GramSystem system(5);
  system.gram = a.transpose() * a;
  system.moment = a.transpose() * y;
  system.n_rows = 12;
  system.y_sq_sum = y.squaredNorm();

  for (double lambda : {0.0, 0.3, 2.0}) {
    Eigen::MatrixXd lhs = system.gram;
    lhs.diagonal().array() += lambda;
    const Eigen::VectorXd expected = lhs.inverse() * system.moment;
    const RidgeSolution sol = solve_ridge(system, lambda);
    CHECK((sol.beta - expected).norm() <= 1e-8 * std::max(1.0, expected.norm()));
  }
}

TEST_CASE("singular systems climb the jitter ladder") {
  // Two identical columns: exactly singular at lambda 0.
  GramSystem system(1);
  system.gram << 4, 4, 4, 4;
  system.moment << 2, 2;
  system.n_rows = 4;
  const RidgeSolution sol = solve_ridge(system, 0.0);
  CHECK(sol.jitter_used > 0.0);
  CHECK(sol.beta.allFinite());
}

TEST_CASE("lambda zero reproduces least squares on a full-rank system") {
  const auto theta = oracles::random_angles(30, 3, 501);
  const auto paths = oracles::random_paths(3, 4, 3, 502);
  std::mt19937 rng(503);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::VectorXd y(30);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = noise(rng);
  std::vector<std::vector<int>> dense;
  for (const auto& m : paths) dense.push_back(to_dense(m));
  const Eigen::MatrixXd phi = oracles::dense_design(theta, dense, true);

  const GramSystem system = build_gram(theta, y, paths);
  const RidgeSolution sol = solve_ridge(system, 0.0);
  const Eigen::VectorXd ls = phi.colPivHouseholderQr().solve(y);
  CHECK((sol.beta - ls).norm() <= 1e-8 * std::max(1.0, ls.norm()));
}

TEST_CASE("permuting the dictionary permutes the solution") {
  const auto theta = oracles::random_angles(25, 3, 601);
  auto paths = oracles::random_paths(3, 5, 3, 602);
  std::mt19937 rng(603);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::VectorXd y(25);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = noise(rng);

  const GramSystem system = build_gram(theta, y, paths);
  const RidgeSolution sol = solve_ridge(system, 1e-3);

  std::vector<FrequencyVector> shuffled = paths;
  std::vector<std::size_t> perm(paths.size());
  std::iota(perm.begin(), perm.end(), 0u);
  std::shuffle(perm.begin(), perm.end(), rng);
  for (std::size_t i = 0; i < perm.size(); ++i) shuffled[i] = paths[perm[i]];

  const GramSystem shuffled_system = build_gram(theta, y, shuffled);
  const RidgeSolution shuffled_sol = solve_ridge(shuffled_system, 1e-3);
  CHECK(shuffled_sol.beta[0] == Approx(sol.beta[0]).margin(1e-10));
  for (std::size_t i = 0; i < perm.size(); ++i)
    CHECK(shuffled_sol.beta[static_cast<Eigen::Index>(i + 1)] ==
          Approx(sol.beta[static_cast<Eigen::Index>(perm[i] + 1)])
              .margin(1e-10));

  // predictions are invariant under the permutation
  const Eigen::MatrixXd phi = design_with_intercept(theta, paths);
  const Eigen::MatrixXd phi_shuffled = design_with_intercept(theta, shuffled);
  const Eigen::VectorXd yhat = phi * sol.beta;
  const Eigen::VectorXd yhat_shuffled = phi_shuffled * shuffled_sol.beta;
  CHECK((yhat - yhat_shuffled).lpNorm<Eigen::Infinity>() <= 1e-12);
}

TEST_CASE("appending columns never raises the penalized objective") {
  const auto theta = oracles::random_angles(60, 4, 701);
  const auto all_paths = oracles::random_paths(4, 12, 4, 702);
  std::mt19937 rng(703);
  std::normal_distribution<double> noise(0.0, 1.0);
  Eigen::VectorXd y(60);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = noise(rng);

  const double lambda = 1e-2;
  double previous = std::numeric_limits<double>::infinity();
  for (std::size_t q = 0; q <= all_paths.size(); ++q) {
    const std::vector<FrequencyVector> paths(all_paths.begin(),
                                             all_paths.begin() + q);
    const GramSystem system = build_gram(theta, y, paths);
    const RidgeSolution sol = solve_ridge(system, lambda);
    const double objective = penalized_objective(system, sol.beta, lambda);
    CHECK(objective <= previous + 1e-9 * std::max(1.0, std::abs(previous)));
    previous = objective;
  }
}

TEST_CASE("validation scores") {
  RidgeSolution sol;
  sol.beta = Eigen::VectorXd(1);
  sol.beta << 0.0;

  Eigen::VectorXd y(3);
  y << 1, 2, 3;

  // perfect predictions via intercept on a constant target is undefined;
  // craft explicit designs instead
  Eigen::MatrixXd phi(3, 1);
  phi << 1, 1, 1;

  // constant prediction at the validation mean scores zero
  sol.beta[0] = 2.0;
  CHECK(validation_score(sol, phi, y, 0.0) == Approx(0.0));

  // hand-computed mixed case: predictions (1, 2, 4)
  Eigen::MatrixXd phi2(3, 2);
  phi2 << 1, 0, 1, 1, 1, 3;
  RidgeSolution sol2;
  sol2.beta = Eigen::VectorXd(2);
  sol2.beta << 1.0, 1.0;
  CHECK(validation_score(sol2, phi2, y, 0.0) == Approx(0.5));

  // perfect predictions score one
  Eigen::MatrixXd phi3(3, 2);
  phi3 << 1, 0, 1, 1, 1, 2;
  CHECK(validation_score(sol2, phi3, y, 0.0) == Approx(1.0));

  // zero-variance target is undefined
  Eigen::VectorXd flat = Eigen::VectorXd::Constant(3, 5.0);
  CHECK_THROWS_AS(validation_score(sol2, phi3, flat, 0.0), DataError);
}

TEST_CASE("training r2 from gram quantities matches explicit residuals") {
  const auto theta = oracles::random_angles(45, 3, 801);
  const auto paths = oracles::random_paths(3, 5, 3, 802);
  std::mt19937 rng(803);
  std::normal_distribution<double> noise(0.0, 1.5);
  Eigen::VectorXd y(45);
  for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = noise(rng);
  y.array() -= y.mean();

  const GramSystem system = build_gram(theta, y, paths);
  const RidgeSolution sol = solve_ridge(system, 1e-4);
  std::vector<std::vector<int>> dense;
  for (const auto& m : paths) dense.push_back(to_dense(m));
  const Eigen::MatrixXd phi = oracles::dense_design(theta, dense, true);
  const double rss = (y - phi * sol.beta).squaredNorm();
  const double tss = (y.array() - y.mean()).square().sum();
  CHECK(train_r2_from_gram(system, sol.beta) ==
        Approx(1.0 - rss / tss).margin(1e-9));
}
