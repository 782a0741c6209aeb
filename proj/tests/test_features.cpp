#include <catch_amalgamated.hpp>

#include <cmath>

#include "oracles.hpp"
#include "specpath/features.hpp"

using namespace specpath;
using Catch::Approx;

TEST_CASE("evaluate_block exact angle arithmetic") {
  Eigen::MatrixXd theta(2, 2);
  theta << 0.0, 1.3, M_PI / 2, M_PI;
  const std::vector<FrequencyVector> paths = {make_path({1, 0}),
                                              make_path({2, -1})};
  const DesignBlock block = evaluate_block(theta, paths);
  CHECK(block.values(0, 0) == Approx(1.0));                    // cos(0)
  CHECK(block.values(1, 1) == Approx(std::cos(M_PI - M_PI)));  // == 1
  CHECK(block.values(1, 1) == Approx(1.0));
}

TEST_CASE("evaluate_block matches the naive dense oracle") {
  const auto theta = oracles::random_angles(50, 3, 77);
  const std::vector<FrequencyVector> paths = {make_path({3, 1, -2})};
  const DesignBlock block = evaluate_block(theta, paths);
  const Eigen::MatrixXd expected =
      oracles::dense_design(theta, {{3, 1, -2}}, false);
  for (Eigen::Index i = 0; i < theta.rows(); ++i) {
    CHECK(block.values(i, 0) == Approx(expected(i, 0)).margin(1e-15));
    CHECK(std::abs(block.values(i, 0)) <= 1.0);
  }
}

TEST_CASE("evaluate_block rejects dimension mismatch") {
  const auto theta = oracles::random_angles(4, 2, 3);
  const std::vector<FrequencyVector> paths = {make_path({1, 0, 1})};
  CHECK_THROWS_AS(evaluate_block(theta, paths), ConfigError);
}

TEST_CASE("harmonics along a ray follow the Chebyshev recurrence") {
  const auto theta = oracles::random_angles(40, 2, 123);
  const auto ray = make_path({2, -1});
  for (int r = 1; r <= 5; ++r) {
    const auto m = harmonic_of(ray, r);
    const DesignBlock block =
        evaluate_block(theta, std::vector<FrequencyVector>{m, ray});
    for (Eigen::Index i = 0; i < theta.rows(); ++i) {
      const double base = block.values(i, 1);  // cos(p . theta)
      CHECK(block.values(i, 0) ==
            Approx(oracles::chebyshev_t(r, base)).margin(1e-12));
    }
  }
}

namespace {

SpectralModel tiny_model(std::vector<FrequencyVector> paths,
                         std::vector<double> amplitudes, double intercept,
                         double target_mean, std::size_t d) {
  SpectralModel model;
  model.paths = std::move(paths);
  model.amplitudes = Eigen::Map<const Eigen::VectorXd>(
      amplitudes.data(), static_cast<Eigen::Index>(amplitudes.size()));
  model.intercept = intercept;
  model.scaling.centers.assign(d, 0.0);
  model.scaling.scales.assign(d, 1.0);
  model.scaling.target_mean = target_mean;
  return model;
}

}  // namespace

TEST_CASE("empty model predicts the de-centered intercept") {
  const auto model = tiny_model({}, {}, 1.5, 3.0, 2);
  const auto theta = oracles::random_angles(5, 2, 9);
  const Eigen::VectorXd yhat = predict(model, theta);
  for (Eigen::Index i = 0; i < yhat.size(); ++i)
    CHECK(yhat[i] == Approx(4.5));
}

TEST_CASE("single path at zero phase") {
  const auto model = tiny_model({make_path({1, 0})}, {1.0}, 0.0, 3.0, 2);
  Eigen::MatrixXd theta(1, 2);
  theta << 0.0, 2.2;
  CHECK(predict(model, theta)[0] == Approx(1.0 + 3.0));
}

TEST_CASE("predict equals intercept plus design times amplitudes") {
  const auto paths = oracles::random_paths(3, 6, 4, 5);
  std::vector<double> amps = {0.3, -1.2, 0.8, 2.0, -0.1, 0.05};
  const auto model = tiny_model(paths, amps, 0.7, -2.0, 3);
  const auto theta = oracles::random_angles(30, 3, 55);
  const Eigen::VectorXd direct = predict(model, theta);
  const DesignBlock block = evaluate_block(theta, paths);
  const Eigen::VectorXd via_design =
      (block.values * model.amplitudes).array() + model.intercept +
      model.scaling.target_mean;
  for (Eigen::Index i = 0; i < direct.size(); ++i)
    CHECK(direct[i] == Approx(via_design[i]).margin(1e-12));
}

TEST_CASE("prediction is bounded by the amplitude mass") {
  const auto paths = oracles::random_paths(3, 5, 3, 15);
  std::vector<double> amps = {1.0, -2.0, 0.5, 0.25, 3.0};
  const auto model = tiny_model(paths, amps, 0.4, 1.0, 3);
  double mass = 0.0;
  for (double a : amps) mass += std::abs(a);
  const auto theta = oracles::random_angles(200, 3, 71);
  const Eigen::VectorXd yhat = predict(model, theta);
  for (Eigen::Index i = 0; i < yhat.size(); ++i)
    CHECK(std::abs(yhat[i] - model.scaling.target_mean - model.intercept) <=
          mass + 1e-12);
}

TEST_CASE("prediction is linear in the amplitudes") {
  const auto paths = oracles::random_paths(2, 4, 3, 29);
  std::vector<double> amps = {0.5, 1.5, -0.7, 0.2};
  auto model = tiny_model(paths, amps, 0.9, 0.0, 2);
  const auto theta = oracles::random_angles(20, 2, 31);
  const Eigen::VectorXd base = predict(model, theta);
  const double alpha = 2.5;
  model.amplitudes *= alpha;
  const Eigen::VectorXd scaled = predict(model, theta);
  for (Eigen::Index i = 0; i < base.size(); ++i)
    CHECK(scaled[i] - model.intercept ==
          Approx(alpha * (base[i] - model.intercept)).margin(1e-12));
}

TEST_CASE("unfitted model raises a state error") {
  SpectralModel model;
  CHECK_THROWS_AS(predict(model, Eigen::MatrixXd::Zero(1, 1)), StateError);
}
