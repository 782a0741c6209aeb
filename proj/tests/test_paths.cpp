#include <catch_amalgamated.hpp>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "oracles.hpp"
#include "specpath/paths.hpp"

using namespace specpath;
using Catch::Approx;

namespace {

double eval_cos(const FrequencyVector& m, const Eigen::MatrixXd& theta,
                Eigen::Index row) {
  double phase = 0.0;
  for (std::size_t i = 0; i < m.support.size(); ++i)
    phase += m.coeffs[i] * theta(row, m.support[i]);
  return std::cos(phase);
}

}  // namespace

TEST_CASE("canonicalize flips the global sign") {
  const auto flipped = canonicalize(make_path({-1, 2}));
  CHECK(flipped == make_path({1, -2}));
  const auto kept = canonicalize(make_path({3, -1}));
  CHECK(kept == make_path({3, -1}));
  CHECK(canonicalize(kept) == kept);  // idempotent
}

TEST_CASE("canonicalize rejects the constant vector") {
  CHECK_THROWS_AS(canonicalize(make_path({0, 0})), ConfigError);
}

TEST_CASE("canonicalization preserves the cosine feature") {
  const auto theta = oracles::random_angles(100, 3, 11);
  std::mt19937 rng(5);
  std::uniform_int_distribution<int> coeff(-4, 4);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<int> dense(3, 0);
    while (dense == std::vector<int>{0, 0, 0})
      for (int& c : dense) c = coeff(rng);
    const auto m = make_path(dense);
    const auto canonical = canonicalize(m);
    for (Eigen::Index row = 0; row < theta.rows(); ++row)
      CHECK(eval_cos(m, theta, row) ==
            Approx(eval_cos(canonical, theta, row)).margin(1e-15));
  }
}

TEST_CASE("primitive decomposition") {
  const auto d1 = primitive_decompose(make_path({2, 4}));
  CHECK(d1.harmonic == 2);
  CHECK(d1.ray == make_path({1, 2}));

  const auto d2 = primitive_decompose(make_path({3, -3}));
  CHECK(d2.harmonic == 3);
  CHECK(d2.ray == make_path({1, -1}));

  const auto d3 = primitive_decompose(make_path({1, 0, 2}));
  CHECK(d3.harmonic == 1);
  CHECK(d3.ray == make_path({1, 0, 2}));
}

TEST_CASE("decompose then recompose is the identity") {
  const auto paths = oracles::random_paths(5, 40, 6, 23);
  for (const auto& m : paths) {
    const auto decomp = primitive_decompose(m);
    CHECK(harmonic_of(decomp.ray, decomp.harmonic) == m);
    int g = 0;
    for (int c : decomp.ray.coeffs) g = std::gcd(g, std::abs(c));
    CHECK(g == 1);
    CHECK(decomp.ray.is_canonical());
  }
}

TEST_CASE("enumeration base cases") {
  const auto k1 = enumerate_candidates(2, 1, 1);
  REQUIRE(k1.size() == 2);
  CHECK(k1[0] == make_path({1, 0}));
  CHECK(k1[1] == make_path({0, 1}));

  const auto k2 = enumerate_candidates(2, 2, 2);
  REQUIRE(k2.size() == 2);
  CHECK(k2[0] == make_path({1, 1}));
  CHECK(k2[1] == make_path({1, -1}));

  CHECK(enumerate_candidates(3, 2, 3).size() == 12);
  CHECK(enumerate_candidates(2, 3, 3).empty());  // k > D
  CHECK(enumerate_candidates(3, 2, 1).empty());  // k > L
}

TEST_CASE("enumeration matches brute force over the integer box") {
  for (int d = 1; d <= 4; ++d) {
    for (int k = 1; k <= d; ++k) {
      for (int l = k; l <= k + 3; ++l) {
        const auto got = enumerate_candidates(d, k, l);
        const auto expected = oracles::brute_force_candidates(d, k, l);
        REQUIRE(got.size() == expected.size());
        std::set<std::vector<int>> got_set, expected_set;
        for (const auto& m : got) got_set.insert(to_dense(m));
        for (const auto& m : expected) expected_set.insert(m);
        CHECK(got_set == expected_set);
      }
    }
  }
}

TEST_CASE("enumeration count formula") {
  // C(D,k) * C(L-1,k-1) * 2^(k-1)
  CHECK(enumerate_candidates(5, 2, 4).size() == 10u * 3u * 2u);
  CHECK(enumerate_candidates(6, 3, 5).size() == 20u * 6u * 4u);
  CHECK(enumerate_candidates(4, 4, 4).size() == 1u * 1u * 8u);
}

TEST_CASE("no duplicates across total orders") {
  std::set<std::vector<int>> seen;
  for (int l = 2; l <= 6; ++l) {
    for (const auto& m : enumerate_candidates(4, 2, l)) {
      CHECK(m.is_canonical());
      CHECK(seen.insert(to_dense(m)).second);
    }
  }
}

TEST_CASE("importance order permutes exploration, not the candidate set") {
  const std::vector<int> ranked = {2, 0, 1};
  const auto ordered = enumerate_candidates(3, 1, 1, ranked);
  REQUIRE(ordered.size() == 3);
  CHECK(ordered[0] == make_path({0, 0, 1}));
  CHECK(ordered[1] == make_path({1, 0, 0}));
  CHECK(ordered[2] == make_path({0, 1, 0}));

  const auto plain = enumerate_candidates(3, 2, 3);
  const auto permuted = enumerate_candidates(3, 2, 3, ranked);
  std::set<std::vector<int>> a, b;
  for (const auto& m : plain) a.insert(to_dense(m));
  for (const auto& m : permuted) b.insert(to_dense(m));
  CHECK(a == b);
}

TEST_CASE("tensor expansion of a 2-D product") {
  const auto terms = tensor_expand(make_path({1, 2}));
  REQUIRE(terms.size() == 2);
  CHECK(terms[0].first == Approx(0.5));
  CHECK(terms[0].second == make_path({1, 2}));
  CHECK(terms[1].first == Approx(0.5));
  CHECK(terms[1].second == make_path({1, -2}));
}

TEST_CASE("tensor expansion weights for three factors") {
  const auto terms = tensor_expand(make_path({1, 1, 1}));
  REQUIRE(terms.size() == 4);
  for (const auto& [w, m] : terms) CHECK(w == Approx(0.25));
}

TEST_CASE("tensor expansion of the empty product is the intercept") {
  FrequencyVector none;
  none.dimension = 3;
  const auto terms = tensor_expand(none);
  REQUIRE(terms.size() == 1);
  CHECK(terms[0].first == Approx(1.0));
  CHECK(terms[0].second.support.empty());
}

TEST_CASE("tensor expansion equals the product of cosines pointwise") {
  std::mt19937 rng(31);
  std::uniform_int_distribution<int> degree(1, 5);
  const auto theta = oracles::random_angles(100, 4, 17);
  for (int k = 1; k <= 4; ++k) {
    for (int trial = 0; trial < 10; ++trial) {
      std::vector<int> dense(4, 0);
      for (int i = 0; i < k; ++i) dense[static_cast<std::size_t>(i)] = degree(rng);
      const auto m = make_path(dense);
      const auto terms = tensor_expand(m);
      REQUIRE(terms.size() == (1u << (k - 1)));
      for (Eigen::Index row = 0; row < theta.rows(); ++row) {
        double product = 1.0;
        for (std::size_t i = 0; i < m.support.size(); ++i)
          product *= std::cos(m.coeffs[i] * theta(row, m.support[i]));
        double sum = 0.0;
        for (const auto& [w, term] : terms) sum += w * eval_cos(term, theta, row);
        CHECK(product == Approx(sum).margin(1e-12));
      }
    }
  }
}

TEST_CASE("tensor expansion reproduces tensor-product Chebyshev features") {
  std::mt19937 rng(43);
  std::uniform_real_distribution<double> unit(-0.99, 0.99);
  std::uniform_int_distribution<int> degree(1, 4);
  for (int trial = 0; trial < 30; ++trial) {
    std::vector<int> dense = {degree(rng), degree(rng), 0, degree(rng)};
    const auto m = make_path(dense);
    Eigen::MatrixXd x(1, 4);
    for (Eigen::Index j = 0; j < 4; ++j) x(0, j) = unit(rng);
    Eigen::MatrixXd theta = x.array().acos();
    double product = 1.0;
    for (std::size_t i = 0; i < m.support.size(); ++i)
      product *= oracles::chebyshev_t(m.coeffs[i], x(0, m.support[i]));
    double sum = 0.0;
    for (const auto& [w, term] : tensor_expand(m))
      sum += w * eval_cos(term, theta, 0);
    CHECK(product == Approx(sum).margin(1e-12));
  }
}

TEST_CASE("path total order is reproducible") {
  const auto a = make_path({1, 1, 0});
  const auto b = make_path({2, 0, 0});
  const auto c = make_path({0, 1, 1});
  CHECK(path_less(a, c));   // same L, earlier support
  CHECK(path_less(b, c));
  CHECK(!path_less(a, a));
  const auto low = make_path({1, 0, 0});
  CHECK(path_less(low, a));  // smaller L first
}
