#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "specpath/errors.hpp"

namespace specpath {

// Sparse signed-integer frequency vector m in Z^D. Only the nonzero entries
// are stored: `support` holds the strictly increasing feature indices and
// `coeffs` the aligned nonzero coefficients. Canonical form fixes the sign
// ambiguity of cos(m.theta) == cos(-m.theta): the coefficient at the smallest
// support index is positive.
struct FrequencyVector {
  std::vector<int> support;
  std::vector<int> coeffs;
  int dimension = 0;

  int sparsity() const { return static_cast<int>(support.size()); }

  // Total order L = sum |m_j|.
  int order() const {
    int l = 0;
    for (int c : coeffs) l += std::abs(c);
    return l;
  }

  bool is_canonical() const {
    return !coeffs.empty() && coeffs.front() > 0;
  }

  int coeff_at(int feature) const {
    const auto it = std::lower_bound(support.begin(), support.end(), feature);
    if (it == support.end() || *it != feature) return 0;
    return coeffs[static_cast<std::size_t>(it - support.begin())];
  }

  bool operator==(const FrequencyVector& other) const {
    return dimension == other.dimension && support == other.support &&
           coeffs == other.coeffs;
  }

  std::string to_string() const {
    std::string out = "(";
    for (std::size_t i = 0; i < support.size(); ++i) {
      if (i) out += ", ";
      out += std::to_string(coeffs[i]) + "@" + std::to_string(support[i]);
    }
    return out + ")";
  }
};

// Total order used for reproducible candidate ranking: total order L first,
// then support tuple, then coefficient tuple.
inline bool path_less(const FrequencyVector& a, const FrequencyVector& b) {
  const int la = a.order(), lb = b.order();
  if (la != lb) return la < lb;
  if (a.support != b.support) return a.support < b.support;
  return a.coeffs < b.coeffs;
}

// Convenience constructor from a dense vector; zero entries are dropped.
inline FrequencyVector make_path(const std::vector<int>& dense) {
  FrequencyVector m;
  m.dimension = static_cast<int>(dense.size());
  for (std::size_t j = 0; j < dense.size(); ++j) {
    if (dense[j] != 0) {
      m.support.push_back(static_cast<int>(j));
      m.coeffs.push_back(dense[j]);
    }
  }
  return m;
}

inline std::vector<int> to_dense(const FrequencyVector& m) {
  std::vector<int> dense(static_cast<std::size_t>(m.dimension), 0);
  for (std::size_t i = 0; i < m.support.size(); ++i)
    dense[static_cast<std::size_t>(m.support[i])] = m.coeffs[i];
  return dense;
}

inline void validate_path(const FrequencyVector& m) {
  if (m.support.size() != m.coeffs.size())
    throw ConfigError("frequency vector: support/coeff length mismatch");
  for (std::size_t i = 0; i < m.support.size(); ++i) {
    if (i > 0 && m.support[i] <= m.support[i - 1])
      throw ConfigError("frequency vector: support not strictly increasing");
    if (m.support[i] < 0 || m.support[i] >= m.dimension)
      throw ConfigError("frequency vector: support index out of range");
    if (m.coeffs[i] == 0)
      throw ConfigError("frequency vector: zero coefficient on support");
  }
}

// Resolves the {m, -m} ambiguity by flipping the global sign so the leading
// coefficient is positive. Idempotent. The empty vector is rejected: the
// constant feature is the intercept, never a path.
inline FrequencyVector canonicalize(FrequencyVector m) {
  if (m.support.empty())
    throw ConfigError("canonicalize: empty support (constant feature)");
  if (m.coeffs.front() < 0) {
    for (int& c : m.coeffs) c = -c;
  }
  return m;
}

struct RayDecomposition {
  int harmonic = 1;          // r >= 1
  FrequencyVector ray;       // primitive direction p, gcd(|coeffs|) == 1
};

// Factors m = r * p with p primitive. For canonical m the ray stays
// canonical, since the positive leading coefficient is divided by r > 0.
inline RayDecomposition primitive_decompose(const FrequencyVector& m) {
  if (m.support.empty())
    throw ConfigError("primitive_decompose: empty support");
  int g = 0;
  for (int c : m.coeffs) g = std::gcd(g, std::abs(c));
  RayDecomposition out;
  out.harmonic = g;
  out.ray = m;
  for (int& c : out.ray.coeffs) c /= g;
  return out;
}

inline FrequencyVector harmonic_of(const FrequencyVector& ray, int r) {
  FrequencyVector m = ray;
  for (int& c : m.coeffs) c *= r;
  return m;
}

namespace detail {

// Odometer over the compositions of a fixed total into k positive parts,
// in lexicographic order.
inline bool next_composition(std::vector<int>& parts) {
  const int k = static_cast<int>(parts.size());
  if (k == 1) return false;
  // Find the rightmost position (except the last) we can increment.
  for (int i = k - 2; i >= 0; --i) {
    int tail = 0;
    for (int j = i + 1; j < k; ++j) tail += parts[j];
    if (tail > k - 1 - i) {  // room to give one unit to position i
      parts[i] += 1;
      int remaining = tail - 1;
      for (int j = i + 1; j < k - 1; ++j) {
        parts[j] = 1;
        remaining -= 1;
      }
      parts[k - 1] = remaining;
      return true;
    }
  }
  return false;
}

// Lexicographically next k-combination of {0..n-1}.
inline bool next_combination(std::vector<int>& comb, int n) {
  const int k = static_cast<int>(comb.size());
  for (int i = k - 1; i >= 0; --i) {
    if (comb[i] < n - k + i) {
      ++comb[i];
      for (int j = i + 1; j < k; ++j) comb[j] = comb[j - 1] + 1;
      return true;
    }
  }
  return false;
}

}  // namespace detail

// Streams every canonical frequency vector with support size exactly k, in
// increasing total order L; within one L: combinations of (possibly ranked)
// features, then compositions, then sign patterns on the non-leading
// components. `feature_order` permutes exploration priority only -- the
// emitted set per L is independent of it.
class CandidateStream {
 public:
  CandidateStream(int dimension, int support_size,
                  std::vector<int> feature_order = {})
      : d_(dimension), k_(support_size), order_(std::move(feature_order)) {
    if (order_.empty()) {
      order_.resize(static_cast<std::size_t>(d_));
      std::iota(order_.begin(), order_.end(), 0);
    }
    if (static_cast<int>(order_.size()) != d_)
      throw ConfigError("candidate stream: feature order length mismatch");
    exhausted_ = k_ < 1 || k_ > d_;
    if (!exhausted_) start_level(k_);  // smallest reachable L is k
  }

  bool exhausted() const { return exhausted_; }
  int current_level() const { return level_; }

  // Next candidate in the global order. Streams are infinite for k <= D
  // (every L >= k admits candidates), so callers bound consumption.
  FrequencyVector next() {
    if (exhausted_) throw StateError("candidate stream exhausted");
    FrequencyVector m = build_current();
    advance();
    return m;
  }

 private:
  void start_level(int level) {
    level_ = level;
    comb_.resize(static_cast<std::size_t>(k_));
    std::iota(comb_.begin(), comb_.end(), 0);
    parts_.assign(static_cast<std::size_t>(k_), 1);
    parts_.back() = level_ - (k_ - 1);
    signs_ = 0;
  }

  void advance() {
    ++signs_;
    if (signs_ < (1u << (k_ - 1))) return;
    signs_ = 0;
    if (detail::next_composition(parts_)) return;
    parts_.assign(static_cast<std::size_t>(k_), 1);
    parts_.back() = level_ - (k_ - 1);
    if (detail::next_combination(comb_, d_)) return;
    start_level(level_ + 1);
  }

  FrequencyVector build_current() const {
    // comb_ indexes into the ranked feature order; parts_ and the sign bits
    // align with that ranked tuple (sign bit i applies to ranked element
    // i+1, bit set meaning negative).
    std::vector<std::pair<int, int>> entries;  // (feature index, coefficient)
    entries.reserve(static_cast<std::size_t>(k_));
    for (int i = 0; i < k_; ++i) {
      int coeff = parts_[static_cast<std::size_t>(i)];
      if (i > 0 && (signs_ >> (i - 1)) & 1u) coeff = -coeff;
      entries.emplace_back(order_[static_cast<std::size_t>(
                               comb_[static_cast<std::size_t>(i)])],
                           coeff);
    }
    std::sort(entries.begin(), entries.end());
    FrequencyVector m;
    m.dimension = d_;
    for (const auto& [feature, coeff] : entries) {
      m.support.push_back(feature);
      m.coeffs.push_back(coeff);
    }
    return canonicalize(std::move(m));
  }

  int d_;
  int k_;
  std::vector<int> order_;
  bool exhausted_ = false;
  int level_ = 0;
  std::vector<int> comb_;
  std::vector<int> parts_;
  unsigned signs_ = 0;
};

// All canonical candidates with ||m||_0 == k and ||m||_1 == L, in stream
// order. Count: C(D,k) * C(L-1,k-1) * 2^(k-1). Empty when k > D or k > L.
inline std::vector<FrequencyVector> enumerate_candidates(
    int dimension, int support_size, int total_order,
    const std::vector<int>& feature_order = {}) {
  std::vector<FrequencyVector> out;
  if (support_size < 1 || support_size > dimension ||
      support_size > total_order)
    return out;
  CandidateStream stream(dimension, support_size, feature_order);
  while (!stream.exhausted() && stream.current_level() <= total_order) {
    FrequencyVector m = stream.next();
    if (m.order() == total_order) out.push_back(std::move(m));
  }
  return out;
}

// Expands a tensor-product cosine term prod_j cos(m_j * theta_j) into
// 2^(k-1) directional harmonics of equal weight 2^-(k-1), enumerating the
// sign patterns with the leading sign fixed positive. The empty product is
// the constant 1, returned as a single weight-1 term with empty support.
inline std::vector<std::pair<double, FrequencyVector>> tensor_expand(
    const FrequencyVector& degrees) {
  for (int c : degrees.coeffs) {
    if (c < 1)
      throw ConfigError("tensor_expand: degrees must be >= 1 on the support");
  }
  std::vector<std::pair<double, FrequencyVector>> terms;
  const int k = degrees.sparsity();
  if (k == 0) {
    FrequencyVector constant;
    constant.dimension = degrees.dimension;
    terms.emplace_back(1.0, std::move(constant));
    return terms;
  }
  const unsigned count = 1u << (k - 1);
  const double weight = 1.0 / static_cast<double>(count);
  terms.reserve(count);
  for (unsigned bits = 0; bits < count; ++bits) {
    FrequencyVector m = degrees;
    for (int i = 1; i < k; ++i) {
      if ((bits >> (i - 1)) & 1u)
        m.coeffs[static_cast<std::size_t>(i)] =
            -m.coeffs[static_cast<std::size_t>(i)];
    }
    terms.emplace_back(weight, std::move(m));
  }
  return terms;
}

}  // namespace specpath
