#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>
#include <span>
#include <vector>

#include "xorlab/error.hpp"

namespace xorlab {

// Wide accumulator for exact sums of 64-bit products.
__extension__ typedef __int128 int128;

// Exact binomial coefficient; saturates at UINT64_MAX on overflow.
inline std::uint64_t binomial(std::uint64_t n, std::uint64_t k) noexcept {
  if (k > n) return 0;
  k = std::min(k, n - k);
  __uint128_t result = 1;
  for (std::uint64_t i = 1; i <= k; ++i) {
    result = result * (n - k + i) / i;
    if (result > std::numeric_limits<std::uint64_t>::max()) return std::numeric_limits<std::uint64_t>::max();
  }
  return static_cast<std::uint64_t>(result);
}

// (n)_j = n (n-1) ... (n-j+1) as a double; zero when j > n.
inline double falling_factorial(std::int64_t n, std::int64_t j) noexcept {
  if (j < 0) return 0.0;
  if (j > n) return 0.0;
  double out = 1.0;
  for (std::int64_t i = 0; i < j; ++i) out *= static_cast<double>(n - i);
  return out;
}

inline double factorial(std::int64_t n) noexcept { return falling_factorial(n, n); }

// Exact (n)_j; throws CapExceeded if the value does not fit in 64 bits.
inline std::uint64_t falling_factorial_exact(std::uint64_t n, std::uint64_t j) {
  if (j > n) return 0;
  __uint128_t out = 1;
  for (std::uint64_t i = 0; i < j; ++i) {
    out *= (n - i);
    if (out > std::numeric_limits<std::uint64_t>::max()) throw CapExceeded("falling factorial overflows 64 bits");
  }
  return static_cast<std::uint64_t>(out);
}

/// Colex ranking of k-subsets of {0..n-1}.
///
/// rank(c_0 < c_1 < ... < c_{k-1}) = sum_i C(c_i, i+1), a bijection onto
/// [0, C(n,k)). Ranks are the canonical 64-bit keys for constraints.
class SubsetIndexer {
 public:
  SubsetIndexer() = default;
  SubsetIndexer(int n, int k) : n_(n), k_(k) {
    require(n >= 1 && k >= 1 && k <= n, "subset indexer needs 1 <= k <= n");
    total_ = binomial(static_cast<std::uint64_t>(n), static_cast<std::uint64_t>(k));
    require(total_ != std::numeric_limits<std::uint64_t>::max(), "C(n,k) does not fit in 64 bits");
    table_.assign(static_cast<std::size_t>(n + 1) * (k + 1), 0);
    for (int c = 0; c <= n; ++c)
      for (int i = 0; i <= k; ++i) table_[idx(c, i)] = binomial(c, i);
  }

  int n() const noexcept { return n_; }
  int k() const noexcept { return k_; }
  std::uint64_t total() const noexcept { return total_; }

  // `sorted` must be strictly increasing 0-based vertices.
  std::uint64_t rank(std::span<const int> sorted) const noexcept {
    std::uint64_t r = 0;
    for (int i = 0; i < k_; ++i) r += table_[idx(sorted[i], i + 1)];
    return r;
  }

  // Rank of an arbitrary-order k-set with distinct entries.
  std::uint64_t rank_unsorted(std::span<const int> verts) const noexcept {
    int buf[32];
    for (int i = 0; i < k_; ++i) buf[i] = verts[i];
    std::sort(buf, buf + k_);
    return rank(std::span<const int>(buf, static_cast<std::size_t>(k_)));
  }

  std::vector<int> unrank(std::uint64_t r) const {
    std::vector<int> out(static_cast<std::size_t>(k_));
    int c = n_ - 1;
    for (int i = k_; i >= 1; --i) {
      while (table_[idx(c, i)] > r) --c;
      out[static_cast<std::size_t>(i - 1)] = c;
      r -= table_[idx(c, i)];
      --c;
    }
    return out;
  }

 private:
  std::size_t idx(int c, int i) const noexcept { return static_cast<std::size_t>(c) * (k_ + 1) + i; }

  int n_ = 0;
  int k_ = 0;
  std::uint64_t total_ = 0;
  std::vector<std::uint64_t> table_;
};

}  // namespace xorlab
