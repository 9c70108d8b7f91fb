#pragma once

// Low-degree likelihood-ratio norm via counts of even hypergraphs.
//
//   ||L_{<=D}||^2 = sum_{t=0}^{D} N_t (p delta^2)^t
//
// where N_t counts simple k-uniform hypergraphs on [n] with t edges in which
// every vertex has even degree.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <limits>
#include <optional>
#include <utility>
#include <vector>

#include "xorlab/combinatorics.hpp"
#include "xorlab/error.hpp"

namespace xorlab {

struct EvenCountTable {
  int n = 0;
  int k = 0;
  int t_max = 0;
  std::vector<std::uint64_t> entries;  // entries[t] = N_t

  std::uint64_t at(int t) const { return entries.at(static_cast<std::size_t>(t)); }
  bool operator==(const EvenCountTable&) const = default;
};

struct EvenCountLimits {
  double max_work = 1e9;  // subsets visited, or row-space size times t_max
};

namespace detail {

// Vertex bitmask of every k-subset of [n], in colex order.
inline std::vector<std::uint64_t> edge_masks(int n, int k) {
  require(n >= 1 && n <= 64, "even-hypergraph counting supports n <= 64");
  require(k >= 1 && k <= n, "need 1 <= k <= n");
  std::vector<std::uint64_t> out;
  std::vector<int> c(static_cast<std::size_t>(k));
  for (int i = 0; i < k; ++i) c[static_cast<std::size_t>(i)] = i;
  // Colex successor: bump the lowest index that can move.
  while (true) {
    std::uint64_t m = 0;
    for (int u : c) m |= std::uint64_t{1} << u;
    out.push_back(m);
    int i = 0;
    while (i < k && c[static_cast<std::size_t>(i)] + 1 == (i + 1 < k ? c[static_cast<std::size_t>(i + 1)] : n)) ++i;
    if (i == k) break;
    ++c[static_cast<std::size_t>(i)];
    for (int j = 0; j < i; ++j) c[static_cast<std::size_t>(j)] = j;
  }
  return out;
}

inline double subset_work(std::uint64_t m, int t_max) {
  double total = 0.0;
  for (int t = 0; t <= t_max; ++t) {
    const std::uint64_t c = binomial(m, static_cast<std::uint64_t>(t));
    total += c == UINT64_MAX ? std::numeric_limits<double>::infinity() : static_cast<double>(c);
  }
  return total;
}

}  // namespace detail

/// Exact N_t for t <= t_max by enumerating edge subsets and tracking the
/// degree-parity vector.
inline EvenCountTable count_even_exact(int n, int k, int t_max, const EvenCountLimits& limits = {}) {
  require(t_max >= 0, "t_max must be nonnegative");
  const auto edges = detail::edge_masks(n, k);
  const std::uint64_t m = edges.size();
  if (detail::subset_work(m, t_max) > limits.max_work)
    throw CapExceeded("even-hypergraph enumeration exceeds the work cap");
  EvenCountTable table{n, k, t_max, std::vector<std::uint64_t>(static_cast<std::size_t>(t_max) + 1, 0)};
  table.entries[0] = 1;
  auto rec = [&](auto&& self, std::size_t from, int depth, std::uint64_t parity) -> void {
    for (std::size_t e = from; e < m; ++e) {
      const std::uint64_t next = parity ^ edges[e];
      if (next == 0) ++table.entries[static_cast<std::size_t>(depth) + 1];
      if (depth + 1 < t_max) {
        // Each further edge fixes at most k odd vertices.
        if (std::popcount(next) <= k * (t_max - depth - 1)) self(self, e + 1, depth + 1, next);
      }
    }
  };
  if (t_max >= 1) rec(rec, 0, 0, 0);
  return table;
}

namespace detail {

// K_t(w) = sum_j (-1)^j C(w, j) C(m - w, t - j)
inline int128 krawtchouk(std::uint64_t m, std::uint64_t w, int t) {
  int128 total = 0;
  for (int j = 0; j <= t; ++j) {
    if (static_cast<std::uint64_t>(j) > w || static_cast<std::uint64_t>(t - j) > m - w) continue;
    const int128 term = static_cast<int128>(binomial(w, static_cast<std::uint64_t>(j))) *
                          static_cast<int128>(binomial(m - w, static_cast<std::uint64_t>(t - j)));
    total += (j % 2 == 0) ? term : -term;
  }
  return total;
}

}  // namespace detail

/// Exact N_t from the GF(2) incidence matrix: the even edge sets form its
/// kernel, whose weight distribution follows from the row space by the
/// MacWilliams identity N_t = 2^{-rank} sum_{r in rowspace} K_t(wt(r)).
inline EvenCountTable count_even_gf2(int n, int k, int t_max, const EvenCountLimits& limits = {}) {
  require(t_max >= 0, "t_max must be nonnegative");
  const auto edges = detail::edge_masks(n, k);
  const std::size_t m = edges.size();
  const std::size_t words = (m + 63) / 64;
  using Row = std::vector<std::uint64_t>;
  std::vector<Row> rows(static_cast<std::size_t>(n), Row(words, 0));
  for (std::size_t e = 0; e < m; ++e)
    for (int u = 0; u < n; ++u)
      if (edges[e] >> u & 1U) rows[static_cast<std::size_t>(u)][e / 64] |= std::uint64_t{1} << (e % 64);

  // Echelon basis of the row space; each row is keyed by its lowest set bit.
  auto lowest = [&](const Row& r) -> std::size_t {
    for (std::size_t w = 0; w < words; ++w)
      if (r[w]) return w * 64 + static_cast<std::size_t>(std::countr_zero(r[w]));
    return m;
  };
  std::vector<std::pair<std::size_t, Row>> echelon;  // sorted by pivot
  for (auto row : rows) {
    for (const auto& [pivot, b] : echelon)
      if (row[pivot / 64] >> (pivot % 64) & 1U)
        for (std::size_t w = 0; w < words; ++w) row[w] ^= b[w];
    const std::size_t pivot = lowest(row);
    if (pivot == m) continue;
    echelon.emplace_back(pivot, std::move(row));
    std::sort(echelon.begin(), echelon.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
  }
  std::vector<Row> basis;
  for (auto& [pivot, b] : echelon) basis.push_back(std::move(b));
  const int rank = static_cast<int>(basis.size());
  require(rank < 40, "row space too large to enumerate");
  if (std::ldexp(1.0, rank) * (t_max + 1) > limits.max_work)
    throw CapExceeded("row-space enumeration exceeds the work cap");

  // Weight distribution of the row space, by Gray-code walk.
  std::vector<std::uint64_t> weight_count(m + 1, 0);
  Row cur(words, 0);
  weight_count[0] = 1;
  const std::uint64_t total = std::uint64_t{1} << rank;
  for (std::uint64_t g = 1; g < total; ++g) {
    const int flip = std::countr_zero(g);
    for (std::size_t w = 0; w < words; ++w) cur[w] ^= basis[static_cast<std::size_t>(flip)][w];
    std::size_t wt = 0;
    for (auto w : cur) wt += static_cast<std::size_t>(std::popcount(w));
    ++weight_count[wt];
  }

  EvenCountTable table{n, k, t_max, std::vector<std::uint64_t>(static_cast<std::size_t>(t_max) + 1, 0)};
  for (int t = 0; t <= t_max; ++t) {
    int128 acc = 0;
    for (std::size_t w = 0; w <= m; ++w)
      if (weight_count[w]) acc += static_cast<int128>(weight_count[w]) * detail::krawtchouk(m, w, t);
    require(acc >= 0 && acc % static_cast<int128>(total) == 0, "MacWilliams sum is not divisible by the row-space size");
    table.entries[static_cast<std::size_t>(t)] = static_cast<std::uint64_t>(acc / static_cast<int128>(total));
  }
  return table;
}

/// C_k' = e^{k/2+2} k^{k/2+1/2} / k!
inline double counting_constant(int k) {
  const double kk = k;
  return std::exp(kk / 2.0 + 2.0) * std::pow(kk, kk / 2.0 + 0.5) / factorial(k);
}

/// (C_k' n^{k/2} t^{k/2-1})^t without the range restriction on t.
inline double counting_bound_formula(int n, int k, int t) {
  require(t >= 1, "counting bound needs t >= 1");
  const double base = counting_constant(k) * std::pow(n, k / 2.0) * std::pow(t, k / 2.0 - 1.0);
  return std::pow(base, t);
}

/// Upper bound on N_t, valid for 1 <= t <= n/k.
inline double counting_bound(int n, int k, int t) {
  require(k >= 1 && t >= 1 && static_cast<std::int64_t>(t) * k <= n, "counting bound needs 1 <= t <= n/k");
  return counting_bound_formula(n, k, t);
}

enum class NormMode { exact, bound };

struct NormTerm {
  int t = 0;
  std::optional<double> exact;
  double bound = 0.0;
  double log_bound = 0.0;
};

struct NormReport {
  int n = 0;
  int k = 0;
  int D = 0;
  double p = 0.0;
  double delta = 0.0;
  std::optional<double> exact_norm;
  double bound_norm = 0.0;      // may be +inf when the terms overflow
  double log_bound_norm = 0.0;  // natural log of bound_norm
  std::vector<NormTerm> per_term;
};

namespace detail {
inline double log_sum_exp(const std::vector<double>& logs) {
  double hi = -std::numeric_limits<double>::infinity();
  for (double l : logs) hi = std::max(hi, l);
  if (!std::isfinite(hi)) return hi;
  double s = 0.0;
  for (double l : logs) s += std::exp(l - hi);
  return hi + std::log(s);
}
}  // namespace detail

/// Degree-D norm. The bound column is always filled; the exact column only
/// in exact mode.
inline NormReport lowdeg_norm(int n, int k, int D, double p, double delta, NormMode mode,
                              const EvenCountLimits& limits = {}) {
  require(D >= 0, "D must be nonnegative");
  require(p >= 0.0 && p <= 1.0, "p must lie in [0, 1]");
  require(delta >= 0.0 && delta <= 1.0, "delta must lie in [0, 1]");
  NormReport rep{n, k, D, p, delta, std::nullopt, 0.0, 0.0, {}};
  const double w = p * delta * delta;
  std::optional<EvenCountTable> table;
  if (mode == NormMode::exact) table = count_even_exact(n, k, D, limits);

  std::vector<double> logs;
  double exact_sum = 0.0;
  for (int t = 0; t <= D; ++t) {
    NormTerm term;
    term.t = t;
    if (t == 0) {
      term.log_bound = 0.0;
    } else if (w == 0.0) {
      term.log_bound = -std::numeric_limits<double>::infinity();
    } else {
      const double log_base = std::log(counting_constant(k)) + (k / 2.0) * std::log(n) +
                              (k / 2.0 - 1.0) * std::log(t) + std::log(w);
      term.log_bound = t * log_base;
    }
    term.bound = std::exp(term.log_bound);
    if (table) {
      const double nt = static_cast<double>(table->at(t));
      term.exact = nt == 0.0 ? 0.0 : nt * std::pow(w, t);
      exact_sum += *term.exact;
    }
    logs.push_back(term.log_bound);
    rep.per_term.push_back(term);
  }
  rep.log_bound_norm = detail::log_sum_exp(logs);
  rep.bound_norm = std::exp(rep.log_bound_norm);
  if (table) rep.exact_norm = exact_sum;
  return rep;
}

/// m below which C_k' n^{k/2} D^{k/2-1} p delta^2 < 1, with p = m / C(n,k).
inline double hardness_threshold_m(int n, int k, int D, double delta) {
  require(D >= 1, "D must be at least 1");
  require(delta > 0.0, "delta must be positive");
  const double universe = std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0));
  return universe / (counting_constant(k) * std::pow(n, k / 2.0) * std::pow(D, k / 2.0 - 1.0) * delta * delta);
}

}  // namespace xorlab
