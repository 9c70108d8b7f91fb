#pragma once

// Brute-force embedding statistics, their closed-form moments, and the
// overlap census of pairs of embeddings.

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "xorlab/combinatorics.hpp"
#include "xorlab/error.hpp"
#include "xorlab/instance.hpp"
#include "xorlab/patterns.hpp"

namespace xorlab {

namespace detail {

// Backtracking enumerator of injections V(pattern) -> [n], visiting pattern
// vertices in block order and cutting a branch as soon as a completed edge
// maps to an unobserved k-set.
class EmbeddingSum {
 public:
  EmbeddingSum(const Pattern& pat, const LabelIndex& labels, int n) : labels_(labels), n_(n) {
    const int v = pat.v();
    std::vector<char> seen(static_cast<std::size_t>(v), 0);
    auto visit = [&](int u) {
      if (!seen[static_cast<std::size_t>(u)]) {
        seen[static_cast<std::size_t>(u)] = 1;
        order_.push_back(u);
      }
    };
    for (const auto& b : pat.blocks)
      for (int u : b.vertices) visit(u);
    for (int u = 0; u < v; ++u) visit(u);
    std::vector<int> pos(static_cast<std::size_t>(v));
    for (int i = 0; i < v; ++i) pos[static_cast<std::size_t>(order_[static_cast<std::size_t>(i)])] = i;
    closing_.assign(static_cast<std::size_t>(v), {});
    for (const auto& e : pat.graph.edges) {
      int last = 0;
      for (int u : e) last = std::max(last, pos[static_cast<std::size_t>(u)]);
      closing_[static_cast<std::size_t>(last)].push_back(e);
    }
    image_.assign(static_cast<std::size_t>(v), -1);
    used_.assign(static_cast<std::size_t>(n), 0);
  }

  // Pin pattern vertex `u` to host vertex `h` (must be set before run()).
  void pin(int u, int h) { pins_.emplace_back(u, h); }

  std::int64_t run() {
    if (n_ < static_cast<int>(order_.size())) return 0;
    pinned_.assign(order_.size(), -1);
    for (auto [u, h] : pins_) {
      if (h < 0 || h >= n_) return 0;
      pinned_[static_cast<std::size_t>(u)] = h;
    }
    return recurse(0, 1);
  }

 private:
  std::int64_t recurse(std::size_t depth, std::int64_t prod) {
    if (depth == order_.size()) return prod;
    const int u = order_[depth];
    const int fixed = pinned_[static_cast<std::size_t>(u)];
    std::int64_t total = 0;
    const int lo = fixed >= 0 ? fixed : 0;
    const int hi = fixed >= 0 ? fixed + 1 : n_;
    for (int h = lo; h < hi; ++h) {
      if (used_[static_cast<std::size_t>(h)]) continue;
      // A pinned host is reserved for its pattern vertex.
      if (fixed < 0 && is_pinned_host(h)) continue;
      image_[static_cast<std::size_t>(u)] = h;
      std::int64_t p = prod;
      for (const auto& e : closing_[depth]) {
        int buf[32];
        for (std::size_t i = 0; i < e.size(); ++i) buf[i] = image_[static_cast<std::size_t>(e[i])];
        const int z = labels_.at(std::span<const int>(buf, e.size()));
        p *= z;
        if (p == 0) break;
      }
      if (p == 0) continue;
      used_[static_cast<std::size_t>(h)] = 1;
      total += recurse(depth + 1, p);
      used_[static_cast<std::size_t>(h)] = 0;
    }
    image_[static_cast<std::size_t>(u)] = -1;
    return total;
  }

  bool is_pinned_host(int h) const noexcept {
    for (auto [u, ph] : pins_)
      if (ph == h) return true;
    return false;
  }

  const LabelIndex& labels_;
  int n_;
  std::vector<int> order_;
  std::vector<std::vector<Edge>> closing_;
  std::vector<int> image_;
  std::vector<char> used_;
  std::vector<std::pair<int, int>> pins_;
  std::vector<int> pinned_;
};

}  // namespace detail

/// T_H(z): sum over injections phi of prod_e z(phi(e)). Zero when n < v.
inline std::int64_t embed_sum_exact(const Pattern& pattern, const LabelIndex& labels, int n) {
  detail::EmbeddingSum sum(pattern, labels, n);
  return sum.run();
}

inline std::int64_t embed_sum_exact(const Pattern& pattern, const Observation& obs) {
  LabelIndex labels(obs);
  return embed_sum_exact(pattern, labels, obs.n());
}

/// T_{J,a,b}(z): rooted sum with the leaves mapped to hosts a and b (0-based).
inline std::int64_t rooted_embed_sum_exact(const PathPattern& pattern, int a, int b, const LabelIndex& labels, int n) {
  require(a != b, "rooted statistic needs distinct endpoints");
  require(a >= 0 && a < n && b >= 0 && b < n, "endpoint out of range");
  detail::EmbeddingSum sum(pattern, labels, n);
  sum.pin(pattern.leaves().first, a);
  sum.pin(pattern.leaves().second, b);
  return sum.run();
}

inline std::int64_t rooted_embed_sum_exact(const PathPattern& pattern, int a, int b, const Observation& obs) {
  LabelIndex labels(obs);
  return rooted_embed_sum_exact(pattern, a, b, labels, obs.n());
}

/// F = sum over the family of T_H.
template <class P>
std::int64_t family_sum_exact(const std::vector<P>& family, const LabelIndex& labels, int n) {
  std::int64_t total = 0;
  for (const auto& pat : family) total += embed_sum_exact(pat, labels, n);
  return total;
}

struct MomentReport {
  double mean_planted = 0.0;
  double mean_null = 0.0;
  double var_null = 0.0;
  std::uint64_t family_size = 0;
  int v = 0;
  int s = 0;
};

/// Planted mean |F|(n)_v (p delta)^s, null mean 0, null variance |F|(n)_v v! p^s.
inline MomentReport closed_form_moments(int n, int v, int s, std::uint64_t family_size, double p, double delta) {
  require(v <= n, "closed-form moments need v <= n");
  MomentReport out;
  out.family_size = family_size;
  out.v = v;
  out.s = s;
  const double fam = static_cast<double>(family_size);
  const double embeddings = falling_factorial(n, v);
  out.mean_planted = fam * embeddings * std::pow(p * delta, s);
  out.mean_null = 0.0;
  out.var_null = fam * embeddings * factorial(v) * std::pow(p, s);
  return out;
}

/// |J| (n-2)_{v-2} (p delta)^s x_a x_b
inline double rooted_closed_form_mean(int n, int v, int s, std::uint64_t family_size, double p, double delta,
                                      int parity) {
  require(v <= n, "closed-form moments need v <= n");
  require(parity == 1 || parity == -1, "parity must be +1 or -1");
  return static_cast<double>(family_size) * falling_factorial(n - 2, v - 2) * std::pow(p * delta, s) * parity;
}

/// |J| (n-2)_{v-2} (v-2)! p^s
inline double rooted_null_variance(int n, int v, int s, std::uint64_t family_size, double p) {
  require(v <= n, "closed-form moments need v <= n");
  return static_cast<double>(family_size) * falling_factorial(n - 2, v - 2) * factorial(v - 2) * std::pow(p, s);
}

// ---------------------------------------------------------------------------
// Overlap census

/// Tally N(i,j) of ordered pairs of (pattern, embedding) whose images share
/// i vertices and j edges. For the rooted census both embeddings send the
/// leaves to (a, b).
struct OverlapCensus {
  std::map<std::pair<int, int>, std::uint64_t> table;
  int v = 0;
  int s = 0;
  int k = 0;
  bool rooted = false;

  std::uint64_t at(int i, int j) const {
    auto it = table.find({i, j});
    return it == table.end() ? 0 : it->second;
  }
  std::uint64_t diagonal() const { return at(v, s); }

  // Cells that must stay empty: j >= 1, (i,j) != (v,s) and
  // 2i <= jk + 1 (cycle) or 2i <= jk + 5 (rooted).
  bool forbidden(int i, int j) const {
    if (j < 1 || (i == v && j == s)) return false;
    return 2 * i <= j * k + (rooted ? 5 : 1);
  }

  std::vector<std::pair<int, int>> violations() const {
    std::vector<std::pair<int, int>> out;
    for (const auto& [cell, count] : table)
      if (count != 0 && forbidden(cell.first, cell.second)) out.push_back(cell);
    return out;
  }
};

struct CensusOptions {
  std::uint64_t work_cap = 4'000'000'000ULL;
  // Average over host relabelings: fix the first embedding and scale by the
  // number of embeddings. Exact; the literal double loop is kept for checking.
  bool fix_first_embedding = true;
};

namespace detail {

struct EmbeddedImage {
  std::vector<std::uint64_t> edge_keys;  // sorted
  std::uint64_t vertex_mask = 0;
};

inline EmbeddedImage embed_image(const Hypergraph& g, const std::vector<int>& map, const SubsetIndexer& idx) {
  EmbeddedImage img;
  for (int h : map) img.vertex_mask |= std::uint64_t{1} << h;
  for (const auto& e : g.edges) {
    int buf[32];
    for (std::size_t i = 0; i < e.size(); ++i) buf[i] = map[static_cast<std::size_t>(e[i])];
    img.edge_keys.push_back(idx.rank_unsorted(std::span<const int>(buf, e.size())));
  }
  std::sort(img.edge_keys.begin(), img.edge_keys.end());
  return img;
}

inline int shared_edges(const std::vector<std::uint64_t>& a, const std::vector<std::uint64_t>& b) {
  int count = 0;
  std::size_t i = 0, j = 0;
  while (i < a.size() && j < b.size()) {
    if (a[i] < b[j])
      ++i;
    else if (b[j] < a[i])
      ++j;
    else {
      ++count;
      ++i;
      ++j;
    }
  }
  return count;
}

// Calls f(map) for every injection [v] -> [n] honoring pins (pattern vertex -> host).
template <class F>
void for_each_injection(int v, int n, const std::vector<std::pair<int, int>>& pins, F&& f) {
  std::vector<int> map(static_cast<std::size_t>(v), -1);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  std::vector<int> fixed(static_cast<std::size_t>(v), -1);
  for (auto [u, h] : pins) {
    fixed[static_cast<std::size_t>(u)] = h;
    used[static_cast<std::size_t>(h)] = 1;
  }
  auto rec = [&](auto&& self, int u) -> void {
    if (u == v) {
      f(map);
      return;
    }
    if (fixed[static_cast<std::size_t>(u)] >= 0) {
      map[static_cast<std::size_t>(u)] = fixed[static_cast<std::size_t>(u)];
      self(self, u + 1);
      return;
    }
    for (int h = 0; h < n; ++h) {
      if (used[static_cast<std::size_t>(h)]) continue;
      used[static_cast<std::size_t>(h)] = 1;
      map[static_cast<std::size_t>(u)] = h;
      self(self, u + 1);
      used[static_cast<std::size_t>(h)] = 0;
    }
  };
  rec(rec, 0);
}

template <class P>
OverlapCensus census_impl(const std::vector<P>& family, int n, bool rooted, int a, int b,
                          const CensusOptions& opts) {
  require(!family.empty(), "census needs a nonempty family");
  const int v = family.front().v();
  const int s = family.front().s();
  const int k = family.front().graph.k();
  for (const auto& p : family) require(p.v() == v && p.s() == s, "family members must share (v, s)");
  require(n >= v, "census needs n >= v");
  require(n <= 64, "census supports n <= 64");
  if (rooted) require(a != b && a >= 0 && b >= 0 && a < n && b < n, "rooted census needs distinct endpoints in range");

  const int free_vertices = rooted ? v - 2 : v;
  const double embeddings = falling_factorial(rooted ? n - 2 : n, free_vertices);
  const double fam = static_cast<double>(family.size());
  const double work = fam * fam * embeddings * (opts.fix_first_embedding ? 1.0 : embeddings);
  if (work > static_cast<double>(opts.work_cap))
    throw CapExceeded("overlap census work estimate " + std::to_string(work) + " exceeds cap");

  SubsetIndexer idx(n, k);
  std::vector<std::pair<int, int>> pins;
  if (rooted) pins = {{0, a}, {v - 1, b}};

  // Images of the first member of each pair.
  std::vector<std::vector<EmbeddedImage>> first(family.size());
  if (opts.fix_first_embedding) {
    std::vector<int> map(static_cast<std::size_t>(v));
    if (rooted) {
      map[0] = a;
      map[static_cast<std::size_t>(v - 1)] = b;
      int h = 0;
      for (int u = 1; u < v - 1; ++u) {
        while (h == a || h == b) ++h;
        map[static_cast<std::size_t>(u)] = h++;
      }
    } else {
      for (int u = 0; u < v; ++u) map[static_cast<std::size_t>(u)] = u;
    }
    for (std::size_t f = 0; f < family.size(); ++f) first[f].push_back(embed_image(family[f].graph, map, idx));
  } else {
    for (std::size_t f = 0; f < family.size(); ++f)
      for_each_injection(v, n, pins,
                         [&](const std::vector<int>& map) { first[f].push_back(embed_image(family[f].graph, map, idx)); });
  }

  std::map<std::pair<int, int>, std::uint64_t> raw;
  for (const auto& second : family) {
    for_each_injection(v, n, pins, [&](const std::vector<int>& map) {
      const EmbeddedImage img = embed_image(second.graph, map, idx);
      for (const auto& images : first)
        for (const auto& fi : images) {
          const int i = std::popcount(fi.vertex_mask & img.vertex_mask);
          const int j = shared_edges(fi.edge_keys, img.edge_keys);
          ++raw[{i, j}];
        }
    });
  }

  OverlapCensus out;
  out.v = v;
  out.s = s;
  out.k = k;
  out.rooted = rooted;
  const std::uint64_t scale =
      opts.fix_first_embedding ? falling_factorial_exact(static_cast<std::uint64_t>(rooted ? n - 2 : n),
                                                         static_cast<std::uint64_t>(free_vertices))
                               : 1;
  for (const auto& [cell, count] : raw) out.table[cell] = count * scale;
  return out;
}

}  // namespace detail

inline OverlapCensus overlap_census(const std::vector<CyclePattern>& family, int n, const CensusOptions& opts = {}) {
  return detail::census_impl(family, n, false, 0, 0, opts);
}

/// Rooted census with endpoints a, b (0-based hosts).
inline OverlapCensus overlap_census_rooted(const std::vector<PathPattern>& family, int n, int a, int b,
                                           const CensusOptions& opts = {}) {
  return detail::census_impl(family, n, true, a, b, opts);
}

}  // namespace xorlab
