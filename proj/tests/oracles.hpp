#pragma once

// Reference implementations used only by the tests. They share no code with
// the library's enumerators: labels come from a std::map keyed by vertex
// tuples, and maps are enumerated vertex by vertex in label order.

#include <algorithm>
#include <cstdint>
#include <functional>
#include <map>
#include <set>
#include <vector>

#include "xorlab/xorlab.hpp"

namespace oracle {

using Tuple = std::vector<int>;
using LabelMap = std::map<Tuple, int>;

inline LabelMap label_map(const xorlab::Observation& obs) {
  LabelMap out;
  for (std::size_t i = 0; i < obs.size(); ++i) out[obs.tuple(i)] = obs.entries()[i].label;
  return out;
}

inline int label_of(const LabelMap& z, Tuple t) {
  std::sort(t.begin(), t.end());
  auto it = z.find(t);
  return it == z.end() ? 0 : it->second;
}

// Calls f(map) for every injective map [v] -> [n] honoring `fixed`
// (fixed[u] = host or -1).
inline void for_each_map(int v, int n, const std::vector<int>& fixed, const std::function<void(const std::vector<int>&)>& f) {
  std::vector<int> map(static_cast<std::size_t>(v), -1);
  std::vector<char> used(static_cast<std::size_t>(n), 0);
  for (int u = 0; u < v; ++u)
    if (fixed[static_cast<std::size_t>(u)] >= 0) used[static_cast<std::size_t>(fixed[static_cast<std::size_t>(u)])] = 1;
  std::function<void(int)> go = [&](int u) {
    if (u == v) {
      f(map);
      return;
    }
    if (fixed[static_cast<std::size_t>(u)] >= 0) {
      map[static_cast<std::size_t>(u)] = fixed[static_cast<std::size_t>(u)];
      go(u + 1);
      return;
    }
    for (int h = 0; h < n; ++h) {
      if (used[static_cast<std::size_t>(h)]) continue;
      used[static_cast<std::size_t>(h)] = 1;
      map[static_cast<std::size_t>(u)] = h;
      go(u + 1);
      used[static_cast<std::size_t>(h)] = 0;
    }
  };
  go(0);
}

inline std::int64_t weight(const xorlab::Hypergraph& g, const LabelMap& z, const std::vector<int>& map) {
  std::int64_t prod = 1;
  for (const auto& e : g.edges) {
    Tuple t;
    for (int u : e) t.push_back(map[static_cast<std::size_t>(u)]);
    prod *= label_of(z, t);
    if (prod == 0) return 0;
  }
  return prod;
}

inline bool colorful(const std::vector<int>& map, const xorlab::Coloring& tau) {
  std::set<int> seen;
  for (int h : map) seen.insert(tau.of[static_cast<std::size_t>(h)]);
  return static_cast<int>(seen.size()) == static_cast<int>(map.size());
}

// T_H(z), optionally restricted to colorful images.
inline std::int64_t embed_sum(const xorlab::Hypergraph& g, const LabelMap& z, int n,
                              const xorlab::Coloring* tau = nullptr) {
  std::int64_t total = 0;
  for_each_map(g.v, n, std::vector<int>(static_cast<std::size_t>(g.v), -1), [&](const std::vector<int>& map) {
    if (tau && !colorful(map, *tau)) return;
    total += weight(g, z, map);
  });
  return total;
}

// T_{J,a,b}(z) with leaf 0 -> a and leaf v-1 -> b.
inline std::int64_t rooted_sum(const xorlab::Hypergraph& g, const LabelMap& z, int n, int a, int b,
                               const xorlab::Coloring* tau = nullptr) {
  std::vector<int> fixed(static_cast<std::size_t>(g.v), -1);
  fixed.front() = a;
  fixed.back() = b;
  std::int64_t total = 0;
  for_each_map(g.v, n, fixed, [&](const std::vector<int>& map) {
    if (tau && !colorful(map, *tau)) return;
    total += weight(g, z, map);
  });
  return total;
}

inline double falling(int n, int j) {
  double out = 1.0;
  for (int i = 0; i < j; ++i) out *= n - i;
  return out;
}

// Breadth-first connectivity of the edges of g after removing vertex `drop`
// from every edge (drop = -1 keeps all vertices). Every vertex other than
// `drop` must be reached.
inline bool connected(const xorlab::Hypergraph& g, int drop) {
  std::vector<std::vector<int>> nbr(static_cast<std::size_t>(g.v));
  for (const auto& e : g.edges)
    for (int a : e)
      for (int b : e)
        if (a != b && a != drop && b != drop) nbr[static_cast<std::size_t>(a)].push_back(b);
  int start = drop == 0 ? 1 : 0;
  std::vector<char> seen(static_cast<std::size_t>(g.v), 0);
  std::vector<int> queue{start};
  seen[static_cast<std::size_t>(start)] = 1;
  for (std::size_t q = 0; q < queue.size(); ++q)
    for (int w : nbr[static_cast<std::size_t>(queue[q])])
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        queue.push_back(w);
      }
  for (int u = 0; u < g.v; ++u)
    if (u != drop && !seen[static_cast<std::size_t>(u)]) return false;
  return true;
}

// All gadgets U(r,k) by filtering every 2r-subset of k-sets of [rk+1].
inline std::vector<xorlab::Hypergraph> gadgets_by_filter(int r, int k) {
  const int v = r * k + 1;
  std::vector<Tuple> ksets;
  for (std::uint32_t mask = 0; mask < (1U << v); ++mask) {
    if (__builtin_popcount(mask) != k) continue;
    Tuple t;
    for (int u = 0; u < v; ++u)
      if (mask >> u & 1U) t.push_back(u);
    ksets.push_back(t);
  }
  std::sort(ksets.begin(), ksets.end());
  std::vector<xorlab::Hypergraph> out;
  const int s = 2 * r;
  std::vector<int> pick(static_cast<std::size_t>(s));
  std::function<void(int, int)> choose = [&](int pos, int from) {
    if (pos == s) {
      xorlab::Hypergraph g;
      g.v = v;
      std::vector<int> deg(static_cast<std::size_t>(v), 0);
      for (int i : pick) {
        g.edges.push_back(ksets[static_cast<std::size_t>(i)]);
        for (int u : ksets[static_cast<std::size_t>(i)]) ++deg[static_cast<std::size_t>(u)];
      }
      for (int d : deg)
        if (d < 1 || d > 2) return;
      if (!connected(g, -1)) return;
      for (int u = 0; u < v; ++u)
        if (!connected(g, u)) return;
      out.push_back(g);
      return;
    }
    for (int i = from; i < static_cast<int>(ksets.size()); ++i) {
      pick[static_cast<std::size_t>(pos)] = i;
      choose(pos + 1, i + 1);
    }
  };
  choose(0, 0);
  return out;
}

}  // namespace oracle
