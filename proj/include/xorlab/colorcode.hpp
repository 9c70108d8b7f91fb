#pragma once

// Color-coded embedding sums.
//
// A coloring tau : [n] -> [v] keeps only embeddings whose image receives v
// distinct colors. Such colorful sums factor over the gadget blocks of a
// pattern, so they are computed by a dynamic program over
// (host x, host y, color set C) states:
//
//   base  Lambda_t(x, y; C)  colorful embeddings of block t with entry -> x,
//                            exit -> y and image colors exactly C
//   glue  Y_t(x, y; C)       = sum_z sum_{C1 | C2 = C, C1 & C2 = {tau(z)}}
//                              Lambda_t(x, z; C1) Y_{t+1}(z, y; C2)
//
// The interface colors c1 = tau(x), c2 = tau(y) are functions of the host
// vertices, so tables are keyed by (x, y, C) only.

#include <algorithm>
#include <bit>
#include <cassert>
#include <cmath>
#include <cstdint>
#include <map>
#include <unordered_map>
#include <utility>
#include <vector>

#include "xorlab/combinatorics.hpp"
#include "xorlab/error.hpp"
#include "xorlab/instance.hpp"
#include "xorlab/patterns.hpp"
#include "xorlab/rng.hpp"

namespace xorlab {

using ColorMask = std::uint32_t;
inline constexpr int kMaxColors = 24;

struct Coloring {
  int colors = 0;
  std::vector<int> of;  // of[h] in [0, colors)

  int n() const noexcept { return static_cast<int>(of.size()); }
  ColorMask bit(int h) const noexcept { return ColorMask{1} << of[static_cast<std::size_t>(h)]; }
};

/// i.i.d. uniform colors in [0, v) for every host vertex.
inline Coloring sample_coloring(int n, int v, KeyedStream rng) {
  require(v >= 1, "need at least one color");
  require(v <= kMaxColors, "color count exceeds bitmask width");
  Coloring tau{v, std::vector<int>(static_cast<std::size_t>(n))};
  for (auto& c : tau.of) c = static_cast<int>(rng.below(static_cast<std::uint64_t>(v)));
  return tau;
}

// rho = v! / v^v, the probability that v fixed hosts receive distinct colors.
inline double colorful_probability(int v) {
  double rho = 1.0;
  for (int i = 1; i <= v; ++i) rho *= static_cast<double>(i) / v;
  return rho;
}

struct EstimatorConfig {
  int colors = 0;
  double rho = 1.0;
  std::uint64_t repetitions = 1;
  std::uint64_t seed = 0;

  // Defaults: rho = v!/v^v and t = ceil(1/rho); a nonzero override replaces t.
  static EstimatorConfig for_colors(int v, std::uint64_t seed, std::uint64_t t_override = 0) {
    require(v >= 1 && v <= kMaxColors, "color count out of range");
    EstimatorConfig cfg;
    cfg.colors = v;
    cfg.rho = colorful_probability(v);
    cfg.repetitions = t_override ? t_override : static_cast<std::uint64_t>(std::ceil(1.0 / cfg.rho));
    cfg.seed = seed;
    return cfg;
  }

  Coloring coloring(int n, std::uint64_t index) const { return sample_coloring(n, colors, KeyedStream(seed, "coloring", index)); }
};

struct TableEntry {
  int y = 0;
  ColorMask mask = 0;
  std::int64_t value = 0;
};

/// Sparse DP table: for each first host x, the nonzero (y, C) entries sorted.
class DPTable {
 public:
  explicit DPTable(int n = 0) : rows_(static_cast<std::size_t>(n)) {}

  int n() const noexcept { return static_cast<int>(rows_.size()); }
  const std::vector<TableEntry>& row(int x) const { return rows_[static_cast<std::size_t>(x)]; }
  std::vector<TableEntry>& row(int x) { return rows_[static_cast<std::size_t>(x)]; }

  std::size_t nonzeros() const noexcept {
    std::size_t total = 0;
    for (const auto& r : rows_) total += r.size();
    return total;
  }

  std::int64_t at(int x, int y, ColorMask mask) const {
    for (const auto& e : row(x))
      if (e.y == y && e.mask == mask) return e.value;
    return 0;
  }

  // Replace row x with the nonzero entries of `acc`, keyed by (y << 32 | mask).
  void set_row(int x, const std::unordered_map<std::uint64_t, std::int64_t>& acc) {
    auto& r = row(x);
    r.clear();
    for (const auto& [key, value] : acc)
      if (value != 0) r.push_back({static_cast<int>(key >> 32), static_cast<ColorMask>(key & 0xffffffffULL), value});
    std::sort(r.begin(), r.end(), [](const TableEntry& a, const TableEntry& b) {
      return a.y != b.y ? a.y < b.y : a.mask < b.mask;
    });
  }

  // Replace row x with the merged (key, value) pairs; `pairs` is sorted in place.
  void set_row_merged(int x, std::vector<std::pair<std::uint64_t, std::int64_t>>& pairs) {
    auto& r = row(x);
    r.clear();
    std::sort(pairs.begin(), pairs.end(), [](const auto& a, const auto& b) { return a.first < b.first; });
    for (std::size_t i = 0; i < pairs.size();) {
      const std::uint64_t key = pairs[i].first;
      std::int64_t value = 0;
      for (; i < pairs.size() && pairs[i].first == key; ++i) value += pairs[i].second;
      if (value != 0) r.push_back({static_cast<int>(key >> 32), static_cast<ColorMask>(key & 0xffffffffULL), value});
    }
  }

 private:
  std::vector<std::vector<TableEntry>> rows_;
};

inline std::uint64_t table_key(int y, ColorMask mask) noexcept {
  return (static_cast<std::uint64_t>(y) << 32) | mask;
}

/// Base table of one block. `only_first >= 0` restricts the entry host.
/// `nodes`, when given, receives the number of backtracking nodes visited.
inline DPTable fill_base_table(const Block& block, const LabelIndex& labels, const Coloring& tau, int only_first = -1,
                               std::uint64_t* nodes = nullptr) {
  const int n = tau.n();
  const int width = static_cast<int>(block.vertices.size());
  require(width >= 2, "block needs at least two vertices");
  // closing[pos]: local edges whose last vertex (in local order) is pos.
  std::vector<std::vector<const Edge*>> closing(static_cast<std::size_t>(width));
  for (const auto& e : block.local_edges) closing[static_cast<std::size_t>(e.back())].push_back(&e);

  DPTable table(n);
  std::vector<int> image(static_cast<std::size_t>(width), -1);
  std::vector<std::pair<std::uint64_t, std::int64_t>> acc;
  std::uint64_t visited = 0;

  auto rec = [&](auto&& self, int pos, ColorMask used, std::int64_t prod) -> void {
    if (pos == width) {
      acc.emplace_back(table_key(image.back(), used), prod);
      return;
    }
    for (int h = 0; h < n; ++h) {
      const ColorMask c = tau.bit(h);
      if (used & c) continue;  // also rules out reusing a host
      ++visited;
      image[static_cast<std::size_t>(pos)] = h;
      std::int64_t p = prod;
      for (const Edge* e : closing[static_cast<std::size_t>(pos)]) {
        int buf[32];
        for (std::size_t i = 0; i < e->size(); ++i) buf[i] = image[static_cast<std::size_t>((*e)[i])];
        p *= labels.at(std::span<const int>(buf, e->size()));
        if (p == 0) break;
      }
      if (p != 0) self(self, pos + 1, used | c, p);
    }
  };

  const int lo = only_first >= 0 ? only_first : 0;
  const int hi = only_first >= 0 ? only_first + 1 : n;
  for (int x = lo; x < hi; ++x) {
    acc.clear();
    ++visited;
    image[0] = x;
    // With k >= 2 no edge closes at the entry vertex.
    if (closing[0].empty()) rec(rec, 1, tau.bit(x), std::int64_t{1});
    table.set_row_merged(x, acc);
#ifndef NDEBUG
    for (const auto& entry : table.row(x)) assert(std::popcount(entry.mask) == width);
#endif
  }
  if (nodes) *nodes += visited;
  return table;
}

/// Y = Lambda (x) suffix: glue a block table to the suffix table along the
/// shared interface host z, requiring the color sets to meet exactly in tau(z).
inline DPTable glue_tables(const DPTable& head, const DPTable& suffix, const Coloring& tau) {
  const int n = tau.n();
  DPTable out(n);
  std::unordered_map<std::uint64_t, std::int64_t> acc;
  for (int x = 0; x < n; ++x) {
    if (head.row(x).empty()) continue;
    acc.clear();
    for (const auto& left : head.row(x)) {
      const int z = left.y;
      const ColorMask shared = tau.bit(z);
      for (const auto& right : suffix.row(z)) {
        if ((left.mask & right.mask) != shared) continue;
        acc[table_key(right.y, left.mask | right.mask)] += left.value * right.value;
      }
    }
    out.set_row(x, acc);
  }
  return out;
}

namespace detail {

inline ColorMask full_mask(int colors) noexcept {
  return colors >= 32 ? ~ColorMask{0} : (ColorMask{1} << colors) - 1;
}

inline void check_coloring_for(const Pattern& pat, const Coloring& tau) {
  require(!pat.blocks.empty(), "pattern is missing its block decomposition");
  require(tau.colors == pat.v(), "coloring must use exactly v colors");
  require(pat.v() <= kMaxColors, "pattern exceeds the color bitmask width");
}

// Y_2 for a chain of blocks [from, end): the glued suffix table.
inline DPTable suffix_table(const Pattern& pat, std::size_t from, const LabelIndex& labels, const Coloring& tau) {
  DPTable y = fill_base_table(pat.blocks.back(), labels, tau);
  for (std::size_t t = pat.blocks.size() - 1; t-- > from;) y = glue_tables(fill_base_table(pat.blocks[t], labels, tau), y, tau);
  return y;
}

}  // namespace detail

/// G_H(z, tau): colorful embeddings of a cycle pattern, by block DP.
inline std::int64_t colorful_cycle_sum(const CyclePattern& pattern, const LabelIndex& labels, const Coloring& tau) {
  detail::check_coloring_for(pattern, tau);
  require(pattern.ell() >= 2, "cycle patterns need at least two blocks");
  const int n = tau.n();
  if (n < pattern.v()) return 0;
  const DPTable first = fill_base_table(pattern.blocks.front(), labels, tau);
  const DPTable rest = detail::suffix_table(pattern, 1, labels, tau);
  const ColorMask full = detail::full_mask(tau.colors);
  std::int64_t total = 0;
  for (int x = 0; x < n; ++x) {
    for (const auto& head : first.row(x)) {
      const int y = head.y;
      const ColorMask shared = tau.bit(x) | tau.bit(y);
      for (const auto& tail : rest.row(y)) {
        if (tail.y != x) continue;
        if ((head.mask & tail.mask) != shared || (head.mask | tail.mask) != full) continue;
        total += head.value * tail.value;
      }
    }
  }
  return total;
}

inline std::int64_t colorful_cycle_sum(const CyclePattern& pattern, const Observation& obs, const Coloring& tau) {
  LabelIndex labels(obs);
  return colorful_cycle_sum(pattern, labels, tau);
}

/// G_{J,a,b}(z, tau) for every b at once, with the first leaf pinned to a.
inline std::vector<std::int64_t> colorful_path_sums_from(const PathPattern& pattern, int a, const LabelIndex& labels,
                                                         const Coloring& tau) {
  detail::check_coloring_for(pattern, tau);
  const int n = tau.n();
  require(a >= 0 && a < n, "anchor out of range");
  std::vector<std::int64_t> out(static_cast<std::size_t>(n), 0);
  if (n < pattern.v()) return out;
  DPTable y = fill_base_table(pattern.blocks.front(), labels, tau, a);
  if (pattern.blocks.size() > 1) y = glue_tables(y, detail::suffix_table(pattern, 1, labels, tau), tau);
  const ColorMask full = detail::full_mask(tau.colors);
  for (const auto& e : y.row(a))
    if (e.mask == full) out[static_cast<std::size_t>(e.y)] += e.value;
  return out;
}

inline std::int64_t colorful_path_sum(const PathPattern& pattern, int a, int b, const LabelIndex& labels,
                                      const Coloring& tau) {
  require(a != b, "rooted statistic needs distinct endpoints");
  require(b >= 0 && b < tau.n(), "endpoint out of range");
  return colorful_path_sums_from(pattern, a, labels, tau)[static_cast<std::size_t>(b)];
}

inline std::int64_t colorful_path_sum(const PathPattern& pattern, int a, int b, const Observation& obs,
                                      const Coloring& tau) {
  LabelIndex labels(obs);
  return colorful_path_sum(pattern, a, b, labels, tau);
}

// ---------------------------------------------------------------------------
// Averaged estimators

/// Patterns whose blocks coincide up to relabeling of block interiors have
/// identical colorful sums, so the estimators evaluate one representative per
/// block signature and weight it by multiplicity.
template <class P>
std::vector<std::pair<const P*, std::int64_t>> group_by_block_signature(const std::vector<P>& family) {
  std::map<std::vector<std::vector<Edge>>, std::pair<const P*, std::int64_t>> groups;
  std::map<std::vector<Edge>, std::vector<Edge>> canon_cache;
  for (const auto& pat : family) {
    std::vector<std::vector<Edge>> sig;
    for (const auto& b : pat.blocks) {
      auto it = canon_cache.find(b.local_edges);
      if (it == canon_cache.end()) {
        const int width = static_cast<int>(b.vertices.size());
        std::vector<int> perm(static_cast<std::size_t>(width));
        for (int i = 0; i < width; ++i) perm[static_cast<std::size_t>(i)] = i;
        std::vector<Edge> best;
        do {
          std::vector<Edge> img;
          for (const auto& e : b.local_edges) {
            Edge f;
            for (int u : e) f.push_back(perm[static_cast<std::size_t>(u)]);
            std::sort(f.begin(), f.end());
            img.push_back(std::move(f));
          }
          std::sort(img.begin(), img.end());
          if (best.empty() || img < best) best = std::move(img);
        } while (std::next_permutation(perm.begin() + 1, perm.end() - 1));
        it = canon_cache.emplace(b.local_edges, std::move(best)).first;
      }
      sig.push_back(it->second);
    }
    auto [g, inserted] = groups.try_emplace(std::move(sig), &pat, 0);
    g->second.second += 1;
  }
  std::vector<std::pair<const P*, std::int64_t>> out;
  for (auto& [sig, entry] : groups) out.push_back(entry);
  return out;
}

namespace detail {
template <class P>
void require_uniform_family(const std::vector<P>& family, const EstimatorConfig& cfg) {
  require(!family.empty(), "family must be nonempty");
  for (const auto& p : family)
    require(p.v() == family.front().v() && p.s() == family.front().s(), "family members must share (v, s)");
  require(cfg.colors == family.front().v(), "estimator colors must equal v");
  require(cfg.repetitions >= 1, "need at least one coloring");
}
}  // namespace detail

/// (1 / (t rho)) sum_{a <= t} sum_H G_H(z, tau_a); unbiased for F_H(z).
inline double estimate_F_detection(const std::vector<CyclePattern>& family, const LabelIndex& labels, int n,
                                   const EstimatorConfig& cfg) {
  detail::require_uniform_family(family, cfg);
  const auto groups = group_by_block_signature(family);
  int128 total = 0;
  for (std::uint64_t a = 0; a < cfg.repetitions; ++a) {
    const Coloring tau = cfg.coloring(n, a);
    for (const auto& [pat, mult] : groups) total += static_cast<int128>(mult) * colorful_cycle_sum(*pat, labels, tau);
  }
  return static_cast<double>(total) / (static_cast<double>(cfg.repetitions) * cfg.rho);
}

inline double estimate_F_detection(const std::vector<CyclePattern>& family, const Observation& obs,
                                   const EstimatorConfig& cfg) {
  LabelIndex labels(obs);
  return estimate_F_detection(family, labels, obs.n(), cfg);
}

/// Rooted estimator for every endpoint b with anchor a; entry a is zero.
inline std::vector<double> estimate_F_recovery_all(const std::vector<PathPattern>& family, int a,
                                                   const LabelIndex& labels, int n, const EstimatorConfig& cfg) {
  detail::require_uniform_family(family, cfg);
  const auto groups = group_by_block_signature(family);
  std::vector<int128> total(static_cast<std::size_t>(n), 0);
  for (std::uint64_t q = 0; q < cfg.repetitions; ++q) {
    const Coloring tau = cfg.coloring(n, q);
    for (const auto& [pat, mult] : groups) {
      const auto sums = colorful_path_sums_from(*pat, a, labels, tau);
      for (int b = 0; b < n; ++b) total[static_cast<std::size_t>(b)] += static_cast<int128>(mult) * sums[static_cast<std::size_t>(b)];
    }
  }
  std::vector<double> out(static_cast<std::size_t>(n));
  const double scale = static_cast<double>(cfg.repetitions) * cfg.rho;
  for (int b = 0; b < n; ++b) out[static_cast<std::size_t>(b)] = static_cast<double>(total[static_cast<std::size_t>(b)]) / scale;
  out[static_cast<std::size_t>(a)] = 0.0;
  return out;
}

inline double estimate_F_recovery(const std::vector<PathPattern>& family, int a, int b, const LabelIndex& labels,
                                  int n, const EstimatorConfig& cfg) {
  require(a != b, "rooted statistic needs distinct endpoints");
  require(b >= 0 && b < n, "endpoint out of range");
  return estimate_F_recovery_all(family, a, labels, n, cfg)[static_cast<std::size_t>(b)];
}

inline double estimate_F_recovery(const std::vector<PathPattern>& family, int a, int b, const Observation& obs,
                                  const EstimatorConfig& cfg) {
  LabelIndex labels(obs);
  return estimate_F_recovery(family, a, b, labels, obs.n(), cfg);
}

}  // namespace xorlab
