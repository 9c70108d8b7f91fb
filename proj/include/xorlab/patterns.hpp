#pragma once

// Gadget family U(r,k) and the glued cycle / path pattern families with their
// block decompositions.
//
// Pattern vertices are 0-based internally; the export format is 1-based.
// A path pattern always has its leaves pinned at labels 0 and v-1, so the
// path family is closed under relabelings that fix both leaves.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <map>
#include <numeric>
#include <ostream>
#include <set>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include "xorlab/combinatorics.hpp"
#include "xorlab/error.hpp"
#include "xorlab/rng.hpp"

namespace xorlab {

using Edge = std::vector<int>;  // sorted vertex list

struct Hypergraph {
  int v = 0;
  std::vector<Edge> edges;  // kept sorted lexicographically

  int k() const noexcept { return edges.empty() ? 0 : static_cast<int>(edges.front().size()); }
  std::size_t size() const noexcept { return edges.size(); }

  void normalize() {
    for (auto& e : edges) std::sort(e.begin(), e.end());
    std::sort(edges.begin(), edges.end());
  }

  std::vector<int> degrees() const {
    std::vector<int> deg(static_cast<std::size_t>(v), 0);
    for (const auto& e : edges)
      for (int u : e) ++deg[static_cast<std::size_t>(u)];
    return deg;
  }

  // Assumes normalized edges.
  bool is_simple() const { return std::adjacent_find(edges.begin(), edges.end()) == edges.end(); }

  void validate() const {
    for (const auto& e : edges) {
      require(std::is_sorted(e.begin(), e.end()), "hyperedge not sorted");
      require(std::adjacent_find(e.begin(), e.end()) == e.end(), "hyperedge has repeated vertex");
      for (int u : e) require(u >= 0 && u < v, "hyperedge vertex out of range");
    }
    require(is_simple(), "hypergraph has repeated edges");
  }

  Hypergraph relabeled(const std::vector<int>& perm) const {
    Hypergraph out{v, {}};
    out.edges.reserve(edges.size());
    for (const auto& e : edges) {
      Edge f;
      f.reserve(e.size());
      for (int u : e) f.push_back(perm[static_cast<std::size_t>(u)]);
      out.edges.push_back(std::move(f));
    }
    out.normalize();
    return out;
  }

  bool operator==(const Hypergraph&) const = default;
  bool operator<(const Hypergraph& o) const { return std::tie(v, edges) < std::tie(o.v, o.edges); }
};

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(static_cast<std::size_t>(n)) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int a) {
    while (parent[static_cast<std::size_t>(a)] != a) {
      parent[static_cast<std::size_t>(a)] = parent[static_cast<std::size_t>(parent[static_cast<std::size_t>(a)])];
      a = parent[static_cast<std::size_t>(a)];
    }
    return a;
  }
  void unite(int a, int b) { parent[static_cast<std::size_t>(find(a))] = find(b); }
};

// Connectivity of the vertex set minus `removed` (-1 for none), where each
// edge links its remaining vertices. Vertices of degree zero count as
// components of their own.
inline bool connected_without(const Hypergraph& h, int removed) {
  UnionFind uf(h.v);
  for (const auto& e : h.edges) {
    int first = -1;
    for (int u : e) {
      if (u == removed) continue;
      if (first < 0)
        first = u;
      else
        uf.unite(first, u);
    }
  }
  int root = -1;
  for (int u = 0; u < h.v; ++u) {
    if (u == removed) continue;
    const int r = uf.find(u);
    if (root < 0)
      root = r;
    else if (r != root)
      return false;
  }
  return true;
}

}  // namespace detail

inline bool is_connected(const Hypergraph& h) { return detail::connected_without(h, -1); }

// Weak deletion: `u` is removed from every incident edge and connectivity is
// judged through the shrunken edges.
inline bool connected_after_weak_deletion(const Hypergraph& h, int u) { return detail::connected_without(h, u); }

struct Gadget {
  Hypergraph graph;
  std::pair<int, int> leaves;  // the two degree-1 vertices, ascending
};

// Checks the three gadget conditions for a hypergraph on rk+1 vertices.
inline bool is_gadget(const Hypergraph& h, int r, int k) {
  if (h.v != r * k + 1 || static_cast<int>(h.edges.size()) != 2 * r) return false;
  for (const auto& e : h.edges)
    if (static_cast<int>(e.size()) != k) return false;
  if (!h.is_simple()) return false;
  for (int d : h.degrees())
    if (d != 1 && d != 2) return false;
  if (!is_connected(h)) return false;
  for (int u = 0; u < h.v; ++u)
    if (!connected_after_weak_deletion(h, u)) return false;
  return true;
}

struct FamilyLimits {
  std::uint64_t max_candidate_edges = 256;      // cap on C(rk+1, k) for gadget enumeration
  int max_vertices = 24;                        // color bitmask width
  std::uint64_t max_closure_work = 200'000'000; // templates x relabelings in full mode
};

/// All labeled gadgets on [rk+1], in lexicographic order of edge lists.
inline std::vector<Gadget> enumerate_gadgets(int r, int k, const FamilyLimits& limits = {}) {
  require(r >= 1, "r must be at least 1");
  require(k >= 3, "k must be at least 3");
  const int nv = r * k + 1;
  const std::uint64_t candidates = binomial(static_cast<std::uint64_t>(nv), static_cast<std::uint64_t>(k));
  if (candidates > limits.max_candidate_edges)
    throw CapExceeded("enumeration too large: C(" + std::to_string(nv) + "," + std::to_string(k) + ") = " +
                      std::to_string(candidates) + " candidate edges");

  // Candidate edges in lexicographic order.
  std::vector<Edge> pool;
  Edge cur;
  auto gen = [&](auto&& self, int start) -> void {
    if (static_cast<int>(cur.size()) == k) {
      pool.push_back(cur);
      return;
    }
    for (int u = start; u < nv; ++u) {
      cur.push_back(u);
      self(self, u + 1);
      cur.pop_back();
    }
  };
  gen(gen, 0);

  std::vector<Gadget> out;
  std::vector<int> deg(static_cast<std::size_t>(nv), 0);
  std::vector<std::size_t> chosen;
  const int want = 2 * r;
  auto search = [&](auto&& self, std::size_t start) -> void {
    if (static_cast<int>(chosen.size()) == want) {
      Hypergraph h{nv, {}};
      for (auto i : chosen) h.edges.push_back(pool[i]);
      if (!is_gadget(h, r, k)) return;
      std::vector<int> leaves;
      const auto d = h.degrees();
      for (int u = 0; u < nv; ++u)
        if (d[static_cast<std::size_t>(u)] == 1) leaves.push_back(u);
      out.push_back({std::move(h), {leaves[0], leaves[1]}});
      return;
    }
    const std::size_t remaining = static_cast<std::size_t>(want) - chosen.size();
    for (std::size_t i = start; i + remaining <= pool.size(); ++i) {
      bool ok = true;
      for (int u : pool[i])
        if (deg[static_cast<std::size_t>(u)] >= 2) ok = false;
      if (!ok) continue;
      for (int u : pool[i]) ++deg[static_cast<std::size_t>(u)];
      chosen.push_back(i);
      self(self, i + 1);
      chosen.pop_back();
      for (int u : pool[i]) --deg[static_cast<std::size_t>(u)];
    }
  };
  search(search, 0);
  return out;
}

/// One gadget inside a pattern.
struct Block {
  // Pattern labels: vertices.front() is the entry interface, vertices.back()
  // the exit interface, the rest are interior vertices in ascending order.
  std::vector<int> vertices;
  // Gadget edges over local positions 0..rk.
  std::vector<Edge> local_edges;
};

struct Pattern {
  Hypergraph graph;
  std::vector<Block> blocks;
  std::vector<int> interfaces;  // v_1, v_2, ... in chain order

  int v() const noexcept { return graph.v; }
  int s() const noexcept { return static_cast<int>(graph.edges.size()); }
  int ell() const noexcept { return static_cast<int>(blocks.size()); }
  int block_size() const noexcept { return blocks.empty() ? 0 : static_cast<int>(blocks.front().vertices.size()); }
};

/// Gadgets glued cyclically; every vertex has degree 2.
struct CyclePattern : Pattern {};

/// Gadgets glued in a chain; leaves pinned at labels 0 and v-1.
struct PathPattern : Pattern {
  std::pair<int, int> leaves() const noexcept { return {0, graph.v - 1}; }
};

namespace detail {

// Local edges of a block given its ordered vertex list and the pattern graph.
inline std::vector<Edge> local_edges_of(const std::vector<int>& verts, const std::vector<Edge>& graph_edges) {
  std::vector<Edge> out;
  for (const auto& e : graph_edges) {
    Edge loc;
    for (int u : e) {
      auto it = std::find(verts.begin(), verts.end(), u);
      if (it == verts.end()) break;
      loc.push_back(static_cast<int>(it - verts.begin()));
    }
    if (loc.size() == e.size()) {
      std::sort(loc.begin(), loc.end());
      out.push_back(std::move(loc));
    }
  }
  std::sort(out.begin(), out.end());
  return out;
}

template <class P>
void refresh_local_edges(P& pat) {
  for (auto& b : pat.blocks) b.local_edges = local_edges_of(b.vertices, pat.graph.edges);
}

template <class P>
P relabel_pattern(const P& pat, const std::vector<int>& perm) {
  P out;
  out.graph = pat.graph.relabeled(perm);
  out.blocks = pat.blocks;
  for (auto& b : out.blocks)
    for (auto& u : b.vertices) u = perm[static_cast<std::size_t>(u)];
  for (auto& b : out.blocks) std::sort(b.vertices.begin() + 1, b.vertices.end() - 1);
  out.interfaces = pat.interfaces;
  for (auto& u : out.interfaces) u = perm[static_cast<std::size_t>(u)];
  refresh_local_edges(out);
  return out;
}

// Oriented gadget: local vertex order (entry, interiors ascending, exit).
struct OrientedGadget {
  std::vector<Edge> local_edges;
};

inline OrientedGadget orient(const Gadget& g, bool reversed) {
  const int entry = reversed ? g.leaves.second : g.leaves.first;
  const int exit = reversed ? g.leaves.first : g.leaves.second;
  std::vector<int> order{entry};
  for (int u = 0; u < g.graph.v; ++u)
    if (u != entry && u != exit) order.push_back(u);
  order.push_back(exit);
  return {local_edges_of(order, g.graph.edges)};
}

// Glue oriented gadgets on the standard layout: block i uses interface i*rk,
// interiors i*rk+1 .. i*rk+rk-1 and exit (i+1)*rk (mod rk*ell for a cycle).
template <class P>
P glue(const std::vector<const OrientedGadget*>& parts, int block_vertices, bool cyclic) {
  const int step = block_vertices - 1;
  const int ell = static_cast<int>(parts.size());
  P pat;
  pat.graph.v = cyclic ? step * ell : step * ell + 1;
  for (int i = 0; i < ell; ++i) {
    Block b;
    for (int j = 0; j < block_vertices; ++j) b.vertices.push_back((i * step + j) % pat.graph.v);
    b.local_edges = parts[static_cast<std::size_t>(i)]->local_edges;
    for (const auto& le : b.local_edges) {
      Edge e;
      for (int pos : le) e.push_back(b.vertices[static_cast<std::size_t>(pos)]);
      pat.graph.edges.push_back(std::move(e));
    }
    pat.interfaces.push_back(b.vertices.front());
    pat.blocks.push_back(std::move(b));
  }
  if (!cyclic) pat.interfaces.push_back(pat.blocks.back().vertices.back());
  pat.graph.normalize();
  return pat;
}

// Gadget isomorphism-class representatives.
inline std::vector<Gadget> gadget_representatives(const std::vector<Gadget>& all) {
  std::vector<Gadget> reps;
  std::set<std::vector<Edge>> seen;
  for (const auto& g : all) {
    if (seen.count(g.graph.edges)) continue;
    reps.push_back(g);
    std::vector<int> perm(static_cast<std::size_t>(g.graph.v));
    std::iota(perm.begin(), perm.end(), 0);
    do {
      seen.insert(g.graph.relabeled(perm).edges);
    } while (std::next_permutation(perm.begin(), perm.end()));
  }
  return reps;
}

template <class P>
std::vector<P> build_family(int r, int k, int ell, bool cyclic, const FamilyLimits& limits) {
  require(ell >= (cyclic ? 2 : 1), cyclic ? "cycle family needs l >= 2" : "path family needs l >= 1");
  const int v = cyclic ? r * k * ell : r * k * ell + 1;
  if (v > limits.max_vertices)
    throw CapExceeded("pattern has " + std::to_string(v) + " vertices, above the cap of " +
                      std::to_string(limits.max_vertices));
  const auto reps = gadget_representatives(enumerate_gadgets(r, k, limits));
  std::vector<OrientedGadget> oriented;
  for (const auto& g : reps) {
    oriented.push_back(orient(g, false));
    oriented.push_back(orient(g, true));
  }
  // Relabelings: all of S_v for cycles, those fixing both leaves for paths.
  const double perms = factorial(cyclic ? v : v - 2);
  const double templates = std::pow(static_cast<double>(oriented.size()), ell);
  if (templates * perms > static_cast<double>(limits.max_closure_work))
    throw CapExceeded("full family enumeration too large (" + std::to_string(templates) + " templates x " +
                      std::to_string(perms) + " relabelings)");

  std::map<std::vector<Edge>, P> family;
  std::vector<std::size_t> choice(static_cast<std::size_t>(ell), 0);
  while (true) {
    std::vector<const OrientedGadget*> parts;
    for (auto c : choice) parts.push_back(&oriented[c]);
    P tmpl = glue<P>(parts, r * k + 1, cyclic);
    if (tmpl.graph.is_simple() && !family.count(tmpl.graph.edges)) {
      std::vector<int> perm(static_cast<std::size_t>(v));
      std::iota(perm.begin(), perm.end(), 0);
      const auto first = cyclic ? perm.begin() : perm.begin() + 1;
      const auto last = cyclic ? perm.end() : perm.end() - 1;
      do {
        Hypergraph img = tmpl.graph.relabeled(perm);
        if (!family.count(img.edges)) {
          P pat = relabel_pattern(tmpl, perm);
          family.emplace(pat.graph.edges, std::move(pat));
        }
      } while (std::next_permutation(first, last));
    }
    std::size_t pos = 0;
    while (pos < choice.size() && ++choice[pos] == oriented.size()) choice[pos++] = 0;
    if (pos == choice.size()) break;
  }
  std::vector<P> out;
  out.reserve(family.size());
  for (auto& [key, pat] : family) out.push_back(std::move(pat));
  return out;
}

template <class P>
std::vector<P> sample_family(int r, int k, int ell, bool cyclic, std::size_t count, KeyedStream& rng,
                             const FamilyLimits& limits) {
  require(ell >= (cyclic ? 2 : 1), cyclic ? "cycle family needs l >= 2" : "path family needs l >= 1");
  const int v = cyclic ? r * k * ell : r * k * ell + 1;
  if (v > limits.max_vertices)
    throw CapExceeded("pattern has " + std::to_string(v) + " vertices, above the cap of " +
                      std::to_string(limits.max_vertices));
  const auto gadgets = enumerate_gadgets(r, k, limits);
  std::map<std::vector<Edge>, P> family;
  for (std::size_t i = 0; i < count; ++i) {
    std::vector<OrientedGadget> parts_store;
    for (int b = 0; b < ell; ++b) {
      const auto& g = gadgets[static_cast<std::size_t>(rng.below(gadgets.size()))];
      parts_store.push_back(orient(g, rng.below(2) == 1));
    }
    std::vector<const OrientedGadget*> parts;
    for (const auto& p : parts_store) parts.push_back(&p);
    P tmpl = glue<P>(parts, r * k + 1, cyclic);
    if (!tmpl.graph.is_simple()) continue;
    std::vector<int> perm(static_cast<std::size_t>(v));
    std::iota(perm.begin(), perm.end(), 0);
    const std::size_t lo = cyclic ? 0 : 1;
    const std::size_t hi = cyclic ? perm.size() : perm.size() - 1;
    for (std::size_t j = hi; j > lo + 1; --j) std::swap(perm[j - 1], perm[lo + rng.below(j - lo)]);
    P pat = relabel_pattern(tmpl, perm);
    family.emplace(pat.graph.edges, std::move(pat));
  }
  std::vector<P> out;
  for (auto& [key, pat] : family) out.push_back(std::move(pat));
  return out;
}

}  // namespace detail

struct FamilyMode {
  bool sampled = false;
  std::size_t count = 0;
  std::uint64_t seed = 0;

  static FamilyMode full() { return {}; }
  static FamilyMode sample(std::size_t count, std::uint64_t seed) { return {true, count, seed}; }
};

/// Cycle family H(r,k,l): every labeled hypergraph on [rkl] admitting a cyclic
/// gadget decomposition, sorted by edge list.
inline std::vector<CyclePattern> build_cycle_family(int r, int k, int ell, FamilyMode mode = FamilyMode::full(),
                                                    const FamilyLimits& limits = {}) {
  if (!mode.sampled) return detail::build_family<CyclePattern>(r, k, ell, true, limits);
  KeyedStream rng(mode.seed, "cycle-family");
  return detail::sample_family<CyclePattern>(r, k, ell, true, mode.count, rng, limits);
}

/// Path family J(r,k,l) with leaves pinned at labels 0 and rkl.
inline std::vector<PathPattern> build_path_family(int r, int k, int ell, FamilyMode mode = FamilyMode::full(),
                                                  const FamilyLimits& limits = {}) {
  if (!mode.sampled) return detail::build_family<PathPattern>(r, k, ell, false, limits);
  KeyedStream rng(mode.seed, "path-family");
  return detail::sample_family<PathPattern>(r, k, ell, false, mode.count, rng, limits);
}

/// Split the interface vertex v_1 of a cycle pattern into two leaves. The
/// result is relabeled so its leaves sit at 0 and v (the new vertex).
inline PathPattern cut_cycle(const CyclePattern& cyc) {
  const int v1 = cyc.interfaces.front();
  const int fresh = cyc.graph.v;
  PathPattern out;
  out.graph.v = cyc.graph.v + 1;
  out.blocks = cyc.blocks;
  out.blocks.back().vertices.back() = fresh;
  for (const auto& b : out.blocks)
    for (const auto& le : b.local_edges) {
      Edge e;
      for (int pos : le) e.push_back(b.vertices[static_cast<std::size_t>(pos)]);
      out.graph.edges.push_back(std::move(e));
    }
  out.graph.normalize();
  out.interfaces = cyc.interfaces;
  out.interfaces.push_back(fresh);
  std::vector<int> perm(static_cast<std::size_t>(out.graph.v));
  std::iota(perm.begin(), perm.end(), 0);
  std::swap(perm[0], perm[static_cast<std::size_t>(v1)]);
  return detail::relabel_pattern(out, perm);
}

// Lookup of family members by edge set.
template <class P>
class FamilyIndex {
 public:
  explicit FamilyIndex(const std::vector<P>& fam) {
    for (const auto& p : fam) keys_.insert(p.graph.edges);
  }
  bool contains(const Hypergraph& h) const { return keys_.count(h.edges) > 0; }

 private:
  std::set<std::vector<Edge>> keys_;
};

// Checks the structural contract of a cycle or path pattern.
inline bool check_pattern(const Pattern& p, bool cyclic) {
  const auto deg = p.graph.degrees();
  if (!p.graph.is_simple()) return false;
  for (int u = 0; u < p.graph.v; ++u) {
    const bool leaf = !cyclic && (u == 0 || u == p.graph.v - 1);
    if (deg[static_cast<std::size_t>(u)] != (leaf ? 1 : 2)) return false;
  }
  std::vector<Edge> from_blocks;
  for (const auto& b : p.blocks)
    for (const auto& le : b.local_edges) {
      Edge e;
      for (int pos : le) e.push_back(b.vertices[static_cast<std::size_t>(pos)]);
      std::sort(e.begin(), e.end());
      from_blocks.push_back(std::move(e));
    }
  std::sort(from_blocks.begin(), from_blocks.end());
  return from_blocks == p.graph.edges;
}

// ---------------------------------------------------------------------------
// Export: one pattern per line `v ; e1 | e2 | ...` followed by a sidecar line
// `@ interfaces i1 i2 ... ; block b1 ... ; block ...` (1-based, block vertices
// listed entry first, exit last).

inline void write_pattern(std::ostream& os, const Pattern& p) {
  os << p.graph.v << " ;";
  for (std::size_t i = 0; i < p.graph.edges.size(); ++i) {
    if (i) os << " |";
    for (int u : p.graph.edges[i]) os << ' ' << u + 1;
  }
  os << "\n@ interfaces";
  for (int u : p.interfaces) os << ' ' << u + 1;
  for (const auto& b : p.blocks) {
    os << " ; block";
    for (int u : b.vertices) os << ' ' << u + 1;
  }
  os << '\n';
}

template <class P>
P read_pattern(const std::string& line, const std::string& sidecar) {
  P p;
  std::istringstream ls(line);
  std::string tok;
  ls >> p.graph.v >> tok;
  require(tok == ";", "malformed pattern line");
  Edge cur;
  while (ls >> tok) {
    if (tok == "|") {
      p.graph.edges.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(std::stoi(tok) - 1);
    }
  }
  if (!cur.empty()) p.graph.edges.push_back(cur);
  p.graph.normalize();
  std::istringstream ss(sidecar);
  ss >> tok;
  require(tok == "@", "malformed sidecar line");
  ss >> tok;
  require(tok == "interfaces", "malformed sidecar line");
  std::vector<int>* target = &p.interfaces;
  while (ss >> tok) {
    if (tok == ";") {
      ss >> tok;
      require(tok == "block", "malformed sidecar line");
      p.blocks.emplace_back();
      target = &p.blocks.back().vertices;
    } else {
      target->push_back(std::stoi(tok) - 1);
    }
  }
  detail::refresh_local_edges(p);
  return p;
}

}  // namespace xorlab
