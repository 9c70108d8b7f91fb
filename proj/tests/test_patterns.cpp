#include <gtest/gtest.h>

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "oracles.hpp"
#include "xorlab/patterns.hpp"

using namespace xorlab;

namespace {

Hypergraph make(int v, std::vector<Edge> edges) {
  Hypergraph h{v, std::move(edges)};
  h.normalize();
  return h;
}

// Every relabeling of `h` by permutations of [v] that fix the listed vertices.
std::set<std::vector<Edge>> orbit(const Hypergraph& h, const std::vector<int>& fixed) {
  std::vector<int> movable;
  for (int u = 0; u < h.v; ++u)
    if (std::find(fixed.begin(), fixed.end(), u) == fixed.end()) movable.push_back(u);
  std::set<std::vector<Edge>> out;
  std::vector<int> img = movable;
  do {
    std::vector<int> perm(static_cast<std::size_t>(h.v));
    std::iota(perm.begin(), perm.end(), 0);
    for (std::size_t i = 0; i < movable.size(); ++i) perm[static_cast<std::size_t>(movable[i])] = img[i];
    std::vector<Edge> edges;
    for (const auto& e : h.edges) {
      Edge f;
      for (int u : e) f.push_back(perm[static_cast<std::size_t>(u)]);
      std::sort(f.begin(), f.end());
      edges.push_back(f);
    }
    std::sort(edges.begin(), edges.end());
    out.insert(edges);
  } while (std::next_permutation(img.begin(), img.end()));
  return out;
}

std::vector<int> sorted_degrees(const Hypergraph& h) {
  auto d = h.degrees();
  std::sort(d.begin(), d.end());
  return d;
}

}  // namespace

TEST(Patterns, SixGadgetsForR1K3) {
  const auto gadgets = enumerate_gadgets(1, 3);
  ASSERT_EQ(gadgets.size(), 6U);
  for (const auto& g : gadgets) {
    EXPECT_EQ(sorted_degrees(g.graph), (std::vector<int>{1, 1, 2, 2}));
    EXPECT_TRUE(is_gadget(g.graph, 1, 3));
    const auto deg = g.graph.degrees();
    EXPECT_EQ(deg[static_cast<std::size_t>(g.leaves.first)], 1);
    EXPECT_EQ(deg[static_cast<std::size_t>(g.leaves.second)], 1);
    EXPECT_LT(g.leaves.first, g.leaves.second);
  }
  EXPECT_TRUE(std::is_sorted(gadgets.begin(), gadgets.end(),
                             [](const Gadget& a, const Gadget& b) { return a.graph.edges < b.graph.edges; }));
}

TEST(Patterns, GadgetsMatchIndependentFilter) {
  for (auto [r, k] : {std::pair{1, 3}, std::pair{2, 3}, std::pair{1, 4}}) {
    const auto lib = enumerate_gadgets(r, k);
    const auto ref = oracle::gadgets_by_filter(r, k);
    std::set<std::vector<Edge>> a, b;
    for (const auto& g : lib) a.insert(g.graph.edges);
    for (const auto& g : ref) b.insert(g.edges);
    EXPECT_EQ(a, b) << "r=" << r << " k=" << k;
    EXPECT_EQ(lib.size(), ref.size());
    for (const auto& g : lib) {
      int sum = 0;
      for (int d : g.graph.degrees()) sum += d;
      EXPECT_EQ(sum, 2 * r * k);
    }
  }
}

TEST(Patterns, GadgetEnumerationCap) {
  FamilyLimits tight;
  tight.max_candidate_edges = 10;
  EXPECT_THROW(enumerate_gadgets(2, 3, tight), CapExceeded);
  EXPECT_THROW(enumerate_gadgets(0, 3), ValidationError);
}

TEST(Patterns, WeakDeletionSemantics) {
  // Two triangles' worth of 3-sets chained through single vertices: deleting
  // the shared vertex 2 of {0,1,2} and {2,3,4} leaves {0,1} and {3,4} apart.
  const auto chain = make(5, {{0, 1, 2}, {2, 3, 4}});
  EXPECT_TRUE(is_connected(chain));
  EXPECT_FALSE(connected_after_weak_deletion(chain, 2));
  EXPECT_TRUE(connected_after_weak_deletion(chain, 0));
  const auto pair = make(4, {{0, 1, 2}, {1, 2, 3}});
  for (int u = 0; u < 4; ++u) EXPECT_TRUE(connected_after_weak_deletion(pair, u));
}

TEST(Patterns, CycleFamilyStructure) {
  const auto fam = build_cycle_family(1, 3, 2);
  ASSERT_EQ(fam.size(), 45U);
  for (const auto& h : fam) {
    EXPECT_EQ(h.v(), 6);
    EXPECT_EQ(h.s(), 4);
    EXPECT_EQ(h.ell(), 2);
    for (int d : h.graph.degrees()) EXPECT_EQ(d, 2);
    EXPECT_TRUE(check_pattern(h, true));
    EXPECT_TRUE(h.graph.is_simple());
  }
}

TEST(Patterns, CycleFamilyEqualsRelabelingOrbit) {
  const auto fam = build_cycle_family(1, 3, 2);
  std::set<std::vector<Edge>> lib;
  for (const auto& h : fam) lib.insert(h.graph.edges);
  const auto ref = orbit(make(6, {{0, 1, 2}, {1, 2, 3}, {3, 4, 5}, {0, 4, 5}}), {});
  EXPECT_EQ(lib, ref);
}

TEST(Patterns, CycleFamilyMembership) {
  const auto fam = build_cycle_family(1, 3, 2);
  FamilyIndex<CyclePattern> index(fam);
  // {123,124,356,456} glues two gadgets along the interface pair {3,4}.
  EXPECT_TRUE(index.contains(make(6, {{0, 1, 2}, {0, 1, 3}, {2, 4, 5}, {3, 4, 5}})));
  // {123,145,246,356} is 2-regular but no two of its edges share two
  // vertices, so it contains no U(1,3) gadget.
  const auto even = make(6, {{0, 1, 2}, {0, 3, 4}, {1, 3, 5}, {2, 4, 5}});
  for (int d : even.degrees()) EXPECT_EQ(d, 2);
  EXPECT_FALSE(index.contains(even));
}

TEST(Patterns, CycleFamilyClosedUnderRelabeling) {
  const auto fam = build_cycle_family(1, 3, 2);
  FamilyIndex<CyclePattern> index(fam);
  KeyedStream rng(42, "perm");
  for (const auto& h : fam) {
    for (int t = 0; t < 100; ++t) {
      std::vector<int> perm(6);
      std::iota(perm.begin(), perm.end(), 0);
      for (int i = 5; i > 0; --i) std::swap(perm[static_cast<std::size_t>(i)], perm[rng.below(static_cast<std::uint64_t>(i + 1))]);
      EXPECT_TRUE(index.contains(h.graph.relabeled(perm)));
    }
  }
}

TEST(Patterns, LongerCycleFamilySize) {
  // Cycle of three U(1,3) blocks: 9! labelings over 48 automorphisms.
  const auto fam = build_cycle_family(1, 3, 3);
  EXPECT_EQ(fam.size(), 362880U / 48U);
  for (const auto& h : fam) EXPECT_TRUE(check_pattern(h, true));
}

TEST(Patterns, PathFamilyStructure) {
  const auto fam = build_path_family(1, 3, 2);
  ASSERT_EQ(fam.size(), 30U);
  for (const auto& p : fam) {
    EXPECT_EQ(p.v(), 7);
    EXPECT_EQ(p.s(), 4);
    EXPECT_EQ(sorted_degrees(p.graph), (std::vector<int>{1, 1, 2, 2, 2, 2, 2}));
    const auto [a, b] = p.leaves();
    EXPECT_NE(a, b);
    EXPECT_EQ(p.graph.degrees()[static_cast<std::size_t>(a)], 1);
    EXPECT_EQ(p.graph.degrees()[static_cast<std::size_t>(b)], 1);
    EXPECT_TRUE(check_pattern(p, false));
  }
}

TEST(Patterns, PathFamilyEqualsLeafFixingOrbit) {
  const auto fam = build_path_family(1, 3, 2);
  std::set<std::vector<Edge>> lib;
  for (const auto& p : fam) lib.insert(p.graph.edges);
  const auto ref = orbit(make(7, {{0, 1, 2}, {1, 2, 3}, {3, 4, 5}, {4, 5, 6}}), {0, 6});
  EXPECT_EQ(lib, ref);
}

TEST(Patterns, CuttingACycleGivesAPath) {
  const auto cycles = build_cycle_family(1, 3, 2);
  FamilyIndex<PathPattern> index(build_path_family(1, 3, 2));
  for (const auto& h : cycles) {
    const auto p = cut_cycle(h);
    EXPECT_TRUE(check_pattern(p, false));
    EXPECT_TRUE(index.contains(p.graph));
  }
}

TEST(Patterns, SampledFamilies) {
  const auto full = build_cycle_family(1, 3, 2);
  FamilyIndex<CyclePattern> index(full);
  const auto a = build_cycle_family(1, 3, 2, FamilyMode::sample(10, 7));
  const auto b = build_cycle_family(1, 3, 2, FamilyMode::sample(10, 7));
  ASSERT_FALSE(a.empty());
  EXPECT_LE(a.size(), 10U);
  ASSERT_EQ(a.size(), b.size());
  for (std::size_t i = 0; i < a.size(); ++i) {
    EXPECT_EQ(a[i].graph, b[i].graph);
    EXPECT_TRUE(index.contains(a[i].graph));
    EXPECT_TRUE(check_pattern(a[i], true));
  }
  for (const auto& p : build_path_family(2, 3, 2, FamilyMode::sample(5, 1))) {
    EXPECT_EQ(p.v(), 13);
    EXPECT_EQ(p.s(), 8);
    EXPECT_TRUE(check_pattern(p, false));
  }
}

TEST(Patterns, FamilyArgumentChecks) {
  EXPECT_THROW(build_cycle_family(1, 3, 1), ValidationError);
  EXPECT_THROW(build_cycle_family(2, 3, 2), CapExceeded);
  FamilyLimits small;
  small.max_vertices = 5;
  EXPECT_THROW(build_cycle_family(1, 3, 2, FamilyMode::full(), small), CapExceeded);
}

TEST(Patterns, ExportRoundTrip) {
  const auto fam = build_path_family(1, 3, 2);
  for (const auto& p : fam) {
    std::ostringstream os;
    write_pattern(os, p);
    std::istringstream is(os.str());
    std::string line, side;
    std::getline(is, line);
    std::getline(is, side);
    const auto back = read_pattern<PathPattern>(line, side);
    EXPECT_EQ(back.graph, p.graph);
    EXPECT_EQ(back.interfaces, p.interfaces);
    ASSERT_EQ(back.blocks.size(), p.blocks.size());
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
      EXPECT_EQ(back.blocks[i].vertices, p.blocks[i].vertices);
      EXPECT_EQ(back.blocks[i].local_edges, p.blocks[i].local_edges);
    }
  }
}
