#include <gtest/gtest.h>

#include <random>

#include "support.hpp"
#include "traffic/canonical.hpp"

using namespace traffic;
using test_support::brute_isomorphic;
using test_support::random_graph;
using test_support::random_permutation;
using test_support::relabel;

namespace {
EdgeLabel lx{"x", false}, lxs{"x", true}, ly{"y", false};
}

TEST(Canonical, Examples) {
  StarGraph a(3, {{0, 1, lx}, {1, 2, lx}, {2, 0, lx}});
  StarGraph b(3, {{2, 0, lx}, {0, 1, lx}, {1, 2, lx}});
  StarGraph c(3, {{1, 0, lx}, {0, 2, lx}, {2, 1, lx}});
  EXPECT_EQ(canonicalize(a).bytes, canonicalize(b).bytes);
  EXPECT_EQ(canonicalize(a).bytes, canonicalize(c).bytes);
  EXPECT_NE(canonicalize(StarGraph(2, {{0, 1, lx}, {1, 0, lx}})).bytes,
            canonicalize(StarGraph(2, {{0, 1, lx}, {1, 0, lxs}})).bytes);
  EXPECT_EQ(canonicalize(StarGraph(2, {{0, 1, lx}})).bytes, canonicalize(StarGraph(2, {{1, 0, lx}})).bytes);
  // multiplicity and orientation matter
  EXPECT_NE(canonicalize(StarGraph(2, {{0, 1, lx}, {0, 1, lx}})).bytes,
            canonicalize(StarGraph(2, {{0, 1, lx}, {1, 0, lx}})).bytes);
  EXPECT_NE(canonicalize(StarGraph(2, {{0, 1, lx}})).bytes, canonicalize(StarGraph(2, {{0, 1, lx}, {0, 1, lx}})).bytes);
}

TEST(Canonical, RootsDistinguishMonomials) {
  StarGraph path(3, {{0, 1, lx}, {1, 2, lx}});
  EXPECT_NE(canonicalize(GraphMonomial(path, 0, 2)).bytes, canonicalize(GraphMonomial(path, 2, 0)).bytes);
  EXPECT_EQ(canonicalize(GraphMonomial(path, 0, 2)).bytes,
            canonicalize(GraphMonomial(StarGraph(3, {{2, 1, lx}, {1, 0, lx}}), 2, 0)).bytes);
  EXPECT_NE(canonicalize(GraphMonomial(path, 0, 2)).bytes, canonicalize(path).bytes);
  EXPECT_NE(canonicalize(NGraphMonomial(path, {0, 1})).bytes, canonicalize(NGraphMonomial(path, {1, 0})).bytes);
  EXPECT_NE(canonicalize(NGraphMonomial(path, {0})).bytes, canonicalize(NGraphMonomial(path, {0, 0})).bytes);
}

TEST(Canonical, InvariantUnderRelabeling) {
  std::mt19937_64 rng(21);
  for (int trial = 0; trial < 300; ++trial) {
    StarGraph g = random_graph(rng, 6, 8, {"x", "y"}, true, trial % 3 != 0);
    auto perm = random_permutation(rng, g.vertex_count());
    StarGraph h = relabel(g, perm);
    auto cg = canonicalize(g), ch = canonicalize(h);
    EXPECT_EQ(cg.bytes, ch.bytes);
    // the relabeling really produces the canonical representative
    EXPECT_EQ(permute_vertices(g, cg.relabeling), permute_vertices(h, ch.relabeling));
    EXPECT_EQ(canonical_graph(g), canonical_graph(h));
  }
}

TEST(Canonical, AgreesWithBruteForceIsomorphism) {
  std::mt19937_64 rng(22);
  std::vector<StarGraph> corpus;
  for (int i = 0; i < 70; ++i) corpus.push_back(random_graph(rng, 4, 5, {"x", "y"}));
  // add isomorphic copies so that positive pairs appear
  for (int i = 0; i < 20; ++i) corpus.push_back(relabel(corpus[i], random_permutation(rng, corpus[i].vertex_count())));
  // many edge-free and low-edge graphs collide often; that is intended
  for (std::size_t i = 0; i < corpus.size(); ++i)
    for (std::size_t j = i; j < corpus.size(); ++j) {
      bool iso = brute_isomorphic(corpus[i], corpus[j]);
      bool same = canonicalize(corpus[i]).bytes == canonicalize(corpus[j]).bytes;
      ASSERT_EQ(iso, same) << i << " vs " << j;
    }
}

TEST(Canonical, RegularGraphsNeedIndividualization) {
  // two 6-vertex 2-regular graphs that colour refinement cannot tell apart
  auto cycle = [](int n, int offset, std::vector<Edge>& es) {
    for (int i = 0; i < n; ++i) es.push_back({offset + i, offset + (i + 1) % n, lx});
  };
  std::vector<Edge> hexagon, triangles;
  cycle(6, 0, hexagon);
  cycle(3, 0, triangles);
  cycle(3, 3, triangles);
  StarGraph h(6, hexagon), t(6, triangles);
  EXPECT_NE(canonicalize(h).bytes, canonicalize(t).bytes);
  std::mt19937_64 rng(23);
  for (int trial = 0; trial < 20; ++trial) {
    EXPECT_EQ(canonicalize(relabel(h, random_permutation(rng, 6))).bytes, canonicalize(h).bytes);
    EXPECT_EQ(canonicalize(relabel(t, random_permutation(rng, 6))).bytes, canonicalize(t).bytes);
  }
}

TEST(Canonical, RootedAgreesWithBruteForce) {
  std::mt19937_64 rng(24);
  for (int trial = 0; trial < 200; ++trial) {
    StarGraph a = random_graph(rng, 4, 5, {"x"});
    std::uniform_int_distribution<int> v(0, a.vertex_count() - 1);
    int ra = v(rng);
    StarGraph b = trial % 2 ? relabel(a, random_permutation(rng, a.vertex_count())) : random_graph(rng, 4, 5, {"x"});
    std::uniform_int_distribution<int> w(0, b.vertex_count() - 1);
    int rb = w(rng);
    bool iso = brute_isomorphic(a, b, ra, rb);
    bool same = canonicalize(NGraphMonomial(a, {ra})).bytes == canonicalize(NGraphMonomial(b, {rb})).bytes;
    EXPECT_EQ(iso, same);
  }
}

TEST(Canonical, Deterministic) {
  StarGraph g(4, {{0, 1, lx}, {1, 2, ly}, {2, 3, lxs}, {3, 0, lx}, {1, 1, ly}});
  auto first = canonicalize(g);
  for (int i = 0; i < 5; ++i) EXPECT_EQ(canonicalize(g).bytes, first.bytes);
}
