#include <gtest/gtest.h>

#include <random>
#include <set>

#include "support.hpp"
#include "traffic/local_product.hpp"

using namespace traffic;
using test_support::random_graph;

namespace {
EdgeLabel la{"a", false}, las{"a", true}, lb{"b", false};

SamplerList free_group() {
  return {std::make_shared<LineSampler>("a"), std::make_shared<LineSampler>("b")};
}

// In the Cayley graph of a free group a rooted test graph has exactly one embedding
// when it is a tree whose vertices carry at most one outgoing and one incoming edge
// per generator, and none otherwise.
bool folds_into_free_group(const StarGraph& g) {
  // parallel copies of one edge read the same weight 1
  std::set<std::tuple<int, int, std::string>> edges;
  for (auto& e : g.edges()) {
    if (e.src == e.dst) return false;
    if (e.label.star) edges.insert({e.dst, e.src, e.label.variable});
    else edges.insert({e.src, e.dst, e.label.variable});
  }
  std::set<std::pair<int, int>> pairs;
  for (auto& [a, b, v] : edges) pairs.insert({std::min(a, b), std::max(a, b)});
  if (pairs.size() != edges.size() || g.vertex_count() != static_cast<int>(edges.size()) + 1 || !g.connected())
    return false;
  std::set<std::tuple<int, std::string, bool>> seen;
  for (auto& [a, b, v] : edges) {
    if (!seen.insert({a, v, true}).second) return false;
    if (!seen.insert({b, v, false}).second) return false;
  }
  return true;
}

// Rooted injective count by enumerating all injective maps into the network matrices.
Complex brute_rooted(const StarGraph& g, int r, const RootedNetwork& net) {
  ComplexFamily F = network_family(net);
  int n = g.vertex_count(), N = net.vertex_count;
  std::vector<int> phi(n, 0);
  Complex total = 0;
  auto entry = [&](const Edge& e) {
    if (!F.has(e.label.variable)) return Complex(0.0);
    auto& m = F.get(e.label.variable);
    return e.label.star ? std::conj(m(phi[e.dst], phi[e.src])) : m(phi[e.src], phi[e.dst]);
  };
  std::function<void(int)> rec = [&](int v) {
    if (v == n) {
      Complex p = 1;
      for (auto& e : g.edges()) p *= entry(e);
      total += p;
      return;
    }
    for (int x = 0; x < N; ++x) {
      if (v == r && x != net.root) continue;
      if (std::find(phi.begin(), phi.begin() + v, x) != phi.begin() + v) continue;
      phi[v] = x;
      rec(v + 1);
    }
  };
  rec(0);
  return total;
}

StarGraph random_rooted_graph(std::mt19937_64& rng, int radius_limit) {
  while (true) {
    StarGraph g = random_graph(rng, 4, 4, {"a", "b"});
    if (graph_radius(g, 0) <= radius_limit) return g;
  }
}
}  // namespace

TEST(LocalProduct, FreeGroupBall) {
  EXPECT_EQ(local_free_product(free_group(), 2, 1).vertex_count, 17);
  auto net = local_free_product(free_group(), 3, 1);
  EXPECT_EQ(net.vertex_count, 53);
  EXPECT_EQ(static_cast<int>(net.edges.size()), 52);
  for (int v = 0; v < net.vertex_count; ++v) EXPECT_LE(net.distance[v], 3);
  EXPECT_EQ(local_free_product(free_group(), 0, 1).vertex_count, 1);
}

TEST(LocalProduct, CountsInTheFreeGroup) {
  auto net = local_free_product(free_group(), 3, 2);
  std::mt19937_64 rng(81);
  for (int trial = 0; trial < 300; ++trial) {
    StarGraph g = random_rooted_graph(rng, 3);
    EXPECT_EQ(rooted_injective_count(g, 0, net), Complex(folds_into_free_group(g) ? 1.0 : 0.0));
  }
  EXPECT_EQ(rooted_injective_count(StarGraph(3, {{0, 1, la}, {0, 2, las}}), 0, net), Complex(1.0));
  EXPECT_EQ(rooted_injective_count(StarGraph(3, {{0, 1, la}, {0, 2, la}}), 0, net), Complex(0.0));
  EXPECT_EQ(rooted_injective_count(StarGraph(2, {{0, 1, la}, {1, 0, lb}}), 0, net), Complex(0.0));
}

TEST(LocalProduct, SingleLine) {
  auto net = local_free_product({std::make_shared<LineSampler>("a")}, 3, 9);
  EXPECT_EQ(net.vertex_count, 7);
  EXPECT_EQ(rooted_injective_count(StarGraph(4, {{0, 1, la}, {1, 2, la}, {2, 3, la}}), 0, net), Complex(1.0));
  EXPECT_EQ(rooted_injective_count(StarGraph(3, {{1, 0, la}, {0, 2, la}}), 0, net), Complex(1.0));
  EXPECT_EQ(rooted_injective_count(StarGraph(2, {{0, 1, lb}}), 0, net), Complex(0.0));
}

TEST(LocalProduct, AgreesWithBruteForce) {
  std::vector<WeightedEdge> tri{{0, 1, "b", Complex(0.5, 1.0)}, {1, 2, "b", 2.0}, {2, 0, "b", Complex(0, -1)},
                                {0, 0, "b", 3.0}};
  SamplerList samplers{std::make_shared<PercolatedLineSampler>("a", 0.6),
                       std::make_shared<FiniteSampler>("triangle", 3, tri, 0)};
  std::mt19937_64 rng(82);
  for (int s = 0; s < 4; ++s) {
    auto net = local_free_product(samplers, 2, 100 + s);
    ASSERT_LE(net.vertex_count, 40);
    for (int trial = 0; trial < 25; ++trial) {
      StarGraph g = random_rooted_graph(rng, 2);
      EXPECT_LT(std::abs(rooted_injective_count(g, 0, net) - brute_rooted(g, 0, net)), 1e-12);
    }
  }
}

TEST(LocalProduct, TruncationIsConsistent) {
  SamplerList samplers{std::make_shared<PercolatedLineSampler>("a", 0.7), std::make_shared<LineSampler>("b")};
  std::mt19937_64 rng(83);
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    auto deep = local_free_product(samplers, 4, seed);
    auto shallow = local_free_product(samplers, 2, seed);
    auto cut = restrict(deep, 2);
    EXPECT_EQ(cut.vertex_count, shallow.vertex_count);
    EXPECT_EQ(cut.edges.size(), shallow.edges.size());
    for (int trial = 0; trial < 20; ++trial) {
      StarGraph g = random_rooted_graph(rng, 2);
      Complex c = rooted_injective_count(g, 0, shallow);
      EXPECT_EQ(rooted_injective_count(g, 0, cut), c);
      EXPECT_EQ(rooted_injective_count(g, 0, deep), c);
    }
  }
  auto net = local_free_product(samplers, 2, 0);
  EXPECT_THROW(rooted_injective_count(StarGraph(4, {{0, 1, lb}, {1, 2, lb}, {2, 3, lb}}), 0, net), TruncationError);
  EXPECT_THROW(restrict(net, 3), TruncationError);
}

TEST(LocalProduct, DeterministicInTheSeed) {
  SamplerList samplers{std::make_shared<PercolatedLineSampler>("a", 0.5), std::make_shared<LineSampler>("b")};
  auto a = network_to_json(local_free_product(samplers, 3, 42)).dump();
  EXPECT_EQ(a, network_to_json(local_free_product(samplers, 3, 42)).dump());
  bool differs = false;
  for (std::uint64_t s = 43; s < 50 && !differs; ++s)
    differs = network_to_json(local_free_product(samplers, 3, s)).dump() != a;
  EXPECT_TRUE(differs);
}

TEST(LocalProduct, RejectsBadInput) {
  EXPECT_THROW(local_free_product({}, 2, 0), ContractError);
  EXPECT_THROW(local_free_product(free_group(), -1, 0), ContractError);
  EXPECT_THROW(local_free_product(free_group(), kLocalDepthGuard + 1, 0), GuardError);
  EXPECT_THROW(PercolatedLineSampler("a", 1.5), ContractError);
  EXPECT_THROW(FiniteSampler("f", 2, {{0, 2, "a", 1.0}}, 0), ContractError);
  EXPECT_THROW(FiniteSampler("f", 2, {}, 3), ContractError);
  auto net = local_free_product(free_group(), 2, 0);
  EXPECT_THROW(rooted_injective_count(StarGraph(2, {{0, 1, la}}), 5, net), ContractError);
}

TEST(LocalProduct, FreeProductConsistency) {
  SamplerList samplers{std::make_shared<PercolatedLineSampler>("a", 0.7),
                       std::make_shared<PercolatedLineSampler>("b", 0.4)};
  std::vector<StarGraph> graphs{
      StarGraph(2, {{0, 1, la}}),
      StarGraph(3, {{0, 1, la}, {0, 2, lb}}),
      StarGraph(4, {{1, 0, la}, {0, 2, lb}, {2, 3, la}}),
      StarGraph(3, {{0, 1, la}, {1, 2, lb}, {2, 0, la}}),  // cyclic component graph
  };
  auto rows = check_freeprod_consistency(samplers, graphs, {{"a", 0}, {"b", 1}}, 3, 300, 7);
  ASSERT_EQ(rows.size(), graphs.size());
  for (auto& r : rows) EXPECT_TRUE(r.within_3sigma) << r.product.mean << " vs " << r.prediction.str();
  EXPECT_EQ(rows[3].prediction, Value(0));
  EXPECT_NEAR(rows[0].prediction.to_complex().real(), 0.7, 0.1);
}
