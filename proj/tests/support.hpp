#pragma once

// Shared generators and brute-force oracles for the unit tests. The oracles here
// deliberately avoid the library's evaluation code paths.

#include <algorithm>
#include <complex>
#include <cstdint>
#include <functional>
#include <numeric>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "traffic/graph.hpp"
#include "traffic/matrix.hpp"
#include "traffic/value.hpp"

namespace traffic {
// readable gtest failure messages
inline void PrintTo(const Value& v, std::ostream* os) { *os << v.str(); }
}  // namespace traffic

namespace test_support {

using traffic::Complex;
using traffic::ComplexFamily;
using traffic::ComplexMatrix;
using traffic::Edge;
using traffic::StarGraph;

inline StarGraph random_graph(std::mt19937_64& rng, int max_vertices, int max_edges,
                              const std::vector<std::string>& vars = {"x"}, bool stars = true,
                              bool connected = true) {
  std::uniform_int_distribution<int> nv(1, max_vertices);
  int n = nv(rng);
  std::uniform_int_distribution<int> vertex(0, n - 1);
  std::uniform_int_distribution<int> var(0, static_cast<int>(vars.size()) - 1);
  std::bernoulli_distribution coin(0.5);
  auto label = [&] { return traffic::EdgeLabel{vars[var(rng)], stars && coin(rng)}; };
  std::vector<Edge> edges;
  if (connected) {
    // random spanning tree first
    for (int v = 1; v < n; ++v) {
      std::uniform_int_distribution<int> parent(0, v - 1);
      int p = parent(rng);
      if (coin(rng)) edges.push_back({p, v, label()});
      else edges.push_back({v, p, label()});
    }
  }
  int budget = std::max(0, max_edges - static_cast<int>(edges.size()));
  std::uniform_int_distribution<int> extra(connected && n > 1 ? 0 : 1, std::max(connected && n > 1 ? 0 : 1, budget));
  int k = extra(rng);
  for (int i = 0; i < k; ++i) edges.push_back({vertex(rng), vertex(rng), label()});
  return StarGraph(n, edges);
}

inline ComplexMatrix random_matrix(std::mt19937_64& rng, int N, bool real = false) {
  std::normal_distribution<double> g(0.0, 1.0);
  ComplexMatrix m(N);
  for (int i = 0; i < N; ++i)
    for (int j = 0; j < N; ++j) m(i, j) = Complex(g(rng), real ? 0.0 : g(rng));
  return m;
}

inline ComplexFamily random_family(std::mt19937_64& rng, int N, const std::vector<std::string>& vars,
                                   bool real = false) {
  ComplexFamily F(N);
  for (auto& v : vars) F.set(v, random_matrix(rng, N, real));
  return F;
}

inline Complex entry(const ComplexFamily& F, const Edge& e, int a, int b) {
  const auto& A = F.get(e.label.variable);
  return e.label.star ? std::conj(A(b, a)) : A(a, b);
}

/// (1/N) sum over maps phi of prod_e entry, optionally restricted to injective maps.
inline Complex brute_trace(const StarGraph& g, const ComplexFamily& F, bool injective = false) {
  int n = g.vertex_count(), N = F.dimension();
  std::vector<int> phi(n, 0);
  Complex total = 0;
  while (true) {
    bool ok = true;
    if (injective) {
      std::vector<int> s = phi;
      std::sort(s.begin(), s.end());
      ok = std::adjacent_find(s.begin(), s.end()) == s.end();
    }
    if (ok) {
      Complex p = 1;
      for (auto& e : g.edges()) p *= entry(F, e, phi[e.src], phi[e.dst]);
      total += p;
    }
    int i = 0;
    while (i < n && ++phi[i] == N) phi[i++] = 0;
    if (i == n) break;
  }
  return total / static_cast<double>(N);
}

inline std::vector<Edge> permuted_edges(const StarGraph& g, const std::vector<int>& perm) {
  std::vector<Edge> es;
  for (auto& e : g.edges()) es.push_back({perm[e.src], perm[e.dst], e.label});
  std::sort(es.begin(), es.end());
  return es;
}

inline StarGraph relabel(const StarGraph& g, const std::vector<int>& perm) {
  return StarGraph(g.vertex_count(), permuted_edges(g, perm));
}

inline std::vector<int> random_permutation(std::mt19937_64& rng, int n) {
  std::vector<int> p(n);
  std::iota(p.begin(), p.end(), 0);
  std::shuffle(p.begin(), p.end(), rng);
  return p;
}

/// Label- and orientation-preserving isomorphism by trying every bijection.
inline bool brute_isomorphic(const StarGraph& a, const StarGraph& b, int root_a = -1, int root_b = -1) {
  if (a.vertex_count() != b.vertex_count() || a.edge_count() != b.edge_count()) return false;
  std::vector<Edge> target(b.edges().begin(), b.edges().end());
  std::sort(target.begin(), target.end());
  std::vector<int> perm(a.vertex_count());
  std::iota(perm.begin(), perm.end(), 0);
  do {
    if (root_a >= 0 && perm[root_a] != root_b) continue;
    if (permuted_edges(a, perm) == target) return true;
  } while (std::next_permutation(perm.begin(), perm.end()));
  return false;
}

inline double rel_err(Complex a, Complex b) { return std::abs(a - b) / std::max(1.0, std::abs(b)); }

inline long long double_factorial(int n) {
  long long r = 1;
  for (int k = n; k > 1; k -= 2) r *= k;
  return r;
}

inline long long catalan(int n) {
  long long c = 1;
  for (int k = 0; k < n; ++k) c = c * 2 * (2 * k + 1) / (k + 2);
  return c;
}

}  // namespace test_support
