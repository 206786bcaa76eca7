#include <gtest/gtest.h>

#include <random>
#include <sstream>

#include "support.hpp"
#include "traffic/dsl.hpp"
#include "traffic/matrix_eval.hpp"

using namespace traffic;
using test_support::brute_trace;
using test_support::random_family;
using test_support::random_graph;
using test_support::rel_err;

namespace {

EdgeLabel lx{"x", false}, lxs{"x", true}, ly{"y", false};

// Entry (i, j) of a monomial: sum over maps with in -> i and out -> j.
Complex brute_monomial_entry(const GraphMonomial& t, const ComplexFamily& F, int i, int j) {
  int n = t.graph.vertex_count(), N = F.dimension();
  std::vector<int> phi(n, 0);
  Complex total = 0;
  while (true) {
    if (phi[t.input] == i && phi[t.output] == j) {
      Complex p = 1;
      for (auto& e : t.graph.edges()) p *= test_support::entry(F, e, phi[e.src], phi[e.dst]);
      total += p;
    }
    int k = 0;
    while (k < n && ++phi[k] == N) phi[k++] = 0;
    if (k == n) break;
  }
  return total;
}

// Dense unitary from Gram-Schmidt on a random complex matrix.
ComplexMatrix random_unitary(std::mt19937_64& rng, int N) {
  ComplexMatrix a = test_support::random_matrix(rng, N);
  for (int c = 0; c < N; ++c) {
    for (int p = 0; p < c; ++p) {
      Complex dot = 0;
      for (int r = 0; r < N; ++r) dot += std::conj(a(r, p)) * a(r, c);
      for (int r = 0; r < N; ++r) a(r, c) -= dot * a(r, p);
    }
    double norm = 0;
    for (int r = 0; r < N; ++r) norm += std::norm(a(r, c));
    for (int r = 0; r < N; ++r) a(r, c) /= std::sqrt(norm);
  }
  return a;
}

std::vector<StarGraph> corpus(std::mt19937_64& rng, int count, int max_v, int max_e) {
  std::vector<StarGraph> out;
  for (int i = 0; i < count; ++i) out.push_back(random_graph(rng, max_v, max_e, {"x", "y"}));
  return out;
}

}  // namespace

TEST(EvalMonomial, MatchesEntrywiseSum) {
  std::mt19937_64 rng(41);
  for (int trial = 0; trial < 25; ++trial) {
    StarGraph g = random_graph(rng, 4, 5, {"x", "y"});
    std::uniform_int_distribution<int> v(0, g.vertex_count() - 1);
    GraphMonomial t(g, v(rng), v(rng));
    auto F = random_family(rng, 3, {"x", "y"});
    auto M = eval_monomial(t, F);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_LT(rel_err(M(i, j), brute_monomial_entry(t, F, i, j)), 1e-10);
  }
}

TEST(EvalMonomial, WordIsMatrixProduct) {
  std::mt19937_64 rng(42);
  auto F = random_family(rng, 5, {"x", "y"});
  auto A = F.get("x"), B = F.get("y");
  auto expected = A * B.adjoint() * A;
  auto M = eval_monomial(from_word({lx, {"y", true}, lx}), F);
  for (int i = 0; i < 5; ++i)
    for (int j = 0; j < 5; ++j) EXPECT_LT(std::abs(M(i, j) - expected(i, j)), 1e-10);
}

TEST(EvalMonomial, OperatorsActAsDocumented) {
  std::mt19937_64 rng(43);
  auto F = random_family(rng, 4, {"x"});
  auto A = F.get("x");
  auto deg = eval_monomial(degree_op(edge_monomial("x")), F);
  auto diag = eval_monomial(delta(edge_monomial("x")), F);
  auto tr = eval_monomial(transpose(edge_monomial("x")), F);
  auto had = eval_monomial(hadamard({edge_monomial("x"), edge_monomial("x", true)}), F);
  for (int i = 0; i < 4; ++i) {
    Complex row = 0;
    for (int j = 0; j < 4; ++j) row += A(i, j);
    for (int j = 0; j < 4; ++j) {
      EXPECT_LT(std::abs(deg(i, j) - (i == j ? row : Complex(0))), 1e-12);
      EXPECT_LT(std::abs(diag(i, j) - (i == j ? A(i, i) : Complex(0))), 1e-12);
      EXPECT_LT(std::abs(tr(i, j) - A(j, i)), 1e-12);
      EXPECT_LT(std::abs(had(i, j) - A(i, j) * std::conj(A(j, i))), 1e-12);
    }
  }
}

TEST(EvalMonomial, RespectsSubstitution) {
  std::mt19937_64 rng(44);
  for (int trial = 0; trial < 15; ++trial) {
    StarGraph g = random_graph(rng, 3, 4, {"x", "y"});
    std::uniform_int_distribution<int> v(0, g.vertex_count() - 1);
    GraphMonomial t(g, v(rng), v(rng));
    StarGraph ga = random_graph(rng, 3, 3, {"x", "y"});
    std::uniform_int_distribution<int> va(0, ga.vertex_count() - 1);
    GraphMonomial a(ga, va(rng), va(rng));
    auto F = random_family(rng, 3, {"x", "y"});
    ComplexFamily inner(3);
    inner.set("x", eval_monomial(a, F));
    inner.set("y", F.get("y"));
    auto lhs = eval_monomial(substitute(t, {{"x", a}, {"y", edge_monomial("y")}}), F);
    auto rhs = eval_monomial(t, inner);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_LT(rel_err(lhs(i, j), rhs(i, j)), 1e-9);
  }
}

TEST(Trace, MatchesBruteForce) {
  std::mt19937_64 rng(45);
  for (int trial = 0; trial < 40; ++trial) {
    StarGraph g = random_graph(rng, 5, 6, {"x", "y"});
    auto F = random_family(rng, 4, {"x", "y"});
    Complex expected = brute_trace(g, F);
    EXPECT_LT(rel_err(trace_test_graph(g, F).value, expected), 1e-10);
    EXPECT_LT(rel_err(trace_by_enumeration(g, F), expected), 1e-10);
  }
}

TEST(Trace, RealAndRationalPathsAgree) {
  std::mt19937_64 rng(46);
  std::uniform_int_distribution<int> small(-3, 3);
  for (int trial = 0; trial < 20; ++trial) {
    StarGraph g = random_graph(rng, 4, 5, {"x"});
    RationalFamily R(3);
    ComplexFamily C(3);
    RationalMatrix m(3);
    ComplexMatrix mc(3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        m(i, j) = Rational(small(rng), 2);
        mc(i, j) = to_double(m(i, j));
      }
    R.set("x", m);
    C.set("x", mc);
    Rational exact = trace_test_graph(g, R).value;
    EXPECT_LT(std::abs(to_double(exact) - trace_test_graph(g, C).value.real()), 1e-10);
    EXPECT_EQ(injective_trace(g, R).value, injective_trace_mobius(g, R).value);
    EXPECT_LT(std::abs(trace_test_graph(g, real_part(C)).value - to_double(exact)), 1e-10);
  }
}

TEST(InjectiveTrace, RoutesAgreeWithBruteForce) {
  std::mt19937_64 rng(47);
  for (int trial = 0; trial < 40; ++trial) {
    StarGraph g = random_graph(rng, 5, 7, {"x", "y"});
    auto F = random_family(rng, 5, {"x", "y"});
    Complex expected = brute_trace(g, F, true);
    EXPECT_LT(rel_err(injective_trace(g, F).value, expected), 1e-10);
    EXPECT_LT(rel_err(injective_trace_mobius(g, F).value, expected), 1e-9);
    EXPECT_LT(rel_err(injective_trace(g, F, InjectiveMethod::automatic).value, expected), 1e-9);
    TraceCache<Complex> cache;
    EXPECT_LT(rel_err(injective_trace(g, F, InjectiveMethod::mobius, &cache).value, expected), 1e-9);
  }
}

TEST(InjectiveTrace, SparseFamiliesAndOversizedGraphs) {
  std::mt19937_64 rng(48);
  std::bernoulli_distribution keep(0.3);
  for (int trial = 0; trial < 20; ++trial) {
    auto F = random_family(rng, 6, {"x"});
    ComplexMatrix m = F.get("x");
    for (int i = 0; i < 6; ++i)
      for (int j = 0; j < 6; ++j)
        if (!keep(rng)) m(i, j) = 0;
    F.set("x", m);
    StarGraph g = random_graph(rng, 5, 6, {"x"});
    EXPECT_LT(rel_err(injective_trace(g, F).value, brute_trace(g, F, true)), 1e-10);
  }
  auto F = random_family(rng, 2, {"x"});
  auto r = injective_trace(close(from_word({lx, lx, lx})), F);
  EXPECT_TRUE(r.dimension_exceeded);
  EXPECT_EQ(r.value, Complex(0));
}

TEST(InjectiveTrace, PartitionSumRecoversTrace) {
  std::mt19937_64 rng(49);
  auto graphs = corpus(rng, 40, 4, 6);
  for (int N : {4, 5, 6}) {
    auto F = random_family(rng, N, {"x", "y"});
    for (auto& g : graphs) {
      Complex sum = 0;
      for_each_partition(g.vertex_count(), [&](const SetPartition& p) { sum += injective_trace(quotient(g, p), F).value; });
      EXPECT_LT(rel_err(sum, trace_test_graph(g, F).value), 1e-10);
    }
  }
}

TEST(InjectiveDensity, Modes) {
  std::mt19937_64 rng(50);
  auto F = random_family(rng, 5, {"x"});
  StarGraph g(3, {{0, 1, lx}, {1, 2, lxs}, {2, 0, lx}});
  auto dens = injective_density(g, F, DensityMode::uniform_expectation).value;
  auto inj = injective_trace(g, F).value;
  EXPECT_LT(rel_err(dens * falling_factorial(5, 3) / 5.0, inj), 1e-12);
  const auto& A = F.get("x");
  Complex fixed = A(0, 1) * std::conj(A(2, 1)) * A(2, 0);
  EXPECT_LT(std::abs(injective_density(g, F, DensityMode::fixed_injection).value - fixed), 1e-12);
  EXPECT_THROW(injective_density(close(from_word({lx, lx, lx, lx, lx, lx})), F, DensityMode::uniform_expectation),
               ContractError);
}

TEST(NGraph, TensorAndPairing) {
  std::mt19937_64 rng(51);
  for (int trial = 0; trial < 20; ++trial) {
    StarGraph g = random_graph(rng, 4, 4, {"x", "y"});
    std::uniform_int_distribution<int> v(0, g.vertex_count() - 1);
    NGraphMonomial t(g, {v(rng), v(rng)});
    auto F = random_family(rng, 3, {"x", "y"});
    auto T = eval_n_graph(t, F);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) {
        Complex expected = 0;
        if (t.roots[0] == t.roots[1]) {
          if (i == j) expected = brute_monomial_entry(GraphMonomial(g, t.roots[0], t.roots[0]), F, i, i);
        } else {
          expected = brute_monomial_entry(GraphMonomial(g, t.roots[0], t.roots[1]), F, i, j);
        }
        EXPECT_LT(rel_err(T.data[T.index({i, j})], expected), 1e-10);
      }
    Complex p = pairing(t, t, F);
    EXPECT_GE(p.real(), -1e-10);
    EXPECT_LT(std::abs(p.imag()), 1e-9);
    // the glued graph's unnormalized trace equals the pairing
    EXPECT_LT(rel_err(trace_test_graph(pairing_graph(t, t), F).value * 3.0, p), 1e-10);
  }
  EXPECT_THROW(pairing(NGraphMonomial(StarGraph(1, {}), {0}), NGraphMonomial(StarGraph(1, {}), {0, 0}),
                       random_family(rng, 2, {"x"})),
               ContractError);
}

TEST(Equivariance, PermutationsCommuteUnitariesDoNot) {
  std::mt19937_64 rng(52);
  for (int trial = 0; trial < 20; ++trial) {
    StarGraph g = random_graph(rng, 4, 5, {"x", "y"});
    std::uniform_int_distribution<int> v(0, g.vertex_count() - 1);
    GraphMonomial t(g, v(rng), v(rng));
    auto F = random_family(rng, 5, {"x", "y"});
    EXPECT_LE(check_permutation_equivariance(t, F, test_support::random_permutation(rng, 5)), 1e-12);
  }
  auto F = random_family(rng, 5, {"x"});
  auto t = hadamard({edge_monomial("x"), edge_monomial("x", true)});
  EXPECT_GT(equivariance_deviation(t, F, random_unitary(rng, 5)), 0.01);
  // plain words are unitarily equivariant
  EXPECT_LT(equivariance_deviation(from_word({lx, lxs}), F, random_unitary(rng, 5)), 1e-10);
}

TEST(Family, MissingVariableAndIo) {
  std::mt19937_64 rng(53);
  auto F = random_family(rng, 3, {"x"});
  EXPECT_THROW(trace_test_graph(StarGraph(2, {{0, 1, ly}}), F), ContractError);
  EXPECT_THROW(F.set("y", ComplexMatrix(4)), ContractError);
  for (bool binary : {false, true}) {
    std::stringstream ss;
    if (binary) write_family_binary(ss, F);
    else write_family_text(ss, F);
    auto G = binary ? read_family_binary(ss) : read_family_text(ss);
    ASSERT_EQ(G.dimension(), 3);
    for (int i = 0; i < 3; ++i)
      for (int j = 0; j < 3; ++j) EXPECT_LE(std::abs(G.get("x")(i, j) - F.get("x")(i, j)), binary ? 0.0 : 1e-12);
  }
}
