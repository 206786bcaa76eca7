#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "support.hpp"
#include "traffic/monte_carlo.hpp"

using namespace traffic;

namespace {
EdgeLabel lx{"x", false}, ly{"y", false};

StarGraph cycle(int n, EdgeLabel l) {
  std::vector<Edge> es;
  for (int i = 0; i < n; ++i) es.push_back({i, (i + 1) % n, l});
  return StarGraph(n, es);
}

// Glues the first vertex of b onto the last vertex of a.
StarGraph glue(const StarGraph& a, const StarGraph& b) {
  int shift = a.vertex_count() - 1;
  std::vector<Edge> es = a.edges();
  for (auto e : b.edges()) es.push_back({e.src + shift, e.dst + shift, e.label});
  return StarGraph(a.vertex_count() + b.vertex_count() - 1, es);
}

double log_factorial(int n) { return std::lgamma(n + 1.0); }
}  // namespace

TEST(MonteCarlo, SummarizeMatchesHandComputation) {
  auto e = summarize({Complex(1), Complex(2), Complex(3), Complex(6)});
  EXPECT_EQ(e.count, 4);
  EXPECT_DOUBLE_EQ(e.mean.real(), 3.0);
  EXPECT_NEAR(e.sd, std::sqrt(14.0 / 3), 1e-12);
  EXPECT_NEAR(e.se, std::sqrt(14.0 / 3) / 2, 1e-12);
  auto one = summarize({Complex(0, 2)});
  EXPECT_EQ(one.mean, Complex(0, 2));
  EXPECT_EQ(one.se, 0.0);
  EXPECT_EQ(summarize({}).count, 0);
}

TEST(MonteCarlo, JackknifeOfMeanAndSquare) {
  std::mt19937_64 rng(3);
  std::normal_distribution<double> g(1.0, 2.0);
  std::vector<std::vector<double>> reps(50);
  std::vector<Complex> xs;
  for (auto& r : reps) {
    r = {g(rng)};
    xs.push_back(r[0]);
  }
  auto plain = summarize(xs);
  auto [m, se] = jackknife(reps, [](const std::vector<double>& v) { return v[0]; });
  EXPECT_NEAR(m, plain.mean.real(), 1e-12);
  EXPECT_NEAR(se, plain.se, 1e-12);
  // bias-corrected square of the mean is xbar^2 - s^2/n
  auto [sq, sq_se] = jackknife(reps, [](const std::vector<double>& v) { return v[0] * v[0]; });
  double xbar = plain.mean.real();
  EXPECT_NEAR(sq, xbar * xbar - plain.sd * plain.sd / 50, 1e-10);
  EXPECT_GT(sq_se, 0.0);
  EXPECT_THROW(jackknife({{1.0}}, [](const std::vector<double>& v) { return v[0]; }), ContractError);
}

TEST(MonteCarlo, ReproducibleAndIndependentOfJobs) {
  std::vector<StarGraph> graphs{cycle(2, lx), cycle(3, lx), glue(cycle(2, lx), cycle(2, ly))};
  SpecMap specs{{"x", ensemble::wigner_real(15, EntryLaw::gaussian())}, {"y", ensemble::uniform_permutation(15)}};
  Grouping groups{{"x"}, {"y"}};
  MCOptions one, many;
  many.jobs = 3;
  one.keep_samples = many.keep_samples = true;
  one.products = many.products = {{0, 1}};
  auto a = mc_estimate(graphs, specs, groups, 20, 77, one);
  auto b = mc_estimate(graphs, specs, groups, 20, 77, many);
  auto c = mc_estimate(graphs, specs, groups, 20, 77, one);
  ASSERT_EQ(a.trace_samples.size(), graphs.size());
  ASSERT_EQ(a.trace_samples[0].size(), 20u);
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    EXPECT_EQ(a.trace_samples[g], b.trace_samples[g]);
    EXPECT_EQ(a.injective_samples[g], b.injective_samples[g]);
    EXPECT_EQ(a.trace_samples[g], c.trace_samples[g]);
    EXPECT_EQ(a.graphs[g].trace.mean, summarize(a.trace_samples[g]).mean);
  }
  EXPECT_EQ(a.products[0].product.mean, b.products[0].product.mean);
  auto d = mc_estimate(graphs, specs, groups, 20, 78, one);
  EXPECT_NE(a.graphs[1].trace.mean, d.graphs[1].trace.mean);
}

TEST(MonteCarlo, ExactlyDeterminedStatistics) {
  // Rademacher Wigner entries have |x_ij|^2 = 1/N so the 2-cycle trace is exactly 1
  auto rep = mc_estimate({cycle(2, lx)}, {{"x", ensemble::wigner_real(9)}}, {{"x"}}, 10, 1);
  EXPECT_NEAR(rep.graphs[0].trace.mean.real(), 1.0, 1e-12);
  EXPECT_NEAR(rep.graphs[0].trace.se, 0.0, 1e-12);
  EXPECT_NEAR(rep.graphs[0].injective.mean.real(), 8.0 / 9, 1e-12);
}

TEST(MonteCarlo, RejectsBadInput) {
  SpecMap specs{{"x", ensemble::wigner_real(5)}};
  EXPECT_THROW(mc_estimate({cycle(2, ly)}, specs, {{"x"}}, 5, 1), ContractError);
  EXPECT_THROW(mc_estimate({cycle(2, lx)}, specs, {{"x"}}, 0, 1), ContractError);
  MCOptions opt;
  opt.products = {{0, 3}};
  EXPECT_THROW(mc_estimate({cycle(2, lx)}, specs, {{"x"}}, 5, 1, opt), ContractError);
}

TEST(MonteCarlo, TraceProductsDecorrelateWithSize) {
  MCOptions opt;
  opt.injective = false;
  opt.products = {{0, 1}};
  std::vector<double> gaps;
  for (int N : {20, 40, 80}) {
    auto rep = mc_estimate({cycle(2, lx), cycle(4, lx)}, {{"x", ensemble::wigner_real(N, EntryLaw::gaussian())}},
                           {{"x"}}, 200, 5, opt);
    gaps.push_back(std::abs(rep.products[0].gap()));
  }
  EXPECT_GT(gaps[0], gaps[1]);
  EXPECT_GT(gaps[1], gaps[2]);
  EXPECT_LT(gaps[2], 0.25 * gaps[0]);
}

TEST(MonteCarlo, SplittingAtACutVertex) {
  // independent x and y with y permutation invariant: the injective trace of the glued
  // graph factors through the pieces with a falling-factorial correction
  const int N = 12, samples = 400;
  SpecMap specs{{"x", ensemble::wigner_real(N, EntryLaw::gaussian())}, {"y", ensemble::uniform_permutation(N)}};
  std::mt19937_64 rng(8);
  for (int trial = 0; trial < 6; ++trial) {
    StarGraph t1 = test_support::random_graph(rng, 3, 4, {"x"});
    StarGraph t2 = test_support::random_graph(rng, 3, 3, {"y"});
    if (t1.edge_count() == 0 || t2.edge_count() == 0) continue;
    StarGraph t = glue(t1, t2);
    MCOptions opt;
    opt.trace = false;
    auto rep = mc_estimate({t, t1, t2}, specs, {{"x"}, {"y"}}, samples, 100 + trial, opt);
    int v1 = t1.vertex_count(), v2 = t2.vertex_count(), v = t.vertex_count();
    double factor = std::exp(log_factorial(N - v1) + log_factorial(N - v2) - log_factorial(N - v) -
                             log_factorial(N - 1));
    auto& e = rep.graphs[0].injective;
    auto& e1 = rep.graphs[1].injective;
    auto& e2 = rep.graphs[2].injective;
    Complex predicted = factor * e1.mean * e2.mean;
    double se = e.se + factor * (std::abs(e1.mean) * e2.se + std::abs(e2.mean) * e1.se);
    EXPECT_LE(std::abs(e.mean - predicted), 5 * se + 1e-9) << "trial " << trial;
  }
}
