#pragma once

#include <atomic>
#include <cmath>
#include <complex>
#include <cstdint>
#include <exception>
#include <functional>
#include <mutex>
#include <string>
#include <thread>
#include <vector>

#include "traffic/graph.hpp"
#include "traffic/matrix_eval.hpp"
#include "traffic/sampler.hpp"

namespace traffic {

/// Mean of independent replicates with its standard error and per-sample spread.
struct Estimate {
  Complex mean{};
  double se = 0;  // standard error of the mean
  double sd = 0;  // per-sample standard deviation
  int count = 0;
};

inline Estimate summarize(const std::vector<Complex>& xs) {
  Estimate e;
  e.count = static_cast<int>(xs.size());
  if (xs.empty()) return e;
  Complex sum{};
  for (auto& x : xs) sum += x;
  e.mean = sum / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0;
    for (auto& x : xs) ss += std::norm(x - e.mean);
    e.sd = std::sqrt(ss / static_cast<double>(xs.size() - 1));
    e.se = e.sd / std::sqrt(static_cast<double>(xs.size()));
  }
  return e;
}

struct GraphEstimate {
  Estimate trace;
  Estimate injective;
};

/// E[prod_i (1/N) Tr T_i] next to prod_i E[(1/N) Tr T_i].
struct ProductEstimate {
  std::vector<int> graphs;
  Estimate product;
  Complex product_of_means{};
  Complex gap() const { return product.mean - product_of_means; }
};

struct MCReport {
  std::uint64_t seed = 0;
  int samples = 0;
  int N = 0;
  std::vector<GraphEstimate> graphs;
  std::vector<ProductEstimate> products;
  std::vector<std::vector<Complex>> trace_samples;      // [graph][replicate], kept on request
  std::vector<std::vector<Complex>> injective_samples;  // [graph][replicate], kept on request
};

struct MCOptions {
  bool trace = true;
  bool injective = true;
  InjectiveMethod method = InjectiveMethod::automatic;
  int jobs = 1;
  std::vector<std::vector<int>> products;  // index lists into the graph list
  bool keep_samples = false;
};

namespace detail {

template <class S>
void evaluate_replicate(const std::vector<StarGraph>& graphs, const MatrixFamily<S>& F, const MCOptions& opt,
                        std::vector<Complex>& tr, std::vector<Complex>& inj) {
  TraceCache<S> cache;
  for (std::size_t g = 0; g < graphs.size(); ++g) {
    if (opt.trace) tr[g] = Complex(cached_trace(graphs[g], F, &cache));
    if (opt.injective) inj[g] = Complex(injective_trace(graphs[g], F, opt.method, &cache).value);
  }
}

}  // namespace detail

/// Runs `samples` replicates; replicate r draws its family from the streams
/// (seed, group, r). Results do not depend on `jobs`.
inline MCReport mc_estimate(const std::vector<StarGraph>& graphs, const SpecMap& specs, const Grouping& groups,
                            int samples, std::uint64_t seed, const MCOptions& opt = {}) {
  if (samples < 1) throw ContractError("need at least one sample");
  for (auto& g : graphs)
    for (auto& v : g.variables())
      if (!specs.count(v)) throw ContractError("no ensemble bound to variable '" + v + "'");
  for (auto& p : opt.products)
    for (int i : p)
      if (i < 0 || i >= static_cast<int>(graphs.size())) throw ContractError("product index out of range");
  std::size_t G = graphs.size();
  std::vector<std::vector<Complex>> tr(samples, std::vector<Complex>(G)), inj(samples, std::vector<Complex>(G));

  std::atomic<int> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  auto worker = [&] {
    while (true) {
      int r = next++;
      if (r >= samples) return;
      try {
        ComplexFamily F = sample_family(specs, groups, seed, static_cast<std::uint64_t>(r));
        if (is_real_family(F)) detail::evaluate_replicate(graphs, real_part(F), opt, tr[r], inj[r]);
        else detail::evaluate_replicate(graphs, F, opt, tr[r], inj[r]);
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure) failure = std::current_exception();
        next = samples;
        return;
      }
    }
  };
  int jobs = std::max(1, std::min(opt.jobs, samples));
  if (jobs == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (int j = 0; j < jobs; ++j) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (failure) std::rethrow_exception(failure);

  MCReport rep;
  rep.seed = seed;
  rep.samples = samples;
  rep.N = specs.begin()->second.N;
  for (std::size_t g = 0; g < G; ++g) {
    std::vector<Complex> t(samples), i(samples);
    for (int r = 0; r < samples; ++r) {
      t[r] = tr[r][g];
      i[r] = inj[r][g];
    }
    GraphEstimate ge;
    if (opt.trace) ge.trace = summarize(t);
    if (opt.injective) ge.injective = summarize(i);
    rep.graphs.push_back(ge);
    if (opt.keep_samples) {
      rep.trace_samples.push_back(std::move(t));
      rep.injective_samples.push_back(std::move(i));
    }
  }
  for (auto& p : opt.products) {
    ProductEstimate pe;
    pe.graphs = p;
    std::vector<Complex> prod(samples, Complex(1.0));
    for (int r = 0; r < samples; ++r)
      for (int i : p) prod[r] *= tr[r][i];
    pe.product = summarize(prod);
    pe.product_of_means = Complex(1.0);
    for (int i : p) pe.product_of_means *= rep.graphs[i].trace.mean;
    rep.products.push_back(pe);
  }
  return rep;
}

/// Jackknife estimate of f(mean of per-replicate statistic vectors) and its standard error.
inline std::pair<double, double> jackknife(const std::vector<std::vector<double>>& replicates,
                                           const std::function<double(const std::vector<double>&)>& f) {
  std::size_t n = replicates.size();
  if (n < 2) throw ContractError("jackknife needs at least two replicates");
  std::size_t k = replicates.front().size();
  std::vector<double> total(k, 0.0);
  for (auto& r : replicates)
    for (std::size_t j = 0; j < k; ++j) total[j] += r[j];
  std::vector<double> mean(k);
  for (std::size_t j = 0; j < k; ++j) mean[j] = total[j] / static_cast<double>(n);
  double full = f(mean);
  std::vector<double> leave(n);
  double leave_mean = 0;
  for (std::size_t i = 0; i < n; ++i) {
    std::vector<double> m(k);
    for (std::size_t j = 0; j < k; ++j) m[j] = (total[j] - replicates[i][j]) / static_cast<double>(n - 1);
    leave[i] = f(m);
    leave_mean += leave[i];
  }
  leave_mean /= static_cast<double>(n);
  double var = 0;
  for (double x : leave) var += (x - leave_mean) * (x - leave_mean);
  var *= static_cast<double>(n - 1) / static_cast<double>(n);
  double corrected = static_cast<double>(n) * full - static_cast<double>(n - 1) * leave_mean;
  return {corrected, std::sqrt(var)};
}

}  // namespace traffic
