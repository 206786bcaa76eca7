#pragma once

#include <algorithm>
#include <cmath>
#include <map>
#include <string>
#include <unordered_map>
#include <vector>

#include "traffic/canonical.hpp"
#include "traffic/contraction.hpp"
#include "traffic/errors.hpp"
#include "traffic/graph.hpp"
#include "traffic/matrix.hpp"
#include "traffic/partition.hpp"

namespace traffic {

enum class StatKind { trace, injective_trace, injective_density };

template <class S>
struct ScalarStat {
  S value{};
  StatKind kind = StatKind::trace;
  bool dimension_exceeded = false;  // |V| > N: no injective maps, value is exactly zero
};

enum class DensityMode { uniform_expectation, fixed_injection };
enum class InjectiveMethod { direct, mobius, automatic };

inline constexpr int kAssignmentGuard = 8;

template <class S>
void require_variables(const StarGraph& g, const MatrixFamily<S>& F) {
  for (auto& v : g.variables()) (void)F.get(v);
}

/// Matrix of the monomial: entry (i, j) sums over maps with in -> i, out -> j.
template <class S>
DenseMatrix<S> eval_monomial(const GraphMonomial& t, const MatrixFamily<S>& F) {
  require_variables(t.graph, F);
  int N = F.dimension();
  DenseMatrix<S> out(N);
  if (t.input == t.output) {
    auto tensor = contract(t.graph, F, {t.input});
    for (int i = 0; i < N; ++i) out(i, i) = tensor.data[i];
  } else {
    auto tensor = contract(t.graph, F, {t.input, t.output});
    for (int j = 0; j < N; ++j)
      for (int i = 0; i < N; ++i) out(i, j) = tensor.data[i + static_cast<std::size_t>(N) * j];
  }
  return out;
}

/// (1/N) sum over all maps V -> [N].
template <class S>
ScalarStat<S> trace_test_graph(const StarGraph& g, const MatrixFamily<S>& F) {
  require_variables(g, F);
  auto t = contract(g, F, {});
  return {t.data[0] / S(F.dimension()), StatKind::trace, false};
}

/// Plain trace by summing over every vertex map; small oracle for tests.
template <class S>
S trace_by_enumeration(const StarGraph& g, const MatrixFamily<S>& F) {
  require_variables(g, F);
  int n = g.vertex_count(), N = F.dimension();
  if (n > kAssignmentGuard) throw GuardError("enumeration guard: too many vertices");
  auto mats = detail::resolve_labels(g, F);
  std::vector<int> phi(n, 0);
  S sum(0);
  while (true) {
    S prod(1);
    for (auto& e : g.edges()) prod *= mats.at(e.label)(phi[e.src], phi[e.dst]);
    sum += prod;
    int p = 0;
    while (p < n && ++phi[p] == N) phi[p++] = 0;
    if (p == n) break;
  }
  return sum / S(N);
}

namespace detail {

/// Backtracking over injective maps, drawing candidates from the nonzero
/// pattern of an already-assigned neighbour whenever that pattern is sparse.
template <class S>
class InjectiveEnumerator {
 public:
  InjectiveEnumerator(const StarGraph& g, const MatrixFamily<S>& F) : g_(g), N_(F.dimension()) {
    mats_ = resolve_labels(g, F);
    for (auto& [label, m] : mats_) {
      Pattern p;
      std::size_t nnz = 0;
      for (auto& x : m.values()) nnz += !is_zero_scalar(x);
      p.density = static_cast<double>(nnz) / N_;
      if (2 * nnz < static_cast<std::size_t>(N_) * N_) {
        p.sparse = true;
        p.rows.resize(N_);
        p.cols.resize(N_);
        for (int i = 0; i < N_; ++i)
          for (int j = 0; j < N_; ++j)
            if (!is_zero_scalar(m(i, j))) {
              p.rows[i].push_back(j);
              p.cols[j].push_back(i);
            }
      } else {
        p.density = N_;
      }
      patterns_[label] = std::move(p);
    }
    for (auto& e : g.edges()) {
      emat_.push_back(&mats_.at(e.label));
      epat_.push_back(&patterns_.at(e.label));
    }
    plan();
  }

  /// Expected number of visited partial maps.
  double cost() const { return cost_; }

  /// Sum over injective maps of the edge-weight product.
  S sum() {
    phi_.assign(g_.vertex_count(), -1);
    used_.assign(N_, false);
    total_ = S(0);
    if (g_.vertex_count() <= N_) recurse(0, S(1));
    return total_;
  }

 private:
  struct Pattern {
    bool sparse = false;
    double density = 0;  // mean nonzeros per row
    std::vector<std::vector<int>> rows, cols;
  };
  struct Step {
    int vertex = 0;
    int anchor = -1;  // index into g_.edges(), or -1
    std::vector<int> check;
  };

  void plan() {
    int n = g_.vertex_count();
    const auto& edges = g_.edges();
    double best_cost = -1;
    for (int start = 0; start < n; ++start) {
      std::vector<Step> steps;
      std::vector<int> pos(n, -1);
      steps.push_back({start, -1, {}});
      pos[start] = 0;
      double cost = N_, width = N_;
      while (static_cast<int>(steps.size()) < n) {
        int best_v = -1, best_e = -1;
        double best_c = 0;
        for (std::size_t k = 0; k < edges.size(); ++k) {
          auto& e = edges[k];
          bool s_in = pos[e.src] >= 0, d_in = pos[e.dst] >= 0;
          if (s_in == d_in) continue;
          double c = epat_[k]->density;
          if (best_v == -1 || c < best_c) {
            best_v = s_in ? e.dst : e.src;
            best_e = static_cast<int>(k);
            best_c = c;
          }
        }
        if (best_v == -1) {  // next connected component
          for (int v = 0; v < n; ++v)
            if (pos[v] < 0) {
              best_v = v;
              break;
            }
          best_c = N_;
        }
        pos[best_v] = static_cast<int>(steps.size());
        steps.push_back({best_v, best_e, {}});
        width *= std::max(best_c, 1.0);
        cost += width;
      }
      if (best_cost < 0 || cost < best_cost) {
        best_cost = cost;
        steps_ = steps;
        pos_ = pos;
      }
    }
    for (std::size_t k = 0; k < edges.size(); ++k) {
      int p = std::max(pos_[edges[k].src], pos_[edges[k].dst]);
      steps_[p].check.push_back(static_cast<int>(k));
    }
    cost_ = best_cost;
  }

  void recurse(std::size_t p, S prod) {
    if (p == steps_.size()) {
      total_ += prod;
      return;
    }
    const Step& st = steps_[p];
    auto visit = [&](int x) {
      if (used_[x]) return;
      phi_[st.vertex] = x;
      S q = prod;
      for (int k : st.check) {
        auto& e = g_.edges()[k];
        q *= (*emat_[k])(phi_[e.src], phi_[e.dst]);
        if (is_zero_scalar(q)) break;
      }
      if (!is_zero_scalar(q)) {
        used_[x] = true;
        recurse(p + 1, q);
        used_[x] = false;
      }
      phi_[st.vertex] = -1;
    };
    if (st.anchor >= 0) {
      auto& e = g_.edges()[st.anchor];
      auto& pat = *epat_[st.anchor];
      if (pat.sparse) {
        const auto& cand = e.src == st.vertex ? pat.cols[phi_[e.dst]] : pat.rows[phi_[e.src]];
        for (int x : cand) visit(x);
        return;
      }
    }
    for (int x = 0; x < N_; ++x) visit(x);
  }

  const StarGraph& g_;
  int N_;
  std::map<EdgeLabel, DenseMatrix<S>> mats_;
  std::map<EdgeLabel, Pattern> patterns_;
  std::vector<const DenseMatrix<S>*> emat_;
  std::vector<const Pattern*> epat_;
  std::vector<Step> steps_;
  std::vector<int> pos_;
  double cost_ = 0;
  std::vector<int> phi_;
  std::vector<bool> used_;
  S total_{};
};

}  // namespace detail

/// (1/N) sum over injective maps, by direct enumeration.
template <class S>
ScalarStat<S> injective_trace(const StarGraph& g, const MatrixFamily<S>& F) {
  require_variables(g, F);
  if (g.vertex_count() > F.dimension()) return {S(0), StatKind::injective_trace, true};
  detail::InjectiveEnumerator<S> en(g, F);
  return {en.sum() / S(F.dimension()), StatKind::injective_trace, false};
}

/// Plain traces keyed by canonical form, valid for one fixed family.
template <class S>
using TraceCache = std::unordered_map<std::string, S>;

template <class S>
S cached_trace(const StarGraph& g, const MatrixFamily<S>& F, TraceCache<S>* cache) {
  if (!cache) return trace_test_graph(g, F).value;
  std::string key = canonicalize(g).bytes;
  auto it = cache->find(key);
  if (it != cache->end()) return it->second;
  S v = trace_test_graph(g, F).value;
  cache->emplace(std::move(key), v);
  return v;
}

/// (1/N) sum over injective maps, by Moebius inversion of plain traces of quotients.
template <class S>
ScalarStat<S> injective_trace_mobius(const StarGraph& g, const MatrixFamily<S>& F, TraceCache<S>* cache = nullptr) {
  require_variables(g, F);
  if (g.vertex_count() > F.dimension()) return {S(0), StatKind::injective_trace, true};
  S total(0);
  for_each_partition(g.vertex_count(), [&](const SetPartition& p) {
    S w;
    if constexpr (std::is_same_v<S, Rational>) w = S(mobius_weight(p));
    else w = S(static_cast<double>(mobius_weight(p)));
    total += w * cached_trace(quotient(g, p), F, cache);
  });
  return {total, StatKind::injective_trace, false};
}

// One enumeration step costs about as much as this many blocked multiply-adds.
inline constexpr double kDirectStepCost = 16;

/// Estimated work of the two injective-trace routes; picks the cheaper one.
template <class S>
InjectiveMethod choose_injective_method(const StarGraph& g, const MatrixFamily<S>& F) {
  detail::InjectiveEnumerator<S> en(g, F);
  double direct = en.cost();
  double mobius = 0;
  if (g.vertex_count() > kPartitionGuard) return InjectiveMethod::direct;
  for_each_partition(g.vertex_count(), [&](const SetPartition& p) {
    mobius += contraction_cost(quotient(g, p), F.dimension());
  });
  return kDirectStepCost * direct <= mobius ? InjectiveMethod::direct : InjectiveMethod::mobius;
}

template <class S>
ScalarStat<S> injective_trace(const StarGraph& g, const MatrixFamily<S>& F, InjectiveMethod method,
                              TraceCache<S>* cache = nullptr) {
  if (method == InjectiveMethod::automatic) method = choose_injective_method(g, F);
  return method == InjectiveMethod::direct ? injective_trace(g, F) : injective_trace_mobius(g, F, cache);
}

/// Falling factorial N (N-1) ... (N-k+1) as a double.
inline double falling_factorial(int N, int k) {
  double r = 1;
  for (int i = 0; i < k; ++i) r *= N - i;
  return r;
}

template <class S>
ScalarStat<S> injective_density(const StarGraph& g, const MatrixFamily<S>& F, DensityMode mode) {
  require_variables(g, F);
  int n = g.vertex_count(), N = F.dimension();
  if (n > N) throw ContractError("injective density needs |V| <= N");
  if (mode == DensityMode::fixed_injection) {
    auto mats = detail::resolve_labels(g, F);
    S prod(1);
    for (auto& e : g.edges()) prod *= mats.at(e.label)(e.src, e.dst);
    return {prod, StatKind::injective_density, false};
  }
  detail::InjectiveEnumerator<S> en(g, F);
  S count;
  if constexpr (std::is_same_v<S, Rational>) {
    Rational c = 1;
    for (int i = 0; i < n; ++i) c *= N - i;
    count = c;
  } else {
    count = S(falling_factorial(N, n));
  }
  return {en.sum() / count, StatKind::injective_density, false};
}

/// Rank-n tensor of an n-graph monomial; index k of the result is root k.
template <class S>
Tensor<S> eval_n_graph(const NGraphMonomial& t, const MatrixFamily<S>& F) {
  require_variables(t.graph, F);
  int N = F.dimension();
  double size = detail::ipow(N, t.roots.size());
  if (size > kMaxTensorEntries) throw GuardError("n-graph tensor exceeds the size guard");
  auto inner = contract(t.graph, F, t.roots);
  Tensor<S> out;
  out.N = N;
  for (int k = 0; k < t.rank(); ++k) out.vars.push_back(k);
  out.data.assign(static_cast<std::size_t>(size), S(0));
  std::vector<int> idx(t.rank(), 0), inner_idx(inner.vars.size());
  for (std::size_t pos = 0; pos < out.data.size(); ++pos) {
    bool consistent = true;
    std::vector<int> assigned(inner.vars.size(), -1);
    for (int k = 0; k < t.rank() && consistent; ++k) {
      auto at = std::find(inner.vars.begin(), inner.vars.end(), t.roots[k]) - inner.vars.begin();
      if (assigned[at] == -1) assigned[at] = idx[k];
      else consistent = assigned[at] == idx[k];
    }
    if (consistent) out.data[pos] = inner.data[inner.index(assigned)];
    for (int k = 0; k < t.rank(); ++k) {
      if (++idx[k] < N) break;
      idx[k] = 0;
    }
  }
  return out;
}

/// <t1, t2> = sum_i conj(t1_i) t2_i.
template <class S>
S pairing(const NGraphMonomial& t1, const NGraphMonomial& t2, const MatrixFamily<S>& F) {
  if (t1.rank() != t2.rank()) throw ContractError("pairing needs monomials with the same number of roots");
  auto a = eval_n_graph(t1, F);
  auto b = eval_n_graph(t2, F);
  S total(0);
  for (std::size_t i = 0; i < a.data.size(); ++i) total += conj_scalar(a.data[i]) * b.data[i];
  return total;
}

/// The test graph obtained by gluing the adjoint of t1 to t2 root by root; its
/// unnormalized trace equals pairing(t1, t2).
inline StarGraph pairing_graph(const NGraphMonomial& t1, const NGraphMonomial& t2) {
  if (t1.rank() != t2.rank()) throw ContractError("pairing needs monomials with the same number of roots");
  int n1 = t1.graph.vertex_count(), n2 = t2.graph.vertex_count();
  detail::UnionFind uf(n1 + n2);
  for (int k = 0; k < t1.rank(); ++k) uf.unite(t1.roots[k], n1 + t2.roots[k]);
  int count = 0;
  auto map = uf.compact(&count);
  std::vector<Edge> edges;
  for (auto& e : t1.graph.edges()) edges.push_back({map[e.dst], map[e.src], e.label.adjoint()});
  for (auto& e : t2.graph.edges()) edges.push_back({map[n1 + e.src], map[n1 + e.dst], e.label});
  return StarGraph(count, std::move(edges));
}

template <class S>
MatrixFamily<S> conjugate_family(const MatrixFamily<S>& F, const DenseMatrix<S>& U) {
  MatrixFamily<S> out(F.dimension());
  DenseMatrix<S> Ustar = U.adjoint();
  for (auto& [name, m] : F.matrices()) out.set(name, U * m * Ustar);
  return out;
}

/// max |t(U F U*) - U t(F) U*|.
template <class S>
double equivariance_deviation(const GraphMonomial& t, const MatrixFamily<S>& F, const DenseMatrix<S>& U) {
  auto lhs = eval_monomial(t, conjugate_family(F, U));
  auto rhs = U * eval_monomial(t, F) * U.adjoint();
  double dev = 0;
  for (int i = 0; i < F.dimension(); ++i)
    for (int j = 0; j < F.dimension(); ++j) dev = std::max(dev, static_cast<double>(std::abs(lhs(i, j) - rhs(i, j))));
  return dev;
}

/// Permutation matrix with P(sigma(i), i) = 1.
template <class S>
DenseMatrix<S> permutation_matrix(const std::vector<int>& sigma) {
  int N = static_cast<int>(sigma.size());
  DenseMatrix<S> P(N);
  for (int i = 0; i < N; ++i) P(sigma[i], i) = S(1);
  return P;
}

template <class S>
double check_permutation_equivariance(const GraphMonomial& t, const MatrixFamily<S>& F, const std::vector<int>& sigma) {
  if (static_cast<int>(sigma.size()) != F.dimension()) throw ContractError("permutation size does not match N");
  return equivariance_deviation(t, F, permutation_matrix<S>(sigma));
}

}  // namespace traffic
