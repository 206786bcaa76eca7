#pragma once

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "traffic/errors.hpp"
#include "traffic/graph.hpp"
#include "traffic/matrix.hpp"

namespace traffic {

/// Dense tensor over a list of vertices; vars[0] is the fastest index.
template <class S>
struct Tensor {
  int N = 0;
  std::vector<int> vars;
  std::vector<S> data;

  std::size_t index(const std::vector<int>& idx) const {
    std::size_t off = 0, stride = 1;
    for (std::size_t k = 0; k < vars.size(); ++k) {
      off += stride * static_cast<std::size_t>(idx[k]);
      stride *= static_cast<std::size_t>(N);
    }
    return off;
  }
};

inline constexpr double kMaxTensorEntries = 67108864.0;  // 2^26
inline constexpr double kMaxContractionWork = 2e11;

namespace detail {

inline double ipow(double base, std::size_t e) {
  double r = 1;
  for (std::size_t i = 0; i < e; ++i) r *= base;
  return r;
}

/// Greedy elimination order: repeatedly remove the free vertex whose removal
/// creates the smallest factor. Returns (order, per-step union sizes).
inline std::vector<std::pair<int, std::size_t>> elimination_plan(const StarGraph& g, const std::vector<int>& keep) {
  int n = g.vertex_count();
  std::vector<std::set<int>> scopes;
  for (auto& e : g.edges()) scopes.push_back(e.src == e.dst ? std::set<int>{e.src} : std::set<int>{e.src, e.dst});
  std::set<int> kept(keep.begin(), keep.end());
  std::vector<bool> done(n, false);
  std::vector<std::pair<int, std::size_t>> plan;
  for (int step = 0; step < n; ++step) {
    int best = -1;
    std::size_t best_size = 0;
    for (int v = 0; v < n; ++v) {
      if (done[v] || kept.count(v)) continue;
      std::set<int> u;
      for (auto& s : scopes)
        if (s.count(v)) u.insert(s.begin(), s.end());
      u.erase(v);
      if (best == -1 || u.size() < best_size) {
        best = v;
        best_size = u.size();
      }
    }
    if (best == -1) break;
    std::set<int> u;
    std::vector<std::set<int>> rest;
    for (auto& s : scopes) {
      if (s.count(best)) u.insert(s.begin(), s.end());
      else rest.push_back(s);
    }
    u.erase(best);
    if (!u.empty()) rest.push_back(u);
    scopes = std::move(rest);
    done[best] = true;
    plan.push_back({best, best_size});
  }
  return plan;
}

template <class S>
struct Factor {
  std::vector<int> vars;
  std::vector<S> data;
};

template <class S>
Factor<S> edge_factor(const Edge& e, const DenseMatrix<S>& m) {
  int N = m.size();
  Factor<S> f;
  if (e.src == e.dst) {
    f.vars = {e.src};
    f.data.resize(N);
    for (int i = 0; i < N; ++i) f.data[i] = m(i, i);
  } else {
    f.vars = {e.src, e.dst};
    f.data.resize(static_cast<std::size_t>(N) * N);
    for (int b = 0; b < N; ++b)
      for (int a = 0; a < N; ++a) f.data[a + static_cast<std::size_t>(N) * b] = m(a, b);
  }
  return f;
}

// Sum over v of the product of the given factors, as a factor over the other variables.
template <class S>
Factor<S> eliminate_generic(const std::vector<const Factor<S>*>& fs, int v, int N) {
  std::vector<int> all{v};
  for (auto* f : fs)
    for (int x : f->vars)
      if (std::find(all.begin(), all.end(), x) == all.end()) all.push_back(x);
  std::size_t m = all.size();
  std::vector<std::vector<std::size_t>> strides(fs.size(), std::vector<std::size_t>(m, 0));
  for (std::size_t k = 0; k < fs.size(); ++k) {
    std::size_t stride = 1;
    for (int x : fs[k]->vars) {
      auto pos = std::find(all.begin(), all.end(), x) - all.begin();
      strides[k][pos] = stride;
      stride *= static_cast<std::size_t>(N);
    }
  }
  Factor<S> out;
  out.vars.assign(all.begin() + 1, all.end());
  double size = ipow(N, out.vars.size());
  if (size > kMaxTensorEntries || size * N > kMaxContractionWork)
    throw GuardError("contraction exceeds the tensor guard (N = " + std::to_string(N) + ", " +
                     std::to_string(m) + " indices)");
  out.data.assign(static_cast<std::size_t>(size), S(0));
  std::vector<int> idx(m, 0);
  std::vector<std::size_t> off(fs.size(), 0);
  std::size_t total = static_cast<std::size_t>(size) * N;
  for (std::size_t t = 0; t < total; ++t) {
    S prod = fs[0]->data[off[0]];
    for (std::size_t k = 1; k < fs.size(); ++k) prod *= fs[k]->data[off[k]];
    out.data[t / N] += prod;
    for (std::size_t p = 0; p < m; ++p) {
      if (++idx[p] < N) {
        for (std::size_t k = 0; k < fs.size(); ++k) off[k] += strides[k][p];
        break;
      }
      idx[p] = 0;
      for (std::size_t k = 0; k < fs.size(); ++k) off[k] -= strides[k][p] * static_cast<std::size_t>(N - 1);
    }
  }
  return out;
}

// Fast path: unary factors on v plus two binary factors (v,a), (v,b) with a != b.
template <class S>
bool try_eliminate_gemm(const std::vector<const Factor<S>*>& fs, int v, int N, Factor<S>& out) {
  if constexpr (!std::is_same_v<S, double> && !std::is_same_v<S, Complex>) {
    return false;
  } else {
    std::vector<const Factor<S>*> bin;
    std::vector<const Factor<S>*> un;
    for (auto* f : fs) {
      if (f->vars.size() == 1) un.push_back(f);
      else if (f->vars.size() == 2) bin.push_back(f);
      else return false;
    }
    if (bin.size() != 2) return false;
    int a = bin[0]->vars[0] == v ? bin[0]->vars[1] : bin[0]->vars[0];
    int b = bin[1]->vars[0] == v ? bin[1]->vars[1] : bin[1]->vars[0];
    if (a == b) return false;
    using Mat = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic>;
    using Vec = Eigen::Matrix<S, Eigen::Dynamic, 1>;
    Eigen::Map<const Mat> m0(bin[0]->data.data(), N, N);
    Eigen::Map<const Mat> m1(bin[1]->data.data(), N, N);
    Vec d = Vec::Ones(N);
    for (auto* f : un) d = d.cwiseProduct(Eigen::Map<const Vec>(f->data.data(), N));
    // X(a, v) and Y(v, b); Map(r, c) = data[r + N c] = value at (vars[0] = r, vars[1] = c).
    Mat x = bin[0]->vars[0] == a ? Mat(m0) : Mat(m0.transpose());
    Mat y = bin[1]->vars[0] == v ? Mat(m1) : Mat(m1.transpose());
    Mat r = x * (d.asDiagonal() * y);
    out.vars = {a, b};
    out.data.assign(r.data(), r.data() + static_cast<std::size_t>(N) * N);
    return true;
  }
}

template <class S>
Factor<S> multiply_same_scope(const Factor<S>& f, const Factor<S>& g, int N) {
  Factor<S> out = f;
  if (f.vars == g.vars) {
    for (std::size_t i = 0; i < out.data.size(); ++i) out.data[i] *= g.data[i];
    return out;
  }
  // Two binary factors over the same pair in opposite order.
  for (int a = 0; a < N; ++a)
    for (int b = 0; b < N; ++b)
      out.data[a + static_cast<std::size_t>(N) * b] *= g.data[b + static_cast<std::size_t>(N) * a];
  return out;
}

template <class S>
std::map<EdgeLabel, DenseMatrix<S>> resolve_labels(const StarGraph& g, const MatrixFamily<S>& F) {
  std::map<EdgeLabel, DenseMatrix<S>> out;
  for (auto& e : g.edges()) {
    if (out.count(e.label)) continue;
    const auto& m = F.get(e.label.variable);
    out[e.label] = e.label.star ? m.adjoint() : m;
  }
  return out;
}

}  // namespace detail

/// Estimated multiply-add count of contract().
inline double contraction_cost(const StarGraph& g, int N, const std::vector<int>& keep = {}) {
  double cost = 0;
  for (auto& [v, size] : detail::elimination_plan(g, keep)) cost += detail::ipow(N, size + 1);
  return cost + static_cast<double>(g.edge_count()) * N * N;
}

/// Sum over all vertex maps of the edge-weight product, with the vertices in
/// `keep` left free. Exact variable elimination; no approximation.
template <class S>
Tensor<S> contract(const StarGraph& g, const MatrixFamily<S>& F, const std::vector<int>& keep) {
  const int N = F.dimension();
  auto mats = detail::resolve_labels(g, F);
  std::map<std::vector<int>, detail::Factor<S>> by_scope;
  std::vector<detail::Factor<S>> factors;
  for (auto& e : g.edges()) {
    auto f = detail::edge_factor(e, mats.at(e.label));
    std::vector<int> key = f.vars;
    std::sort(key.begin(), key.end());
    auto it = by_scope.find(key);
    if (it == by_scope.end()) by_scope.emplace(key, std::move(f));
    else it->second = detail::multiply_same_scope(it->second, f, N);
  }
  for (auto& [k, f] : by_scope) factors.push_back(std::move(f));

  S scalar(1);
  std::vector<bool> touched(g.vertex_count(), false);
  for (auto& e : g.edges()) touched[e.src] = touched[e.dst] = true;

  for (auto& [v, size] : detail::elimination_plan(g, keep)) {
    std::vector<const detail::Factor<S>*> with;
    std::vector<detail::Factor<S>> rest;
    for (auto& f : factors)
      if (std::find(f.vars.begin(), f.vars.end(), v) != f.vars.end()) with.push_back(&f);
    if (with.empty()) {
      if (!touched[v]) scalar *= S(N);
      continue;
    }
    detail::Factor<S> produced;
    if (!detail::try_eliminate_gemm(with, v, N, produced)) produced = detail::eliminate_generic(with, v, N);
    for (auto& f : factors)
      if (std::find(f.vars.begin(), f.vars.end(), v) == f.vars.end()) rest.push_back(std::move(f));
    if (produced.vars.empty()) scalar *= produced.data[0];
    else rest.push_back(std::move(produced));
    factors = std::move(rest);
  }

  // Combine what is left (factors over kept vertices only).
  std::vector<int> out_vars;
  for (int v : keep)
    if (std::find(out_vars.begin(), out_vars.end(), v) == out_vars.end()) out_vars.push_back(v);
  Tensor<S> out;
  out.N = N;
  out.vars = out_vars;
  double size = detail::ipow(N, out_vars.size());
  if (size > kMaxTensorEntries) throw GuardError("output tensor exceeds the size guard");
  out.data.assign(static_cast<std::size_t>(size), scalar);
  std::vector<int> idx(out_vars.size(), 0);
  for (std::size_t t = 0; t < out.data.size(); ++t) {
    for (auto& f : factors) {
      std::size_t off = 0, stride = 1;
      for (int x : f.vars) {
        auto pos = std::find(out_vars.begin(), out_vars.end(), x) - out_vars.begin();
        off += stride * static_cast<std::size_t>(idx[pos]);
        stride *= static_cast<std::size_t>(N);
      }
      out.data[t] *= f.data[off];
    }
    for (std::size_t p = 0; p < idx.size(); ++p) {
      if (++idx[p] < N) break;
      idx[p] = 0;
    }
  }
  return out;
}

}  // namespace traffic
