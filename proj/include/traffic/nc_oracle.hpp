#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "traffic/errors.hpp"
#include "traffic/graph.hpp"
#include "traffic/partition.hpp"
#include "traffic/value.hpp"

namespace traffic {

/// Mixed moments of freely independent families from their marginal
/// *-distributions, through free cumulants. Works on words only and shares
/// no code with the graph calculus, so it can serve as a cross-check.
class FreeMomentOracle {
 public:
  using Marginal = std::function<Value(const Word&)>;

  FreeMomentOracle(std::map<int, Marginal> marginals, std::map<std::string, int> family)
      : marginals_(std::move(marginals)), family_(std::move(family)) {}

  Value moment(const Word& w) {
    if (w.empty()) return 1;
    if (static_cast<int>(w.size()) > kNoncrossingGuard) throw GuardError("free moment oracle: word too long");
    Value total = 0;
    for (auto& pi : enumerate_noncrossing_partitions(static_cast<int>(w.size()))) {
      Value prod = 1;
      for (auto& block : pi.blocks()) {
        Word sub;
        for (int i : block) sub.push_back(w[i]);
        prod *= cumulant(sub);
        if (prod.is_zero()) break;
      }
      total += prod;
    }
    return total;
  }

  /// Free cumulant kappa_n(a_1, ..., a_n); zero as soon as two families meet.
  Value cumulant(const Word& w) {
    int f = family_of(w.front());
    for (auto& l : w)
      if (family_of(l) != f) return 0;
    auto key = word_to_string(w);
    auto it = memo_.find(key);
    if (it != memo_.end()) return it->second;
    auto m = marginals_.find(f);
    if (m == marginals_.end()) throw ContractError("no marginal for family " + std::to_string(f));
    Value k = m->second(w);
    int n = static_cast<int>(w.size());
    for (auto& pi : enumerate_noncrossing_partitions(n)) {
      if (pi.block_count() == 1) continue;
      Value prod = 1;
      for (auto& block : pi.blocks()) {
        Word sub;
        for (int i : block) sub.push_back(w[i]);
        prod *= cumulant(sub);
        if (prod.is_zero()) break;
      }
      k -= prod;
    }
    memo_.emplace(key, k);
    return k;
  }

 private:
  int family_of(const EdgeLabel& l) const {
    auto it = family_.find(l.variable);
    if (it == family_.end()) throw ContractError("no family assigned to variable '" + l.variable + "'");
    return it->second;
  }

  std::map<int, Marginal> marginals_;
  std::map<std::string, int> family_;
  std::map<std::string, Value> memo_;
};

/// Free cumulants k_1..k_n of one variable from moments m_1..m_n (index 0 unused).
inline std::vector<Rational> free_cumulants_from_moments(const std::vector<Rational>& m) {
  int n = static_cast<int>(m.size()) - 1;
  std::vector<Rational> k(m.size(), 0);
  for (int j = 1; j <= n; ++j) {
    Rational rest = 0;
    for (auto& pi : enumerate_noncrossing_partitions(j)) {
      if (pi.block_count() == 1) continue;
      Rational prod = 1;
      for (int s : pi.block_sizes()) prod *= k[s];
      rest += prod;
    }
    k[j] = m[j] - rest;
  }
  return k;
}

/// Moments m_1..m_n from free cumulants k_1..k_n (index 0 unused; m_0 = 1).
inline std::vector<Rational> moments_from_free_cumulants(const std::vector<Rational>& k) {
  int n = static_cast<int>(k.size()) - 1;
  std::vector<Rational> m(k.size(), 0);
  if (!m.empty()) m[0] = 1;
  for (int j = 1; j <= n; ++j)
    for (auto& pi : enumerate_noncrossing_partitions(j)) {
      Rational prod = 1;
      for (int s : pi.block_sizes()) prod *= k[s];
      m[j] += prod;
    }
  return m;
}

}  // namespace traffic
