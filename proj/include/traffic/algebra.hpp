#pragma once

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "traffic/errors.hpp"
#include "traffic/graph.hpp"
#include "traffic/laws.hpp"
#include "traffic/partition.hpp"
#include "traffic/structure.hpp"
#include "traffic/value.hpp"

namespace traffic {

inline constexpr int kMomentGuard = 8;
inline constexpr int kCltGuard = 10;

using GraphFunctional = std::function<Value(const StarGraph&)>;

/// tau[T] = sum over partitions pi of V of tau0[T^pi].
inline Value tau_from_tau0(const GraphFunctional& tau0, const StarGraph& g) {
  Value total = 0;
  for_each_partition(g.vertex_count(), [&](const SetPartition& p) { total += tau0(quotient(g, p)); });
  return total;
}

inline Value tau_from_tau0(const TrafficDistribution& d, const StarGraph& g) {
  return tau_from_tau0(GraphFunctional([&](const StarGraph& h) { return d(h); }), g);
}

/// tau0[T] = sum over partitions pi of V of mu(0, pi) tau[T^pi].
inline Value tau0_from_tau(const GraphFunctional& tau, const StarGraph& g) {
  Value total = 0;
  for_each_partition(g.vertex_count(), [&](const SetPartition& p) {
    total += Value(mobius_from_discrete(p)) * tau(quotient(g, p));
  });
  return total;
}

/// Traffic-free product of laws indexed by family. On a connected T it vanishes
/// unless the component graph is a tree, and otherwise multiplies the marginal
/// values of the single-family components. Disconnected T factor over their
/// connected components.
inline TrafficDistribution free_product(const std::map<int, TrafficDistribution>& laws, const FamilyAssignment& fam) {
  std::string desc = "freeprod(";
  bool first = true;
  for (auto& [id, d] : laws) {
    desc += (first ? "" : ";") + d.description();
    first = false;
  }
  desc += ")";
  auto connected_value = [laws, fam](const StarGraph& g) -> Value {
    ComponentTree t = colored_component_tree(g, fam);
    if (!t.is_tree) return 0;
    Value out = 1;
    for (auto& c : t.components) {
      auto it = laws.find(c.family);
      if (it == laws.end()) throw ContractError("no law for family " + std::to_string(c.family));
      out *= it->second(c.graph);
      if (out.is_zero()) return out;
    }
    return out;
  };
  return TrafficDistribution(connected_value, desc);
}

/// Value of a possibly disconnected graph under a law, multiplied over components.
inline Value evaluate_components(const TrafficDistribution& d, const StarGraph& g) {
  Value out = 1;
  for (auto& piece : split_components(g)) out *= d(piece.graph);
  return out;
}

/// Phi(w) = tau[close(w)].
inline Value star_moment(const TrafficDistribution& d, const Word& w) {
  if (w.empty()) throw ContractError("moment of the empty word");
  if (static_cast<int>(w.size()) > kMomentGuard)
    throw GuardError("moment guard: words are limited to length " + std::to_string(kMomentGuard));
  return tau_from_tau0(d, close(from_word(w)));
}

/// Phi of the concatenation of the pieces, each piece drawn from one family and
/// consecutive pieces (cyclically) from different families.
inline Value mixed_star_moment(const TrafficDistribution& d, const std::vector<Word>& pieces,
                               const FamilyAssignment& fam) {
  Word w;
  std::vector<int> families;
  for (auto& piece : pieces) {
    if (piece.empty()) throw ContractError("empty piece in alternating word");
    int f = -1;
    for (auto& l : piece) {
      auto it = fam.find(l.variable);
      if (it == fam.end()) throw ContractError("no family assigned to variable '" + l.variable + "'");
      if (f != -1 && it->second != f) throw ContractError("a piece of an alternating word mixes families");
      f = it->second;
    }
    families.push_back(f);
    w.insert(w.end(), piece.begin(), piece.end());
  }
  for (std::size_t i = 0; i + 1 < families.size(); ++i)
    if (families[i] == families[i + 1]) throw ContractError("consecutive pieces come from the same family");
  if (families.size() > 1 && families.front() == families.back())
    throw ContractError("first and last pieces come from the same family");
  return star_moment(d, w);
}

/// Phi(t) = tau[delta(t)] for a graph monomial.
inline Value monomial_moment(const TrafficDistribution& d, const GraphMonomial& t) {
  if (t.graph.vertex_count() > kMomentGuard + 1)
    throw GuardError("moment guard: monomials are limited to " + std::to_string(kMomentGuard + 1) + " vertices");
  return tau_from_tau0(d, close(t));
}

/// Phi(t1 o t2) - Phi(t1) Phi(t2).
inline Value kappa(const TrafficDistribution& d, const GraphMonomial& t1, const GraphMonomial& t2) {
  return monomial_moment(d, hadamard({t1, t2})) - monomial_moment(d, t1) * monomial_moment(d, t2);
}

inline void require_probability(const Rational& p) {
  if (p < 0 || p > 1) throw ContractError("CLT parameter p = " + to_string(p) + " lies outside [0, 1]");
}

/// Injective law of sqrt(p) d + sqrt(1-p) s with d a standard Gaussian diagonal
/// and s semicircular, on cyclic single-variable graphs: the loop-free part must
/// be a double tree on K vertices and every vertex must carry an even number 2m
/// of loops; the value is (1-p)^(K-1) prod p^m (2m-1)!!.
inline Value clt_tau0(const Rational& p, const StarGraph& g) {
  require_probability(p);
  if (!is_cyclic(g)) throw ContractError("CLT law is evaluated on cyclic graphs only");
  detail::require_single_variable(g, "CLT");
  StarGraph h = drop_stars(g);
  std::vector<int> loops(h.vertex_count(), 0);
  std::vector<Edge> rest;
  for (auto& e : h.edges()) {
    if (e.is_loop()) ++loops[e.src];
    else rest.push_back(e);
  }
  if (!is_double_tree(StarGraph(h.vertex_count(), rest))) return 0;
  Rational out = rational_pow(1 - p, static_cast<unsigned>(h.vertex_count() - 1));
  for (int l : loops) {
    if (l % 2) return 0;
    out *= rational_pow(p, static_cast<unsigned>(l / 2)) * Rational(EntryLaw::double_factorial(l - 1));
  }
  return out;
}

inline TrafficDistribution clt_law(const Rational& p) {
  require_probability(p);
  return TrafficDistribution([p](const StarGraph& g) { return clt_tau0(p, g); }, "clt:p=" + to_string(p));
}

/// k-th moment of sqrt(p) d + sqrt(1-p) s: sum of clt_tau0 over quotients of the k-cycle.
inline Rational clt_moment(const Rational& p, int k) {
  require_probability(p);
  if (k < 0) throw ContractError("negative moment order");
  if (k > kCltGuard) throw GuardError("CLT moments are limited to order " + std::to_string(kCltGuard));
  if (k == 0) return 1;
  Word w(k, EdgeLabel{"x", false});
  StarGraph cycle = close(from_word(w));
  Rational total = 0;
  for_each_partition(k, [&](const SetPartition& pi) { total += clt_tau0(p, quotient(cycle, pi)).rational(); });
  return total;
}

/// Law of the transposed family: every edge reversed, labels kept.
inline TrafficDistribution transpose_law(const TrafficDistribution& d) {
  return TrafficDistribution(
      [d](const StarGraph& g) {
        std::vector<Edge> edges;
        for (auto& e : g.edges()) edges.push_back({e.dst, e.src, e.label});
        return d(StarGraph(g.vertex_count(), std::move(edges)));
      },
      "transpose(" + d.description() + ")");
}

/// Joint law of (x, y = x^T) from the law d of x: y-edges are reversed and relabelled x.
inline TrafficDistribution joint_with_transpose(const TrafficDistribution& d, const std::string& x = "x",
                                                const std::string& y = "y") {
  if (x == y) throw ContractError("joint_with_transpose needs two distinct variable names");
  return TrafficDistribution(
      [d, x, y](const StarGraph& g) { return d(rename_variable(reverse_variable(g, y), y, x)); },
      "with_transpose(" + d.description() + ")");
}

/// Loop counts of a one-vertex graph, per (variable, star) label.
using LoopCounts = std::map<EdgeLabel, int>;

/// Diagonal traffic: zero on graphs with more than one vertex, the joint moment
/// of the diagonal entries on one-vertex graphs.
inline TrafficDistribution diagonal_law(std::function<Value(const LoopCounts&)> moments, std::string description) {
  return TrafficDistribution(
      [moments = std::move(moments)](const StarGraph& g) -> Value {
        if (g.vertex_count() > 1) return 0;
        LoopCounts c;
        for (auto& e : g.edges()) ++c[e.label];
        return moments(c);
      },
      std::move(description));
}

/// Diagonal traffic whose variables are independent with the given entry laws.
/// A variable missing from the map is an error.
inline TrafficDistribution diagonal_law(const std::map<std::string, EntryLaw>& laws) {
  std::string desc;
  for (auto& [v, l] : laws) desc += (desc.empty() ? "" : ",") + v + "~" + l.name();
  return diagonal_law(
      [laws](const LoopCounts& c) -> Value {
        std::map<std::string, std::pair<int, int>> kl;
        for (auto& [label, n] : c) (label.star ? kl[label.variable].second : kl[label.variable].first) += n;
        Value out = 1;
        for (auto& [v, p] : kl) {
          auto it = laws.find(v);
          if (it == laws.end()) throw ContractError("no diagonal law for variable '" + v + "'");
          out *= Value(it->second.moment(p.first, p.second));
        }
        return out;
      },
      "diagonal(" + desc + ")");
}

/// Diagonal traffic of one entry law, applied to whatever single variable the graph uses.
inline TrafficDistribution diagonal_law(const EntryLaw& law) {
  return diagonal_law(
      [law](const LoopCounts& c) -> Value {
        int k = 0, l = 0;
        std::string var;
        for (auto& [label, n] : c) {
          if (!var.empty() && label.variable != var)
            throw ContractError("diagonal law is defined on single-variable graphs only");
          var = label.variable;
          (label.star ? l : k) += n;
        }
        return law.moment(k, l);
      },
      "diagonal:" + law.name());
}

}  // namespace traffic
