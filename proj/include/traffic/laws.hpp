#pragma once

#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <utility>

#include "traffic/canonical.hpp"
#include "traffic/entry_law.hpp"
#include "traffic/errors.hpp"
#include "traffic/graph.hpp"
#include "traffic/structure.hpp"
#include "traffic/value.hpp"

namespace traffic {

/// An injective traffic distribution: a rule T -> tau0[T] on connected test
/// graphs. Evaluation goes through the canonical representative of T, so any
/// evaluator is isomorphism invariant by construction. Results are memoized.
class TrafficDistribution {
 public:
  using Evaluator = std::function<Value(const StarGraph&)>;

  TrafficDistribution() = default;
  TrafficDistribution(Evaluator f, std::string description)
      : f_(std::make_shared<Evaluator>(std::move(f))),
        description_(std::move(description)),
        cache_(std::make_shared<Cache>()) {}

  Value operator()(const StarGraph& g) const {
    if (!f_) throw ContractError("empty traffic distribution");
    if (!g.connected()) throw ContractError("test graphs must be connected");
    CanonicalForm c = canonicalize(g);
    {
      std::lock_guard<std::mutex> lock(cache_->mutex);
      auto it = cache_->values.find(c.bytes);
      if (it != cache_->values.end()) return it->second;
    }
    Value v = (*f_)(permute_vertices(g, c.relabeling));
    std::lock_guard<std::mutex> lock(cache_->mutex);
    cache_->values.emplace(c.bytes, v);
    return v;
  }

  const std::string& description() const { return description_; }

 private:
  struct Cache {
    std::mutex mutex;
    std::map<std::string, Value> values;
  };
  std::shared_ptr<Evaluator> f_;
  std::string description_;
  std::shared_ptr<Cache> cache_;
};

/// Limit of injective densities of an entrywise-random matrix family.
class GraphonDensity {
 public:
  using Evaluator = std::function<Value(const StarGraph&)>;

  GraphonDensity() = default;
  GraphonDensity(Evaluator f, std::string description) : f_(std::move(f)), description_(std::move(description)) {}

  Value operator()(const StarGraph& g) const {
    if (!f_) throw ContractError("empty graphon density");
    return f_(g);
  }
  const std::string& description() const { return description_; }

 private:
  Evaluator f_;
  std::string description_;
};

namespace detail {

inline void require_single_variable(const StarGraph& g, const std::string& law) {
  if (g.variables().size() > 1) throw ContractError(law + " law is defined on single-variable graphs only");
}

}  // namespace detail

/// Limit of Wigner matrices: indicator of a double tree; in the complex case the
/// twin edges must also point in opposite directions. The matrix is self-adjoint,
/// so starred edges are read as plain edges.
inline TrafficDistribution tau0_semicircular(bool complex_entries = false) {
  return TrafficDistribution(
      [complex_entries](const StarGraph& g) -> Value {
        detail::require_single_variable(g, "semicircular");
        StarGraph h = drop_stars(g);
        if (!is_double_tree(h)) return 0;
        if (complex_entries && !twins_opposite(h)) return 0;
        return 1;
      },
      complex_entries ? "semicircular_complex" : "semicircular_real");
}

/// Limit of Ginibre matrices G / sqrt(N) (circular element): double tree whose
/// twins are opposite and adjoint.
inline TrafficDistribution tau0_circular() {
  return TrafficDistribution(
      [](const StarGraph& g) -> Value {
        detail::require_single_variable(g, "circular");
        return is_double_tree(g) && twins_opposite(g) && twins_adjoint(g) ? 1 : 0;
      },
      "circular");
}

/// Free cumulant of a Haar unitary on a cyclic word: (-1)^(n-1) Catalan(n-1) on
/// the alternating words of length 2n, zero otherwise.
inline Rational haar_free_cumulant(const Word& w) {
  std::size_t len = w.size();
  if (len == 0 || len % 2) return 0;
  for (std::size_t i = 0; i < len; ++i)
    if (w[i].star == w[(i + 1) % len].star) return 0;
  int n = static_cast<int>(len / 2);
  Integer catalan = 1;  // Catalan(n-1)
  for (int k = 0; k < n - 1; ++k) catalan = catalan * 2 * (2 * k + 1) / (k + 2);
  return Rational(n % 2 ? catalan : Integer(-catalan));
}

/// Limit of Haar unitary matrices: nonzero only on oriented cacti, where it is the
/// product over cycles of the Haar free cumulant of the word read along the cycle.
/// On double trees this agrees with the circular law.
inline TrafficDistribution tau0_haar() {
  return TrafficDistribution(
      [](const StarGraph& g) -> Value {
        detail::require_single_variable(g, "haar");
        auto cycles = oriented_cactus_cycles(g);
        if (!cycles) return 0;
        Rational out = 1;
        for (auto& w : *cycles) {
          out *= haar_free_cumulant(w);
          if (out == 0) break;
        }
        return out;
      },
      "haar");
}

/// Limit of uniform permutation matrices: indicator of a directed line.
inline TrafficDistribution tau0_permutation() {
  return TrafficDistribution(
      [](const StarGraph& g) -> Value {
        detail::require_single_variable(g, "permutation");
        return is_directed_line(g) ? 1 : 0;
      },
      "permutation");
}

/// Limit of the normalized all-ones matrix J_N: indicator of a tree, edges
/// counted with multiplicity. Every label is read as J.
inline TrafficDistribution tau0_jlimit() {
  return TrafficDistribution([](const StarGraph& g) -> Value { return is_tree(g) ? 1 : 0; }, "jlimit");
}

/// (1/N) sum over injective maps of prod 1/N for J_N: (1/N) N!/(N-|V|)! N^{-|E|}.
inline Rational jn_injective_trace(const StarGraph& g, int N) {
  if (N < 1) throw ContractError("N must be positive");
  int v = g.vertex_count();
  if (v > N) return 0;
  Rational r(1, N);
  for (int i = 0; i < v; ++i) r *= N - i;
  return r / rational_pow(Rational(N), static_cast<unsigned>(g.edge_count()));
}

/// (1/N) sum over all maps for J_N on a connected graph: N^{|V|-|E|-1}.
inline Rational jn_trace(const StarGraph& g, int N) {
  if (N < 1) throw ContractError("N must be positive");
  if (!g.connected()) throw ContractError("test graphs must be connected");
  int e = g.vertex_count() - g.edge_count() - 1;
  Rational p = rational_pow(Rational(N), static_cast<unsigned>(e < 0 ? -e : e));
  return e < 0 ? Rational(1) / p : p;
}

enum class EntrySymmetry { none, hermitian };

/// Joint entry moment E[X^k conj(X)^l].
using MomentFunction = std::function<Value(int k, int l)>;

inline MomentFunction moment_table(std::map<std::pair<int, int>, Value> table) {
  return [table = std::move(table)](int k, int l) -> Value {
    if (k == 0 && l == 0) return 1;
    auto it = table.find({k, l});
    if (it == table.end())
      throw ContractError("missing entry moment E[X^" + std::to_string(k) + " conj(X)^" + std::to_string(l) + "]");
    return it->second;
  };
}

inline MomentFunction entry_moments(const EntryLaw& law) {
  return [law](int k, int l) -> Value { return law.moment(k, l); };
}

/// Product over variables and vertex pairs of the joint moment of the entries the
/// edges on that pair read. For a plain edge a -> b the entry is X_ab; a starred
/// edge a -> b reads conj(X_ba). Hermitian families identify X_ba with conj(X_ab).
/// Loops use `diagonal` when given.
inline GraphonDensity graphon_density_iid(MomentFunction off, EntrySymmetry symmetry = EntrySymmetry::none,
                                          std::optional<MomentFunction> diagonal = std::nullopt,
                                          std::string description = "iid") {
  auto f = [off = std::move(off), symmetry, diagonal](const StarGraph& g) -> Value {
    // (variable, a, b) -> (power of X_ab, power of conj(X_ab))
    std::map<std::tuple<std::string, int, int>, std::pair<int, int>> counts;
    for (auto& e : g.edges()) {
      int a = e.src, b = e.dst;
      bool conj = false;
      if (e.label.star) {
        std::swap(a, b);
        conj = true;
      }
      if (symmetry == EntrySymmetry::hermitian && a > b) {
        std::swap(a, b);
        conj = !conj;
      }
      auto& c = counts[{e.label.variable, a, b}];
      (conj ? c.second : c.first) += 1;
    }
    Value out = 1;
    for (auto& [key, kl] : counts) {
      bool loop = std::get<1>(key) == std::get<2>(key);
      const MomentFunction& m = loop && diagonal ? *diagonal : off;
      out *= m(kl.first, kl.second);
      if (out.is_zero()) return out;
    }
    return out;
  };
  return GraphonDensity(f, std::move(description));
}

inline GraphonDensity graphon_density_iid(const EntryLaw& law, EntrySymmetry symmetry = EntrySymmetry::none,
                                          std::optional<EntryLaw> diagonal = std::nullopt) {
  std::optional<MomentFunction> d;
  if (diagonal) d = entry_moments(*diagonal);
  return graphon_density_iid(entry_moments(law), symmetry, d, law.name());
}

/// Pointwise product: the law of A_N o B_N for an entrywise-random B_N.
inline TrafficDistribution compose_hadamard(const TrafficDistribution& tau0, const GraphonDensity& delta0) {
  return TrafficDistribution([tau0, delta0](const StarGraph& g) -> Value { return tau0(g) * delta0(g); },
                             "hadamard(" + tau0.description() + "," + delta0.description() + ")");
}

/// Limit law of B_N / sqrt(N) for centered entrywise-random B_N: double-tree
/// indicator times the density.
inline TrafficDistribution sqrtN_law(const GraphonDensity& delta0) {
  StarGraph single_edge(2, {{0, 1, {"x", false}}});
  if (!delta0(single_edge).is_zero())
    throw ContractError("sqrtN law needs centered entries: the single-edge density is nonzero");
  return TrafficDistribution(
      [delta0](const StarGraph& g) -> Value {
        detail::require_single_variable(g, "sqrtN");
        if (!is_double_tree(g)) return 0;
        return delta0(g);
      },
      "sqrtN(" + delta0.description() + ")");
}

}  // namespace traffic
