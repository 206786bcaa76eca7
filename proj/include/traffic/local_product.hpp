#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <deque>
#include <functional>
#include <map>
#include <memory>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include <json.hpp>

#include "traffic/algebra.hpp"
#include "traffic/errors.hpp"
#include "traffic/graph.hpp"
#include "traffic/matrix.hpp"
#include "traffic/monte_carlo.hpp"
#include "traffic/random.hpp"

namespace traffic {

inline constexpr int kLocalDepthGuard = 4;

struct WeightedEdge {
  int src = 0;
  int dst = 0;
  std::string variable;
  Complex weight{1.0};
};

/// Finite rooted network: vertices, weighted edges per generator, a root.
struct RootedNetwork {
  int vertex_count = 1;
  int root = 0;
  int depth = 0;                        // ball radius that is complete around the root
  std::vector<std::string> provenance;  // how each vertex was produced
  std::vector<int> distance;            // graph distance to the root
  std::vector<WeightedEdge> edges;

  /// Weight of the entry (a, b) of a generator, 0 when absent.
  Complex weight(const std::string& variable, int a, int b) const {
    auto it = index_.find({variable, a, b});
    return it == index_.end() ? Complex(0.0) : it->second;
  }

  void reindex() {
    index_.clear();
    adjacency_.assign(vertex_count, {});
    for (auto& e : edges) {
      index_[{e.variable, e.src, e.dst}] += e.weight;
      adjacency_[e.src].insert(e.dst);
      adjacency_[e.dst].insert(e.src);
    }
  }
  const std::set<int>& neighbours(int v) const { return adjacency_.at(v); }

 private:
  std::map<std::tuple<std::string, int, int>, Complex> index_;
  std::vector<std::set<int>> adjacency_;
};

/// Ball of radius r around the root of one realization of a family. Vertex 0 is
/// the root; ids are stable across radii for the same key.
struct ComponentBall {
  std::vector<std::string> ids;
  std::vector<int> distance;
  std::vector<WeightedEdge> edges;
};

class ComponentSampler {
 public:
  virtual ~ComponentSampler() = default;
  virtual std::string name() const = 0;
  virtual ComponentBall sample(std::uint64_t key, int radius) const = 0;
};

/// The Cayley graph of Z with generator i -> i+1.
class LineSampler : public ComponentSampler {
 public:
  explicit LineSampler(std::string variable) : variable_(std::move(variable)) {}
  std::string name() const override { return "line:" + variable_; }
  ComponentBall sample(std::uint64_t, int radius) const override { return interval(-radius, radius); }

 protected:
  ComponentBall interval(int lo, int hi) const {
    ComponentBall b;
    b.ids.push_back("0");
    b.distance.push_back(0);
    std::map<int, int> local{{0, 0}};
    for (int i = 1; i <= std::max(-lo, hi); ++i)
      for (int s : {i, -i})
        if (s >= lo && s <= hi) {
          local[s] = static_cast<int>(b.ids.size());
          b.ids.push_back(std::to_string(s));
          b.distance.push_back(i);
        }
    for (int i = lo; i < hi; ++i) b.edges.push_back({local[i], local[i + 1], variable_, 1.0});
    return b;
  }
  std::string variable_;
};

/// Root cluster of bond percolation on the line: each edge i -> i+1 is kept
/// with probability q, decided by a counter-based hash of (key, i).
class PercolatedLineSampler : public LineSampler {
 public:
  PercolatedLineSampler(std::string variable, double q) : LineSampler(std::move(variable)), q_(q) {
    if (q < 0 || q > 1) throw ContractError("percolation parameter must lie in [0, 1]");
  }
  std::string name() const override { return "percolated_line:" + variable_ + ":" + format_double(q_); }
  ComponentBall sample(std::uint64_t key, int radius) const override {
    auto open = [&](int i) {
      std::uint64_t h = stream_key({key, static_cast<std::uint64_t>(static_cast<std::int64_t>(i))});
      return static_cast<double>(h >> 11) * 0x1.0p-53 < q_;
    };
    int hi = 0, lo = 0;
    while (hi < radius && open(hi)) ++hi;
    while (-lo < radius && open(lo - 1)) --lo;
    return interval(lo, hi);
  }

 private:
  double q_;
};

/// A fixed finite rooted graph; its ball is found by breadth-first search.
class FiniteSampler : public ComponentSampler {
 public:
  FiniteSampler(std::string name, int vertex_count, std::vector<WeightedEdge> edges, int root = 0)
      : name_(std::move(name)), n_(vertex_count), edges_(std::move(edges)), root_(root) {
    if (root < 0 || root >= n_) throw ContractError("root out of range");
    for (auto& e : edges_)
      if (e.src < 0 || e.src >= n_ || e.dst < 0 || e.dst >= n_) throw ContractError("edge endpoint out of range");
  }
  std::string name() const override { return name_; }
  ComponentBall sample(std::uint64_t, int radius) const override {
    std::vector<std::vector<int>> adj(n_);
    for (auto& e : edges_) {
      adj[e.src].push_back(e.dst);
      adj[e.dst].push_back(e.src);
    }
    std::vector<int> dist(n_, -1), local(n_, -1);
    std::deque<int> queue{root_};
    dist[root_] = 0;
    ComponentBall b;
    while (!queue.empty()) {
      int v = queue.front();
      queue.pop_front();
      local[v] = static_cast<int>(b.ids.size());
      b.ids.push_back(std::to_string(v));
      b.distance.push_back(dist[v]);
      if (dist[v] == radius) continue;
      for (int u : adj[v])
        if (dist[u] < 0) {
          dist[u] = dist[v] + 1;
          queue.push_back(u);
        }
    }
    for (auto& e : edges_)
      if (local[e.src] >= 0 && local[e.dst] >= 0) b.edges.push_back({local[e.src], local[e.dst], e.variable, e.weight});
    return b;
  }

 private:
  std::string name_;
  int n_;
  std::vector<WeightedEdge> edges_;
  int root_;
};

using SamplerList = std::vector<std::shared_ptr<const ComponentSampler>>;

namespace detail {

inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (unsigned char c : s) h = (h ^ c) * 0x100000001b3ULL;
  return h;
}

}  // namespace detail

/// Iterated root gluing truncated at `depth`: the root receives a realization of
/// every family; a vertex produced by family j receives fresh realizations of
/// every other family, truncated so that nothing lies beyond distance `depth`.
/// Each realization is seeded by (seed, provenance of the host vertex, family).
inline RootedNetwork local_free_product(const SamplerList& samplers, int depth, std::uint64_t seed,
                                        int guard = kLocalDepthGuard) {
  if (samplers.empty()) throw ContractError("local free product needs at least one sampler");
  if (depth < 0) throw ContractError("depth must be nonnegative");
  if (depth > guard) throw GuardError("local free product depth " + std::to_string(depth) + " exceeds the guard " +
                                      std::to_string(guard));
  RootedNetwork net;
  net.depth = depth;
  net.provenance = {""};
  net.distance = {0};
  std::vector<int> origin{-1};  // family that produced each vertex
  std::deque<int> pending{0};
  while (!pending.empty()) {
    int host = pending.front();
    pending.pop_front();
    int radius = depth - net.distance[host];
    if (radius <= 0) continue;
    for (std::size_t f = 0; f < samplers.size(); ++f) {
      if (static_cast<int>(f) == origin[host]) continue;
      std::uint64_t key = stream_key({seed, detail::fnv1a(net.provenance[host]), f});
      ComponentBall ball = samplers[f]->sample(key, radius);
      std::vector<int> global(ball.ids.size());
      global[0] = host;
      for (std::size_t i = 1; i < ball.ids.size(); ++i) {
        global[i] = net.vertex_count++;
        net.provenance.push_back(net.provenance[host] + "/" + std::to_string(f) + ":" + ball.ids[i]);
        net.distance.push_back(net.distance[host] + ball.distance[i]);
        origin.push_back(static_cast<int>(f));
        pending.push_back(global[i]);
      }
      for (auto& e : ball.edges) net.edges.push_back({global[e.src], global[e.dst], e.variable, e.weight});
    }
  }
  net.reindex();
  return net;
}

/// Induced sub-network on the vertices within distance r of the root.
inline RootedNetwork restrict(const RootedNetwork& net, int r) {
  if (r > net.depth) throw TruncationError("cannot restrict to a radius beyond the constructed depth");
  std::vector<int> local(net.vertex_count, -1);
  RootedNetwork out;
  out.vertex_count = 0;
  out.depth = r;
  for (int v = 0; v < net.vertex_count; ++v)
    if (net.distance[v] <= r) {
      local[v] = out.vertex_count++;
      out.provenance.push_back(net.provenance[v]);
      out.distance.push_back(net.distance[v]);
    }
  out.root = local[net.root];
  for (auto& e : net.edges)
    if (local[e.src] >= 0 && local[e.dst] >= 0) out.edges.push_back({local[e.src], local[e.dst], e.variable, e.weight});
  out.reindex();
  return out;
}

/// Largest undirected distance from r in a connected graph.
inline int graph_radius(const StarGraph& g, int r) {
  std::vector<std::vector<int>> adj(g.vertex_count());
  for (auto& e : g.edges()) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  std::vector<int> dist(g.vertex_count(), -1);
  std::deque<int> q{r};
  dist[r] = 0;
  int far = 0;
  while (!q.empty()) {
    int v = q.front();
    q.pop_front();
    far = std::max(far, dist[v]);
    for (int u : adj[v])
      if (dist[u] < 0) {
        dist[u] = dist[v] + 1;
        q.push_back(u);
      }
  }
  if (std::count(dist.begin(), dist.end(), -1)) throw ContractError("test graph must be connected");
  return far;
}

/// Sum over injective maps phi with phi(r) = root of the product of edge weights;
/// a starred edge a -> b reads conj(weight(b, a)).
inline Complex rooted_injective_count(const StarGraph& g, int r, const RootedNetwork& net) {
  if (r < 0 || r >= g.vertex_count()) throw ContractError("root of the test graph out of range");
  if (graph_radius(g, r) > net.depth)
    throw TruncationError("test graph reaches distance " + std::to_string(graph_radius(g, r)) +
                          " but the network is complete only up to " + std::to_string(net.depth));
  // Breadth-first order from r, each vertex anchored at an earlier neighbour.
  int n = g.vertex_count();
  std::vector<std::vector<int>> adj(n);
  for (auto& e : g.edges()) {
    adj[e.src].push_back(e.dst);
    adj[e.dst].push_back(e.src);
  }
  std::vector<int> order{r}, anchor(n, -1), pos(n, -1);
  pos[r] = 0;
  for (std::size_t i = 0; i < order.size(); ++i)
    for (int u : adj[order[i]])
      if (pos[u] < 0) {
        pos[u] = static_cast<int>(order.size());
        anchor[u] = order[i];
        order.push_back(u);
      }
  std::vector<std::vector<const Edge*>> check(n);
  for (auto& e : g.edges()) check[order[std::max(pos[e.src], pos[e.dst])]].push_back(&e);

  std::vector<int> phi(n, -1);
  std::vector<bool> used(net.vertex_count, false);
  Complex total = 0;
  auto entry = [&](const Edge& e) {
    if (e.label.star) return std::conj(net.weight(e.label.variable, phi[e.dst], phi[e.src]));
    return net.weight(e.label.variable, phi[e.src], phi[e.dst]);
  };
  std::function<void(std::size_t, Complex)> rec = [&](std::size_t i, Complex prod) {
    if (i == order.size()) {
      total += prod;
      return;
    }
    int v = order[i];
    auto try_x = [&](int x) {
      if (used[x]) return;
      phi[v] = x;
      Complex q = prod;
      for (auto* e : check[v]) {
        q *= entry(*e);
        if (q == Complex(0.0)) break;
      }
      if (q != Complex(0.0)) {
        used[x] = true;
        rec(i + 1, q);
        used[x] = false;
      }
      phi[v] = -1;
    };
    if (i == 0) try_x(net.root);
    else
      for (int x : net.neighbours(phi[anchor[v]])) try_x(x);
  };
  rec(0, Complex(1.0));
  return total;
}

/// The network as a matrix family of dimension |V|, one matrix per generator.
inline ComplexFamily network_family(const RootedNetwork& net) {
  ComplexFamily f(net.vertex_count);
  std::map<std::string, ComplexMatrix> mats;
  for (auto& e : net.edges) {
    auto it = mats.try_emplace(e.variable, ComplexMatrix(net.vertex_count)).first;
    it->second(e.src, e.dst) += e.weight;
  }
  for (auto& [v, m] : mats) f.set(v, std::move(m));
  return f;
}

inline nlohmann::json network_to_json(const RootedNetwork& net) {
  nlohmann::json j;
  j["root"] = net.root;
  j["depth"] = net.depth;
  j["vertices"] = nlohmann::json::array();
  for (int v = 0; v < net.vertex_count; ++v)
    j["vertices"].push_back({{"id", v}, {"provenance", net.provenance[v]}, {"distance", net.distance[v]}});
  j["edges"] = nlohmann::json::array();
  for (auto& e : net.edges)
    j["edges"].push_back(
        {{"src", e.src}, {"dst", e.dst}, {"var", e.variable}, {"re", e.weight.real()}, {"im", e.weight.imag()}});
  return j;
}

struct FreeProductRow {
  Estimate product;          // rooted counts in the local free product
  Value prediction;          // free product of the per-family estimates
  double prediction_se = 0;  // propagated standard error of the prediction
  bool within_3sigma = false;
};

/// Compares rooted counts in the local free product against the free product of
/// rooted counts measured on each family separately. Test graphs are rooted at
/// vertex 0 and each sampler k drives the variables with family k in `fam`.
inline std::vector<FreeProductRow> check_freeprod_consistency(const SamplerList& samplers,
                                                              const std::vector<StarGraph>& graphs,
                                                              const FamilyAssignment& fam, int depth, int mc_samples,
                                                              std::uint64_t seed) {
  if (mc_samples < 1) throw ContractError("need at least one sample");
  std::vector<std::vector<Complex>> joint(graphs.size());
  for (int s = 0; s < mc_samples; ++s) {
    RootedNetwork net = local_free_product(samplers, depth, stream_key({seed, 0, static_cast<std::uint64_t>(s)}));
    for (std::size_t i = 0; i < graphs.size(); ++i) joint[i].push_back(rooted_injective_count(graphs[i], 0, net));
  }
  // Marginals: each component rooted at its smallest vertex, counted on its own family.
  std::map<std::pair<int, std::string>, Estimate> marginal;
  auto estimate_marginal = [&](int f, const StarGraph& c) {
    auto key = std::make_pair(f, canonicalize(c).bytes);
    auto it = marginal.find(key);
    if (it != marginal.end()) return it->second;
    if (f < 0 || f >= static_cast<int>(samplers.size())) throw ContractError("family without a sampler");
    std::vector<Complex> xs;
    for (int s = 0; s < mc_samples; ++s) {
      RootedNetwork net = local_free_product({samplers[f]}, depth,
                                             stream_key({seed, 1 + static_cast<std::uint64_t>(f),
                                                         static_cast<std::uint64_t>(s)}));
      xs.push_back(rooted_injective_count(c, 0, net));
    }
    return marginal[key] = summarize(xs);
  };
  std::vector<FreeProductRow> rows;
  for (std::size_t i = 0; i < graphs.size(); ++i) {
    FreeProductRow row;
    row.product = summarize(joint[i]);
    ComponentTree t = colored_component_tree(graphs[i], fam);
    if (!t.is_tree) {
      row.prediction = 0;
    } else {
      Complex pred = 1.0;
      double rel2 = 0;
      for (auto& c : t.components) {
        Estimate e = estimate_marginal(c.family, c.graph);
        pred *= e.mean;
        if (std::abs(e.mean) > 0) rel2 += std::pow(e.se / std::abs(e.mean), 2);
      }
      row.prediction = Value(pred);
      row.prediction_se = std::abs(pred) * std::sqrt(rel2);
    }
    double band = 3 * std::hypot(row.product.se, row.prediction_se);
    row.within_3sigma = std::abs(row.product.mean - row.prediction.to_complex()) <= std::max(band, 1e-12);
    rows.push_back(row);
  }
  return rows;
}

}  // namespace traffic
