#pragma once

#include <algorithm>
#include <functional>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <utility>
#include <vector>

#include "traffic/graph.hpp"

namespace traffic {

using FamilyAssignment = std::map<std::string, int>;

struct ClassifyFlags {
  bool is_tree = false;
  bool is_double_tree = false;
  bool is_double_tree_opposite = false;
  bool is_double_tree_opposite_adjoint = false;
  bool is_directed_line = false;
  bool is_cyclic = false;
};

namespace detail {

// Unordered vertex pair -> edges between them (loops excluded).
inline std::map<std::pair<int, int>, std::vector<Edge>> edges_by_pair(const StarGraph& g) {
  std::map<std::pair<int, int>, std::vector<Edge>> out;
  for (auto& e : g.edges()) {
    if (e.is_loop()) continue;
    out[{std::min(e.src, e.dst), std::max(e.src, e.dst)}].push_back(e);
  }
  return out;
}

inline bool has_loop(const StarGraph& g) {
  return std::any_of(g.edges().begin(), g.edges().end(), [](const Edge& e) { return e.is_loop(); });
}

}  // namespace detail

/// Connected and |V| = |E| + 1, edges counted with multiplicity (loops included).
inline bool is_tree(const StarGraph& g) { return g.connected() && g.vertex_count() == g.edge_count() + 1; }

/// A tree once orientation and multiplicity are forgotten, no loops, and exactly
/// two edges between adjacent vertices.
inline bool is_double_tree(const StarGraph& g) {
  if (!g.connected() || detail::has_loop(g)) return false;
  auto pairs = detail::edges_by_pair(g);
  for (auto& [p, es] : pairs)
    if (es.size() != 2) return false;
  return static_cast<int>(pairs.size()) + 1 == g.vertex_count();
}

inline bool twins_opposite(const StarGraph& g) {
  for (auto& [p, es] : detail::edges_by_pair(g))
    if (es.size() != 2 || es[0].src == es[1].src) return false;
  return true;
}

inline bool twins_adjoint(const StarGraph& g) {
  for (auto& [p, es] : detail::edges_by_pair(g))
    if (es.size() != 2 || es[0].label != es[1].label.adjoint()) return false;
  return true;
}

/// Single variable; after rewriting x* edges as reversed x edges and collapsing
/// multiplicities, a directed path 1 -> 2 -> ... -> K (K = 1 allowed).
inline bool is_directed_line(const StarGraph& g) {
  if (g.variables().size() > 1) return false;
  StarGraph r = collapse_multiplicity(reverse_stars(g));
  if (!r.connected() || detail::has_loop(r) || r.edge_count() + 1 != r.vertex_count()) return false;
  std::vector<int> in(r.vertex_count(), 0), out(r.vertex_count(), 0);
  for (auto& e : r.edges()) {
    ++out[e.src];
    ++in[e.dst];
  }
  for (int v = 0; v < r.vertex_count(); ++v)
    if (in[v] > 1 || out[v] > 1) return false;
  return true;
}

/// An Eulerian circuit following edge orientations exists.
inline bool is_cyclic(const StarGraph& g) {
  if (!g.connected()) return false;
  std::vector<int> balance(g.vertex_count(), 0);
  for (auto& e : g.edges()) {
    ++balance[e.src];
    --balance[e.dst];
  }
  return std::all_of(balance.begin(), balance.end(), [](int b) { return b == 0; });
}

inline ClassifyFlags classify(const StarGraph& g) {
  ClassifyFlags f;
  f.is_tree = is_tree(g);
  f.is_double_tree = is_double_tree(g);
  f.is_double_tree_opposite = f.is_double_tree && twins_opposite(g);
  f.is_double_tree_opposite_adjoint = f.is_double_tree_opposite && twins_adjoint(g);
  f.is_directed_line = is_directed_line(g);
  f.is_cyclic = is_cyclic(g);
  return f;
}

/// If every edge lies on exactly one simple cycle and each of these cycles is
/// consistently oriented, returns the label word read along each cycle (loops
/// are cycles of length one). Otherwise returns nothing.
inline std::optional<std::vector<Word>> oriented_cactus_cycles(const StarGraph& g) {
  if (!g.connected()) return std::nullopt;
  int n = g.vertex_count();
  const auto& edges = g.edges();
  int m = static_cast<int>(edges.size());
  std::vector<std::vector<std::pair<int, int>>> adj(n);  // (neighbour, edge id)
  std::vector<std::vector<int>> blocks;
  for (int k = 0; k < m; ++k) {
    if (edges[k].is_loop()) {
      blocks.push_back({k});
      continue;
    }
    adj[edges[k].src].push_back({edges[k].dst, k});
    adj[edges[k].dst].push_back({edges[k].src, k});
  }
  // Biconnected components of the loop-free part (Tarjan, edge stack).
  std::vector<int> disc(n, -1), low(n, 0), stack;
  int timer = 0;
  std::function<void(int, int)> dfs = [&](int v, int via) {
    disc[v] = low[v] = timer++;
    for (auto [u, k] : adj[v]) {
      if (k == via) continue;
      if (disc[u] < 0) {
        stack.push_back(k);
        dfs(u, k);
        low[v] = std::min(low[v], low[u]);
        if (low[u] >= disc[v]) {
          std::vector<int> block;
          while (true) {
            int top = stack.back();
            stack.pop_back();
            block.push_back(top);
            if (top == k) break;
          }
          blocks.push_back(block);
        }
      } else if (disc[u] < disc[v]) {
        stack.push_back(k);
        low[v] = std::min(low[v], disc[u]);
      }
    }
  };
  dfs(0, -1);
  std::vector<Word> words;
  for (auto& block : blocks) {
    std::map<int, int> out_edge, in_count;
    for (int k : block) {
      if (out_edge.count(edges[k].src)) return std::nullopt;
      out_edge[edges[k].src] = k;
      ++in_count[edges[k].dst];
    }
    if (in_count.size() != out_edge.size()) return std::nullopt;
    for (auto& [v, c] : in_count)
      if (c != 1 || !out_edge.count(v)) return std::nullopt;
    // One in and one out edge per vertex: a union of directed cycles; it must be one.
    Word w;
    int start = edges[block.front()].src, v = start;
    do {
      int k = out_edge.at(v);
      w.push_back(edges[k].label);
      v = edges[k].dst;
    } while (v != start);
    if (w.size() != block.size()) return std::nullopt;
    words.push_back(std::move(w));
  }
  return words;
}

struct ColoredComponent {
  int family = 0;
  std::vector<int> vertices;  // sorted vertices of the enclosing graph
  StarGraph graph;            // local copy, vertex i = vertices[i]
};

/// Single-family components and the bipartite incidence graph T-bar whose nodes
/// are the components followed by the vertices shared by at least two of them.
struct ComponentTree {
  std::vector<ColoredComponent> components;
  std::vector<int> shared_vertices;
  int node_count = 0;
  std::vector<std::pair<int, int>> incidence;  // (component index, node index of shared vertex)
  bool is_tree = false;
};

inline ComponentTree colored_component_tree(const StarGraph& g, const FamilyAssignment& family_of) {
  ComponentTree out;
  std::map<int, std::vector<Edge>> by_family;
  for (auto& e : g.edges()) {
    auto it = family_of.find(e.label.variable);
    if (it == family_of.end()) throw ContractError("no family assigned to variable '" + e.label.variable + "'");
    by_family[it->second].push_back(e);
  }
  for (auto& [fam, edges] : by_family) {
    detail::UnionFind uf(g.vertex_count());
    for (auto& e : edges) uf.unite(e.src, e.dst);
    std::map<int, std::vector<Edge>> groups;
    for (auto& e : edges) groups[uf.find(e.src)].push_back(e);
    for (auto& [root, es] : groups) {
      auto piece = edge_subgraph(es);
      out.components.push_back({fam, piece.vertices, piece.graph});
    }
  }
  std::map<int, int> membership;
  for (auto& c : out.components)
    for (int v : c.vertices) ++membership[v];
  for (auto& [v, count] : membership)
    if (count >= 2) out.shared_vertices.push_back(v);
  int c_count = static_cast<int>(out.components.size());
  out.node_count = c_count + static_cast<int>(out.shared_vertices.size());
  for (int c = 0; c < c_count; ++c)
    for (std::size_t s = 0; s < out.shared_vertices.size(); ++s) {
      auto& vs = out.components[c].vertices;
      if (std::binary_search(vs.begin(), vs.end(), out.shared_vertices[s]))
        out.incidence.push_back({c, c_count + static_cast<int>(s)});
    }
  if (out.node_count == 0) {
    out.is_tree = true;
  } else {
    detail::UnionFind uf(out.node_count);
    for (auto& [a, b] : out.incidence) uf.unite(a, b);
    int roots = 0;
    for (int i = 0; i < out.node_count; ++i) roots += uf.find(i) == i;
    out.is_tree = roots == 1 && out.node_count == static_cast<int>(out.incidence.size()) + 1;
  }
  return out;
}

}  // namespace traffic
