#pragma once

#include <algorithm>
#include <compare>
#include <map>
#include <numeric>
#include <set>
#include <string>
#include <tuple>
#include <vector>

#include "traffic/errors.hpp"
#include "traffic/partition.hpp"

namespace traffic {

/// Edge label x_j or x_j^*.
struct EdgeLabel {
  std::string variable;
  bool star = false;

  EdgeLabel adjoint() const { return {variable, !star}; }
  std::string str() const { return star ? variable + "*" : variable; }
  auto operator<=>(const EdgeLabel&) const = default;
};

struct Edge {
  int src = 0;
  int dst = 0;
  EdgeLabel label;

  bool is_loop() const { return src == dst; }
  auto operator<=>(const Edge&) const = default;
};

using Word = std::vector<EdgeLabel>;

/// Finite directed multigraph with labelled edges. Edges are kept sorted, so
/// two graphs with the same vertex numbering compare equal iff they are equal
/// as multisets. A test graph is a connected StarGraph.
class StarGraph {
 public:
  StarGraph() = default;  // one vertex, no edges

  StarGraph(int vertex_count, std::vector<Edge> edges) : n_(vertex_count), edges_(std::move(edges)) {
    if (n_ < 1) throw ContractError("a graph needs at least one vertex");
    for (auto& e : edges_) {
      if (e.src < 0 || e.src >= n_ || e.dst < 0 || e.dst >= n_)
        throw ContractError("edge endpoint out of range");
      if (e.label.variable.empty()) throw ContractError("edge label needs a variable name");
    }
    std::sort(edges_.begin(), edges_.end());
  }

  int vertex_count() const { return n_; }
  const std::vector<Edge>& edges() const { return edges_; }
  int edge_count() const { return static_cast<int>(edges_.size()); }

  std::set<std::string> variables() const {
    std::set<std::string> out;
    for (auto& e : edges_) out.insert(e.label.variable);
    return out;
  }

  /// Component index of every vertex, ignoring orientation.
  std::vector<int> component_labels() const {
    std::vector<int> parent(n_);
    std::iota(parent.begin(), parent.end(), 0);
    auto find = [&](int x) {
      while (parent[x] != x) x = parent[x] = parent[parent[x]];
      return x;
    };
    for (auto& e : edges_) parent[find(e.src)] = find(e.dst);
    std::vector<int> roots(n_);
    for (int v = 0; v < n_; ++v) roots[v] = find(v);
    return SetPartition(roots).labels();
  }

  int component_count() const {
    auto l = component_labels();
    return l.empty() ? 0 : *std::max_element(l.begin(), l.end()) + 1;
  }
  bool connected() const { return component_count() == 1; }

  friend bool operator==(const StarGraph&, const StarGraph&) = default;

 private:
  int n_ = 1;
  std::vector<Edge> edges_;
};

/// *-graph monomial: a graph with an input and an output vertex.
struct GraphMonomial {
  StarGraph graph;
  int input = 0;
  int output = 0;

  GraphMonomial() = default;
  GraphMonomial(StarGraph g, int in, int out) : graph(std::move(g)), input(in), output(out) {
    if (in < 0 || out < 0 || in >= graph.vertex_count() || out >= graph.vertex_count())
      throw ContractError("monomial input/output out of range");
  }
  friend bool operator==(const GraphMonomial&, const GraphMonomial&) = default;
};

/// n-graph monomial: a graph with an ordered list of roots (repeats allowed).
struct NGraphMonomial {
  StarGraph graph;
  std::vector<int> roots;

  NGraphMonomial() = default;
  NGraphMonomial(StarGraph g, std::vector<int> r) : graph(std::move(g)), roots(std::move(r)) {
    if (roots.empty()) throw ContractError("n-graph monomial needs at least one root");
    for (int v : roots)
      if (v < 0 || v >= graph.vertex_count()) throw ContractError("root out of range");
  }
  int rank() const { return static_cast<int>(roots.size()); }
  friend bool operator==(const NGraphMonomial&, const NGraphMonomial&) = default;
};

namespace detail {

struct UnionFind {
  std::vector<int> parent;
  explicit UnionFind(int n) : parent(n) { std::iota(parent.begin(), parent.end(), 0); }
  int find(int x) {
    while (parent[x] != x) x = parent[x] = parent[parent[x]];
    return x;
  }
  void unite(int a, int b) {
    a = find(a);
    b = find(b);
    if (a != b) parent[std::max(a, b)] = std::min(a, b);
  }
  // Dense new index per class, ordered by smallest member.
  std::vector<int> compact(int* count) {
    std::vector<int> rep(parent.size());
    for (std::size_t i = 0; i < parent.size(); ++i) rep[i] = find(static_cast<int>(i));
    auto labels = SetPartition(rep).labels();
    *count = labels.empty() ? 0 : *std::max_element(labels.begin(), labels.end()) + 1;
    return labels;
  }
};

inline std::vector<Edge> relabel(const std::vector<Edge>& edges, const std::vector<int>& map, int offset = 0) {
  std::vector<Edge> out;
  out.reserve(edges.size());
  for (auto& e : edges) out.push_back({map[e.src + offset], map[e.dst + offset], e.label});
  return out;
}

}  // namespace detail

inline GraphMonomial unit_monomial() { return GraphMonomial(StarGraph(), 0, 0); }

inline GraphMonomial edge_monomial(const std::string& variable, bool star = false) {
  return GraphMonomial(StarGraph(2, {{0, 1, {variable, star}}}), 0, 1);
}

/// Glue out1 to in2.
inline GraphMonomial multiply(const GraphMonomial& a, const GraphMonomial& b) {
  int na = a.graph.vertex_count();
  int nb = b.graph.vertex_count();
  std::vector<int> map_b(nb);
  int next = na;
  for (int v = 0; v < nb; ++v) map_b[v] = v == b.input ? a.output : next++;
  std::vector<Edge> edges = a.graph.edges();
  for (auto& e : b.graph.edges()) edges.push_back({map_b[e.src], map_b[e.dst], e.label});
  return GraphMonomial(StarGraph(na + nb - 1, std::move(edges)), a.input, map_b[b.output]);
}

inline GraphMonomial adjoint(const GraphMonomial& t) {
  std::vector<Edge> edges;
  for (auto& e : t.graph.edges()) edges.push_back({e.dst, e.src, e.label.adjoint()});
  return GraphMonomial(StarGraph(t.graph.vertex_count(), std::move(edges)), t.output, t.input);
}

inline GraphMonomial from_word(const Word& w) {
  std::vector<Edge> edges;
  for (std::size_t i = 0; i < w.size(); ++i)
    edges.push_back({static_cast<int>(i), static_cast<int>(i + 1), w[i]});
  return GraphMonomial(StarGraph(static_cast<int>(w.size()) + 1, std::move(edges)), 0, static_cast<int>(w.size()));
}

/// Replace every edge labelled x_j (resp. x_j^*) by a fresh copy of t_j (resp. t_j^*)
/// with in glued to the source and out glued to the target.
inline GraphMonomial substitute(const GraphMonomial& t, const std::map<std::string, GraphMonomial>& assignment) {
  int n = t.graph.vertex_count();
  std::vector<GraphMonomial> pieces;
  int total = n;
  for (auto& e : t.graph.edges()) {
    auto it = assignment.find(e.label.variable);
    if (it == assignment.end())
      throw ContractError("substitute: no assignment for variable '" + e.label.variable + "'");
    pieces.push_back(e.label.star ? adjoint(it->second) : it->second);
    total += pieces.back().graph.vertex_count();
  }
  detail::UnionFind uf(total);
  std::vector<std::pair<int, std::vector<Edge>>> shifted;
  int offset = n;
  for (std::size_t k = 0; k < pieces.size(); ++k) {
    const Edge& e = t.graph.edges()[k];
    uf.unite(offset + pieces[k].input, e.src);
    uf.unite(offset + pieces[k].output, e.dst);
    shifted.push_back({offset, pieces[k].graph.edges()});
    offset += pieces[k].graph.vertex_count();
  }
  int count = 0;
  auto map = uf.compact(&count);
  std::vector<Edge> edges;
  for (auto& [off, es] : shifted) {
    auto r = detail::relabel(es, map, off);
    edges.insert(edges.end(), r.begin(), r.end());
  }
  return GraphMonomial(StarGraph(count, std::move(edges)), map[t.input], map[t.output]);
}

/// Entrywise product: all inputs glued together, all outputs glued together.
inline GraphMonomial hadamard(const std::vector<GraphMonomial>& ts) {
  if (ts.empty()) throw ContractError("hadamard needs at least one monomial");
  std::vector<Edge> parallel;
  std::map<std::string, GraphMonomial> assignment;
  for (std::size_t k = 0; k < ts.size(); ++k) {
    std::string name = "#" + std::to_string(k);
    parallel.push_back({0, 1, {name, false}});
    assignment[name] = ts[k];
  }
  return substitute(GraphMonomial(StarGraph(2, parallel), 0, 1), assignment);
}

/// Glue input to output, keeping the merged vertex as both.
inline GraphMonomial delta(const GraphMonomial& t) {
  detail::UnionFind uf(t.graph.vertex_count());
  uf.unite(t.input, t.output);
  int count = 0;
  auto map = uf.compact(&count);
  return GraphMonomial(StarGraph(count, detail::relabel(t.graph.edges(), map)), map[t.input], map[t.input]);
}

inline GraphMonomial transpose(const GraphMonomial& t) { return GraphMonomial(t.graph, t.output, t.input); }

inline GraphMonomial degree_op(const GraphMonomial& t) { return GraphMonomial(t.graph, t.input, t.input); }

inline StarGraph close(const GraphMonomial& t) { return delta(t).graph; }

inline StarGraph quotient(const StarGraph& g, const SetPartition& pi) {
  if (pi.ground_size() != g.vertex_count())
    throw ContractError("quotient: partition ground set does not match vertex set");
  if (pi.block_count() == 0) return g;
  return StarGraph(pi.block_count(), detail::relabel(g.edges(), pi.labels()));
}

/// Induced pieces: one graph per connected component, with the vertex map.
struct ComponentPiece {
  StarGraph graph;
  std::vector<int> vertices;  // local index -> vertex of the original graph
};

inline std::vector<ComponentPiece> split_components(const StarGraph& g) {
  auto labels = g.component_labels();
  int count = g.component_count();
  std::vector<ComponentPiece> out(count);
  std::vector<int> local(g.vertex_count());
  for (int v = 0; v < g.vertex_count(); ++v) {
    local[v] = static_cast<int>(out[labels[v]].vertices.size());
    out[labels[v]].vertices.push_back(v);
  }
  std::vector<std::vector<Edge>> edges(count);
  for (auto& e : g.edges()) edges[labels[e.src]].push_back({local[e.src], local[e.dst], e.label});
  for (int c = 0; c < count; ++c)
    out[c].graph = StarGraph(static_cast<int>(out[c].vertices.size()), std::move(edges[c]));
  return out;
}

/// Subgraph spanned by a subset of edges (vertices = their endpoints), relabelled
/// in increasing order of the original vertex index.
inline ComponentPiece edge_subgraph(const std::vector<Edge>& edges) {
  if (edges.empty()) throw ContractError("edge_subgraph needs at least one edge");
  std::set<int> vs;
  for (auto& e : edges) {
    vs.insert(e.src);
    vs.insert(e.dst);
  }
  ComponentPiece piece;
  piece.vertices.assign(vs.begin(), vs.end());
  std::map<int, int> local;
  for (std::size_t i = 0; i < piece.vertices.size(); ++i) local[piece.vertices[i]] = static_cast<int>(i);
  std::vector<Edge> es;
  for (auto& e : edges) es.push_back({local[e.src], local[e.dst], e.label});
  piece.graph = StarGraph(static_cast<int>(piece.vertices.size()), std::move(es));
  return piece;
}

/// Rewrites starred edges as plain edges with the same orientation (A* = A entrywise
/// for a self-adjoint variable).
inline StarGraph drop_stars(const StarGraph& g) {
  std::vector<Edge> edges;
  for (auto& e : g.edges()) edges.push_back({e.src, e.dst, {e.label.variable, false}});
  return StarGraph(g.vertex_count(), std::move(edges));
}

/// Rewrites starred edges as reversed plain edges (A*(i,j) = A(j,i) for a real variable).
inline StarGraph reverse_stars(const StarGraph& g) {
  std::vector<Edge> edges;
  for (auto& e : g.edges()) {
    if (e.label.star) edges.push_back({e.dst, e.src, {e.label.variable, false}});
    else edges.push_back(e);
  }
  return StarGraph(g.vertex_count(), std::move(edges));
}

/// Keeps one copy of each distinct edge.
inline StarGraph collapse_multiplicity(const StarGraph& g) {
  std::vector<Edge> edges = g.edges();
  edges.erase(std::unique(edges.begin(), edges.end()), edges.end());
  return StarGraph(g.vertex_count(), std::move(edges));
}

/// Reverses every edge carrying the given variable, stars untouched.
inline StarGraph reverse_variable(const StarGraph& g, const std::string& variable) {
  std::vector<Edge> edges;
  for (auto& e : g.edges()) {
    if (e.label.variable == variable) edges.push_back({e.dst, e.src, e.label});
    else edges.push_back(e);
  }
  return StarGraph(g.vertex_count(), std::move(edges));
}

inline StarGraph rename_variable(const StarGraph& g, const std::string& from, const std::string& to) {
  std::vector<Edge> edges;
  for (auto& e : g.edges()) {
    Edge c = e;
    if (c.label.variable == from) c.label.variable = to;
    edges.push_back(c);
  }
  return StarGraph(g.vertex_count(), std::move(edges));
}

/// Parses "xx*y" (one character per variable) or "x1 x2* y" / "x1.x2*.y"
/// (separated tokens). A trailing '*' marks the adjoint.
inline Word parse_word(const std::string& text) {
  Word w;
  bool separated = text.find_first_of(" .,") != std::string::npos;
  if (separated) {
    std::string tok;
    auto flush = [&] {
      if (tok.empty()) return;
      bool star = tok.back() == '*';
      if (star) tok.pop_back();
      if (tok.empty() || tok.find('*') != std::string::npos) throw ParseError("bad letter in word '" + text + "'");
      w.push_back({tok, star});
      tok.clear();
    };
    for (char c : text) {
      if (c == ' ' || c == '.' || c == ',') flush();
      else tok += c;
    }
    flush();
    return w;
  }
  for (std::size_t i = 0; i < text.size(); ++i) {
    if (text[i] == '*') throw ParseError("'*' must follow a variable in word '" + text + "'", 1, static_cast<int>(i) + 1);
    bool star = i + 1 < text.size() && text[i + 1] == '*';
    w.push_back({std::string(1, text[i]), star});
    if (star) ++i;
  }
  return w;
}

inline std::string word_to_string(const Word& w) {
  bool single = std::all_of(w.begin(), w.end(), [](auto& l) { return l.variable.size() == 1; });
  std::string s;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (!single && i) s += ' ';
    s += w[i].str();
  }
  return s;
}

}  // namespace traffic
