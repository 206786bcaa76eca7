#pragma once

#include <algorithm>
#include <map>
#include <numeric>
#include <string>
#include <tuple>
#include <vector>

#include "traffic/graph.hpp"

namespace traffic {

/// Isomorphism-invariant key. relabeling[v] is the canonical index of vertex v.
struct CanonicalForm {
  std::string bytes;
  std::vector<int> relabeling;

  friend bool operator==(const CanonicalForm& a, const CanonicalForm& b) { return a.bytes == b.bytes; }
  friend bool operator<(const CanonicalForm& a, const CanonicalForm& b) { return a.bytes < b.bytes; }
};

namespace detail {

inline std::string serialize(const StarGraph& g, const std::vector<int>& roots, const std::vector<int>& perm) {
  std::vector<std::tuple<int, int, std::string, bool>> es;
  es.reserve(g.edges().size());
  for (auto& e : g.edges()) es.emplace_back(perm[e.src], perm[e.dst], e.label.variable, e.label.star);
  std::sort(es.begin(), es.end());
  std::string out = "v" + std::to_string(g.vertex_count()) + ";r";
  for (std::size_t i = 0; i < roots.size(); ++i) out += (i ? "," : "") + std::to_string(perm[roots[i]]);
  out += ";e";
  for (auto& [s, d, var, star] : es) {
    out += std::to_string(s) + ">" + std::to_string(d) + ":";
    out += std::to_string(var.size()) + "#" + var + (star ? "*" : "") + ";";
  }
  return out;
}

class Canonicalizer {
 public:
  Canonicalizer(const StarGraph& g, const std::vector<int>& roots) : g_(g), roots_(roots), n_(g.vertex_count()) {
    std::vector<EdgeLabel> labels;
    for (auto& e : g.edges()) labels.push_back(e.label);
    std::sort(labels.begin(), labels.end());
    labels.erase(std::unique(labels.begin(), labels.end()), labels.end());
    for (auto& e : g.edges()) {
      int lab = static_cast<int>(std::lower_bound(labels.begin(), labels.end(), e.label) - labels.begin());
      if (e.src == e.dst) {
        incident_[e.src].push_back({0, lab, e.src});
      } else {
        incident_[e.src].push_back({1, lab, e.dst});
        incident_[e.dst].push_back({2, lab, e.src});
      }
    }
  }

  CanonicalForm run() {
    // Initial colour: positions in the root list.
    std::vector<std::vector<int>> sig(n_);
    for (std::size_t i = 0; i < roots_.size(); ++i) sig[roots_[i]].push_back(static_cast<int>(i));
    std::vector<int> colors = rank(sig);
    refine(colors);
    search(colors);
    return best_;
  }

 private:
  struct Inc {
    int kind;   // 0 loop, 1 outgoing, 2 incoming
    int label;  // rank among distinct labels
    int other;
  };

  template <class Sig>
  std::vector<int> rank(const std::vector<Sig>& sig) const {
    std::vector<Sig> sorted = sig;
    std::sort(sorted.begin(), sorted.end());
    sorted.erase(std::unique(sorted.begin(), sorted.end()), sorted.end());
    std::vector<int> out(n_);
    for (int v = 0; v < n_; ++v)
      out[v] = static_cast<int>(std::lower_bound(sorted.begin(), sorted.end(), sig[v]) - sorted.begin());
    return out;
  }

  static int class_count(const std::vector<int>& c) { return c.empty() ? 0 : *std::max_element(c.begin(), c.end()) + 1; }

  void refine(std::vector<int>& colors) const {
    int classes = class_count(colors);
    while (true) {
      std::vector<std::pair<int, std::vector<std::tuple<int, int, int>>>> sig(n_);
      for (int v = 0; v < n_; ++v) {
        sig[v].first = colors[v];
        for (auto& inc : incident_.count(v) ? incident_.at(v) : empty_)
          sig[v].second.emplace_back(inc.kind, inc.label, colors[inc.other]);
        std::sort(sig[v].second.begin(), sig[v].second.end());
      }
      auto next = rank(sig);
      int next_classes = class_count(next);
      colors = std::move(next);
      if (next_classes == classes) return;
      classes = next_classes;
    }
  }

  void search(const std::vector<int>& colors) {
    int classes = class_count(colors);
    if (classes == n_) {
      std::string bytes = serialize(g_, roots_, colors);
      if (!found_ || bytes < best_.bytes) {
        best_.bytes = std::move(bytes);
        best_.relabeling = colors;
        found_ = true;
      }
      return;
    }
    // First non-singleton cell in colour order.
    std::vector<int> size(classes, 0);
    for (int c : colors) ++size[c];
    int cell = 0;
    while (size[cell] == 1) ++cell;
    for (int v = 0; v < n_; ++v) {
      if (colors[v] != cell) continue;
      std::vector<std::pair<int, int>> sig(n_);
      for (int u = 0; u < n_; ++u) sig[u] = {colors[u], colors[u] == cell && u != v ? 1 : 0};
      std::vector<int> split = rank(sig);
      refine(split);
      search(split);
    }
  }

  const StarGraph& g_;
  std::vector<int> roots_;
  int n_;
  std::map<int, std::vector<Inc>> incident_;
  std::vector<Inc> empty_;
  CanonicalForm best_;
  bool found_ = false;
};

}  // namespace detail

/// Canonical form by colour refinement and exhaustive individualization: every
/// leaf of the search tree is serialized and the smallest serialization wins.
inline CanonicalForm canonicalize(const StarGraph& g) { return detail::Canonicalizer(g, {}).run(); }

inline CanonicalForm canonicalize(const GraphMonomial& t) {
  return detail::Canonicalizer(t.graph, {t.input, t.output}).run();
}

inline CanonicalForm canonicalize(const NGraphMonomial& t) { return detail::Canonicalizer(t.graph, t.roots).run(); }

inline StarGraph permute_vertices(const StarGraph& g, const std::vector<int>& perm) {
  return StarGraph(g.vertex_count(), detail::relabel(g.edges(), perm));
}

/// The representative graph whose vertex numbering is the canonical one.
inline StarGraph canonical_graph(const StarGraph& g) { return permute_vertices(g, canonicalize(g).relabeling); }

}  // namespace traffic
