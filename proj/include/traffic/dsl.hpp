#pragma once

#include <json.hpp>

#include <cctype>
#include <optional>
#include <string>
#include <vector>

#include "traffic/errors.hpp"
#include "traffic/graph.hpp"

namespace traffic {

/// Result of parsing the graph DSL or its JSON mirror.
struct ParsedGraph {
  StarGraph graph;
  std::optional<int> input;
  std::optional<int> output;
  std::vector<int> roots;

  bool is_monomial() const { return input.has_value() || output.has_value(); }

  /// Missing in/out default to each other, then to vertex 0.
  GraphMonomial monomial() const {
    int in = input.value_or(output.value_or(0));
    int out = output.value_or(in);
    return GraphMonomial(graph, in, out);
  }
  NGraphMonomial n_monomial() const {
    if (!roots.empty()) return NGraphMonomial(graph, roots);
    if (is_monomial()) return NGraphMonomial(graph, {monomial().input, monomial().output});
    throw ContractError("graph has no roots");
  }
};

namespace detail {

class DslParser {
 public:
  explicit DslParser(const std::string& text) : s_(text) {}

  ParsedGraph parse() {
    skip();
    expect_word("graph");
    expect('{');
    ParsedGraph out;
    std::optional<int> v;
    std::vector<Edge> edges;
    bool seen_e = false;
    while (true) {
      skip();
      if (peek() == '}') {
        ++pos_;
        break;
      }
      int line = line_, col = col_;
      std::string key = identifier();
      expect('=');
      if (key == "v") {
        if (v) fail("duplicate 'v'", line, col);
        v = integer();
      } else if (key == "e") {
        if (seen_e) fail("duplicate 'e'", line, col);
        seen_e = true;
        skip();
        if (peek() != ';' && peek() != '}') {
          do {
            edges.push_back(edge());
            skip();
          } while (accept(','));
        }
      } else if (key == "in") {
        if (out.input) fail("duplicate 'in'", line, col);
        out.input = integer();
      } else if (key == "out") {
        if (out.output) fail("duplicate 'out'", line, col);
        out.output = integer();
      } else if (key == "roots") {
        do out.roots.push_back(integer());
        while (accept(','));
      } else {
        fail("unknown field '" + key + "' (expected v, e, in, out or roots)", line, col);
      }
      skip();
      if (!accept(';')) {
        skip();
        if (peek() != '}') fail("expected ';' or '}'");
      }
    }
    skip();
    if (pos_ != s_.size()) fail("trailing characters after graph");
    if (!v) fail("missing vertex count 'v'");
    if (*v < 1) fail("vertex count must be at least 1");
    for (auto& e : edges)
      if (e.src >= *v || e.dst >= *v) fail("edge endpoint out of range for v = " + std::to_string(*v));
    for (int r : out.roots)
      if (r >= *v) fail("root out of range");
    if ((out.input && *out.input >= *v) || (out.output && *out.output >= *v)) fail("in/out out of range");
    out.graph = StarGraph(*v, std::move(edges));
    if (!out.graph.connected()) fail("graph is not connected");
    return out;
  }

 private:
  [[noreturn]] void fail(const std::string& msg, int line = 0, int col = 0) const {
    throw ParseError(msg, line ? line : line_, line ? col : col_);
  }

  char peek() const { return pos_ < s_.size() ? s_[pos_] : '\0'; }
  void advance() {
    if (s_[pos_] == '\n') {
      ++line_;
      col_ = 1;
    } else {
      ++col_;
    }
    ++pos_;
  }
  void skip() {
    while (pos_ < s_.size() && std::isspace(static_cast<unsigned char>(s_[pos_]))) advance();
  }
  bool accept(char c) {
    skip();
    if (peek() != c) return false;
    advance();
    return true;
  }
  void expect(char c) {
    if (!accept(c)) fail(std::string("expected '") + c + "'");
  }
  void expect_word(const std::string& w) {
    skip();
    if (s_.compare(pos_, w.size(), w) != 0) fail("expected '" + w + "'");
    for (std::size_t i = 0; i < w.size(); ++i) advance();
  }
  std::string identifier() {
    skip();
    std::string out;
    if (!(std::isalpha(static_cast<unsigned char>(peek())) || peek() == '_')) fail("expected identifier");
    while (std::isalnum(static_cast<unsigned char>(peek())) || peek() == '_') {
      out += peek();
      advance();
    }
    return out;
  }
  int integer() {
    skip();
    if (!std::isdigit(static_cast<unsigned char>(peek()))) fail("expected non-negative integer");
    long value = 0;
    while (std::isdigit(static_cast<unsigned char>(peek()))) {
      value = value * 10 + (peek() - '0');
      if (value > 1000000) fail("integer too large");
      advance();
    }
    return static_cast<int>(value);
  }
  Edge edge() {
    Edge e;
    e.src = integer();
    skip();
    expect_word("->");
    e.dst = integer();
    expect(':');
    e.label.variable = identifier();
    e.label.star = accept('*');
    return e;
  }

  const std::string& s_;
  std::size_t pos_ = 0;
  int line_ = 1;
  int col_ = 1;
};

}  // namespace detail

inline ParsedGraph parse_graph_dsl(const std::string& text) { return detail::DslParser(text).parse(); }

inline std::string to_dsl(const StarGraph& g, std::optional<int> input = std::nullopt,
                          std::optional<int> output = std::nullopt, const std::vector<int>& roots = {}) {
  std::string s = "graph { v = " + std::to_string(g.vertex_count()) + "; e = ";
  for (std::size_t i = 0; i < g.edges().size(); ++i) {
    auto& e = g.edges()[i];
    s += (i ? ", " : "") + std::to_string(e.src) + "->" + std::to_string(e.dst) + ":" + e.label.str();
  }
  if (input) s += "; in = " + std::to_string(*input);
  if (output) s += "; out = " + std::to_string(*output);
  if (!roots.empty()) {
    s += "; roots = ";
    for (std::size_t i = 0; i < roots.size(); ++i) s += (i ? "," : "") + std::to_string(roots[i]);
  }
  return s + " }";
}

inline std::string to_dsl(const GraphMonomial& t) { return to_dsl(t.graph, t.input, t.output); }

inline nlohmann::json graph_to_json(const ParsedGraph& p) {
  nlohmann::json j;
  j["vertex_count"] = p.graph.vertex_count();
  j["edges"] = nlohmann::json::array();
  for (auto& e : p.graph.edges())
    j["edges"].push_back({{"src", e.src}, {"dst", e.dst}, {"var", e.label.variable}, {"star", e.label.star}});
  if (p.input) j["input"] = *p.input;
  if (p.output) j["output"] = *p.output;
  if (!p.roots.empty()) j["roots"] = p.roots;
  return j;
}

inline ParsedGraph graph_from_json(const nlohmann::json& j) {
  try {
    ParsedGraph p;
    int n = j.at("vertex_count").get<int>();
    std::vector<Edge> edges;
    for (auto& e : j.value("edges", nlohmann::json::array()))
      edges.push_back({e.at("src").get<int>(), e.at("dst").get<int>(),
                       {e.at("var").get<std::string>(), e.value("star", false)}});
    if (j.contains("input")) p.input = j["input"].get<int>();
    if (j.contains("output")) p.output = j["output"].get<int>();
    if (j.contains("roots")) p.roots = j["roots"].get<std::vector<int>>();
    p.graph = StarGraph(n, std::move(edges));
    if (!p.graph.connected()) throw ParseError("graph is not connected");
    if (p.is_monomial()) (void)p.monomial();
    if (!p.roots.empty()) (void)p.n_monomial();
    return p;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad graph JSON: ") + e.what());
  } catch (const ContractError& e) {
    throw ParseError(std::string("bad graph JSON: ") + e.what());
  }
}

/// Accepts either the DSL or a JSON object.
inline ParsedGraph parse_graph(const std::string& text) {
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '{') {
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad graph JSON: ") + e.what());
    }
    return graph_from_json(j);
  }
  return parse_graph_dsl(text);
}

}  // namespace traffic
