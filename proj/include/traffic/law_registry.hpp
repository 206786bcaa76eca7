#pragma once

#include <cctype>
#include <string>
#include <vector>

#include "traffic/algebra.hpp"
#include "traffic/entry_law.hpp"
#include "traffic/errors.hpp"
#include "traffic/laws.hpp"

namespace traffic {

namespace detail {

inline std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\n\r");
  if (b == std::string::npos) return "";
  auto e = s.find_last_not_of(" \t\n\r");
  return s.substr(b, e - b + 1);
}

// Splits "head(a, b; c)" into head and the top-level arguments.
inline bool split_call(const std::string& text, std::string& head, std::vector<std::string>& args) {
  auto open = text.find('(');
  if (open == std::string::npos) {
    head = trim(text);
    return false;
  }
  if (text.back() != ')') throw ParseError("unbalanced parentheses in law '" + text + "'");
  head = trim(text.substr(0, open));
  std::string inner = text.substr(open + 1, text.size() - open - 2);
  int depth = 0;
  std::string cur;
  for (char c : inner) {
    if (c == '(') ++depth;
    if (c == ')' && --depth < 0) throw ParseError("unbalanced parentheses in law '" + text + "'");
    if (depth == 0 && (c == ',' || c == ';')) {
      args.push_back(trim(cur));
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (depth != 0) throw ParseError("unbalanced parentheses in law '" + text + "'");
  args.push_back(trim(cur));
  for (auto& a : args)
    if (a.empty()) throw ParseError("empty argument in law '" + text + "'");
  return true;
}

// "x=law" binding at the start of a free-product argument.
inline bool split_binding(const std::string& arg, std::string& var, std::string& law) {
  std::size_t i = 0;
  while (i < arg.size() && (std::isalnum(static_cast<unsigned char>(arg[i])) || arg[i] == '_')) ++i;
  if (i == 0 || i >= arg.size() || arg[i] != '=') return false;
  var = arg.substr(0, i);
  law = trim(arg.substr(i + 1));
  return true;
}

inline void expect_args(const std::string& head, const std::vector<std::string>& args, std::size_t n) {
  if (args.size() != n)
    throw ParseError("law '" + head + "' takes " + std::to_string(n) + " argument" + (n == 1 ? "" : "s"));
}

}  // namespace detail

/// Graphon density by name: any entry law name, optionally prefixed "hermitian:".
inline GraphonDensity make_density(const std::string& text) {
  std::string t = detail::trim(text);
  const std::string herm = "hermitian:";
  if (t.rfind(herm, 0) == 0) return graphon_density_iid(EntryLaw::parse(t.substr(herm.size())), EntrySymmetry::hermitian);
  return graphon_density_iid(EntryLaw::parse(t));
}

/// Builds a law from its textual name. `variables` lists the variables of the
/// query in sorted order; unbound free-product factors and with_transpose use it
/// to decide which variable is which.
inline TrafficDistribution make_law(const std::string& text, const std::vector<std::string>& variables = {}) {
  std::string head;
  std::vector<std::string> args;
  bool call = detail::split_call(detail::trim(text), head, args);
  if (!call) {
    if (head == "semicircular_real" || head == "semicircular") return tau0_semicircular(false);
    if (head == "semicircular_complex") return tau0_semicircular(true);
    if (head == "haar") return tau0_haar();
    if (head == "circular") return tau0_circular();
    if (head == "permutation") return tau0_permutation();
    if (head == "jlimit") return tau0_jlimit();
    const std::string clt = "clt:p=";
    if (head.rfind(clt, 0) == 0) return clt_law(parse_rational(head.substr(clt.size())));
    const std::string diag = "diagonal:";
    if (head.rfind(diag, 0) == 0) return diagonal_law(EntryLaw::parse(head.substr(diag.size())));
    throw ParseError("unknown law '" + text + "'");
  }
  if (head == "hadamard") {
    detail::expect_args(head, args, 2);
    return compose_hadamard(make_law(args[0], variables), make_density(args[1]));
  }
  if (head == "sqrtN") {
    detail::expect_args(head, args, 1);
    return sqrtN_law(make_density(args[0]));
  }
  if (head == "transpose") {
    detail::expect_args(head, args, 1);
    return transpose_law(make_law(args[0], variables));
  }
  if (head == "with_transpose") {
    detail::expect_args(head, args, 1);
    std::string x = variables.size() > 0 ? variables[0] : "x";
    std::string y = variables.size() > 1 ? variables[1] : "y";
    return joint_with_transpose(make_law(args[0], {x}), x, y);
  }
  if (head == "freeprod") {
    std::map<int, TrafficDistribution> laws;
    FamilyAssignment fam;
    std::size_t positional = 0;
    for (std::size_t i = 0; i < args.size(); ++i) {
      std::string var, law;
      if (!detail::split_binding(args[i], var, law)) {
        if (positional >= variables.size()) {
          law = args[i];
          var.clear();
        } else {
          var = variables[positional];
          law = args[i];
        }
        ++positional;
      }
      laws[static_cast<int>(i)] = make_law(law, var.empty() ? std::vector<std::string>{} : std::vector{var});
      if (!var.empty()) fam[var] = static_cast<int>(i);
    }
    for (auto& v : variables)
      if (!fam.count(v)) throw ContractError("free product: variable '" + v + "' is not bound to any law");
    return free_product(laws, fam);
  }
  throw ParseError("unknown law '" + text + "'");
}

}  // namespace traffic
