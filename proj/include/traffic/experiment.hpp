#pragma once

#include <cmath>
#include <cstdint>
#include <fstream>
#include <limits>
#include <map>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <json.hpp>

#include "traffic/algebra.hpp"
#include "traffic/dsl.hpp"
#include "traffic/errors.hpp"
#include "traffic/law_registry.hpp"
#include "traffic/laws.hpp"
#include "traffic/monte_carlo.hpp"
#include "traffic/sampler.hpp"

namespace traffic {

inline constexpr int kReportSchemaVersion = 1;

struct GraphEntry {
  std::string id;
  StarGraph graph;
};

enum class Statistic { trace, injective };

/// A Monte Carlo comparison run. Ensembles are stored as their JSON description
/// and instantiated once per N.
struct ExperimentConfig {
  std::vector<GraphEntry> graphs;
  std::map<std::string, nlohmann::json> ensembles;
  Grouping groups;  // empty: one group per variable
  std::optional<std::string> law;
  std::vector<int> Ns;
  int samples = 0;
  std::uint64_t seed = 0;
  Statistic statistic = Statistic::injective;
  double threshold = 4.0;
  int jobs = 1;
  std::string format = "csv";
  std::string out;
};

struct ReportRow {
  std::string graph_id;
  int N = 0;
  int samples = 0;
  Complex mean{};
  double se = 0;
  std::optional<Value> prediction;
  std::optional<double> z;  // |mean - prediction| / stderr; infinite when stderr is 0 and they differ
  bool flagged = false;
};

struct Report {
  std::vector<ReportRow> rows;
  bool any_flagged() const {
    for (auto& r : rows)
      if (r.flagged) return true;
    return false;
  }
};

/// Compact ensemble syntax used on the command line:
///   wigner_real[:law]  wigner_complex[:law]  haar  permutation  all_ones  all_ones_raw
///   iid:law  iid_sqrtN:law  iid_sqrtN_zero_diag:law  bernoulli_mask:q  diagonal:law  transpose_of:var
/// A value starting with '{' is read as the JSON form.
inline nlohmann::json ensemble_json_from_string(const std::string& text) {
  if (!text.empty() && text.front() == '{') {
    try {
      return nlohmann::json::parse(text);
    } catch (const nlohmann::json::exception& e) {
      throw ParseError(std::string("bad ensemble JSON: ") + e.what());
    }
  }
  auto colon = text.find(':');
  std::string kind = text.substr(0, colon);
  std::string arg = colon == std::string::npos ? "" : text.substr(colon + 1);
  nlohmann::json j;
  if (kind == "wigner_real" || kind == "wigner_complex") {
    j["kind"] = kind;
    if (!arg.empty()) j["entry"] = arg;
  } else if (kind == "haar" || kind == "permutation") {
    j["kind"] = kind;
  } else if (kind == "all_ones" || kind == "all_ones_raw") {
    j["kind"] = "all_ones";
    j["normalized"] = kind == "all_ones";
  } else if (kind == "iid" || kind == "iid_sqrtN" || kind == "iid_sqrtN_zero_diag") {
    if (arg.empty()) throw ParseError("ensemble '" + kind + "' needs an entry law");
    j["kind"] = "iid";
    j["entry"] = arg;
    if (kind != "iid") j["normalize"] = "sqrtN";
    if (kind == "iid_sqrtN_zero_diag") j["zero_diagonal"] = true;
  } else if (kind == "bernoulli_mask") {
    if (arg.empty()) throw ParseError("bernoulli_mask needs q");
    j["kind"] = kind;
    j["q"] = arg;
  } else if (kind == "diagonal") {
    if (arg.empty()) throw ParseError("diagonal ensemble needs an entry law");
    j["kind"] = kind;
    j["entry"] = arg;
  } else if (kind == "transpose_of") {
    if (arg.empty()) throw ParseError("transpose_of needs a variable");
    j["kind"] = kind;
    j["source"] = arg;
  } else {
    throw ParseError("unknown ensemble '" + text + "'");
  }
  return j;
}

/// Instantiates the JSON ensemble description at dimension N.
inline EnsembleSpec ensemble_from_json(const nlohmann::json& j, int N) {
  try {
    std::string kind = j.at("kind").get<std::string>();
    auto entry = [&](const char* key, const char* fallback) { return EntryLaw::parse(j.value(key, std::string(fallback))); };
    double scale = j.value("scale", 1.0);
    std::string normalize = j.value("normalize", std::string("none"));
    if (normalize == "sqrtN") scale /= std::sqrt(static_cast<double>(N));
    else if (normalize == "N") scale /= N;
    else if (normalize != "none") throw ParseError("unknown normalization '" + normalize + "'");
    if (kind == "wigner_real" || kind == "wigner_complex") {
      std::optional<EntryLaw> diag;
      if (j.contains("diagonal")) diag = EntryLaw::parse(j["diagonal"].get<std::string>());
      return kind == "wigner_real" ? ensemble::wigner_real(N, entry("entry", "rademacher"), diag)
                                   : ensemble::wigner_complex(N, entry("entry", "rademacher"), diag);
    }
    if (kind == "haar") return ensemble::haar_unitary(N);
    if (kind == "permutation") return ensemble::uniform_permutation(N);
    if (kind == "all_ones") return ensemble::all_ones(N, j.value("normalized", true));
    if (kind == "iid") return ensemble::iid_entries(N, entry("entry", "gaussian"), scale, j.value("zero_diagonal", false));
    if (kind == "bernoulli_mask") {
      const auto& q = j.at("q");
      return ensemble::bernoulli_mask(N, q.is_string() ? parse_rational(q.get<std::string>())
                                                       : parse_rational(format_double(q.get<double>())));
    }
    if (kind == "diagonal") return ensemble::diagonal_iid(N, entry("entry", "gaussian"), scale);
    if (kind == "transpose_of") return ensemble::transpose_of(j.at("source").get<std::string>(), N);
    if (kind == "hadamard") {
      const auto& parts = j.at("parts");
      if (parts.size() != 2) throw ParseError("hadamard ensemble takes two parts");
      return hadamard_compose(ensemble_from_json(parts[0], N), ensemble_from_json(parts[1], N));
    }
    if (kind == "sum") {
      const auto& parts = j.at("parts");
      std::vector<double> w = j.value("weights", std::vector<double>(parts.size(), 1.0));
      if (w.size() != parts.size()) throw ParseError("sum ensemble: weights and parts differ in length");
      std::vector<std::pair<double, EnsembleSpec>> terms;
      for (std::size_t k = 0; k < parts.size(); ++k) terms.push_back({w[k], ensemble_from_json(parts[k], N)});
      return ensemble::linear_combination(terms);
    }
    throw ParseError("unknown ensemble kind '" + kind + "'");
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("bad ensemble description: ") + e.what());
  }
}

namespace detail {

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline bool exact_deterministic(const nlohmann::json& j) {
  return j.value("kind", std::string()) == "all_ones";
}

}  // namespace detail

/// Graph list file: a JSON array (of DSL strings or graph objects, optionally
/// wrapped as {"id", "graph"}), or one DSL graph per line with optional "id:" prefix.
/// A graph in the DSL or JSON, or a *-word, which is closed into a cycle.
inline StarGraph parse_test_graph(const std::string& text) {
  auto b = text.find_first_not_of(" \t\r\n");
  if (b != std::string::npos && (text[b] == '{' || text.compare(b, 5, "graph") == 0)) return parse_graph(text).graph;
  Word w = parse_word(detail::trim(text));
  if (w.empty()) throw ParseError("empty test graph");
  return close(from_word(w));
}

inline std::vector<GraphEntry> parse_graph_list(const nlohmann::json& arr) {
  std::vector<GraphEntry> out;
  if (arr.is_object()) {
    for (auto& [id, g] : arr.items())
      out.push_back({id, g.is_string() ? parse_test_graph(g.get<std::string>()) : graph_from_json(g).graph});
    return out;
  }
  if (!arr.is_array()) throw ParseError("graphs must be an array or an object");
  for (std::size_t i = 0; i < arr.size(); ++i) {
    const auto& item = arr[i];
    std::string id = "g" + std::to_string(i);
    nlohmann::json g = item;
    if (item.is_object() && item.contains("graph")) {
      id = item.value("id", id);
      g = item["graph"];
    }
    out.push_back({id, g.is_string() ? parse_test_graph(g.get<std::string>()) : graph_from_json(g).graph});
  }
  return out;
}

inline std::vector<GraphEntry> read_graphs_file(const std::string& path) {
  std::string text = detail::read_text_file(path);
  auto first = text.find_first_not_of(" \t\r\n");
  if (first != std::string::npos && text[first] == '[') {
    try {
      return parse_graph_list(nlohmann::json::parse(text));
    } catch (const nlohmann::json::exception& e) {
      throw ParseError("bad graphs file '" + path + "': " + e.what());
    }
  }
  std::vector<GraphEntry> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    auto b = line.find_first_not_of(" \t\r");
    if (b == std::string::npos || line[b] == '#') continue;
    line = line.substr(b);
    std::string id = "g" + std::to_string(out.size());
    auto brace = line.find('{');
    auto colon = line.find(':');
    if (colon != std::string::npos && (brace == std::string::npos || colon < brace) && line.rfind("graph", 0) != 0) {
      id = detail::trim(line.substr(0, colon));
      line = line.substr(colon + 1);
    }
    out.push_back({id, parse_test_graph(line)});
  }
  return out;
}

inline ExperimentConfig config_from_json(const nlohmann::json& j) {
  try {
    if (!j.is_object()) throw ParseError("config must be a JSON object");
    static const std::set<std::string> known{"graphs", "graphs_file", "ensembles", "groups", "law", "N", "samples",
                                             "seed", "statistic", "threshold", "jobs", "format", "out"};
    for (auto& [key, v] : j.items())
      if (!known.count(key)) throw ParseError("unknown config key '" + key + "'");
    ExperimentConfig c;
    if (!j.contains("seed")) throw ParseError("config needs a seed");
    c.seed = j["seed"].get<std::uint64_t>();
    if (j.contains("graphs")) c.graphs = parse_graph_list(j["graphs"]);
    if (j.contains("graphs_file")) {
      auto more = read_graphs_file(j["graphs_file"].get<std::string>());
      c.graphs.insert(c.graphs.end(), more.begin(), more.end());
    }
    if (c.graphs.empty()) throw ParseError("config lists no graphs");
    if (!j.contains("ensembles") || !j["ensembles"].is_object()) throw ParseError("config needs an ensembles object");
    for (auto& [var, e] : j["ensembles"].items())
      c.ensembles[var] = e.is_string() ? ensemble_json_from_string(e.get<std::string>()) : e;
    if (j.contains("groups")) c.groups = j["groups"].get<Grouping>();
    if (j.contains("law")) c.law = j["law"].get<std::string>();
    const auto& n = j.at("N");
    c.Ns = n.is_array() ? n.get<std::vector<int>>() : std::vector<int>{n.get<int>()};
    if (c.Ns.empty()) throw ParseError("config needs at least one N");
    for (int N : c.Ns)
      if (N < 1) throw ParseError("N must be positive");
    c.samples = j.at("samples").get<int>();
    if (c.samples < 1) throw ParseError("samples must be positive");
    std::string stat = j.value("statistic", std::string("injective"));
    if (stat == "injective") c.statistic = Statistic::injective;
    else if (stat == "trace") c.statistic = Statistic::trace;
    else throw ParseError("statistic must be 'injective' or 'trace'");
    c.threshold = j.value("threshold", 4.0);
    c.jobs = j.value("jobs", 1);
    c.format = j.value("format", std::string("csv"));
    if (c.format != "csv" && c.format != "json") throw ParseError("format must be 'csv' or 'json'");
    c.out = j.value("out", std::string());
    return c;
  } catch (const nlohmann::json::exception& e) {
    throw ParseError(std::string("config schema error: ") + e.what());
  }
}

inline ExperimentConfig read_config_file(const std::string& path) {
  std::string text = detail::read_text_file(path);
  try {
    return config_from_json(nlohmann::json::parse(text));
  } catch (const nlohmann::json::parse_error& e) {
    throw ParseError("config '" + path + "' is not valid JSON: " + e.what());
  }
}

/// Analytic prediction of the configured statistic, when a law is configured.
/// "jn_finite" is the exact finite-N value for J_N.
inline std::optional<Value> predict(const ExperimentConfig& c, const StarGraph& g, int N) {
  if (!c.law) return std::nullopt;
  if (*c.law == "jn_finite")
    return Value(c.statistic == Statistic::injective ? jn_injective_trace(g, N) : jn_trace(g, N));
  auto var_set = g.variables();
  std::vector<std::string> vars(var_set.begin(), var_set.end());
  TrafficDistribution d = make_law(*c.law, vars);
  return c.statistic == Statistic::injective ? d(g) : tau_from_tau0(d, g);
}

inline Report run_experiment(const ExperimentConfig& c) {
  Report rep;
  bool exact = !c.ensembles.empty();
  for (auto& [v, j] : c.ensembles) exact = exact && detail::exact_deterministic(j);
  for (auto& ge : c.graphs)
    for (auto& v : ge.graph.variables())
      if (!c.ensembles.count(v)) throw ContractError("graph '" + ge.id + "' uses variable '" + v + "' with no ensemble");
  for (int N : c.Ns) {
    std::vector<ReportRow> rows(c.graphs.size());
    if (exact) {
      // Deterministic J-type families: evaluate exactly over the rationals.
      RationalFamily F(N);
      for (auto& [v, j] : c.ensembles) {
        Rational entry = j.value("normalized", true) ? Rational(1, N) : Rational(1);
        F.set(v, RationalMatrix(N, entry));
      }
      for (std::size_t i = 0; i < c.graphs.size(); ++i) {
        const auto& g = c.graphs[i].graph;
        Rational v = c.statistic == Statistic::injective ? injective_trace_mobius(g, F).value
                                                         : trace_test_graph(g, F).value;
        rows[i].mean = Complex(to_double(v));
        rows[i].prediction = predict(c, g, N);
        if (rows[i].prediction) {
          bool equal = rows[i].prediction->is_exact() ? rows[i].prediction->rational() == v
                                                      : std::abs(rows[i].prediction->to_complex() - rows[i].mean) == 0;
          rows[i].z = equal ? 0.0 : std::numeric_limits<double>::infinity();
        }
      }
    } else {
      SpecMap specs;
      for (auto& [v, j] : c.ensembles) specs[v] = ensemble_from_json(j, N);
      Grouping groups = c.groups.empty() ? separate_groups(specs) : c.groups;
      std::vector<StarGraph> graphs;
      for (auto& ge : c.graphs) graphs.push_back(ge.graph);
      if (c.samples < 2) throw ContractError("random ensembles need at least 2 samples for a standard error");
      MCOptions opt;
      opt.trace = c.statistic == Statistic::trace;
      opt.injective = c.statistic == Statistic::injective;
      opt.jobs = c.jobs;
      MCReport mc = mc_estimate(graphs, specs, groups, c.samples, stream_key({c.seed, static_cast<std::uint64_t>(N)}), opt);
      for (std::size_t i = 0; i < c.graphs.size(); ++i) {
        const Estimate& e = opt.trace ? mc.graphs[i].trace : mc.graphs[i].injective;
        rows[i].mean = e.mean;
        rows[i].se = e.se;
        rows[i].prediction = predict(c, graphs[i], N);
        if (rows[i].prediction) {
          double diff = std::abs(e.mean - rows[i].prediction->to_complex());
          if (e.se > 0) rows[i].z = diff / e.se;
          else rows[i].z = diff <= 1e-12 ? 0.0 : std::numeric_limits<double>::infinity();
        }
      }
    }
    for (std::size_t i = 0; i < c.graphs.size(); ++i) {
      rows[i].graph_id = c.graphs[i].id;
      rows[i].N = N;
      rows[i].samples = exact ? 1 : c.samples;
      rows[i].flagged = rows[i].z && *rows[i].z > c.threshold;
      rep.rows.push_back(rows[i]);
    }
  }
  return rep;
}

inline std::string format_csv(const Report& rep) {
  std::string s = "graph_id,N,samples,mean_re,mean_im,stderr,prediction,z\n";
  for (auto& r : rep.rows) {
    s += r.graph_id + "," + std::to_string(r.N) + "," + std::to_string(r.samples) + "," + format_double(r.mean.real()) +
         "," + format_double(r.mean.imag()) + "," + format_double(r.se) + ",";
    if (r.prediction) s += format_double(r.prediction->real());
    s += ",";
    if (r.z) s += std::isinf(*r.z) ? "inf" : format_double(*r.z);
    s += "\n";
  }
  return s;
}

inline nlohmann::json report_to_json(const Report& rep) {
  nlohmann::json j;
  j["schema_version"] = kReportSchemaVersion;
  j["rows"] = nlohmann::json::array();
  for (auto& r : rep.rows) {
    nlohmann::json row{{"graph_id", r.graph_id}, {"N", r.N},        {"samples", r.samples},
                       {"mean_re", r.mean.real()}, {"mean_im", r.mean.imag()}, {"stderr", r.se},
                       {"flagged", r.flagged}};
    if (r.prediction) {
      row["prediction"] = r.prediction->real();
      row["prediction_exact"] = r.prediction->str();
    } else {
      row["prediction"] = nullptr;
    }
    if (r.z && !std::isinf(*r.z)) row["z"] = *r.z;
    else row["z"] = r.z ? nlohmann::json("inf") : nlohmann::json(nullptr);
    j["rows"].push_back(row);
  }
  return j;
}

}  // namespace traffic
