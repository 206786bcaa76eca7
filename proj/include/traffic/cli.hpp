#pragma once

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdlib>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "traffic/algebra.hpp"
#include "traffic/dsl.hpp"
#include "traffic/errors.hpp"
#include "traffic/experiment.hpp"
#include "traffic/law_registry.hpp"
#include "traffic/local_product.hpp"
#include "traffic/matrix.hpp"
#include "traffic/matrix_eval.hpp"

namespace traffic::cli {

enum ExitCode { kOk = 0, kAcceptanceFailure = 1, kUsage = 2, kGuard = 3 };

namespace detail {

inline std::string format_complex(const Complex& c) { return Value(c).str(); }

inline bool looks_like_graph(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r\n");
  return b != std::string::npos && (s[b] == '{' || s.compare(b, 5, "graph") == 0);
}

// A word such as "xx*y" or a graph/monomial in the DSL or JSON.
inline GraphMonomial monomial_arg(const std::string& s) {
  if (looks_like_graph(s)) {
    ParsedGraph p = parse_graph(s);
    return p.monomial();
  }
  Word w = parse_word(s);
  if (w.empty()) throw ParseError("empty word");
  return from_word(w);
}

inline std::vector<std::string> sorted_variables(const StarGraph& g) {
  auto vs = g.variables();
  return {vs.begin(), vs.end()};
}

inline int default_jobs() {
  if (const char* env = std::getenv("TRAFFIC_JOBS")) {
    try {
      int j = std::stoi(env);
      if (j > 0) return j;
    } catch (...) {
    }
  }
  return 1;
}

inline void emit(const std::string& text, const std::string& path, std::ostream& out) {
  if (path.empty()) {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw ParseError("cannot write '" + path + "'");
  f << text;
}

inline std::shared_ptr<const ComponentSampler> sampler_from_string(const std::string& s) {
  auto parts = std::vector<std::string>();
  std::stringstream ss(s);
  std::string tok;
  while (std::getline(ss, tok, ':')) parts.push_back(tok);
  if (parts.size() == 2 && parts[0] == "line") return std::make_shared<LineSampler>(parts[1]);
  if (parts.size() == 3 && parts[0] == "percolated_line")
    return std::make_shared<PercolatedLineSampler>(parts[1], to_double(parse_rational(parts[2])));
  throw ParseError("unknown sampler '" + s + "' (use line:<var> or percolated_line:<var>:<q>)");
}

}  // namespace detail

/// Runs the command line; returns the process exit code. Never throws.
inline int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Traffic distributions of random matrices: evaluation, limit laws and Monte Carlo checks"};
  app.require_subcommand(1);

  // eval
  auto* eval = app.add_subcommand("eval", "evaluate a graph on a matrix family file");
  std::string graph_text, graphs_file, family_path, method = "auto";
  bool want_trace = false, want_injective = false, want_density = false, want_matrix = false;
  eval->add_option("--graph", graph_text, "graph in the DSL or JSON");
  eval->add_option("--graphs-file", graphs_file, "file with one graph per line or a JSON array");
  eval->add_option("--family", family_path, "matrix family file (text or binary)")->required();
  eval->add_flag("--trace", want_trace, "normalized trace (1/N) sum over all maps");
  eval->add_flag("--injective", want_injective, "normalized sum over injective maps");
  eval->add_flag("--density", want_density, "injective density");
  eval->add_flag("--matrix", want_matrix, "matrix of a graph monomial");
  eval->add_option("--method", method, "injective route")->check(CLI::IsMember({"direct", "mobius", "auto"}));

  // moment
  auto* moment = app.add_subcommand("moment", "evaluate a law on a word or a graph");
  std::string law_text, word_text, moment_graph;
  bool injective_value = false;
  moment->add_option("--law", law_text, "law name")->required();
  moment->add_option("--word", word_text, "*-word such as xx*y");
  moment->add_option("--graph", moment_graph, "test graph (or monomial, which is closed)");
  moment->add_flag("--tau0", injective_value, "print the injective value tau0 instead of tau");

  // kappa
  auto* kap = app.add_subcommand("kappa", "Phi(t1 o t2) - Phi(t1) Phi(t2) under a law");
  std::string kappa_law, t1_text, t2_text;
  kap->add_option("--law", kappa_law, "law name")->required();
  kap->add_option("--t1", t1_text, "word or graph monomial")->required();
  kap->add_option("--t2", t2_text, "word or graph monomial")->required();

  // clt
  auto* clt = app.add_subcommand("clt", "moment of sqrt(p) d + sqrt(1-p) s");
  std::string p_text;
  int clt_k = 0;
  clt->add_option("--p", p_text, "mixing parameter in [0, 1]")->required();
  clt->add_option("--k", clt_k, "moment order")->required();

  // verify
  auto* verify = app.add_subcommand("verify", "Monte Carlo run compared against a law");
  std::string config_path, v_graphs_file, v_law, out_path, format, statistic;
  std::vector<std::string> v_graphs, v_ensembles, v_groups;
  std::vector<int> v_N;
  std::optional<int> v_samples, v_jobs;
  std::optional<std::uint64_t> v_seed;
  std::optional<double> v_threshold;
  verify->add_option("config", config_path, "experiment config (JSON)");
  verify->add_option("--graph", v_graphs, "test graph (repeatable)");
  verify->add_option("--graphs-file", v_graphs_file, "file with graphs");
  verify->add_option("--law", v_law, "law predicting the statistic");
  verify->add_option("--ensemble", v_ensembles, "var=ensemble (repeatable)");
  verify->add_option("--group", v_groups, "comma-separated variables sampled jointly (repeatable)");
  verify->add_option("--N", v_N, "dimensions")->delimiter(',');
  verify->add_option("--samples", v_samples, "replicates per N");
  verify->add_option("--seed", v_seed, "random seed");
  verify->add_option("--jobs", v_jobs, "worker threads (default: $TRAFFIC_JOBS or 1)");
  verify->add_option("--threshold", v_threshold, "largest acceptable |z|");
  verify->add_option("--statistic", statistic, "injective or trace")->check(CLI::IsMember({"injective", "trace"}));
  verify->add_option("--out", out_path, "output file");
  verify->add_option("--format", format, "csv or json")->check(CLI::IsMember({"csv", "json"}));

  // local
  auto* local = app.add_subcommand("local", "build a local free product of rooted samplers");
  std::vector<std::string> sampler_specs;
  int depth = 2;
  std::uint64_t local_seed = 0;
  std::string local_out, count_graph;
  local->add_option("--sampler", sampler_specs, "line:<var> or percolated_line:<var>:<q> (repeatable)")->required();
  local->add_option("--depth", depth, "construction depth");
  local->add_option("--seed", local_seed, "random seed");
  local->add_option("--count", count_graph, "print the rooted injective count of this graph (rooted at vertex 0)");
  local->add_option("--out", local_out, "write the network as JSON");

  // canon
  auto* canon = app.add_subcommand("canon", "print the canonical representative of a graph");
  std::string canon_graph;
  canon->add_option("--graph", canon_graph, "graph")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  if (!reversed.empty()) reversed.pop_back();  // program name
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    int code = app.exit(e, out, err);
    return code == 0 ? kOk : kUsage;
  }

  try {
    if (eval->parsed()) {
      ComplexFamily F = read_family_file(family_path);
      std::vector<GraphEntry> graphs;
      std::vector<ParsedGraph> parsed;
      if (!graph_text.empty()) {
        parsed.push_back(parse_graph(graph_text));
        graphs.push_back({"g0", parsed.back().graph});
      }
      if (!graphs_file.empty())
        for (auto& ge : read_graphs_file(graphs_file)) {
          graphs.push_back(ge);
          parsed.push_back(ParsedGraph{ge.graph, {}, {}, {}});
        }
      if (graphs.empty()) throw ParseError("eval needs --graph or --graphs-file");
      InjectiveMethod m = method == "direct"   ? InjectiveMethod::direct
                          : method == "mobius" ? InjectiveMethod::mobius
                                               : InjectiveMethod::automatic;
      bool many = graphs.size() > 1;
      for (std::size_t i = 0; i < graphs.size(); ++i) {
        const auto& p = parsed[i];
        std::string prefix = many ? graphs[i].id + "," : "";
        bool matrix = want_matrix || (p.is_monomial() && !want_trace && !want_injective && !want_density);
        if (matrix) {
          if (!p.is_monomial()) throw ContractError("--matrix needs a graph with in/out vertices");
          auto M = eval_monomial(p.monomial(), F);
          for (int r = 0; r < M.size(); ++r) {
            out << prefix;
            for (int c = 0; c < M.size(); ++c) out << (c ? "," : "") << detail::format_complex(M(r, c));
            out << "\n";
          }
          continue;
        }
        if (want_density) {
          out << prefix << detail::format_complex(injective_density(p.graph, F, DensityMode::uniform_expectation).value)
              << "\n";
        } else if (want_injective) {
          out << prefix << detail::format_complex(injective_trace(p.graph, F, m).value) << "\n";
        } else {
          out << prefix << detail::format_complex(trace_test_graph(p.graph, F).value) << "\n";
        }
      }
      return kOk;
    }
    if (moment->parsed()) {
      if (word_text.empty() == moment_graph.empty()) throw ParseError("moment needs exactly one of --word, --graph");
      if (!word_text.empty()) {
        Word w = parse_word(word_text);
        StarGraph g = close(from_word(w));
        TrafficDistribution d = make_law(law_text, detail::sorted_variables(g));
        out << (injective_value ? d(g) : star_moment(d, w)).str() << "\n";
      } else {
        ParsedGraph p = parse_graph(moment_graph);
        StarGraph g = p.is_monomial() ? close(p.monomial()) : p.graph;
        TrafficDistribution d = make_law(law_text, detail::sorted_variables(g));
        out << (injective_value ? d(g) : tau_from_tau0(d, g)).str() << "\n";
      }
      return kOk;
    }
    if (kap->parsed()) {
      GraphMonomial t1 = detail::monomial_arg(t1_text), t2 = detail::monomial_arg(t2_text);
      StarGraph joint = close(hadamard({t1, t2}));
      TrafficDistribution d = make_law(kappa_law, detail::sorted_variables(joint));
      out << kappa(d, t1, t2).str() << "\n";
      return kOk;
    }
    if (clt->parsed()) {
      out << to_string(clt_moment(parse_rational(p_text), clt_k)) << "\n";
      return kOk;
    }
    if (verify->parsed()) {
      nlohmann::json cfg = nlohmann::json::object();
      if (!config_path.empty()) {
        try {
          cfg = nlohmann::json::parse(traffic::detail::read_text_file(config_path));
        } catch (const nlohmann::json::parse_error& e) {
          throw ParseError("config '" + config_path + "' is not valid JSON: " + e.what());
        }
        if (!cfg.is_object()) throw ParseError("config must be a JSON object");
      }
      if (!v_graphs.empty()) cfg["graphs"] = v_graphs;
      if (!v_graphs_file.empty()) cfg["graphs_file"] = v_graphs_file;
      if (!v_law.empty()) cfg["law"] = v_law;
      for (auto& e : v_ensembles) {
        auto eq = e.find('=');
        if (eq == std::string::npos || eq == 0) throw ParseError("--ensemble expects var=ensemble, got '" + e + "'");
        cfg["ensembles"][e.substr(0, eq)] = ensemble_json_from_string(e.substr(eq + 1));
      }
      if (!v_groups.empty()) {
        Grouping groups;
        for (auto& g : v_groups) {
          std::vector<std::string> vars;
          std::stringstream ss(g);
          std::string v;
          while (std::getline(ss, v, ',')) vars.push_back(v);
          groups.push_back(vars);
        }
        cfg["groups"] = groups;
      }
      if (!v_N.empty()) cfg["N"] = v_N;
      if (v_samples) cfg["samples"] = *v_samples;
      if (v_seed) cfg["seed"] = *v_seed;
      if (v_threshold) cfg["threshold"] = *v_threshold;
      if (!statistic.empty()) cfg["statistic"] = statistic;
      if (!format.empty()) cfg["format"] = format;
      if (!out_path.empty()) cfg["out"] = out_path;
      if (v_jobs) cfg["jobs"] = *v_jobs;
      else if (!cfg.contains("jobs")) cfg["jobs"] = detail::default_jobs();
      ExperimentConfig c = config_from_json(cfg);
      Report rep = run_experiment(c);
      std::string text = c.format == "json" ? report_to_json(rep).dump(2) + "\n" : format_csv(rep);
      detail::emit(text, c.out, out);
      for (auto& r : rep.rows)
        if (r.flagged)
          err << "flagged: graph " << r.graph_id << " at N=" << r.N << " has |z| = "
              << (std::isinf(*r.z) ? std::string("inf") : format_double(*r.z)) << " > " << format_double(c.threshold)
              << "\n";
      return rep.any_flagged() ? kAcceptanceFailure : kOk;
    }
    if (local->parsed()) {
      SamplerList samplers;
      for (auto& s : sampler_specs) samplers.push_back(detail::sampler_from_string(s));
      RootedNetwork net = local_free_product(samplers, depth, local_seed);
      if (!local_out.empty()) detail::emit(network_to_json(net).dump(2) + "\n", local_out, out);
      out << "vertices," << net.vertex_count << "\n";
      if (!count_graph.empty()) {
        ParsedGraph p = parse_graph(count_graph);
        out << "count," << detail::format_complex(rooted_injective_count(p.graph, 0, net)) << "\n";
      }
      return kOk;
    }
    if (canon->parsed()) {
      ParsedGraph p = parse_graph(canon_graph);
      out << to_dsl(canonical_graph(p.graph)) << "\n";
      return kOk;
    }
  } catch (const ParseError& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const GuardError& e) {
    err << "error: " << e.what() << "\n";
    return kGuard;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << "\n";
    return kGuard;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return kUsage;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kGuard;
  }
  return kUsage;
}

inline int run(int argc, char** argv, std::ostream& out = std::cout, std::ostream& err = std::cerr) {
  return run(std::vector<std::string>(argv, argv + argc), out, err);
}

}  // namespace traffic::cli
