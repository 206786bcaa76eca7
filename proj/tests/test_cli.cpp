#include <gtest/gtest.h>

#include <sys/wait.h>

#include <cstdio>
#include <filesystem>
#include <random>
#include <sstream>

#include "support.hpp"
#include "traffic/cli.hpp"

using namespace traffic;

namespace {

struct Result {
  int code;
  std::string out, err;
};

Result run_cli(std::vector<std::string> args) {
  args.insert(args.begin(), "traffic_cli");
  std::ostringstream out, err;
  int code = cli::run(args, out, err);
  return {code, out.str(), err.str()};
}

std::string temp_path(const std::string& name) {
  return (std::filesystem::temp_directory_path() / ("traffic_cli_test_" + name)).string();
}

std::vector<std::string> lines(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string l;
  while (std::getline(ss, l)) out.push_back(l);
  return out;
}

}  // namespace

TEST(Cli, CltMoment) {
  auto r = run_cli({"clt", "--p", "1/2", "--k", "4"});
  EXPECT_EQ(r.code, 0);
  EXPECT_EQ(r.out, "9/4\n");
  EXPECT_EQ(run_cli({"clt", "--p", "0", "--k", "6"}).out, "5\n");
  EXPECT_EQ(run_cli({"clt", "--p", "1/2", "--k", "11"}).code, 3);
  EXPECT_EQ(run_cli({"clt", "--p", "2", "--k", "2"}).code, 3);
}

TEST(Cli, Moments) {
  EXPECT_EQ(run_cli({"moment", "--law", "semicircular_real", "--word", "xxxx"}).out, "2\n");
  EXPECT_EQ(run_cli({"moment", "--law", "haar", "--word", "xx*xx*"}).out, "1\n");
  EXPECT_EQ(run_cli({"moment", "--law", "haar", "--word", "xx*xx*", "--tau0"}).out, "-1\n");
  EXPECT_EQ(run_cli({"moment", "--law", "freeprod(x=semicircular_real,y=semicircular_real)", "--word", "xxyy"}).out,
            "1\n");
  EXPECT_EQ(run_cli({"moment", "--law", "permutation", "--graph", "graph { v = 2; e = 0->1:x, 1->0:x* }", "--tau0"}).out,
            "1\n");
  auto guard = run_cli({"moment", "--law", "haar", "--word", "xxxxxxxxx"});
  EXPECT_EQ(guard.code, 3);
  EXPECT_NE(guard.err.find("guard"), std::string::npos);
  EXPECT_EQ(run_cli({"moment", "--law", "wishart", "--word", "xx"}).code, 2);
  EXPECT_EQ(run_cli({"moment", "--law", "haar"}).code, 2);
}

TEST(Cli, Kappa) {
  EXPECT_EQ(run_cli({"kappa", "--law", "diagonal:gaussian", "--t1", "x", "--t2", "x"}).out, "1\n");
  EXPECT_EQ(run_cli({"kappa", "--law", "haar", "--t1", "x", "--t2", "x"}).out, "0\n");
}

TEST(Cli, CanonicalForm) {
  auto a = run_cli({"canon", "--graph", "graph { v = 3; e = 0->1:x, 1->2:y, 2->0:x }"});
  auto b = run_cli({"canon", "--graph", "graph { v = 3; e = 2->0:x, 0->1:x, 1->2:y }"});
  EXPECT_EQ(a.code, 0);
  EXPECT_EQ(a.out, b.out);
  EXPECT_EQ(parse_graph(a.out).graph.edge_count(), 3);
  EXPECT_EQ(run_cli({"canon", "--graph", "graph { v = 2 }"}).code, 2);
}

TEST(Cli, EvalOnFamilyFile) {
  std::mt19937_64 rng(91);
  ComplexFamily F(4);
  F.set("x", test_support::random_matrix(rng, 4));
  std::string path = temp_path("family.txt");
  write_family_file(path, F, false);
  std::string graph = "graph { v = 3; e = 0->1:x, 1->2:x*, 2->0:x }";
  StarGraph g = parse_graph(graph).graph;
  auto r = run_cli({"eval", "--family", path, "--graph", graph, "--trace"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_LT(std::abs(std::stod(r.out) - test_support::brute_trace(g, F).real()), 1e-6);
  auto inj = run_cli({"eval", "--family", path, "--graph", graph, "--injective", "--method", "direct"});
  EXPECT_EQ(inj.code, 0);
  auto m = run_cli({"eval", "--family", path, "--graph", "graph { v = 2; e = 0->1:x; in = 0; out = 1 }"});
  EXPECT_EQ(lines(m.out).size(), 4u);
  EXPECT_EQ(run_cli({"eval", "--family", temp_path("missing"), "--graph", graph}).code, 2);
  std::filesystem::remove(path);
}

TEST(Cli, VerifyExactAllOnes) {
  auto r = run_cli({"verify", "--ensemble", "x=all_ones", "--law", "jn_finite", "--graph", "xx", "--graph",
                    "graph { v = 3; e = 0->1:x, 1->2:x }", "--N", "3,5", "--samples", "1", "--seed", "1"});
  ASSERT_EQ(r.code, 0) << r.err;
  auto ls = lines(r.out);
  ASSERT_EQ(ls.size(), 5u);
  EXPECT_EQ(ls[0], "graph_id,N,samples,mean_re,mean_im,stderr,prediction,z");
  for (std::size_t i = 1; i < ls.size(); ++i) EXPECT_EQ(ls[i].substr(ls[i].rfind(',') + 1), "0");
  // the limit law is not the finite-N value, so it is flagged
  auto bad = run_cli({"verify", "--ensemble", "x=all_ones", "--law", "jlimit", "--graph",
                      "graph { v = 2; e = 0->1:x }", "--N", "3", "--samples", "1", "--seed", "1"});
  EXPECT_EQ(bad.code, 1);
  EXPECT_NE(bad.err.find("flagged"), std::string::npos);
}

TEST(Cli, VerifyMonteCarloIsReproducible) {
  // unitarity makes x x* exact and E[Tr U^2] = 0 holds at every N
  std::vector<std::string> args{"verify", "--ensemble", "x=haar", "--law", "haar", "--statistic", "trace",
                                "--graph", "xx*", "--graph", "xx", "--N", "20", "--samples", "30",
                                "--seed", "5", "--format", "json"};
  auto a = run_cli(args);
  ASSERT_EQ(a.code, 0) << a.err;
  args.push_back("--jobs");
  args.push_back("2");
  auto b = run_cli(args);
  EXPECT_EQ(a.out, b.out);
  auto j = nlohmann::json::parse(a.out);
  EXPECT_EQ(j["rows"].size(), 2u);
  EXPECT_EQ(run_cli({"verify", "--ensemble", "x=wigner_real", "--graph", "xx", "--N", "10", "--samples", "1", "--seed",
                     "1"}).code,
            3);
  EXPECT_EQ(run_cli({"verify", "--ensemble", "x=wigner_real", "--graph", "xx", "--N", "10", "--samples", "5"}).code, 2);
  EXPECT_EQ(run_cli({"verify", "--ensemble", "x=nonsense", "--graph", "xx", "--N", "10", "--samples", "5"}).code, 2);
}

TEST(Cli, LocalFreeProduct) {
  auto r = run_cli({"local", "--sampler", "line:a", "--sampler", "line:b", "--depth", "2", "--count",
                    "graph { v = 3; e = 0->1:a, 1->2:b }"});
  ASSERT_EQ(r.code, 0) << r.err;
  EXPECT_EQ(r.out, "vertices,17\ncount,1\n");
  EXPECT_EQ(run_cli({"local", "--sampler", "circle:a"}).code, 2);
  EXPECT_EQ(run_cli({"local", "--sampler", "line:a", "--depth", "9"}).code, 3);
}

TEST(Cli, UsageErrors) {
  EXPECT_EQ(run_cli({}).code, 2);
  EXPECT_EQ(run_cli({"frobnicate"}).code, 2);
  EXPECT_EQ(run_cli({"--help"}).code, 0);
}

TEST(Cli, BinaryExitCodes) {
  std::string bin = TRAFFIC_CLI_PATH;
  auto status = [&](const std::string& args) {
    int s = std::system((bin + " " + args + " > /dev/null 2>&1").c_str());
    return WIFEXITED(s) ? WEXITSTATUS(s) : -1;
  };
  EXPECT_EQ(status("clt --p 1/2 --k 4"), 0);
  EXPECT_EQ(status("moment --law nope --word x"), 2);
  EXPECT_EQ(status("clt --p 1/2 --k 20"), 3);
  FILE* p = popen((bin + " clt --p 1/3 --k 2").c_str(), "r");
  ASSERT_NE(p, nullptr);
  char buf[64] = {0};
  ASSERT_NE(fgets(buf, sizeof buf, p), nullptr);
  pclose(p);
  EXPECT_EQ(std::string(buf), "1\n");
}
