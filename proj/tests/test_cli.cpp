#include <gtest/gtest.h>

#include <sys/wait.h>

#include <array>
#include <cstdio>
#include <fstream>
#include <json.hpp>
#include <sstream>

#include "fixtures.hpp"
#include "rstc/pseudo.hpp"
#include "rstc/transport.hpp"

using namespace rstc;

namespace {

struct Outcome {
  int status = -1;
  std::string out;
};

Outcome run(const std::string& args) {
  const std::string command = std::string(RSTC_CLI) + " " + args + " 2>&1";
  Outcome o;
  FILE* pipe = popen(command.c_str(), "r");
  if (pipe == nullptr) return o;
  std::array<char, 4096> buf{};
  std::size_t got = 0;
  while ((got = fread(buf.data(), 1, buf.size(), pipe)) > 0) o.out.append(buf.data(), got);
  const int raw = pclose(pipe);
  o.status = WIFEXITED(raw) ? WEXITSTATUS(raw) : -1;
  return o;
}

std::string slurp(const std::filesystem::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

double metric(const std::string& out, const std::string& name) {
  const auto at = out.find(name + " ");
  if (at == std::string::npos) return -1.0;
  return std::stod(out.substr(at + name.size() + 1));
}

const std::string kFixtureConfig = std::string(RSTC_FIXTURE_DIR) + "/acceptance.cfg";

}  // namespace

TEST(Cli, SynthClusterEvalPipeline) {
  const auto dir = fixture::scratch_dir("cli_pipeline");
  const auto data = (dir / "r1.emb").string();
  ASSERT_EQ(run("synth --classes 4 --n 800 --ratio 1 --seed 7 --out " + data).status, 0);
  const auto cluster = run("cluster --data " + data + " --classes 4 --config " + kFixtureConfig +
                           " --seed 7 --out-assignments " + (dir / "a.txt").string() +
                           " --out-report " + (dir / "r.csv").string());
  ASSERT_EQ(cluster.status, 0) << cluster.out;
  const auto eval = run("eval --pred " + (dir / "a.txt").string() + " --truth " + data);
  ASSERT_EQ(eval.status, 0) << eval.out;
  EXPECT_GE(metric(eval.out, "ACC"), 0.95) << eval.out;
}

TEST(Cli, EvalOfIdenticalFilesIsPerfect) {
  const auto dir = fixture::scratch_dir("cli_eval");
  std::ofstream(dir / "a.txt") << "0\n2\n1\n1\n";
  const auto eval = run("eval --pred " + (dir / "a.txt").string() + " --truth " +
                        (dir / "a.txt").string());
  ASSERT_EQ(eval.status, 0) << eval.out;
  EXPECT_EQ(metric(eval.out, "ACC"), 1.0);
  EXPECT_EQ(metric(eval.out, "NMI"), 1.0);
}

TEST(Cli, SolveFixedMatchesLibrary) {
  const auto dir = fixture::scratch_dir("cli_solve");
  std::ofstream(dir / "p.csv") << "0.9,0.1\n0.1,0.9\n";
  const auto solved = run("solve-ot --predictions " + (dir / "p.csv").string() +
                          " --mode fixed --out " + (dir / "plan.json").string());
  ASSERT_EQ(solved.status, 0) << solved.out;
  const auto json = nlohmann::json::parse(slurp(dir / "plan.json"));
  const auto cost = cost_from_predictions(DenseMatrix::from_rows({{0.9, 0.1}, {0.1, 0.9}}));
  const auto expected = solve_fixed_marginal_ot(cost, ProbVector::uniform(2),
                                                ProbVector::uniform(2), 0.1, 1000);
  for (std::size_t i = 0; i < 2; ++i) {
    for (std::size_t j = 0; j < 2; ++j) {
      EXPECT_NEAR(json["plan"][i][j].get<double>(), expected.plan(i, j), 1e-12);
    }
  }
  EXPECT_GT(json["plan"][0][0].get<double>(), json["plan"][0][1].get<double>());
  EXPECT_EQ(json["marginal"][0].get<double>(), 0.5);
}

TEST(Cli, SolveSaotToStdout) {
  const auto dir = fixture::scratch_dir("cli_saot");
  std::ofstream(dir / "p.csv") << "0.9,0.1\n0.1,0.9\n0.8,0.2\n";
  const auto solved = run("solve-ot --predictions " + (dir / "p.csv").string() +
                          " --mode saot --epsilon2 0.01 --out -");
  ASSERT_EQ(solved.status, 0) << solved.out;
  const auto json = nlohmann::json::parse(solved.out);
  EXPECT_GT(json["marginal"][0].get<double>(), 0.5);
  EXPECT_TRUE(json["converged"].get<bool>());
}

TEST(Cli, SameSeedGivesByteIdenticalOutputs) {
  const auto dir = fixture::scratch_dir("cli_determinism");
  const auto data = (dir / "d.emb").string();
  ASSERT_EQ(run("synth --n 400 --ratio 3 --seed 2 --out " + data).status, 0);
  for (const char* tag : {"1", "2"}) {
    const auto r = run("cluster --data " + data + " --classes 4 --config " + kFixtureConfig +
                       " --max-steps 100 --seed 4 --out-assignments " +
                       (dir / (std::string("a") + tag)).string() + " --out-report " +
                       (dir / (std::string("r") + tag)).string());
    ASSERT_EQ(r.status, 0) << r.out;
  }
  EXPECT_EQ(slurp(dir / "a1"), slurp(dir / "a2"));
  EXPECT_EQ(slurp(dir / "r1"), slurp(dir / "r2"));
  ASSERT_EQ(run("synth --n 400 --ratio 3 --seed 2 --out " + (dir / "e.emb").string()).status, 0);
  EXPECT_EQ(slurp(dir / "d.emb"), slurp(dir / "e.emb"));
}

TEST(Cli, CurvesReemitReport) {
  const auto dir = fixture::scratch_dir("cli_curves");
  const auto data = (dir / "d.emb").string();
  ASSERT_EQ(run("synth --n 200 --seed 1 --out " + data).status, 0);
  ASSERT_EQ(run("cluster --data " + data + " --classes 4 --config " + kFixtureConfig +
                " --max-steps 20 --out-assignments " + (dir / "a").string() + " --out-report " +
                (dir / "r.csv").string())
                .status,
            0);
  const auto curves = run("curves --report " + (dir / "r.csv").string() + " --out -");
  ASSERT_EQ(curves.status, 0);
  EXPECT_EQ(curves.out, slurp(dir / "r.csv"));
}

TEST(Cli, FailuresExitNonZero) {
  const auto dir = fixture::scratch_dir("cli_failures");
  EXPECT_NE(run("").status, 0);
  EXPECT_NE(run("bogus").status, 0);
  EXPECT_NE(run("cluster --data /nonexistent.emb --classes 4").status, 0);
  std::ofstream(dir / "junk.emb") << "not an emb1 file";
  const auto bad = run("cluster --data " + (dir / "junk.emb").string() +
                       " --classes 4 --out-assignments " + (dir / "a").string());
  EXPECT_NE(bad.status, 0);
  EXPECT_NE(bad.out.find("magic"), std::string::npos) << bad.out;
  std::ofstream(dir / "p.csv") << "0.7,0.7\n";
  EXPECT_NE(run("solve-ot --predictions " + (dir / "p.csv").string()).status, 0);
  std::ofstream(dir / "bad.cfg") << "no_such_key = 1\n";
  ASSERT_EQ(run("synth --n 40 --out " + (dir / "d.emb").string()).status, 0);
  EXPECT_NE(run("cluster --data " + (dir / "d.emb").string() + " --classes 4 --config " +
                (dir / "bad.cfg").string() + " --out-assignments " + (dir / "a").string())
                .status,
            0);
}
