#include "snl/cli.hpp"
#include "snl/network.hpp"
#include "snl/triangulation.hpp"

#include <gtest/gtest.h>
#include <json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>

using namespace snl;
namespace fs = std::filesystem;

namespace
{

struct Outcome
{
  int code = 0;
  std::string out;
  std::string err;
};

Outcome call(const std::vector<std::string>& args)
{
  std::ostringstream out, err;
  Outcome o;
  o.code = cli::run(args, out, err);
  o.out = out.str();
  o.err = err.str();
  return o;
}

class CliFiles : public ::testing::Test
{
protected:
  void SetUp() override
  {
    dir_ = fs::temp_directory_path() / ("snl_cli_" + std::to_string(::testing::UnitTest::GetInstance()->random_seed()) +
                                        "_" + ::testing::UnitTest::GetInstance()->current_test_info()->name());
    fs::create_directories(dir_);
  }
  void TearDown() override { fs::remove_all(dir_); }

  std::string path(const std::string& name) const { return (dir_ / name).string(); }

  fs::path dir_;
};

std::string read_file(const std::string& p)
{
  std::ifstream f(p);
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

std::vector<std::string> lines(const std::string& text)
{
  std::vector<std::string> out;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line))
  {
    out.push_back(line);
  }
  return out;
}

}  // namespace

TEST(Cli, UsageErrors)
{
  EXPECT_EQ(call({}).code, cli::kUsage);
  EXPECT_EQ(call({"frobnicate"}).code, cli::kUsage);
  EXPECT_EQ(call({"solve"}).code, cli::kUsage);
  EXPECT_EQ(call({"solve", "--in", "/nonexistent/instance.json"}).code, cli::kUsage);
  EXPECT_EQ(call({"gen", "--mode", "hexagonal"}).code, cli::kUsage);
  EXPECT_EQ(call({"bound", "--n", "5..10"}).code, cli::kUsage);
  EXPECT_EQ(call({"--tol", "-1", "gen"}).code, cli::kUsage);
  EXPECT_EQ(call({"--help"}).code, cli::kSuccess);
}

TEST(Cli, GenIsDeterministic)
{
  for (const char* mode : {"unit-disk", "grid", "triangulation"})
  {
    const auto a = call({"--seed", "4", "gen", "--mode", mode});
    const auto b = call({"--seed", "4", "gen", "--mode", mode});
    ASSERT_EQ(a.code, cli::kSuccess) << mode << a.err;
    EXPECT_EQ(a.out, b.out);
    EXPECT_NO_THROW(instance_from_json_string(a.out)) << mode;
    EXPECT_NE(a.out, call({"--seed", "5", "gen", "--mode", mode}).out);
  }
  const auto warn = call({"gen", "--mode", "grid", "--b", "3", "--n", "30"});
  EXPECT_NE(warn.err.find("dM+1"), std::string::npos);
  EXPECT_TRUE(call({"--quiet", "gen", "--mode", "grid", "--b", "3", "--n", "30"}).err.empty());
}

TEST_F(CliFiles, SolveAndCertify)
{
  const std::string tri = path("tri.json");
  ASSERT_EQ(call({"--seed", "3", "--out", tri, "triangulate", "--n", "8"}).code, cli::kSuccess);
  const auto solved = call({"solve", "--in", tri, "--objective", "virtual", "--spectra", path("spec.csv")});
  ASSERT_EQ(solved.code, cli::kSuccess) << solved.err;
  const auto j = nlohmann::json::parse(solved.out);
  EXPECT_EQ(j["rank_Z"], 2);
  EXPECT_TRUE(j["converged"].get<bool>());
  EXPECT_TRUE(fs::exists(path("spec.csv")));

  const auto inst = triangulation_from_json(read_file(tri));
  const auto truth = triangulation_instance(inst);
  std::vector<Point> got;
  for (const auto& p : j["positions"])
  {
    Point q(2);
    q << p[0].get<double>(), p[1].get<double>();
    got.push_back(q);
  }
  EXPECT_LE(rmsd(got, *truth.sensor_truth()), 1e-4);

  const std::string unique = path("unique.json");
  ASSERT_EQ(call({"--seed", "2", "--out", unique, "gen", "--mode", "unit-disk", "--n", "6", "--radius", "1.5"}).code,
            cli::kSuccess);
  const auto yes = call({"certify", "--in", unique});
  EXPECT_EQ(yes.code, cli::kSuccess) << yes.out;
  EXPECT_EQ(nlohmann::json::parse(yes.out)["unique"], "true");

  const std::string sparse = path("sparse.json");
  const std::vector<Point> corners{Eigen::Vector2d(0, 0), Eigen::Vector2d(1, 0), Eigen::Vector2d(0, 1)};
  const std::vector<EdgeMeasurement> edges{{0, 0, EdgeKind::AnchorSensor, 0.6}, {1, 0, EdgeKind::AnchorSensor, 0.6}};
  const NetworkInstance two(2, corners, 1, edges);
  save_instance(two, sparse);
  const auto no = call({"certify", "--in", sparse});
  EXPECT_EQ(no.code, cli::kCertifiedFalse) << no.out;
  EXPECT_EQ(nlohmann::json::parse(no.out)["unique"], "false");

  const std::string broken = path("broken.json");
  std::ofstream(broken) << "{\"dimension\": 2, \"anchors\": 5}";
  EXPECT_EQ(call({"solve", "--in", broken}).code, cli::kUsage);
}

TEST(Cli, BoundCsv)
{
  const auto r = call({"bound", "--n", "200..1000", "--step", "200", "--target", "0.99"});
  ASSERT_EQ(r.code, cli::kSuccess) << r.err;
  const auto rows = lines(r.out);
  ASSERT_EQ(rows.size(), 6u);
  EXPECT_EQ(rows[0], "n,b,M,alpha,r,lower_bound,aspnes_r");
  EXPECT_EQ(rows[1].rfind("200,", 0), 0u);
}

TEST_F(CliFiles, SimulateAndBench)
{
  const auto sim = call({"--seed", "7", "simulate", "--b", "3", "--trials", "40", "--trials-csv", path("t.csv")});
  ASSERT_EQ(sim.code, cli::kSuccess) << sim.err;
  const auto rows = lines(sim.out);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_EQ(rows[0], "n,b,radius,trials,rate,std_error,half_width,grid_rate,lower_bound");
  EXPECT_EQ(rows[1].rfind("19,3,", 0), 0u);
  EXPECT_EQ(sim.out, call({"--seed", "7", "simulate", "--b", "3", "--trials", "40"}).out);
  EXPECT_EQ(lines(read_file(path("t.csv"))).size(), 41u);

  const auto bench = call({"--quiet", "bench", "--suite", "small", "--trials", "2", "--max-iterations", "3",
                           "--summary", path("s.csv")});
  ASSERT_EQ(bench.code, cli::kSuccess) << bench.err;
  EXPECT_EQ(lines(bench.out).size(), 11u);
  EXPECT_TRUE(bench.err.empty());
  EXPECT_TRUE(fs::exists(path("s.csv")));
}
