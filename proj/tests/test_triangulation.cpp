#include "snl/triangulation.hpp"

#include "support.hpp"

#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <set>

using namespace snl;
using snl::test::pt;

namespace
{

using Pair = std::pair<int, int>;

// Every non-edge pair lying in two triangles that share an edge.
std::set<Pair> brute_force_virtual(const Triangulation& tri)
{
  auto shares_edge = [](const std::array<int, 3>& s, const std::array<int, 3>& t) {
    int common = 0;
    for (int a : s)
    {
      common += std::count(t.begin(), t.end(), a);
    }
    return common == 2;
  };
  std::set<Pair> out;
  for (int i = 0; i < tri.size(); ++i)
  {
    for (int j = i + 1; j < tri.size(); ++j)
    {
      if (tri.has_edge(i, j))
      {
        continue;
      }
      for (const auto& s : tri.triangles)
      {
        for (const auto& t : tri.triangles)
        {
          const bool i_in_s = std::count(s.begin(), s.end(), i) > 0;
          const bool j_in_t = std::count(t.begin(), t.end(), j) > 0;
          if (i_in_s && j_in_t && shares_edge(s, t))
          {
            out.insert({i, j});
          }
        }
      }
    }
  }
  return out;
}

std::set<Pair> as_set(const VirtualEdgeSet& v)
{
  std::set<Pair> out;
  for (auto [i, j] : v.all())
  {
    out.insert({std::min(i, j), std::max(i, j)});
  }
  return out;
}

// Two triangles on the shared edge (0, 1): anchors 0, 1, 2 and sensor 3 opposite 2.
Triangulation two_triangles()
{
  const std::vector<Point> pts{pt(0.1, 0.2), pt(0.9, 0.3), pt(0.4, 0.9), pt(0.6, -0.4)};
  return replay_actions(pts, {{ActionKind::AddPoint, 3, 0, 1}});
}

std::vector<Point> eight_points()
{
  return {pt(0, 0),    pt(1, 0),     pt(0.5, 0.8), pt(1.2, 0.8),
          pt(0.5, -0.6), pt(-0.3, 0.7), pt(1.5, 0.2), pt(0.6, 1.3)};
}

std::vector<TriangulationAction> eight_actions()
{
  return {{ActionKind::AddPoint, 3, 1, 2},    {ActionKind::AddPoint, 4, 0, 1}, {ActionKind::AddPoint, 5, 2, 0},
          {ActionKind::AddPoint, 6, 1, 3},    {ActionKind::ConnectPair, 1, 4, 6},
          {ActionKind::AddPoint, 7, 3, 2},    {ActionKind::ConnectPair, 2, 7, 5}};
}

Eigen::Matrix4d stress_matrix(const std::vector<Pair>& edges, const std::vector<double>& w)
{
  Eigen::Matrix4d m = Eigen::Matrix4d::Zero();
  for (std::size_t e = 0; e < edges.size(); ++e)
  {
    const auto [i, j] = edges[e];
    m(i, j) -= w[e];
    m(j, i) -= w[e];
    m(i, i) += w[e];
    m(j, j) += w[e];
  }
  return m;
}

const std::vector<Pair> kK4{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};

}  // namespace

TEST(Build, SingleTriangle)
{
  const auto tri = build_incremental_triangulation(3, 1);
  EXPECT_EQ(tri.triangles.size(), 1u);
  EXPECT_TRUE(tri.actions.empty());
  EXPECT_TRUE(virtual_edges(tri).all().empty());
  EXPECT_THROW(triangulation_instance(tri), InvalidInput);
  EXPECT_THROW(build_incremental_triangulation(2, 1), InvalidInput);
}

TEST(Build, FourPoints)
{
  for (std::uint64_t seed = 1; seed <= 5; ++seed)
  {
    const auto tri = build_incremental_triangulation(4, seed);
    EXPECT_EQ(tri.triangles.size(), 2u);
    EXPECT_EQ(tri.edges().size(), 5u);
    const auto ve = virtual_edges(tri);
    ASSERT_EQ(ve.all().size(), 1u);
    const auto [i, j] = ve.all()[0];
    EXPECT_FALSE(tri.has_edge(i, j));
  }
}

TEST(Build, ValidAndReplayable)
{
  for (std::uint64_t seed = 1; seed <= 20; ++seed)
  {
    const int n = 4 + static_cast<int>(seed % 12);
    const auto tri = build_incremental_triangulation(n, seed);
    EXPECT_EQ(tri.size(), n);
    EXPECT_EQ(tri.triangles.size(), tri.actions.size() + 1);
    EXPECT_NO_THROW(validate_triangulation(tri));
    const auto again = replay_actions(tri.points, tri.actions);
    EXPECT_EQ(again.triangles, tri.triangles);
    for (const auto& t : tri.triangles)
    {
      const Point u = tri.points[t[1]] - tri.points[t[0]];
      const Point v = tri.points[t[2]] - tri.points[t[0]];
      EXPECT_GT(std::abs(u[0] * v[1] - u[1] * v[0]) / 2, 1e-9);
    }
  }
}

TEST(Build, Deterministic)
{
  const auto a = build_incremental_triangulation(12, 77);
  const auto b = build_incremental_triangulation(12, 77);
  EXPECT_EQ(triangulation_to_json(a), triangulation_to_json(b));
}

TEST(Replay, HandBuiltEightPoints)
{
  const auto tri = replay_actions(eight_points(), eight_actions());
  EXPECT_NO_THROW(validate_triangulation(tri));
  EXPECT_EQ(tri.triangles.size(), 8u);
  EXPECT_EQ(as_set(virtual_edges(tri)), brute_force_virtual(tri));
  EXPECT_TRUE(as_set(virtual_edges(tri)).count({4, 6}) == 0);
  EXPECT_TRUE(as_set(virtual_edges(tri)).count({0, 6}) == 1);
}

TEST(Replay, IllegalActionsAreNamed)
{
  auto crossing = eight_actions();
  crossing[1] = {ActionKind::AddPoint, 4, 1, 0};
  try
  {
    replay_actions(eight_points(), crossing);
    FAIL() << "expected rejection";
  }
  catch (const InvalidInput& e)
  {
    EXPECT_NE(std::string(e.what()).find("action 1"), std::string::npos) << e.what();
  }

  auto inside = eight_points();
  inside[3] = pt(0.5, 0.3);
  EXPECT_THROW(replay_actions(inside, eight_actions()), InvalidInput);

  auto wrong_order = eight_actions();
  std::swap(wrong_order[0], wrong_order[1]);
  EXPECT_THROW(replay_actions(eight_points(), wrong_order), InvalidInput);

  auto not_reflex = eight_actions();
  not_reflex[4] = {ActionKind::ConnectPair, 3, 6, 2};
  EXPECT_THROW(replay_actions(eight_points(), not_reflex), InvalidInput);

  auto short_list = eight_actions();
  short_list.resize(5);
  EXPECT_THROW(replay_actions(eight_points(), short_list), InvalidInput);
}

TEST(Validate, RejectsBrokenTriangulations)
{
  auto tri = replay_actions(eight_points(), eight_actions());
  auto missing = tri;
  missing.triangles.pop_back();
  EXPECT_THROW(validate_triangulation(missing), InvalidInput);
  auto crossing = two_triangles();
  crossing.triangles = {{0, 1, 2}, {0, 2, 3}, {1, 2, 3}};
  EXPECT_THROW(validate_triangulation(crossing), InvalidInput);
}

TEST(Virtual, MatchesBruteForce)
{
  for (std::uint64_t seed = 1; seed <= 30; ++seed)
  {
    const int n = 4 + static_cast<int>(seed % 9);
    const auto tri = build_incremental_triangulation(n, 100 + seed);
    const auto ve = virtual_edges(tri);
    EXPECT_EQ(as_set(ve), brute_force_virtual(tri)) << "seed " << seed;
    for (auto [k, j] : ve.anchor_sensor_pairs)
    {
      EXPECT_LT(k, 3);
      EXPECT_GE(j, 3);
    }
    for (auto [i, j] : ve.sensor_pairs)
    {
      EXPECT_GE(std::min(i, j), 3);
    }
  }
}

TEST(Virtual, Fan)
{
  for (int k = 1; k <= 6; ++k)
  {
    Triangulation fan;
    fan.points.push_back(pt(0.5, 0.0));
    for (int r = 0; r <= k; ++r)
    {
      const double angle = M_PI * (0.1 + 0.8 * r / k);
      fan.points.push_back(pt(0.5 + 0.4 * std::cos(angle), 0.4 * std::sin(angle)));
    }
    for (int r = 1; r <= k; ++r)
    {
      fan.triangles.push_back({0, r, r + 1});
    }
    const auto ve = as_set(virtual_edges(fan));
    std::set<Pair> expect;
    for (int r = 1; r + 2 <= k + 1; ++r)
    {
      expect.insert({r, r + 2});
    }
    EXPECT_EQ(ve.size(), static_cast<std::size_t>(k - 1));
    EXPECT_EQ(ve, expect);
    EXPECT_EQ(ve, brute_force_virtual(fan));
  }
}

TEST(Objective, TwoTrianglesAndTruthValue)
{
  const auto tri = two_triangles();
  const auto obj = virtual_edge_objective(tri);
  ASSERT_EQ(obj.terms.size(), 1u);
  EXPECT_EQ(obj.terms[0].kind, EdgeKind::AnchorSensor);
  EXPECT_EQ(obj.terms[0].i, 2);
  EXPECT_EQ(obj.terms[0].j, 0);

  const auto big = build_incremental_triangulation(14, 4);
  const auto inst = triangulation_instance(big);
  const auto p = assemble_relaxation(inst, virtual_edge_objective(big));
  double expect = 0.0;
  for (auto [i, j] : virtual_edges(big).all())
  {
    expect += (big.points[i] - big.points[j]).squaredNorm();
  }
  EXPECT_NEAR(p.primal_objective(lifted_matrix(*inst.sensor_truth(), 2)), expect, 1e-12);
}

TEST(Localize, TwoTrianglesRejectsFold)
{
  const auto tri = two_triangles();
  const Point truth = tri.points[3];
  const Point fold = snl::test::reflect(truth, tri.points[0], tri.points[1]);
  ASSERT_GT((truth - tri.points[2]).norm(), (fold - tri.points[2]).norm());
  const auto res = localize_triangulation(tri);
  ASSERT_TRUE(res.solution.converged());
  EXPECT_EQ(res.solution.rank_Z, 2);
  const Point x = res.solution.X.col(0);
  EXPECT_LE((x - truth).norm(), 1e-5);
}

TEST(Localize, RandomTriangulations)
{
  for (std::uint64_t seed = 1; seed <= 8; ++seed)
  {
    const auto tri = build_incremental_triangulation(10, seed);
    const auto res = localize_triangulation(tri);
    ASSERT_TRUE(res.solution.converged()) << "seed " << seed;
    EXPECT_EQ(res.solution.rank_Z, 2);
    const auto inst = triangulation_instance(tri);
    EXPECT_LE(rmsd(extract_positions(res.solution).positions, *inst.sensor_truth()), 1e-4);
  }
}

TEST(Stress, SquareK4)
{
  const std::vector<Point> sq{pt(0, 0), pt(1, 0), pt(1, 1), pt(0, 1)};
  // Sides 0-1, 1-2, 2-3, 0-3; diagonals 0-2, 1-3.
  const auto w = equilibrium_stress(sq, kK4);
  ASSERT_EQ(w.size(), 6u);
  // Equilibrium at corner 0 gives w01 = w03 = -w02; the other corners follow by symmetry.
  const std::vector<double> expect{1, -1, 1, 1, -1, 1};
  const double s = w[0];
  for (int e = 0; e < 6; ++e)
  {
    EXPECT_NEAR(w[e], s * expect[e], 1e-12) << e;
  }
  EXPECT_LE(equilibrium_residual(sq, kK4, w), 1e-12);
}

TEST(Stress, TriangleHasNone)
{
  std::mt19937_64 rng(3);
  const auto pts = snl::test::uniform_points(3, rng);
  EXPECT_TRUE(equilibrium_stress(pts, {{0, 1}, {0, 2}, {1, 2}}).empty());
}

TEST(Stress, GenericK4IsRankOne)
{
  std::mt19937_64 rng(11);
  for (int t = 0; t < 20; ++t)
  {
    const auto pts = snl::test::uniform_points(4, rng);
    const auto w = equilibrium_stress(pts, kK4);
    ASSERT_EQ(w.size(), 6u);
    EXPECT_LE(equilibrium_residual(pts, kK4, w), 1e-9);
    const Eigen::Vector4d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix4d>(stress_matrix(kK4, w)).eigenvalues();
    const double scale = ev.cwiseAbs().maxCoeff();
    int nonzero = 0;
    for (int k = 0; k < 4; ++k)
    {
      nonzero += std::abs(ev[k]) > 1e-9 * scale ? 1 : 0;
    }
    EXPECT_EQ(nonzero, 1);
  }
}

TEST(Stress, FixedPointsRelaxEquilibrium)
{
  const std::vector<Point> pts{pt(0, 0), pt(1, 0), pt(0.3, 0.8)};
  const std::vector<Pair> edges{{0, 1}, {0, 2}, {1, 2}};
  EXPECT_FALSE(equilibrium_stress(pts, edges, {1, 1, 0}).empty());
  EXPECT_THROW(equilibrium_stress(pts, edges, {1, 1}), InvalidInput);
  EXPECT_THROW(equilibrium_residual(pts, edges, {1.0}), InvalidInput);
}

TEST(Certificate, TwoTrianglesEntry)
{
  const auto tri = two_triangles();
  const auto cert = build_dual_certificate_inductively(tri, tri.points);
  ASSERT_TRUE(cert.ok) << (cert.diagnostics.empty() ? "" : cert.diagnostics[0]);
  ASSERT_EQ(cert.certificate.w.size(), 2u);
  const double entry = cert.certificate.U(2, 2);
  EXPECT_NEAR(entry, -1.0 + cert.certificate.w[0] + cert.certificate.w[1], 1e-12);
  EXPECT_GT(entry, 0.0);
  EXPECT_GT(cert.lambda_min_u22, 0.0);
}

TEST(Certificate, RandomTriangulations)
{
  for (std::uint64_t seed = 1; seed <= 10; ++seed)
  {
    const auto tri = build_incremental_triangulation(10, seed);
    const auto cert = build_dual_certificate_inductively(tri, tri.points);
    EXPECT_TRUE(cert.ok) << "seed " << seed;
    EXPECT_GT(cert.lambda_min_u22, 0.0);
    EXPECT_LE(cert.complementarity, 1e-8);
    EXPECT_LE(cert.structure_residual, 1e-8);
    EXPECT_EQ(cert.certificate.rank_U, tri.size() - 3);
    const Eigen::VectorXd ev = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(cert.certificate.U).eigenvalues();
    EXPECT_GE(ev.minCoeff(), -1e-9 * ev.cwiseAbs().maxCoeff());
  }
}

TEST(Certificate, RejectsShortPositionList)
{
  const auto tri = build_incremental_triangulation(10, 3);
  EXPECT_THROW(build_dual_certificate_inductively(tri, {tri.points.begin(), tri.points.begin() + 5}), InvalidInput);
}

TEST(Json, RoundTrip)
{
  const auto tri = build_incremental_triangulation(9, 21);
  const auto back = triangulation_from_json(triangulation_to_json(tri));
  EXPECT_EQ(back.triangles, tri.triangles);
  ASSERT_EQ(back.actions.size(), tri.actions.size());
  for (std::size_t k = 0; k < tri.actions.size(); ++k)
  {
    EXPECT_EQ(back.actions[k].kind, tri.actions[k].kind);
    EXPECT_EQ(back.actions[k].point, tri.actions[k].point);
  }
  for (int p = 0; p < tri.size(); ++p)
  {
    EXPECT_EQ(back.points[p], tri.points[p]);
  }
  EXPECT_EQ(triangulation_to_json(back), triangulation_to_json(tri));
  EXPECT_THROW(triangulation_from_json("{\"dimension\": 2}"), ParseError);
}
