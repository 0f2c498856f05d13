#include "snl/triangulation.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <random>
#include <set>

namespace snl
{
namespace
{

using Edge = std::pair<int, int>;

Edge key(int i, int j)
{
  return i < j ? Edge{i, j} : Edge{j, i};
}

double orient(const Point& a, const Point& b, const Point& c)
{
  return (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
}

bool proper_cross(const Point& p1, const Point& p2, const Point& q1, const Point& q2)
{
  const double d1 = orient(p1, p2, q1);
  const double d2 = orient(p1, p2, q2);
  const double d3 = orient(q1, q2, p1);
  const double d4 = orient(q1, q2, p2);
  return ((d1 > 0 && d2 < 0) || (d1 < 0 && d2 > 0)) && ((d3 > 0 && d4 < 0) || (d3 < 0 && d4 > 0));
}

bool strictly_inside(const Point& p, const Point& a, const Point& b, const Point& c)
{
  const double s = orient(a, b, c) > 0 ? 1.0 : -1.0;
  return s * orient(a, b, p) > 0 && s * orient(b, c, p) > 0 && s * orient(c, a, p) > 0;
}

// Growing triangulation with its boundary kept as a counter-clockwise cycle.
class Builder
{
public:
  Builder(std::vector<Point> points, double min_area) : min_area_(min_area)
  {
    tri_.points = std::move(points);
    const auto& p = tri_.points;
    if (p.size() < 3)
    {
      throw InvalidInput("a triangulation needs at least 3 points");
    }
    for (const auto& q : p)
    {
      if (q.size() != 2 || !q.allFinite())
      {
        throw InvalidInput("triangulation points must be finite and planar");
      }
    }
    if (std::abs(orient(p[0], p[1], p[2])) / 2 < min_area_)
    {
      throw InvalidInput("initial triangle is degenerate");
    }
    cycle_ = orient(p[0], p[1], p[2]) > 0 ? std::vector<int>{0, 1, 2} : std::vector<int>{0, 2, 1};
    add_triangle(0, 1, 2);
    placed_ = 3;
  }

  int placed() const { return placed_; }
  void move_unplaced(int p, const Point& where) { tri_.points[p] = where; }
  const std::vector<int>& cycle() const { return cycle_; }
  const Triangulation& result() const { return tri_; }
  Triangulation take() { return std::move(tri_); }

  // Empty string when legal, otherwise the reason.
  std::string check_add(int p, int g, int h) const
  {
    const auto& pts = tri_.points;
    const int pos = boundary_position(g, h);
    if (pos < 0)
    {
      return "edge is not on the boundary in counter-clockwise order";
    }
    if (orient(pts[g], pts[h], pts[p]) >= 0)
    {
      return "new point is not outside the boundary edge";
    }
    if (std::abs(orient(pts[g], pts[h], pts[p])) / 2 < min_area_)
    {
      return "new triangle is degenerate";
    }
    for (const auto& t : tri_.triangles)
    {
      if (strictly_inside(pts[p], pts[t[0]], pts[t[1]], pts[t[2]]))
      {
        return "new point lies inside the triangulation";
      }
    }
    return check_triangle(g, h, p, {{p, g}, {p, h}});
  }

  std::string check_connect(int v) const
  {
    const auto it = std::find(cycle_.begin(), cycle_.end(), v);
    if (v >= placed_ || it == cycle_.end())
    {
      return "point is not on the boundary";
    }
    const int k = static_cast<int>(it - cycle_.begin());
    const int n = static_cast<int>(cycle_.size());
    const int u = cycle_[(k + n - 1) % n];
    const int w = cycle_[(k + 1) % n];
    const auto& pts = tri_.points;
    if (orient(pts[u], pts[v], pts[w]) >= 0)
    {
      return "boundary vertex is not reflex";
    }
    if (std::abs(orient(pts[u], pts[v], pts[w])) / 2 < min_area_)
    {
      return "new triangle is degenerate";
    }
    if (has_edge(u, w))
    {
      return "points are already connected";
    }
    return check_triangle(u, v, w, {{u, w}});
  }

  void add(int p, int g, int h)
  {
    const int pos = boundary_position(g, h);
    cycle_.insert(cycle_.begin() + pos + 1, p);
    add_triangle(g, h, p);
    tri_.actions.push_back({ActionKind::AddPoint, p, g, h});
    ++placed_;
  }

  void connect(int v)
  {
    const auto it = std::find(cycle_.begin(), cycle_.end(), v);
    const int k = static_cast<int>(it - cycle_.begin());
    const int n = static_cast<int>(cycle_.size());
    const int u = cycle_[(k + n - 1) % n];
    const int w = cycle_[(k + 1) % n];
    cycle_.erase(it);
    add_triangle(u, v, w);
    tri_.actions.push_back({ActionKind::ConnectPair, v, u, w});
  }

  std::vector<int> reflex_vertices() const
  {
    std::vector<int> out;
    for (int v : cycle_)
    {
      if (check_connect(v).empty())
      {
        out.push_back(v);
      }
    }
    return out;
  }

  bool convex() const
  {
    const int n = static_cast<int>(cycle_.size());
    const auto& pts = tri_.points;
    for (int k = 0; k < n; ++k)
    {
      if (orient(pts[cycle_[(k + n - 1) % n]], pts[cycle_[k]], pts[cycle_[(k + 1) % n]]) <= 0)
      {
        return false;
      }
    }
    return true;
  }

private:
  bool has_edge(int i, int j) const { return edges_.count(key(i, j)) > 0; }

  int boundary_position(int g, int h) const
  {
    const int n = static_cast<int>(cycle_.size());
    for (int k = 0; k < n; ++k)
    {
      if (cycle_[k] == g && cycle_[(k + 1) % n] == h)
      {
        return k;
      }
    }
    return -1;
  }

  std::string check_triangle(int a, int b, int c, const std::vector<Edge>& fresh) const
  {
    const auto& pts = tri_.points;
    for (int q = 0; q < placed_; ++q)
    {
      if (q != a && q != b && q != c && strictly_inside(pts[q], pts[a], pts[b], pts[c]))
      {
        return "new triangle contains point " + std::to_string(q);
      }
    }
    for (const auto& [s, t] : fresh)
    {
      for (const auto& e : edges_)
      {
        if (e.first == s || e.first == t || e.second == s || e.second == t)
        {
          continue;
        }
        if (proper_cross(pts[s], pts[t], pts[e.first], pts[e.second]))
        {
          return "new edge crosses an existing edge";
        }
      }
    }
    return {};
  }

  void add_triangle(int a, int b, int c)
  {
    tri_.triangles.push_back({a, b, c});
    edges_.insert(key(a, b));
    edges_.insert(key(b, c));
    edges_.insert(key(a, c));
  }

  double min_area_;
  Triangulation tri_;
  std::vector<int> cycle_;
  std::set<Edge> edges_;
  int placed_ = 0;
};

std::map<Edge, std::vector<int>> edge_triangles(const Triangulation& tri)
{
  std::map<Edge, std::vector<int>> out;
  for (int t = 0; t < static_cast<int>(tri.triangles.size()); ++t)
  {
    const auto& v = tri.triangles[t];
    for (int k = 0; k < 3; ++k)
    {
      out[key(v[k], v[(k + 1) % 3])].push_back(t);
    }
  }
  return out;
}

int opposite(const std::array<int, 3>& t, const Edge& e)
{
  for (int v : t)
  {
    if (v != e.first && v != e.second)
    {
      return v;
    }
  }
  return -1;
}

double hull_area(std::vector<Point> pts)
{
  std::sort(pts.begin(), pts.end(), [](const Point& a, const Point& b) {
    return a[0] < b[0] || (a[0] == b[0] && a[1] < b[1]);
  });
  std::vector<Point> h;
  for (int pass = 0; pass < 2; ++pass)
  {
    const std::size_t start = h.size();
    for (const auto& p : pts)
    {
      while (h.size() >= start + 2 && orient(h[h.size() - 2], h.back(), p) <= 0)
      {
        h.pop_back();
      }
      h.push_back(p);
    }
    h.pop_back();
    std::reverse(pts.begin(), pts.end());
  }
  double area = 0.0;
  for (std::size_t k = 0; k < h.size(); ++k)
  {
    const auto& a = h[k];
    const auto& b = h[(k + 1) % h.size()];
    area += a[0] * b[1] - a[1] * b[0];
  }
  return area / 2;
}

// Singular values of the equilibrium system, largest first, and its right singular vectors.
struct EquilibriumSvd
{
  Eigen::VectorXd singular;
  Eigen::MatrixXd v;
};

EquilibriumSvd equilibrium_svd(const std::vector<Point>& points, const std::vector<Edge>& edges,
                               const std::vector<char>& fixed)
{
  const int n = static_cast<int>(points.size());
  const int d = n > 0 ? static_cast<int>(points[0].size()) : 0;
  std::vector<int> row_of(n, -1);
  int rows = 0;
  for (int i = 0; i < n; ++i)
  {
    if (fixed.empty() || !fixed[i])
    {
      row_of[i] = rows;
      rows += d;
    }
  }
  Eigen::MatrixXd r = Eigen::MatrixXd::Zero(std::max(rows, 1), static_cast<Eigen::Index>(edges.size()));
  for (std::size_t e = 0; e < edges.size(); ++e)
  {
    const auto [i, j] = edges[e];
    if (i < 0 || j < 0 || i >= n || j >= n || i == j)
    {
      throw InvalidInput("stress edge index out of range");
    }
    const Point diff = points[i] - points[j];
    if (row_of[i] >= 0)
    {
      r.block(row_of[i], e, d, 1) += diff;
    }
    if (row_of[j] >= 0)
    {
      r.block(row_of[j], e, d, 1) -= diff;
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(r, Eigen::ComputeFullV);
  return {svd.singularValues(), svd.matrixV()};
}

// Stress matrix: off-diagonal -w_ij, diagonal the row sums of w.
Eigen::MatrixXd stress_matrix(int size, const std::vector<Edge>& edges, const std::vector<double>& w)
{
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(size, size);
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

// Null-space dimension and the ratio of the smallest retained singular value to the largest.
std::pair<int, double> stress_space(const EquilibriumSvd& s, std::size_t n_edges, double conditioning)
{
  const double top = s.singular.size() > 0 ? s.singular[0] : 0.0;
  int rank = 0;
  double smallest = top;
  for (Eigen::Index k = 0; k < s.singular.size(); ++k)
  {
    if (s.singular[k] > conditioning * top)
    {
      ++rank;
      smallest = s.singular[k];
    }
  }
  return {static_cast<int>(n_edges) - rank, top > 0 ? smallest / top : 0.0};
}

void generic_k4_check(const Triangulation& tri, const TriangulationOptions& options, bool& ok)
{
  for (const auto& [e, ts] : edge_triangles(tri))
  {
    if (ts.size() != 2)
    {
      continue;
    }
    const int c = opposite(tri.triangles[ts[0]], e);
    const int d = opposite(tri.triangles[ts[1]], e);
    const std::vector<Point> pts{tri.points[c], tri.points[e.first], tri.points[e.second], tri.points[d]};
    const std::vector<Edge> k4{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    const auto [nullity, cond] = stress_space(equilibrium_svd(pts, k4, {}), k4.size(), 1e-9);
    if (nullity != 1 || cond < options.min_stress_conditioning)
    {
      ok = false;
      return;
    }
  }
}

}  // namespace

std::vector<std::pair<int, int>> Triangulation::edges() const
{
  std::set<Edge> s;
  for (const auto& t : triangles)
  {
    for (int k = 0; k < 3; ++k)
    {
      s.insert(key(t[k], t[(k + 1) % 3]));
    }
  }
  return {s.begin(), s.end()};
}

bool Triangulation::has_edge(int i, int j) const
{
  const Edge e = key(i, j);
  for (const auto& t : triangles)
  {
    int hits = 0;
    for (int v : t)
    {
      hits += (v == e.first || v == e.second) ? 1 : 0;
    }
    if (hits == 2)
    {
      return true;
    }
  }
  return false;
}

Triangulation build_incremental_triangulation(int n_points, std::uint64_t seed, const TriangulationOptions& options)
{
  if (n_points < 3)
  {
    throw InvalidInput("a triangulation needs at least 3 points");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  auto random_point = [&] {
    Point p(2);
    p << unit(rng), unit(rng);
    return p;
  };

  for (int attempt = 0; attempt < options.max_attempts; ++attempt)
  {
    std::vector<Point> pts;
    for (int k = 0; k < 3; ++k)
    {
      pts.push_back(random_point());
    }
    // Generous first triangle so the anchor frame is well conditioned.
    if (std::abs(orient(pts[0], pts[1], pts[2])) / 2 < std::max(options.min_area, 0.05))
    {
      continue;
    }
    pts.resize(n_points, Point::Zero(2));
    Builder builder(pts, options.min_area);
    bool stuck = false;

    while (builder.placed() < n_points && !stuck)
    {
      const auto reflex = builder.reflex_vertices();
      if (!reflex.empty() && unit(rng) < 0.25)
      {
        builder.connect(reflex[std::uniform_int_distribution<std::size_t>(0, reflex.size() - 1)(rng)]);
        continue;
      }
      // Sample the new point in a box beside a random boundary edge.
      const auto& cyc = builder.cycle();
      bool placed = false;
      for (int tries = 0; tries < 200 && !placed; ++tries)
      {
        const std::size_t k = std::uniform_int_distribution<std::size_t>(0, cyc.size() - 1)(rng);
        const int g = cyc[k];
        const int h = cyc[(k + 1) % cyc.size()];
        const Point& pg = builder.result().points[g];
        const Point& ph = builder.result().points[h];
        const Point mid = (pg + ph) / 2;
        const Point along = ph - pg;
        Point outward(2);
        outward << along[1], -along[0];
        const int p = builder.placed();
        builder.move_unplaced(p, mid + unit(rng) * 0.8 * outward + (unit(rng) - 0.5) * along);
        if (builder.check_add(p, g, h).empty())
        {
          builder.add(p, g, h);
          placed = true;
        }
      }
      stuck = !placed;
    }
    if (stuck)
    {
      continue;
    }
    while (!builder.convex() && !stuck)
    {
      const auto reflex = builder.reflex_vertices();
      if (reflex.empty())
      {
        stuck = true;
        break;
      }
      builder.connect(reflex[std::uniform_int_distribution<std::size_t>(0, reflex.size() - 1)(rng)]);
    }
    if (stuck)
    {
      continue;
    }
    Triangulation tri = builder.take();
    bool ok = true;
    generic_k4_check(tri, options, ok);
    if (ok)
    {
      return tri;
    }
  }
  throw InvalidInput("could not generate a generic triangulation with " + std::to_string(n_points) + " points");
}

Triangulation replay_actions(const std::vector<Point>& points, const std::vector<TriangulationAction>& actions,
                             double min_area)
{
  Builder builder(points, min_area);
  for (std::size_t k = 0; k < actions.size(); ++k)
  {
    const auto& a = actions[k];
    std::string why;
    if (a.kind == ActionKind::AddPoint)
    {
      if (a.point != builder.placed() || a.point >= static_cast<int>(points.size()))
      {
        why = "points must be added in index order";
      }
      else
      {
        why = builder.check_add(a.point, a.a, a.b);
      }
      if (why.empty())
      {
        builder.add(a.point, a.a, a.b);
      }
    }
    else
    {
      why = builder.check_connect(a.point);
      if (why.empty())
      {
        builder.connect(a.point);
        const auto& last = builder.result().actions.back();
        if (key(last.a, last.b) != key(a.a, a.b))
        {
          why = "connected pair does not match the boundary neighbors";
        }
      }
    }
    if (!why.empty())
    {
      throw InvalidInput("action " + std::to_string(k) + " is illegal: " + why);
    }
  }
  if (builder.placed() != static_cast<int>(points.size()))
  {
    throw InvalidInput("actions place " + std::to_string(builder.placed()) + " of " +
                       std::to_string(points.size()) + " points");
  }
  return builder.take();
}

void validate_triangulation(const Triangulation& tri, double min_area)
{
  const auto& pts = tri.points;
  const int n = tri.size();
  double area = 0.0;
  for (const auto& t : tri.triangles)
  {
    for (int v : t)
    {
      if (v < 0 || v >= n)
      {
        throw InvalidInput("triangle index out of range");
      }
    }
    const double a = std::abs(orient(pts[t[0]], pts[t[1]], pts[t[2]])) / 2;
    if (a < min_area)
    {
      throw InvalidInput("degenerate triangle");
    }
    area += a;
    for (int q = 0; q < n; ++q)
    {
      if (q != t[0] && q != t[1] && q != t[2] && strictly_inside(pts[q], pts[t[0]], pts[t[1]], pts[t[2]]))
      {
        throw InvalidInput("point " + std::to_string(q) + " lies inside a triangle");
      }
    }
  }
  const auto edges = tri.edges();
  for (std::size_t a = 0; a < edges.size(); ++a)
  {
    for (std::size_t b = a + 1; b < edges.size(); ++b)
    {
      const auto& e = edges[a];
      const auto& f = edges[b];
      if (e.first == f.first || e.first == f.second || e.second == f.first || e.second == f.second)
      {
        continue;
      }
      if (proper_cross(pts[e.first], pts[e.second], pts[f.first], pts[f.second]))
      {
        throw InvalidInput("edges cross");
      }
    }
  }
  const double hull = hull_area(pts);
  if (std::abs(area - hull) > 1e-9 * std::max(1.0, hull))
  {
    throw InvalidInput("triangles do not cover the convex hull");
  }
  for (const auto& [e, ts] : edge_triangles(tri))
  {
    if (ts.size() > 2)
    {
      throw InvalidInput("edge shared by more than two triangles");
    }
  }
}

std::vector<std::pair<int, int>> VirtualEdgeSet::all() const
{
  std::vector<std::pair<int, int>> out(sensor_pairs);
  out.insert(out.end(), anchor_sensor_pairs.begin(), anchor_sensor_pairs.end());
  std::sort(out.begin(), out.end());
  return out;
}

VirtualEdgeSet virtual_edges(const Triangulation& tri)
{
  std::set<Edge> edges;
  for (const auto& e : tri.edges())
  {
    edges.insert(e);
  }
  std::set<Edge> found;
  for (const auto& [e, ts] : edge_triangles(tri))
  {
    if (ts.size() != 2)
    {
      continue;
    }
    const Edge pair = key(opposite(tri.triangles[ts[0]], e), opposite(tri.triangles[ts[1]], e));
    if (!edges.count(pair))
    {
      found.insert(pair);
    }
  }
  const std::set<int> anchors(tri.anchor_indices.begin(), tri.anchor_indices.end());
  VirtualEdgeSet out;
  for (const auto& p : found)
  {
    const bool a1 = anchors.count(p.first) > 0;
    const bool a2 = anchors.count(p.second) > 0;
    if (!a1 && !a2)
    {
      out.sensor_pairs.push_back(p);
    }
    else if (a1 != a2)
    {
      out.anchor_sensor_pairs.push_back(a1 ? p : Edge{p.second, p.first});
    }
  }
  return out;
}

NetworkInstance triangulation_instance(const Triangulation& tri)
{
  if (tri.anchor_indices != std::vector<int>{0, 1, 2})
  {
    throw InvalidInput("triangulation instances use points 0, 1, 2 as anchors");
  }
  if (tri.size() < 4)
  {
    throw InvalidInput("a triangulation instance needs at least one sensor");
  }
  std::vector<Point> anchors(tri.points.begin(), tri.points.begin() + 3);
  std::vector<Point> sensors(tri.points.begin() + 3, tri.points.end());
  std::vector<EdgeMeasurement> edges;
  for (const auto& [i, j] : tri.edges())
  {
    if (j < 3)
    {
      continue;
    }
    const double dist = (tri.points[i] - tri.points[j]).norm();
    if (i < 3)
    {
      edges.push_back({i, j - 3, EdgeKind::AnchorSensor, dist});
    }
    else
    {
      edges.push_back({i - 3, j - 3, EdgeKind::SensorSensor, dist});
    }
  }
  return NetworkInstance(2, std::move(anchors), tri.size() - 3, std::move(edges), std::move(sensors));
}

ObjectiveSpec virtual_edge_objective(const Triangulation& tri)
{
  const auto ve = virtual_edges(tri);
  ObjectiveSpec obj;
  for (const auto& [i, j] : ve.sensor_pairs)
  {
    obj.terms.push_back({EdgeKind::SensorSensor, i - 3, j - 3, 1, 1.0});
  }
  for (const auto& [k, j] : ve.anchor_sensor_pairs)
  {
    obj.terms.push_back({EdgeKind::AnchorSensor, k, j - 3, 1, 1.0});
  }
  return obj;
}

SolveResult localize_triangulation(const Triangulation& tri, const SolveOptions& options)
{
  return solve(assemble_relaxation(triangulation_instance(tri), virtual_edge_objective(tri)), options);
}

std::vector<double> equilibrium_stress(const std::vector<Point>& points, const std::vector<std::pair<int, int>>& edges,
                                       const std::vector<char>& fixed, double conditioning)
{
  if (!fixed.empty() && fixed.size() != points.size())
  {
    throw InvalidInput("fixed mask must have one entry per point");
  }
  if (edges.empty())
  {
    return {};
  }
  const auto s = equilibrium_svd(points, edges, fixed);
  const auto [nullity, cond] = stress_space(s, edges.size(), conditioning);
  (void)cond;
  if (nullity < 1)
  {
    return {};
  }
  const Eigen::VectorXd w = s.v.col(static_cast<Eigen::Index>(edges.size()) - 1);
  Eigen::Index big = 0;
  w.cwiseAbs().maxCoeff(&big);
  const Eigen::VectorXd scaled = w / w[big];
  return {scaled.data(), scaled.data() + scaled.size()};
}

double equilibrium_residual(const std::vector<Point>& points, const std::vector<std::pair<int, int>>& edges,
                            const std::vector<double>& stress, const std::vector<char>& fixed)
{
  if (stress.size() != edges.size())
  {
    throw InvalidInput("one stress value per edge is required");
  }
  const int n = static_cast<int>(points.size());
  std::vector<Point> force(n, Point::Zero(points.empty() ? 0 : points[0].size()));
  for (std::size_t e = 0; e < edges.size(); ++e)
  {
    const auto [i, j] = edges[e];
    force[i] += stress[e] * (points[i] - points[j]);
    force[j] += stress[e] * (points[j] - points[i]);
  }
  double worst = 0.0;
  for (int i = 0; i < n; ++i)
  {
    if (fixed.empty() || !fixed[i])
    {
      worst = std::max(worst, force[i].norm());
    }
  }
  return worst;
}

InductiveCertificate build_dual_certificate_inductively(const Triangulation& tri, const std::vector<Point>& positions,
                                                        const TriangulationOptions& options)
{
  const int N = tri.size();
  if (static_cast<int>(positions.size()) != N)
  {
    throw InvalidInput("positions must cover every triangulation point");
  }
  const NetworkInstance inst = triangulation_instance(tri);
  const int d = 2;
  const int n = N - 3;
  const auto ve = virtual_edges(tri);
  std::set<Edge> virtual_set;
  for (const auto& p : ve.all())
  {
    virtual_set.insert(key(p.first, p.second));
  }
  const auto tris = edge_triangles(tri);

  // Each virtual pair gets -1 in total, split across the 4-cliques that share it.
  std::map<Edge, int> multiplicity;
  for (const auto& [e, ts] : tris)
  {
    if (ts.size() == 2)
    {
      const Edge p = key(opposite(tri.triangles[ts[0]], e), opposite(tri.triangles[ts[1]], e));
      if (virtual_set.count(p))
      {
        ++multiplicity[p];
      }
    }
  }

  InductiveCertificate out;
  out.ok = true;
  out.omega = Eigen::MatrixXd::Zero(N, N);
  for (const auto& [e, ts] : tris)
  {
    if (ts.size() != 2)
    {
      continue;
    }
    // Triangle t > 0 is produced by action t - 1.
    const int action = std::max(ts[0], ts[1]) - 1;
    const int c = opposite(tri.triangles[ts[0]], e);
    const int k = opposite(tri.triangles[ts[1]], e);
    const std::vector<int> ids{c, e.first, e.second, k};
    const std::vector<Point> pts{positions[c], positions[e.first], positions[e.second], positions[k]};
    const std::vector<Edge> k4{{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}, {2, 3}};
    const auto s = equilibrium_svd(pts, k4, {});
    const auto [nullity, cond] = stress_space(s, k4.size(), 1e-9);
    if (nullity != 1 || cond < options.min_stress_conditioning)
    {
      out.ok = false;
      out.diagnostics.push_back("action " + std::to_string(action) + ": 4-clique stress is not generic");
      continue;
    }
    std::vector<double> w(6);
    for (int q = 0; q < 6; ++q)
    {
      w[q] = s.v(q, 5);
    }
    const double w_pair = w[2];  // stress on (c, k)
    if (std::abs(w_pair) < 1e-12)
    {
      out.ok = false;
      out.diagnostics.push_back("action " + std::to_string(action) + ": zero stress on the opposite pair");
      continue;
    }
    const Edge pair = key(c, k);
    const bool is_virtual = virtual_set.count(pair) > 0;
    double scale = -1.0 / w_pair;
    if (is_virtual)
    {
      scale /= multiplicity[pair];
    }
    Eigen::MatrixXd omega0 = stress_matrix(4, k4, w) * scale;
    const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(omega0);
    const double spread = eig.eigenvalues().cwiseAbs().maxCoeff();
    if (eig.eigenvalues().minCoeff() < -1e-9 * spread)
    {
      if (is_virtual)
      {
        out.ok = false;
        out.diagnostics.push_back("action " + std::to_string(action) +
                                  ": stress normalized to -1 on the virtual edge is not PSD");
        continue;
      }
      // Opposite pair already measured: any PSD multiple is admissible.
      omega0 = -omega0;
    }
    for (int a = 0; a < 4; ++a)
    {
      for (int b = 0; b < 4; ++b)
      {
        out.omega(ids[a], ids[b]) += omega0(a, b);
      }
    }
  }

  // Lift to the SDP variable: anchor rows (a_k; 0), sensor rows (0; e_j).
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(N, d + n);
  for (int a = 0; a < 3; ++a)
  {
    q.block(a, 0, 1, d) = positions[a].transpose();
  }
  for (int j = 0; j < n; ++j)
  {
    q(3 + j, d + j) = 1.0;
  }
  DualCertificate& cert = out.certificate;
  cert.dimension = d;
  cert.U = q.transpose() * out.omega * q;
  cert.scale = cert.U.operatorNorm();
  cert.rank_U = cert.scale > 0 ? numerical_rank(cert.U / cert.scale, SolveOptions{}.rank_tol) : 0;

  const Eigen::MatrixXd u22 = cert.U.bottomRightCorner(n, n);
  out.lambda_min_u22 = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(u22).eigenvalues().minCoeff();
  std::vector<Point> sensors(positions.begin() + 3, positions.end());
  out.complementarity = std::abs((lifted_matrix(sensors, d).array() * cert.U.array()).sum());
  cert.complementarity = out.complementarity;

  // Read multipliers off the stress and rebuild U in the virtual-edge dual form.
  const SdpProblem problem = assemble_relaxation(inst, virtual_edge_objective(tri));
  cert.V = Eigen::MatrixXd::Zero(d, d);
  for (int a = 0; a < 3; ++a)
  {
    for (int b = a + 1; b < 3; ++b)
    {
      const Point diff = positions[a] - positions[b];
      cert.V += -out.omega(a, b) * diff * diff.transpose();
    }
  }
  Eigen::MatrixXd rebuilt = Eigen::MatrixXd::Zero(d + n, d + n);
  rebuilt.topLeftCorner(d, d) = cert.V;
  for (const auto& edge : inst.edges())
  {
    const int i = edge.kind == EdgeKind::SensorSensor ? edge.i + 3 : edge.i;
    const double mult = -out.omega(i, edge.j + 3);
    (edge.kind == EdgeKind::SensorSensor ? cert.y : cert.w).push_back(mult);
    rebuilt += mult * problem.pair_matrix(edge.kind, edge.i, edge.j).dense(d + n);
  }
  rebuilt -= problem.objective_matrix;
  double structure = (rebuilt - cert.U).cwiseAbs().maxCoeff();
  for (int i = 0; i < N; ++i)
  {
    for (int j = i + 1; j < N; ++j)
    {
      const Edge p{i, j};
      if (virtual_set.count(p))
      {
        structure = std::max(structure, std::abs(-out.omega(i, j) + 1.0));
      }
      else if (!tri.has_edge(i, j))
      {
        structure = std::max(structure, std::abs(out.omega(i, j)));
      }
    }
  }
  out.structure_residual = structure;

  if (!(out.lambda_min_u22 > 0.0))
  {
    out.ok = false;
    out.diagnostics.push_back("U22 is not positive definite");
  }
  if (out.complementarity > 1e-8)
  {
    out.ok = false;
    out.diagnostics.push_back("Z . U exceeds 1e-8");
  }
  if (out.structure_residual > 1e-8)
  {
    out.ok = false;
    out.diagnostics.push_back("U does not have the virtual-edge dual form");
  }
  return out;
}

std::string triangulation_to_json(const Triangulation& tri)
{
  auto j = nlohmann::json::parse(to_json_string(triangulation_instance(tri)));
  nlohmann::json actions = nlohmann::json::array();
  for (const auto& a : tri.actions)
  {
    actions.push_back({{"kind", a.kind == ActionKind::AddPoint ? "add" : "connect"},
                       {"point", a.point},
                       {"a", a.a},
                       {"b", a.b}});
  }
  j["actions"] = actions;
  nlohmann::json ve = nlohmann::json::array();
  for (const auto& [a, b] : virtual_edges(tri).all())
  {
    ve.push_back({a, b});
  }
  j["virtual_edges"] = ve;
  return j.dump(2);
}

Triangulation triangulation_from_json(const std::string& text)
{
  const NetworkInstance inst = instance_from_json_string(text);
  if (!inst.sensor_truth())
  {
    throw ParseError("triangulation files must carry sensor positions");
  }
  nlohmann::json j;
  try
  {
    j = nlohmann::json::parse(text);
  }
  catch (const nlohmann::json::exception& e)
  {
    throw ParseError(e.what());
  }
  if (!j.contains("actions") || !j["actions"].is_array())
  {
    throw ParseError("missing field \"actions\"");
  }
  std::vector<Point> points(inst.anchors());
  points.insert(points.end(), inst.sensor_truth()->begin(), inst.sensor_truth()->end());
  std::vector<TriangulationAction> actions;
  try
  {
    for (const auto& a : j["actions"])
    {
      const std::string kind = a.at("kind").get<std::string>();
      if (kind != "add" && kind != "connect")
      {
        throw ParseError("field \"actions.kind\" must be \"add\" or \"connect\"");
      }
      actions.push_back({kind == "add" ? ActionKind::AddPoint : ActionKind::ConnectPair, a.at("point").get<int>(),
                         a.at("a").get<int>(), a.at("b").get<int>()});
    }
  }
  catch (const nlohmann::json::exception& e)
  {
    throw ParseError(std::string("field \"actions\": ") + e.what());
  }
  return replay_actions(points, actions);
}

}  // namespace snl
