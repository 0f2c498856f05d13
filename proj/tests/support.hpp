#pragma once

#include "snl/network.hpp"

#include <cstdint>
#include <random>
#include <vector>

namespace snl::test
{

inline Point pt(double x, double y)
{
  Point p(2);
  p << x, y;
  return p;
}

inline std::vector<Point> uniform_points(int count, std::mt19937_64& rng)
{
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Point> out;
  for (int k = 0; k < count; ++k)
  {
    const double x = u(rng);
    out.push_back(pt(x, u(rng)));
  }
  return out;
}

inline std::vector<Point> corner_anchors()
{
  return {pt(0.05, 0.1), pt(0.95, 0.05), pt(0.45, 0.95)};
}

/// A sensor measured from two anchors only, plus a fully trilaterated rest.
inline NetworkInstance two_anchor_instance()
{
  const auto anchors = corner_anchors();
  const Point s = pt(0.5, 0.3);
  std::vector<EdgeMeasurement> edges{{0, 0, EdgeKind::AnchorSensor, (anchors[0] - s).norm()},
                                     {1, 0, EdgeKind::AnchorSensor, (anchors[1] - s).norm()}};
  return NetworkInstance(2, anchors, 1, edges, std::vector<Point>{s});
}

/// Reflection of p across the line through a and b.
inline Point reflect(const Point& p, const Point& a, const Point& b)
{
  const Point dir = (b - a).normalized();
  const Point rel = p - a;
  return a + 2.0 * rel.dot(dir) * dir - rel;
}

}  // namespace snl::test
