#pragma once

#include "snl/network.hpp"
#include "snl/sdp.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace snl
{

enum class ActionKind
{
  AddPoint,     // new point joined to both ends of a boundary edge (a, b)
  ConnectPair,  // boundary neighbors a, b of `point` joined, closing triangle (a, point, b)
};

struct TriangulationAction
{
  ActionKind kind = ActionKind::AddPoint;
  int point = 0;
  int a = 0;
  int b = 0;
};

/// Planar triangulation grown from an initial triangle (points 0, 1, 2).
///
/// Point k >= 3 becomes sensor k - 3 when converted to an instance.
struct Triangulation
{
  std::vector<Point> points;
  std::vector<std::array<int, 3>> triangles;
  std::vector<TriangulationAction> actions;
  std::vector<int> anchor_indices{0, 1, 2};

  int size() const { return static_cast<int>(points.size()); }
  /// Sorted, deduplicated edge list (i < j).
  std::vector<std::pair<int, int>> edges() const;
  bool has_edge(int i, int j) const;
};

struct TriangulationOptions
{
  double min_area = 1e-6;
  // Smallest singular value ratio accepted for a 4-clique equilibrium system.
  double min_stress_conditioning = 1e-6;
  int max_attempts = 1000;
};

/// Random triangulation of n_points points in the unit square, built by legal actions only.
Triangulation build_incremental_triangulation(int n_points, std::uint64_t seed, const TriangulationOptions& options = {});

/// Replays the action list from the first triangle; throws InvalidInput naming the first illegal action.
Triangulation replay_actions(const std::vector<Point>& points, const std::vector<TriangulationAction>& actions,
                             double min_area = 1e-6);

/// Throws InvalidInput unless the triangles tile the convex hull without crossings.
void validate_triangulation(const Triangulation& tri, double min_area = 1e-6);

struct VirtualEdgeSet
{
  std::vector<std::pair<int, int>> sensor_pairs;         // point indices, both sensors
  std::vector<std::pair<int, int>> anchor_sensor_pairs;  // (anchor point, sensor point)

  std::vector<std::pair<int, int>> all() const;
};

VirtualEdgeSet virtual_edges(const Triangulation& tri);

/// Instance with the anchor triangle fixed, every non-anchor edge measured and the truth attached.
NetworkInstance triangulation_instance(const Triangulation& tri);

/// Maximizes the squared length of every virtual edge.
ObjectiveSpec virtual_edge_objective(const Triangulation& tri);

SolveResult localize_triangulation(const Triangulation& tri, const SolveOptions& options = {});

/// A null-space vector of the equilibrium system at the free points, one value per edge.
/// Empty when only the zero stress exists.
std::vector<double> equilibrium_stress(const std::vector<Point>& points, const std::vector<std::pair<int, int>>& edges,
                                       const std::vector<char>& fixed = {}, double conditioning = 1e-9);

/// Residual max over free points of |sum_j w_ij (x_i - x_j)|.
double equilibrium_residual(const std::vector<Point>& points, const std::vector<std::pair<int, int>>& edges,
                            const std::vector<double>& stress, const std::vector<char>& fixed = {});

struct InductiveCertificate
{
  DualCertificate certificate;
  Eigen::MatrixXd omega;       // assembled stress matrix over all points
  double lambda_min_u22 = 0.0;
  double complementarity = 0.0;       // |Z . U| at the given positions
  double structure_residual = 0.0;    // deviation from the virtual-edge dual form
  bool ok = false;
  std::vector<std::string> diagnostics;
};

/// Dual certificate assembled from the 4-clique stresses of the construction.
InductiveCertificate build_dual_certificate_inductively(const Triangulation& tri,
                                                        const std::vector<Point>& positions,
                                                        const TriangulationOptions& options = {});

/// Instance JSON plus "actions" and "virtual_edges" arrays.
std::string triangulation_to_json(const Triangulation& tri);
Triangulation triangulation_from_json(const std::string& text);

}  // namespace snl
