#pragma once

#include "snl/network.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace snl
{

/// Raised by grid checks that are only defined in the plane.
class UnsupportedDimension : public InvalidInput
{
public:
  using InvalidInput::InvalidInput;
};

/// Symmetric 0/1 adjacency over a unified point index.
using Adjacency = std::vector<std::vector<char>>;

/// Unified graph of an instance: anchors first (0..m-1), then sensors (m..m+n-1).
/// Anchors are mutually adjacent since their relative positions are known.
Adjacency instance_graph(const NetworkInstance& instance);

/// Points closer than `radius` (strictly) are adjacent.
Adjacency unit_disk_graph(const std::vector<Point>& points, double radius);

struct LaterationOrdering
{
  std::vector<int> permutation;
  int dimension = 0;
};

/// Checks both defining properties: a (d+1)-clique prefix, then >= d+1 earlier neighbors.
/// With `spanning` set the ordering must also contain every vertex exactly once.
bool is_lateration_ordering(const Adjacency& graph, const LaterationOrdering& ordering, bool spanning = true);

/// Spanning (d+1)-lateration ordering of a graph, trying every (d+1)-clique as the seed.
/// Seeds listed in `preferred_seed` (if it is a clique) are tried first.
std::optional<LaterationOrdering> find_lateration_ordering(const Adjacency& graph, int dimension,
                                                           const std::vector<int>& preferred_seed = {});

/// Instance form; the first d+1 anchors are tried as the seed before any other clique.
std::optional<LaterationOrdering> find_lateration_ordering(const NetworkInstance& instance);

/// l * sqrt(d) with l = M^(-1/d): a radius that forces a (d+1)-clique.
double clique_radius_bound(int dimension, int n_cells);

/// Default point count dM + 1 used by the bound derivation.
int coupled_point_count(int dimension, int n_cells);

/// The unit hypercube split into b^d equal cells.
struct GridPartition
{
  int dimension = 2;
  int b = 3;
  int M = 9;
  double cell_edge = 1.0 / 3.0;
  std::vector<int> occupancy;  // points per cell
  std::vector<int> cell_of;    // cell of each assigned point

  /// Row-major cell index (first coordinate fastest) of a point in [0,1]^d.
  int cell_index(const Point& p) const;
  std::vector<int> cell_coords(int cell) const;
  bool is_corner(int cell) const;
  /// Cells sharing a facet.
  std::vector<int> simple_neighbors(int cell) const;
  /// Every other cell within one step along each axis.
  std::vector<int> neighbors(int cell) const;
};

GridPartition make_grid(int dimension, int b);

/// Grid with occupancy and cell_of filled from `points`.
GridPartition partition_points(int dimension, int b, const std::vector<Point>& points);

enum class GridVerdict
{
  Guaranteed,
  Unknown,
};

struct GridCheck
{
  GridVerdict verdict = GridVerdict::Unknown;
  std::string reason;

  bool guaranteed() const { return verdict == GridVerdict::Guaranteed; }
};

/// Occupancy-only sufficient conditions for a spanning trilateration (d = 2).
GridCheck check_grid_occupancy(const GridPartition& grid, double radius);

/// Same check; the grid must account for every anchor and sensor of the instance.
GridCheck check_grid_sufficient_conditions(const GridPartition& grid, const NetworkInstance& instance, double radius);

struct PlacementSample
{
  std::vector<int> counts;
  std::vector<Point> points;  // grouped by cell, in cell order
  std::uint64_t seed = 0;
};

/// Independent Binomial(n, 1/M) count per cell, points uniform inside their cell.
PlacementSample sample_binomial_placement(int n, const GridPartition& grid, std::uint64_t seed);

struct TrialOutcome
{
  int trial_id = 0;
  int n_points = 0;
  bool ordered = false;
  bool grid_guaranteed = false;
};

struct LocalizabilityEstimate
{
  int trials = 0;
  double rate = 0.0;
  double std_error = 0.0;
  double half_width = 0.0;  // 1.96 standard errors
  double grid_rate = 0.0;
  std::vector<TrialOutcome> outcomes;
};

/// Stream seed of one Monte-Carlo trial.
std::uint64_t trial_seed(std::uint64_t seed, int trial);

/// Fraction of binomial placements whose unit-disk graph has a spanning lateration.
/// The seed clique of each ordering plays the role of the anchors.
LocalizabilityEstimate estimate_localizability_probability(int n, const GridPartition& grid, double radius,
                                                           int trials, std::uint64_t seed);

/// CSV header and rows: trial_id,n,b,radius,ordered,grid_guaranteed.
std::string trials_csv(const LocalizabilityEstimate& estimate, int n, const GridPartition& grid, double radius);

}  // namespace snl
