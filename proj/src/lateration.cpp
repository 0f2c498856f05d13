#include "snl/lateration.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <functional>
#include <numeric>
#include <random>
#include <sstream>

namespace snl
{
namespace
{

bool is_clique(const Adjacency& g, const std::vector<int>& vs)
{
  for (std::size_t a = 0; a < vs.size(); ++a)
  {
    for (std::size_t b = a + 1; b < vs.size(); ++b)
    {
      if (!g[vs[a]][vs[b]])
      {
        return false;
      }
    }
  }
  return true;
}

// Monotone closure: absorb any vertex with >= need ordered neighbors until none is left.
std::vector<int> closure(const Adjacency& g, const std::vector<int>& seed, int need)
{
  const int n = static_cast<int>(g.size());
  std::vector<int> order(seed);
  std::vector<char> in(n, 0);
  std::vector<int> count(n, 0);
  std::deque<int> ready;
  auto absorb = [&](int v) {
    in[v] = 1;
    for (int u = 0; u < n; ++u)
    {
      if (g[v][u] && !in[u] && ++count[u] == need)
      {
        ready.push_back(u);
      }
    }
  };
  for (int v : seed)
  {
    in[v] = 1;
  }
  for (int v : seed)
  {
    in[v] = 0;
    absorb(v);
  }
  while (!ready.empty())
  {
    const int v = ready.front();
    ready.pop_front();
    if (in[v])
    {
      continue;
    }
    order.push_back(v);
    absorb(v);
  }
  return order;
}

}  // namespace

Adjacency instance_graph(const NetworkInstance& instance)
{
  const int m = instance.n_anchors();
  const int n = m + instance.n_sensors();
  Adjacency g(n, std::vector<char>(n, 0));
  for (int a = 0; a < m; ++a)
  {
    for (int b = 0; b < m; ++b)
    {
      g[a][b] = a != b;
    }
  }
  for (const auto& e : instance.edges())
  {
    const int u = e.kind == EdgeKind::SensorSensor ? m + e.i : e.i;
    const int v = m + e.j;
    g[u][v] = g[v][u] = 1;
  }
  return g;
}

Adjacency unit_disk_graph(const std::vector<Point>& points, double radius)
{
  const int n = static_cast<int>(points.size());
  Adjacency g(n, std::vector<char>(n, 0));
  for (int a = 0; a < n; ++a)
  {
    for (int b = a + 1; b < n; ++b)
    {
      if ((points[a] - points[b]).norm() < radius)
      {
        g[a][b] = g[b][a] = 1;
      }
    }
  }
  return g;
}

bool is_lateration_ordering(const Adjacency& graph, const LaterationOrdering& ordering, bool spanning)
{
  const int n = static_cast<int>(graph.size());
  const int need = ordering.dimension + 1;
  const auto& p = ordering.permutation;
  if (ordering.dimension < 1 || static_cast<int>(p.size()) < need)
  {
    return false;
  }
  if (spanning && static_cast<int>(p.size()) != n)
  {
    return false;
  }
  std::vector<char> seen(n, 0);
  for (int v : p)
  {
    if (v < 0 || v >= n || seen[v])
    {
      return false;
    }
    seen[v] = 1;
  }
  if (!is_clique(graph, std::vector<int>(p.begin(), p.begin() + need)))
  {
    return false;
  }
  for (std::size_t k = need; k < p.size(); ++k)
  {
    int earlier = 0;
    for (std::size_t q = 0; q < k; ++q)
    {
      earlier += graph[p[k]][p[q]] ? 1 : 0;
    }
    if (earlier < need)
    {
      return false;
    }
  }
  return true;
}

std::optional<LaterationOrdering> find_lateration_ordering(const Adjacency& graph, int dimension,
                                                           const std::vector<int>& preferred_seed)
{
  if (dimension < 1)
  {
    throw InvalidInput("dimension must be positive");
  }
  const int n = static_cast<int>(graph.size());
  const int need = dimension + 1;
  if (n < need)
  {
    return std::nullopt;
  }

  // A seed inside a failed closure cannot do better: its closure is contained in that one.
  std::vector<std::vector<char>> failed;
  std::optional<LaterationOrdering> found;
  auto try_seed = [&](const std::vector<int>& seed) {
    for (const auto& f : failed)
    {
      if (std::all_of(seed.begin(), seed.end(), [&](int v) { return f[v] != 0; }))
      {
        return false;
      }
    }
    auto order = closure(graph, seed, need);
    if (static_cast<int>(order.size()) == n)
    {
      found = LaterationOrdering{std::move(order), dimension};
      return true;
    }
    std::vector<char> mask(n, 0);
    for (int v : order)
    {
      mask[v] = 1;
    }
    failed.push_back(std::move(mask));
    return false;
  };

  if (static_cast<int>(preferred_seed.size()) == need && is_clique(graph, preferred_seed) && try_seed(preferred_seed))
  {
    return found;
  }

  std::vector<int> clique;
  std::function<bool(int)> grow = [&](int start) {
    if (static_cast<int>(clique.size()) == need)
    {
      return try_seed(clique);
    }
    for (int v = start; v < n; ++v)
    {
      if (std::all_of(clique.begin(), clique.end(), [&](int u) { return graph[u][v] != 0; }))
      {
        clique.push_back(v);
        if (grow(v + 1))
        {
          return true;
        }
        clique.pop_back();
      }
    }
    return false;
  };
  grow(0);
  return found;
}

std::optional<LaterationOrdering> find_lateration_ordering(const NetworkInstance& instance)
{
  std::vector<int> seed(instance.dimension() + 1);
  std::iota(seed.begin(), seed.end(), 0);
  return find_lateration_ordering(instance_graph(instance), instance.dimension(), seed);
}

double clique_radius_bound(int dimension, int n_cells)
{
  if (dimension < 1 || n_cells < 1)
  {
    throw InvalidInput("dimension and cell count must be positive");
  }
  return std::sqrt(static_cast<double>(dimension)) / std::pow(static_cast<double>(n_cells), 1.0 / dimension);
}

int coupled_point_count(int dimension, int n_cells)
{
  return dimension * n_cells + 1;
}

int GridPartition::cell_index(const Point& p) const
{
  if (p.size() != dimension)
  {
    throw InvalidInput("point dimension does not match the grid");
  }
  int index = 0;
  int stride = 1;
  for (int a = 0; a < dimension; ++a)
  {
    if (!(p[a] >= 0.0 && p[a] <= 1.0))
    {
      throw InvalidInput("point lies outside the unit hypercube");
    }
    const int c = std::min(static_cast<int>(std::floor(p[a] * b)), b - 1);
    index += c * stride;
    stride *= b;
  }
  return index;
}

std::vector<int> GridPartition::cell_coords(int cell) const
{
  std::vector<int> c(dimension);
  for (int a = 0; a < dimension; ++a)
  {
    c[a] = cell % b;
    cell /= b;
  }
  return c;
}

bool GridPartition::is_corner(int cell) const
{
  const auto c = cell_coords(cell);
  return std::all_of(c.begin(), c.end(), [&](int x) { return x == 0 || x == b - 1; });
}

std::vector<int> GridPartition::simple_neighbors(int cell) const
{
  std::vector<int> out;
  int stride = 1;
  const auto c = cell_coords(cell);
  for (int a = 0; a < dimension; ++a)
  {
    if (c[a] > 0)
    {
      out.push_back(cell - stride);
    }
    if (c[a] < b - 1)
    {
      out.push_back(cell + stride);
    }
    stride *= b;
  }
  std::sort(out.begin(), out.end());
  return out;
}

std::vector<int> GridPartition::neighbors(int cell) const
{
  const auto c = cell_coords(cell);
  std::vector<int> out;
  for (int other = 0; other < M; ++other)
  {
    if (other == cell)
    {
      continue;
    }
    const auto o = cell_coords(other);
    bool near = true;
    for (int a = 0; a < dimension && near; ++a)
    {
      near = std::abs(o[a] - c[a]) <= 1;
    }
    if (near)
    {
      out.push_back(other);
    }
  }
  return out;
}

GridPartition make_grid(int dimension, int b)
{
  if (dimension < 1)
  {
    throw InvalidInput("dimension must be positive");
  }
  if (b < 3)
  {
    throw InvalidInput("grid needs at least 3 cells per axis");
  }
  GridPartition g;
  g.dimension = dimension;
  g.b = b;
  g.M = 1;
  for (int a = 0; a < dimension; ++a)
  {
    g.M *= b;
  }
  g.cell_edge = 1.0 / b;
  g.occupancy.assign(g.M, 0);
  return g;
}

GridPartition partition_points(int dimension, int b, const std::vector<Point>& points)
{
  GridPartition g = make_grid(dimension, b);
  g.cell_of.reserve(points.size());
  for (const auto& p : points)
  {
    const int c = g.cell_index(p);
    g.cell_of.push_back(c);
    ++g.occupancy[c];
  }
  return g;
}

GridCheck check_grid_occupancy(const GridPartition& grid, double radius)
{
  if (grid.dimension != 2)
  {
    throw UnsupportedDimension("grid conditions are defined for d = 2 only");
  }
  if (static_cast<int>(grid.occupancy.size()) != grid.M)
  {
    throw InvalidInput("grid occupancy does not have M entries");
  }
  const double needed = 2.0 * grid.cell_edge * std::sqrt(2.0);
  if (radius < needed * (1.0 - 1e-12))
  {
    return {GridVerdict::Unknown, "radius below 2l*sqrt(2)"};
  }

  bool any_empty = false;
  for (int c = 0; c < grid.M; ++c)
  {
    if (grid.occupancy[c] > 0)
    {
      continue;
    }
    any_empty = true;
    const auto nb = grid.simple_neighbors(c);
    const bool two_each = std::all_of(nb.begin(), nb.end(), [&](int s) { return grid.occupancy[s] >= 2; });
    const bool one_three = std::any_of(nb.begin(), nb.end(), [&](int s) { return grid.occupancy[s] >= 3; });
    if (!two_each || !one_three)
    {
      return {GridVerdict::Unknown, "empty cell " + std::to_string(c) + " is not densely surrounded"};
    }
  }

  for (int c = 0; c < grid.M; ++c)
  {
    if (grid.occupancy[c] >= 3 && !grid.is_corner(c))
    {
      return {GridVerdict::Guaranteed, "3-clique in non-corner cell " + std::to_string(c)};
    }
  }
  // The corner variant is only established for grids without empty cells.
  if (!any_empty)
  {
    for (int c = 0; c < grid.M; ++c)
    {
      if (grid.occupancy[c] >= 3 && grid.is_corner(c))
      {
        const auto nb = grid.neighbors(c);
        if (std::any_of(nb.begin(), nb.end(), [&](int s) { return grid.occupancy[s] >= 2; }))
        {
          return {GridVerdict::Guaranteed, "3-clique in corner cell " + std::to_string(c) + " with a dense neighbor"};
        }
      }
    }
  }
  return {GridVerdict::Unknown, any_empty ? "no 3-clique in a non-corner cell" : "no qualifying 3-clique"};
}

GridCheck check_grid_sufficient_conditions(const GridPartition& grid, const NetworkInstance& instance, double radius)
{
  if (instance.dimension() != 2)
  {
    throw UnsupportedDimension("grid conditions are defined for d = 2 only");
  }
  const int total = std::accumulate(grid.occupancy.begin(), grid.occupancy.end(), 0);
  if (total != instance.n_anchors() + instance.n_sensors())
  {
    throw InvalidInput("grid occupancy counts " + std::to_string(total) + " points, instance has " +
                       std::to_string(instance.n_anchors() + instance.n_sensors()));
  }
  return check_grid_occupancy(grid, radius);
}

PlacementSample sample_binomial_placement(int n, const GridPartition& grid, std::uint64_t seed)
{
  if (n < 1)
  {
    throw InvalidInput("n must be positive");
  }
  std::mt19937_64 rng(seed);
  std::binomial_distribution<int> count(n, 1.0 / grid.M);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  PlacementSample s;
  s.seed = seed;
  s.counts.resize(grid.M);
  for (int c = 0; c < grid.M; ++c)
  {
    s.counts[c] = count(rng);
  }
  for (int c = 0; c < grid.M; ++c)
  {
    const auto coords = grid.cell_coords(c);
    for (int k = 0; k < s.counts[c]; ++k)
    {
      Point p(grid.dimension);
      for (int a = 0; a < grid.dimension; ++a)
      {
        p[a] = (coords[a] + unit(rng)) * grid.cell_edge;
      }
      s.points.push_back(std::move(p));
    }
  }
  return s;
}

std::uint64_t trial_seed(std::uint64_t seed, int trial)
{
  std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                    static_cast<std::uint32_t>(trial)};
  std::uint32_t out[2];
  seq.generate(out, out + 2);
  return (static_cast<std::uint64_t>(out[0]) << 32) | out[1];
}

LocalizabilityEstimate estimate_localizability_probability(int n, const GridPartition& grid, double radius,
                                                           int trials, std::uint64_t seed)
{
  if (trials < 1)
  {
    throw InvalidInput("trials must be positive");
  }
  LocalizabilityEstimate est;
  est.trials = trials;
  int ordered = 0;
  int guaranteed = 0;
  for (int t = 0; t < trials; ++t)
  {
    const auto sample = sample_binomial_placement(n, grid, trial_seed(seed, t));
    TrialOutcome o;
    o.trial_id = t;
    o.n_points = static_cast<int>(sample.points.size());
    o.ordered = find_lateration_ordering(unit_disk_graph(sample.points, radius), grid.dimension).has_value();
    if (grid.dimension == 2)
    {
      GridPartition filled = grid;
      filled.occupancy = sample.counts;
      o.grid_guaranteed = check_grid_occupancy(filled, radius).guaranteed();
    }
    ordered += o.ordered ? 1 : 0;
    guaranteed += o.grid_guaranteed ? 1 : 0;
    est.outcomes.push_back(o);
  }
  est.rate = static_cast<double>(ordered) / trials;
  est.grid_rate = static_cast<double>(guaranteed) / trials;
  est.std_error = std::sqrt(est.rate * (1.0 - est.rate) / trials);
  est.half_width = 1.96 * est.std_error;
  return est;
}

std::string trials_csv(const LocalizabilityEstimate& estimate, int n, const GridPartition& grid, double radius)
{
  std::ostringstream out;
  out.precision(17);
  out << "trial_id,n,b,radius,ordered,grid_guaranteed\n";
  for (const auto& o : estimate.outcomes)
  {
    out << o.trial_id << ',' << n << ',' << grid.b << ',' << radius << ',' << (o.ordered ? 1 : 0) << ','
        << (o.grid_guaranteed ? 1 : 0) << '\n';
  }
  return out.str();
}

}  // namespace snl
