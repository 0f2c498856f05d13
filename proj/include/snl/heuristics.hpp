#pragma once

#include "snl/network.hpp"
#include "snl/sdp.hpp"

#include <cstdint>
#include <string>
#include <vector>

namespace snl
{

enum class StrategyKind
{
  LSM,
  IET,
  WEM,
  MAX,
  ZERO,
};

const char* to_string(StrategyKind kind);
StrategyKind strategy_from_string(const std::string& name);
const std::vector<StrategyKind>& all_strategies();

struct StrategyOptions
{
  int max_iterations = 20;  // LSM flips tried
  double epsilon = 1e-5;    // "small" residual error
  SolveOptions solve;
};

struct BenchResult
{
  int instance_id = 0;
  StrategyKind strategy = StrategyKind::ZERO;
  double residual = 0.0;
  double rmsd = -1.0;  // negative when no truth is attached
  double seconds = 0.0;
  int solves = 0;
  int failed_solves = 0;
  // LSM only: residual after the initial solve and after every accepted flip.
  std::vector<double> accepted_residuals;
};

struct StrategyRun
{
  std::vector<Point> positions;
  BenchResult result;
};

/// Every sensor-sensor and anchor-sensor pair that carries no measurement.
std::vector<ObjectiveTerm> non_edge_terms(const NetworkInstance& instance);

StrategyRun run_strategy(const NetworkInstance& instance, StrategyKind kind, std::uint64_t seed,
                         const StrategyOptions& options = {});

struct SuiteSpec
{
  int n_min = 6;
  int n_max = 12;
  double radius_min = 0.35;
  double radius_max = 0.6;
  int trials = 10;
  int anchors = 3;
};

struct StrategySummary
{
  StrategyKind strategy = StrategyKind::ZERO;
  double mean_residual = 0.0;
  double mean_rmsd = 0.0;
  double mean_seconds = 0.0;
  double mean_solves = 0.0;
};

struct BenchReport
{
  std::vector<BenchResult> results;
  std::vector<int> instance_n;
  std::vector<double> instance_radius;
  std::vector<StrategySummary> summary;

  /// instance_id,n,radius,strategy,residual,rmsd,seconds,solves
  std::string csv(bool with_timing = true) const;
  std::string summary_csv() const;
  std::string summary_table() const;
};

/// Seeded unit-disk instance with anchors and sensors uniform in the unit square.
NetworkInstance random_unit_disk_instance(int n_sensors, int n_anchors, double radius, std::uint64_t seed);

BenchReport compare_strategies(const SuiteSpec& spec, std::uint64_t seed, const StrategyOptions& options = {},
                               const std::vector<StrategyKind>& strategies = all_strategies());

}  // namespace snl
