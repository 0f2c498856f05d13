#include "snl/heuristics.hpp"

#include "snl/lateration.hpp"

#include <algorithm>
#include <cctype>
#include <chrono>
#include <cstdio>
#include <map>
#include <numeric>
#include <random>
#include <sstream>

namespace snl
{
namespace
{

struct Evaluation
{
  std::vector<Point> positions;
  double residual = 0.0;
  bool converged = false;
};

class Evaluator
{
public:
  Evaluator(const NetworkInstance& instance, const SolveOptions& options, BenchResult& result)
    : instance_(instance), options_(options), result_(result)
  {
  }

  Evaluation operator()(const std::vector<ObjectiveTerm>& terms)
  {
    ++result_.solves;
    Evaluation ev;
    try
    {
      const auto out = solve(assemble_relaxation(instance_, ObjectiveSpec{terms}), options_);
      ev.converged = out.solution.converged();
      ev.positions = extract_positions(out.solution).positions;
      ev.residual = residual_error(instance_, ev.positions);
    }
    catch (const InvalidInput&)
    {
      ev.converged = false;
    }
    if (!ev.converged)
    {
      ++result_.failed_solves;
    }
    if (ev.positions.empty())
    {
      ev.positions.assign(instance_.n_sensors(), Point::Zero(instance_.dimension()));
      ev.residual = residual_error(instance_, ev.positions);
    }
    return ev;
  }

private:
  const NetworkInstance& instance_;
  const SolveOptions& options_;
  BenchResult& result_;
};

std::vector<ObjectiveTerm> with_signs(std::vector<ObjectiveTerm> terms, int sign)
{
  for (auto& t : terms)
  {
    t.sign = sign;
  }
  return terms;
}

Evaluation run_lsm(const NetworkInstance& instance, Evaluator& eval, std::uint64_t seed,
                   const StrategyOptions& options, BenchResult& result)
{
  auto terms = with_signs(non_edge_terms(instance), 1);
  Evaluation best = eval(terms);
  result.accepted_residuals.push_back(best.residual);
  std::mt19937_64 rng(seed);
  for (int it = 0; it < options.max_iterations && best.residual > options.epsilon; ++it)
  {
    std::vector<std::size_t> maximized;
    for (std::size_t k = 0; k < terms.size(); ++k)
    {
      if (terms[k].sign > 0)
      {
        maximized.push_back(k);
      }
    }
    if (maximized.empty())
    {
      break;
    }
    const std::size_t pick = maximized[std::uniform_int_distribution<std::size_t>(0, maximized.size() - 1)(rng)];
    auto trial = terms;
    trial[pick].sign = -1;
    Evaluation ev = eval(trial);
    if (ev.residual < best.residual)
    {
      terms = std::move(trial);
      best = std::move(ev);
      result.accepted_residuals.push_back(best.residual);
    }
  }
  return best;
}

Evaluation run_iet(const NetworkInstance& instance, Evaluator& eval, const StrategyOptions& options)
{
  const auto base = with_signs(non_edge_terms(instance), 1);
  auto final_terms = base;
  for (std::size_t k = 0; k < base.size(); ++k)
  {
    eval(base);
    auto trial = base;
    trial[k].sign = -1;
    if (eval(trial).residual <= options.epsilon)
    {
      final_terms[k].sign = -1;
    }
  }
  return eval(final_terms);
}

Evaluation run_wem(const NetworkInstance& instance, Evaluator& eval)
{
  Evaluation zero = eval({});
  const int m = instance.n_anchors();
  const auto& edges = instance.edges();
  if (edges.empty())
  {
    return zero;
  }
  std::vector<double> err(edges.size());
  std::vector<double> incident(instance.n_sensors(), 0.0);
  for (std::size_t e = 0; e < edges.size(); ++e)
  {
    const auto [p, q] = edge_endpoints(instance, zero.positions, edges[e]);
    err[e] = std::abs((*p - *q).norm() - edges[e].dist);
    incident[edges[e].j] += err[e];
    if (edges[e].kind == EdgeKind::SensorSensor)
    {
      incident[edges[e].i] += err[e];
    }
  }
  const auto worst = static_cast<std::size_t>(std::max_element(err.begin(), err.end()) - err.begin());
  const auto& we = edges[worst];
  int sensor = we.j;
  if (we.kind == EdgeKind::SensorSensor && incident[we.i] > incident[we.j])
  {
    sensor = we.i;
  }
  // Nearest anchor by estimated position, preferring one without a measured distance.
  int anchor = -1;
  double best = 0.0;
  for (int pass = 0; pass < 2 && anchor < 0; ++pass)
  {
    for (int k = 0; k < m; ++k)
    {
      if (pass == 0 && instance.has_edge(EdgeKind::AnchorSensor, k, sensor))
      {
        continue;
      }
      const double dist = (instance.anchors()[k] - zero.positions[sensor]).norm();
      if (anchor < 0 || dist < best)
      {
        anchor = k;
        best = dist;
      }
    }
  }
  Evaluation up = eval({ObjectiveTerm{EdgeKind::AnchorSensor, anchor, sensor, 1, 1.0}});
  Evaluation down = eval({ObjectiveTerm{EdgeKind::AnchorSensor, anchor, sensor, -1, 1.0}});
  Evaluation& chosen = down.residual < up.residual ? down : up;
  return chosen.residual < zero.residual ? chosen : zero;
}

}  // namespace

const char* to_string(StrategyKind kind)
{
  switch (kind)
  {
    case StrategyKind::LSM:
      return "LSM";
    case StrategyKind::IET:
      return "IET";
    case StrategyKind::WEM:
      return "WEM";
    case StrategyKind::MAX:
      return "MAX";
    case StrategyKind::ZERO:
      return "ZERO";
  }
  return "?";
}

StrategyKind strategy_from_string(const std::string& name)
{
  std::string upper(name);
  std::transform(upper.begin(), upper.end(), upper.begin(), [](unsigned char c) { return std::toupper(c); });
  for (auto k : all_strategies())
  {
    if (upper == to_string(k))
    {
      return k;
    }
  }
  throw InvalidInput("unknown strategy \"" + name + "\"");
}

const std::vector<StrategyKind>& all_strategies()
{
  static const std::vector<StrategyKind> kinds{StrategyKind::LSM, StrategyKind::IET, StrategyKind::WEM,
                                               StrategyKind::MAX, StrategyKind::ZERO};
  return kinds;
}

std::vector<ObjectiveTerm> non_edge_terms(const NetworkInstance& instance)
{
  std::vector<ObjectiveTerm> out;
  const int n = instance.n_sensors();
  for (int i = 0; i < n; ++i)
  {
    for (int j = i + 1; j < n; ++j)
    {
      if (!instance.has_edge(EdgeKind::SensorSensor, i, j))
      {
        out.push_back({EdgeKind::SensorSensor, i, j, 1, 1.0});
      }
    }
  }
  for (int k = 0; k < instance.n_anchors(); ++k)
  {
    for (int j = 0; j < n; ++j)
    {
      if (!instance.has_edge(EdgeKind::AnchorSensor, k, j))
      {
        out.push_back({EdgeKind::AnchorSensor, k, j, 1, 1.0});
      }
    }
  }
  return out;
}

StrategyRun run_strategy(const NetworkInstance& instance, StrategyKind kind, std::uint64_t seed,
                         const StrategyOptions& options)
{
  if (options.max_iterations < 0 || !(options.epsilon > 0.0))
  {
    throw InvalidInput("strategy parameters must be positive");
  }
  StrategyRun run;
  run.result.strategy = kind;
  Evaluator eval(instance, options.solve, run.result);
  const auto start = std::chrono::steady_clock::now();
  Evaluation ev;
  switch (kind)
  {
    case StrategyKind::ZERO:
      ev = eval({});
      break;
    case StrategyKind::MAX:
      ev = eval(non_edge_terms(instance));
      break;
    case StrategyKind::LSM:
      ev = run_lsm(instance, eval, seed, options, run.result);
      break;
    case StrategyKind::IET:
      ev = run_iet(instance, eval, options);
      break;
    case StrategyKind::WEM:
      ev = run_wem(instance, eval);
      break;
  }
  run.result.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  run.result.residual = ev.residual;
  if (instance.sensor_truth())
  {
    run.result.rmsd = rmsd(ev.positions, *instance.sensor_truth());
  }
  run.positions = std::move(ev.positions);
  return run;
}

NetworkInstance random_unit_disk_instance(int n_sensors, int n_anchors, double radius, std::uint64_t seed)
{
  if (n_sensors < 1 || n_anchors < 3 || !(radius > 0.0))
  {
    throw InvalidInput("need n >= 1, at least 3 anchors and a positive radius");
  }
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  for (int attempt = 0; attempt < 10000; ++attempt)
  {
    auto draw = [&](int count) {
      std::vector<Point> pts;
      for (int k = 0; k < count; ++k)
      {
        Point p(2);
        p << unit(rng), unit(rng);
        pts.push_back(std::move(p));
      }
      return pts;
    };
    auto anchors = draw(n_anchors);
    auto sensors = draw(n_sensors);
    auto inst = build_unit_disk_instance(anchors, sensors, radius);
    // Every sensor must reach the anchors, otherwise maximizing objectives are unbounded.
    const auto g = instance_graph(inst);
    std::vector<char> seen(g.size(), 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    while (!stack.empty())
    {
      const int v = stack.back();
      stack.pop_back();
      for (std::size_t u = 0; u < g.size(); ++u)
      {
        if (g[v][u] && !seen[u])
        {
          seen[u] = 1;
          stack.push_back(static_cast<int>(u));
        }
      }
    }
    if (std::all_of(seen.begin(), seen.end(), [](char c) { return c != 0; }))
    {
      return inst;
    }
  }
  throw InvalidInput("could not draw a connected instance; radius too small");
}

BenchReport compare_strategies(const SuiteSpec& spec, std::uint64_t seed, const StrategyOptions& options,
                               const std::vector<StrategyKind>& strategies)
{
  if (spec.trials < 1 || spec.n_min < 1 || spec.n_max < spec.n_min || spec.radius_max < spec.radius_min ||
      strategies.empty())
  {
    throw InvalidInput("empty benchmark suite");
  }
  BenchReport report;
  for (int t = 0; t < spec.trials; ++t)
  {
    const std::uint64_t s = trial_seed(seed, t);
    std::mt19937_64 rng(s);
    const int n = std::uniform_int_distribution<int>(spec.n_min, spec.n_max)(rng);
    const double radius = std::uniform_real_distribution<double>(spec.radius_min, spec.radius_max)(rng);
    const auto inst = random_unit_disk_instance(n, spec.anchors, radius, rng());
    report.instance_n.push_back(n);
    report.instance_radius.push_back(radius);
    for (auto kind : strategies)
    {
      auto run = run_strategy(inst, kind, s, options);
      run.result.instance_id = t;
      report.results.push_back(std::move(run.result));
    }
  }
  for (auto kind : strategies)
  {
    StrategySummary sum;
    sum.strategy = kind;
    int count = 0;
    int with_truth = 0;
    for (const auto& r : report.results)
    {
      if (r.strategy != kind)
      {
        continue;
      }
      ++count;
      sum.mean_residual += r.residual;
      sum.mean_seconds += r.seconds;
      sum.mean_solves += r.solves;
      if (r.rmsd >= 0.0)
      {
        ++with_truth;
        sum.mean_rmsd += r.rmsd;
      }
    }
    sum.mean_residual /= count;
    sum.mean_seconds /= count;
    sum.mean_solves /= count;
    sum.mean_rmsd = with_truth > 0 ? sum.mean_rmsd / with_truth : -1.0;
    report.summary.push_back(sum);
  }
  return report;
}

std::string BenchReport::csv(bool with_timing) const
{
  std::ostringstream out;
  out.precision(10);
  out << "instance_id,n,radius,strategy,residual,rmsd,seconds,solves\n";
  for (const auto& r : results)
  {
    out << r.instance_id << ',' << instance_n[r.instance_id] << ',' << instance_radius[r.instance_id] << ','
        << to_string(r.strategy) << ',' << r.residual << ',' << r.rmsd << ',' << (with_timing ? r.seconds : 0.0)
        << ',' << r.solves << '\n';
  }
  return out.str();
}

std::string BenchReport::summary_csv() const
{
  std::ostringstream out;
  out.precision(10);
  out << "strategy,mean_residual,mean_rmsd,mean_seconds,mean_solves\n";
  for (const auto& s : summary)
  {
    out << to_string(s.strategy) << ',' << s.mean_residual << ',' << s.mean_rmsd << ',' << s.mean_seconds << ','
        << s.mean_solves << '\n';
  }
  return out.str();
}

std::string BenchReport::summary_table() const
{
  std::string out;
  char line[160];
  std::snprintf(line, sizeof line, "%-8s %14s %14s %12s %10s\n", "strategy", "mean_residual", "mean_rmsd",
                "mean_sec", "solves");
  out += line;
  for (const auto& s : summary)
  {
    std::snprintf(line, sizeof line, "%-8s %14.6e %14.6e %12.4f %10.2f\n", to_string(s.strategy), s.mean_residual,
                  s.mean_rmsd, s.mean_seconds, s.mean_solves);
    out += line;
  }
  return out;
}

}  // namespace snl
