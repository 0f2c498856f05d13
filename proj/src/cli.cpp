#include "snl/cli.hpp"

#include "snl/bound.hpp"
#include "snl/heuristics.hpp"
#include "snl/lateration.hpp"
#include "snl/network.hpp"
#include "snl/sdp.hpp"
#include "snl/triangulation.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <fstream>
#include <iostream>
#include <sstream>

namespace snl::cli
{
namespace
{

struct Globals
{
  std::uint64_t seed = 1;
  double tol = 1e-8;
  std::string out;
  bool quiet = false;
};

void emit(const std::string& text, const std::string& path, std::ostream& out)
{
  if (path.empty() || path == "-")
  {
    out << text;
    return;
  }
  std::ofstream f(path, std::ios::binary);
  if (!f)
  {
    throw InvalidInput("cannot write " + path);
  }
  f << text;
}

std::string slurp(const std::string& path)
{
  std::ifstream f(path, std::ios::binary);
  if (!f)
  {
    throw InvalidInput("cannot read " + path);
  }
  std::ostringstream s;
  s << f.rdbuf();
  return s.str();
}

// "a..b" or a single integer.
std::pair<int, int> parse_range(const std::string& text)
{
  const auto dots = text.find("..");
  try
  {
    if (dots == std::string::npos)
    {
      const int v = std::stoi(text);
      return {v, v};
    }
    return {std::stoi(text.substr(0, dots)), std::stoi(text.substr(dots + 2))};
  }
  catch (const std::exception&)
  {
    throw InvalidInput("expected an integer or a range a..b, got \"" + text + "\"");
  }
}

SolveOptions solve_options(const Globals& g)
{
  SolveOptions o;
  o.feasibility_tol = g.tol;
  return o;
}

NetworkInstance grid_instance(int n, int b, double radius, std::uint64_t seed)
{
  const GridPartition grid = make_grid(2, b);
  const auto sample = sample_binomial_placement(n, grid, seed);
  const auto& pts = sample.points;
  const int total = static_cast<int>(pts.size());
  if (total < 4)
  {
    throw InvalidInput("the placement drew fewer than 4 points");
  }
  // Anchors: the first 3-clique of the unit-disk graph, else the first three points.
  const auto g = unit_disk_graph(pts, radius);
  std::vector<int> anchor_ids{0, 1, 2};
  bool found = false;
  for (int a = 0; a < total && !found; ++a)
  {
    for (int b2 = a + 1; b2 < total && !found; ++b2)
    {
      for (int c = b2 + 1; c < total && !found && g[a][b2]; ++c)
      {
        if (g[a][c] && g[b2][c])
        {
          anchor_ids = {a, b2, c};
          found = true;
        }
      }
    }
  }
  std::vector<Point> anchors;
  std::vector<Point> sensors;
  for (int k = 0; k < total; ++k)
  {
    const bool is_anchor = std::find(anchor_ids.begin(), anchor_ids.end(), k) != anchor_ids.end();
    (is_anchor ? anchors : sensors).push_back(pts[k]);
  }
  return build_unit_disk_instance(anchors, sensors, radius);
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err)
{
  CLI::App app{"Sensor network localization by semidefinite relaxation", "snl"};
  app.require_subcommand(1);
  app.fallthrough();
  Globals g;
  app.add_option("--seed", g.seed, "Random seed");
  app.add_option("--tol", g.tol, "Feasibility tolerance")->check(CLI::PositiveNumber);
  app.add_option("--out", g.out, "Output file (default: standard output)");
  app.add_flag("--quiet", g.quiet, "Suppress informational messages");

  // gen / triangulate
  std::string mode = "unit-disk";
  int n = -1;
  int anchors = 3;
  double radius = -1.0;
  int b = 3;
  auto* gen = app.add_subcommand("gen", "Generate an instance file");
  gen->add_option("--mode", mode, "unit-disk | grid | triangulation")
    ->check(CLI::IsMember({"unit-disk", "grid", "triangulation"}));
  gen->add_option("--n", n, "Sensors (unit-disk), binomial n (grid) or points (triangulation)");
  gen->add_option("--anchors", anchors, "Anchor count (unit-disk)")->check(CLI::Range(3, 1000));
  gen->add_option("--radius", radius, "Connectivity radius");
  gen->add_option("--b", b, "Cells per axis (grid)")->check(CLI::Range(3, 1000));
  auto* tri_cmd = app.add_subcommand("triangulate", "Generate a triangulation instance");
  tri_cmd->add_option("--n", n, "Point count including the 3 anchors");

  // solve / certify
  std::string input;
  std::string objective = "zero";
  std::string spectra;
  auto* solve_cmd = app.add_subcommand("solve", "Solve the relaxation of an instance");
  solve_cmd->add_option("--in", input, "Instance file")->required();
  solve_cmd->add_option("--objective", objective, "zero | max | virtual")
    ->check(CLI::IsMember({"zero", "max", "virtual"}));
  solve_cmd->add_option("--spectra", spectra, "Write eigenvalues of Z and U as CSV");
  auto* certify_cmd = app.add_subcommand("certify", "Certify unique localizability");
  certify_cmd->add_option("--in", input, "Instance file")->required();

  // bound
  std::string n_range = "200..5000";
  int step = 100;
  double target = 0.99;
  auto* bound_cmd = app.add_subcommand("bound", "Minimum radius reaching a target probability");
  bound_cmd->add_option("--n", n_range, "Point count or range a..b");
  bound_cmd->add_option("--step", step, "Step of the n range")->check(CLI::PositiveNumber);
  bound_cmd->add_option("--target", target, "Target probability")->check(CLI::Range(0.0, 1.0));

  // simulate
  int trials = 200;
  std::string trials_path;
  auto* sim_cmd = app.add_subcommand("simulate", "Monte-Carlo localizability rate of the grid model");
  sim_cmd->add_option("--b", b, "Cells per axis")->check(CLI::Range(3, 1000));
  sim_cmd->add_option("--n", n, "Binomial point count (default 2b^2+1)");
  sim_cmd->add_option("--radius", radius, "Radius (default 2l*sqrt(2))");
  sim_cmd->add_option("--trials", trials, "Trials")->check(CLI::PositiveNumber);
  sim_cmd->add_option("--trials-csv", trials_path, "Write per-trial outcomes");

  // bench
  std::string suite = "small";
  std::string summary_path;
  int bench_trials = -1;
  StrategyOptions sopts;
  auto* bench_cmd = app.add_subcommand("bench", "Compare objective strategies");
  bench_cmd->add_option("--suite", suite, "small | desk")->check(CLI::IsMember({"small", "desk"}));
  bench_cmd->add_option("--trials", bench_trials, "Instances (overrides the suite)");
  bench_cmd->add_option("--max-iterations", sopts.max_iterations, "LSM flips")->check(CLI::NonNegativeNumber);
  bench_cmd->add_option("--epsilon", sopts.epsilon, "Small residual threshold")->check(CLI::PositiveNumber);
  bench_cmd->add_option("--summary", summary_path, "Write the summary CSV");

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try
  {
    app.parse(reversed);
  }
  catch (const CLI::CallForHelp&)
  {
    out << app.help();
    return kSuccess;
  }
  catch (const CLI::CallForAllHelp&)
  {
    out << app.help("", CLI::AppFormatMode::All);
    return kSuccess;
  }
  catch (const CLI::ParseError& e)
  {
    err << e.what() << "\n";
    return kUsage;
  }
  auto info = [&](const std::string& msg) {
    if (!g.quiet)
    {
      err << msg << "\n";
    }
  };

  try
  {
    if (*gen || *tri_cmd)
    {
      if (*tri_cmd)
      {
        mode = "triangulation";
      }
      if (mode == "triangulation")
      {
        const int points = n < 0 ? 10 : n;
        const auto tri = build_incremental_triangulation(points, g.seed);
        emit(triangulation_to_json(tri), g.out, out);
      }
      else if (mode == "grid")
      {
        const int M = b * b;
        const int points = n < 0 ? coupled_point_count(2, M) : n;
        if (n >= 0 && n != coupled_point_count(2, M))
        {
          info("warning: n differs from dM+1 = " + std::to_string(coupled_point_count(2, M)));
        }
        const double r = radius < 0 ? 2.0 * std::sqrt(2.0) / b : radius;
        emit(to_json_string(grid_instance(points, b, r, g.seed)), g.out, out);
      }
      else
      {
        const int sensors = n < 0 ? 10 : n;
        const double r = radius < 0 ? 0.5 : radius;
        emit(to_json_string(random_unit_disk_instance(sensors, anchors, r, g.seed)), g.out, out);
      }
      return kSuccess;
    }

    if (*solve_cmd)
    {
      const std::string text = slurp(input);
      SolveResult res;
      if (objective == "virtual")
      {
        res = localize_triangulation(triangulation_from_json(text), solve_options(g));
      }
      else
      {
        const auto inst = instance_from_json_string(text);
        ObjectiveSpec obj;
        if (objective == "max")
        {
          obj.terms = non_edge_terms(inst);
        }
        res = solve(assemble_relaxation(inst, obj), solve_options(g));
      }
      emit(solution_to_json(res.solution, res.certificate), g.out, out);
      if (!spectra.empty())
      {
        emit(spectra_csv(res.solution, res.certificate), spectra, out);
      }
      if (!res.solution.converged())
      {
        info(std::string("solver did not converge: ") + to_string(res.solution.status));
        return kIndeterminate;
      }
      return kSuccess;
    }

    if (*certify_cmd)
    {
      const auto inst = instance_from_json_string(slurp(input));
      const auto opts = solve_options(g);
      const auto res = solve(assemble_relaxation(inst), opts);
      const auto report = certify_unique(res.solution, opts);
      nlohmann::json j{{"unique", to_string(report.status)},
                       {"rank", report.rank},
                       {"gap", report.gap},
                       {"strong", certify_strong(res.certificate, opts)},
                       {"status", to_string(res.solution.status)},
                       {"diagnostics", report.diagnostics}};
      emit(j.dump(2) + "\n", g.out, out);
      switch (report.status)
      {
        case Certification::True:
          return kSuccess;
        case Certification::False:
          return kCertifiedFalse;
        case Certification::Indeterminate:
          return kIndeterminate;
      }
    }

    if (*bound_cmd)
    {
      const auto [lo, hi] = parse_range(n_range);
      if (lo < 19 || hi < lo)
      {
        throw InvalidInput("n range must satisfy 19 <= a <= b");
      }
      std::vector<int> ns;
      for (int v = lo; v <= hi; v += step)
      {
        ns.push_back(v);
      }
      emit(bound_curve_csv(ns, target), g.out, out);
      return kSuccess;
    }

    if (*sim_cmd)
    {
      const GridPartition grid = make_grid(2, b);
      const int points = n < 0 ? coupled_point_count(2, grid.M) : n;
      const double r = radius < 0 ? 2.0 * std::sqrt(2.0) * grid.cell_edge : radius;
      const auto est = estimate_localizability_probability(points, grid, r, trials, g.seed);
      const auto bound = localizability_lower_bound(BoundInputs{points, b, r});
      std::ostringstream row;
      row.precision(10);
      row << "n,b,radius,trials,rate,std_error,half_width,grid_rate,lower_bound\n"
          << points << ',' << b << ',' << r << ',' << trials << ',' << est.rate << ',' << est.std_error << ','
          << est.half_width << ',' << est.grid_rate << ',' << bound.lower_bound << '\n';
      emit(row.str(), g.out, out);
      if (!trials_path.empty())
      {
        emit(trials_csv(est, points, grid, r), trials_path, out);
      }
      return kSuccess;
    }

    if (*bench_cmd)
    {
      SuiteSpec spec;
      if (suite == "desk")
      {
        spec.n_min = 10;
        spec.n_max = 20;
        spec.trials = 30;
      }
      else
      {
        spec.n_min = 5;
        spec.n_max = 8;
        spec.trials = 5;
      }
      if (bench_trials > 0)
      {
        spec.trials = bench_trials;
      }
      sopts.solve = solve_options(g);
      const auto report = compare_strategies(spec, g.seed, sopts);
      emit(report.csv(), g.out, out);
      if (!summary_path.empty())
      {
        emit(report.summary_csv(), summary_path, out);
      }
      info(report.summary_table());
      return kSuccess;
    }
  }
  catch (const InvalidInput& e)
  {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  catch (const ParseError& e)
  {
    err << "error: " << e.what() << "\n";
    return kUsage;
  }
  catch (const std::exception& e)
  {
    err << "error: " << e.what() << "\n";
    return kIndeterminate;
  }
  return kUsage;
}

int run(int argc, char** argv)
{
  std::vector<std::string> args(argv + (argc > 0 ? 1 : 0), argv + argc);
  return run(args, std::cout, std::cerr);
}

}  // namespace snl::cli
