#include "snl/sdp.hpp"

#include <json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace snl
{

bool ObjectiveSpec::is_zero() const
{
  return std::all_of(terms.begin(), terms.end(),
                     [](const ObjectiveTerm& t) { return t.sign == 0 || t.weight == 0.0; });
}

Eigen::MatrixXd LowRankMatrix::dense(int size) const
{
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(size, size);
  for (const auto& t : terms)
  {
    for (const auto& [r, vr] : t.entries)
    {
      for (const auto& [c, vc] : t.entries)
      {
        out(r, c) += t.coef * vr * vc;
      }
    }
  }
  return out;
}

double LowRankMatrix::dot(const Eigen::MatrixXd& z) const
{
  double total = 0.0;
  for (const auto& t : terms)
  {
    double quad = 0.0;
    for (const auto& [r, vr] : t.entries)
    {
      for (const auto& [c, vc] : t.entries)
      {
        quad += vr * z(r, c) * vc;
      }
    }
    total += t.coef * quad;
  }
  return total;
}

LowRankMatrix SdpProblem::pair_matrix(EdgeKind kind, int i, int j) const
{
  LowRankMatrix::Term term;
  if (kind == EdgeKind::SensorSensor)
  {
    term.entries = {{dimension + i, 1.0}, {dimension + j, -1.0}};
  }
  else
  {
    for (int c = 0; c < dimension; ++c)
    {
      term.entries.emplace_back(c, anchors[i][c]);
    }
    term.entries.emplace_back(dimension + j, -1.0);
  }
  return LowRankMatrix{{std::move(term)}};
}

Eigen::MatrixXd SdpProblem::dual_slack(const Eigen::VectorXd& multipliers) const
{
  Eigen::MatrixXd u = -objective_matrix;
  for (std::size_t k = 0; k < constraints.size(); ++k)
  {
    u += multipliers[static_cast<Eigen::Index>(k)] * constraints[k].matrix.dense(size());
  }
  return u;
}

double SdpProblem::dual_objective(const Eigen::VectorXd& multipliers) const
{
  double total = 0.0;
  for (std::size_t k = 0; k < constraints.size(); ++k)
  {
    total += multipliers[static_cast<Eigen::Index>(k)] * constraints[k].rhs;
  }
  return total;
}

double SdpProblem::primal_objective(const Eigen::MatrixXd& z) const
{
  return (objective_matrix.array() * z.array()).sum();
}

Eigen::VectorXd SdpProblem::constraint_residuals(const Eigen::MatrixXd& z) const
{
  Eigen::VectorXd r(static_cast<Eigen::Index>(constraints.size()));
  for (std::size_t k = 0; k < constraints.size(); ++k)
  {
    r[static_cast<Eigen::Index>(k)] = constraints[k].matrix.dot(z) - constraints[k].rhs;
  }
  return r;
}

Eigen::MatrixXd lifted_matrix(const std::vector<Point>& sensor_positions, int dimension)
{
  const int n = static_cast<int>(sensor_positions.size());
  Eigen::MatrixXd basis(dimension, dimension + n);
  basis.leftCols(dimension).setIdentity();
  for (int j = 0; j < n; ++j)
  {
    basis.col(dimension + j) = sensor_positions[j];
  }
  return basis.transpose() * basis;
}

SdpProblem assemble_relaxation(const NetworkInstance& instance, const ObjectiveSpec& objective)
{
  SdpProblem p;
  p.dimension = instance.dimension();
  p.n_sensors = instance.n_sensors();
  p.anchors = instance.anchors();
  p.edges = instance.edges();
  p.objective = objective;
  const int d = p.dimension;

  Eigen::MatrixXd spread(d, instance.n_anchors() - 1);
  for (int k = 1; k < instance.n_anchors(); ++k)
  {
    spread.col(k - 1) = instance.anchors()[k] - instance.anchors()[0];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(spread);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv.size() < d || sv[d - 1] <= 1e-9 * std::max(1.0, sv[0]))
  {
    throw InvalidInput("anchors are not affinely independent; the I_d block cannot fix the frame");
  }

  for (int a = 0; a < d; ++a)
  {
    for (int b = a; b < d; ++b)
    {
      SdpConstraint c;
      if (a == b)
      {
        c.matrix.terms.push_back({1.0, {{a, 1.0}}});
        c.rhs = 1.0;
      }
      else
      {
        c.matrix.terms.push_back({0.25, {{a, 1.0}, {b, 1.0}}});
        c.matrix.terms.push_back({-0.25, {{a, 1.0}, {b, -1.0}}});
        c.rhs = 0.0;
      }
      p.constraints.push_back(std::move(c));
    }
  }
  for (const auto& e : instance.edges())
  {
    p.constraints.push_back({p.pair_matrix(e.kind, e.i, e.j), e.dist * e.dist});
  }

  p.objective_matrix = Eigen::MatrixXd::Zero(p.size(), p.size());
  for (std::size_t t = 0; t < objective.terms.size(); ++t)
  {
    const auto& term = objective.terms[t];
    const bool ss = term.kind == EdgeKind::SensorSensor;
    const bool in_range = ss ? (term.i >= 0 && term.i < p.n_sensors && term.j >= 0 && term.j < p.n_sensors &&
                                term.i != term.j)
                             : (term.i >= 0 && term.i < instance.n_anchors() && term.j >= 0 && term.j < p.n_sensors);
    if (!in_range)
    {
      throw InvalidInput("objective term " + std::to_string(t) + " references an invalid pair");
    }
    if (term.weight < 0.0 || term.sign < -1 || term.sign > 1)
    {
      throw InvalidInput("objective term " + std::to_string(t) + " has invalid sign or weight");
    }
    if (term.sign == 0)
    {
      continue;
    }
    if (instance.has_edge(term.kind, term.i, term.j))
    {
      p.flagged_terms.push_back(static_cast<int>(t));
    }
    p.objective_matrix += term.sign * term.weight * p.pair_matrix(term.kind, term.i, term.j).dense(p.size());
  }

  if (instance.sensor_truth())
  {
    const Eigen::MatrixXd z = lifted_matrix(*instance.sensor_truth(), d);
    const Eigen::VectorXd r = p.constraint_residuals(z);
    if (r.size() > 0 && r.cwiseAbs().maxCoeff() > 1e-9 * (1.0 + z.cwiseAbs().maxCoeff()))
    {
      throw InvalidInput("ground truth does not satisfy the assembled constraints");
    }
  }
  return p;
}

const char* to_string(SolveStatus status)
{
  switch (status)
  {
    case SolveStatus::Converged:
      return "converged";
    case SolveStatus::Infeasible:
      return "infeasible";
    case SolveStatus::Unbounded:
      return "unbounded";
    case SolveStatus::IterationLimit:
      return "iteration-limit";
    case SolveStatus::Stalled:
      return "stalled";
  }
  return "unknown";
}

const char* to_string(Certification c)
{
  switch (c)
  {
    case Certification::True:
      return "true";
    case Certification::False:
      return "false";
    case Certification::Indeterminate:
      return "indeterminate";
  }
  return "unknown";
}

int numerical_rank(const Eigen::MatrixXd& matrix, double rank_tol)
{
  if (matrix.size() == 0)
  {
    return 0;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(0.5 * (matrix + matrix.transpose()), Eigen::EigenvaluesOnly);
  const Eigen::VectorXd& ev = eig.eigenvalues();
  const double cutoff = rank_tol * std::max(ev.maxCoeff(), 1.0);
  return static_cast<int>((ev.array() > cutoff).count());
}

// Interior-point method -------------------------------------------------------

namespace
{

/// All constraint matrices flattened into one table of rank-one terms.
struct TermTable
{
  Eigen::MatrixXd vectors;  // N x R
  Eigen::VectorXd coef;     // R
  std::vector<int> owner;   // R -> constraint
  Eigen::VectorXd rhs;      // m

  explicit TermTable(const SdpProblem& p)
  {
    int total = 0;
    for (const auto& c : p.constraints)
    {
      total += static_cast<int>(c.matrix.terms.size());
    }
    vectors = Eigen::MatrixXd::Zero(p.size(), total);
    coef.resize(total);
    rhs.resize(static_cast<Eigen::Index>(p.constraints.size()));
    int r = 0;
    for (std::size_t k = 0; k < p.constraints.size(); ++k)
    {
      rhs[static_cast<Eigen::Index>(k)] = p.constraints[k].rhs;
      for (const auto& t : p.constraints[k].matrix.terms)
      {
        for (const auto& [idx, v] : t.entries)
        {
          vectors(idx, r) += v;
        }
        coef[r] = t.coef;
        owner.push_back(static_cast<int>(k));
        ++r;
      }
    }
  }

  Eigen::Index m() const { return rhs.size(); }

  /// A(B) for a (possibly non-symmetric) matrix B.
  Eigen::VectorXd apply(const Eigen::MatrixXd& b) const
  {
    const Eigen::MatrixXd bv = b * vectors;
    Eigen::VectorXd out = Eigen::VectorXd::Zero(m());
    for (Eigen::Index r = 0; r < vectors.cols(); ++r)
    {
      out[owner[r]] += coef[r] * vectors.col(r).dot(bv.col(r));
    }
    return out;
  }

  /// A^T(y) = sum_k y_k A_k.
  Eigen::MatrixXd adjoint(const Eigen::VectorXd& y) const
  {
    Eigen::VectorXd scale(vectors.cols());
    for (Eigen::Index r = 0; r < vectors.cols(); ++r)
    {
      scale[r] = coef[r] * y[owner[r]];
    }
    return vectors * scale.asDiagonal() * vectors.transpose();
  }

  /// Schur complement M_kl = tr(A_k X A_l W).
  Eigen::MatrixXd schur(const Eigen::MatrixXd& x, const Eigen::MatrixXd& w) const
  {
    const Eigen::MatrixXd g1 = vectors.transpose() * x * vectors;
    const Eigen::MatrixXd g2 = vectors.transpose() * w * vectors;
    const Eigen::Index r_count = vectors.cols();
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m(), m());
    for (Eigen::Index r = 0; r < r_count; ++r)
    {
      for (Eigen::Index s = 0; s < r_count; ++s)
      {
        out(owner[r], owner[s]) += coef[r] * coef[s] * g1(r, s) * g2(r, s);
      }
    }
    return out;
  }
};

Eigen::MatrixXd sym(const Eigen::MatrixXd& a) { return 0.5 * (a + a.transpose()); }

double inner(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) { return (a.array() * b.array()).sum(); }

/// Largest alpha with X + alpha dX still PSD; infinity if dX never leaves the cone.
double max_step(const Eigen::MatrixXd& x, const Eigen::MatrixXd& dx)
{
  Eigen::LLT<Eigen::MatrixXd> llt(x);
  if (llt.info() != Eigen::Success)
  {
    return 0.0;
  }
  const Eigen::MatrixXd l_inv_dx = llt.matrixL().solve(dx);
  const Eigen::MatrixXd t = llt.matrixL().solve(l_inv_dx.transpose());
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym(t), Eigen::EigenvaluesOnly);
  const double lmin = eig.eigenvalues().minCoeff();
  return lmin >= 0.0 ? std::numeric_limits<double>::infinity() : -1.0 / lmin;
}

/// Cholesky of the Schur complement; adds a tiny diagonal shift when constraints are dependent.
class SchurSolver
{
public:
  explicit SchurSolver(const Eigen::MatrixXd& m)
  {
    llt_.compute(m);
    if (llt_.info() == Eigen::Success)
    {
      return;
    }
    const double base = std::max(m.diagonal().cwiseAbs().maxCoeff(), 1e-300);
    for (double shift = 1e-14; shift < 1.0; shift *= 100.0)
    {
      Eigen::MatrixXd shifted = m;
      shifted.diagonal().array() += shift * base;
      llt_.compute(shifted);
      if (llt_.info() == Eigen::Success)
      {
        return;
      }
    }
    ok_ = false;
  }

  bool ok() const { return ok_; }
  Eigen::VectorXd solve(const Eigen::VectorXd& rhs) const { return llt_.solve(rhs); }

private:
  Eigen::LLT<Eigen::MatrixXd> llt_;
  bool ok_ = true;
};

struct Iterate
{
  Eigen::MatrixXd x;
  Eigen::VectorXd y;
  Eigen::MatrixXd s;
};

}  // namespace

SolveResult solve(const SdpProblem& problem, const SolveOptions& options)
{
  if (!(options.feasibility_tol > 0.0) || !(options.rank_tol > 0.0) || options.max_iterations < 1)
  {
    throw InvalidInput("solve options must be positive");
  }
  const TermTable table(problem);
  const int n = problem.size();
  const double nd = static_cast<double>(n);
  // Internally: minimize <c, X> with c = -C, dual S = c - A^T y.
  const Eigen::MatrixXd c = -problem.objective_matrix;
  const Eigen::VectorXd& b = table.rhs;
  const double norm_b = b.norm();
  const double norm_c = c.norm();
  constexpr double kInfeasTol = 1e-8;

  double xi = std::max(10.0, std::sqrt(nd));
  double eta = std::max({10.0, std::sqrt(nd), 1.0 + norm_c});
  for (std::size_t k = 0; k < problem.constraints.size(); ++k)
  {
    const double norm_ak = problem.constraints[k].matrix.dense(n).norm();
    xi = std::max(xi, nd * (1.0 + std::abs(b[static_cast<Eigen::Index>(k)])) / (1.0 + norm_ak));
    eta = std::max(eta, 1.0 + norm_ak);
  }

  Iterate it{xi * Eigen::MatrixXd::Identity(n, n), Eigen::VectorXd::Zero(table.m()),
             eta * Eigen::MatrixXd::Identity(n, n)};
  SolveStatus status = SolveStatus::IterationLimit;
  int iterations = 0;
  bool have_converged = false;
  Iterate best = it;
  double best_merit = std::numeric_limits<double>::infinity();
  int stall_count = 0;
  double reference_merit = std::numeric_limits<double>::infinity();

  for (; iterations <= options.max_iterations; ++iterations)
  {
    const Eigen::VectorXd rp = b - table.apply(it.x);
    const Eigen::MatrixXd rd = c - it.s - table.adjoint(it.y);
    const double xs = inner(it.x, it.s);
    const double mu = xs / nd;
    const double rel_p = rp.norm() / (1.0 + norm_b);
    const double rel_d = rd.norm() / (1.0 + norm_c);
    const double pobj = inner(c, it.x);
    const double dobj = b.dot(it.y);

    const bool feasible_now = rel_p <= options.feasibility_tol && rel_d <= options.feasibility_tol;
    const bool converged_now = feasible_now && xs <= 10.0 * options.feasibility_tol;
    const double merit = std::max({rel_p, rel_d, xs / (1.0 + std::abs(pobj))});
    if ((converged_now && (!have_converged || merit < best_merit)) || (!have_converged && merit < best_merit))
    {
      best = it;
      best_merit = merit;
      have_converged = have_converged || converged_now;
    }
    if (converged_now && xs <= options.complementarity_target * (1.0 + std::abs(pobj)))
    {
      break;
    }
    if (iterations == options.max_iterations)
    {
      break;
    }

    // Farkas rays: a divergent dual certifies primal infeasibility, a divergent primal unboundedness.
    if (dobj > 0.0 && (c - rd).norm() <= kInfeasTol * dobj)
    {
      status = SolveStatus::Infeasible;
      break;
    }
    if (pobj < 0.0 && (b - rp).norm() <= kInfeasTol * (-pobj))
    {
      status = SolveStatus::Unbounded;
      break;
    }

    // Near the limit of double precision progress stops; keep the best iterate seen.
    if (merit < 0.5 * reference_merit)
    {
      reference_merit = merit;
      stall_count = 0;
    }
    else if (++stall_count >= 6)
    {
      // A stalled run that is still drifting along a ray is classified with a looser test.
      constexpr double kRayTol = 1e-5;
      if (!have_converged && dobj > 0.0 && (c - rd).norm() <= kRayTol * dobj)
      {
        status = SolveStatus::Infeasible;
      }
      else if (!have_converged && pobj < 0.0 && (b - rp).norm() <= kRayTol * (-pobj))
      {
        status = SolveStatus::Unbounded;
      }
      break;
    }

    Eigen::LLT<Eigen::MatrixXd> s_llt(it.s);
    if (s_llt.info() != Eigen::Success)
    {
      break;
    }
    const Eigen::MatrixXd w = s_llt.solve(Eigen::MatrixXd::Identity(n, n));
    const SchurSolver schur(table.schur(it.x, w));
    if (!schur.ok())
    {
      break;
    }
    const Eigen::VectorXd base_rhs = b + table.apply(it.x * rd * w);

    auto direction = [&](double sigma, const Eigen::MatrixXd* corr, Eigen::MatrixXd& dx, Eigen::VectorXd& dy,
                         Eigen::MatrixXd& ds) {
      Eigen::VectorXd rhs = base_rhs - sigma * mu * table.apply(w);
      if (corr)
      {
        rhs += table.apply(*corr);
      }
      dy = schur.solve(rhs);
      auto build = [&] {
        ds = sym(rd - table.adjoint(dy));
        dx = sigma * mu * w - it.x - sym(it.x * ds * w);
        if (corr)
        {
          dx -= sym(*corr);
        }
        dx = sym(dx);
      };
      build();
      // Refine against the primal equation A(dX) = Rp, which loses accuracy as W = S^-1 grows.
      for (int pass = 0; pass < 2; ++pass)
      {
        const Eigen::VectorXd miss = rp - table.apply(dx);
        if (miss.norm() <= 1e-3 * options.feasibility_tol * (1.0 + norm_b))
        {
          break;
        }
        dy += schur.solve(miss);
        build();
      }
    };

    Eigen::MatrixXd dx, ds;
    Eigen::VectorXd dy;
    direction(0.0, nullptr, dx, dy, ds);
    const double ap_aff = std::min(1.0, max_step(it.x, dx));
    const double ad_aff = std::min(1.0, max_step(it.s, ds));
    const double mu_aff = inner(it.x + ap_aff * dx, it.s + ad_aff * ds) / nd;
    const double step_min = std::min(ap_aff, ad_aff);
    const double exponent = std::max(1.0, options.centering_exponent * step_min * step_min);
    const double sigma = std::clamp(std::pow(std::max(mu_aff, 0.0) / mu, exponent), 0.0, 1.0);

    const Eigen::MatrixXd corr = dx * ds * w;
    direction(sigma, &corr, dx, dy, ds);

    const double gamma = std::min(options.step_fraction, 0.9 + 0.09 * step_min);
    const double ap = std::min(1.0, gamma * max_step(it.x, dx));
    const double ad = std::min(1.0, gamma * max_step(it.s, ds));
    if (ap < 1e-10 && ad < 1e-10)
    {
      break;
    }
    it.x = sym(it.x + ap * dx);
    it.y += ad * dy;
    it.s = sym(it.s + ad * ds);
  }

  if (status != SolveStatus::Infeasible && status != SolveStatus::Unbounded)
  {
    if (have_converged)
    {
      status = SolveStatus::Converged;
    }
    else if (iterations < options.max_iterations)
    {
      status = SolveStatus::Stalled;
    }
    it = best;
  }

  SolveResult result;
  SdpSolution& sol = result.solution;
  const int d = problem.dimension;
  sol.dimension = d;
  sol.Z = it.x;
  sol.X = it.x.topRightCorner(d, problem.n_sensors);
  sol.Y = it.x.bottomRightCorner(problem.n_sensors, problem.n_sensors);
  sol.rank_Z = numerical_rank(sol.Z, options.rank_tol);
  sol.gap = sol.Y.trace() - sol.X.squaredNorm();
  sol.status = status;
  sol.iterations = iterations;
  sol.objective_value = problem.primal_objective(sol.Z);
  sol.constraint_residuals = problem.constraint_residuals(sol.Z);
  sol.primal_residual = sol.constraint_residuals.norm() / (1.0 + norm_b);
  sol.dual_residual = (c - it.s - table.adjoint(it.y)).norm() / (1.0 + norm_c);
  sol.zero_objective = problem.objective.is_zero();

  DualCertificate& cert = result.certificate;
  cert.dimension = d;
  const Eigen::VectorXd multipliers = -it.y;
  cert.U = problem.dual_slack(multipliers);
  cert.V = Eigen::MatrixXd::Zero(d, d);
  int k = 0;
  for (int a = 0; a < d; ++a)
  {
    for (int bb = a; bb < d; ++bb, ++k)
    {
      if (a == bb)
      {
        cert.V(a, a) = multipliers[k];
      }
      else
      {
        cert.V(a, bb) = cert.V(bb, a) = 0.5 * multipliers[k];
      }
    }
  }
  for (std::size_t e = 0; e < problem.edges.size(); ++e)
  {
    const double value = multipliers[problem.n_block_constraints() + static_cast<Eigen::Index>(e)];
    (problem.edges[e].kind == EdgeKind::SensorSensor ? cert.y : cert.w).push_back(value);
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> ueig(cert.U, Eigen::EigenvaluesOnly);
  cert.scale = std::max(ueig.eigenvalues().cwiseAbs().maxCoeff(), 0.0);
  cert.rank_U = cert.scale > 0.0 ? numerical_rank(cert.U / cert.scale, options.rank_tol) : 0;
  cert.complementarity = std::abs(inner(sol.Z, cert.U));
  return result;
}

CertifyReport certify_unique(const SdpSolution& solution, const SolveOptions& options)
{
  CertifyReport report;
  report.rank = solution.rank_Z;
  report.gap = solution.gap;
  std::ostringstream diag;
  diag << "status=" << to_string(solution.status) << " rank_Z=" << solution.rank_Z << " gap=" << solution.gap
       << " rank_tol=" << options.rank_tol;
  if (!solution.zero_objective)
  {
    diag << " (objective is not zero: the max-rank property is not guaranteed)";
  }
  if (!solution.converged())
  {
    report.status = Certification::Indeterminate;
  }
  else
  {
    report.status = solution.rank_Z == solution.dimension ? Certification::True : Certification::False;
  }
  report.diagnostics = diag.str();
  return report;
}

bool certify_strong(const DualCertificate& certificate, const SolveOptions& options)
{
  if (certificate.scale <= 0.0)
  {
    return false;
  }
  return certificate.rank_U == certificate.n_sensors() &&
         certificate.complementarity / certificate.scale <= 10.0 * options.feasibility_tol;
}

ExtractedPositions extract_positions(const SdpSolution& solution)
{
  ExtractedPositions out;
  for (Eigen::Index j = 0; j < solution.X.cols(); ++j)
  {
    out.positions.emplace_back(solution.X.col(j));
  }
  out.gap = solution.gap;
  return out;
}

std::string solution_to_json(const SdpSolution& solution, const DualCertificate& certificate)
{
  nlohmann::json doc;
  nlohmann::json positions = nlohmann::json::array();
  for (Eigen::Index j = 0; j < solution.X.cols(); ++j)
  {
    std::vector<double> p(static_cast<std::size_t>(solution.X.rows()));
    for (Eigen::Index r = 0; r < solution.X.rows(); ++r)
    {
      p[static_cast<std::size_t>(r)] = solution.X(r, j);
    }
    positions.push_back(p);
  }
  doc["positions"] = positions;
  doc["gap"] = solution.gap;
  doc["rank_Z"] = solution.rank_Z;
  doc["rank_U"] = certificate.rank_U;
  doc["converged"] = solution.converged();
  doc["status"] = to_string(solution.status);
  doc["iterations"] = solution.iterations;
  doc["objective_value"] = solution.objective_value;
  return doc.dump(2);
}

std::string spectra_csv(const SdpSolution& solution, const DualCertificate& certificate)
{
  std::ostringstream out;
  out.precision(17);
  out << "matrix,index,eigenvalue\n";
  auto dump = [&](const char* name, const Eigen::MatrixXd& m) {
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(sym(m), Eigen::EigenvaluesOnly);
    for (Eigen::Index k = 0; k < eig.eigenvalues().size(); ++k)
    {
      out << name << ',' << k << ',' << eig.eigenvalues()[k] << '\n';
    }
  };
  dump("Z", solution.Z);
  dump("U", certificate.U);
  return out.str();
}

}  // namespace snl
