#pragma once

#include "snl/network.hpp"

#include <Eigen/Dense>

#include <string>
#include <utility>
#include <vector>

namespace snl
{

/// One objective term: sign * weight * (coefficient matrix of the pair) . Z.
///
/// The pair is described exactly like an edge (kind, i, j) but need not be a
/// measured edge. sign is +1 (maximize the squared length), -1 (minimize) or 0.
struct ObjectiveTerm
{
  EdgeKind kind = EdgeKind::SensorSensor;
  int i = 0;
  int j = 0;
  int sign = 1;
  double weight = 1.0;
};

/// A linear objective to maximize over the relaxation. No terms means "maximize 0".
struct ObjectiveSpec
{
  std::vector<ObjectiveTerm> terms;

  bool is_zero() const;
};

/// Symmetric matrix written as sum_r coef_r * v_r v_r^T with sparse v_r.
struct LowRankMatrix
{
  struct Term
  {
    double coef = 1.0;
    std::vector<std::pair<int, double>> entries;
  };
  std::vector<Term> terms;

  Eigen::MatrixXd dense(int size) const;
  double dot(const Eigen::MatrixXd& z) const;
};

struct SdpConstraint
{
  LowRankMatrix matrix;
  double rhs = 0.0;
};

/// The relaxation over Z = [I X; X^T Y] of size d+n.
///
/// Constraints are ordered: the d(d+1)/2 identity-block equalities (row-major
/// upper triangle), then one per instance edge in instance order.
class SdpProblem
{
public:
  int dimension = 0;
  int n_sensors = 0;
  std::vector<Point> anchors;
  std::vector<SdpConstraint> constraints;
  std::vector<EdgeMeasurement> edges;  // aligned with constraints[n_block_constraints() + e]
  ObjectiveSpec objective;
  Eigen::MatrixXd objective_matrix;  // C, maximized as C . Z
  std::vector<int> flagged_terms;    // objective terms that reference a measured edge

  int size() const { return dimension + n_sensors; }
  int n_block_constraints() const { return dimension * (dimension + 1) / 2; }

  /// Coefficient matrix of an (edge-like) pair: A_ij or the anchor variant.
  LowRankMatrix pair_matrix(EdgeKind kind, int i, int j) const;

  /// U = sum_k multipliers_k A_k - C.
  Eigen::MatrixXd dual_slack(const Eigen::VectorXd& multipliers) const;
  double dual_objective(const Eigen::VectorXd& multipliers) const;
  double primal_objective(const Eigen::MatrixXd& z) const;

  /// A(Z) - b for every constraint.
  Eigen::VectorXd constraint_residuals(const Eigen::MatrixXd& z) const;
};

SdpProblem assemble_relaxation(const NetworkInstance& instance, const ObjectiveSpec& objective = {});

/// Z built from an exact realization: [I X; X^T X^T X].
Eigen::MatrixXd lifted_matrix(const std::vector<Point>& sensor_positions, int dimension);

enum class SolveStatus
{
  Converged,
  Infeasible,
  Unbounded,
  IterationLimit,
  Stalled,
};

const char* to_string(SolveStatus status);

struct SolveOptions
{
  double feasibility_tol = 1e-8;
  double rank_tol = 1e-6;
  int max_iterations = 100;
  // Iterations continue past convergence until <Z, U> drops below this.
  double complementarity_target = 1e-11;
  double step_fraction = 0.98;
  double centering_exponent = 3.0;
};

struct SdpSolution
{
  Eigen::MatrixXd Z;
  Eigen::MatrixXd X;
  Eigen::MatrixXd Y;
  int dimension = 0;
  int rank_Z = 0;
  double gap = 0.0;
  SolveStatus status = SolveStatus::IterationLimit;
  int iterations = 0;
  double objective_value = 0.0;
  double primal_residual = 0.0;  // relative, ||A(Z) - b|| / (1 + ||b||)
  double dual_residual = 0.0;
  bool zero_objective = true;
  Eigen::VectorXd constraint_residuals;

  bool converged() const { return status == SolveStatus::Converged; }
};

struct DualCertificate
{
  int dimension = 0;
  Eigen::MatrixXd V;
  std::vector<double> y;  // sensor-sensor edges, in instance order
  std::vector<double> w;  // anchor-sensor edges, in instance order
  Eigen::MatrixXd U;
  int rank_U = 0;
  double complementarity = 0.0;  // |Z . U| against the primal it was produced with
  double scale = 1.0;            // spectral norm of U

  int n_sensors() const { return static_cast<int>(U.rows()) - dimension; }
};

struct SolveResult
{
  SdpSolution solution;
  DualCertificate certificate;
};

/// Primal-dual path-following interior-point method (HKM direction with a
/// Mehrotra corrector). For the zero objective the limit point lies in the
/// relative interior of the feasible set, i.e. it is a max-rank solution.
SolveResult solve(const SdpProblem& problem, const SolveOptions& options = {});

/// Counts eigenvalues above rank_tol * max(lambda_max, 1).
int numerical_rank(const Eigen::MatrixXd& matrix, double rank_tol);

enum class Certification
{
  True,
  False,
  Indeterminate,
};

const char* to_string(Certification c);

struct CertifyReport
{
  Certification status = Certification::Indeterminate;
  int rank = 0;
  double gap = 0.0;
  std::string diagnostics;
};

/// Unique localizability from a max-rank (zero-objective) solution.
CertifyReport certify_unique(const SdpSolution& solution, const SolveOptions& options = {});

/// Strong localizability: the (norm-scaled) dual slack has rank n and is complementary.
bool certify_strong(const DualCertificate& certificate, const SolveOptions& options = {});

struct ExtractedPositions
{
  std::vector<Point> positions;
  double gap = 0.0;
};

ExtractedPositions extract_positions(const SdpSolution& solution);

std::string solution_to_json(const SdpSolution& solution, const DualCertificate& certificate);

/// Eigenvalues of Z and U as CSV rows: matrix,index,eigenvalue.
std::string spectra_csv(const SdpSolution& solution, const DualCertificate& certificate);

}  // namespace snl
