#pragma once

#include <optional>
#include <string>
#include <vector>

namespace snl
{

/// Grid model in the plane: n points, M = b^2 cells.
struct BoundInputs
{
  int n = 19;
  int b = 3;
  // Connectivity radius; unset means the minimal admissible 2l*sqrt(2).
  std::optional<double> radius;

  int M() const { return b * b; }
  double alpha() const;
  double cell_edge() const { return 1.0 / b; }
  /// 2*sqrt(2)*alpha/sqrt(n), equal to 2l*sqrt(2).
  double grid_radius() const;
};

struct BoundReport
{
  int n = 0;
  int M = 0;
  double p_chat = 0.0;  // 3-clique in some non-corner cell
  double p0 = 0.0;      // a given cell is empty
  double p_hat = 0.0;   // an empty cell is densely surrounded (raw, may be negative)
  bool p_hat_negative = false;
  int u = 0;  // largest empty-cell count covered
  std::vector<double> terms;
  double lower_bound = 0.0;
  bool applicable = true;
  std::vector<std::string> diagnostics;
};

/// Binomial(n, p) lower tail P(X <= k) and upper tail P(X > k), both accurate.
struct BinomialTails
{
  double log_cdf = 0.0;
  double log_tail = 0.0;
};
BinomialTails binomial_tails(int n, double p, int k);

double log_binomial_pmf(int n, double p, int k);

double prob_clique_noncorner(int n, int M);
double prob_empty_count(int n, int M, int i);
double prob_densely_surrounded(int n, int M);

BoundReport localizability_lower_bound(const BoundInputs& inputs);

struct RadiusResult
{
  bool found = false;
  int b = 0;
  int M = 0;
  double alpha = 0.0;
  double r = 0.0;
  BoundReport report;
};

/// Largest M = b^2 <= n whose bound reaches `target`; smallest radius r = 2*sqrt(2)/b.
RadiusResult min_radius_for_target(int n, double target);

/// 2*sqrt(2)*sqrt(ln n / n).
double aspnes_radius(int n);

/// CSV with columns n,b,M,alpha,r,lower_bound,aspnes_r; rows with no admissible grid are skipped.
std::string bound_curve_csv(const std::vector<int>& ns, double target);

}  // namespace snl
