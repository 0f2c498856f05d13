#include "snl/bound.hpp"

#include "snl/network.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace snl
{
namespace
{

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(exp(a) + exp(b)) without overflow.
double log_add(double a, double b)
{
  if (a == kNegInf)
  {
    return b;
  }
  if (b == kNegInf)
  {
    return a;
  }
  const double hi = std::max(a, b);
  return hi + std::log1p(std::exp(std::min(a, b) - hi));
}

// log(1 - exp(x)) for x <= 0.
double log1m_exp(double x)
{
  if (x >= 0.0)
  {
    return kNegInf;
  }
  return x > -M_LN2 ? std::log(-std::expm1(x)) : std::log1p(-std::exp(x));
}

double log_choose(int n, int k)
{
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

// k * log(x) with the convention 0 * log(0) = 0.
double xlogy(double k, double log_x)
{
  return k == 0.0 ? 0.0 : k * log_x;
}

void check_cells(int M, int minimum)
{
  if (M < minimum)
  {
    throw InvalidInput("need at least " + std::to_string(minimum) + " cells, got M = " + std::to_string(M));
  }
}

}  // namespace

double BoundInputs::alpha() const
{
  return std::sqrt(static_cast<double>(n) / M());
}

double BoundInputs::grid_radius() const
{
  // Same as 2*sqrt(2)*alpha/sqrt(n), without the rounding that would make equal b give unequal r.
  return 2.0 * std::sqrt(2.0) * cell_edge();
}

double log_binomial_pmf(int n, double p, int k)
{
  if (k < 0 || k > n)
  {
    return kNegInf;
  }
  return log_choose(n, k) + xlogy(k, std::log(p)) + xlogy(n - k, std::log1p(-p));
}

BinomialTails binomial_tails(int n, double p, int k)
{
  if (n < 0 || !(p >= 0.0 && p <= 1.0))
  {
    throw InvalidInput("binomial parameters out of range");
  }
  if (k < 0)
  {
    return {kNegInf, 0.0};
  }
  if (k >= n)
  {
    return {0.0, kNegInf};
  }
  double log_cdf = kNegInf;
  for (int i = 0; i <= k; ++i)
  {
    log_cdf = log_add(log_cdf, log_binomial_pmf(n, p, i));
  }
  if (log_cdf <= -M_LN2)
  {
    return {log_cdf, log1m_exp(log_cdf)};
  }
  // Lower tail above one half: sum the upper tail directly, stopping once terms are negligible.
  double log_tail = kNegInf;
  const double mode = n * p;
  for (int i = k + 1; i <= n; ++i)
  {
    const double t = log_binomial_pmf(n, p, i);
    log_tail = log_add(log_tail, t);
    if (i > mode && t < log_tail - 60.0)
    {
      break;
    }
  }
  return {log1m_exp(log_tail), log_tail};
}

double prob_clique_noncorner(int n, int M)
{
  check_cells(M, 5);
  if (n < 0)
  {
    throw InvalidInput("n must be nonnegative");
  }
  const double log_f = binomial_tails(n, 1.0 / M, 2).log_cdf;
  return -std::expm1((M - 4) * log_f);
}

double prob_empty_count(int n, int M, int i)
{
  check_cells(M, 1);
  if (i < 0 || i > M)
  {
    throw InvalidInput("empty-cell count " + std::to_string(i) + " outside [0, M]");
  }
  if (n < 0)
  {
    throw InvalidInput("n must be nonnegative");
  }
  const double log_p0 = M == 1 ? (n == 0 ? 0.0 : kNegInf) : n * std::log1p(-1.0 / M);
  const double log_q0 = log1m_exp(log_p0);
  const double log_prob = log_choose(M, i) + xlogy(i, log_p0) + xlogy(M - i, log_q0);
  return std::exp(log_prob);
}

double prob_densely_surrounded(int n, int M)
{
  check_cells(M, 2);
  if (n < 0)
  {
    throw InvalidInput("n must be nonnegative");
  }
  const double p = 1.0 / M;
  const double at_least_two = std::exp(4.0 * binomial_tails(n, p, 1).log_tail);
  const double exactly_two = std::exp(4.0 * log_binomial_pmf(n, p, 2));
  return at_least_two - exactly_two;
}

BoundReport localizability_lower_bound(const BoundInputs& inputs)
{
  if (inputs.b < 3)
  {
    throw InvalidInput("b must be at least 3");
  }
  if (inputs.n < 1)
  {
    throw InvalidInput("n must be positive");
  }
  const int n = inputs.n;
  const int M = inputs.M();
  BoundReport r;
  r.n = n;
  r.M = M;
  r.u = M / 5 - 1;
  const double radius = inputs.radius.value_or(inputs.grid_radius());
  if (radius < inputs.grid_radius() * (1.0 - 1e-12))
  {
    r.applicable = false;
    r.diagnostics.push_back("radius below 2l*sqrt(2); the bound does not apply");
  }
  if (n != 2 * M + 1)
  {
    r.diagnostics.push_back("n differs from dM+1 = " + std::to_string(2 * M + 1));
  }

  const double log_f = binomial_tails(n, 1.0 / M, 2).log_cdf;
  auto log_p_chat_i = [&](int i) { return log1m_exp((M - 4 - i) * log_f); };
  r.p_chat = std::exp(log_p_chat_i(0));
  r.p0 = M == 1 ? 0.0 : std::exp(n * std::log1p(-1.0 / M));
  r.p_hat = prob_densely_surrounded(n, M);
  r.p_hat_negative = r.p_hat < 0.0;

  r.terms.push_back(r.p_chat * prob_empty_count(n, M, 0));
  double log_product = 0.0;  // prod_{j=1}^{i-1} (1 - 4j/(M-j))
  for (int i = 1; i <= r.u; ++i)
  {
    if (i > 1)
    {
      const int j = i - 1;
      log_product += std::log1p(-4.0 * j / (M - j));
    }
    if (r.p_hat <= 0.0)
    {
      r.terms.push_back(0.0);
      continue;
    }
    const double log_term = i * std::log(r.p_hat) + log_p_chat_i(i) + std::log(prob_empty_count(n, M, i)) +
                            log_product;
    r.terms.push_back(std::exp(log_term));
  }
  if (r.p_hat_negative && r.u >= 1)
  {
    r.diagnostics.push_back("densely-surrounded probability is negative; terms with empty cells set to 0");
  }
  r.lower_bound = 0.0;
  for (double t : r.terms)
  {
    r.lower_bound += t;
  }
  return r;
}

RadiusResult min_radius_for_target(int n, double target)
{
  if (n < 19)
  {
    throw InvalidInput("n must be at least 19");
  }
  if (!(target > 0.0 && target <= 1.0))
  {
    throw InvalidInput("target probability must lie in (0, 1]");
  }
  RadiusResult best;
  // Every term is a probability strictly below 1, even where the sum rounds to 1.0.
  if (target >= 1.0)
  {
    return best;
  }
  for (int b = 3; b * b <= n; ++b)
  {
    BoundInputs in{n, b, std::nullopt};
    auto report = localizability_lower_bound(in);
    if (report.lower_bound >= target)
    {
      best.found = true;
      best.b = b;
      best.M = in.M();
      best.alpha = in.alpha();
      best.r = in.grid_radius();
      best.report = std::move(report);
    }
  }
  return best;
}

double aspnes_radius(int n)
{
  if (n < 2)
  {
    throw InvalidInput("n must be at least 2");
  }
  const double nn = static_cast<double>(n);
  return 2.0 * std::sqrt(2.0) * std::sqrt(std::log(nn) / nn);
}

std::string bound_curve_csv(const std::vector<int>& ns, double target)
{
  std::ostringstream out;
  out.precision(17);
  out << "n,b,M,alpha,r,lower_bound,aspnes_r\n";
  for (int n : ns)
  {
    const auto res = min_radius_for_target(n, target);
    if (!res.found)
    {
      continue;
    }
    out << n << ',' << res.b << ',' << res.M << ',' << res.alpha << ',' << res.r << ',' << res.report.lower_bound
        << ',' << aspnes_radius(n) << '\n';
  }
  return out.str();
}

}  // namespace snl
