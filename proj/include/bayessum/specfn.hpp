#pragma once

#include <cstdint>
#include <span>

namespace bayessum::specfn {

inline constexpr int kMaxStirling = 20;
inline constexpr int kMaxPolynomialDegree = 16;
inline constexpr double kDefaultBesselLimit = 500.0;

/// Value of a truncated series / continued fraction together with its
/// convergence diagnostics.
struct SpecFnResult {
  double value = 0.0;
  bool converged = false;
  int terms_used = 0;
};

/// Upper regularized incomplete gamma Q(s, x) = Gamma(s, x) / Gamma(s).
/// Series for P below the x < s + 1 crossover, Lentz continued fraction above.
SpecFnResult reg_gamma_q_result(double s, double x);
double reg_gamma_q(double s, double x);

/// Regularized incomplete beta I_x(a, b).
SpecFnResult reg_inc_beta_result(double a, double b, double x);
double reg_inc_beta(double a, double b, double x);

/// Stirling number of the second kind S(n, j), n <= kMaxStirling.
std::uint64_t stirling2(int n, int j);

/// Touchard polynomial T_n(eta) = sum_j S(n, j) eta^j, the n-th raw
/// moment of Poisson(eta).
double touchard(int n, double eta);

/// n-th raw moment of NB(tau, q) with pmf C(x+tau-1, x) (1-q)^x q^tau:
/// M_n = sum_j S(n, j) (tau)_j ((1-q)/q)^j, (tau)_j the rising factorial.
double gen_touchard(int n, double tau, double q);

/// Complete exponential Bell polynomial B_n(x_1, ..., x_n) via
/// B_{m+1} = sum_k C(m, k) B_{m-k} x_{k+1}. `args` must have length n.
double bell_complete(int n, std::span<const double> args);

/// Skellam cumulants kappa_k = lambda1 + (-1)^k lambda2, k = 1..n.
void skellam_cumulants(double lambda1, double lambda2, std::span<double> out);

/// Modified Bessel function of the first kind I_n(x), power series,
/// relative tolerance 1e-12, |x| <= limit.
SpecFnResult bessel_i_result(int n, double x, double limit = kDefaultBesselLimit);
double bessel_i(int n, double x, double limit = kDefaultBesselLimit);

double log_factorial(std::int64_t n);
double binomial(int n, int k);
/// log C(n, k) for 0 <= k <= n; -inf otherwise.
double log_binomial(std::int64_t n, std::int64_t k);

}  // namespace bayessum::specfn
