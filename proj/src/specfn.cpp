#include "bayessum/specfn.hpp"

#include <array>
#include <cmath>
#include <limits>
#include <string>
#include <vector>

#include "bayessum/errors.hpp"

namespace bayessum::specfn {
namespace {

constexpr double kEps = 1e-15;
constexpr double kTiny = 1e-300;
constexpr int kMaxIter = 100000;

void require_finite(double v, const char* what) {
  if (!std::isfinite(v)) throw DomainError(std::string(what) + ": non-finite argument");
}

// Lower regularized gamma P(s, x) by its power series.
SpecFnResult gamma_p_series(double s, double x) {
  double ap = s;
  double del = 1.0 / s;
  double sum = del;
  for (int n = 1; n <= kMaxIter; ++n) {
    ap += 1.0;
    del *= x / ap;
    sum += del;
    if (std::abs(del) < std::abs(sum) * kEps) {
      const double log_pref = -x + s * std::log(x) - std::lgamma(s);
      return {sum * std::exp(log_pref), true, n};
    }
  }
  return {std::numeric_limits<double>::quiet_NaN(), false, kMaxIter};
}

// Upper regularized gamma Q(s, x) by the modified Lentz continued fraction.
SpecFnResult gamma_q_cf(double s, double x) {
  double b = x + 1.0 - s;
  double c = 1.0 / kTiny;
  double d = 1.0 / b;
  double h = d;
  for (int i = 1; i <= kMaxIter; ++i) {
    const double an = -i * (i - s);
    b += 2.0;
    d = an * d + b;
    if (std::abs(d) < kTiny) d = kTiny;
    c = b + an / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) {
      const double log_pref = -x + s * std::log(x) - std::lgamma(s);
      return {std::exp(log_pref) * h, true, i};
    }
  }
  return {std::numeric_limits<double>::quiet_NaN(), false, kMaxIter};
}

// Continued fraction for the incomplete beta (Lentz).
SpecFnResult beta_cf(double a, double b, double x) {
  const double qab = a + b;
  const double qap = a + 1.0;
  const double qam = a - 1.0;
  double c = 1.0;
  double d = 1.0 - qab * x / qap;
  if (std::abs(d) < kTiny) d = kTiny;
  d = 1.0 / d;
  double h = d;
  for (int m = 1; m <= kMaxIter; ++m) {
    const int m2 = 2 * m;
    double aa = m * (b - m) * x / ((qam + m2) * (a + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    h *= d * c;
    aa = -(a + m) * (qab + m) * x / ((a + m2) * (qap + m2));
    d = 1.0 + aa * d;
    if (std::abs(d) < kTiny) d = kTiny;
    c = 1.0 + aa / c;
    if (std::abs(c) < kTiny) c = kTiny;
    d = 1.0 / d;
    const double del = d * c;
    h *= del;
    if (std::abs(del - 1.0) < kEps) return {h, true, m};
  }
  return {std::numeric_limits<double>::quiet_NaN(), false, kMaxIter};
}

struct StirlingTable {
  std::array<std::array<std::uint64_t, kMaxStirling + 1>, kMaxStirling + 1> s{};
  StirlingTable() {
    s[0][0] = 1;
    for (int n = 1; n <= kMaxStirling; ++n) {
      for (int j = 1; j <= n; ++j) {
        s[n][j] = static_cast<std::uint64_t>(j) * s[n - 1][j] + s[n - 1][j - 1];
      }
    }
  }
};

const StirlingTable& stirling_table() {
  static const StirlingTable table;  // one-time, thread-safe initialization
  return table;
}

void check_degree(int n) {
  if (n < 0) throw DomainError("polynomial degree must be nonnegative");
  if (n > kMaxPolynomialDegree) {
    throw CapabilityError("moment degree " + std::to_string(n) + " exceeds the supported maximum " +
                          std::to_string(kMaxPolynomialDegree));
  }
}

}  // namespace

SpecFnResult reg_gamma_q_result(double s, double x) {
  require_finite(s, "reg_gamma_q");
  require_finite(x, "reg_gamma_q");
  if (s <= 0.0 || x < 0.0) throw DomainError("reg_gamma_q requires s > 0 and x >= 0");
  if (x == 0.0) return {1.0, true, 0};
  if (x < s + 1.0) {
    SpecFnResult p = gamma_p_series(s, x);
    p.value = 1.0 - p.value;
    return p;
  }
  return gamma_q_cf(s, x);
}

double reg_gamma_q(double s, double x) {
  const SpecFnResult r = reg_gamma_q_result(s, x);
  if (!r.converged) throw CapabilityError("reg_gamma_q did not converge");
  return r.value;
}

SpecFnResult reg_inc_beta_result(double a, double b, double x) {
  require_finite(a, "reg_inc_beta");
  require_finite(b, "reg_inc_beta");
  require_finite(x, "reg_inc_beta");
  if (a <= 0.0 || b <= 0.0) throw DomainError("reg_inc_beta requires a, b > 0");
  if (x < 0.0 || x > 1.0) throw DomainError("reg_inc_beta requires 0 <= x <= 1");
  if (x == 0.0) return {0.0, true, 0};
  if (x == 1.0) return {1.0, true, 0};
  const double log_front = std::lgamma(a + b) - std::lgamma(a) - std::lgamma(b) + a * std::log(x) +
                           b * std::log1p(-x);
  const double front = std::exp(log_front);
  if (x < (a + 1.0) / (a + b + 2.0)) {
    SpecFnResult cf = beta_cf(a, b, x);
    cf.value = front * cf.value / a;
    return cf;
  }
  SpecFnResult cf = beta_cf(b, a, 1.0 - x);
  cf.value = 1.0 - front * cf.value / b;
  return cf;
}

double reg_inc_beta(double a, double b, double x) {
  const SpecFnResult r = reg_inc_beta_result(a, b, x);
  if (!r.converged) throw CapabilityError("reg_inc_beta did not converge");
  return r.value;
}

std::uint64_t stirling2(int n, int j) {
  if (n < 0 || j < 0) throw DomainError("stirling2 requires nonnegative arguments");
  if (n > kMaxStirling) {
    throw CapabilityError("stirling2: n = " + std::to_string(n) + " exceeds cached maximum " +
                          std::to_string(kMaxStirling));
  }
  if (j > n) return 0;
  return stirling_table().s[n][j];
}

double touchard(int n, double eta) {
  check_degree(n);
  if (!(eta > 0.0) || !std::isfinite(eta)) throw DomainError("touchard requires eta > 0");
  double sum = 0.0;
  double power = 1.0;
  for (int j = 0; j <= n; ++j) {
    sum += static_cast<double>(stirling2(n, j)) * power;
    power *= eta;
  }
  return sum;
}

double gen_touchard(int n, double tau, double q) {
  check_degree(n);
  if (!(tau > 0.0) || !(q > 0.0 && q < 1.0)) throw DomainError("gen_touchard requires tau > 0, 0 < q < 1");
  const double ratio = (1.0 - q) / q;
  double sum = 0.0;
  double rising = 1.0;  // (tau)_j ratio^j
  for (int j = 0; j <= n; ++j) {
    sum += static_cast<double>(stirling2(n, j)) * rising;
    rising *= (tau + j) * ratio;
  }
  return sum;
}

double bell_complete(int n, std::span<const double> args) {
  if (n < 0) throw DomainError("bell_complete requires n >= 0");
  if (static_cast<int>(args.size()) != n) {
    throw ContractError("bell_complete: expected " + std::to_string(n) + " arguments, got " +
                        std::to_string(args.size()));
  }
  std::vector<double> b(static_cast<std::size_t>(n) + 1, 0.0);
  b[0] = 1.0;
  for (int m = 0; m < n; ++m) {
    double acc = 0.0;
    for (int k = 0; k <= m; ++k) acc += binomial(m, k) * b[m - k] * args[k];
    b[m + 1] = acc;
  }
  return b[n];
}

void skellam_cumulants(double lambda1, double lambda2, std::span<double> out) {
  for (std::size_t k = 0; k < out.size(); ++k) {
    const int order = static_cast<int>(k) + 1;
    out[k] = lambda1 + ((order % 2 == 0) ? lambda2 : -lambda2);
  }
}

SpecFnResult bessel_i_result(int n, double x, double limit) {
  if (n < 0) throw DomainError("bessel_i requires n >= 0");
  require_finite(x, "bessel_i");
  if (std::abs(x) > limit) {
    throw CapabilityError("bessel_i: |x| exceeds the configured limit");
  }
  if (x == 0.0) return {n == 0 ? 1.0 : 0.0, true, 1};
  const double ax = std::abs(x);
  const double half = 0.5 * ax;
  const double q = half * half;
  double term = std::exp(n * std::log(half) - std::lgamma(n + 1.0));
  // The leading term dominates while k < x/2; when it underflows so does the sum.
  if (term == 0.0 && q < n + 1.0) return {0.0, true, 1};
  double sum = term;
  const int max_terms = 100000;
  for (int k = 1; k < max_terms; ++k) {
    term *= q / (static_cast<double>(k) * (k + n));
    sum += term;
    if (term <= 1e-16 * sum && k > half) {
      const double sign = (x < 0.0 && n % 2 == 1) ? -1.0 : 1.0;
      return {sign * sum, true, k + 1};
    }
  }
  return {std::numeric_limits<double>::quiet_NaN(), false, max_terms};
}

double bessel_i(int n, double x, double limit) {
  const SpecFnResult r = bessel_i_result(n, x, limit);
  if (!r.converged) throw CapabilityError("bessel_i series did not converge");
  return r.value;
}

double log_factorial(std::int64_t n) {
  if (n < 0) throw DomainError("log_factorial of a negative integer");
  return std::lgamma(static_cast<double>(n) + 1.0);
}

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  double r = 1.0;
  for (int i = 1; i <= k; ++i) r = r * (n - k + i) / i;
  return std::round(r);
}

double log_binomial(std::int64_t n, std::int64_t k) {
  if (k < 0 || k > n || n < 0) return -std::numeric_limits<double>::infinity();
  return std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0);
}

}  // namespace bayessum::specfn
