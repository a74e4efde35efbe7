#include <gtest/gtest.h>

#include <array>
#include <cmath>
#include <vector>

#include "bayessum/errors.hpp"
#include "bayessum/specfn.hpp"

using namespace bayessum;
using namespace bayessum::specfn;

namespace {

double poisson_cdf(int y, double eta) {
  double term = std::exp(-eta), sum = term;
  for (int k = 1; k <= y; ++k) {
    term *= eta / k;
    sum += term;
  }
  return sum;
}

void expect_rel(double got, double want, double tol) {
  EXPECT_NEAR(got, want, tol * std::max(1.0, std::abs(want))) << "want " << want;
}

}  // namespace

TEST(RegGammaQ, ClosedFormPoints) {
  EXPECT_NEAR(reg_gamma_q(1.0, 2.0), 0.1353352832366127, 1e-14);
  EXPECT_DOUBLE_EQ(reg_gamma_q(3.5, 0.0), 1.0);
  // Poisson(3) CDF at 3, summed in 40-digit arithmetic.
  EXPECT_NEAR(reg_gamma_q(4.0, 3.0), 0.64723188878223125873, 1e-13);
}

TEST(RegGammaQ, MatchesPoissonCdf) {
  for (double eta : {0.5, 2.0, 30.0}) {
    for (int y = 0; y <= 50; ++y) {
      EXPECT_NEAR(reg_gamma_q(y + 1.0, eta), poisson_cdf(y, eta), 1e-10) << "eta " << eta << " y " << y;
    }
  }
}

TEST(RegGammaQ, RejectsBadInput) {
  EXPECT_THROW(reg_gamma_q(0.0, 1.0), DomainError);
  EXPECT_THROW(reg_gamma_q(1.0, -1.0), DomainError);
  EXPECT_THROW(reg_gamma_q(1.0, std::nan("")), DomainError);
  const auto r = reg_gamma_q_result(2.0, 5.0);
  EXPECT_TRUE(r.converged);
  EXPECT_GT(r.terms_used, 0);
}

TEST(RegIncBeta, Boundaries) {
  EXPECT_DOUBLE_EQ(reg_inc_beta(2.0, 3.0, 0.0), 0.0);
  EXPECT_DOUBLE_EQ(reg_inc_beta(2.0, 3.0, 1.0), 1.0);
  EXPECT_NEAR(reg_inc_beta(1.0, 1.0, 0.3), 0.3, 1e-14);
  EXPECT_THROW(reg_inc_beta(1.0, 1.0, 1.5), DomainError);
  EXPECT_THROW(reg_inc_beta(-1.0, 1.0, 0.5), DomainError);
}

TEST(RegIncBeta, NegBinomialCdf) {
  // P(NB(2, 0.5) <= 2) = 0.6875 by the pmf sum.
  EXPECT_NEAR(reg_inc_beta(2.0, 3.0, 0.5), 0.6875, 1e-13);
  // Identity P(NB(tau, q) <= k) = I_q(tau, k + 1) against the pmf sum.
  for (double tau : {0.7, 2.0, 5.5}) {
    for (double q : {0.2, 0.5, 0.85}) {
      double cdf = 0.0;
      for (int k = 0; k <= 30; ++k) {
        cdf += std::exp(std::lgamma(k + tau) - std::lgamma(tau) - std::lgamma(k + 1.0) + k * std::log1p(-q) +
                        tau * std::log(q));
        EXPECT_NEAR(reg_inc_beta(tau, k + 1.0, q), cdf, 1e-10);
      }
    }
  }
}

TEST(Stirling2, SmallValues) {
  EXPECT_EQ(stirling2(0, 0), 1u);
  for (int n = 1; n <= 20; ++n) {
    EXPECT_EQ(stirling2(n, 0), 0u);
    EXPECT_EQ(stirling2(n, n), 1u);
    EXPECT_EQ(stirling2(n, 1), 1u);
  }
  EXPECT_EQ(stirling2(3, 2), 3u);
  // Restricted-growth-string enumeration of set partitions.
  EXPECT_EQ(stirling2(6, 3), 90u);
  EXPECT_EQ(stirling2(4, 5), 0u);
  EXPECT_THROW(stirling2(21, 3), CapabilityError);
}

TEST(Stirling2, RowSumsAreBellNumbers) {
  const std::array<std::uint64_t, 11> bell{1, 1, 2, 5, 15, 52, 203, 877, 4140, 21147, 115975};
  for (int n = 0; n <= 10; ++n) {
    std::uint64_t s = 0;
    for (int j = 0; j <= n; ++j) s += stirling2(n, j);
    EXPECT_EQ(s, bell[n]);
  }
}

TEST(Touchard, PoissonMoments) {
  EXPECT_DOUBLE_EQ(touchard(0, 3.3), 1.0);
  EXPECT_DOUBLE_EQ(touchard(1, 3.3), 3.3);
  EXPECT_DOUBLE_EQ(touchard(2, 2.0), 6.0);
  EXPECT_NEAR(touchard(3, 2.0), 22.0, 1e-12);
  // Truncated moment sums in 40-digit arithmetic.
  const std::vector<double> eta05{1.0, 0.5, 0.75, 1.375, 3.0625, 8.03125, 24.046875, 80.4609375, 296.50390625};
  const std::vector<double> eta37{1.0,           3.7,           17.39,          95.423,        590.8641,
                                  4042.97557,    30136.226459,  242163.3401023, 2080996.7379056};
  const std::vector<double> eta30{1.0,       30.0,       930.0,         29730.0,       978330.0,
                                  33088530.0, 1148607930.0, 40872683730.0, 1489293006330.0};
  for (int n = 0; n <= 8; ++n) {
    expect_rel(touchard(n, 0.5), eta05[n], 1e-8);
    expect_rel(touchard(n, 3.7), eta37[n], 1e-8);
    expect_rel(touchard(n, 30.0), eta30[n], 1e-8);
  }
  EXPECT_THROW(touchard(17, 1.0), CapabilityError);
}

TEST(GenTouchard, NegBinomialMoments) {
  EXPECT_DOUBLE_EQ(gen_touchard(0, 2.0, 0.5), 1.0);
  EXPECT_NEAR(gen_touchard(1, 2.0, 0.5), 2.0, 1e-13);
  EXPECT_NEAR(gen_touchard(2, 2.0, 0.5), 8.0, 1e-12);
  const std::vector<double> m{1.0,          5.25,          40.6875,          403.921875,      4857.97265625,
                              68419.0048828125, 1102590.5983886719, 19990095.684265137, 402470767.71363831};
  for (int n = 0; n <= 8; ++n) expect_rel(gen_touchard(n, 3.5, 0.4), m[n], 1e-8);
  EXPECT_THROW(gen_touchard(17, 1.0, 0.5), CapabilityError);
}

TEST(BellComplete, SkellamMoments) {
  EXPECT_DOUBLE_EQ(bell_complete(0, {}), 1.0);
  const std::vector<double> one{0.75};
  EXPECT_DOUBLE_EQ(bell_complete(1, one), 0.75);
  const std::vector<double> raw{1.0, 4.0, 11.0, 53.0, 222.0, 1255.0};  // Skellam(2, 1), pmf sums
  for (int n = 1; n <= 6; ++n) {
    std::vector<double> k(n);
    skellam_cumulants(2.0, 1.0, k);
    expect_rel(bell_complete(n, k), raw[n - 1], 1e-8);
  }
  const std::vector<double> short_args{1.0};
  EXPECT_THROW(bell_complete(2, short_args), ContractError);
}

TEST(BellComplete, CumulantSequence) {
  std::vector<double> k(4);
  skellam_cumulants(3.0, 1.25, k);
  EXPECT_DOUBLE_EQ(k[0], 1.75);
  EXPECT_DOUBLE_EQ(k[1], 4.25);
  EXPECT_DOUBLE_EQ(k[2], 1.75);
  EXPECT_DOUBLE_EQ(k[3], 4.25);
}

TEST(BesselI, Values) {
  EXPECT_DOUBLE_EQ(bessel_i(0, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(bessel_i(3, 0.0), 0.0);
  EXPECT_NEAR(bessel_i(1, 1.0), 0.56515910399248502721, 1e-15);
  EXPECT_NEAR(bessel_i(0, 1.0), 1.2660658777520083356, 1e-14);
  expect_rel(bessel_i(3, 2.5), 0.47437040877803558955, 1e-12);
  expect_rel(bessel_i(10, 7.0), 0.2209800519276605704, 1e-12);
  EXPECT_NEAR(bessel_i(3, -2.5), -bessel_i(3, 2.5), 1e-15);
  EXPECT_NEAR(bessel_i(2, -2.5), bessel_i(2, 2.5), 1e-15);
}

TEST(BesselI, TinyValuesUnderflowCleanly) {
  const auto r = bessel_i_result(82, 0.01);
  EXPECT_TRUE(r.converged);
  EXPECT_GE(r.value, 0.0);
  EXPECT_LT(r.value, 1e-300);
  EXPECT_TRUE(bessel_i_result(500, 10.0).converged);
}

TEST(BesselI, Limits) {
  EXPECT_THROW(bessel_i(0, 600.0), CapabilityError);
  EXPECT_THROW(bessel_i(-1, 1.0), DomainError);
}

TEST(Combinatorics, Factorials) {
  EXPECT_DOUBLE_EQ(binomial(5, 2), 10.0);
  EXPECT_DOUBLE_EQ(binomial(5, 6), 0.0);
  EXPECT_NEAR(log_factorial(10), std::log(3628800.0), 1e-12);
  EXPECT_NEAR(log_binomial(20, 7), std::log(77520.0), 1e-12);
  EXPECT_TRUE(std::isinf(log_binomial(3, 4)));
  EXPECT_THROW(log_factorial(-1), DomainError);
}
