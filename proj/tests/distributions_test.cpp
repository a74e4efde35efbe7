#include <gtest/gtest.h>

#include <cmath>
#include <map>
#include <set>

#include "bayessum/distributions.hpp"
#include "bayessum/errors.hpp"

using namespace bayessum;

namespace {

State st(std::initializer_list<int> v) {
  State s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) s(i++) = x;
  return s;
}

Potts small_fc_potts() {
  Eigen::VectorXd h(3);
  h << 0.3, -0.2, 0.5;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(3, 3);
  j(0, 1) = 0.4;
  j(0, 2) = -0.7;
  j(1, 2) = 0.25;
  return Potts::fully_connected(3, 3, 0.8, h, j);
}

void expect_distinct(const std::vector<State>& pts) {
  std::set<std::vector<int>> seen;
  for (const auto& p : pts) EXPECT_TRUE(seen.insert(std::vector<int>(p.data(), p.data() + p.size())).second);
}

}  // namespace

TEST(Pmf, Examples) {
  EXPECT_NEAR(pmf(Poisson{2.0}, scalar_state(0)), std::exp(-2.0), 1e-16);
  EXPECT_NEAR(pmf(UniformCategorical{2, 3}, st({0, 2, 1})), 1.0 / 27.0, 1e-16);
  // Convolution of Poisson(2) and Poisson(1) pmfs.
  EXPECT_NEAR(pmf(Skellam{2.0, 1.0}, scalar_state(0)), 0.21171208396194350003, 1e-14);
  EXPECT_NEAR(pmf(Skellam{2.0, 1.0}, scalar_state(-3)), 0.013375677262176747872, 1e-15);
  EXPECT_NEAR(pmf(UniformIsing{4}, st({1, -1, 1, 1})), 1.0 / 16.0, 1e-16);
}

TEST(Pmf, OutsideSupport) {
  EXPECT_THROW(pmf(Poisson{2.0}, scalar_state(-1)), DomainError);
  EXPECT_THROW(pmf(Logarithmic{0.5}, scalar_state(0)), DomainError);
  EXPECT_THROW(pmf(UniformCategorical{2, 2}, st({0, 3})), DomainError);
  EXPECT_THROW(pmf(UniformIsing{2}, st({0, 1})), DomainError);
  EXPECT_THROW(pmf(UniformCategorical{2, 2}, st({0})), DomainError);
}

TEST(Pmf, ParameterValidation) {
  EXPECT_THROW(validate(Poisson{0.0}), DomainError);
  EXPECT_THROW(validate(NegBinomial{1.0, 1.0}), DomainError);
  EXPECT_THROW(validate(Logarithmic{1.0}), DomainError);
  EXPECT_THROW(validate(Skellam{-1.0, 1.0}), DomainError);
  EXPECT_THROW(validate(Cmp{0.0, 1.0}), DomainError);
  EXPECT_NO_THROW(validate(Cmp{1.0, 0.0}));
}

TEST(Pmf, NormalizedFamiliesSumToOne) {
  const std::vector<Distribution> counts{Poisson{0.5}, Poisson{30.0}, NegBinomial{2.5, 0.4}, Logarithmic{0.6}};
  for (const auto& d : counts) {
    double s = 0.0;
    for (int x = 0; x <= 400; ++x) {
      if (in_support(d, scalar_state(x))) s += pmf(d, scalar_state(x));
    }
    EXPECT_NEAR(s, 1.0, 1e-12) << describe(d);
  }
  double s = 0.0;
  for (int x = -200; x <= 200; ++x) s += pmf(Skellam{1.5, 0.7}, scalar_state(x));
  EXPECT_NEAR(s, 1.0, 1e-12);
  for (const Distribution& d : {Distribution{UniformCategorical{2, 4}}, Distribution{UniformIsing{5}}}) {
    double t = 0.0;
    for_each_state(d, [&](const State& x) { t += pmf(d, x); });
    EXPECT_NEAR(t, 1.0, 1e-13);
  }
}

TEST(Pmf, UnnormalizedFlags) {
  EXPECT_FALSE(is_normalized(Cmp{1.0, 1.0}));
  EXPECT_FALSE(is_normalized(Potts::chain(3, 3, 0.5, 0.1, 0.1)));
  EXPECT_TRUE(is_normalized(Poisson{1.0}));
  // CMP with theta2 = 1 is e^{theta1} Poisson(theta1).
  EXPECT_NEAR(pmf(Cmp{2.0, 1.0}, scalar_state(3)), std::exp(2.0) * pmf(Poisson{2.0}, scalar_state(3)), 1e-12);
}

TEST(Pmf, PottsEnergyConvention) {
  const Potts p = Potts::chain(3, 3, 0.5, 0.1, 0.2);
  // beta (h sum x + J sum_chain 1{x_i = x_{i+1}}) for x = (2, 2, 0)
  EXPECT_NEAR(log_pmf(p, st({2, 2, 0})), 0.5 * (0.1 * 4 + 0.2 * 1), 1e-15);
}

TEST(Support, Enumeration) {
  EXPECT_EQ(enumerate_support(UniformCategorical{2, 2}).size(), 9u);
  EXPECT_EQ(enumerate_support(UniformIsing{3}).size(), 8u);
  EXPECT_EQ(cardinality(Potts::chain(15, 3, 0.4, 0.1, 0.1)).value(), 14348907u);
  EXPECT_FALSE(cardinality(Poisson{1.0}).has_value());
  EXPECT_THROW(enumerate_support(UniformCategorical{2, 4}, 10), CapabilityError);
  EXPECT_THROW(enumerate_support(Poisson{1.0}), CapabilityError);
  const auto all = enumerate_support(UniformCategorical{2, 3});
  for (std::uint64_t i = 0; i < all.size(); ++i) {
    EXPECT_EQ(state_index(UniformCategorical{2, 3}, all[i]), i);
    EXPECT_TRUE(StateEqual{}(state_at(UniformCategorical{2, 3}, i), all[i]));
  }
  expect_distinct(all);
}

TEST(Support, StreamingCount) {
  std::uint64_t visits = 0;
  const auto n = for_each_state(Potts::chain(15, 3, 0.4, 0.1, 0.1), [&](const State&) { ++visits; });
  EXPECT_EQ(n, 14348907u);
  EXPECT_EQ(visits, n);
}

TEST(Sampling, SingletonAndExhaustion) {
  const auto one = sample(Poisson{3.0}, 1, Replacement::kWithout, 9);
  EXPECT_EQ(one.points.size(), 1u);
  const auto all = sample(UniformCategorical{2, 1}, 3, Replacement::kWithout, 4);
  std::set<int> got;
  for (const auto& p : all.points) got.insert(p(0));
  EXPECT_EQ(got, (std::set<int>{0, 1, 2}));
  EXPECT_THROW(sample(UniformCategorical{2, 1}, 4, Replacement::kWithout, 4), CapabilityError);
}

TEST(Sampling, WithoutReplacementIsDistinct) {
  const std::vector<Distribution> laws{Poisson{30.0},       NegBinomial{5.0, 0.2},        Logarithmic{0.9},
                                       Skellam{3.0, 2.0},   UniformCategorical{2, 4},     UniformIsing{6},
                                       Cmp{1.5, 1.3}};
  for (const auto& d : laws) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      const auto b = sample(d, 12, Replacement::kWithout, seed);
      EXPECT_EQ(b.points.size(), 12u);
      EXPECT_EQ(b.mode, Replacement::kWithout);
      expect_distinct(b.points);
    }
  }
}

TEST(Sampling, WithoutReplacementDrawsSequentialConditionals) {
  const Distribution d = NegBinomial{1.0, 0.5};  // pmf 2^{-(x+1)}
  const int trials = 40000;
  int second_is_zero = 0;
  for (int t = 0; t < trials; ++t) {
    const auto b = sample(d, 2, Replacement::kWithout, static_cast<std::uint64_t>(t));
    second_is_zero += b.points[1](0) == 0 ? 1 : 0;
  }
  // P(second = 0) = sum_{x != 0} p(x) p(0) / (1 - p(x)) = sum_{k>=1} 2^{-(k+1)} 0.5 / (1 - 2^{-(k+1)})
  double want = 0.0;
  for (int k = 1; k < 60; ++k) {
    const double px = std::ldexp(1.0, -(k + 1));
    want += px * 0.5 / (1.0 - px);
  }
  const double se = std::sqrt(want * (1 - want) / trials);
  EXPECT_NEAR(static_cast<double>(second_is_zero) / trials, want, 4 * se);
}

TEST(Sampling, PoissonMeanClt) {
  const auto b = sample(Poisson{30.0}, 10000, Replacement::kWith, 123);
  double m = 0.0;
  for (const auto& p : b.points) m += p(0);
  m /= 10000.0;
  EXPECT_NEAR(m, 30.0, 3.0 * std::sqrt(30.0 / 10000.0));
}

TEST(Sampling, SkellamMatchesPmf) {
  const Skellam d{2.0, 1.0};
  const auto b = sample(d, 20000, Replacement::kWith, 5);
  std::map<int, int> counts;
  for (const auto& p : b.points) ++counts[p(0)];
  double tv = 0.0;
  for (int x = -15; x <= 20; ++x) tv += std::abs(counts[x] / 20000.0 - pmf(d, scalar_state(x)));
  EXPECT_LT(0.5 * tv, 0.02);
}

TEST(Sampling, PottsNeedsMcmc) {
  EXPECT_THROW(sample(Potts::chain(4, 3, 0.4, 0.1, 0.1), 3, Replacement::kWith, 1), CapabilityError);
}

TEST(Sampling, CountTableExhaustion) {
  // CMP(1.5, 1.3) keeps fewer than 40 values above the relative mass cutoff.
  EXPECT_THROW(sample(Cmp{1.5, 1.3}, 40, Replacement::kWithout, 1), CapabilityError);
}

TEST(Sampling, Reproducible) {
  const auto a = sample(UniformCategorical{2, 5}, 10, Replacement::kWith, 77);
  const auto b = sample(UniformCategorical{2, 5}, 10, Replacement::kWith, 77);
  ASSERT_EQ(a.points.size(), b.points.size());
  for (std::size_t i = 0; i < a.points.size(); ++i) EXPECT_TRUE(StateEqual{}(a.points[i], b.points[i]));
  const auto c = sample(Poisson{30.0}, 10, Replacement::kWithout, 77);
  const auto d = sample(Poisson{30.0}, 10, Replacement::kWithout, 77);
  for (std::size_t i = 0; i < c.points.size(); ++i) EXPECT_EQ(c.points[i](0), d.points[i](0));
}

TEST(Mh, FrozenChainReturnsInitialState) {
  // Large beta concentrates all mass on the all-equal mode.
  const Potts p = Potts::chain(4, 3, 1e4, 0.0, 1.0);
  const State mode = st({1, 1, 1, 1});
  const auto out = mh_sample(p, 1, 0, 1, 3, mode);
  ASSERT_EQ(out.batch.points.size(), 1u);
  EXPECT_TRUE(StateEqual{}(out.batch.points[0], mode));
  EXPECT_EQ(out.acceptance_rate, 0.0);
}

TEST(Mh, AcceptanceRateInOpenInterval) {
  const auto out = mh_sample(Potts::chain(4, 3, 0.2, 0.1, 0.1), 200, 10, 5, 1);
  EXPECT_GT(out.acceptance_rate, 0.0);
  EXPECT_LT(out.acceptance_rate, 1.0);
}

TEST(Mh, MarginalsMatchEnumeration) {
  Eigen::VectorXd h(4);
  h << 0.5, -0.3, 0.2, 0.0;
  Eigen::MatrixXd j = Eigen::MatrixXd::Zero(4, 4);
  j(0, 1) = 0.8;
  j(1, 2) = -0.4;
  j(2, 3) = 0.6;
  j(0, 3) = 0.3;
  const Potts p = Potts::fully_connected(4, 3, 1.0, h, j);
  // Enumeration oracle straight from the energy.
  Eigen::MatrixXd exact = Eigen::MatrixXd::Zero(4, 3);
  double z = 0.0;
  for (int a = 0; a < 3; ++a)
    for (int b = 0; b < 3; ++b)
      for (int c = 0; c < 3; ++c)
        for (int d = 0; d < 3; ++d) {
          const int x[4] = {a, b, c, d};
          double e = h(0) * a + h(1) * b + h(2) * c + h(3) * d;
          e += 0.8 * (a == b) - 0.4 * (b == c) + 0.6 * (c == d) + 0.3 * (a == d);
          const double w = std::exp(e);
          z += w;
          for (int s = 0; s < 4; ++s) exact(s, x[s]) += w;
        }
  exact /= z;
  const auto out = mh_sample(p, 40000, 100, 2, 2024);
  Eigen::MatrixXd emp = Eigen::MatrixXd::Zero(4, 3);
  for (const auto& x : out.batch.points)
    for (int s = 0; s < 4; ++s) emp(s, x(s)) += 1.0;
  emp /= static_cast<double>(out.batch.points.size());
  for (int s = 0; s < 4; ++s) EXPECT_LT(0.5 * (emp.row(s) - exact.row(s)).cwiseAbs().sum(), 0.02) << "site " << s;
}

TEST(DiffScore, UniformIsZero) {
  EXPECT_TRUE(diff_score(UniformCategorical{2, 4}, st({0, 1, 2, 0})).isZero(0.0));
  EXPECT_TRUE(diff_score(UniformIsing{3}, st({1, -1, 1})).isZero(0.0));
  EXPECT_TRUE(diff_score(UniformCategorical{1, 1}, st({0})).isZero(0.0));
  EXPECT_TRUE(diff_score(UniformCategorical{1, 1}, st({1})).isZero(0.0));
}

TEST(DiffScore, PottsMatchesEnumeration) {
  // Normalized-enumeration oracle in 30-digit arithmetic.
  const Eigen::VectorXd s = diff_score(small_fc_potts(), st({0, 2, 1}));
  EXPECT_NEAR(s(0), 0.27385096292630905983, 1e-14);
  EXPECT_NEAR(s(1), -0.89648087930495153652, 1e-14);
  EXPECT_NEAR(s(2), -0.82211880039050908614, 1e-14);
}

TEST(DiffScore, InvariantToScaling) {
  // A self-edge contributes 1{x_0 = x_0} = 1, i.e. multiplies p by a constant.
  const Potts a = small_fc_potts();
  Potts b = a;
  b.edges.push_back({0, 0, 1.7});  // self-edge: 1{x_0 = x_0} = 1 adds a constant
  for (const auto& x : enumerate_support(a)) EXPECT_TRUE(diff_score(a, x).isApprox(diff_score(b, x), 1e-13));
}

TEST(CyclicShift, Wraps) {
  const SiteAlphabet ab{3};
  EXPECT_EQ(cyclic_shift(ab, st({2, 0}), 0, +1)(0), 0);
  EXPECT_EQ(cyclic_shift(ab, st({2, 0}), 1, -1)(1), 2);
  const SiteAlphabet ising{2, -1, 2};
  EXPECT_EQ(ising.next(-1), 1);
  EXPECT_EQ(ising.next(1), -1);
}

TEST(UniqueStates, FirstOccurrenceOrder) {
  const std::vector<State> pts{st({1, 2}), st({0, 0}), st({1, 2}), st({2, 2}), st({0, 0})};
  const auto u = unique_states(pts);
  ASSERT_EQ(u.size(), 3u);
  EXPECT_TRUE(StateEqual{}(u[0], st({1, 2})));
  EXPECT_TRUE(StateEqual{}(u[2], st({2, 2})));
}
