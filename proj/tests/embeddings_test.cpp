#include <gtest/gtest.h>

#include <cmath>

#include "bayessum/embeddings.hpp"
#include "bayessum/errors.hpp"
#include "bayessum/validation.hpp"

using namespace bayessum;

namespace {

State st(std::initializer_list<int> v) {
  State s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) s(i++) = x;
  return s;
}

void expect_rel(double got, double want, double tol = 1e-10) {
  EXPECT_NEAR(got, want, tol * std::max(1.0, std::abs(want))) << "want " << want;
}

const DiscreteKernel kBrown{BrownianMin{}, 1.0};

}  // namespace

// Reference values below are truncated sums in 30-digit arithmetic.

TEST(Kme, CountRows) {
  EXPECT_EQ(kme({Poisson{2.0}, kBrown}, scalar_state(0)), 0.0);
  expect_rel(kme({Poisson{2.0}, kBrown}, scalar_state(3)), 1.781982450870485773);
  expect_rel(kme({NegBinomial{2.5, 0.4}, kBrown}, scalar_state(4)), 2.6776619736239904985);
  expect_rel(kme({Logarithmic{0.6}, kBrown}, scalar_state(5)), 1.5988960800402249391);
  expect_rel(kme({Poisson{3.0}, {Polynomial{3}, 1.0}}, scalar_state(2)), 619.0);
  expect_rel(kme({NegBinomial{2.0, 0.5}, {Polynomial{2}, 1.0}}, scalar_state(3)), 85.0);
  expect_rel(kme({Skellam{2.0, 1.0}, {Polynomial{3}, 1.0}}, scalar_state(-2)), -45.0);
}

TEST(Kme, BrownianOffsetAndAmplitude) {
  const EmbeddingPair shifted{Poisson{2.0}, {BrownianMin{1.0}, 2.5}};
  expect_rel(kme(shifted, scalar_state(3)), 2.5 * (1.781982450870485773 + 1.0));
}

TEST(Kme, ProductRows) {
  for (const auto& y : enumerate_support(UniformIsing{3})) {
    EXPECT_EQ(kme({UniformIsing{3}, {ExpHamming{0.0}, 1.0}}, y), 1.0);
  }
  expect_rel(kme({UniformIsing{4}, {ExpHamming{0.7}, 1.0}}, st({1, -1, 1, 1})), 0.3135349234032764079);
  expect_rel(kme({UniformCategorical{1, 2}, {ExpHamming{1.0}, 1.0}}, st({0, 1})), 0.46777354139487433377);
  // Extension to {0, ..., K}^d with K = 3.
  expect_rel(kme({UniformCategorical{3, 2}, {ExpHamming{0.5}, 1.0}}, st({0, 2})), 0.49688118305117383975);
  expect_rel(kme({UniformCategorical{1, 5}, {Tanimoto{}, 1.0}}, st({1, 0, 1, 1, 0})), 0.3875);
}

TEST(Kme, ConstantRowsAreExactlyConstant) {
  const EmbeddingPair cat{UniformCategorical{2, 3}, {ExpHamming{0.9}, 1.7}};
  const EmbeddingPair ising{UniformIsing{5}, {ExpHamming{0.4}, 1.1}};
  const double c0 = kme(cat, st({0, 0, 0}));
  for (const auto& y : enumerate_support(cat.dist)) EXPECT_EQ(kme(cat, y), c0);
  const double i0 = kme(ising, st({1, 1, 1, 1, 1}));
  for (const auto& y : enumerate_support(ising.dist)) EXPECT_EQ(kme(ising, y), i0);
}

TEST(Kme, ErrorsAndCapabilities) {
  EXPECT_THROW(kme({Poisson{2.0}, {ExpHamming{1.0}, 1.0}}, scalar_state(1)), CapabilityError);
  EXPECT_THROW(kme({Poisson{2.0}, kBrown}, scalar_state(-1)), DomainError);
  EXPECT_FALSE(has_closed_form_kme({UniformIsing{3}, {Tanimoto{}, 1.0}}));
  EXPECT_TRUE(has_closed_form_kme({Logarithmic{0.3}, kBrown}));
  EXPECT_FALSE(has_closed_form_initial_error({Logarithmic{0.3}, kBrown}));
  EXPECT_THROW(initial_error({Logarithmic{0.3}, kBrown}), CapabilityError);
}

TEST(InitialError, Rows) {
  expect_rel(initial_error({Poisson{2.0}, kBrown}), 1.2284944785471559502);
  expect_rel(initial_error({NegBinomial{2.5, 0.4}, kBrown}), 2.120332251464139509, 1e-9);
  expect_rel(initial_error({Poisson{3.0}, {Polynomial{3}, 1.0}}), 3709.0);
  expect_rel(initial_error({Skellam{2.0, 1.0}, {Polynomial{3}, 1.0}}), 173.0);
  EXPECT_EQ(initial_error({UniformIsing{4}, {ExpHamming{0.0}, 1.0}}), 1.0);
  expect_rel(initial_error({UniformCategorical{1, 5}, {Tanimoto{}, 1.0}}), 0.3330078125);
  const double lam = 0.8;
  expect_rel(initial_error({UniformCategorical{2, 3}, {ExpHamming{lam}, 1.0}}),
             std::pow((1.0 + 2.0 * std::exp(-lam)) / 3.0, 3));
  EXPECT_EQ(initial_error({UniformCategorical{2, 3}, {ExpHamming{lam}, 1.0}}),
            kme({UniformCategorical{2, 3}, {ExpHamming{lam}, 1.0}}, st({1, 2, 0})));
}

TEST(BruteForce, TrivialCases) {
  // Uniform on two points: average of two kernel values.
  const DiscreteKernel k{ExpHamming{0.3}, 1.0};
  const auto r = brute_force_kme(UniformCategorical{1, 1}, k, st({1}));
  EXPECT_NEAR(r.value, 0.5 * (1.0 + std::exp(-0.3)), 1e-15);
  EXPECT_EQ(r.tail_mass, 0.0);
  // Tail mass reported for truncated count supports.
  const auto t = brute_force_kme(Poisson{30.0}, kBrown, scalar_state(5), 20);
  EXPECT_GT(t.tail_mass, 0.5);
  EXPECT_THROW(brute_force_kme(UniformCategorical{2, 30}, k, State::Zero(30)), CapabilityError);
}

TEST(BruteForce, MatchesEveryClosedFormRow) {
  const auto rows = validate_kme(99, 50, 1e-8);
  ASSERT_EQ(rows.size(), 9u);
  for (const auto& r : rows) {
    EXPECT_TRUE(r.passed) << r.row << " kme " << r.max_kme_error << " ie " << r.max_ie_error;
    if (r.row == "logarithmic/brownian") {
      EXPECT_FALSE(r.ie_available);
      EXPECT_TRUE(r.ie_unavailable_reported);
    }
  }
}

TEST(Mixed, GaussianUniform) {
  // Adaptive quadrature on [-1, 1].
  const GaussianRbf g{0.8, 1.0};
  expect_rel(gaussian_uniform_kme(g, {}, 0.3), 0.75913915864762357421, 1e-12);
  expect_rel(gaussian_uniform_initial_error(g, {}), 0.68425887046662162784, 1e-12);
}

TEST(Mixed, AdditiveProductEmbedding) {
  const MixedEmbedding emb{{},
                           UniformCategorical{16, 2},
                           {DiscreteKernel{ExpHamming{1.0}, 1.0}, GaussianRbf{0.8, 1.0}, Composition::kAdditiveProduct, 1.0}};
  expect_rel(mixed_kme(emb, {st({3, 7}), 0.3}), 1.0477717399225709733, 1e-12);
  expect_rel(mixed_initial_error(emb), 0.960605390824756791, 1e-12);
}

TEST(Mixed, TensorQuadratureOracle) {
  // 289-point discrete enumeration times a 10^4-point midpoint rule.
  const MixedKernel k{DiscreteKernel{ExpHamming{1.0}, 1.0}, GaussianRbf{0.5, 1.0}, Composition::kAdditiveProduct, 2.0};
  const MixedEmbedding emb{{}, UniformCategorical{16, 2}, k};
  const MixedPoint y{st({5, 11}), -0.4};
  const auto grid = enumerate_support(UniformCategorical{16, 2});
  const int m = 10000;
  double sum = 0.0;
  for (const auto& s : grid) {
    double inner = 0.0;
    for (int i = 0; i < m; ++i) inner += eval(k, MixedPoint{s, -1.0 + (i + 0.5) * 2.0 / m}, y);
    sum += inner / m;
  }
  expect_rel(mixed_kme(emb, y), sum / static_cast<double>(grid.size()), 1e-8);
}

TEST(Mixed, ComponentLimits) {
  const double c1 = gaussian_uniform_kme(GaussianRbf{0.5, 1.0}, {}, 0.1);
  const double big = 1e4;
  const MixedEmbedding prod{{}, UniformCategorical{2, 2},
                            {DiscreteKernel{ExpHamming{big}, 1.0}, GaussianRbf{0.5, 1.0}, Composition::kProduct, 1.0}};
  // lambda -> inf leaves only x = y in the categorical sum: (1/3)^2.
  expect_rel(mixed_kme(prod, {st({0, 1}), 0.1}), c1 / 9.0, 1e-12);
  const MixedEmbedding add{{}, UniformCategorical{2, 2},
                           {DiscreteKernel{ExpHamming{0.6}, 1.0}, GaussianRbf{0.5, 1.0}, Composition::kAdditiveProduct, 1.0}};
  const double c2 = kme({UniformCategorical{2, 2}, {ExpHamming{0.6}, 1.0}}, st({0, 1}));
  expect_rel(mixed_kme(add, {st({0, 1}), 0.1}), c1 + c2 + c1 * c2, 1e-14);
}
