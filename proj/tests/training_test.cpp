#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

#include "bayessum/errors.hpp"
#include "bayessum/quadrature.hpp"
#include "bayessum/specfn.hpp"
#include "bayessum/training.hpp"

using namespace bayessum;

namespace {

State st(std::initializer_list<int> v) {
  State s(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (int x : v) s(i++) = x;
  return s;
}

PottsParams zero_params(int len) { return {Eigen::VectorXd::Zero(len), Eigen::MatrixXd::Zero(len, len)}; }

}  // namespace

TEST(Cmp, TruncatedNormalizerClosedForms) {
  // theta2 = 1 is Poisson: Z = e^theta1. theta2 = 0 is geometric: Z = 1 / (1 - theta1).
  EXPECT_NEAR(cmp_log_z_truncated(2.0, 1.0), 2.0, 1e-13);
  EXPECT_NEAR(cmp_log_z_truncated(0.3, 1.0), 0.3, 1e-14);
  EXPECT_NEAR(cmp_log_z_truncated(0.4, 0.0), -std::log(0.6), 1e-13);
  // theta2 = 2: sum theta1^x / x!^2 = I_0(2 sqrt(theta1)).
  EXPECT_NEAR(cmp_log_z_truncated(1.5, 2.0), std::log(specfn::bessel_i(0, 2.0 * std::sqrt(1.5))), 1e-13);
}

TEST(Cmp, ExactNll) {
  const CountData d = make_count_data({0, 1, 3, 2});
  EXPECT_DOUBLE_EQ(d.mean, 1.5);
  EXPECT_NEAR(d.mean_log_factorial, (std::log(6.0) + std::log(2.0)) / 4.0, 1e-15);
  // Poisson NLL: eta - mean(x) log eta + mean(log x!).
  EXPECT_NEAR(cmp_exact_nll(d, 2.0, 1.0), 2.0 - 1.5 * std::log(2.0) + d.mean_log_factorial, 1e-12);
}

TEST(Cmp, EstimatorsAtPoissonTarget) {
  // g = 1 when theta1 = eta0 and theta2 = 1, so Z_hat = e^eta0 sum_i w_i.
  Rng rng(3);
  const auto mc = cmp_monte_carlo_estimate(2.0, 30, rng);
  EXPECT_NEAR(mc.z(2.0, 1.0), std::exp(2.0), 1e-12);
  const auto bq = cmp_bayessum_estimate(2.0, 10, rng);
  EXPECT_EQ(bq.points.size(), 10u);
  EXPECT_NEAR(bq.z(2.0, 1.0) / std::exp(2.0), 1.0, 0.05);
}

TEST(Cmp, WeightsReusedAcrossIntegrands) {
  Rng rng(8);
  const double eta0 = 1.0;
  const auto est = cmp_bayessum_estimate(eta0, 10, rng);
  const EmbeddingPair pair{Poisson{eta0}, DiscreteKernel{BrownianMin{1.0}, 1.0}};
  std::vector<State> pts;
  for (int x : est.points) pts.push_back(scalar_state(x));
  for (int i = 0; i < 800; ++i) {
    const double t1 = 0.5 + 0.002 * i, t2 = 1.2 - 0.0005 * i;
    Eigen::VectorXd g(static_cast<Eigen::Index>(pts.size()));
    for (std::size_t k = 0; k < pts.size(); ++k) {
      const int x = est.points[k];
      g(static_cast<Eigen::Index>(k)) = std::exp(x * std::log(t1 / eta0) + (1.0 - t2) * specfn::log_factorial(x));
    }
    const double per_call = std::exp(eta0) * bayessum::bayessum(build_state(pair, pts, g)).mean;
    ASSERT_NEAR(est.z(t1, t2), per_call, 1e-12 * std::abs(per_call)) << i;
  }
}

TEST(Cmp, GradientMatchesFiniteDifferences) {
  Rng rng(5);
  const CountData d = make_count_data(synthetic_cmp_data(1.5, 1.3, 200, 1));
  const auto est = cmp_bayessum_estimate(1.0, 10, rng);
  const double h = 1e-6;
  for (auto [t1, t2] : {std::pair{0.5, 1.2}, std::pair{1.7, 0.9}, std::pair{3.0, 2.0}}) {
    const Eigen::Vector2d g = cmp_estimated_gradient(d, est, t1, t2);
    const double d1 = (cmp_estimated_loss(d, est, t1 + h, t2) - cmp_estimated_loss(d, est, t1 - h, t2)) / (2 * h);
    const double d2 = (cmp_estimated_loss(d, est, t1, t2 + h) - cmp_estimated_loss(d, est, t1, t2 - h)) / (2 * h);
    EXPECT_NEAR(g(0), d1, 1e-6 * std::max(1.0, std::abs(d1)));
    EXPECT_NEAR(g(1), d2, 1e-6 * std::max(1.0, std::abs(d2)));
  }
}

TEST(Cmp, ZeroIterationsReturnsInitialPoint) {
  const CountData d = make_count_data({1, 2, 0, 4});
  CmpTrainConfig cfg;
  cfg.iterations = 0;
  for (auto e : {ZEstimator::kBayesSum, ZEstimator::kMonteCarlo}) {
    const auto trace = cmp_train(d, e, cfg);
    ASSERT_EQ(trace.thetas.size(), 1u);
    EXPECT_EQ(trace.thetas[0], Eigen::Vector2d(0.5, 1.2));
    EXPECT_TRUE(trace.losses.empty());
  }
}

TEST(Cmp, TrainingIsDeterministicAndFeasible) {
  const CountData d = make_count_data(synthetic_cmp_data(1.5, 1.3, 300, 2));
  CmpTrainConfig cfg;
  cfg.iterations = 50;
  cfg.seed = 4;
  const auto a = cmp_train(d, ZEstimator::kBayesSum, cfg);
  const auto b = cmp_train(d, ZEstimator::kBayesSum, cfg);
  ASSERT_EQ(a.thetas.size(), 51u);
  EXPECT_EQ(a.thetas.back(), b.thetas.back());
  for (const auto& t : a.thetas) {
    EXPECT_GT(t(0), 0.0);
    EXPECT_GE(t(1), 0.0);
  }
  EXPECT_THROW(parse_estimator("exact"), DomainError);
  EXPECT_EQ(parse_estimator(estimator_name(ZEstimator::kMonteCarlo)), ZEstimator::kMonteCarlo);
}

TEST(Potts, LogZClosedForms) {
  // No interactions and no field: Z = S^L.
  EXPECT_NEAR(potts_log_z(potts_model(zero_params(5), 3, 0.44)), 5.0 * std::log(3.0), 1e-12);
  // Independent sites: Z = prod_j sum_s exp(beta h_j s).
  PottsParams p = zero_params(3);
  p.field << 0.2, -0.5, 1.0;
  const double beta = 0.7;
  double want = 0.0;
  for (int j = 0; j < 3; ++j) {
    double s = 0.0;
    for (int k = 0; k < 4; ++k) s += std::exp(beta * p.field(j) * k);
    want += std::log(s);
  }
  EXPECT_NEAR(potts_log_z(potts_model(p, 4, beta)), want, 1e-12);
}

TEST(Potts, LogZTwoSiteCoupling) {
  // Two sites, S = 2: Z = 2 e^{beta J} + 2 with J on the matching indicator.
  PottsParams p = zero_params(2);
  p.coupling(0, 1) = 0.9;
  EXPECT_NEAR(potts_log_z(potts_model(p, 2, 1.0)), std::log(2.0 * std::exp(0.9) + 2.0), 1e-13);
}

TEST(Potts, ConditionalProbsAreRowStochastic) {
  PottsParams p = zero_params(4);
  p.field << 0.3, -0.1, 0.0, 0.8;
  p.coupling(0, 2) = 0.5;
  p.coupling(1, 3) = -1.2;
  const auto probs = potts_conditional_probs(potts_model(p, 3, 0.6), st({0, 2, 1, 1}));
  ASSERT_EQ(probs.rows(), 4);
  ASSERT_EQ(probs.cols(), 3);
  for (int j = 0; j < 4; ++j) EXPECT_NEAR(probs.row(j).sum(), 1.0, 1e-14);
  EXPECT_TRUE((probs.array() > 0.0).all());
}

TEST(Potts, ZeroIterationsReturnsInitialParameters) {
  const auto data = synthetic_sequences(50, 4, {0.4, 0.4, 0.2}, 1);
  PottsTrainConfig cfg;
  cfg.length = 4;
  cfg.iterations = 0;
  const auto trace = potts_train(data, ZEstimator::kBayesSum, cfg);
  EXPECT_TRUE(trace.iterations.empty());
  EXPECT_EQ(trace.final.field, trace.initial.field);
  EXPECT_EQ(trace.final.coupling, trace.initial.coupling);
}

TEST(Potts, TrackedTraceIsFinite) {
  const auto data = synthetic_sequences(200, 4, {0.4, 0.4, 0.2}, 2);
  PottsTrainConfig cfg;
  cfg.length = 4;
  cfg.iterations = 20;
  cfg.samples = 16;
  cfg.track_exact_z = true;
  const auto trace = potts_train(data, ZEstimator::kBayesSum, cfg);
  ASSERT_EQ(trace.iterations.size(), 20u);
  for (const auto& it : trace.iterations) {
    EXPECT_TRUE(std::isfinite(it.z_hat));
    EXPECT_TRUE(std::isfinite(it.z_alt));
    EXPECT_GT(it.z_exact, 0.0);
  }
  // Near-zero initial parameters put Z close to S^L.
  EXPECT_NEAR(trace.iterations[0].z_exact, 81.0, 2.0);
}

TEST(Potts, SyntheticSequences) {
  const auto seqs = synthetic_sequences(20000, 3, {0.4, 0.4, 0.2}, 9);
  ASSERT_EQ(seqs.size(), 20000u);
  int twos = 0;
  for (const auto& s : seqs) {
    ASSERT_EQ(s.size(), 3);
    twos += (s.array() == 2).count();
  }
  EXPECT_NEAR(twos / 60000.0, 0.2, 0.01);
}

TEST(Ksd, NonnegativeAndSingleSample) {
  PottsParams p = zero_params(3);
  p.field << 0.3, -0.2, 0.5;
  p.coupling(0, 1) = 0.4;
  const Potts model = potts_model(p, 3, 0.8);
  const DiscreteKernel base{ExpHamming{0.5}, 1.0};
  const State x = st({0, 2, 1});
  EXPECT_NEAR(discrete_ksd(model, {x}, base), eval(SteinKernel{base, model}, x, x), 1e-14);
  Rng rng(1);
  for (int t = 0; t < 10; ++t) {
    std::vector<State> pts;
    for (int i = 0; i < 8; ++i) pts.push_back(st({int(rng.below(3)), int(rng.below(3)), int(rng.below(3))}));
    EXPECT_GE(discrete_ksd(model, pts, base), -1e-12);
  }
}

TEST(Io, ReadCounts) {
  std::istringstream in("3\n0\n12\n\n");
  EXPECT_EQ(read_counts(in), (std::vector<int>{3, 0, 12}));
  std::istringstream bad("3\n-1\n");
  EXPECT_THROW(read_counts(bad), DomainError);
}

TEST(Io, ReadSequences) {
  std::istringstream in("1 2 3\n3,1,1\n213\n");
  const auto seqs = read_sequences(in, 3);
  ASSERT_EQ(seqs.size(), 3u);
  EXPECT_EQ(seqs[0], st({0, 1, 2}));
  EXPECT_EQ(seqs[1], st({2, 0, 0}));
  EXPECT_EQ(seqs[2], st({1, 0, 2}));
  std::istringstream out_of_range("1 4 2\n");
  EXPECT_THROW(read_sequences(out_of_range, 3), DomainError);
  std::istringstream ragged("1 2 3\n1 2\n");
  EXPECT_THROW(read_sequences(ragged, 3), DomainError);
}
