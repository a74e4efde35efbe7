#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "bayessum/distributions.hpp"
#include "bayessum/kernels.hpp"

namespace bayessum {

enum class ZEstimator { kBayesSum, kMonteCarlo };

std::string estimator_name(ZEstimator e);
ZEstimator parse_estimator(const std::string& name);

// ---------------------------------------------------------------- CMP

inline constexpr int kCmpTruncation = 500;

/// Summary statistics of a count dataset.
struct CountData {
  std::vector<int> values;
  double mean = 0.0;
  double mean_log_factorial = 0.0;
};

CountData make_count_data(std::vector<int> values);

/// n draws from CMP(theta1, theta2).
std::vector<int> synthetic_cmp_data(double theta1, double theta2, std::size_t n, std::uint64_t seed);

double cmp_log_z_truncated(double theta1, double theta2, int terms = kCmpTruncation);

/// Mean negative log-likelihood with the truncated normalizer.
double cmp_exact_nll(const CountData& data, double theta1, double theta2);

/// Z(theta) ~= sum_i w_i g(x_i; theta) with g(x) = exp(x log(theta1 / eta0) + (1 - theta2) log x!).
/// The weights absorb the e^{eta0} factor and do not depend on theta.
struct CmpZEstimate {
  double eta0 = 1.0;
  std::vector<int> points;
  Eigen::VectorXd weights;

  [[nodiscard]] double z(double theta1, double theta2) const;
  /// dZ/dtheta1, dZ/dtheta2.
  [[nodiscard]] Eigen::Vector2d z_gradient(double theta1, double theta2) const;
};

/// BayesSum weights over N distinct Poisson(eta0) draws with kernel A (min(x, y) + offset).
CmpZEstimate cmp_bayessum_estimate(double eta0, std::size_t n, Rng& rng, double offset = 1.0);
/// Monte Carlo weights e^{eta0} / N over N Poisson(eta0) draws.
CmpZEstimate cmp_monte_carlo_estimate(double eta0, std::size_t n, Rng& rng);

/// Estimated loss -mean(x) log theta1 + theta2 mean(log x!) + log Z_hat, and its gradient.
double cmp_estimated_loss(const CountData& data, const CmpZEstimate& est, double theta1, double theta2);
Eigen::Vector2d cmp_estimated_gradient(const CountData& data, const CmpZEstimate& est, double theta1, double theta2);

struct CmpTrainConfig {
  double learning_rate = 1e-3;
  int iterations = 800;
  double theta1 = 0.5;
  double theta2 = 1.2;
  int bayessum_n = 10;
  int monte_carlo_n = 30;
  double brownian_offset = 1.0;
  std::uint64_t seed = 0;
};

struct CmpTrace {
  std::vector<Eigen::Vector2d> thetas;  ///< initial point followed by one entry per iteration
  std::vector<double> losses;           ///< estimated loss at each iterate before the step
  int rejected_steps = 0;
};

/// Gradient descent with projection onto theta1 > 0, theta2 >= 0. BayesSum
/// weights are computed once; Monte Carlo redraws its sample every iteration.
/// Steps with a non-finite or nonpositive Z_hat are rejected and halve the rate.
CmpTrace cmp_train(const CountData& data, ZEstimator estimator, const CmpTrainConfig& config);

// ---------------------------------------------------------------- Potts

/// Trainable Potts parameters on {0..S-1}^L: field h (length L) and the
/// strictly upper triangle of J.
struct PottsParams {
  Eigen::VectorXd field;
  Eigen::MatrixXd coupling;
};

Potts potts_model(const PottsParams& params, int num_states, double beta);

struct PottsTrainConfig {
  int length = 6;
  int num_states = 3;
  double beta = 1.0 / 2.269;
  double learning_rate = 1e-3;
  int iterations = 2000;
  int anchors = 4;     ///< M
  int samples = 64;    ///< N
  double lambda = 0.1104;
  double init_sd = 0.01;
  std::uint64_t seed = 0;
  /// Record the enumerated Z at every iteration (enumerable L only).
  bool track_exact_z = false;
};

struct PottsIteration {
  double z_hat = 0.0;
  double z_alt = 0.0;    ///< the other estimator on the same samples
  double z_exact = 0.0;  ///< NaN unless tracked
};

struct PottsTrace {
  PottsParams initial;
  PottsParams final;
  std::vector<PottsIteration> iterations;
  int rejected_steps = 0;
};

/// Sequences from independent sites with the given symbol probabilities (symbols 0..S-1).
std::vector<State> synthetic_sequences(std::size_t count, int length, const std::vector<double>& probs,
                                       std::uint64_t seed);

PottsTrace potts_train(const std::vector<State>& data, ZEstimator estimator, const PottsTrainConfig& config);

/// Pseudo-likelihood proposal: independent sites with
/// p_j(s) ∝ exp(beta h_j s + beta sum_i J_ij 1{anchor_i = s}).
Eigen::MatrixXd potts_conditional_probs(const Potts& model, const State& anchor);

/// V-statistic (1/N^2) sum_ij k_p(x_i, x_j).
double discrete_ksd(const Distribution& model, const std::vector<State>& samples, const DiscreteKernel& base);

/// Exact log Z by enumeration.
double potts_log_z(const Potts& model);

// ---------------------------------------------------------------- IO

/// Single-column headerless CSV of nonnegative integers.
std::vector<int> read_counts(std::istream& in);

/// One sequence per line; symbols 1..S separated by spaces or commas, or
/// written as consecutive digits. Returned with symbols shifted to 0..S-1.
std::vector<State> read_sequences(std::istream& in, int num_states);

}  // namespace bayessum
