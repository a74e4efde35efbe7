#pragma once

#include <functional>
#include <limits>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "bayessum/distributions.hpp"
#include "bayessum/embeddings.hpp"
#include "bayessum/kernels.hpp"
#include "bayessum/linalg.hpp"

namespace bayessum {

inline constexpr double kVarianceClampWindow = 1e-8;
inline constexpr double kAcquisitionFloor = 1e-12;
inline constexpr std::size_t kDefaultPoolSize = 256;

struct PosteriorEstimate {
  double mean = 0.0;
  double variance = 0.0;
};

enum class DuplicatePolicy {
  kReject,  ///< repeated points raise SingularGramError
  kAllow,   ///< repeated points go through the jitter ladder
};

/// Gram factor, embedding vector and function values at N sample points.
struct QuadratureState {
  Eigen::VectorXd fvals;
  Eigen::VectorXd kme_vec;
  double initial_err = 0.0;
  GramFactor<double> factor;
  std::size_t duplicates = 0;

  [[nodiscard]] Eigen::Index size() const { return fvals.size(); }
};

QuadratureState build_state(const Eigen::MatrixXd& gram, Eigen::VectorXd kme_vec, double initial_err,
                            Eigen::VectorXd fvals);

QuadratureState build_state(const EmbeddingPair& pair, const std::vector<State>& points, const Eigen::VectorXd& fvals,
                            DuplicatePolicy policy = DuplicatePolicy::kReject);

QuadratureState build_mixed_state(const MixedEmbedding& emb, const std::vector<MixedPoint>& points,
                                  const Eigen::VectorXd& fvals);

std::size_t count_duplicates(const std::vector<State>& points);

/// Posterior variance I_0 - mu^T K^{-1} mu with the clamp window applied.
double posterior_variance(const QuadratureState& state);

/// mean = mu^T K^{-1} f. With `center`, the GP prior mean is the sample
/// average c of f and mean = c + w^T (f - c 1).
PosteriorEstimate bayessum(const QuadratureState& state, bool center = false);

/// w = K^{-1} mu; bayessum(state).mean == w.dot(fvals) bit for bit.
Eigen::VectorXd precompute_weights(const QuadratureState& state);

PosteriorEstimate mixed_bayessum(const MixedEmbedding& emb, const std::vector<MixedPoint>& points,
                                 const Eigen::VectorXd& fvals, bool center = false);

/// Flat-prior-mean estimator with a Stein kernel (whose embedding is zero).
PosteriorEstimate stein_bayessum(const Eigen::MatrixXd& stein_gram, const Eigen::VectorXd& fvals);
PosteriorEstimate stein_bayessum(const SteinKernel& kernel, const std::vector<State>& points,
                                 const Eigen::VectorXd& fvals);

double log_marginal_likelihood(const Eigen::MatrixXd& gram, const Eigen::VectorXd& fvals);

template <class Kernel, class Point>
double log_marginal_likelihood(const Kernel& k, const std::vector<Point>& points, const Eigen::VectorXd& fvals) {
  return log_marginal_likelihood(gram(k, points), fvals);
}

/// Amplitude and scale candidates; the scale is lambda for the exponential
/// Hamming kernel and the lengthscale for mixed kernels.
struct HyperGrid {
  std::vector<double> amplitudes{1.0, 10.0, 100.0, 1000.0};
  std::vector<double> scales{0.1, 0.3, 1.0, 3.0, 10.0};
};

struct HyperChoice {
  double amplitude = 1.0;
  double scale = 1.0;
  double log_likelihood = -std::numeric_limits<double>::infinity();
};

/// Grid argmax of the log marginal likelihood. `unit_gram(scale)` returns the
/// amplitude-1 Gram matrix. Ties go to the smallest (amplitude, scale).
HyperChoice select_hyperparams(const std::function<Eigen::MatrixXd(double)>& unit_gram, const Eigen::VectorXd& fvals,
                               const HyperGrid& grid);

DiscreteKernel with_scale(DiscreteKernel k, double scale);

/// Returns `family` with amplitude and scale replaced by the grid argmax.
DiscreteKernel select_hyperparams(const DiscreteKernel& family, const std::vector<State>& points,
                                  const Eigen::VectorXd& fvals, const HyperGrid& grid = {});

/// Mutual information between the integral and a new observation at x_star:
///   -log(1 - c^2 / (sigma^2 ktilde(x*, x*))), c = mu(x*) - mu^T K^{-1} k(X, x*).
/// Candidates with ktilde(x*, x*) <= 1e-12 score -inf.
double acquisition_mi(const EmbeddingPair& pair, const std::vector<State>& points, const QuadratureState& state,
                      const State& x_star);

/// Argmax of acquisition_mi over `pool_size` candidates drawn uniformly
/// without replacement from the unobserved part of `domain`. nullopt when
/// the domain is exhausted or every candidate is excluded.
std::optional<State> active_select(const EmbeddingPair& pair, const std::vector<State>& points,
                                   const QuadratureState& state, const std::vector<State>& domain,
                                   std::size_t pool_size, Rng& rng);

struct ActiveRun {
  std::vector<State> points;
  std::vector<PosteriorEstimate> estimates;  ///< after 1, 2, ..., budget points
};

ActiveRun active_bayessum(const EmbeddingPair& pair, const std::function<double(const State&)>& f,
                          const std::vector<State>& domain, std::size_t budget, std::size_t pool_size,
                          std::uint64_t seed);

/// C ||f|| (1 - sum_i p(x_i)).
double thm1_bound(double sup_bound, double rkhs_norm, double observed_mass);

}  // namespace bayessum
