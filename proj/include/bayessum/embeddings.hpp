#pragma once

#include <vector>

#include <Eigen/Core>

#include "bayessum/distributions.hpp"
#include "bayessum/kernels.hpp"

namespace bayessum {

inline constexpr int kDefaultTruncationBudget = 100;
inline constexpr int kDefaultBruteForceBudget = 500;

struct EmbeddingPair {
  Distribution dist;
  DiscreteKernel kernel;
  /// Number of terms kept in initial errors that are infinite series.
  int truncation_budget = kDefaultTruncationBudget;
};

bool has_closed_form_kme(const EmbeddingPair& pair);
bool has_closed_form_initial_error(const EmbeddingPair& pair);

/// A * mu_P(y). Throws CapabilityError for pairs without a closed form.
double kme(const EmbeddingPair& pair, const State& y);
Eigen::VectorXd kme_vector(const EmbeddingPair& pair, const std::vector<State>& points);

/// A * E[k(X, X')]. Throws CapabilityError where no closed form is available.
double initial_error(const EmbeddingPair& pair);

struct TruncatedSum {
  double value = 0.0;
  /// Probability mass outside the summation range (0 for enumerated supports).
  double tail_mass = 0.0;
};

/// Sum over the support: full enumeration for finite supports, x <= budget
/// (|x| <= budget for Skellam) for count families.
TruncatedSum brute_force_kme(const Distribution& dist, const DiscreteKernel& kernel, const State& y,
                             int budget = kDefaultBruteForceBudget);
TruncatedSum brute_force_initial_error(const Distribution& dist, const DiscreteKernel& kernel,
                                       int budget = kDefaultBruteForceBudget);

/// Uniform law on [lower, upper].
struct UniformInterval {
  double lower = -1.0;
  double upper = 1.0;
};

double gaussian_uniform_kme(const GaussianRbf& k, const UniformInterval& law, double x);
double gaussian_uniform_initial_error(const GaussianRbf& k, const UniformInterval& law);

/// Product law of a uniform interval and a discrete law, paired with a mixed kernel.
struct MixedEmbedding {
  UniformInterval continuous;
  Distribution discrete;
  MixedKernel kernel;
};

double mixed_kme(const MixedEmbedding& emb, const MixedPoint& point);
Eigen::VectorXd mixed_kme_vector(const MixedEmbedding& emb, const std::vector<MixedPoint>& points);
double mixed_initial_error(const MixedEmbedding& emb);

}  // namespace bayessum
