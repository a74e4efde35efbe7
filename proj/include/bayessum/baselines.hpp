#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "bayessum/distributions.hpp"
#include "bayessum/rng.hpp"

namespace bayessum {

using Integrand = std::function<double(const State&)>;

inline constexpr double kDefaultRouletteRho = 0.95;

enum class BaselineMethod { kMonteCarlo, kImportance, kRoulette, kStratified };

/// Sampling law with a normalized log density.
struct Proposal {
  std::function<State(Rng&)> draw;
  std::function<double(const State&)> log_density;
};

Proposal proposal_from(const Distribution& dist);

/// Independent categorical sites; row i holds the probabilities of symbols 0..S-1 at site i.
Proposal factorized_categorical(const Eigen::MatrixXd& site_probs);

/// One stratum: its probability under P and a sampler for P restricted to it.
struct StratumCell {
  double probability = 0.0;
  std::function<State(Rng&)> draw;
};

/// Enumerates a countable or finite domain in a fixed order; nullopt past the end.
using DomainIndex = std::function<std::optional<State>(std::uint64_t)>;

struct BaselineConfig {
  BaselineMethod method = BaselineMethod::kMonteCarlo;
  std::optional<Proposal> is_proposal;
  double rr_rho = kDefaultRouletteRho;
  std::vector<StratumCell> ss_partition;
};

double monte_carlo(const Integrand& f, const SampleBatch& samples);

/// (1/N) sum f(x) p(x) / q(x) over draws from the proposal.
double importance_sampling(const Integrand& f, const std::function<double(const State&)>& log_p,
                           const Proposal& proposal, const SampleBatch& samples);

/// One roulette replicate: J with P(J >= j) = rho^j, then sum_{j <= J} f(x_j) p(x_j) / rho^j.
double russian_roulette_once(const Integrand& f, const std::function<double(const State&)>& p,
                             const DomainIndex& index, double rho, Rng& rng);

/// Average of `replicates` independent roulette replicates.
double russian_roulette(const Integrand& f, const std::function<double(const State&)>& p, const DomainIndex& index,
                        double rho, std::size_t replicates, Rng& rng);

/// sum_cells P(cell) * mean of f over floor(n / M) conditional draws (at least one).
double stratified_sampling(const Integrand& f, const std::vector<StratumCell>& cells, std::size_t n, Rng& rng);

/// Inverse-CDF sampler over the normalized masses of {lo, ..., lo + mass.size() - 1}.
std::function<State(Rng&)> inverse_cdf_sampler(int lo, std::vector<double> mass);

}  // namespace bayessum
