#include "bayessum/baselines.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

#include "bayessum/errors.hpp"

namespace bayessum {

Proposal proposal_from(const Distribution& dist) {
  if (!is_normalized(dist)) throw ContractError("proposals must be normalized");
  return {[dist](Rng& rng) { return draw(dist, rng); }, [dist](const State& x) { return log_pmf(dist, x); }};
}

Proposal factorized_categorical(const Eigen::MatrixXd& site_probs) {
  Eigen::MatrixXd probs = site_probs;
  for (Eigen::Index i = 0; i < probs.rows(); ++i) {
    const double total = probs.row(i).sum();
    if (!(total > 0.0) || (probs.row(i).array() < 0.0).any()) throw DomainError("invalid site probabilities");
    probs.row(i) /= total;
  }
  auto shared = std::make_shared<const Eigen::MatrixXd>(std::move(probs));
  Proposal q;
  q.draw = [shared](Rng& rng) {
    State x(shared->rows());
    for (Eigen::Index i = 0; i < shared->rows(); ++i) {
      double u = rng.uniform();
      Eigen::Index s = 0;
      for (; s + 1 < shared->cols(); ++s) {
        u -= (*shared)(i, s);
        if (u < 0.0) break;
      }
      x(i) = static_cast<int>(s);
    }
    return x;
  };
  q.log_density = [shared](const State& x) {
    double lp = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) lp += std::log((*shared)(i, x(i)));
    return lp;
  };
  return q;
}

double monte_carlo(const Integrand& f, const SampleBatch& samples) {
  if (samples.points.empty()) throw ContractError("Monte Carlo needs at least one sample");
  double total = 0.0;
  for (const auto& x : samples.points) total += f(x);
  return total / static_cast<double>(samples.points.size());
}

double importance_sampling(const Integrand& f, const std::function<double(const State&)>& log_p,
                           const Proposal& proposal, const SampleBatch& samples) {
  if (samples.points.empty()) throw ContractError("importance sampling needs at least one sample");
  double total = 0.0;
  for (const auto& x : samples.points) {
    const double lq = proposal.log_density(x);
    if (!std::isfinite(lq)) throw ContractError("proposal has zero mass at a sampled point");
    total += f(x) * std::exp(log_p(x) - lq);
  }
  return total / static_cast<double>(samples.points.size());
}

double russian_roulette_once(const Integrand& f, const std::function<double(const State&)>& p,
                             const DomainIndex& index, double rho, Rng& rng) {
  if (!(rho > 0.0 && rho < 1.0)) throw DomainError("roulette parameter must lie in (0, 1)");
  const auto depth = static_cast<std::uint64_t>(std::floor(std::log(rng.uniform_open()) / std::log(rho)));
  double total = 0.0;
  for (std::uint64_t j = 0; j <= depth; ++j) {
    const auto x = index(j);
    if (!x) break;
    total += f(*x) * p(*x) * std::pow(rho, -static_cast<double>(j));
  }
  return total;
}

double russian_roulette(const Integrand& f, const std::function<double(const State&)>& p, const DomainIndex& index,
                        double rho, std::size_t replicates, Rng& rng) {
  if (replicates == 0) throw ContractError("roulette needs at least one replicate");
  double total = 0.0;
  for (std::size_t r = 0; r < replicates; ++r) total += russian_roulette_once(f, p, index, rho, rng);
  return total / static_cast<double>(replicates);
}

double stratified_sampling(const Integrand& f, const std::vector<StratumCell>& cells, std::size_t n, Rng& rng) {
  if (cells.empty()) throw ContractError("stratification needs at least one cell");
  const std::size_t per_cell = std::max<std::size_t>(1, n / cells.size());
  double estimate = 0.0;
  for (const auto& cell : cells) {
    if (!(cell.probability > 0.0)) continue;
    double total = 0.0;
    for (std::size_t i = 0; i < per_cell; ++i) total += f(cell.draw(rng));
    estimate += cell.probability * total / static_cast<double>(per_cell);
  }
  return estimate;
}

std::function<State(Rng&)> inverse_cdf_sampler(int lo, std::vector<double> mass) {
  const double total = std::accumulate(mass.begin(), mass.end(), 0.0);
  if (!(total > 0.0)) throw DomainError("inverse-CDF sampler over zero mass");
  std::vector<double> cdf(mass.size());
  double run = 0.0;
  for (std::size_t i = 0; i < mass.size(); ++i) {
    run += mass[i] / total;
    cdf[i] = run;
  }
  auto shared = std::make_shared<const std::vector<double>>(std::move(cdf));
  return [shared, lo](Rng& rng) {
    const double u = rng.uniform();
    const auto it = std::upper_bound(shared->begin(), shared->end(), u);
    const auto idx = std::min<std::ptrdiff_t>(it - shared->begin(), static_cast<std::ptrdiff_t>(shared->size()) - 1);
    return scalar_state(lo + static_cast<int>(idx));
  };
}

}  // namespace bayessum
