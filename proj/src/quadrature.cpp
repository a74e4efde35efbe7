#include "bayessum/quadrature.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <unordered_set>

#include "bayessum/errors.hpp"

namespace bayessum {
namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();

std::vector<double> sorted_unique(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  v.erase(std::unique(v.begin(), v.end()), v.end());
  return v;
}

}  // namespace

std::size_t count_duplicates(const std::vector<State>& points) {
  std::unordered_set<State, StateHash, StateEqual> seen;
  std::size_t dups = 0;
  for (const auto& p : points) {
    if (!seen.insert(p).second) ++dups;
  }
  return dups;
}

QuadratureState build_state(const Eigen::MatrixXd& gram, Eigen::VectorXd kme_vec, double initial_err,
                            Eigen::VectorXd fvals) {
  if (gram.rows() != kme_vec.size() || gram.rows() != fvals.size()) {
    throw ContractError("points, function values and embedding vector differ in length");
  }
  QuadratureState state;
  state.factor = GramFactor<double>(gram);
  state.kme_vec = std::move(kme_vec);
  state.initial_err = initial_err;
  state.fvals = std::move(fvals);
  return state;
}

QuadratureState build_state(const EmbeddingPair& pair, const std::vector<State>& points, const Eigen::VectorXd& fvals,
                            DuplicatePolicy policy) {
  if (!is_psd(pair.kernel)) throw ContractError("kernel is not positive semidefinite");
  const std::size_t dups = count_duplicates(points);
  if (dups > 0 && policy == DuplicatePolicy::kReject) {
    throw SingularGramError("repeated sample points make the Gram matrix singular");
  }
  // Log/Brownian has no closed-form initial error; the mean is still available.
  const double ie = has_closed_form_initial_error(pair) ? initial_error(pair) : std::numeric_limits<double>::quiet_NaN();
  QuadratureState state = build_state(gram(pair.kernel, points), kme_vector(pair, points), ie, fvals);
  state.duplicates = dups;
  return state;
}

QuadratureState build_mixed_state(const MixedEmbedding& emb, const std::vector<MixedPoint>& points,
                                  const Eigen::VectorXd& fvals) {
  return build_state(gram(emb.kernel, points), mixed_kme_vector(emb, points), mixed_initial_error(emb), fvals);
}

double posterior_variance(const QuadratureState& state) {
  if (std::isnan(state.initial_err)) return state.initial_err;
  const double v = state.initial_err - state.factor.quad(state.kme_vec);
  if (v >= 0.0) return v;
  if (v >= -kVarianceClampWindow * std::abs(state.initial_err)) return 0.0;
  throw NumericalError("posterior variance is negative beyond the clamp window");
}

Eigen::VectorXd precompute_weights(const QuadratureState& state) {
  if (state.size() == 0) return Eigen::VectorXd();
  return state.factor.solve(state.kme_vec);
}

PosteriorEstimate bayessum(const QuadratureState& state, bool center) {
  PosteriorEstimate out;
  out.variance = posterior_variance(state);
  if (state.size() == 0) return out;
  const Eigen::VectorXd w = precompute_weights(state);
  if (center) {
    const double c = state.fvals.mean();
    out.mean = c + w.dot((state.fvals.array() - c).matrix());
  } else {
    out.mean = w.dot(state.fvals);
  }
  return out;
}

PosteriorEstimate mixed_bayessum(const MixedEmbedding& emb, const std::vector<MixedPoint>& points,
                                 const Eigen::VectorXd& fvals, bool center) {
  return bayessum(build_mixed_state(emb, points, fvals), center);
}

PosteriorEstimate stein_bayessum(const Eigen::MatrixXd& stein_gram, const Eigen::VectorXd& fvals) {
  if (stein_gram.rows() != fvals.size() || fvals.size() == 0) throw ContractError("Stein BayesSum needs N >= 1 values");
  const GramFactor<double> factor(stein_gram);
  const Eigen::VectorXd a = factor.solve(Eigen::VectorXd::Ones(fvals.size()));
  const double precision = a.sum();
  if (!(precision > 0.0)) throw NumericalError("1^T K^{-1} 1 is not positive");
  return {a.dot(fvals) / precision, 1.0 / precision};
}

PosteriorEstimate stein_bayessum(const SteinKernel& kernel, const std::vector<State>& points,
                                 const Eigen::VectorXd& fvals) {
  if (count_duplicates(points) > 0) throw SingularGramError("repeated sample points make the Gram matrix singular");
  return stein_bayessum(gram(kernel, points), fvals);
}

double log_marginal_likelihood(const Eigen::MatrixXd& gram, const Eigen::VectorXd& fvals) {
  const GramFactor<double> factor(gram);
  const auto n = static_cast<double>(fvals.size());
  return -0.5 * factor.quad(fvals) - 0.5 * factor.log_det() - 0.5 * n * std::log(2.0 * std::numbers::pi);
}

HyperChoice select_hyperparams(const std::function<Eigen::MatrixXd(double)>& unit_gram, const Eigen::VectorXd& fvals,
                               const HyperGrid& grid) {
  const auto amplitudes = sorted_unique(grid.amplitudes);
  const auto scales = sorted_unique(grid.scales);
  if (amplitudes.empty() || scales.empty()) throw ContractError("hyperparameter grid is empty");
  std::vector<Eigen::MatrixXd> grams;
  grams.reserve(scales.size());
  for (double s : scales) grams.push_back(unit_gram(s));

  std::optional<HyperChoice> best;
  for (double a : amplitudes) {
    for (std::size_t j = 0; j < scales.size(); ++j) {
      double lml = kNegInf;
      try {
        lml = log_marginal_likelihood(a * grams[j], fvals);
      } catch (const SingularGramError&) {
        continue;
      }
      if (!best || lml > best->log_likelihood) best = HyperChoice{a, scales[j], lml};
    }
  }
  if (!best) throw SingularGramError("every grid point gave a singular Gram matrix");
  return *best;
}

DiscreteKernel with_scale(DiscreteKernel k, double scale) {
  auto* e = std::get_if<ExpHamming>(&k.family);
  if (e == nullptr) throw ContractError("scale selection is defined for the exponential Hamming kernel");
  e->lambda = scale;
  return k;
}

DiscreteKernel select_hyperparams(const DiscreteKernel& family, const std::vector<State>& points,
                                  const Eigen::VectorXd& fvals, const HyperGrid& grid) {
  const HyperChoice choice = select_hyperparams(
      [&](double s) { return gram(with_scale(with_amplitude(family, 1.0), s), points); }, fvals, grid);
  return with_amplitude(with_scale(family, choice.scale), choice.amplitude);
}

double acquisition_mi(const EmbeddingPair& pair, const std::vector<State>& points, const QuadratureState& state,
                      const State& x_star) {
  for (const auto& p : points) {
    if (StateEqual{}(p, x_star)) return kNegInf;
  }
  const double kss = eval(pair.kernel, x_star, x_star);
  const double mu_star = kme(pair, x_star);
  double ktilde = kss;
  double cov = mu_star;
  double sigma2 = state.initial_err;
  if (!points.empty()) {
    const Eigen::VectorXd kstar = cross_column(pair.kernel, points, x_star);
    const Eigen::VectorXd half = state.factor.solve(kstar);
    ktilde = kss - kstar.dot(half);
    cov = mu_star - state.kme_vec.dot(half);
    sigma2 = posterior_variance(state);
  }
  if (ktilde <= kAcquisitionFloor || !(sigma2 > 0.0)) return kNegInf;
  const double ratio = std::clamp(cov * cov / (sigma2 * ktilde), 0.0, 1.0 - 1e-16);
  return -std::log1p(-ratio);
}

std::optional<State> active_select(const EmbeddingPair& pair, const std::vector<State>& points,
                                   const QuadratureState& state, const std::vector<State>& domain,
                                   std::size_t pool_size, Rng& rng) {
  const std::unordered_set<State, StateHash, StateEqual> observed(points.begin(), points.end());
  std::vector<std::size_t> free;
  for (std::size_t i = 0; i < domain.size(); ++i) {
    if (!observed.contains(domain[i])) free.push_back(i);
  }
  if (free.empty() || pool_size == 0) return std::nullopt;
  const std::size_t take = std::min(pool_size, free.size());
  for (std::size_t i = 0; i < take; ++i) {
    const std::size_t j = i + static_cast<std::size_t>(rng.below(free.size() - i));
    std::swap(free[i], free[j]);
  }
  free.resize(take);
  std::sort(free.begin(), free.end());

  double best_score = kNegInf;
  std::optional<State> best;
  for (std::size_t idx : free) {
    const double score = acquisition_mi(pair, points, state, domain[idx]);
    if (score > best_score) {
      best_score = score;
      best = domain[idx];
    }
  }
  return best;
}

ActiveRun active_bayessum(const EmbeddingPair& pair, const std::function<double(const State&)>& f,
                          const std::vector<State>& domain, std::size_t budget, std::size_t pool_size,
                          std::uint64_t seed) {
  Rng rng(seed);
  ActiveRun run;
  std::vector<double> values;
  QuadratureState state = build_state(pair, run.points, Eigen::VectorXd());
  while (run.points.size() < budget) {
    const auto next = active_select(pair, run.points, state, domain, pool_size, rng);
    if (!next) break;
    run.points.push_back(*next);
    values.push_back(f(*next));
    state = build_state(pair, run.points, Eigen::Map<const Eigen::VectorXd>(values.data(), static_cast<Eigen::Index>(values.size())));
    run.estimates.push_back(bayessum(state));
  }
  return run;
}

double thm1_bound(double sup_bound, double rkhs_norm, double observed_mass) {
  if (observed_mass > 1.0 + 1e-12 || observed_mass < 0.0) throw ContractError("observed mass must lie in [0, 1]");
  if (sup_bound < 0.0 || rkhs_norm < 0.0) throw ContractError("bound constants must be nonnegative");
  return sup_bound * rkhs_norm * std::max(0.0, 1.0 - observed_mass);
}

}  // namespace bayessum
