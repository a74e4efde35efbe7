#include "bayessum/embeddings.hpp"

#include <cmath>
#include <numbers>
#include <vector>

#include "bayessum/errors.hpp"
#include "bayessum/specfn.hpp"

namespace bayessum {
namespace {

enum class Row {
  kPoissonBrownian,
  kNegBinomialBrownian,
  kLogarithmicBrownian,
  kPoissonPolynomial,
  kNegBinomialPolynomial,
  kSkellamPolynomial,
  kIsingExpHamming,
  kCategoricalExpHamming,
  kBinaryTanimoto,
  kNone,
};

Row classify(const EmbeddingPair& pair) {
  const auto& d = pair.dist;
  const auto& k = pair.kernel.family;
  const bool brownian = std::holds_alternative<BrownianMin>(k);
  const bool poly = std::holds_alternative<Polynomial>(k);
  const bool exp_hamming = std::holds_alternative<ExpHamming>(k);
  if (std::holds_alternative<Poisson>(d)) {
    if (brownian) return Row::kPoissonBrownian;
    if (poly) return Row::kPoissonPolynomial;
  }
  if (std::holds_alternative<NegBinomial>(d)) {
    if (brownian) return Row::kNegBinomialBrownian;
    if (poly) return Row::kNegBinomialPolynomial;
  }
  if (std::holds_alternative<Logarithmic>(d) && brownian) return Row::kLogarithmicBrownian;
  if (std::holds_alternative<Skellam>(d) && poly) return Row::kSkellamPolynomial;
  if (std::holds_alternative<UniformIsing>(d) && exp_hamming) return Row::kIsingExpHamming;
  if (const auto* c = std::get_if<UniformCategorical>(&d)) {
    if (exp_hamming) return Row::kCategoricalExpHamming;
    if (std::holds_alternative<Tanimoto>(k) && c->m == 1) return Row::kBinaryTanimoto;
  }
  return Row::kNone;
}

/// Raw moments E[X^n], n = 0..r, of the count laws with polynomial rows.
std::vector<double> raw_moments(const Distribution& dist, int r) {
  std::vector<double> out(static_cast<std::size_t>(r) + 1);
  if (const auto* p = std::get_if<Poisson>(&dist)) {
    for (int n = 0; n <= r; ++n) out[n] = specfn::touchard(n, p->rate);
  } else if (const auto* nb = std::get_if<NegBinomial>(&dist)) {
    for (int n = 0; n <= r; ++n) out[n] = specfn::gen_touchard(n, nb->tau, nb->q);
  } else if (const auto* s = std::get_if<Skellam>(&dist)) {
    std::vector<double> cumulants(static_cast<std::size_t>(r));
    specfn::skellam_cumulants(s->lambda1, s->lambda2, cumulants);
    for (int n = 0; n <= r; ++n) {
      out[n] = specfn::bell_complete(n, std::span<const double>(cumulants.data(), static_cast<std::size_t>(n)));
    }
  } else {
    throw CapabilityError("no moment formula for " + describe(dist));
  }
  return out;
}

double poisson_pmf(double rate, int n) {
  return std::exp(n * std::log(rate) - rate - specfn::log_factorial(n));
}

double unit_kme(const EmbeddingPair& pair, Row row, const State& y) {
  switch (row) {
    case Row::kPoissonBrownian: {
      const double eta = std::get<Poisson>(pair.dist).rate;
      const int yy = y(0);
      double head = 0.0;
      for (int n = 1; n <= yy; ++n) head += n * poisson_pmf(eta, n);
      return head + yy * (1.0 - specfn::reg_gamma_q(yy + 1.0, eta)) +
             std::get<BrownianMin>(pair.kernel.family).offset;
    }
    case Row::kNegBinomialBrownian: {
      const auto& nb = std::get<NegBinomial>(pair.dist);
      const int yy = y(0);
      double cdf_sum = 0.0;
      for (int n = 0; n < yy; ++n) cdf_sum += specfn::reg_inc_beta(nb.tau, n + 1.0, nb.q);
      return yy - cdf_sum + std::get<BrownianMin>(pair.kernel.family).offset;
    }
    case Row::kLogarithmicBrownian: {
      const double p = std::get<Logarithmic>(pair.dist).p;
      const int yy = y(0);
      double s = 0.0;
      double pn = 1.0;
      for (int n = 1; n < yy; ++n) {
        pn *= p;
        s += (yy - n) * pn / n;
      }
      return yy + s / std::log1p(-p) + std::get<BrownianMin>(pair.kernel.family).offset;
    }
    case Row::kPoissonPolynomial:
    case Row::kNegBinomialPolynomial:
    case Row::kSkellamPolynomial: {
      const int r = std::get<Polynomial>(pair.kernel.family).degree;
      const auto moments = raw_moments(pair.dist, r);
      double total = 0.0;
      double yn = 1.0;
      for (int n = 0; n <= r; ++n) {
        total += specfn::binomial(r, n) * yn * moments[n];
        yn *= y(0);
      }
      return total;
    }
    case Row::kIsingExpHamming: {
      const double lambda = std::get<ExpHamming>(pair.kernel.family).lambda;
      const int d = std::get<UniformIsing>(pair.dist).d;
      return std::exp(-lambda * d / 2.0) * std::pow(std::cosh(lambda / 2.0), d);
    }
    case Row::kCategoricalExpHamming: {
      const double lambda = std::get<ExpHamming>(pair.kernel.family).lambda;
      const auto& c = std::get<UniformCategorical>(pair.dist);
      return std::pow((1.0 + c.m * std::exp(-lambda)) / (c.m + 1.0), c.d);
    }
    case Row::kBinaryTanimoto: {
      const int d = std::get<UniformCategorical>(pair.dist).d;
      const int a = static_cast<int>(y.sum());
      const double log_norm = d * std::log(2.0);
      double total = 0.0;
      for (int i = 1; i <= a; ++i) {
        for (int j = 0; j <= d - a; ++j) {
          total += std::exp(specfn::log_binomial(a, i) + specfn::log_binomial(d - a, j) - log_norm) * i / (a + j);
        }
      }
      return total;
    }
    case Row::kNone:
      break;
  }
  throw CapabilityError("no closed-form embedding for " + describe(pair.dist));
}

double unit_initial_error(const EmbeddingPair& pair, Row row) {
  const int budget = pair.truncation_budget;
  switch (row) {
    case Row::kPoissonBrownian: {
      const double eta = std::get<Poisson>(pair.dist).rate;
      double total = 0.0;
      for (int r = 0; r < budget; ++r) {
        const double tail = 1.0 - specfn::reg_gamma_q(r + 1.0, eta);
        total += tail * tail;
      }
      return total + std::get<BrownianMin>(pair.kernel.family).offset;
    }
    case Row::kNegBinomialBrownian: {
      const auto& nb = std::get<NegBinomial>(pair.dist);
      double total = 0.0;
      for (int m = 0; m < budget; ++m) {
        const double tail = 1.0 - specfn::reg_inc_beta(nb.tau, m + 1.0, nb.q);
        total += tail * tail;
      }
      return total + std::get<BrownianMin>(pair.kernel.family).offset;
    }
    case Row::kLogarithmicBrownian:
      throw CapabilityError("initial error unavailable in closed form for Log/Brownian");
    case Row::kPoissonPolynomial:
    case Row::kNegBinomialPolynomial:
    case Row::kSkellamPolynomial: {
      const int r = std::get<Polynomial>(pair.kernel.family).degree;
      const auto moments = raw_moments(pair.dist, r);
      double total = 0.0;
      for (int n = 0; n <= r; ++n) total += specfn::binomial(r, n) * moments[n] * moments[n];
      return total;
    }
    case Row::kIsingExpHamming:
    case Row::kCategoricalExpHamming:
      return unit_kme(pair, row, State::Zero(num_sites(pair.dist)));
    case Row::kBinaryTanimoto: {
      const int d = std::get<UniformCategorical>(pair.dist).d;
      double total = 0.0;
      for (int a = 1; a <= d; ++a) {
        State y = State::Zero(d);
        y.head(a).setOnes();
        total += std::exp(specfn::log_binomial(d, a) - d * std::log(2.0)) * unit_kme(pair, row, y);
      }
      return total;
    }
    case Row::kNone:
      break;
  }
  throw CapabilityError("no closed-form initial error for " + describe(pair.dist));
}

// Points of a count support within the brute-force budget.
std::vector<State> truncated_points(const Distribution& dist, int budget) {
  std::vector<State> points;
  const int lo = std::holds_alternative<Skellam>(dist) ? -budget : (std::holds_alternative<Logarithmic>(dist) ? 1 : 0);
  for (int x = lo; x <= budget; ++x) points.push_back(scalar_state(x));
  return points;
}

}  // namespace

bool has_closed_form_kme(const EmbeddingPair& pair) { return classify(pair) != Row::kNone; }

bool has_closed_form_initial_error(const EmbeddingPair& pair) {
  const Row row = classify(pair);
  return row != Row::kNone && row != Row::kLogarithmicBrownian;
}

double kme(const EmbeddingPair& pair, const State& y) {
  const Row row = classify(pair);
  if (row == Row::kNone) throw CapabilityError("no closed-form embedding for " + describe(pair.dist));
  if (!in_support(pair.dist, y)) throw DomainError("kme argument outside the support");
  return pair.kernel.amplitude * unit_kme(pair, row, y);
}

Eigen::VectorXd kme_vector(const EmbeddingPair& pair, const std::vector<State>& points) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) out(static_cast<Eigen::Index>(i)) = kme(pair, points[i]);
  return out;
}

double initial_error(const EmbeddingPair& pair) {
  return pair.kernel.amplitude * unit_initial_error(pair, classify(pair));
}

TruncatedSum brute_force_kme(const Distribution& dist, const DiscreteKernel& kernel, const State& y, int budget) {
  TruncatedSum out;
  if (support_kind(dist) == SupportKind::kFiniteProduct) {
    const double log_z = is_normalized(dist) ? 0.0 : [&] {
      double z = 0.0;
      for_each_state(dist, [&](const State& x) { z += pmf(dist, x); });
      return std::log(z);
    }();
    for_each_state(dist, [&](const State& x) { out.value += eval(kernel, x, y) * std::exp(log_pmf(dist, x) - log_z); });
    return out;
  }
  double mass = 0.0;
  for (const auto& x : truncated_points(dist, budget)) {
    const double p = pmf(dist, x);
    mass += p;
    out.value += eval(kernel, x, y) * p;
  }
  out.tail_mass = std::max(0.0, 1.0 - mass);
  return out;
}

TruncatedSum brute_force_initial_error(const Distribution& dist, const DiscreteKernel& kernel, int budget) {
  TruncatedSum out;
  std::vector<State> points;
  std::vector<double> probs;
  if (support_kind(dist) == SupportKind::kFiniteProduct) {
    points = enumerate_support(dist);
    double z = 0.0;
    for (const auto& x : points) {
      probs.push_back(pmf(dist, x));
      z += probs.back();
    }
    for (double& p : probs) p /= z;
  } else {
    points = truncated_points(dist, budget);
    double mass = 0.0;
    for (const auto& x : points) {
      probs.push_back(pmf(dist, x));
      mass += probs.back();
    }
    out.tail_mass = std::max(0.0, 1.0 - mass);
  }
  for (std::size_t i = 0; i < points.size(); ++i) {
    double row = 0.0;
    for (std::size_t j = 0; j < points.size(); ++j) row += probs[j] * eval(kernel, points[i], points[j]);
    out.value += probs[i] * row;
  }
  return out;
}

double gaussian_uniform_kme(const GaussianRbf& k, const UniformInterval& law, double x) {
  const double ell = k.lengthscale;
  const double s = ell * std::numbers::sqrt2;
  return k.amplitude * ell * std::sqrt(std::numbers::pi / 2.0) / (law.upper - law.lower) *
         (std::erf((law.upper - x) / s) - std::erf((law.lower - x) / s));
}

double gaussian_uniform_initial_error(const GaussianRbf& k, const UniformInterval& law) {
  const double ell = k.lengthscale;
  const double w = law.upper - law.lower;
  return k.amplitude / (w * w) *
         (2.0 * ell * ell * std::expm1(-w * w / (2.0 * ell * ell)) +
          ell * w * std::sqrt(2.0 * std::numbers::pi) * std::erf(w / (ell * std::numbers::sqrt2)));
}

double mixed_kme(const MixedEmbedding& emb, const MixedPoint& point) {
  const double mc = gaussian_uniform_kme(emb.kernel.continuous, emb.continuous, point.continuous);
  const double md = kme(EmbeddingPair{emb.discrete, emb.kernel.discrete}, point.discrete);
  if (emb.kernel.composition == Composition::kProduct) return emb.kernel.amplitude * mc * md;
  return emb.kernel.amplitude * (mc + md + mc * md);
}

Eigen::VectorXd mixed_kme_vector(const MixedEmbedding& emb, const std::vector<MixedPoint>& points) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) out(static_cast<Eigen::Index>(i)) = mixed_kme(emb, points[i]);
  return out;
}

double mixed_initial_error(const MixedEmbedding& emb) {
  const double ec = gaussian_uniform_initial_error(emb.kernel.continuous, emb.continuous);
  const double ed = initial_error(EmbeddingPair{emb.discrete, emb.kernel.discrete});
  if (emb.kernel.composition == Composition::kProduct) return emb.kernel.amplitude * ec * ed;
  return emb.kernel.amplitude * (ec + ed + ec * ed);
}

}  // namespace bayessum
