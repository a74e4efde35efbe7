#include "bayessum/distributions.hpp"

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <sstream>
#include <unordered_set>

#include "bayessum/errors.hpp"
#include "bayessum/specfn.hpp"

namespace bayessum {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
// Count-family tables stop once the log-mass is this far below its maximum.
constexpr double kTableLogCutoff = -50.0;
constexpr int kMaxTableLength = 10'000'000;

bool is_count_family(const Distribution& dist) {
  return std::holds_alternative<Poisson>(dist) || std::holds_alternative<NegBinomial>(dist) ||
         std::holds_alternative<Logarithmic>(dist) || std::holds_alternative<Skellam>(dist) ||
         std::holds_alternative<Cmp>(dist);
}

double count_log_mass(const Distribution& dist, int x) {
  return std::visit(
      Overloaded{
          [&](const Poisson& d) {
            if (x < 0) return kNegInf;
            return x * std::log(d.rate) - d.rate - specfn::log_factorial(x);
          },
          [&](const NegBinomial& d) {
            if (x < 0) return kNegInf;
            return std::lgamma(x + d.tau) - std::lgamma(d.tau) - specfn::log_factorial(x) +
                   x * std::log1p(-d.q) + d.tau * std::log(d.q);
          },
          [&](const Logarithmic& d) {
            if (x < 1) return kNegInf;
            return x * std::log(d.p) - std::log(static_cast<double>(x)) - std::log(-std::log1p(-d.p));
          },
          [&](const Skellam& d) {
            const double arg = 2.0 * std::sqrt(d.lambda1 * d.lambda2);
            const double bessel = specfn::bessel_i(std::abs(x), arg);
            if (bessel <= 0.0) return kNegInf;
            return -(d.lambda1 + d.lambda2) + 0.5 * x * std::log(d.lambda1 / d.lambda2) + std::log(bessel);
          },
          [&](const Cmp& d) {
            if (x < 0) return kNegInf;
            return x * std::log(d.theta1) - d.theta2 * specfn::log_factorial(x);
          },
          [](const auto&) -> double { throw ContractError("not a count family"); },
      },
      dist);
}

int count_mode_guess(const Distribution& dist) {
  return std::visit(Overloaded{
                        [](const Poisson& d) { return static_cast<int>(std::floor(d.rate)); },
                        [](const NegBinomial& d) {
                          return d.tau > 1 ? static_cast<int>(std::floor((d.tau - 1) * (1 - d.q) / d.q)) : 0;
                        },
                        [](const Logarithmic&) { return 1; },
                        [](const Skellam& d) { return static_cast<int>(std::round(d.lambda1 - d.lambda2)); },
                        [](const Cmp& d) {
                          return static_cast<int>(std::floor(std::pow(d.theta1, 1.0 / std::max(d.theta2, 1e-3))));
                        },
                        [](const auto&) { return 0; },
                    },
                    dist);
}

std::optional<int> count_lower_bound(const Distribution& dist) {
  if (std::holds_alternative<Logarithmic>(dist)) return 1;
  if (std::holds_alternative<Skellam>(dist)) return std::nullopt;
  return 0;
}

// Normalized pmf over [lo, hi]; the mass outside is below e^-50 relative to the mode.
struct CountTable {
  int lo = 0;
  std::vector<double> mass;

  [[nodiscard]] int hi() const { return lo + static_cast<int>(mass.size()) - 1; }
  [[nodiscard]] double at(int x) const { return (x < lo || x > hi()) ? 0.0 : mass[x - lo]; }
};

CountTable build_count_table(const Distribution& dist) {
  const std::optional<int> floor_support = count_lower_bound(dist);
  int start = count_mode_guess(dist);
  if (floor_support) start = std::max(start, *floor_support);

  std::deque<double> logs;
  double max_log = kNegInf;
  int argmax = start;
  for (int x = start;; ++x) {
    const double lm = count_log_mass(dist, x);
    if (lm > max_log) {
      max_log = lm;
      argmax = x;
    }
    logs.push_back(lm);
    if (x > argmax && lm < max_log + kTableLogCutoff) break;
    if (static_cast<int>(logs.size()) > kMaxTableLength) throw CapabilityError("count table too long");
  }
  int lo = start;
  for (int x = start - 1; !floor_support || x >= *floor_support; --x) {
    const double lm = count_log_mass(dist, x);
    if (lm > max_log) {
      max_log = lm;
      argmax = x;
    }
    logs.push_front(lm);
    lo = x;
    if (x < argmax && lm < max_log + kTableLogCutoff) break;
    if (static_cast<int>(logs.size()) > kMaxTableLength) throw CapabilityError("count table too long");
  }
  CountTable table;
  table.lo = lo;
  table.mass.reserve(logs.size());
  double total = 0.0;
  for (double lm : logs) {
    const double w = std::exp(lm - max_log);
    table.mass.push_back(w);
    total += w;
  }
  for (double& w : table.mass) w /= total;
  return table;
}

int draw_from_table(const CountTable& table, Rng& rng) {
  double u = rng.uniform();
  for (std::size_t i = 0; i < table.mass.size(); ++i) {
    u -= table.mass[i];
    if (u < 0.0) return table.lo + static_cast<int>(i);
  }
  return table.hi();
}

// Draw from the table restricted to values not in `excluded`.
int draw_from_table_excluding(const CountTable& table, const std::unordered_set<int>& excluded, Rng& rng) {
  double remaining = 0.0;
  for (std::size_t i = 0; i < table.mass.size(); ++i) {
    if (!excluded.contains(table.lo + static_cast<int>(i))) remaining += table.mass[i];
  }
  if (!(remaining > 0.0)) {
    throw CapabilityError("without-replacement sampling exhausted the representable support");
  }
  double u = rng.uniform() * remaining;
  int last = table.lo;
  for (std::size_t i = 0; i < table.mass.size(); ++i) {
    const int x = table.lo + static_cast<int>(i);
    if (excluded.contains(x)) continue;
    last = x;
    u -= table.mass[i];
    if (u < 0.0) return x;
  }
  return last;
}

void require(bool ok, const std::string& message) {
  if (!ok) throw DomainError(message);
}

State draw_product(const Distribution& dist, Rng& rng) {
  const auto alphabet = site_alphabet(dist);
  if (std::holds_alternative<Potts>(dist)) {
    throw CapabilityError("Potts laws are unnormalized; use mh_sample");
  }
  const int sites = num_sites(dist);
  State x(sites);
  for (int i = 0; i < sites; ++i) {
    x(i) = alphabet->value_at(static_cast<int>(rng.below(static_cast<std::uint64_t>(alphabet->size))));
  }
  return x;
}

}  // namespace

Potts Potts::chain(int length, int num_states, double beta, double field, double coupling) {
  Potts p{length, num_states, beta, Eigen::VectorXd::Constant(length, field), {}};
  for (int i = 0; i + 1 < length; ++i) p.edges.push_back({i, i + 1, coupling});
  return p;
}

Potts Potts::fully_connected(int length, int num_states, double beta, const Eigen::VectorXd& field,
                             const Eigen::MatrixXd& coupling) {
  Potts p{length, num_states, beta, field, {}};
  for (int i = 0; i < length; ++i) {
    for (int j = i + 1; j < length; ++j) p.edges.push_back({i, j, coupling(i, j)});
  }
  return p;
}

void validate(const Distribution& dist) {
  std::visit(Overloaded{
                 [](const Poisson& d) { require(d.rate > 0.0 && std::isfinite(d.rate), "Poisson requires eta > 0"); },
                 [](const NegBinomial& d) {
                   require(d.tau > 0.0 && d.q > 0.0 && d.q < 1.0, "NegBinomial requires tau > 0, 0 < q < 1");
                 },
                 [](const Logarithmic& d) { require(d.p > 0.0 && d.p < 1.0, "Logarithmic requires 0 < p < 1"); },
                 [](const Skellam& d) {
                   require(d.lambda1 > 0.0 && d.lambda2 > 0.0, "Skellam requires lambda1, lambda2 > 0");
                 },
                 [](const UniformCategorical& d) {
                   require(d.m >= 1 && d.d >= 1, "UniformCategorical requires m >= 1, d >= 1");
                 },
                 [](const UniformIsing& d) { require(d.d >= 1, "UniformIsing requires d >= 1"); },
                 [](const Potts& d) {
                   require(d.length >= 1 && d.num_states >= 2, "Potts requires L >= 1, S >= 2");
                   require(d.field.size() == d.length, "Potts field length must equal L");
                   for (const auto& e : d.edges) {
                     require(e.i >= 0 && e.j >= 0 && e.i < d.length && e.j < d.length && e.i != e.j,
                             "Potts edge out of range");
                   }
                 },
                 [](const Cmp& d) { require(d.theta1 > 0.0 && d.theta2 >= 0.0, "CMP requires theta1 > 0, theta2 >= 0"); },
             },
             dist);
}

std::string describe(const Distribution& dist) {
  std::ostringstream os;
  std::visit(Overloaded{
                 [&](const Poisson& d) { os << "Poisson(" << d.rate << ")"; },
                 [&](const NegBinomial& d) { os << "NB(" << d.tau << "," << d.q << ")"; },
                 [&](const Logarithmic& d) { os << "Log(" << d.p << ")"; },
                 [&](const Skellam& d) { os << "Skellam(" << d.lambda1 << "," << d.lambda2 << ")"; },
                 [&](const UniformCategorical& d) { os << "Uniform{0.." << d.m << "}^" << d.d; },
                 [&](const UniformIsing& d) { os << "Uniform{-1,+1}^" << d.d; },
                 [&](const Potts& d) { os << "Potts(L=" << d.length << ",S=" << d.num_states << ")"; },
                 [&](const Cmp& d) { os << "CMP(" << d.theta1 << "," << d.theta2 << ")"; },
             },
             dist);
  return os.str();
}

SupportKind support_kind(const Distribution& dist) {
  return is_count_family(dist) ? SupportKind::kCountable : SupportKind::kFiniteProduct;
}

bool is_normalized(const Distribution& dist) {
  return !std::holds_alternative<Potts>(dist) && !std::holds_alternative<Cmp>(dist);
}

int num_sites(const Distribution& dist) {
  return std::visit(Overloaded{
                        [](const UniformCategorical& d) { return d.d; },
                        [](const UniformIsing& d) { return d.d; },
                        [](const Potts& d) { return d.length; },
                        [](const auto&) { return 1; },
                    },
                    dist);
}

std::optional<SiteAlphabet> site_alphabet(const Distribution& dist) {
  return std::visit(Overloaded{
                        [](const UniformCategorical& d) -> std::optional<SiteAlphabet> {
                          return SiteAlphabet{d.m + 1, 0, 1};
                        },
                        [](const UniformIsing&) -> std::optional<SiteAlphabet> { return SiteAlphabet{2, -1, 2}; },
                        [](const Potts& d) -> std::optional<SiteAlphabet> {
                          return SiteAlphabet{d.num_states, 0, 1};
                        },
                        [](const auto&) -> std::optional<SiteAlphabet> { return std::nullopt; },
                    },
                    dist);
}

std::optional<std::uint64_t> cardinality(const Distribution& dist) {
  const auto alphabet = site_alphabet(dist);
  if (!alphabet) return std::nullopt;
  const int sites = num_sites(dist);
  std::uint64_t total = 1;
  const auto base = static_cast<std::uint64_t>(alphabet->size);
  for (int i = 0; i < sites; ++i) {
    if (total > std::numeric_limits<std::uint64_t>::max() / base) return std::nullopt;
    total *= base;
  }
  return total;
}

bool in_support(const Distribution& dist, const State& x) {
  if (is_count_family(dist)) {
    if (x.size() != 1) return false;
    const auto lo = count_lower_bound(dist);
    return !lo || x(0) >= *lo;
  }
  const auto alphabet = site_alphabet(dist);
  if (x.size() != num_sites(dist)) return false;
  for (int i = 0; i < x.size(); ++i) {
    const int offset = x(i) - alphabet->offset;
    if (offset < 0 || offset % alphabet->stride != 0 || offset / alphabet->stride >= alphabet->size) return false;
  }
  return true;
}

double log_pmf(const Distribution& dist, const State& x) {
  if (!in_support(dist, x)) throw DomainError("point outside the support of " + describe(dist));
  if (is_count_family(dist)) return count_log_mass(dist, x(0));
  return std::visit(Overloaded{
                        [&](const UniformCategorical& d) { return -d.d * std::log(d.m + 1.0); },
                        [&](const UniformIsing& d) { return -d.d * std::log(2.0); },
                        [&](const Potts& d) {
                          double energy = 0.0;
                          for (int i = 0; i < d.length; ++i) energy += d.field(i) * x(i);
                          for (const auto& e : d.edges) {
                            if (x(e.i) == x(e.j)) energy += e.coupling;
                          }
                          return d.beta * energy;
                        },
                        [](const auto&) -> double { throw ContractError("unreachable"); },
                    },
                    dist);
}

double pmf(const Distribution& dist, const State& x) { return std::exp(log_pmf(dist, x)); }

State draw(const Distribution& dist, Rng& rng) {
  if (is_count_family(dist)) return scalar_state(draw_from_table(build_count_table(dist), rng));
  return draw_product(dist, rng);
}

SampleBatch sample(const Distribution& dist, std::size_t n, Replacement mode, std::uint64_t seed) {
  Rng rng(seed);
  SampleBatch batch = sample(dist, n, mode, rng);
  batch.rng_seed = seed;
  return batch;
}

SampleBatch sample(const Distribution& dist, std::size_t n, Replacement mode, Rng& rng) {
  validate(dist);
  SampleBatch batch;
  batch.mode = mode;
  batch.points.reserve(n);
  if (is_count_family(dist)) {
    const CountTable table = build_count_table(dist);
    if (mode == Replacement::kWith) {
      for (std::size_t i = 0; i < n; ++i) batch.points.push_back(scalar_state(draw_from_table(table, rng)));
      return batch;
    }
    if (n > table.mass.size()) throw CapabilityError("too many distinct draws requested for " + describe(dist));
    std::unordered_set<int> seen;
    for (std::size_t i = 0; i < n; ++i) {
      const int x = draw_from_table_excluding(table, seen, rng);
      seen.insert(x);
      batch.points.push_back(scalar_state(x));
    }
    return batch;
  }
  if (std::holds_alternative<Potts>(dist)) throw CapabilityError("Potts laws are sampled with mh_sample");
  if (mode == Replacement::kWith) {
    for (std::size_t i = 0; i < n; ++i) batch.points.push_back(draw_product(dist, rng));
    return batch;
  }
  const auto card = cardinality(dist);
  if (card && n > *card) {
    throw CapabilityError("requested " + std::to_string(n) + " distinct points from a support of size " +
                          std::to_string(*card));
  }
  std::unordered_set<State, StateHash, StateEqual> seen;
  for (std::size_t i = 0; i < n; ++i) {
    std::uint64_t retries = 0;
    for (;;) {
      State x = draw_product(dist, rng);
      if (seen.insert(x).second) {
        batch.points.push_back(std::move(x));
        break;
      }
      if (++retries > kRejectionRetryCap) throw CapabilityError("duplicate rejection exceeded the retry cap");
    }
  }
  return batch;
}

State draw_excluding(const Distribution& dist, const std::vector<State>& exclude, Rng& rng) {
  if (is_count_family(dist)) {
    std::unordered_set<int> seen;
    for (const auto& s : exclude) seen.insert(s(0));
    return scalar_state(draw_from_table_excluding(build_count_table(dist), seen, rng));
  }
  std::unordered_set<State, StateHash, StateEqual> seen(exclude.begin(), exclude.end());
  const auto card = cardinality(dist);
  if (card && seen.size() >= *card) throw CapabilityError("support exhausted");
  for (std::uint64_t retries = 0; retries <= kRejectionRetryCap; ++retries) {
    State x = draw_product(dist, rng);
    if (!seen.contains(x)) return x;
  }
  throw CapabilityError("duplicate rejection exceeded the retry cap");
}

ChainOutput mh_sample(const Distribution& dist, std::size_t n, std::size_t burn_in, std::size_t thinning,
                      std::uint64_t seed, std::optional<State> initial) {
  validate(dist);
  if (thinning == 0) throw DomainError("thinning must be positive");
  const auto alphabet = site_alphabet(dist);
  if (!alphabet || alphabet->size < 2) throw CapabilityError("mh_sample needs a finite per-site alphabet");
  const int sites = num_sites(dist);
  Rng rng(seed);

  State x(sites);
  if (initial) {
    if (!in_support(dist, *initial)) throw DomainError("initial state outside the support");
    x = *initial;
  } else {
    for (int i = 0; i < sites; ++i) {
      x(i) = alphabet->value_at(static_cast<int>(rng.below(static_cast<std::uint64_t>(alphabet->size))));
    }
  }
  double lp = log_pmf(dist, x);

  ChainOutput out;
  out.batch.mode = Replacement::kWith;
  out.batch.rng_seed = seed;
  out.batch.points.reserve(n);
  std::size_t iterations = 0;
  std::size_t accepted = 0;
  while (out.batch.points.size() < n) {
    const int site = static_cast<int>(rng.below(static_cast<std::uint64_t>(sites)));
    const int current = alphabet->index_of(x(site));
    const int step = 1 + static_cast<int>(rng.below(static_cast<std::uint64_t>(alphabet->size - 1)));
    const int old_value = x(site);
    x(site) = alphabet->value_at((current + step) % alphabet->size);
    const double lp_new = log_pmf(dist, x);
    if (std::log(rng.uniform_open()) < lp_new - lp) {
      lp = lp_new;
      ++accepted;
    } else {
      x(site) = old_value;
    }
    ++iterations;
    if (iterations > burn_in && (iterations - burn_in) % thinning == 0) out.batch.points.push_back(x);
  }
  out.acceptance_rate = iterations > 0 ? static_cast<double>(accepted) / static_cast<double>(iterations) : 0.0;
  return out;
}

State cyclic_shift(const SiteAlphabet& alphabet, const State& x, int site, int direction) {
  State y = x;
  y(site) = direction > 0 ? alphabet.next(x(site)) : alphabet.prev(x(site));
  return y;
}

Eigen::VectorXd diff_score(const Distribution& dist, const State& x) {
  const auto alphabet = site_alphabet(dist);
  if (!alphabet) throw CapabilityError("diff_score needs a finite per-site alphabet");
  const double lp = log_pmf(dist, x);
  if (!std::isfinite(lp)) throw SingularScoreError("difference score undefined where p(x) = 0");
  const int sites = num_sites(dist);
  Eigen::VectorXd score(sites);
  State y = x;
  for (int i = 0; i < sites; ++i) {
    y(i) = alphabet->next(x(i));
    score(i) = -std::expm1(log_pmf(dist, y) - lp);
    y(i) = x(i);
  }
  return score;
}

std::uint64_t for_each_state(const Distribution& dist, const std::function<void(const State&)>& visit,
                             std::uint64_t cap) {
  const auto alphabet = site_alphabet(dist);
  if (!alphabet) throw CapabilityError(describe(dist) + " has a countably infinite support");
  const auto card = cardinality(dist);
  if (!card || *card > cap) {
    throw CapabilityError("support of " + describe(dist) + " exceeds the enumeration cap");
  }
  const int sites = num_sites(dist);
  Eigen::VectorXi index = Eigen::VectorXi::Zero(sites);
  State x(sites);
  for (int i = 0; i < sites; ++i) x(i) = alphabet->value_at(0);
  for (std::uint64_t count = 0; count < *card; ++count) {
    visit(x);
    for (int i = sites - 1; i >= 0; --i) {
      if (++index(i) < alphabet->size) {
        x(i) = alphabet->value_at(index(i));
        break;
      }
      index(i) = 0;
      x(i) = alphabet->value_at(0);
    }
  }
  return *card;
}

std::vector<State> enumerate_support(const Distribution& dist, std::uint64_t cap) {
  std::vector<State> out;
  if (const auto card = cardinality(dist); card && *card <= cap) out.reserve(*card);
  for_each_state(dist, [&](const State& x) { out.push_back(x); }, cap);
  return out;
}

std::uint64_t state_index(const Distribution& dist, const State& x) {
  const auto alphabet = site_alphabet(dist);
  if (!alphabet) throw CapabilityError("state_index needs a finite product support");
  std::uint64_t index = 0;
  for (int i = 0; i < x.size(); ++i) {
    index = index * static_cast<std::uint64_t>(alphabet->size) + static_cast<std::uint64_t>(alphabet->index_of(x(i)));
  }
  return index;
}

State state_at(const Distribution& dist, std::uint64_t index) {
  const auto alphabet = site_alphabet(dist);
  if (!alphabet) throw CapabilityError("state_at needs a finite product support");
  const int sites = num_sites(dist);
  State x(sites);
  const auto base = static_cast<std::uint64_t>(alphabet->size);
  for (int i = sites - 1; i >= 0; --i) {
    x(i) = alphabet->value_at(static_cast<int>(index % base));
    index /= base;
  }
  return x;
}

int count_upper_quantile(const Distribution& dist, double tail) {
  if (!is_count_family(dist)) throw ContractError("count_upper_quantile needs a count family");
  const CountTable table = build_count_table(dist);
  double upper = 0.0;
  for (int i = static_cast<int>(table.mass.size()) - 1; i >= 0; --i) {
    upper += table.mass[i];
    if (upper >= tail) return table.lo + i;
  }
  return table.lo;
}

std::size_t StateHash::operator()(const State& s) const noexcept {
  std::uint64_t h = 0x84222325CBF29CE4ULL ^ static_cast<std::uint64_t>(s.size());
  for (int i = 0; i < s.size(); ++i) {
    h = Rng::mix(h ^ static_cast<std::uint64_t>(static_cast<std::uint32_t>(s(i))));
  }
  return static_cast<std::size_t>(h);
}

std::vector<State> unique_states(std::span<const State> points) {
  std::unordered_set<State, StateHash, StateEqual> seen;
  std::vector<State> out;
  for (const auto& p : points) {
    if (seen.insert(p).second) out.push_back(p);
  }
  return out;
}

}  // namespace bayessum
