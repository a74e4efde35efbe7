#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <variant>
#include <vector>

#include <Eigen/Core>

#include "bayessum/rng.hpp"

namespace bayessum {

/// Integer-coded domain element. Count families use length-1 states; product
/// families store one symbol per site.
using State = Eigen::VectorXi;

inline State scalar_state(int x) {
  State s(1);
  s(0) = x;
  return s;
}

inline constexpr std::uint64_t kDefaultEnumerationCap = 20'000'000;
inline constexpr std::uint64_t kRejectionRetryCap = 1'000'000;

struct Poisson {
  double rate;
};

/// pmf C(x+tau-1, x) (1-q)^x q^tau on {0, 1, ...}; mean tau (1-q) / q.
struct NegBinomial {
  double tau;
  double q;
};

/// pmf -p^x / (x ln(1-p)) on {1, 2, ...}.
struct Logarithmic {
  double p;
};

struct Skellam {
  double lambda1;
  double lambda2;
};

/// Uniform on {0, ..., m}^d.
struct UniformCategorical {
  int m;
  int d;
};

/// Uniform on {-1, +1}^d.
struct UniformIsing {
  int d;
};

/// Pairwise site coupling of a Potts model.
struct PottsEdge {
  int i;
  int j;
  double coupling;
};

/// Unnormalized Potts law on {0, ..., S-1}^L:
///   log p(x) = beta * (sum_i h_i x_i + sum_{(i,j)} J_ij 1{x_i = x_j}) + const.
/// The one-hot inner product x_i * x_j reduces to the equality indicator.
struct Potts {
  int length;
  int num_states;
  double beta;
  Eigen::VectorXd field;
  std::vector<PottsEdge> edges;

  static Potts chain(int length, int num_states, double beta, double field, double coupling);
  static Potts fully_connected(int length, int num_states, double beta, const Eigen::VectorXd& field,
                               const Eigen::MatrixXd& coupling);
};

/// Conway-Maxwell-Poisson, unnormalized mass theta1^x (x!)^{-theta2}.
struct Cmp {
  double theta1;
  double theta2;
};

using Distribution =
    std::variant<Poisson, NegBinomial, Logarithmic, Skellam, UniformCategorical, UniformIsing, Potts, Cmp>;

enum class SupportKind { kCountable, kFiniteProduct };

/// Per-site alphabet {offset, offset + stride, ..., offset + (size-1) stride}
/// with the cyclic order of increasing symbol index.
struct SiteAlphabet {
  int size;
  int offset = 0;
  int stride = 1;

  [[nodiscard]] int index_of(int value) const { return (value - offset) / stride; }
  [[nodiscard]] int value_at(int index) const { return offset + stride * index; }
  [[nodiscard]] int next(int value) const { return value_at((index_of(value) + 1) % size); }
  [[nodiscard]] int prev(int value) const { return value_at((index_of(value) + size - 1) % size); }
};

void validate(const Distribution& dist);
std::string describe(const Distribution& dist);
SupportKind support_kind(const Distribution& dist);
bool is_normalized(const Distribution& dist);

/// Number of sites for product families, 1 for count families.
int num_sites(const Distribution& dist);
std::optional<SiteAlphabet> site_alphabet(const Distribution& dist);

/// Cardinality of a finite support, nullopt for countable supports or when
/// it overflows 64 bits.
std::optional<std::uint64_t> cardinality(const Distribution& dist);

bool in_support(const Distribution& dist, const State& x);

/// Log of the (possibly unnormalized) mass. Throws DomainError outside the support.
double log_pmf(const Distribution& dist, const State& x);

/// Mass at x; unnormalized for Potts and Cmp (see is_normalized()).
double pmf(const Distribution& dist, const State& x);

enum class Replacement { kWith, kWithout };

struct SampleBatch {
  std::vector<State> points;
  std::optional<std::vector<double>> weights;
  Replacement mode = Replacement::kWith;
  std::uint64_t rng_seed = 0;
};

/// One i.i.d. draw from a normalized (or truncation-normalizable) family.
State draw(const Distribution& dist, Rng& rng);

/// n draws. Under kWithout every point is distinct: count families draw
/// sequentially from P conditioned on the unobserved set, product families
/// reject duplicates with a retry cap.
SampleBatch sample(const Distribution& dist, std::size_t n, Replacement mode, std::uint64_t seed);
SampleBatch sample(const Distribution& dist, std::size_t n, Replacement mode, Rng& rng);

/// Draws from P restricted to the complement of `exclude` (exact for count
/// families, rejection for product families).
State draw_excluding(const Distribution& dist, const std::vector<State>& exclude, Rng& rng);

struct ChainOutput {
  SampleBatch batch;
  double acceptance_rate = 0.0;
};

/// Metropolis-Hastings with a single-site uniform proposal (a uniformly
/// chosen site moves to a uniformly chosen different symbol). After
/// `burn_in` iterations every `thinning`-th state is emitted.
ChainOutput mh_sample(const Distribution& dist, std::size_t n, std::size_t burn_in, std::size_t thinning,
                      std::uint64_t seed, std::optional<State> initial = std::nullopt);

/// Site i moved one step forward (+1) or backward (-1) in the cyclic alphabet order.
State cyclic_shift(const SiteAlphabet& alphabet, const State& x, int site, int direction);

/// Difference score s_p(x)_i = (p(x) - p(fwd_i x)) / p(x); the normalizer cancels.
Eigen::VectorXd diff_score(const Distribution& dist, const State& x);

/// Visits every element of a finite support exactly once in lexicographic
/// order (last site fastest). Returns the number of states visited.
std::uint64_t for_each_state(const Distribution& dist, const std::function<void(const State&)>& visit,
                             std::uint64_t cap = kDefaultEnumerationCap);

std::vector<State> enumerate_support(const Distribution& dist, std::uint64_t cap = kDefaultEnumerationCap);

/// Position of x in the for_each_state order, and its inverse.
std::uint64_t state_index(const Distribution& dist, const State& x);
State state_at(const Distribution& dist, std::uint64_t index);

/// Smallest x such that P(X > x) < tail for a count family; used by truncated sums.
int count_upper_quantile(const Distribution& dist, double tail);

struct StateHash {
  std::size_t operator()(const State& s) const noexcept;
};

struct StateEqual {
  bool operator()(const State& a, const State& b) const noexcept {
    return a.size() == b.size() && (a.array() == b.array()).all();
  }
};

/// Distinct states in first-occurrence order.
std::vector<State> unique_states(std::span<const State> points);

}  // namespace bayessum
