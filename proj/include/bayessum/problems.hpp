#pragma once

#include <string>
#include <vector>

#include "bayessum/baselines.hpp"
#include "bayessum/distributions.hpp"
#include "bayessum/embeddings.hpp"
#include "bayessum/kernels.hpp"

namespace bayessum {

inline constexpr double kCriticalBeta = 1.0 / 2.269;

enum class CaseId { kA, kB, kC, kD };

/// One synthetic benchmark problem.
///  a: Poisson(eta) on N, f(x) = exp(-(x - 15)^2 / 8)
///  b: uniform on {0, .., S-1}^L, f(x) = exp(-beta (h sum x + J sum_chain 1{x_i = x_{i+1}}))
///  c: Potts chain with the same energy (unnormalized), f(x) = 1 / (1 + exp(-mean(x)))
///  d: uniform [-1, 1] x uniform categorical over H^2, H = {-1, -0.875, ..., 1}
struct ProblemCase {
  CaseId id = CaseId::kA;
  double eta = 30.0;
  int length = 6;
  int num_states = 3;
  double beta = kCriticalBeta;
  double field = 0.1;
  double coupling = 0.1;
  int truth_cutoff = 200;
};

ProblemCase default_case(CaseId id);
CaseId parse_case(const std::string& name);
std::string case_name(CaseId id);

/// Law of the discrete samples: Poisson (a), uniform categorical (b, d), Potts (c).
Distribution case_distribution(const ProblemCase& c);

/// The Potts model whose energy defines f in (b) and the law in (c).
Potts case_potts(const ProblemCase& c);

Integrand case_integrand(const ProblemCase& c);

/// Case (d) integrand at continuous coordinate x and grid indices (j1, j2).
double mixed_integrand(double x, const State& grid_index);
double mixed_grid_value(int j);

/// (a) sum over x <= truth_cutoff; (b), (c) exhaustive enumeration; (d) Bessel series.
double ground_truth(const ProblemCase& c);

/// Independent straight-line enumeration for (b), used to cross-check ground_truth.
double case_b_transfer_matrix_truth(const ProblemCase& c);

}  // namespace bayessum
