#include "bayessum/problems.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>

#include "bayessum/errors.hpp"
#include "bayessum/specfn.hpp"

namespace bayessum {
namespace {

constexpr int kGridSize = 17;
constexpr double kBesselTol = 1e-12;

double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

}  // namespace

ProblemCase default_case(CaseId id) {
  ProblemCase c;
  c.id = id;
  return c;
}

CaseId parse_case(const std::string& name) {
  if (name == "a") return CaseId::kA;
  if (name == "b") return CaseId::kB;
  if (name == "c") return CaseId::kC;
  if (name == "d") return CaseId::kD;
  throw DomainError("unknown case '" + name + "' (expected a, b, c or d)");
}

std::string case_name(CaseId id) {
  switch (id) {
    case CaseId::kA: return "a";
    case CaseId::kB: return "b";
    case CaseId::kC: return "c";
    case CaseId::kD: return "d";
  }
  return "?";
}

Potts case_potts(const ProblemCase& c) {
  return Potts::chain(c.length, c.num_states, c.beta, -c.field, -c.coupling);
}

Distribution case_distribution(const ProblemCase& c) {
  switch (c.id) {
    case CaseId::kA: return Poisson{c.eta};
    case CaseId::kB: return UniformCategorical{c.num_states - 1, c.length};
    case CaseId::kC: return case_potts(c);
    case CaseId::kD: return UniformCategorical{kGridSize - 1, 2};
  }
  throw ContractError("unknown case");
}

double mixed_grid_value(int j) { return -1.0 + 0.125 * j; }

double mixed_integrand(double x, const State& grid_index) {
  const double h1 = mixed_grid_value(grid_index(0));
  const double h2 = mixed_grid_value(grid_index(1));
  const double a = 1.0 + 0.1 * (h1 + h2);
  const double b = 2.0 * std::numbers::pi * (1.0 + 0.05 * (h1 * h1 + h2 * h2));
  return -20.0 * std::exp(-0.2 * std::abs(a * x)) - std::exp(std::cos(b * x)) + 20.0 + std::numbers::e;
}

Integrand case_integrand(const ProblemCase& c) {
  switch (c.id) {
    case CaseId::kA:
      return [](const State& x) {
        const double z = x(0) - 15.0;
        return std::exp(-z * z / 8.0);
      };
    case CaseId::kB: {
      const Distribution energy = case_potts(c);
      return [energy](const State& x) { return std::exp(log_pmf(energy, x)); };
    }
    case CaseId::kC:
      return [](const State& x) { return sigmoid(x.cast<double>().mean()); };
    case CaseId::kD:
      throw CapabilityError("case d integrand takes a mixed point; use mixed_integrand");
  }
  throw ContractError("unknown case");
}

double ground_truth(const ProblemCase& c) {
  switch (c.id) {
    case CaseId::kA: {
      const Distribution p = Poisson{c.eta};
      const Integrand f = case_integrand(c);
      double total = 0.0;
      for (int x = 0; x <= c.truth_cutoff; ++x) total += f(scalar_state(x)) * pmf(p, scalar_state(x));
      return total;
    }
    case CaseId::kB: {
      const Integrand f = case_integrand(c);
      const Distribution p = case_distribution(c);
      double total = 0.0;
      const auto count = for_each_state(p, [&](const State& x) { total += f(x); });
      return total / static_cast<double>(count);
    }
    case CaseId::kC: {
      const Distribution p = case_potts(c);
      const Integrand f = case_integrand(c);
      double lp_max = -std::numeric_limits<double>::infinity();
      for_each_state(p, [&](const State& x) { lp_max = std::max(lp_max, log_pmf(p, x)); });
      double z = 0.0;
      double total = 0.0;
      for_each_state(p, [&](const State& x) {
        const double w = std::exp(log_pmf(p, x) - lp_max);
        z += w;
        total += w * f(x);
      });
      return total / z;
    }
    case CaseId::kD: {
      double total = 0.0;
      const double i0 = specfn::bessel_i(0, 1.0);
      for (int j1 = 0; j1 < kGridSize; ++j1) {
        for (int j2 = 0; j2 < kGridSize; ++j2) {
          const double h1 = mixed_grid_value(j1);
          const double h2 = mixed_grid_value(j2);
          const double a = 1.0 + 0.1 * (h1 + h2);
          const double b = 2.0 * std::numbers::pi * (1.0 + 0.05 * (h1 * h1 + h2 * h2));
          double series = 0.0;
          for (int n = 1; n < 200; ++n) {
            const double term = specfn::bessel_i(n, 1.0) / n;
            series += term * std::sin(n * b);
            if (term < kBesselTol * i0) break;
          }
          total += -20.0 * (1.0 - std::exp(-0.2 * a)) / (0.2 * a) - (i0 + 2.0 / b * series) + 20.0 + std::numbers::e;
        }
      }
      return total / (kGridSize * kGridSize);
    }
  }
  throw ContractError("unknown case");
}

double case_b_transfer_matrix_truth(const ProblemCase& c) {
  // Row vector over the last symbol; each step multiplies by the chain factor.
  const int s = c.num_states;
  std::vector<double> v(static_cast<std::size_t>(s));
  for (int a = 0; a < s; ++a) v[a] = std::exp(-c.beta * c.field * a);
  for (int site = 1; site < c.length; ++site) {
    std::vector<double> next(static_cast<std::size_t>(s), 0.0);
    for (int b = 0; b < s; ++b) {
      for (int a = 0; a < s; ++a) {
        next[b] += v[a] * std::exp(-c.beta * (c.field * b + (a == b ? c.coupling : 0.0)));
      }
    }
    v = next;
  }
  double total = 0.0;
  for (double x : v) total += x;
  return total / std::pow(static_cast<double>(s), c.length);
}

}  // namespace bayessum
