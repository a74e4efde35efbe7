#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "bayessum/problems.hpp"
#include "bayessum/quadrature.hpp"

namespace bayessum {

enum class Method {
  kMonteCarlo,
  kImportance,
  kRoulette,
  kStratified,
  kBayesSum,
  kBayesSumWithReplacement,
  kActive,
  kStein,
};

std::string method_name(Method m);
Method parse_method(const std::string& name);
std::vector<Method> default_methods(CaseId id);
bool method_supported(CaseId id, Method m);

struct BenchmarkRecord {
  std::string method;
  std::string problem;
  int n = 0;
  std::uint64_t seed = 0;
  double abs_error = 0.0;  ///< NaN marks a failed estimate
  std::optional<double> posterior_sd;
  std::int64_t wall_time_ns = 0;
};

inline constexpr const char* kCsvHeader = "method,problem,n,seed,abs_error,posterior_sd,wall_time_ns";

struct BenchmarkOptions {
  /// Wall times break byte-identical output; disable them for reproducible CSVs.
  bool timing = true;
  std::size_t pool_size = kDefaultPoolSize;
  double rr_rho = kDefaultRouletteRho;
  int ss_cutoff = 100;
  int ss_cells = 4;
  int ss_upper_limit = 10'000;
  double is_tau = 5.0;
  /// Grids for empirical-Bayes selection per case.
  HyperGrid grid_a{{1.0, 10.0, 100.0, 1000.0}, {1.0}};
  HyperGrid grid_b{{1e-6, 1e-5, 1e-4, 1e-3, 1e-2, 1e-1, 1.0, 10.0, 100.0, 1000.0},
                   {0.01, 0.03, 0.1, 0.3, 1.0, 3.0, 10.0}};
  HyperGrid grid_d{{1.0, 10.0, 100.0, 1000.0}, {0.1, 0.2, 0.3, 0.5, 0.8}};
  double stein_lambda = 0.1;
  double mixed_lambda = 1.0;
  int mh_burn_in = 10;
  int mh_thinning = 5;
};

struct MethodEstimate {
  double value = 0.0;
  std::optional<double> posterior_sd;
};

/// One estimate of the case integral; deterministic in (case, method, n, seed).
MethodEstimate run_method(const ProblemCase& c, Method m, int n, std::uint64_t seed,
                          const BenchmarkOptions& options = {});

/// Every (method, n, seed) cell, sorted by (method, problem, n, seed).
std::vector<BenchmarkRecord> run_benchmark(const ProblemCase& c, const std::vector<Method>& methods,
                                           const std::vector<int>& n_grid, const std::vector<std::uint64_t>& seeds,
                                           const BenchmarkOptions& options = {});

void sort_records(std::vector<BenchmarkRecord>& records);
void write_csv(std::ostream& out, const std::vector<BenchmarkRecord>& records);
std::vector<BenchmarkRecord> read_csv(std::istream& in);

/// Negated slope of log(mean abs error) against log n.
double empirical_rate(const std::vector<BenchmarkRecord>& records);

std::vector<BenchmarkRecord> filter_records(const std::vector<BenchmarkRecord>& records, const std::string& method,
                                            std::optional<int> n = std::nullopt);

double median_abs_error(const std::vector<BenchmarkRecord>& records);

/// (nominal, empirical coverage) per level; rows without a posterior sd are skipped.
std::vector<std::pair<double, double>> calibration_curve(const std::vector<BenchmarkRecord>& records,
                                                         const std::vector<double>& levels);

/// Standard normal quantile.
double normal_quantile(double p);

}  // namespace bayessum
