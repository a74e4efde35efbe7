#include "bayessum/benchmark.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iomanip>
#include <istream>
#include <limits>
#include <map>
#include <numbers>
#include <ostream>
#include <sstream>
#include <tuple>

#include "bayessum/baselines.hpp"
#include "bayessum/errors.hpp"

namespace bayessum {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

struct Named {
  Method method;
  const char* name;
};

constexpr Named kMethodNames[] = {
    {Method::kMonteCarlo, "mc"},
    {Method::kImportance, "is"},
    {Method::kRoulette, "rr"},
    {Method::kStratified, "ss"},
    {Method::kBayesSum, "bayessum"},
    {Method::kBayesSumWithReplacement, "bayessum-rep"},
    {Method::kActive, "active"},
    {Method::kStein, "stein"},
};

Rng method_stream(std::uint64_t seed, Method m, int n) {
  return Rng(seed).split(static_cast<std::uint64_t>(m) * 1'000'003ULL + static_cast<std::uint64_t>(n));
}

Eigen::VectorXd evaluate(const Integrand& f, const std::vector<State>& points) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(points.size()));
  for (std::size_t i = 0; i < points.size(); ++i) out(static_cast<Eigen::Index>(i)) = f(points[i]);
  return out;
}

MethodEstimate from_posterior(const PosteriorEstimate& post) {
  return {post.mean, std::isfinite(post.variance) ? std::optional<double>(std::sqrt(post.variance)) : std::nullopt};
}

// Empirical-Bayes amplitude for the Brownian kernel, selected on distinct points.
DiscreteKernel brownian_with_selected_amplitude(const std::vector<State>& points, const Eigen::VectorXd& fvals,
                                                const HyperGrid& grid) {
  const DiscreteKernel unit{BrownianMin{}, 1.0};
  const HyperChoice choice = select_hyperparams([&](double) { return gram(unit, points); }, fvals, grid);
  return with_amplitude(unit, choice.amplitude);
}

MethodEstimate run_case_a(const ProblemCase& c, Method m, int n, Rng& rng, const BenchmarkOptions& opt) {
  const Distribution p = Poisson{c.eta};
  const Integrand f = case_integrand(c);
  const auto n_size = static_cast<std::size_t>(n);
  switch (m) {
    case Method::kMonteCarlo:
      return {monte_carlo(f, sample(p, n_size, Replacement::kWith, rng))};
    case Method::kImportance: {
      const Distribution q = NegBinomial{opt.is_tau, opt.is_tau / (opt.is_tau + c.eta)};
      const Proposal proposal = proposal_from(q);
      const SampleBatch batch = sample(q, n_size, Replacement::kWith, rng);
      return {importance_sampling(f, [&](const State& x) { return log_pmf(p, x); }, proposal, batch)};
    }
    case Method::kRoulette:
      return {russian_roulette(
          f, [&](const State& x) { return pmf(p, x); },
          [](std::uint64_t j) -> std::optional<State> { return scalar_state(static_cast<int>(j)); }, opt.rr_rho, n_size,
          rng)};
    case Method::kStratified: {
      std::vector<double> lower;
      std::vector<double> upper;
      for (int x = 0; x < opt.ss_cutoff; ++x) lower.push_back(pmf(p, scalar_state(x)));
      for (int x = opt.ss_cutoff; x <= opt.ss_upper_limit; ++x) upper.push_back(pmf(p, scalar_state(x)));
      double p_lower = 0.0;
      double p_upper = 0.0;
      for (double v : lower) p_lower += v;
      for (double v : upper) p_upper += v;
      std::vector<StratumCell> cells;
      cells.push_back({p_lower, inverse_cdf_sampler(0, lower)});
      if (p_upper > 0.0) cells.push_back({p_upper, inverse_cdf_sampler(opt.ss_cutoff, upper)});
      else cells.push_back({0.0, {}});
      return {stratified_sampling(f, cells, n_size, rng)};
    }
    case Method::kBayesSum:
    case Method::kBayesSumWithReplacement: {
      const bool with = m == Method::kBayesSumWithReplacement;
      const SampleBatch batch = sample(p, n_size, with ? Replacement::kWith : Replacement::kWithout, rng);
      const Eigen::VectorXd fvals = evaluate(f, batch.points);
      const std::vector<State> distinct = unique_states(batch.points);
      const DiscreteKernel k = brownian_with_selected_amplitude(distinct, evaluate(f, distinct), opt.grid_a);
      const EmbeddingPair pair{p, k};
      return from_posterior(
          bayessum(build_state(pair, batch.points, fvals, with ? DuplicatePolicy::kAllow : DuplicatePolicy::kReject)));
    }
    case Method::kActive: {
      std::vector<State> domain;
      for (int x = 0; x <= c.truth_cutoff; ++x) domain.push_back(scalar_state(x));
      const EmbeddingPair pair{p, DiscreteKernel{BrownianMin{}, 1.0}};
      const ActiveRun run = active_bayessum(pair, f, domain, n_size, opt.pool_size, rng());
      if (run.estimates.empty()) throw NumericalError("active selection produced no points");
      return from_posterior(run.estimates.back());
    }
    case Method::kStein:
      break;
  }
  throw CapabilityError("method " + method_name(m) + " is not defined for case a");
}

MethodEstimate run_case_b(const ProblemCase& c, Method m, int n, Rng& rng, const BenchmarkOptions& opt) {
  const Distribution p = case_distribution(c);
  const Integrand f = case_integrand(c);
  const auto n_size = static_cast<std::size_t>(n);
  const std::uint64_t card = *cardinality(p);
  switch (m) {
    case Method::kMonteCarlo:
      return {monte_carlo(f, sample(p, n_size, Replacement::kWith, rng))};
    case Method::kImportance: {
      Eigen::MatrixXd probs(c.length, c.num_states);
      for (int i = 0; i < c.length; ++i) {
        for (int s = 0; s < c.num_states; ++s) probs(i, s) = std::exp(-c.beta * c.field * s);
      }
      const Proposal q = factorized_categorical(probs);
      SampleBatch batch;
      for (std::size_t i = 0; i < n_size; ++i) batch.points.push_back(q.draw(rng));
      return {importance_sampling(f, [&](const State& x) { return log_pmf(p, x); }, q, batch)};
    }
    case Method::kRoulette:
      return {russian_roulette(
          f, [&](const State& x) { return pmf(p, x); },
          [&](std::uint64_t j) -> std::optional<State> {
            if (j >= card) return std::nullopt;
            return state_at(p, j);
          },
          opt.rr_rho, n_size, rng)};
    case Method::kStratified: {
      std::vector<StratumCell> cells;
      const auto parts = static_cast<std::uint64_t>(opt.ss_cells);
      std::uint64_t start = 0;
      for (std::uint64_t cell = 0; cell < parts; ++cell) {
        const std::uint64_t size = card / parts + (cell < card % parts ? 1 : 0);
        cells.push_back({static_cast<double>(size) / static_cast<double>(card), [p, start, size](Rng& r) {
                           return state_at(p, start + r.below(size));
                         }});
        start += size;
      }
      return {stratified_sampling(f, cells, n_size, rng)};
    }
    case Method::kBayesSum: {
      const SampleBatch batch = sample(p, n_size, Replacement::kWithout, rng);
      const Eigen::VectorXd fvals = evaluate(f, batch.points);
      const Eigen::VectorXd centered = (fvals.array() - fvals.mean()).matrix();
      const DiscreteKernel k = select_hyperparams(DiscreteKernel{ExpHamming{1.0}, 1.0}, batch.points, centered, opt.grid_b);
      return from_posterior(bayessum(build_state(EmbeddingPair{p, k}, batch.points, fvals), true));
    }
    default:
      break;
  }
  throw CapabilityError("method " + method_name(m) + " is not defined for case b");
}

MethodEstimate run_case_c(const ProblemCase& c, Method m, int n, std::uint64_t seed, const BenchmarkOptions& opt) {
  const Distribution model = case_potts(c);
  const Integrand f = case_integrand(c);
  // Both estimators see the same chain.
  const std::uint64_t chain_seed = Rng(seed).split(static_cast<std::uint64_t>(n))();
  const ChainOutput chain = mh_sample(model, static_cast<std::size_t>(n), static_cast<std::size_t>(opt.mh_burn_in),
                                      static_cast<std::size_t>(opt.mh_thinning), chain_seed);
  if (m == Method::kMonteCarlo) return {monte_carlo(f, chain.batch)};
  if (m == Method::kStein) {
    const std::vector<State> distinct = unique_states(chain.batch.points);
    const SteinKernel k{DiscreteKernel{ExpHamming{opt.stein_lambda}, 1.0}, model};
    return from_posterior(stein_bayessum(k, distinct, evaluate(f, distinct)));
  }
  throw CapabilityError("method " + method_name(m) + " is not defined for case c");
}

MethodEstimate run_case_d(const ProblemCase& c, Method m, int n, Rng& rng, const BenchmarkOptions& opt) {
  const Distribution discrete = case_distribution(c);
  const auto n_size = static_cast<std::size_t>(n);
  const UniformInterval interval{};
  auto draw_x = [&] { return interval.lower + (interval.upper - interval.lower) * rng.uniform(); };
  if (m == Method::kMonteCarlo) {
    double total = 0.0;
    for (std::size_t i = 0; i < n_size; ++i) {
      const double x = draw_x();
      total += mixed_integrand(x, draw(discrete, rng));
    }
    return {total / static_cast<double>(n_size)};
  }
  if (m == Method::kBayesSum) {
    const SampleBatch batch = sample(discrete, n_size, Replacement::kWithout, rng);
    std::vector<MixedPoint> points;
    Eigen::VectorXd fvals(static_cast<Eigen::Index>(n_size));
    for (std::size_t i = 0; i < n_size; ++i) {
      points.push_back({batch.points[i], draw_x()});
      fvals(static_cast<Eigen::Index>(i)) = mixed_integrand(points.back().continuous, points.back().discrete);
    }
    const Eigen::VectorXd centered = (fvals.array() - fvals.mean()).matrix();
    MixedKernel k{DiscreteKernel{ExpHamming{opt.mixed_lambda}, 1.0}, GaussianRbf{1.0, 1.0},
                  Composition::kAdditiveProduct, 1.0};
    const HyperChoice choice = select_hyperparams(
        [&](double ell) {
          MixedKernel unit = k;
          unit.continuous.lengthscale = ell;
          return gram(unit, points);
        },
        centered, opt.grid_d);
    k.continuous.lengthscale = choice.scale;
    k.amplitude = choice.amplitude;
    return from_posterior(mixed_bayessum(MixedEmbedding{interval, discrete, k}, points, fvals, true));
  }
  throw CapabilityError("method " + method_name(m) + " is not defined for case d");
}

}  // namespace

std::string method_name(Method m) {
  for (const auto& entry : kMethodNames) {
    if (entry.method == m) return entry.name;
  }
  return "?";
}

Method parse_method(const std::string& name) {
  for (const auto& entry : kMethodNames) {
    if (name == entry.name) return entry.method;
  }
  throw DomainError("unknown method '" + name + "'");
}

std::vector<Method> default_methods(CaseId id) {
  switch (id) {
    case CaseId::kA:
      return {Method::kMonteCarlo, Method::kImportance, Method::kRoulette, Method::kStratified, Method::kBayesSum,
              Method::kActive};
    case CaseId::kB:
      return {Method::kMonteCarlo, Method::kImportance, Method::kRoulette, Method::kStratified, Method::kBayesSum};
    case CaseId::kC:
      return {Method::kMonteCarlo, Method::kStein};
    case CaseId::kD:
      return {Method::kMonteCarlo, Method::kBayesSum};
  }
  return {};
}

bool method_supported(CaseId id, Method m) {
  switch (id) {
    case CaseId::kA: return m != Method::kStein;
    case CaseId::kB:
      return m == Method::kMonteCarlo || m == Method::kImportance || m == Method::kRoulette ||
             m == Method::kStratified || m == Method::kBayesSum;
    case CaseId::kC: return m == Method::kMonteCarlo || m == Method::kStein;
    case CaseId::kD: return m == Method::kMonteCarlo || m == Method::kBayesSum;
  }
  return false;
}

MethodEstimate run_method(const ProblemCase& c, Method m, int n, std::uint64_t seed, const BenchmarkOptions& options) {
  if (n < 1) throw DomainError("sample size must be positive");
  if (!method_supported(c.id, m)) {
    throw CapabilityError("method " + method_name(m) + " is not defined for case " + case_name(c.id));
  }
  Rng rng = method_stream(seed, m, n);
  switch (c.id) {
    case CaseId::kA: return run_case_a(c, m, n, rng, options);
    case CaseId::kB: return run_case_b(c, m, n, rng, options);
    case CaseId::kC: return run_case_c(c, m, n, seed, options);
    case CaseId::kD: return run_case_d(c, m, n, rng, options);
  }
  throw ContractError("unknown case");
}

std::vector<BenchmarkRecord> run_benchmark(const ProblemCase& c, const std::vector<Method>& methods,
                                           const std::vector<int>& n_grid, const std::vector<std::uint64_t>& seeds,
                                           const BenchmarkOptions& options) {
  for (Method m : methods) {
    if (!method_supported(c.id, m)) {
      throw CapabilityError("method " + method_name(m) + " is not defined for case " + case_name(c.id));
    }
  }
  const double truth = ground_truth(c);
  std::vector<BenchmarkRecord> records;
  for (Method m : methods) {
    for (int n : n_grid) {
      for (std::uint64_t seed : seeds) {
        BenchmarkRecord rec{method_name(m), case_name(c.id), n, seed};
        const auto start = std::chrono::steady_clock::now();
        try {
          const MethodEstimate est = run_method(c, m, n, seed, options);
          rec.abs_error = std::abs(est.value - truth);
          rec.posterior_sd = est.posterior_sd;
        } catch (const Error&) {
          rec.abs_error = kNaN;
        }
        if (options.timing) {
          rec.wall_time_ns =
              std::chrono::duration_cast<std::chrono::nanoseconds>(std::chrono::steady_clock::now() - start).count();
        }
        records.push_back(std::move(rec));
      }
    }
  }
  sort_records(records);
  return records;
}

void sort_records(std::vector<BenchmarkRecord>& records) {
  std::sort(records.begin(), records.end(), [](const BenchmarkRecord& a, const BenchmarkRecord& b) {
    return std::tie(a.method, a.problem, a.n, a.seed) < std::tie(b.method, b.problem, b.n, b.seed);
  });
}

void write_csv(std::ostream& out, const std::vector<BenchmarkRecord>& records) {
  out << kCsvHeader << '\n';
  std::ostringstream row;
  row << std::setprecision(17);
  for (const auto& r : records) {
    row.str("");
    row << r.method << ',' << r.problem << ',' << r.n << ',' << r.seed << ',';
    if (std::isnan(r.abs_error)) row << "nan";
    else row << r.abs_error;
    row << ',';
    if (r.posterior_sd) row << *r.posterior_sd;
    row << ',' << r.wall_time_ns << '\n';
    out << row.str();
  }
}

std::vector<BenchmarkRecord> read_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw DomainError("empty benchmark CSV");
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != kCsvHeader) throw DomainError("unexpected CSV header: " + line);
  std::vector<BenchmarkRecord> records;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    std::vector<std::string> fields;
    std::stringstream ss(line);
    std::string field;
    while (std::getline(ss, field, ',')) fields.push_back(field);
    if (line.back() == ',') fields.emplace_back();
    if (fields.size() != 7) throw DomainError("line " + std::to_string(line_no) + ": expected 7 fields");
    try {
      BenchmarkRecord r;
      r.method = fields[0];
      r.problem = fields[1];
      r.n = std::stoi(fields[2]);
      r.seed = std::stoull(fields[3]);
      r.abs_error = fields[4] == "nan" ? kNaN : std::stod(fields[4]);
      if (!fields[5].empty()) r.posterior_sd = std::stod(fields[5]);
      r.wall_time_ns = std::stoll(fields[6]);
      records.push_back(std::move(r));
    } catch (const std::logic_error&) {
      throw DomainError("line " + std::to_string(line_no) + ": malformed number");
    }
  }
  return records;
}

std::vector<BenchmarkRecord> filter_records(const std::vector<BenchmarkRecord>& records, const std::string& method,
                                            std::optional<int> n) {
  std::vector<BenchmarkRecord> out;
  for (const auto& r : records) {
    if (r.method == method && (!n || r.n == *n)) out.push_back(r);
  }
  return out;
}

double median_abs_error(const std::vector<BenchmarkRecord>& records) {
  std::vector<double> errors;
  for (const auto& r : records) {
    if (!std::isnan(r.abs_error)) errors.push_back(r.abs_error);
  }
  if (errors.empty()) return kNaN;
  std::sort(errors.begin(), errors.end());
  const std::size_t mid = errors.size() / 2;
  return errors.size() % 2 == 1 ? errors[mid] : 0.5 * (errors[mid - 1] + errors[mid]);
}

double empirical_rate(const std::vector<BenchmarkRecord>& records) {
  std::map<int, std::pair<double, int>> by_n;
  for (const auto& r : records) {
    if (!std::isfinite(r.abs_error) || r.abs_error <= 0.0) continue;
    auto& [sum, count] = by_n[r.n];
    sum += r.abs_error;
    ++count;
  }
  if (by_n.size() < 3) throw NumericalError("rate needs at least three sample sizes with nonzero errors");
  double sx = 0.0, sy = 0.0, sxx = 0.0, sxy = 0.0;
  for (const auto& [n, acc] : by_n) {
    const double x = std::log(static_cast<double>(n));
    const double y = std::log(acc.first / acc.second);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const auto k = static_cast<double>(by_n.size());
  const double slope = (k * sxy - sx * sy) / (k * sxx - sx * sx);
  return -slope;
}

double normal_quantile(double p) {
  if (!(p > 0.0 && p < 1.0)) throw DomainError("quantile level must lie in (0, 1)");
  double lo = -40.0;
  double hi = 40.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    if (0.5 * std::erfc(-mid / std::numbers::sqrt2) < p) lo = mid;
    else hi = mid;
  }
  return 0.5 * (lo + hi);
}

std::vector<std::pair<double, double>> calibration_curve(const std::vector<BenchmarkRecord>& records,
                                                         const std::vector<double>& levels) {
  std::vector<std::pair<double, double>> out;
  for (double level : levels) {
    const double z = normal_quantile(0.5 * (1.0 + level));
    int covered = 0;
    int total = 0;
    for (const auto& r : records) {
      if (!r.posterior_sd || std::isnan(r.abs_error)) continue;
      ++total;
      if (r.abs_error <= z * *r.posterior_sd) ++covered;
    }
    out.emplace_back(level, total > 0 ? static_cast<double>(covered) / total : kNaN);
  }
  return out;
}

}  // namespace bayessum
