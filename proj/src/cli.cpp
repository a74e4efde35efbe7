#include "bayessum/cli.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <ctime>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

#include "bayessum/benchmark.hpp"
#include "bayessum/errors.hpp"
#include "bayessum/training.hpp"
#include "bayessum/validation.hpp"

namespace bayessum {
namespace {

namespace fs = std::filesystem;

struct BenchArgs {
  std::string case_id = "a";
  std::vector<int> n_grid{5, 10, 20, 40, 80};
  int seeds = 50;
  std::uint64_t seed = 0;
  std::vector<std::string> methods;
  double eta = 30.0;
  double rho = kDefaultRouletteRho;
  int length = 6;
  int states = 3;
  double beta = kCriticalBeta;
  int cutoff = 100;
  double tau = 5.0;
  std::size_t pool = kDefaultPoolSize;
  double stein_lambda = 0.1;
  bool no_timing = false;
  std::string output;
};

struct RatesArgs {
  std::string input;
  std::string problem;
  std::string output;
};

struct CalibrateArgs {
  BenchArgs bench;
  std::string input;
  std::vector<double> levels{0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9};
};

struct CmpArgs {
  std::string estimator = "bayessum";
  CmpTrainConfig config;
  std::string data;
  std::string output;
};

struct PottsArgs {
  std::string estimator = "bayessum";
  PottsTrainConfig config;
  std::string data;
  int data_size = 2000;
  int ksd_samples = 2000;
  bool long_run = false;
  std::string output;
};

struct ValidateArgs {
  int draws = 50;
  int ys = 20;
  std::uint64_t seed = 0;
  std::string output;
};

std::string timestamp() {
  const auto now = std::chrono::system_clock::to_time_t(std::chrono::system_clock::now());
  std::tm tm{};
  gmtime_r(&now, &tm);
  std::ostringstream os;
  os << std::put_time(&tm, "%Y%m%d-%H%M%S");
  return os.str();
}

fs::path output_path(const std::string& requested, const std::string& subcommand, const std::string& ext) {
  if (!requested.empty()) return requested;
  const char* env = std::getenv("BAYESSUM_OUT");
  const fs::path dir = (env != nullptr && *env != '\0') ? fs::path(env) : fs::path("out");
  return dir / (subcommand + "-" + timestamp() + ext);
}

std::ofstream open_output(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream f(path);
  if (!f) throw DomainError("cannot write " + path.string());
  return f;
}

void add_output(CLI::App* sub, std::string& target) {
  sub->add_option("-o,--output", target, "Output file (default: $BAYESSUM_OUT or ./out, <subcommand>-<timestamp>)");
}

void add_bench_options(CLI::App* sub, BenchArgs& a) {
  sub->add_option("--case", a.case_id, "Synthetic case")->check(CLI::IsMember({"a", "b", "c", "d"}))->capture_default_str();
  sub->add_option("--n", a.n_grid, "Sample sizes N")->delimiter(',')->capture_default_str();
  sub->add_option("--seeds", a.seeds, "Number of seeds")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--seed", a.seed, "First seed")->capture_default_str();
  sub->add_option("--methods", a.methods, "mc,is,rr,ss,bayessum,bayessum-rep,active,stein (default: all for the case)")
      ->delimiter(',');
  sub->add_option("--eta", a.eta, "Poisson rate eta, case a")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--rho", a.rho, "Russian roulette rho_*")->check(CLI::Range(1e-9, 1.0 - 1e-9))->capture_default_str();
  sub->add_option("--L", a.length, "Sequence length L, cases b and c")->check(CLI::Range(1, 15))->capture_default_str();
  sub->add_option("--S", a.states, "Alphabet size S, cases b and c")->check(CLI::Range(2, 9))->capture_default_str();
  sub->add_option("--beta", a.beta, "Inverse temperature beta")->capture_default_str();
  sub->add_option("--c", a.cutoff, "Stratification cutoff c, case a")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--tau", a.tau, "Negative binomial proposal tau, case a")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--pool", a.pool, "Active BayesSum candidate pool size")->check(CLI::PositiveNumber)->capture_default_str();
  sub->add_option("--stein-lambda", a.stein_lambda, "Exponential Hamming lambda of the Stein base kernel, case c")
      ->check(CLI::PositiveNumber)
      ->capture_default_str();
  sub->add_flag("--no-timing", a.no_timing, "Write wall_time_ns = 0 for byte-identical output");
}

std::vector<BenchmarkRecord> run_bench(const BenchArgs& a) {
  ProblemCase c = default_case(parse_case(a.case_id));
  c.eta = a.eta;
  c.length = a.length;
  c.num_states = a.states;
  c.beta = a.beta;
  BenchmarkOptions opt;
  opt.timing = !a.no_timing;
  opt.rr_rho = a.rho;
  opt.ss_cutoff = a.cutoff;
  opt.is_tau = a.tau;
  opt.pool_size = a.pool;
  opt.stein_lambda = a.stein_lambda;
  std::vector<Method> methods;
  if (a.methods.empty()) {
    methods = default_methods(c.id);
  } else {
    for (const auto& m : a.methods) methods.push_back(parse_method(m));
  }
  for (Method m : methods) {
    if (!method_supported(c.id, m)) throw DomainError("method " + method_name(m) + " is not defined for case " + a.case_id);
  }
  std::vector<std::uint64_t> seeds;
  for (int s = 0; s < a.seeds; ++s) seeds.push_back(a.seed + static_cast<std::uint64_t>(s));
  return run_benchmark(c, methods, a.n_grid, seeds, opt);
}

int cmd_bench(const BenchArgs& a, std::ostream& out) {
  const auto records = run_bench(a);
  const fs::path path = output_path(a.output, "bench", ".csv");
  auto f = open_output(path);
  write_csv(f, records);
  std::size_t failed = 0;
  for (const auto& r : records) failed += std::isnan(r.abs_error) ? 1 : 0;
  out << "bench: " << records.size() << " records (" << failed << " failed) -> " << path.string() << '\n';
  return kExitOk;
}

std::vector<BenchmarkRecord> load_records(const std::string& input) {
  std::ifstream f(input);
  if (!f) throw DomainError("cannot read " + input);
  return read_csv(f);
}

int cmd_rates(const RatesArgs& a, std::ostream& out) {
  const auto records = load_records(a.input);
  std::set<std::string> problems;
  for (const auto& r : records) problems.insert(r.problem);
  std::string problem = a.problem;
  if (problem.empty()) {
    if (problems.size() != 1) throw DomainError("input holds several problems; choose one with --problem");
    problem = *problems.begin();
  }
  std::map<std::string, std::vector<BenchmarkRecord>> by_method;
  for (const auto& r : records) {
    if (r.problem == problem) by_method[r.method].push_back(r);
  }
  nlohmann::json j = nlohmann::json::object();
  for (const auto& [method, recs] : by_method) {
    try {
      j[method] = empirical_rate(recs);
    } catch (const NumericalError&) {
      j[method] = nullptr;
    }
  }
  const fs::path path = output_path(a.output, "rates", ".json");
  auto f = open_output(path);
  f << j.dump(2) << '\n';
  out << "rates (" << problem << "): " << j.dump() << " -> " << path.string() << '\n';
  return kExitOk;
}

int cmd_calibrate(CalibrateArgs a, std::ostream& out) {
  std::vector<BenchmarkRecord> records;
  if (!a.input.empty()) {
    records = load_records(a.input);
  } else {
    if (a.bench.methods.empty()) a.bench.methods = {a.bench.case_id == "c" ? "stein" : "bayessum"};
    records = run_bench(a.bench);
  }
  const auto curve = calibration_curve(records, a.levels);
  const fs::path path = output_path(a.bench.output, "calibrate", ".csv");
  auto f = open_output(path);
  f << "level,coverage\n" << std::setprecision(17);
  out << "calibrate:";
  for (const auto& [level, coverage] : curve) {
    f << level << ',' << coverage << '\n';
    out << ' ' << level << "->" << coverage;
  }
  out << " -> " << path.string() << '\n';
  return kExitOk;
}

int cmd_cmp_train(const CmpArgs& a, std::ostream& out) {
  std::vector<int> raw;
  if (a.data.empty()) {
    raw = synthetic_cmp_data(1.5, 1.3, 500, 0);
  } else {
    std::ifstream f(a.data);
    if (!f) throw DomainError("cannot read " + a.data);
    raw = read_counts(f);
  }
  const CountData data = make_count_data(std::move(raw));
  const CmpTrace trace = cmp_train(data, parse_estimator(a.estimator), a.config);
  const fs::path path = output_path(a.output, "cmp-train", ".csv");
  auto f = open_output(path);
  f << "iteration,theta1,theta2,estimated_loss,exact_nll\n" << std::setprecision(17);
  for (std::size_t i = 0; i < trace.thetas.size(); ++i) {
    const auto& t = trace.thetas[i];
    f << i << ',' << t(0) << ',' << t(1) << ',';
    if (i < trace.losses.size() && std::isfinite(trace.losses[i])) f << trace.losses[i];
    f << ',' << cmp_exact_nll(data, t(0), t(1)) << '\n';
  }
  const auto& last = trace.thetas.back();
  out << "cmp-train (" << a.estimator << "): theta = (" << last(0) << ", " << last(1)
      << "), exact NLL = " << cmp_exact_nll(data, last(0), last(1)) << ", rejected steps = " << trace.rejected_steps
      << " -> " << path.string() << '\n';
  return kExitOk;
}

int cmd_potts_train(PottsArgs a, std::ostream& out) {
  if (a.long_run) {
    a.config.length = 15;
    a.config.track_exact_z = false;
  }
  const std::vector<double> probs{0.4, 0.4, 0.2};
  std::vector<State> data;
  if (a.data.empty()) {
    if (a.config.num_states != 3) throw DomainError("synthetic sequences use S = 3");
    data = synthetic_sequences(static_cast<std::size_t>(a.data_size), a.config.length, probs, a.config.seed + 1000);
  } else {
    std::ifstream f(a.data);
    if (!f) throw DomainError("cannot read " + a.data);
    data = read_sequences(f, a.config.num_states);
    if (data.empty()) throw DomainError("no sequences in " + a.data);
    a.config.length = static_cast<int>(data.front().size());
  }
  const PottsTrace trace = potts_train(data, parse_estimator(a.estimator), a.config);
  const fs::path path = output_path(a.output, "potts-train", ".csv");
  auto f = open_output(path);
  f << "iteration,z_hat,z_alt,z_exact\n" << std::setprecision(17);
  for (std::size_t i = 0; i < trace.iterations.size(); ++i) {
    const auto& it = trace.iterations[i];
    f << i << ',' << it.z_hat << ',' << it.z_alt << ',';
    if (std::isfinite(it.z_exact)) f << it.z_exact;
    f << '\n';
  }
  out << "potts-train (" << a.estimator << "): " << trace.iterations.size() << " iterations";
  if (a.config.num_states == 3 && a.config.length <= 8) {
    const auto ksd_data =
        synthetic_sequences(static_cast<std::size_t>(a.ksd_samples), a.config.length, probs, a.config.seed + 2000);
    const double ksd = discrete_ksd(potts_model(trace.final, a.config.num_states, a.config.beta), ksd_data,
                                    DiscreteKernel{ExpHamming{a.config.lambda}, 1.0});
    out << ", final KSD^2 = " << ksd;
  }
  out << " -> " << path.string() << '\n';
  return kExitOk;
}

int cmd_validate_kme(const ValidateArgs& a, std::ostream& out) {
  const auto checks = validate_kme(a.seed, a.draws);
  const fs::path path = output_path(a.output, "validate-kme", ".csv");
  auto f = open_output(path);
  f << "row,draws,max_kme_error,max_ie_error,passed\n" << std::setprecision(6);
  bool all = true;
  for (const auto& c : checks) {
    f << c.row << ',' << c.draws << ',' << c.max_kme_error << ',';
    if (c.ie_available) f << c.max_ie_error;
    else f << "unavailable";
    f << ',' << (c.passed ? "true" : "false") << '\n';
    all = all && c.passed;
  }
  out << "validate-kme: " << (all ? "all rows match" : "MISMATCH") << " (" << checks.size() << " rows) -> "
      << path.string() << '\n';
  return all ? kExitOk : kExitNumerical;
}

int cmd_validate_stein(const ValidateArgs& a, std::ostream& out) {
  const auto checks = validate_stein(a.seed, a.ys);
  const fs::path path = output_path(a.output, "validate-stein", ".csv");
  auto f = open_output(path);
  f << "length,num_states,max_abs_mean,passed\n" << std::setprecision(6);
  bool all = true;
  for (const auto& c : checks) {
    f << c.length << ',' << c.num_states << ',' << c.max_abs_mean << ',' << (c.passed ? "true" : "false") << '\n';
    all = all && c.passed;
  }
  out << "validate-stein: " << (all ? "zero mean holds" : "VIOLATED") << " -> " << path.string() << '\n';
  return all ? kExitOk : kExitNumerical;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"BayesSum: Bayesian quadrature for discrete and mixed domains", "bayessum"};
  app.require_subcommand(1);
  // Options go in a section named after the subcommand, e.g. [bench]. The
  // flag is accepted before or after the subcommand.
  app.set_config("--config", "", "TOML/INI file with one [subcommand] section; unknown keys are rejected");
  app.allow_config_extras(false);
  app.fallthrough();
  app.get_formatter()->column_width(44);

  BenchArgs bench;
  auto* bench_cmd = app.add_subcommand("bench", "Run estimators on a synthetic case and write error records");
  add_bench_options(bench_cmd, bench);
  add_output(bench_cmd, bench.output);

  RatesArgs rates;
  auto* rates_cmd = app.add_subcommand("rates", "Fit empirical convergence rates from a bench CSV");
  rates_cmd->add_option("--input", rates.input, "bench CSV")->required();
  rates_cmd->add_option("--problem", rates.problem, "Problem to fit when the CSV holds several");
  add_output(rates_cmd, rates.output);

  CalibrateArgs calibrate;
  calibrate.bench.case_id = "b";
  calibrate.bench.n_grid = {100};
  auto* cal_cmd = app.add_subcommand("calibrate", "Coverage of BayesSum credible intervals");
  add_bench_options(cal_cmd, calibrate.bench);
  cal_cmd->add_option("--input", calibrate.input, "Use an existing bench CSV instead of running");
  cal_cmd->add_option("--levels", calibrate.levels, "Nominal levels")->delimiter(',')->capture_default_str();
  add_output(cal_cmd, calibrate.bench.output);

  CmpArgs cmp;
  auto* cmp_cmd = app.add_subcommand("cmp-train", "Fit a Conway-Maxwell-Poisson model by gradient descent");
  cmp_cmd->add_option("--estimator", cmp.estimator, "bayessum or mc")->check(CLI::IsMember({"bayessum", "bq", "mc"}))
      ->capture_default_str();
  cmp_cmd->add_option("--lr", cmp.config.learning_rate, "Learning rate")->check(CLI::PositiveNumber)->capture_default_str();
  cmp_cmd->add_option("--iters", cmp.config.iterations, "Iterations")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmp_cmd->add_option("--theta1", cmp.config.theta1, "Initial theta1")->check(CLI::PositiveNumber)->capture_default_str();
  cmp_cmd->add_option("--theta2", cmp.config.theta2, "Initial theta2")->check(CLI::NonNegativeNumber)->capture_default_str();
  cmp_cmd->add_option("--n-bq", cmp.config.bayessum_n, "BayesSum sample size N")->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmp_cmd->add_option("--n-mc", cmp.config.monte_carlo_n, "Monte Carlo sample size N")->check(CLI::PositiveNumber)
      ->capture_default_str();
  cmp_cmd->add_option("--offset", cmp.config.brownian_offset, "Brownian kernel offset")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  cmp_cmd->add_option("--data", cmp.data, "Headerless single-column count CSV (default: synthetic CMP(1.5, 1.3), n=500)");
  cmp_cmd->add_option("--seed", cmp.config.seed, "Seed")->capture_default_str();
  add_output(cmp_cmd, cmp.output);

  PottsArgs potts;
  auto* potts_cmd = app.add_subcommand("potts-train", "Fit a Potts model with an estimated normalizer");
  potts_cmd->add_option("--estimator", potts.estimator, "bayessum or mc")
      ->check(CLI::IsMember({"bayessum", "bq", "mc"}))
      ->capture_default_str();
  potts_cmd->add_option("--lr", potts.config.learning_rate, "Learning rate")->check(CLI::PositiveNumber)
      ->capture_default_str();
  potts_cmd->add_option("--iters", potts.config.iterations, "Iterations")->check(CLI::NonNegativeNumber)
      ->capture_default_str();
  potts_cmd->add_option("--L", potts.config.length, "Sequence length L")->check(CLI::Range(1, 15))->capture_default_str();
  potts_cmd->add_option("--S", potts.config.num_states, "Alphabet size S")->check(CLI::Range(2, 9))->capture_default_str();
  potts_cmd->add_option("--N", potts.config.samples, "Samples per iteration N")->check(CLI::PositiveNumber)
      ->capture_default_str();
  potts_cmd->add_option("--M", potts.config.anchors, "Anchor states M")->check(CLI::PositiveNumber)->capture_default_str();
  potts_cmd->add_option("--lambda", potts.config.lambda, "Exponential Hamming lambda")->check(CLI::PositiveNumber)
      ->capture_default_str();
  potts_cmd->add_option("--data", potts.data, "Sequences, one per line, symbols 1..S (default: synthetic)");
  potts_cmd->add_option("--data-size", potts.data_size, "Synthetic training sequences")->check(CLI::PositiveNumber)
      ->capture_default_str();
  potts_cmd->add_option("--ksd-samples", potts.ksd_samples, "Samples for the final KSD")->check(CLI::PositiveNumber)
      ->capture_default_str();
  potts_cmd->add_flag("--track-z", potts.config.track_exact_z, "Record the enumerated Z each iteration");
  potts_cmd->add_flag("--long", potts.long_run, "Full-size run with L = 15, no exact Z (slow)");
  potts_cmd->add_option("--seed", potts.config.seed, "Seed")->capture_default_str();
  add_output(potts_cmd, potts.output);

  ValidateArgs vk;
  auto* vk_cmd = app.add_subcommand("validate-kme", "Check every closed-form embedding against brute force");
  vk_cmd->add_option("--draws", vk.draws, "Random draws per row")->check(CLI::PositiveNumber)->capture_default_str();
  vk_cmd->add_option("--seed", vk.seed, "Seed")->capture_default_str();
  add_output(vk_cmd, vk.output);

  ValidateArgs vs;
  auto* vs_cmd = app.add_subcommand("validate-stein", "Check the zero mean of Stein kernels by enumeration");
  vs_cmd->add_option("--ys", vs.ys, "Random y per model")->check(CLI::PositiveNumber)->capture_default_str();
  vs_cmd->add_option("--seed", vs.seed, "Seed")->capture_default_str();
  add_output(vs_cmd, vs.output);

  std::vector<std::string> reversed(args.size() > 0 ? args.begin() + 1 : args.begin(), args.end());
  std::reverse(reversed.begin(), reversed.end());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (bench_cmd->parsed()) return cmd_bench(bench, out);
    if (rates_cmd->parsed()) return cmd_rates(rates, out);
    if (cal_cmd->parsed()) return cmd_calibrate(calibrate, out);
    if (cmp_cmd->parsed()) return cmd_cmp_train(cmp, out);
    if (potts_cmd->parsed()) return cmd_potts_train(potts, out);
    if (vk_cmd->parsed()) return cmd_validate_kme(vk, out);
    if (vs_cmd->parsed()) return cmd_validate_stein(vs, out);
  } catch (const DomainError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const ContractError& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  } catch (const Error& e) {
    err << "numerical failure: " << e.what() << '\n';
    return kExitNumerical;
  } catch (const std::filesystem::filesystem_error& e) {
    err << "error: " << e.what() << '\n';
    return kExitConfig;
  }
  return kExitConfig;
}

}  // namespace bayessum
