#include "bayessum/training.hpp"

#include <algorithm>
#include <cmath>
#include <istream>
#include <limits>
#include <sstream>
#include <unordered_map>

#include "bayessum/embeddings.hpp"
#include "bayessum/errors.hpp"
#include "bayessum/quadrature.hpp"
#include "bayessum/specfn.hpp"

namespace bayessum {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double log_sum_exp(const std::vector<double>& v) {
  const double m = *std::max_element(v.begin(), v.end());
  if (!std::isfinite(m)) return m;
  double s = 0.0;
  for (double x : v) s += std::exp(x - m);
  return m + std::log(s);
}

}  // namespace

std::string estimator_name(ZEstimator e) { return e == ZEstimator::kBayesSum ? "bayessum" : "mc"; }

ZEstimator parse_estimator(const std::string& name) {
  if (name == "bayessum" || name == "bq") return ZEstimator::kBayesSum;
  if (name == "mc") return ZEstimator::kMonteCarlo;
  throw DomainError("unknown estimator '" + name + "' (expected bayessum or mc)");
}

CountData make_count_data(std::vector<int> values) {
  if (values.empty()) throw DomainError("count dataset is empty");
  CountData d;
  double sum = 0.0;
  double lf = 0.0;
  for (int v : values) {
    if (v < 0) throw DomainError("counts must be nonnegative");
    sum += v;
    lf += specfn::log_factorial(v);
  }
  d.mean = sum / static_cast<double>(values.size());
  d.mean_log_factorial = lf / static_cast<double>(values.size());
  d.values = std::move(values);
  return d;
}

std::vector<int> synthetic_cmp_data(double theta1, double theta2, std::size_t n, std::uint64_t seed) {
  const SampleBatch batch = sample(Cmp{theta1, theta2}, n, Replacement::kWith, seed);
  std::vector<int> out;
  out.reserve(n);
  for (const auto& x : batch.points) out.push_back(x(0));
  return out;
}

double cmp_log_z_truncated(double theta1, double theta2, int terms) {
  std::vector<double> logs(static_cast<std::size_t>(terms));
  for (int j = 0; j < terms; ++j) logs[j] = j * std::log(theta1) - theta2 * specfn::log_factorial(j);
  return log_sum_exp(logs);
}

double cmp_exact_nll(const CountData& data, double theta1, double theta2) {
  return -(data.mean * std::log(theta1) - theta2 * data.mean_log_factorial) + cmp_log_z_truncated(theta1, theta2);
}

double CmpZEstimate::z(double theta1, double theta2) const {
  double total = 0.0;
  const double log_ratio = std::log(theta1 / eta0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int x = points[i];
    total += weights(static_cast<Eigen::Index>(i)) * std::exp(x * log_ratio + (1.0 - theta2) * specfn::log_factorial(x));
  }
  return total;
}

Eigen::Vector2d CmpZEstimate::z_gradient(double theta1, double theta2) const {
  Eigen::Vector2d g = Eigen::Vector2d::Zero();
  const double log_ratio = std::log(theta1 / eta0);
  for (std::size_t i = 0; i < points.size(); ++i) {
    const int x = points[i];
    const double lf = specfn::log_factorial(x);
    const double term = weights(static_cast<Eigen::Index>(i)) * std::exp(x * log_ratio + (1.0 - theta2) * lf);
    g(0) += term * x / theta1;
    g(1) -= term * lf;
  }
  return g;
}

CmpZEstimate cmp_bayessum_estimate(double eta0, std::size_t n, Rng& rng, double offset) {
  const Distribution p = Poisson{eta0};
  const SampleBatch batch = sample(p, n, Replacement::kWithout, rng);
  const EmbeddingPair pair{p, DiscreteKernel{BrownianMin{offset}, 1.0}};
  const QuadratureState state =
      build_state(pair, batch.points, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(batch.points.size())));
  CmpZEstimate est;
  est.eta0 = eta0;
  for (const auto& x : batch.points) est.points.push_back(x(0));
  est.weights = std::exp(eta0) * precompute_weights(state);
  return est;
}

CmpZEstimate cmp_monte_carlo_estimate(double eta0, std::size_t n, Rng& rng) {
  const SampleBatch batch = sample(Poisson{eta0}, n, Replacement::kWith, rng);
  CmpZEstimate est;
  est.eta0 = eta0;
  for (const auto& x : batch.points) est.points.push_back(x(0));
  est.weights = Eigen::VectorXd::Constant(static_cast<Eigen::Index>(n), std::exp(eta0) / static_cast<double>(n));
  return est;
}

double cmp_estimated_loss(const CountData& data, const CmpZEstimate& est, double theta1, double theta2) {
  return -data.mean * std::log(theta1) + theta2 * data.mean_log_factorial + std::log(est.z(theta1, theta2));
}

Eigen::Vector2d cmp_estimated_gradient(const CountData& data, const CmpZEstimate& est, double theta1, double theta2) {
  const double z = est.z(theta1, theta2);
  const Eigen::Vector2d dz = est.z_gradient(theta1, theta2);
  return {-data.mean / theta1 + dz(0) / z, data.mean_log_factorial + dz(1) / z};
}

CmpTrace cmp_train(const CountData& data, ZEstimator estimator, const CmpTrainConfig& config) {
  if (!(config.theta1 > 0.0) || config.theta2 < 0.0) throw DomainError("CMP requires theta1 > 0, theta2 >= 0");
  Rng rng(config.seed);
  const double eta0 = data.mean;
  if (!(eta0 > 0.0)) throw DomainError("count data must have a positive mean");
  CmpZEstimate est;
  if (estimator == ZEstimator::kBayesSum) {
    est = cmp_bayessum_estimate(eta0, static_cast<std::size_t>(config.bayessum_n), rng, config.brownian_offset);
  }
  CmpTrace trace;
  Eigen::Vector2d theta(config.theta1, config.theta2);
  double lr = config.learning_rate;
  trace.thetas.push_back(theta);
  for (int it = 0; it < config.iterations; ++it) {
    if (estimator == ZEstimator::kMonteCarlo) {
      est = cmp_monte_carlo_estimate(eta0, static_cast<std::size_t>(config.monte_carlo_n), rng);
    }
    const double z = est.z(theta(0), theta(1));
    if (!std::isfinite(z) || z <= 0.0) {
      lr *= 0.5;
      ++trace.rejected_steps;
      trace.losses.push_back(kNaN);
      trace.thetas.push_back(theta);
      continue;
    }
    trace.losses.push_back(cmp_estimated_loss(data, est, theta(0), theta(1)));
    const Eigen::Vector2d grad = cmp_estimated_gradient(data, est, theta(0), theta(1));
    Eigen::Vector2d next = theta - lr * grad;
    if (!next.allFinite()) {
      lr *= 0.5;
      ++trace.rejected_steps;
      trace.thetas.push_back(theta);
      continue;
    }
    next(0) = std::max(next(0), 1e-8);
    next(1) = std::max(next(1), 0.0);
    theta = next;
    trace.thetas.push_back(theta);
  }
  return trace;
}

Potts potts_model(const PottsParams& params, int num_states, double beta) {
  return Potts::fully_connected(static_cast<int>(params.field.size()), num_states, beta, params.field,
                                params.coupling);
}

std::vector<State> synthetic_sequences(std::size_t count, int length, const std::vector<double>& probs,
                                       std::uint64_t seed) {
  Eigen::MatrixXd site(length, static_cast<Eigen::Index>(probs.size()));
  for (int i = 0; i < length; ++i) {
    for (std::size_t s = 0; s < probs.size(); ++s) site(i, static_cast<Eigen::Index>(s)) = probs[s];
  }
  Rng rng(seed);
  std::vector<State> out;
  out.reserve(count);
  for (std::size_t k = 0; k < count; ++k) {
    State x(length);
    for (int i = 0; i < length; ++i) {
      double u = rng.uniform();
      int s = 0;
      for (; s + 1 < site.cols(); ++s) {
        u -= site(i, s);
        if (u < 0.0) break;
      }
      x(i) = s;
    }
    out.push_back(std::move(x));
  }
  return out;
}

Eigen::MatrixXd potts_conditional_probs(const Potts& model, const State& anchor) {
  Eigen::MatrixXd logits(model.length, model.num_states);
  for (int j = 0; j < model.length; ++j) {
    for (int s = 0; s < model.num_states; ++s) logits(j, s) = model.beta * model.field(j) * s;
  }
  for (const auto& e : model.edges) {
    logits(e.j, anchor(e.i)) += model.beta * e.coupling;
    logits(e.i, anchor(e.j)) += model.beta * e.coupling;
  }
  for (int j = 0; j < model.length; ++j) {
    const double m = logits.row(j).maxCoeff();
    logits.row(j) = (logits.row(j).array() - m).exp().matrix();
    logits.row(j) /= logits.row(j).sum();
  }
  return logits;
}

double potts_log_z(const Potts& model) {
  std::vector<double> logs;
  for_each_state(model, [&](const State& x) { logs.push_back(log_pmf(model, x)); });
  return log_sum_exp(logs);
}

namespace {

// Sufficient statistics: beta x_i for each site, then beta 1{x_i = x_j} for i < j.
Eigen::VectorXd potts_features(const State& x, double beta) {
  const auto l = x.size();
  Eigen::VectorXd phi(l + l * (l - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < l; ++i) phi(k++) = beta * x(i);
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = i + 1; j < l; ++j) phi(k++) = x(i) == x(j) ? beta : 0.0;
  }
  return phi;
}

Eigen::VectorXd flatten(const PottsParams& p) {
  const auto l = p.field.size();
  Eigen::VectorXd v(l + l * (l - 1) / 2);
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < l; ++i) v(k++) = p.field(i);
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = i + 1; j < l; ++j) v(k++) = p.coupling(i, j);
  }
  return v;
}

PottsParams unflatten(const Eigen::VectorXd& v, Eigen::Index l) {
  PottsParams p{Eigen::VectorXd(l), Eigen::MatrixXd::Zero(l, l)};
  Eigen::Index k = 0;
  for (Eigen::Index i = 0; i < l; ++i) p.field(i) = v(k++);
  for (Eigen::Index i = 0; i < l; ++i) {
    for (Eigen::Index j = i + 1; j < l; ++j) p.coupling(i, j) = v(k++);
  }
  return p;
}

State draw_sites(const Eigen::MatrixXd& probs, Rng& rng, double& log_q) {
  State x(probs.rows());
  log_q = 0.0;
  for (Eigen::Index j = 0; j < probs.rows(); ++j) {
    double u = rng.uniform();
    Eigen::Index s = 0;
    for (; s + 1 < probs.cols(); ++s) {
      u -= probs(j, s);
      if (u < 0.0) break;
    }
    x(j) = static_cast<int>(s);
    log_q += std::log(probs(j, s));
  }
  return x;
}

}  // namespace

PottsTrace potts_train(const std::vector<State>& data, ZEstimator estimator, const PottsTrainConfig& config) {
  if (data.empty()) throw DomainError("sequence dataset is empty");
  if (config.anchors < 1 || config.samples < 1) throw DomainError("need at least one anchor and one sample");
  const int l = config.length;
  const int s = config.num_states;
  for (const auto& x : data) {
    if (x.size() != l || (x.array() < 0).any() || (x.array() >= s).any()) {
      throw DomainError("sequence does not match the configured length and alphabet");
    }
  }
  Rng rng(config.seed);
  Rng init_rng = rng.split(1);
  Rng sample_rng = rng.split(2);

  PottsTrace trace;
  Eigen::VectorXd theta(l + l * (l - 1) / 2);
  for (Eigen::Index k = 0; k < theta.size(); ++k) theta(k) = config.init_sd * init_rng.normal();
  trace.initial = unflatten(theta, l);

  Eigen::VectorXd data_mean = Eigen::VectorXd::Zero(theta.size());
  for (const auto& x : data) data_mean += potts_features(x, config.beta);
  data_mean /= static_cast<double>(data.size());

  std::vector<State> anchors;
  for (int a = 0; a < config.anchors; ++a) anchors.push_back(data[sample_rng.below(data.size())]);
  const int per_anchor = (config.samples + config.anchors - 1) / config.anchors;
  const Distribution uniform = UniformCategorical{s - 1, l};
  const EmbeddingPair pair{uniform, DiscreteKernel{ExpHamming{config.lambda}, 1.0}};
  const double log_card = l * std::log(static_cast<double>(s));
  double lr = config.learning_rate;

  for (int it = 0; it < config.iterations; ++it) {
    const Potts model = potts_model(unflatten(theta, l), s, config.beta);
    std::vector<State> points;
    std::vector<double> log_q;
    for (auto& anchor : anchors) {
      const Eigen::MatrixXd probs = potts_conditional_probs(model, anchor);
      for (int k = 0; k < per_anchor; ++k) {
        double lq = 0.0;
        points.push_back(draw_sites(probs, sample_rng, lq));
        log_q.push_back(lq);
      }
      anchor = points.back();
    }
    const auto total = static_cast<double>(points.size());

    // Monte Carlo: importance weights against each sample's own component.
    std::vector<double> mc_logs;
    for (std::size_t m = 0; m < points.size(); ++m) mc_logs.push_back(log_pmf(model, points[m]) - log_q[m]);
    const double z_mc = std::exp(log_sum_exp(mc_logs)) / total;

    // BayesSum over the uniform law on distinct samples; the centred mean is linear in f.
    const std::vector<State> distinct = unique_states(points);
    std::vector<double> lp(distinct.size());
    for (std::size_t u = 0; u < distinct.size(); ++u) lp[u] = log_pmf(model, distinct[u]);
    const double lp_max = *std::max_element(lp.begin(), lp.end());
    const QuadratureState state =
        build_state(pair, distinct, Eigen::VectorXd::Zero(static_cast<Eigen::Index>(distinct.size())));
    const Eigen::VectorXd w = precompute_weights(state);
    const Eigen::VectorXd v = (w.array() + (1.0 - w.sum()) / static_cast<double>(distinct.size())).matrix();
    double scaled_bq = 0.0;
    for (std::size_t u = 0; u < distinct.size(); ++u) scaled_bq += v(static_cast<Eigen::Index>(u)) * std::exp(lp[u] - lp_max);
    const double z_bq = std::exp(log_card + lp_max) * scaled_bq;

    PottsIteration rec;
    rec.z_hat = estimator == ZEstimator::kBayesSum ? z_bq : z_mc;
    rec.z_alt = estimator == ZEstimator::kBayesSum ? z_mc : z_bq;
    rec.z_exact = config.track_exact_z ? std::exp(potts_log_z(model)) : kNaN;
    trace.iterations.push_back(rec);

    // grad log Z_hat = sum_m c_m phi_m / sum_m c_m with c_m the weighted terms.
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(theta.size());
    double norm = 0.0;
    if (estimator == ZEstimator::kBayesSum) {
      for (std::size_t u = 0; u < distinct.size(); ++u) {
        const double c = v(static_cast<Eigen::Index>(u)) * std::exp(lp[u] - lp_max);
        expected += c * potts_features(distinct[u], config.beta);
        norm += c;
      }
    } else {
      const double m_max = *std::max_element(mc_logs.begin(), mc_logs.end());
      for (std::size_t m = 0; m < points.size(); ++m) {
        const double c = std::exp(mc_logs[m] - m_max);
        expected += c * potts_features(points[m], config.beta);
        norm += c;
      }
    }
    if (!(norm > 0.0) || !std::isfinite(norm) || !expected.allFinite()) {
      lr *= 0.5;
      ++trace.rejected_steps;
      continue;
    }
    theta -= lr * (expected / norm - data_mean);
  }
  trace.final = unflatten(theta, l);
  return trace;
}

double discrete_ksd(const Distribution& model, const std::vector<State>& samples, const DiscreteKernel& base) {
  if (samples.empty()) throw ContractError("KSD needs at least one sample");
  std::unordered_map<State, double, StateHash, StateEqual> counts;
  std::vector<State> distinct;
  for (const auto& x : samples) {
    auto [it, inserted] = counts.try_emplace(x, 0.0);
    if (inserted) distinct.push_back(x);
    it->second += 1.0;
  }
  Eigen::VectorXd c(static_cast<Eigen::Index>(distinct.size()));
  for (std::size_t i = 0; i < distinct.size(); ++i) c(static_cast<Eigen::Index>(i)) = counts[distinct[i]];
  const Eigen::MatrixXd k = gram(SteinKernel{base, model}, distinct);
  const auto n = static_cast<double>(samples.size());
  return c.dot(k * c) / (n * n);
}

std::vector<int> read_counts(std::istream& in) {
  std::vector<int> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    line.erase(std::remove_if(line.begin(), line.end(), [](unsigned char ch) { return std::isspace(ch); }), line.end());
    if (line.empty()) continue;
    std::size_t used = 0;
    int v = -1;
    try {
      v = std::stoi(line, &used);
    } catch (const std::logic_error&) {
      used = 0;
    }
    if (used != line.size() || v < 0) {
      throw DomainError("line " + std::to_string(line_no) + ": expected a nonnegative integer");
    }
    out.push_back(v);
  }
  return out;
}

std::vector<State> read_sequences(std::istream& in, int num_states) {
  std::vector<State> out;
  std::string line;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::vector<int> symbols;
    const bool separated = line.find_first_of(" ,\t") != std::string::npos;
    if (separated) {
      std::replace(line.begin(), line.end(), ',', ' ');
      std::istringstream ss(line);
      std::string tok;
      while (ss >> tok) {
        std::size_t used = 0;
        int v = 0;
        try {
          v = std::stoi(tok, &used);
        } catch (const std::logic_error&) {
          used = 0;
        }
        if (used != tok.size()) throw DomainError("line " + std::to_string(line_no) + ": bad symbol '" + tok + "'");
        symbols.push_back(v);
      }
    } else {
      for (char ch : line) {
        if (!std::isdigit(static_cast<unsigned char>(ch))) {
          throw DomainError("line " + std::to_string(line_no) + ": bad symbol");
        }
        symbols.push_back(ch - '0');
      }
    }
    if (symbols.empty()) continue;
    State x(static_cast<Eigen::Index>(symbols.size()));
    for (std::size_t i = 0; i < symbols.size(); ++i) {
      if (symbols[i] < 1 || symbols[i] > num_states) {
        throw DomainError("line " + std::to_string(line_no) + ": symbol outside 1.." + std::to_string(num_states));
      }
      x(static_cast<Eigen::Index>(i)) = symbols[i] - 1;
    }
    if (!out.empty() && out.front().size() != x.size()) {
      throw DomainError("line " + std::to_string(line_no) + ": sequences differ in length");
    }
    out.push_back(std::move(x));
  }
  return out;
}

}  // namespace bayessum
