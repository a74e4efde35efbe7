#include "bayessum/kernels.hpp"

#include <algorithm>
#include <cmath>

#include "bayessum/errors.hpp"

namespace bayessum {
namespace {

template <class... Ts>
struct Overloaded : Ts... {
  using Ts::operator()...;
};

void check_dims(const State& x, const State& y) {
  if (x.size() != y.size()) throw ContractError("kernel arguments differ in dimension");
}

double unit_eval(const DiscreteFamily& family, const State& x, const State& y) {
  check_dims(x, y);
  return std::visit(
      Overloaded{
          [&](const BrownianMin& b) {
            if (x.size() != 1) throw ContractError("Brownian kernel is defined on scalar counts");
            return static_cast<double>(std::min(x(0), y(0))) + b.offset;
          },
          [&](const Polynomial& p) {
            const double dot = x.cast<double>().dot(y.cast<double>());
            return std::pow(dot + 1.0, p.degree);
          },
          [&](const ExpHamming& e) { return std::exp(-e.lambda * hamming_distance(x, y)); },
          [&](const Hamming& h) {
            const double dist = hamming_distance(x, y);
            return h.complement ? static_cast<double>(x.size()) - dist : dist;
          },
          [&](const Tanimoto&) {
            const double dot = x.cast<double>().dot(y.cast<double>());
            const double denom = x.cast<double>().squaredNorm() + y.cast<double>().squaredNorm() - dot;
            return denom == 0.0 ? 0.0 : dot / denom;
          },
      },
      family);
}

}  // namespace

double hamming_distance(const State& x, const State& y) {
  check_dims(x, y);
  return static_cast<double>((x.array() != y.array()).count());
}

double eval(const DiscreteKernel& k, const State& x, const State& y) {
  return k.amplitude * unit_eval(k.family, x, y);
}

double eval(const GaussianRbf& k, double x, double y) {
  const double r = (x - y) / k.lengthscale;
  return k.amplitude * std::exp(-0.5 * r * r);
}

double eval(const MixedKernel& k, const MixedPoint& a, const MixedPoint& b) {
  const double kc = eval(k.continuous, a.continuous, b.continuous);
  const double kd = eval(k.discrete, a.discrete, b.discrete);
  if (k.composition == Composition::kProduct) return k.amplitude * kc * kd;
  return k.amplitude * (kc + kd + kc * kd);
}

double stein_eval(const SteinKernel& k, const State& x, const Eigen::VectorXd& sx, const State& y,
                  const Eigen::VectorXd& sy) {
  const auto alphabet = site_alphabet(k.model);
  if (!alphabet) throw CapabilityError("Stein kernels need a finite per-site alphabet");
  const double kxy = eval(k.base, x, y);
  double total = 0.0;
  State xs = x;
  State ys = y;
  for (int i = 0; i < x.size(); ++i) {
    xs(i) = alphabet->prev(x(i));
    ys(i) = alphabet->prev(y(i));
    const double k_xs_y = eval(k.base, xs, y);
    const double k_x_ys = eval(k.base, x, ys);
    const double k_xs_ys = eval(k.base, xs, ys);
    // Grouped so that swapping (x, y) gives bit-identical results.
    const double cross = sx(i) * (kxy - k_x_ys) + sy(i) * (kxy - k_xs_y);
    const double second = (kxy + k_xs_ys) - (k_xs_y + k_x_ys);
    total += (sx(i) * sy(i)) * kxy - cross + second;
    xs(i) = x(i);
    ys(i) = y(i);
  }
  return total;
}

double eval(const SteinKernel& k, const State& x, const State& y) {
  return stein_eval(k, x, diff_score(k.model, x), y, diff_score(k.model, y));
}

Eigen::MatrixXd score_matrix(const Distribution& model, const std::vector<State>& points) {
  Eigen::MatrixXd scores(static_cast<Eigen::Index>(points.size()), num_sites(model));
  for (std::size_t i = 0; i < points.size(); ++i) scores.row(static_cast<Eigen::Index>(i)) = diff_score(model, points[i]);
  return scores;
}

Eigen::MatrixXd gram(const SteinKernel& k, const std::vector<State>& points) {
  const Eigen::MatrixXd scores = score_matrix(k.model, points);
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::MatrixXd out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const Eigen::VectorXd si = scores.row(i).transpose();
    for (Eigen::Index j = 0; j <= i; ++j) {
      out(i, j) = stein_eval(k, points[i], si, points[j], scores.row(j).transpose());
      out(j, i) = out(i, j);
    }
  }
  return out;
}

bool is_psd(const DiscreteKernel& k) {
  if (const auto* h = std::get_if<Hamming>(&k.family)) return h->complement;
  return k.amplitude >= 0.0;
}

DiscreteKernel with_amplitude(DiscreteKernel k, double amplitude) {
  k.amplitude = amplitude;
  return k;
}

}  // namespace bayessum
