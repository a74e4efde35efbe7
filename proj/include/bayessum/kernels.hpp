#pragma once

#include <variant>
#include <vector>

#include <Eigen/Core>

#include "bayessum/distributions.hpp"

namespace bayessum {

/// A * (min(x, y) + offset) on count domains. A positive offset keeps the
/// kernel from vanishing at x = 0.
struct BrownianMin {
  double offset = 0.0;
};

/// (x^T y + 1)^r.
struct Polynomial {
  int degree = 2;
};

/// exp(-lambda d_H(x, y)).
struct ExpHamming {
  double lambda = 1.0;
};

/// d - d_H(x, y) when `complement` (the PSD variant), d_H(x, y) otherwise.
/// The raw distance is not positive semidefinite and is rejected by estimators.
struct Hamming {
  bool complement = true;
};

/// x^T y / (|x|^2 + |y|^2 - x^T y) on binary vectors, 0 at x = y = 0.
struct Tanimoto {};

using DiscreteFamily = std::variant<BrownianMin, Polynomial, ExpHamming, Hamming, Tanimoto>;

struct DiscreteKernel {
  DiscreteFamily family;
  double amplitude = 1.0;
};

struct GaussianRbf {
  double lengthscale = 1.0;
  double amplitude = 1.0;
};

enum class Composition { kProduct, kAdditiveProduct };

/// Kernel on (discrete, continuous) pairs:
///   product:           A k_c k_d
///   additive-product:  A (k_c + k_d + k_c k_d)
struct MixedKernel {
  DiscreteKernel discrete;
  GaussianRbf continuous;
  Composition composition = Composition::kAdditiveProduct;
  double amplitude = 1.0;
};

struct MixedPoint {
  State discrete;
  double continuous = 0.0;
};

/// Discrete Stein kernel built from `base` and the difference score of `model`.
struct SteinKernel {
  DiscreteKernel base;
  Distribution model;
};

double hamming_distance(const State& x, const State& y);

double eval(const DiscreteKernel& k, const State& x, const State& y);
double eval(const GaussianRbf& k, double x, double y);
double eval(const MixedKernel& k, const MixedPoint& a, const MixedPoint& b);

/// k_p(x, y) with scores computed on the fly.
double eval(const SteinKernel& k, const State& x, const State& y);

/// k_p(x, y) given precomputed difference scores sx = s_p(x), sy = s_p(y).
double stein_eval(const SteinKernel& k, const State& x, const Eigen::VectorXd& sx, const State& y,
                  const Eigen::VectorXd& sy);

bool is_psd(const DiscreteKernel& k);

DiscreteKernel with_amplitude(DiscreteKernel k, double amplitude);

template <class Kernel>
Kernel scaled(Kernel k, double amplitude) {
  k.amplitude = amplitude;
  return k;
}

template <class Scalar = double, class Kernel, class Point>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> gram(const Kernel& k, const std::vector<Point>& points) {
  const auto n = static_cast<Eigen::Index>(points.size());
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    out(i, i) = static_cast<Scalar>(eval(k, points[i], points[i]));
    for (Eigen::Index j = 0; j < i; ++j) {
      out(i, j) = static_cast<Scalar>(eval(k, points[i], points[j]));
      out(j, i) = out(i, j);
    }
  }
  return out;
}

template <class Scalar = double, class Kernel, class Point>
Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> cross_gram(const Kernel& k, const std::vector<Point>& a,
                                                                 const std::vector<Point>& b) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic> out(static_cast<Eigen::Index>(a.size()),
                                                            static_cast<Eigen::Index>(b.size()));
  for (std::size_t i = 0; i < a.size(); ++i) {
    for (std::size_t j = 0; j < b.size(); ++j) {
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = static_cast<Scalar>(eval(k, a[i], b[j]));
    }
  }
  return out;
}

template <class Scalar = double, class Kernel, class Point>
Eigen::Matrix<Scalar, Eigen::Dynamic, 1> cross_column(const Kernel& k, const std::vector<Point>& a, const Point& y) {
  Eigen::Matrix<Scalar, Eigen::Dynamic, 1> out(static_cast<Eigen::Index>(a.size()));
  for (std::size_t i = 0; i < a.size(); ++i) out(static_cast<Eigen::Index>(i)) = static_cast<Scalar>(eval(k, a[i], y));
  return out;
}

/// Stein Gram matrix; scores are computed once per point.
Eigen::MatrixXd gram(const SteinKernel& k, const std::vector<State>& points);

/// Scores for a list of points, one row per point.
Eigen::MatrixXd score_matrix(const Distribution& model, const std::vector<State>& points);

}  // namespace bayessum
