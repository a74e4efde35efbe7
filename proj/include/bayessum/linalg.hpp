#pragma once

#include <cmath>

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include "bayessum/errors.hpp"

namespace bayessum {

inline constexpr double kJitterStart = 1e-12;
inline constexpr double kJitterStop = 1e-6;

/// Cholesky factor of K + jitter I. K itself is used when every squared pivot
/// clears the first rung 1e-12 trace(K)/N; otherwise the jitter starts at that
/// rung and grows tenfold until the factorization succeeds or exceeds
/// 1e-6 trace(K)/N.
template <class Scalar = double>
class GramFactor {
 public:
  using Matrix = Eigen::Matrix<Scalar, Eigen::Dynamic, Eigen::Dynamic>;
  using Vector = Eigen::Matrix<Scalar, Eigen::Dynamic, 1>;

  GramFactor() = default;

  explicit GramFactor(const Matrix& k) : n_(k.rows()) {
    if (k.rows() != k.cols()) throw ContractError("Gram matrix must be square");
    if (n_ == 0) return;
    if (!k.allFinite()) throw SingularGramError("Gram matrix has non-finite entries");
    const Scalar scale = k.trace() / static_cast<Scalar>(n_);
    if (!(scale > Scalar(0))) throw SingularGramError("Gram matrix has a nonpositive trace");
    llt_.compute(k);
    if (llt_.info() == Eigen::Success &&
        (llt_.matrixLLT().diagonal().array().square() > Scalar(kJitterStart) * scale).all()) {
      return;
    }
    for (Scalar rel = Scalar(kJitterStart); rel <= Scalar(kJitterStop) * Scalar(1.0000001); rel *= Scalar(10)) {
      jitter_ = rel * scale;
      Matrix shifted = k;
      shifted.diagonal().array() += jitter_;
      llt_.compute(shifted);
      if (llt_.info() == Eigen::Success && (llt_.matrixLLT().diagonal().array() > Scalar(0)).all()) return;
      ++escalations_;
    }
    throw SingularGramError("Cholesky failed after jitter escalation to 1e-6 trace/N");
  }

  [[nodiscard]] Eigen::Index size() const { return n_; }
  [[nodiscard]] Scalar jitter() const { return jitter_; }
  [[nodiscard]] int escalations() const { return escalations_; }

  template <class Rhs>
  [[nodiscard]] auto solve(const Eigen::MatrixBase<Rhs>& b) const {
    return llt_.solve(b);
  }

  /// b^T K^{-1} b via the triangular half-solve.
  template <class Rhs>
  [[nodiscard]] Scalar quad(const Eigen::MatrixBase<Rhs>& b) const {
    if (n_ == 0) return Scalar(0);
    return llt_.matrixL().solve(b).squaredNorm();
  }

  [[nodiscard]] Scalar log_det() const {
    if (n_ == 0) return Scalar(0);
    return Scalar(2) * llt_.matrixLLT().diagonal().array().log().sum();
  }

 private:
  Eigen::Index n_ = 0;
  Scalar jitter_ = Scalar(0);
  int escalations_ = 0;
  Eigen::LLT<Matrix> llt_;
};

}  // namespace bayessum
