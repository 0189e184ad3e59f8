#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <functional>

#include "tensorcert/rng.hpp"

namespace tensorcert {

/// Result of a matrix-free largest-singular-value estimate.
struct SpectralEstimate {
  double value = 0.0;     // estimated largest singular value, >= 0
  int iterations = 0;
  double residual = 0.0;  // relative change of the estimate at termination
  bool converged = false;
};

/// Matrix-free linear operator. Leave `apply_adjoint` empty for self-adjoint
/// operators (square, A = A^T); the estimator then runs one apply per step.
struct LinearOperator {
  Eigen::Index rows = 0;
  Eigen::Index cols = 0;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply;
  std::function<Eigen::VectorXd(const Eigen::VectorXd&)> apply_adjoint;

  bool self_adjoint() const { return !apply_adjoint; }
};

LinearOperator dense_operator(const Eigen::MatrixXd& a);
LinearOperator self_adjoint_operator(const Eigen::MatrixXd& a);

struct SpectralOptions {
  double tol = 1e-9;        // relative successive-change tolerance
  int max_iter = 0;         // 0 = 10 * max(rows, cols)
  std::uint64_t seed = 0;   // start-vector stream
  bool check_adjoint = true;
};

/// Power iteration on the Gram operator A^T A (or on A itself when
/// self-adjoint), with one random restart on stagnation. Deterministic in
/// the seed. Throws std::invalid_argument when the supplied adjoint is
/// inconsistent with `apply` on random probes.
SpectralEstimate spectral_norm(const LinearOperator& op,
                               const SpectralOptions& opt = {});

}  // namespace tensorcert
