#include "tensorcert/spectral.hpp"

#include <cmath>
#include <stdexcept>

namespace tensorcert {

LinearOperator dense_operator(const Eigen::MatrixXd& a) {
  LinearOperator op;
  op.rows = a.rows();
  op.cols = a.cols();
  op.apply = [a](const Eigen::VectorXd& v) -> Eigen::VectorXd { return a * v; };
  op.apply_adjoint = [a](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    return a.transpose() * v;
  };
  return op;
}

LinearOperator self_adjoint_operator(const Eigen::MatrixXd& a) {
  LinearOperator op;
  op.rows = a.rows();
  op.cols = a.cols();
  op.apply = [a](const Eigen::VectorXd& v) -> Eigen::VectorXd { return a * v; };
  return op;
}

namespace {

Eigen::VectorXd random_unit(RngStream& stream, Eigen::Index dim) {
  Eigen::VectorXd v(dim);
  for (Eigen::Index i = 0; i < dim; ++i) v[i] = stream.next_gaussian();
  const double norm = v.norm();
  if (norm == 0.0) return Eigen::VectorXd::Unit(dim, 0);
  return v / norm;
}

void check_adjoint_consistency(const LinearOperator& op, RngStream& stream) {
  Eigen::VectorXd u = random_unit(stream, op.cols);
  Eigen::VectorXd v = random_unit(stream, op.rows);
  const Eigen::VectorXd au = op.apply(u);
  const Eigen::VectorXd atv = op.apply_adjoint(v);
  const double lhs = au.dot(v);
  const double rhs = u.dot(atv);
  const double scale = std::max({1.0, au.norm(), atv.norm()});
  if (std::abs(lhs - rhs) > 1e-8 * scale)
    throw std::invalid_argument("spectral_norm: apply/apply_adjoint are not adjoints");
}

}  // namespace

SpectralEstimate spectral_norm(const LinearOperator& op, const SpectralOptions& opt) {
  if (!op.apply) throw std::invalid_argument("spectral_norm: missing apply");
  const bool sym = op.self_adjoint();
  if (sym && op.rows != op.cols)
    throw std::invalid_argument("spectral_norm: self-adjoint operator must be square");

  RngStream stream = RngStream(opt.seed).child("spectral-norm");
  if (!sym && opt.check_adjoint) check_adjoint_consistency(op, stream);

  const int max_iter =
      opt.max_iter > 0 ? opt.max_iter : 10 * static_cast<int>(std::max(op.rows, op.cols));

  SpectralEstimate best;
  int total_iters = 0;
  const int restarts = 2;
  for (int attempt = 0; attempt < restarts && !best.converged; ++attempt) {
    Eigen::VectorXd v = random_unit(stream, op.cols);
    double prev = -1.0;
    double residual = 1.0;
    int stale = 0;
    for (int it = 0; it < max_iter; ++it) {
      ++total_iters;
      Eigen::VectorXd w = op.apply(v);
      const double sigma = w.norm();  // = ||Av||; for self-adjoint >= |rayleigh|
      if (sigma < 1e-300) {           // operator annihilates the probe
        best.value = std::max(best.value, 0.0);
        best.converged = true;
        best.residual = 0.0;
        break;
      }
      Eigen::VectorXd next = sym ? w : op.apply_adjoint(w);
      const double nn = next.norm();
      if (nn < 1e-300) {
        best.converged = true;
        best.residual = 0.0;
        break;
      }
      v = next / nn;
      const double estimate = sym ? sigma : std::sqrt(nn);
      residual = prev < 0.0 ? 1.0 : std::abs(estimate - prev) / std::max(estimate, 1e-300);
      const bool improved = estimate > prev * (1.0 + 1e-14);
      prev = estimate;
      if (residual <= opt.tol && it > 0) {
        if (estimate >= best.value) {
          best.value = estimate;
          best.residual = residual;
          best.converged = true;
        }
        break;
      }
      stale = improved ? 0 : stale + 1;
      if (stale > 80) break;  // stagnated; try a fresh start vector
      if (estimate > best.value) {
        best.value = estimate;
        best.residual = residual;
      }
    }
  }
  best.iterations = total_iters;
  return best;
}

}  // namespace tensorcert
