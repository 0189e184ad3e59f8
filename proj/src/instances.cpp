#include "tensorcert/instances.hpp"

#include <cmath>
#include <stdexcept>

#include "tensorcert/rng.hpp"

namespace tensorcert {

Instance sample_instance(int n, int m, Ensemble ensemble, std::uint64_t seed) {
  if (n < 1 || m < 1) throw std::invalid_argument("sample_instance: n >= 1, m >= 1");
  RngStream rows = RngStream(seed).child("instances").child("components");
  Eigen::MatrixXd a(m, n);
  for (int i = 0; i < m; ++i) {
    RngStream row = rows.child(static_cast<std::uint64_t>(i));
    switch (ensemble) {
      case Ensemble::kRademacherNormalized: {
        const double scale = 1.0 / std::sqrt(static_cast<double>(n));
        for (int j = 0; j < n; ++j) a(i, j) = row.next_sign() * scale;
        break;
      }
      case Ensemble::kSphereUniform:
      case Ensemble::kGaussianNormalized: {
        double norm_sq;
        do {
          norm_sq = 0.0;
          for (int j = 0; j < n; ++j) {
            a(i, j) = row.next_gaussian();
            norm_sq += a(i, j) * a(i, j);
          }
        } while (norm_sq == 0.0);
        a.row(i) /= std::sqrt(norm_sq);
        break;
      }
    }
  }
  ComponentSet set{n, m, std::move(a), ensemble, seed};
  SymmetricTensor3 t = SymmetricTensor3::from_components(set);
  return Instance{std::move(set), std::move(t)};
}

SpectralEstimate unfolding_norm(const Eigen::VectorXd& entries, int n,
                                double tol, std::uint64_t seed) {
  // unfold(E) is n x n^2 with row i holding the slice E[i,:,:].
  LinearOperator op;
  op.rows = n;
  op.cols = static_cast<Eigen::Index>(n) * n;
  op.apply = [&entries, n](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::VectorXd out(n);
    for (int i = 0; i < n; ++i)
      out[i] = entries.segment(static_cast<Eigen::Index>(i) * n * n,
                               static_cast<Eigen::Index>(n) * n)
                   .dot(v);
    return out;
  };
  op.apply_adjoint = [&entries, n](const Eigen::VectorXd& v) -> Eigen::VectorXd {
    Eigen::VectorXd out = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n) * n);
    for (int i = 0; i < n; ++i)
      out += v[i] * entries.segment(static_cast<Eigen::Index>(i) * n * n,
                                    static_cast<Eigen::Index>(n) * n);
    return out;
  };
  SpectralOptions opt;
  opt.tol = tol;
  opt.seed = seed;
  return spectral_norm(op, opt);
}

namespace {

Eigen::VectorXd symmetric_gaussian_entries(int n, RngStream& stream) {
  const auto total = static_cast<Eigen::Index>(n) * n * n;
  Eigen::VectorXd raw(total);
  for (Eigen::Index i = 0; i < total; ++i) raw[i] = stream.next_gaussian();
  Eigen::VectorXd sym(total);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double avg =
            (raw[dense_index(n, i, j, k)] + raw[dense_index(n, i, k, j)] +
             raw[dense_index(n, j, i, k)] + raw[dense_index(n, j, k, i)] +
             raw[dense_index(n, k, i, j)] + raw[dense_index(n, k, j, i)]) /
            6.0;
        sym[dense_index(n, i, j, k)] = avg;
      }
  return sym;
}

}  // namespace

SymmetricTensor3 add_noise(const SymmetricTensor3& t, const NoiseSpec& spec,
                           int dense_cap) {
  if (spec.target_unfolding_norm < 0.0)
    throw std::invalid_argument("add_noise: target must be nonnegative");
  if (spec.target_unfolding_norm == 0.0) return t;
  if (t.n() > dense_cap)
    throw std::length_error("add_noise: dense noise needs n <= cap");

  RngStream stream = RngStream(spec.seed).child("instances").child("noise");
  Eigen::VectorXd e = symmetric_gaussian_entries(t.n(), stream);
  const SpectralEstimate est = unfolding_norm(e, t.n(), 1e-11, spec.seed);
  if (!(est.value > 0.0))
    throw std::runtime_error("add_noise: degenerate noise draw");
  e *= spec.target_unfolding_norm / est.value;

  if (t.is_component_form())
    return SymmetricTensor3::with_noise(t, std::move(e), spec.target_unfolding_norm);
  Eigen::VectorXd sum = t.dense_entries() + e;
  return SymmetricTensor3::dense(t.n(), std::move(sum));
}

InstanceStats instance_stats(const ComponentSet& components, double tol) {
  const Eigen::MatrixXd& a = components.vectors;
  const int m = components.m;
  const Eigen::MatrixXd g = a * a.transpose();
  InstanceStats stats;
  stats.gersh_row_sums = Eigen::VectorXd::Zero(m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j) {
      if (i == j) continue;
      const double c = std::abs(g(i, j));
      stats.max_coherence = std::max(stats.max_coherence, c);
      stats.gersh_row_sums[i] += c * c * c;
    }
  SpectralOptions opt;
  opt.tol = tol;
  opt.seed = components.seed;
  opt.max_iter = 20000;  // O(mn) per step; the Gram spectrum can be clustered
  const SpectralEstimate est = spectral_norm(dense_operator(a), opt);
  if (!est.converged && m > 1)
    throw std::runtime_error("instance_stats: spectral estimate did not converge");
  stats.a_norm_sq = est.value * est.value;
  return stats;
}

}  // namespace tensorcert
