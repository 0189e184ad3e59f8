#include "tensorcert/certificate.hpp"

#include <cmath>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "tensorcert/instances.hpp"
#include "tensorcert/rng.hpp"

namespace tensorcert {

double gram_cubed_bound(const ComponentSet& components) {
  const Eigen::MatrixXd g = components.vectors * components.vectors.transpose();
  double worst = 0.0;
  for (int i = 0; i < components.m; ++i) {
    double row = 0.0;
    for (int j = 0; j < components.m; ++j)
      if (j != i) row += std::abs(g(i, j) * g(i, j) * g(i, j));
    worst = std::max(worst, row);
  }
  return 1.0 + worst;
}

LinearOperator build_cross_operator(const ComponentSet& components) {
  const int n = components.n;
  auto a = std::make_shared<Eigen::MatrixXd>(components.vectors);
  auto g = std::make_shared<Eigen::MatrixXd>(*a * a->transpose());
  g->diagonal().setZero();  // only i != j terms enter M

  LinearOperator op;
  op.rows = static_cast<Eigen::Index>(n) * n;
  op.cols = op.rows;
  op.apply = [a, g, n](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    // <a_i kron a_j, y> = a_i^T Y a_j with Y the row-major reshape of y.
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        ymat(y.data(), n, n);
    const Eigen::MatrixXd u = *a * ymat * a->transpose();
    const Eigen::MatrixXd c = g->cwiseProduct(u);
    const Eigen::MatrixXd z = a->transpose() * c * *a;
    Eigen::VectorXd out(static_cast<Eigen::Index>(n) * n);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>>(out.data(), n, n) = z;
    return out;
  };
  return op;
}

double cross_term_norm(const ComponentSet& components, double tol) {
  if (components.m < 2) return 0.0;
  SpectralOptions opt;
  opt.tol = tol;
  opt.seed = RngStream(components.seed).child("certificate").key();
  const SpectralEstimate est = spectral_norm(build_cross_operator(components), opt);
  return est.value * (1.0 + 2.0 * tol);
}

double s4_bound(double gersh, double max_coherence_sq, double a_norm_sq) {
  if (gersh < 1.0) throw std::invalid_argument("s4_bound: gersh must be >= 1");
  if (max_coherence_sq < 0.0 || max_coherence_sq > 1.0)
    throw std::invalid_argument("s4_bound: coherence^2 must lie in [0,1]");
  if (a_norm_sq < 1.0) throw std::invalid_argument("s4_bound: ||A||^2 must be >= 1");
  const double beta = std::sqrt(max_coherence_sq) * a_norm_sq;
  return 0.5 * (beta + std::sqrt(beta * beta + 4.0 * gersh));
}

CertificateReport certify(const SymmetricTensor3& tensor, const CertifyOptions& opt) {
  if (!tensor.is_component_form())
    throw std::invalid_argument(
        "certify: tensor has no component form; use the moment-SDP mode for "
        "dense tensors");
  const ComponentSet& comps = tensor.components();
  const int n = comps.n;

  CertificateReport report;
  report.threshold =
      opt.threshold > 0.0 ? opt.threshold : 1.0 + 1.0 / std::log(static_cast<double>(n));

  if (comps.m == 1) {
    // Empty maxes and sums take their identity elements.
    report.gersh_bound = 1.0;
    report.max_coherence_sq = 0.0;
    report.a_norm_sq = 1.0;
    report.cross_term_norm = 0.0;
  } else {
    report.gersh_bound = gram_cubed_bound(comps);
    const Eigen::MatrixXd g = comps.vectors * comps.vectors.transpose();
    double c = 0.0;
    for (int i = 0; i < comps.m; ++i)
      for (int j = i + 1; j < comps.m; ++j) c = std::max(c, g(i, j) * g(i, j));
    report.max_coherence_sq = std::min(c, 1.0);

    SpectralOptions sopt;
    sopt.tol = opt.tol;
    sopt.seed = RngStream(comps.seed).child("certificate-a").key();
    sopt.max_iter = 20000;
    const SpectralEstimate a_est = spectral_norm(dense_operator(comps.vectors), sopt);
    const double a_norm = a_est.value * (1.0 + 2.0 * opt.tol);
    report.a_norm_sq = std::max(1.0, a_norm * a_norm);
    report.cross_term_norm = cross_term_norm(comps, opt.tol);
  }

  report.s4_bound =
      s4_bound(report.gersh_bound, report.max_coherence_sq, report.a_norm_sq);

  if (tensor.has_noise()) {
    const SpectralEstimate nu =
        unfolding_norm(*tensor.noise(), n, std::min(opt.tol, 1e-9),
                       RngStream(comps.seed).child("certificate-nu").key());
    report.noise_norm = nu.value * (1.0 + 2.0 * opt.tol);
  }

  report.bound = std::sqrt(report.s4_bound + report.cross_term_norm) + report.noise_norm;
  report.verdict_yes = report.bound <= report.threshold;
  return report;
}

double ascent_injective_estimate(const SymmetricTensor3& tensor, int restarts,
                                 int steps, std::uint64_t seed) {
  const int n = tensor.n();
  RngStream root = RngStream(seed).child("ascent-estimate");
  double best = 0.0;
  for (int r = 0; r < restarts; ++r) {
    RngStream s = root.child(static_cast<std::uint64_t>(r));
    Eigen::VectorXd x(n);
    for (int i = 0; i < n; ++i) x[i] = s.next_gaussian();
    const double norm = x.norm();
    if (norm == 0.0) continue;
    x /= norm;
    best = std::max(best, std::abs(tensor.eval_cubic(x)));
    for (int it = 0; it < steps; ++it) {
      Eigen::VectorXd y = tensor.contract(x);
      const double ny = y.norm();
      if (ny < 1e-14) break;
      y /= ny;
      const double moved = (y - x).norm();
      x = y;
      best = std::max(best, std::abs(tensor.eval_cubic(x)));
      if (moved < 1e-12) break;
    }
  }
  return best;
}

std::string CertificateReport::to_json() const {
  nlohmann::json j;
  j["gersh_bound"] = gersh_bound;
  j["max_coherence_sq"] = max_coherence_sq;
  j["a_norm_sq"] = a_norm_sq;
  j["cross_term_norm"] = cross_term_norm;
  j["s4_bound"] = s4_bound;
  j["noise_norm"] = noise_norm;
  j["bound"] = bound;
  j["threshold"] = threshold;
  j["verdict"] = verdict_yes ? "YES" : "NO";
  return j.dump(2);
}

}  // namespace tensorcert
