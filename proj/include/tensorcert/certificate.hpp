#pragma once

#include <Eigen/Dense>
#include <string>

#include "tensorcert/spectral.hpp"
#include "tensorcert/tensor.hpp"

namespace tensorcert {

/// Everything the component-aware certificate computes on its way to the
/// final injective-norm bound. The chain, valid pointwise on the unit
/// sphere for T = sum_i a_i^{x3}:
///
///   T(x,x,x)^2 <= S4(x) + p(x)                (Cauchy-Schwarz split)
///   S4(x)^2    <= S6(x) + |cross|             (Cauchy-Schwarz again)
///   S6(x)      <= gersh_bound                 (Gershgorin on the Gram of cubes)
///   |cross|    <= sqrt(c) * a_norm_sq * S4    (coherence + ||A||^2)
///   p(x)       <= cross_term_norm             (spectral bound on M)
///
/// Closing the S4 inequality at its positive root and taking one square
/// root gives bound = sqrt(s4_bound + cross_term_norm) + noise_norm.
struct CertificateReport {
  double gersh_bound = 1.0;       // delta_B >= 1, bound on ||BB^T||
  double max_coherence_sq = 0.0;  // c = max_{i != j} <a_i,a_j>^2
  double a_norm_sq = 1.0;         // alpha, certified bound on ||A||^2
  double cross_term_norm = 0.0;   // mu, certified bound on ||M||
  double s4_bound = 1.0;          // certified sup of sum_i <a_i,x>^4
  double noise_norm = 0.0;        // nu, unfolding norm of the noise term
  double bound = 1.0;             // sqrt(s4_bound + mu) + nu
  double threshold = 0.0;
  bool verdict_yes = false;

  std::string to_json() const;
};

/// 1 + max_i sum_{j != i} |<a_i,a_j>|^3; exact arithmetic, no estimation.
double gram_cubed_bound(const ComponentSet& components);

/// Matrix-free self-adjoint operator on R^{n^2} for
/// M = sum_{i != j} <a_i,a_j> (a_i kron a_j)(a_i kron a_j)^T,
/// applied in O(m n^2 + m^2 n) per product.
LinearOperator build_cross_operator(const ComponentSet& components);

/// Spectral norm of M, inflated by (1 + 2 tol) so the report stays an upper
/// bound despite iterative estimation.
double cross_term_norm(const ComponentSet& components, double tol = 1e-6);

/// Positive root of s^2 = gersh + sqrt(c) * alpha * s.
double s4_bound(double gersh, double max_coherence_sq, double a_norm_sq);

struct CertifyOptions {
  double threshold = 0.0;  // <= 0 means the default 1 + 1/ln n
  double tol = 1e-6;
};

/// Component-aware certification. Requires the tensor in component form;
/// dense tensors belong to the moment-SDP path.
CertificateReport certify(const SymmetricTensor3& tensor,
                          const CertifyOptions& opt = {});

/// Best value of T(x,x,x) found by multi-start normalized-contraction
/// ascent; a valid lower bound witness for the injective norm.
double ascent_injective_estimate(const SymmetricTensor3& tensor, int restarts,
                                 int steps, std::uint64_t seed);

}  // namespace tensorcert
