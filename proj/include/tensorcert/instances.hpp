#pragma once

#include <Eigen/Dense>
#include <cstdint>

#include "tensorcert/spectral.hpp"
#include "tensorcert/tensor.hpp"

namespace tensorcert {

/// Noise budgets used by the certification / decomposition theorems, as
/// functions of n (natural log).
inline double certification_noise_budget(int n) { return 1.0 / (2.0 * std::log(n)); }
inline double decomposition_noise_budget(int n) { return 1.0 / (10.0 * std::log(n)); }

struct NoiseSpec {
  double target_unfolding_norm = 0.0;  // required spectral norm of unfold(E)
  std::uint64_t seed = 0;
  // shape: symmetric-gaussian (the only implemented shape)
};

struct InstanceStats {
  double max_coherence = 0.0;        // max_{i != j} |<a_i, a_j>|
  double a_norm_sq = 0.0;            // ||A||^2 estimate
  Eigen::VectorXd gersh_row_sums;    // per i: sum_{j != i} |<a_i,a_j>|^3
};

struct Instance {
  ComponentSet components;
  SymmetricTensor3 tensor;
};

/// Draw m i.i.d. rows from the named ensemble; rows are exactly unit norm.
/// Bit-identical output for identical (n, m, ensemble, seed).
Instance sample_instance(int n, int m, Ensemble ensemble, std::uint64_t seed);

/// T + E with E an i.i.d. Gaussian tensor symmetrized over index
/// permutations and rescaled so the spectral norm of its n x n^2 unfolding
/// equals the target. Requires a densifiable dimension.
SymmetricTensor3 add_noise(const SymmetricTensor3& t, const NoiseSpec& spec,
                           int dense_cap = SymmetricTensor3::kDefaultDenseCap);

InstanceStats instance_stats(const ComponentSet& components, double tol = 1e-9);

/// Spectral norm of the n x n^2 unfolding of a dense symmetric tensor given
/// by its entry vector, computed matrix-free.
SpectralEstimate unfolding_norm(const Eigen::VectorXd& entries, int n,
                                double tol = 1e-9, std::uint64_t seed = 0);

}  // namespace tensorcert
