#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <string>
#include <vector>

#include "tensorcert/tensor.hpp"

namespace tensorcert {

struct ExtractionConfig {
  double accept_threshold = 0.99;        // candidate must reach T(c,c,c) >= this
  double deflation_threshold_sq = 0.125; // <s,c>^2 <= this against accepted s
  int restarts_per_component = 200;
  int ascent_steps = 500;
  double ascent_tol = 1e-10;
  std::uint64_t seed = 0;

  // Candidate-engine tuning. A pool row is kept only while the contraction
  // of its deflated residual stays consistent with a lone unit component:
  // Rayleigh value within quality_band of 1 and second residual eigenvalue
  // below residual_rank_ratio times the first.
  double quality_band = 0.15;
  double residual_rank_ratio = 0.5;
  int max_rounds = 80;
};

struct ExtractionResult {
  Eigen::MatrixXd components;          // accepted candidates, one row each
  std::vector<int> restarts_per_slot;  // telemetry, length m
  std::vector<double> values;          // T(c,c,c) at acceptance
  int sweeps = 0;
  double residual_fro = 0.0;
  bool stalled = false;
  int stall_index = -1;  // first unfilled slot when stalled
};

struct AscendResult {
  Eigen::VectorXd x;
  double value = 0.0;
  int iterations = 0;
  bool converged = false;
  bool vanished = false;  // ||contract(T,x)|| fell below 1e-14: restart signal
};

struct RefineResult {
  Eigen::MatrixXd components;
  int sweeps = 0;
  double residual_fro = 0.0;
  bool diverged = false;
};

struct Matching {
  std::vector<int> permutation;  // truth index i -> found index pi(i)
  Eigen::VectorXd distances;     // ||found_{pi(i)} - truth_i||
  double bottleneck = 0.0;       // max of distances
};

struct HolderDiagnostic {
  int k = 0;
  int best_component_index = -1;
  double correlation_power = 0.0;  // max_i <a_i,c>^k
  bool passes = false;             // vs exp(-(2 eps + delta) k)
};

/// Normalized contraction iteration x <- contract(T,x)/||contract(T,x)||
/// from a unit start. Returns the fixed point (successive-iterate distance
/// <= tol) or the steps-th iterate; `value` is T(x,x,x) at the returned
/// point.
AscendResult ascend(const SymmetricTensor3& tensor, const Eigen::VectorXd& x0,
                    int steps = 500, double tol = 1e-10);

/// Extraction with deflation: fills S with m candidates, every one passing
/// the accept-value and deflation gates. Candidates come from sphere-seeded
/// ascent of the pool-deflated residual; rows failing the intrinsic quality
/// gates are reseeded until the restart budget is exhausted, which fails
/// loudly with the partial S.
ExtractionResult extract_components(const SymmetricTensor3& tensor, int m,
                                    const ExtractionConfig& config = {});

/// Cyclic alternating refinement: each row is replaced by the normalized
/// contraction of its deflated residual. Sweeps that increase the Frobenius
/// residual are rejected and retried with a halved damping factor.
RefineResult refine(const SymmetricTensor3& tensor, Eigen::MatrixXd initial,
                    int max_sweeps = 500, double tol = 1e-12);

/// Bottleneck assignment between recovered and true components (no sign
/// folding; components of odd-order tensors are sign-definite).
Matching match_components(const Eigen::MatrixXd& found, const Eigen::MatrixXd& truth);

/// Point-mass surrogate of the Holder amplification test: does the best
/// <a_i,c>^k clear exp(-(2 eps + delta) k)?
HolderDiagnostic holder_diagnostic(const Eigen::VectorXd& candidate,
                                   const ComponentSet& truth, int k, double eps,
                                   double delta);

/// ||T - sum_i x_i^{x3}||_F via the rank-one Gram identity.
double residual_frobenius(const SymmetricTensor3& tensor, const Eigen::MatrixXd& rows);

}  // namespace tensorcert
