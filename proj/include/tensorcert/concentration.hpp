#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "tensorcert/spectral.hpp"
#include "tensorcert/tensor.hpp"

namespace tensorcert {

/// One sign-resampling trial of the coupled/decoupled cross-term matrices:
/// M' = sum_{i != j} sigma_i sigma_j Q_ij and M'' with independent tau.
struct DecoupledSample {
  Eigen::VectorXd sigma;
  Eigen::VectorXd tau;
  double norm_coupled = 0.0;    // ||M'||
  double norm_decoupled = 0.0;  // ||M''||
};

struct DecouplingSummary {
  double ratio_median = 1.0;  // quantile_0.5(||M'||) / quantile_0.5(||M''||)
  double ratio_q90 = 1.0;
  std::vector<DecoupledSample> samples;
};

/// Matrix-free applier for sum_{i != j} sigma_i tau_j <a_i,a_j>
/// (a_i kron a_j)(a_i kron a_j)^T. With tau = sigma this is the coupled M';
/// with all signs +1 it reduces to the certificate's cross operator.
LinearOperator build_signed_cross_operator(const ComponentSet& components,
                                           const Eigen::VectorXd& sigma,
                                           const Eigen::VectorXd& tau);

DecouplingSummary decoupling_experiment(int n, int m, int trials,
                                        std::uint64_t seed, double tol = 1e-7,
                                        int threads = 0);

/// d * exp(-t^2/2 / (sigma^2 + R t / 3)), clipped to [0, 1].
double bernstein_tail(int d, double r, double sigma_sq, double t);

enum class BernsteinFamily {
  kRightFactor,  // sum_{j != i} tau_j <a_i,a_j> a_j a_j^T, fixed i (n x n)
  kSigmaT,       // sum_i sigma_i T_i with T_i = sum_{j != i} tau_j Q_ij (n^2 x n^2)
};

struct BernsteinRow {
  double t = 0.0;
  double empirical_tail = 0.0;
  double bound = 1.0;
};

struct BernsteinCheck {
  int dimension = 0;      // d in the tail bound
  double r = 0.0;         // max individual spectral norm
  double sigma_sq = 0.0;  // variance proxy, computed exactly from summands
  std::vector<BernsteinRow> rows;
  bool dominated = true;  // empirical <= bound at every grid point
};

BernsteinCheck bernstein_empirical_check(const ComponentSet& components,
                                         BernsteinFamily family, int index,
                                         int trials, int grid_points,
                                         std::uint64_t seed, int threads = 0);

struct DominationCheck {
  bool holds = false;
  double margin = 0.0;  // min eigenvalue of bound * (a_i a_i^T) kron I - T_i
};

/// Dense check of T_i <= bound_coefficient (a_i a_i^T) kron I. The natural
/// bound_coefficient is the measured norm of the right Kronecker factor
/// sum_{j != i} tau_j <a_i,a_j> a_j a_j^T, which validates the
/// factorization step rather than any probabilistic constant.
DominationCheck t_i_domination_check(const ComponentSet& components,
                                     const Eigen::VectorXd& tau, int index,
                                     double bound_coefficient);

/// Measured spectral norm of the right Kronecker factor for index i.
double t_i_right_factor_norm(const ComponentSet& components,
                             const Eigen::VectorXd& tau, int index);

/// Probe + dense verification that P <= Q and R psd imply
/// R kron P <= R kron Q. Refuses (throws) when the hypothesis fails.
bool kronecker_psd_check(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                         const Eigen::MatrixXd& r, int probes,
                         std::uint64_t seed = 0);

struct ScalingCellMetrics {
  int n = 0;
  int m = 0;
  std::vector<double> cross_term_norms;  // one per trial, trial order
  std::vector<double> gersh_minus_one;
  std::vector<double> a_norm_sq;
  std::vector<double> ascent_estimates;
};

struct SlopeFit {
  double slope = 0.0;
  double half_width = 0.0;  // 95% confidence half-width
  int points = 0;
};

struct ScalingRun {
  std::vector<ScalingCellMetrics> cells;
  std::optional<SlopeFit> cross_vs_m;        // log||M|| vs log m at fixed n
  std::optional<SlopeFit> cross_vs_n_at_m_eq_n;
  std::optional<SlopeFit> gersh_vs_m;        // log(gersh-1) vs log m at fixed n
  std::string to_csv() const;
  std::string summary_json() const;
};

ScalingRun scaling_experiment(const std::vector<std::pair<int, int>>& grid,
                              int trials, std::uint64_t seed, double tol = 1e-6,
                              int threads = 0);

double quantile(std::vector<double> values, double q);

}  // namespace tensorcert
