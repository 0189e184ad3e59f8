#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <map>
#include <memory>
#include <string>
#include <vector>

#include "tensorcert/tensor.hpp"

namespace tensorcert {

/// Graded-lexicographic monomial indexing for moment vectors (degree <= d)
/// and moment-matrix rows/columns (degree <= d/2).
class MonomialBasis {
 public:
  MonomialBasis(int n, int degree);

  int n() const { return n_; }
  int degree() const { return degree_; }
  int vector_size() const { return static_cast<int>(vector_monomials_.size()); }
  int matrix_side() const { return matrix_side_; }

  const std::vector<std::vector<int>>& monomials() const { return vector_monomials_; }
  const std::vector<int>& monomial(int index) const { return vector_monomials_[index]; }
  int index_of(const std::vector<int>& exponents) const;

  /// Moment index of alpha_row + alpha_col for matrix positions.
  int entry_moment(int row, int col) const { return entry_moment_(row, col); }
  const Eigen::MatrixXi& entry_moments() const { return entry_moment_; }

 private:
  int n_;
  int degree_;
  int matrix_side_;
  std::vector<std::vector<int>> vector_monomials_;
  std::map<std::vector<int>, int> index_;
  Eigen::MatrixXi entry_moment_;
};

struct PseudoExpectationResiduals {
  double psd_violation = 0.0;        // max(0, -lambda_min(moment matrix))
  double ideal_residual = 0.0;       // max_gamma |E[(||x||^2 - 1) x^gamma]|
  double normalization_residual = 0.0;  // |E[1] - 1|
};

struct PseudoExpectation {
  int degree = 0;
  std::shared_ptr<const MonomialBasis> basis;
  Eigen::VectorXd moments;  // indexed by basis vector monomials

  Eigen::MatrixXd moment_matrix() const;
  PseudoExpectationResiduals residuals() const;
};

/// Moments of the point mass at x (a true distribution, hence feasible).
PseudoExpectation point_mass_moments(const Eigen::VectorXd& x, int degree);

/// Recomputes all residuals from scratch; valid iff all <= tol.
bool validate_pseudo_expectation(const PseudoExpectation& pe, double tol,
                                 PseudoExpectationResiduals* out = nullptr);

struct MomentProblem {
  int n = 0;
  int degree = 0;
  std::shared_ptr<const MonomialBasis> basis;
  Eigen::VectorXd objective;     // linear functional in the moments
  Eigen::MatrixXd constraints;   // E y = f (normalization + sphere ideal)
  Eigen::VectorXd rhs;
  double objective_l1 = 0.0;     // sum |T_ijk|, an a-priori bound on OPT
};

struct SdpOptions {
  double tol = 1e-7;        // feasibility residual tolerance
  int max_iter = 20000;     // inner projection iterations per feasibility solve
  int bisection_steps = 20;
  int matrix_side_cap = 500;
  int ascent_restarts = 16;  // seeds the certified lower end of the bisection
  int ascent_steps = 200;
};

enum class SdpStatus { kConverged, kMaxIter, kInfeasibleSuspected };

struct SdpSolveReport {
  double opt_value = 0.0;
  int iterations = 0;
  double primal_residual = 0.0;      // psd violation at the reported moments
  double constraint_residual = 0.0;  // affine residual at the reported moments
  SdpStatus status = SdpStatus::kMaxIter;
};

/// Maximize E[T(x,x,x)] over degree-d pseudo-expectations satisfying the
/// sphere ideal. Throws std::length_error when the moment matrix side
/// exceeds the cap and std::invalid_argument for odd or sub-quartic degree.
MomentProblem build_certification_problem(const SymmetricTensor3& tensor, int degree,
                                          int matrix_side_cap = 500);

/// First-order solve: bisection on the level set E[T] >= theta, each
/// feasibility problem handled by alternating projections between the
/// affine constraint set and the PSD cone (one eigendecomposition of the
/// moment matrix per iteration).
std::pair<PseudoExpectation, SdpSolveReport> solve_moment_problem(
    const MomentProblem& problem, const SymmetricTensor3& tensor,
    const SdpOptions& opt = {});

enum class SdpVerdict { kYes, kNo, kUndecided };

struct SdpCertificate {
  SdpVerdict verdict = SdpVerdict::kUndecided;
  bool near_threshold = false;  // |opt - threshold| <= tol: YES with warning
  double threshold = 0.0;
  SdpSolveReport report;
  PseudoExpectation pseudo_expectation;
  std::string to_json() const;
};

/// Component-free certification: YES iff OPT <= threshold + tol. Point
/// distributions are feasible, so OPT >= ||T||_inj - tol and a NO answer is
/// one-sided exactly as in the reference algorithm. Solver non-convergence
/// yields UNDECIDED.
SdpCertificate certify_via_sdp(const SymmetricTensor3& tensor, double threshold,
                               int degree = 4, const SdpOptions& opt = {});

}  // namespace tensorcert
