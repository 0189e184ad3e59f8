#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>

namespace tensorcert {

enum class Ensemble {
  kRademacherNormalized,
  kSphereUniform,
  kGaussianNormalized,
};

std::string to_string(Ensemble e);
Ensemble ensemble_from_string(const std::string& s);

/// The m unit vectors a_1..a_m in R^n, stored as the rows of an m x n matrix.
struct ComponentSet {
  int n = 0;
  int m = 0;
  Eigen::MatrixXd vectors;  // m x n, rows have unit Euclidean norm
  Ensemble ensemble = Ensemble::kRademacherNormalized;
  std::uint64_t seed = 0;

  /// Throws std::invalid_argument when a row norm deviates from 1 by more
  /// than 1e-12 or the shape fields are inconsistent.
  void validate() const;
};

/// Symmetric third-order tensor. Storage is either a dense array of n^3
/// reals (index (i,j,k) -> (i*n + j)*n + k) or a component form
/// T = sum_t a_t^{x3} with an optional dense symmetric noise term E.
///
/// Dense storage of an n-dimensional tensor needs n^3 reals, so
/// densification is refused above a configurable cap.
class SymmetricTensor3 {
 public:
  static constexpr int kDefaultDenseCap = 64;

  SymmetricTensor3() = default;

  static SymmetricTensor3 dense(int n, Eigen::VectorXd entries);
  static SymmetricTensor3 from_components(ComponentSet components);
  static SymmetricTensor3 with_noise(SymmetricTensor3 base,
                                     Eigen::VectorXd noise_entries,
                                     double noise_norm);

  int n() const { return n_; }
  bool is_component_form() const { return components_ != nullptr; }
  bool has_noise() const { return is_component_form() && noise_ != nullptr; }

  const ComponentSet& components() const;
  const Eigen::VectorXd* noise() const { return noise_.get(); }
  double noise_norm() const { return noise_norm_; }
  const Eigen::VectorXd& dense_entries() const;

  /// T(x,x,x).
  double eval_cubic(const Eigen::VectorXd& x) const;

  /// T(x,y,z).
  double eval_multilinear(const Eigen::VectorXd& x, const Eigen::VectorXd& y,
                          const Eigen::VectorXd& z) const;

  /// v with v_i = T(e_i, x, x); the gradient direction of the cubic form.
  Eigen::VectorXd contract(const Eigen::VectorXd& x) const;

  /// The n x n matrix T(.,.,x).
  Eigen::MatrixXd contract_matrix(const Eigen::VectorXd& x) const;

  /// n x n^2 matrix with entry (i, j*n+k) = T[i,j,k].
  Eigen::MatrixXd unfold() const;

  /// Dense copy; throws std::length_error when n exceeds the cap.
  SymmetricTensor3 densify(int cap = kDefaultDenseCap) const;

  double frobenius_sq() const;

 private:
  void check_dim(const Eigen::VectorXd& x, const char* what) const;

  int n_ = 0;
  std::shared_ptr<const ComponentSet> components_;
  std::shared_ptr<const Eigen::VectorXd> dense_;  // tensor itself (dense kind)
  std::shared_ptr<const Eigen::VectorXd> noise_;  // additive term (component kind)
  double noise_norm_ = 0.0;
};

/// Kronecker product as the p*r x q*s block matrix [U_ij * V].
Eigen::MatrixXd kronecker(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v);

/// vec(x y^T) with index (i,j) -> i*len(y)+j; agrees with kronecker on
/// column vectors.
Eigen::VectorXd kron_vec(const Eigen::VectorXd& x, const Eigen::VectorXd& y);

/// Value index helpers for dense storage.
inline std::ptrdiff_t dense_index(int n, int i, int j, int k) {
  return (static_cast<std::ptrdiff_t>(i) * n + j) * n + k;
}

/// Dense evaluation helpers shared by the noise-term paths. `entries` holds
/// n^3 reals in (i,j,k) lexicographic order.
double dense_eval_multilinear(const Eigen::VectorXd& entries, int n,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y,
                              const Eigen::VectorXd& z);
Eigen::VectorXd dense_contract(const Eigen::VectorXd& entries, int n,
                               const Eigen::VectorXd& x);
Eigen::MatrixXd dense_contract_matrix(const Eigen::VectorXd& entries, int n,
                                      const Eigen::VectorXd& x);

}  // namespace tensorcert
