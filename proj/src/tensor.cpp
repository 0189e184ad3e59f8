#include "tensorcert/tensor.hpp"

namespace tensorcert {

std::string to_string(Ensemble e) {
  switch (e) {
    case Ensemble::kRademacherNormalized: return "rademacher-normalized";
    case Ensemble::kSphereUniform: return "sphere-uniform";
    case Ensemble::kGaussianNormalized: return "gaussian-normalized";
  }
  throw std::logic_error("unknown ensemble");
}

Ensemble ensemble_from_string(const std::string& s) {
  if (s == "rademacher-normalized") return Ensemble::kRademacherNormalized;
  if (s == "sphere-uniform") return Ensemble::kSphereUniform;
  if (s == "gaussian-normalized") return Ensemble::kGaussianNormalized;
  throw std::invalid_argument("unknown ensemble tag: " + s);
}

void ComponentSet::validate() const {
  if (n < 1 || m < 1) throw std::invalid_argument("ComponentSet: need n >= 1 and m >= 1");
  if (vectors.rows() != m || vectors.cols() != n)
    throw std::invalid_argument("ComponentSet: vectors must be m x n");
  for (int i = 0; i < m; ++i) {
    const double norm = vectors.row(i).norm();
    if (std::abs(norm - 1.0) > 1e-12)
      throw std::invalid_argument("ComponentSet: row " + std::to_string(i) +
                                  " has norm " + std::to_string(norm) +
                                  ", expected unit");
  }
}

SymmetricTensor3 SymmetricTensor3::dense(int n, Eigen::VectorXd entries) {
  if (n < 1) throw std::invalid_argument("dense tensor: n >= 1 required");
  if (entries.size() != static_cast<std::ptrdiff_t>(n) * n * n)
    throw std::invalid_argument("dense tensor: expected n^3 entries");
  SymmetricTensor3 t;
  t.n_ = n;
  t.dense_ = std::make_shared<Eigen::VectorXd>(std::move(entries));
  return t;
}

SymmetricTensor3 SymmetricTensor3::from_components(ComponentSet components) {
  components.validate();
  SymmetricTensor3 t;
  t.n_ = components.n;
  t.components_ = std::make_shared<ComponentSet>(std::move(components));
  return t;
}

SymmetricTensor3 SymmetricTensor3::with_noise(SymmetricTensor3 base,
                                              Eigen::VectorXd noise_entries,
                                              double noise_norm) {
  if (!base.is_component_form())
    throw std::invalid_argument("with_noise: base must be in component form");
  if (noise_entries.size() !=
      static_cast<std::ptrdiff_t>(base.n_) * base.n_ * base.n_)
    throw std::invalid_argument("with_noise: expected n^3 noise entries");
  base.noise_ = std::make_shared<Eigen::VectorXd>(std::move(noise_entries));
  base.noise_norm_ = noise_norm;
  return base;
}

const ComponentSet& SymmetricTensor3::components() const {
  if (!components_) throw std::logic_error("tensor has no component form");
  return *components_;
}

const Eigen::VectorXd& SymmetricTensor3::dense_entries() const {
  if (!dense_) throw std::logic_error("tensor has no dense storage");
  return *dense_;
}

void SymmetricTensor3::check_dim(const Eigen::VectorXd& x, const char* what) const {
  if (x.size() != n_)
    throw std::invalid_argument(std::string(what) + ": vector has dimension " +
                                std::to_string(x.size()) + ", tensor has n = " +
                                std::to_string(n_));
}

double dense_eval_multilinear(const Eigen::VectorXd& entries, int n,
                              const Eigen::VectorXd& x,
                              const Eigen::VectorXd& y,
                              const Eigen::VectorXd& z) {
  // x^T reshape(entries) (y kron z), accumulated without forming the kron.
  double total = 0.0;
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      const double* base = entries.data() + dense_index(n, i, j, 0);
      double inner = 0.0;
      for (int k = 0; k < n; ++k) inner += base[k] * z[k];
      row += y[j] * inner;
    }
    total += x[i] * row;
  }
  return total;
}

Eigen::VectorXd dense_contract(const Eigen::VectorXd& entries, int n,
                               const Eigen::VectorXd& x) {
  Eigen::VectorXd out = Eigen::VectorXd::Zero(n);
  for (int i = 0; i < n; ++i) {
    double row = 0.0;
    for (int j = 0; j < n; ++j) {
      const double* base = entries.data() + dense_index(n, i, j, 0);
      double inner = 0.0;
      for (int k = 0; k < n; ++k) inner += base[k] * x[k];
      row += x[j] * inner;
    }
    out[i] = row;
  }
  return out;
}

Eigen::MatrixXd dense_contract_matrix(const Eigen::VectorXd& entries, int n,
                                      const Eigen::VectorXd& x) {
  Eigen::MatrixXd out = Eigen::MatrixXd::Zero(n, n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j) {
      const double* base = entries.data() + dense_index(n, i, j, 0);
      double inner = 0.0;
      for (int k = 0; k < n; ++k) inner += base[k] * x[k];
      out(i, j) = inner;
    }
  return out;
}

double SymmetricTensor3::eval_cubic(const Eigen::VectorXd& x) const {
  check_dim(x, "eval_cubic");
  if (components_) {
    const Eigen::VectorXd c = components_->vectors * x;
    double v = c.array().cube().sum();
    if (noise_) v += dense_eval_multilinear(*noise_, n_, x, x, x);
    return v;
  }
  return dense_eval_multilinear(*dense_, n_, x, x, x);
}

double SymmetricTensor3::eval_multilinear(const Eigen::VectorXd& x,
                                          const Eigen::VectorXd& y,
                                          const Eigen::VectorXd& z) const {
  check_dim(x, "eval_multilinear");
  check_dim(y, "eval_multilinear");
  check_dim(z, "eval_multilinear");
  if (components_) {
    const Eigen::MatrixXd& a = components_->vectors;
    double v = ((a * x).array() * (a * y).array() * (a * z).array()).sum();
    if (noise_) v += dense_eval_multilinear(*noise_, n_, x, y, z);
    return v;
  }
  return dense_eval_multilinear(*dense_, n_, x, y, z);
}

Eigen::VectorXd SymmetricTensor3::contract(const Eigen::VectorXd& x) const {
  check_dim(x, "contract");
  if (components_) {
    const Eigen::MatrixXd& a = components_->vectors;
    const Eigen::VectorXd c = a * x;
    Eigen::VectorXd v = a.transpose() * c.array().square().matrix();
    if (noise_) v += dense_contract(*noise_, n_, x);
    return v;
  }
  return dense_contract(*dense_, n_, x);
}

Eigen::MatrixXd SymmetricTensor3::contract_matrix(const Eigen::VectorXd& x) const {
  check_dim(x, "contract_matrix");
  if (components_) {
    const Eigen::MatrixXd& a = components_->vectors;
    const Eigen::VectorXd c = a * x;
    Eigen::MatrixXd out = a.transpose() * c.asDiagonal() * a;
    if (noise_) out += dense_contract_matrix(*noise_, n_, x);
    return out;
  }
  return dense_contract_matrix(*dense_, n_, x);
}

Eigen::MatrixXd SymmetricTensor3::unfold() const {
  const SymmetricTensor3 d = densify();
  const Eigen::VectorXd& e = *d.dense_;
  Eigen::MatrixXd out(n_, static_cast<std::ptrdiff_t>(n_) * n_);
  for (int i = 0; i < n_; ++i)
    for (int j = 0; j < n_; ++j)
      for (int k = 0; k < n_; ++k)
        out(i, static_cast<std::ptrdiff_t>(j) * n_ + k) = e[dense_index(n_, i, j, k)];
  return out;
}

SymmetricTensor3 SymmetricTensor3::densify(int cap) const {
  if (!components_) {
    SymmetricTensor3 copy = *this;
    return copy;
  }
  if (n_ > cap)
    throw std::length_error("densify: n = " + std::to_string(n_) +
                            " exceeds dense cap " + std::to_string(cap));
  const Eigen::MatrixXd& a = components_->vectors;
  Eigen::VectorXd e = Eigen::VectorXd::Zero(static_cast<std::ptrdiff_t>(n_) * n_ * n_);
  for (int t = 0; t < components_->m; ++t) {
    const auto row = a.row(t);
    for (int i = 0; i < n_; ++i) {
      const double ai = row[i];
      for (int j = 0; j < n_; ++j) {
        const double aij = ai * row[j];
        double* base = e.data() + dense_index(n_, i, j, 0);
        for (int k = 0; k < n_; ++k) base[k] += aij * row[k];
      }
    }
  }
  if (noise_) e += *noise_;
  return SymmetricTensor3::dense(n_, std::move(e));
}

double SymmetricTensor3::frobenius_sq() const {
  if (components_) {
    const Eigen::MatrixXd g = components_->vectors * components_->vectors.transpose();
    double total = g.array().cube().sum();
    if (noise_) {
      total += noise_->squaredNorm();
      for (int t = 0; t < components_->m; ++t) {
        const Eigen::VectorXd row = components_->vectors.row(t).transpose();
        total += 2.0 * dense_eval_multilinear(*noise_, n_, row, row, row);
      }
    }
    return total;
  }
  return dense_->squaredNorm();
}

Eigen::MatrixXd kronecker(const Eigen::MatrixXd& u, const Eigen::MatrixXd& v) {
  Eigen::MatrixXd out(u.rows() * v.rows(), u.cols() * v.cols());
  for (Eigen::Index i = 0; i < u.rows(); ++i)
    for (Eigen::Index j = 0; j < u.cols(); ++j)
      out.block(i * v.rows(), j * v.cols(), v.rows(), v.cols()) = u(i, j) * v;
  return out;
}

Eigen::VectorXd kron_vec(const Eigen::VectorXd& x, const Eigen::VectorXd& y) {
  Eigen::VectorXd out(x.size() * y.size());
  for (Eigen::Index i = 0; i < x.size(); ++i)
    out.segment(i * y.size(), y.size()) = x[i] * y;
  return out;
}

}  // namespace tensorcert
