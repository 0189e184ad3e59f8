#include "tensorcert/moment_sdp.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <limits>
#include <nlohmann/json.hpp>
#include <stdexcept>

#include "tensorcert/certificate.hpp"
#include "tensorcert/rng.hpp"

namespace tensorcert {

namespace {

void enumerate_monomials(int n, int max_degree, std::vector<std::vector<int>>* out) {
  // Graded order, lexicographic within each total degree.
  std::vector<int> current(n, 0);
  for (int total = 0; total <= max_degree; ++total) {
    std::function<void(int, int)> rec = [&](int pos, int remaining) {
      if (pos == n - 1) {
        current[pos] = remaining;
        out->push_back(current);
        return;
      }
      for (int e = remaining; e >= 0; --e) {
        current[pos] = e;
        rec(pos + 1, remaining - e);
      }
    };
    if (n == 0) break;
    rec(0, total);
  }
}

}  // namespace

MonomialBasis::MonomialBasis(int n, int degree) : n_(n), degree_(degree) {
  if (n < 1) throw std::invalid_argument("MonomialBasis: n >= 1");
  if (degree < 2 || degree % 2 != 0)
    throw std::invalid_argument("MonomialBasis: degree must be even and >= 2");
  enumerate_monomials(n, degree, &vector_monomials_);
  for (std::size_t i = 0; i < vector_monomials_.size(); ++i)
    index_[vector_monomials_[i]] = static_cast<int>(i);

  matrix_side_ = 0;
  for (const auto& mono : vector_monomials_) {
    int total = 0;
    for (int e : mono) total += e;
    if (total <= degree / 2) ++matrix_side_;
  }
  entry_moment_.resize(matrix_side_, matrix_side_);
  std::vector<int> sum(n);
  for (int r = 0; r < matrix_side_; ++r)
    for (int c = 0; c < matrix_side_; ++c) {
      for (int i = 0; i < n; ++i)
        sum[i] = vector_monomials_[r][i] + vector_monomials_[c][i];
      entry_moment_(r, c) = index_of(sum);
    }
}

int MonomialBasis::index_of(const std::vector<int>& exponents) const {
  const auto it = index_.find(exponents);
  if (it == index_.end())
    throw std::out_of_range("MonomialBasis: exponent vector outside degree bound");
  return it->second;
}

Eigen::MatrixXd PseudoExpectation::moment_matrix() const {
  const int side = basis->matrix_side();
  Eigen::MatrixXd m(side, side);
  for (int r = 0; r < side; ++r)
    for (int c = 0; c < side; ++c) m(r, c) = moments[basis->entry_moment(r, c)];
  return m;
}

PseudoExpectationResiduals PseudoExpectation::residuals() const {
  PseudoExpectationResiduals res;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(moment_matrix());
  res.psd_violation = std::max(0.0, -eig.eigenvalues().minCoeff());
  res.normalization_residual =
      std::abs(moments[basis->index_of(std::vector<int>(basis->n(), 0))] - 1.0);

  const int n = basis->n();
  std::vector<int> bumped(n);
  for (int idx = 0; idx < basis->vector_size(); ++idx) {
    const auto& gamma = basis->monomial(idx);
    int total = 0;
    for (int e : gamma) total += e;
    if (total > degree - 2) continue;
    double value = -moments[idx];
    for (int i = 0; i < n; ++i) {
      bumped = gamma;
      bumped[i] += 2;
      value += moments[basis->index_of(bumped)];
    }
    res.ideal_residual = std::max(res.ideal_residual, std::abs(value));
  }
  return res;
}

PseudoExpectation point_mass_moments(const Eigen::VectorXd& x, int degree) {
  PseudoExpectation pe;
  pe.degree = degree;
  pe.basis = std::make_shared<MonomialBasis>(static_cast<int>(x.size()), degree);
  pe.moments.resize(pe.basis->vector_size());
  for (int idx = 0; idx < pe.basis->vector_size(); ++idx) {
    double v = 1.0;
    const auto& mono = pe.basis->monomial(idx);
    for (int i = 0; i < x.size(); ++i)
      for (int e = 0; e < mono[i]; ++e) v *= x[i];
    pe.moments[idx] = v;
  }
  return pe;
}

bool validate_pseudo_expectation(const PseudoExpectation& pe, double tol,
                                 PseudoExpectationResiduals* out) {
  const PseudoExpectationResiduals res = pe.residuals();
  if (out) *out = res;
  return res.psd_violation <= tol && res.ideal_residual <= tol &&
         res.normalization_residual <= tol;
}

MomentProblem build_certification_problem(const SymmetricTensor3& tensor, int degree,
                                          int matrix_side_cap) {
  if (degree % 2 != 0 || degree < 4)
    throw std::invalid_argument(
        "build_certification_problem: degree must be even and >= 4 (the "
        "objective has degree 3)");
  const int n = tensor.n();
  MomentProblem problem;
  problem.n = n;
  problem.degree = degree;
  problem.basis = std::make_shared<MonomialBasis>(n, degree);
  if (problem.basis->matrix_side() > matrix_side_cap)
    throw std::length_error("build_certification_problem: moment matrix side " +
                            std::to_string(problem.basis->matrix_side()) +
                            " exceeds cap " + std::to_string(matrix_side_cap));

  const SymmetricTensor3 dense = tensor.densify();
  const Eigen::VectorXd& entries = dense.dense_entries();
  problem.objective = Eigen::VectorXd::Zero(problem.basis->vector_size());
  std::vector<int> mono(n);
  for (int i = 0; i < n; ++i)
    for (int j = 0; j < n; ++j)
      for (int k = 0; k < n; ++k) {
        const double value = entries[dense_index(n, i, j, k)];
        if (value == 0.0) continue;
        std::fill(mono.begin(), mono.end(), 0);
        mono[i] += 1;
        mono[j] += 1;
        mono[k] += 1;
        problem.objective[problem.basis->index_of(mono)] += value;
        problem.objective_l1 += std::abs(value);
      }

  // Constraint rows: E[1] = 1 and E[(||x||^2 - 1) x^gamma] = 0 for every
  // |gamma| <= d - 2.
  std::vector<Eigen::VectorXd> rows;
  std::vector<double> rhs;
  {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(problem.basis->vector_size());
    row[problem.basis->index_of(std::vector<int>(n, 0))] = 1.0;
    rows.push_back(row);
    rhs.push_back(1.0);
  }
  std::vector<int> bumped(n);
  for (int idx = 0; idx < problem.basis->vector_size(); ++idx) {
    const auto& gamma = problem.basis->monomial(idx);
    int total = 0;
    for (int e : gamma) total += e;
    if (total > degree - 2) continue;
    Eigen::VectorXd row = Eigen::VectorXd::Zero(problem.basis->vector_size());
    row[idx] -= 1.0;
    for (int i = 0; i < n; ++i) {
      bumped = gamma;
      bumped[i] += 2;
      row[problem.basis->index_of(bumped)] += 1.0;
    }
    rows.push_back(row);
    rhs.push_back(0.0);
  }
  problem.constraints.resize(static_cast<Eigen::Index>(rows.size()),
                             problem.basis->vector_size());
  problem.rhs.resize(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t r = 0; r < rows.size(); ++r) {
    problem.constraints.row(static_cast<Eigen::Index>(r)) = rows[r].transpose();
    problem.rhs[static_cast<Eigen::Index>(r)] = rhs[r];
  }
  return problem;
}

namespace {

/// Shared scratch for the alternating-projection feasibility solves.
struct ProjectionContext {
  const MomentProblem& problem;
  Eigen::VectorXd group_sizes;  // matrix entries per moment index
  Eigen::MatrixXd e_scaled;     // E D^{-1}
  Eigen::LDLT<Eigen::MatrixXd> plain;      // E D^{-1} E^T
  Eigen::MatrixXd bordered_gram;           // same with the objective row added
  Eigen::LDLT<Eigen::MatrixXd> bordered;
  bool has_objective_row = false;

  explicit ProjectionContext(const MomentProblem& p) : problem(p) {
    const int side = p.basis->matrix_side();
    group_sizes = Eigen::VectorXd::Zero(p.basis->vector_size());
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c) group_sizes[p.basis->entry_moment(r, c)] += 1.0;
    // Moments of degree > d appear in no matrix entry only if the split
    // alpha+beta is impossible, which cannot happen for degree <= d.
    const Eigen::VectorXd inv = group_sizes.cwiseMax(1.0).cwiseInverse();
    e_scaled = p.constraints * inv.asDiagonal();
    plain.compute(e_scaled * p.constraints.transpose());
    const double c_norm = p.objective.norm();
    has_objective_row = c_norm > 1e-300;
    if (has_objective_row) {
      const Eigen::Index rows = p.constraints.rows();
      Eigen::MatrixXd a(rows + 1, p.constraints.cols());
      a.topRows(rows) = p.constraints;
      a.row(rows) = p.objective.transpose();
      const Eigen::MatrixXd a_scaled = a * inv.asDiagonal();
      bordered_gram = a_scaled * a.transpose();
      bordered.compute(bordered_gram);
    }
  }

  Eigen::VectorXd group_average(const Eigen::MatrixXd& x) const {
    Eigen::VectorXd sums = Eigen::VectorXd::Zero(problem.basis->vector_size());
    const int side = problem.basis->matrix_side();
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c) sums[problem.basis->entry_moment(r, c)] += x(r, c);
    return sums.cwiseQuotient(group_sizes.cwiseMax(1.0));
  }

  /// Weighted projection of y onto {Ey = f} and, when the level constraint
  /// is violated, onto {Ey = f, c^T y = theta}.
  Eigen::VectorXd project_affine(const Eigen::VectorXd& y, double theta) const {
    const Eigen::VectorXd inv = group_sizes.cwiseMax(1.0).cwiseInverse();
    Eigen::VectorXd residual = problem.constraints * y - problem.rhs;
    Eigen::VectorXd lambda = plain.solve(residual);
    Eigen::VectorXd projected =
        y - inv.asDiagonal() * (problem.constraints.transpose() * lambda);
    if (!has_objective_row) return projected;
    if (problem.objective.dot(projected) >= theta) return projected;
    Eigen::VectorXd res2(problem.constraints.rows() + 1);
    res2.head(problem.constraints.rows()) = problem.constraints * y - problem.rhs;
    res2[problem.constraints.rows()] = problem.objective.dot(y) - theta;
    Eigen::VectorXd lambda2 = bordered.solve(res2);
    Eigen::VectorXd correction =
        problem.constraints.transpose() * lambda2.head(problem.constraints.rows()) +
        problem.objective * lambda2[problem.constraints.rows()];
    return y - inv.asDiagonal() * correction;
  }

  Eigen::MatrixXd to_matrix(const Eigen::VectorXd& y) const {
    const int side = problem.basis->matrix_side();
    Eigen::MatrixXd x(side, side);
    for (int r = 0; r < side; ++r)
      for (int c = 0; c < side; ++c) x(r, c) = y[problem.basis->entry_moment(r, c)];
    return x;
  }
};

struct FeasibilityOutcome {
  bool feasible = false;
  int iterations = 0;
  double psd_violation = 0.0;
  Eigen::VectorXd moments;
};

FeasibilityOutcome solve_feasibility(const ProjectionContext& ctx, double theta,
                                     const Eigen::VectorXd& warm, double tol,
                                     int max_iter) {
  FeasibilityOutcome out;
  Eigen::VectorXd y = ctx.project_affine(warm, theta);
  double best_violation = std::numeric_limits<double>::infinity();
  for (int it = 0; it < max_iter; ++it) {
    ++out.iterations;
    Eigen::MatrixXd x = ctx.to_matrix(y);
    Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(x);
    const double min_eig = eig.eigenvalues().minCoeff();
    const double violation = std::max(0.0, -min_eig);
    if (violation < best_violation) {
      best_violation = violation;
      out.moments = y;
    }
    if (violation <= tol) {
      out.feasible = true;
      out.psd_violation = violation;
      out.moments = y;
      return out;
    }
    Eigen::VectorXd clipped = eig.eigenvalues().cwiseMax(0.0);
    const Eigen::MatrixXd psd =
        eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().transpose();
    y = ctx.project_affine(ctx.group_average(psd), theta);
  }
  out.psd_violation = best_violation;
  return out;
}

}  // namespace

std::pair<PseudoExpectation, SdpSolveReport> solve_moment_problem(
    const MomentProblem& problem, const SymmetricTensor3& tensor,
    const SdpOptions& opt) {
  // Certified lower end of the bisection: the best point value found by
  // ascent; its point mass is feasible, so OPT can never be classified
  // below it.
  RngStream seeds = RngStream(tensor.is_component_form() ? tensor.components().seed : 0)
                        .child("moment-sdp");
  double best_point_value = 0.0;
  Eigen::VectorXd best_point = Eigen::VectorXd::Unit(problem.n, 0);
  {
    RngStream s = seeds.child("ascent");
    for (int r = 0; r < opt.ascent_restarts; ++r) {
      Eigen::VectorXd x(problem.n);
      for (int i = 0; i < problem.n; ++i) x[i] = s.next_gaussian();
      if (x.norm() == 0.0) continue;
      x /= x.norm();
      for (int it = 0; it < opt.ascent_steps; ++it) {
        const double value = tensor.eval_cubic(x);
        if (value > best_point_value) {
          best_point_value = value;
          best_point = x;
        } else if (-value > best_point_value) {
          best_point_value = -value;
          best_point = -x;
        }
        Eigen::VectorXd y = tensor.contract(x);
        const double ny = y.norm();
        if (ny < 1e-14) break;
        y = y / ny;
        if ((y - x).norm() < 1e-13) { x = y; break; }
        x = y;
      }
      const double value = tensor.eval_cubic(x);
      if (value > best_point_value) {
        best_point_value = value;
        best_point = x;
      }
    }
  }

  ProjectionContext ctx(problem);
  double theta_lo = std::max(0.0, best_point_value);
  double theta_hi = std::max(problem.objective_l1, theta_lo);

  SdpSolveReport report;
  PseudoExpectation pe;
  pe.degree = problem.degree;
  pe.basis = problem.basis;
  pe.moments = point_mass_moments(best_point, problem.degree).moments;
  Eigen::VectorXd warm = pe.moments;
  bool any_feasible = false;

  // Verify the lower end before bisecting; the point mass makes this cheap.
  {
    const FeasibilityOutcome out =
        solve_feasibility(ctx, theta_lo, warm, opt.tol, opt.max_iter);
    report.iterations += out.iterations;
    if (out.feasible) {
      any_feasible = true;
      warm = out.moments;
      pe.moments = out.moments;
    }
  }

  for (int step = 0; step < opt.bisection_steps && theta_hi - theta_lo > 1e-14;
       ++step) {
    const double theta = 0.5 * (theta_lo + theta_hi);
    const FeasibilityOutcome out =
        solve_feasibility(ctx, theta, warm, opt.tol, opt.max_iter);
    report.iterations += out.iterations;
    if (out.feasible) {
      any_feasible = true;
      theta_lo = theta;
      warm = out.moments;
      pe.moments = out.moments;
    } else {
      theta_hi = theta;
    }
  }

  report.opt_value = problem.objective.dot(pe.moments);
  const PseudoExpectationResiduals res = pe.residuals();
  report.primal_residual = res.psd_violation;
  report.constraint_residual =
      std::max(res.ideal_residual, res.normalization_residual);
  report.status = (any_feasible && report.primal_residual <= 10.0 * opt.tol &&
                   report.constraint_residual <= 10.0 * opt.tol)
                      ? SdpStatus::kConverged
                      : SdpStatus::kMaxIter;
  return {std::move(pe), report};
}

SdpCertificate certify_via_sdp(const SymmetricTensor3& tensor, double threshold,
                               int degree, const SdpOptions& opt) {
  SdpCertificate cert;
  cert.threshold = threshold;
  const MomentProblem problem =
      build_certification_problem(tensor, degree, opt.matrix_side_cap);
  auto [pe, report] = solve_moment_problem(problem, tensor, opt);
  cert.report = report;
  cert.pseudo_expectation = std::move(pe);
  if (report.status != SdpStatus::kConverged) {
    cert.verdict = SdpVerdict::kUndecided;
    return cert;
  }
  cert.near_threshold = std::abs(report.opt_value - threshold) <= opt.tol;
  cert.verdict = report.opt_value <= threshold + opt.tol ? SdpVerdict::kYes
                                                         : SdpVerdict::kNo;
  return cert;
}

std::string SdpCertificate::to_json() const {
  nlohmann::json j;
  j["verdict"] = verdict == SdpVerdict::kYes
                     ? "YES"
                     : (verdict == SdpVerdict::kNo ? "NO" : "UNDECIDED");
  j["near_threshold"] = near_threshold;
  j["threshold"] = threshold;
  j["opt_value"] = report.opt_value;
  j["iterations"] = report.iterations;
  j["primal_residual"] = report.primal_residual;
  j["constraint_residual"] = report.constraint_residual;
  j["status"] = report.status == SdpStatus::kConverged
                    ? "converged"
                    : (report.status == SdpStatus::kMaxIter ? "max_iter"
                                                            : "infeasible-suspected");
  return j.dump(2);
}

}  // namespace tensorcert
