#include "tensorcert/decomposition.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <stdexcept>

#include "tensorcert/rng.hpp"

namespace tensorcert {

namespace {

Eigen::VectorXd random_unit(RngStream& s, int n) {
  Eigen::VectorXd v(n);
  double norm_sq;
  do {
    norm_sq = 0.0;
    for (int i = 0; i < n; ++i) {
      v[i] = s.next_gaussian();
      norm_sq += v[i] * v[i];
    }
  } while (norm_sq == 0.0);
  return v / std::sqrt(norm_sq);
}

}  // namespace

double residual_frobenius(const SymmetricTensor3& tensor, const Eigen::MatrixXd& rows) {
  const Eigen::MatrixXd g = rows * rows.transpose();
  double total = tensor.frobenius_sq() + g.array().cube().sum();
  for (Eigen::Index i = 0; i < rows.rows(); ++i)
    total -= 2.0 * tensor.eval_cubic(rows.row(i).transpose());
  return std::sqrt(std::max(total, 0.0));
}

AscendResult ascend(const SymmetricTensor3& tensor, const Eigen::VectorXd& x0,
                    int steps, double tol) {
  if (std::abs(x0.norm() - 1.0) > 1e-8)
    throw std::invalid_argument("ascend: start vector must be unit norm");
  AscendResult result;
  result.x = x0;
  for (int it = 0; it < steps; ++it) {
    Eigen::VectorXd y = tensor.contract(result.x);
    const double ny = y.norm();
    if (ny < 1e-14) {
      result.vanished = true;
      result.iterations = it;
      result.value = tensor.eval_cubic(result.x);
      return result;
    }
    y /= ny;
    const double moved = (y - result.x).norm();
    result.x = y;
    result.iterations = it + 1;
    if (moved <= tol) {
      result.converged = true;
      break;
    }
  }
  result.value = tensor.eval_cubic(result.x);
  return result;
}

namespace {

/// Shared state for the candidate engine and refinement sweeps: a pool of
/// rows X modelling T ~ sum_i x_i^{x3}, updated one row at a time by the
/// normalized contraction of the deflated residual T - sum_{j != i} x_j^{x3}.
struct Pool {
  const SymmetricTensor3& tensor;
  Eigen::MatrixXd x;  // rows

  Eigen::VectorXd residual_contract(int i, const Eigen::VectorXd& v) const {
    const Eigen::VectorXd cc = x * v;
    Eigen::VectorXd pool_part = x.transpose() * cc.array().square().matrix();
    const double ci = x.row(i).dot(v);
    pool_part -= (ci * ci) * x.row(i).transpose();
    return tensor.contract(v) - pool_part;
  }

  Eigen::MatrixXd residual_matrix(int i, const Eigen::VectorXd& v) const {
    const Eigen::VectorXd cc = x * v;
    Eigen::MatrixXd out = tensor.contract_matrix(v);
    out -= x.transpose() * cc.asDiagonal() * x;
    out += x.row(i).dot(v) * (x.row(i).transpose() * x.row(i));
    return out;
  }

  /// One cyclic sweep with damping eta; returns the largest row movement.
  double sweep(double eta) {
    double move = 0.0;
    for (Eigen::Index i = 0; i < x.rows(); ++i) {
      Eigen::VectorXd r = residual_contract(static_cast<int>(i), x.row(i).transpose());
      const double nr = r.norm();
      if (nr < 1e-14) continue;
      Eigen::VectorXd target = r / nr;
      if (eta < 1.0) {
        target = x.row(i).transpose() + eta * (target - x.row(i).transpose());
        const double nt = target.norm();
        if (nt < 1e-14) continue;
        target /= nt;
      }
      move = std::max(move, (target - x.row(i).transpose()).norm());
      x.row(i) = target.transpose();
    }
    return move;
  }
};

}  // namespace

ExtractionResult extract_components(const SymmetricTensor3& tensor, int m,
                                    const ExtractionConfig& config) {
  if (m < 1) throw std::invalid_argument("extract_components: m >= 1 required");
  const int n = tensor.n();
  RngStream root = RngStream(config.seed).child("extract");
  RngStream reseed = root.child("reseed");

  Pool pool{tensor, Eigen::MatrixXd(m, n)};
  for (int i = 0; i < m; ++i)
    pool.x.row(i) = random_unit(reseed, n).transpose();

  ExtractionResult result;
  result.restarts_per_slot.assign(m, 0);

  const double noise_fro =
      tensor.has_noise() ? std::sqrt(tensor.noise()->squaredNorm()) : 0.0;
  const double residual_backstop = noise_fro + 0.5;

  int budget_exceeded_slot = -1;
  bool clean = false;
  for (int round = 0; round < config.max_rounds && budget_exceeded_slot < 0; ++round) {
    const bool last_chance = clean;  // previous round was gate-clean
    for (int s = 0; s < config.ascent_steps; ++s) {
      ++result.sweeps;
      if (pool.sweep(1.0) < (last_chance ? config.ascent_tol : 1e-8)) break;
    }

    // Gate stack: residual Rayleigh band, value, pairwise deflation,
    // residual rank-1 shape.
    std::set<int> bad;
    Eigen::VectorXd q(m);
    for (int i = 0; i < m; ++i) {
      const Eigen::VectorXd xi = pool.x.row(i).transpose();
      q[i] = xi.dot(pool.residual_contract(i, xi));
      if (std::abs(q[i] - 1.0) > config.quality_band) bad.insert(i);
      else if (tensor.eval_cubic(xi) < config.accept_threshold) bad.insert(i);
    }
    const Eigen::MatrixXd gram = pool.x * pool.x.transpose();
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < m; ++j) {
        if (j == i) continue;
        const double c2 = gram(i, j) * gram(i, j);
        if (c2 > config.deflation_threshold_sq &&
            std::abs(q[i] - 1.0) >= std::abs(q[j] - 1.0)) {
          bad.insert(i);
          break;
        }
      }
    }
    for (int i = 0; i < m && static_cast<int>(bad.size()) < m; ++i) {
      if (bad.count(i)) continue;
      const Eigen::VectorXd xi = pool.x.row(i).transpose();
      Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(pool.residual_matrix(i, xi));
      const Eigen::VectorXd abs_eigs = eig.eigenvalues().cwiseAbs();
      double l1 = 0.0, l2 = 0.0;
      for (Eigen::Index k = 0; k < abs_eigs.size(); ++k) {
        if (abs_eigs[k] > l1) { l2 = l1; l1 = abs_eigs[k]; }
        else if (abs_eigs[k] > l2) l2 = abs_eigs[k];
      }
      if (l2 > config.residual_rank_ratio * l1) bad.insert(i);
    }

    if (bad.empty()) {
      const double rf = residual_frobenius(tensor, pool.x);
      if (rf <= residual_backstop) {
        if (clean) break;  // converged at full tolerance on this pass
        clean = true;
        continue;  // one more pass at full ascent tolerance
      }
      // Gates are blind but the model does not reproduce the tensor:
      // recycle the least consistent rows.
      std::vector<int> order(m);
      std::iota(order.begin(), order.end(), 0);
      std::sort(order.begin(), order.end(), [&](int a, int b) {
        return std::abs(q[a] - 1.0) > std::abs(q[b] - 1.0);
      });
      for (int k = 0; k < std::min(3, m); ++k) bad.insert(order[k]);
    }
    clean = false;

    for (int i : bad) {
      pool.x.row(i) = random_unit(reseed, n).transpose();
      if (++result.restarts_per_slot[i] > config.restarts_per_component) {
        budget_exceeded_slot = i;
        break;
      }
    }
  }

  // Emission through the literal gates, in pool order.
  std::vector<int> accepted;
  for (int i = 0; i < m; ++i) {
    const Eigen::VectorXd xi = pool.x.row(i).transpose();
    const double value = tensor.eval_cubic(xi);
    bool ok = value >= config.accept_threshold;
    for (int j : accepted) {
      const double ip = pool.x.row(j).dot(pool.x.row(i));
      if (ip * ip > config.deflation_threshold_sq) ok = false;
    }
    if (!ok) continue;
    accepted.push_back(i);
    result.values.push_back(value);
  }

  result.components.resize(static_cast<Eigen::Index>(accepted.size()), n);
  for (std::size_t k = 0; k < accepted.size(); ++k)
    result.components.row(static_cast<Eigen::Index>(k)) = pool.x.row(accepted[k]);
  result.stalled = static_cast<int>(accepted.size()) < m;
  result.stall_index = result.stalled
                           ? (budget_exceeded_slot >= 0 ? budget_exceeded_slot
                                                        : static_cast<int>(accepted.size()))
                           : -1;
  result.residual_fro = residual_frobenius(tensor, result.components);
  return result;
}

RefineResult refine(const SymmetricTensor3& tensor, Eigen::MatrixXd initial,
                    int max_sweeps, double tol) {
  for (Eigen::Index i = 0; i < initial.rows(); ++i)
    if (std::abs(initial.row(i).norm() - 1.0) > 1e-8)
      throw std::invalid_argument("refine: initial rows must be unit norm");

  RefineResult result;
  Pool pool{tensor, std::move(initial)};
  double residual = residual_frobenius(tensor, pool.x);
  double eta = 1.0;
  Eigen::MatrixXd best = pool.x;
  double best_residual = residual;

  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    const Eigen::MatrixXd before = pool.x;
    const double move = pool.sweep(eta);
    const double after = residual_frobenius(tensor, pool.x);
    ++result.sweeps;
    if (after > residual * (1.0 + 1e-12) + 1e-15) {
      pool.x = before;  // reject the sweep and damp
      eta *= 0.5;
      if (eta < 1e-3) {
        result.diverged = true;
        break;
      }
      continue;
    }
    residual = after;
    eta = std::min(1.0, eta * 2.0);
    if (residual < best_residual) {
      best_residual = residual;
      best = pool.x;
    }
    if (move <= tol) break;
  }

  result.components = result.diverged ? best : pool.x;
  result.residual_fro = result.diverged ? best_residual : residual;
  return result;
}

namespace {

/// Kuhn's augmenting-path bipartite matching restricted to pairs with
/// distance <= limit. Returns m on success.
int matching_size(const Eigen::MatrixXd& dist, double limit, std::vector<int>* match_out) {
  const int m = static_cast<int>(dist.rows());
  std::vector<int> match_found(m, -1);  // found column -> truth row
  int matched = 0;
  for (int i = 0; i < m; ++i) {
    std::vector<char> visited(m, 0);
    std::function<bool(int)> try_row = [&](int row) -> bool {
      for (int j = 0; j < m; ++j) {
        if (visited[j] || dist(row, j) > limit) continue;
        visited[j] = 1;
        if (match_found[j] < 0 || try_row(match_found[j])) {
          match_found[j] = row;
          return true;
        }
      }
      return false;
    };
    if (try_row(i)) ++matched;
  }
  if (match_out) {
    match_out->assign(m, -1);
    for (int j = 0; j < m; ++j)
      if (match_found[j] >= 0) (*match_out)[match_found[j]] = j;
  }
  return matched;
}

}  // namespace

Matching match_components(const Eigen::MatrixXd& found, const Eigen::MatrixXd& truth) {
  if (found.rows() != truth.rows() || found.cols() != truth.cols())
    throw std::invalid_argument("match_components: shape mismatch");
  const int m = static_cast<int>(truth.rows());
  Eigen::MatrixXd dist(m, m);
  for (int i = 0; i < m; ++i)
    for (int j = 0; j < m; ++j)
      dist(i, j) = (truth.row(i) - found.row(j)).norm();

  // Bottleneck assignment: binary search the sorted distance values for the
  // smallest limit admitting a perfect matching.
  std::vector<double> values(dist.data(), dist.data() + dist.size());
  std::sort(values.begin(), values.end());
  values.erase(std::unique(values.begin(), values.end()), values.end());
  int lo = 0, hi = static_cast<int>(values.size()) - 1;
  while (lo < hi) {
    const int mid = (lo + hi) / 2;
    if (matching_size(dist, values[mid], nullptr) == m) hi = mid;
    else lo = mid + 1;
  }
  Matching result;
  matching_size(dist, values[lo], &result.permutation);
  result.distances.resize(m);
  for (int i = 0; i < m; ++i) result.distances[i] = dist(i, result.permutation[i]);
  result.bottleneck = result.distances.maxCoeff();
  return result;
}

HolderDiagnostic holder_diagnostic(const Eigen::VectorXd& candidate,
                                   const ComponentSet& truth, int k, double eps,
                                   double delta) {
  if (k < 2 || k % 2 != 0)
    throw std::invalid_argument("holder_diagnostic: k must be a positive even integer");
  HolderDiagnostic diag;
  diag.k = k;
  const Eigen::VectorXd corr = truth.vectors * candidate;
  for (int i = 0; i < truth.m; ++i) {
    const double power = std::pow(corr[i], k);
    if (power > diag.correlation_power) {
      diag.correlation_power = power;
      diag.best_component_index = i;
    }
  }
  diag.passes = diag.correlation_power >= std::exp(-(2.0 * eps + delta) * k);
  return diag;
}

}  // namespace tensorcert
