#include "tensorcert/concentration.hpp"

#include <algorithm>
#include <cmath>
#include <nlohmann/json.hpp>
#include <sstream>
#include <stdexcept>

#include "tensorcert/certificate.hpp"
#include "tensorcert/instances.hpp"
#include "tensorcert/parallel.hpp"
#include "tensorcert/rng.hpp"

namespace tensorcert {

double quantile(std::vector<double> values, double q) {
  if (values.empty()) throw std::invalid_argument("quantile of empty sample");
  std::sort(values.begin(), values.end());
  const double pos = q * static_cast<double>(values.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = static_cast<std::size_t>(std::ceil(pos));
  const double frac = pos - static_cast<double>(lo);
  return values[lo] * (1.0 - frac) + values[hi] * frac;
}

LinearOperator build_signed_cross_operator(const ComponentSet& components,
                                           const Eigen::VectorXd& sigma,
                                           const Eigen::VectorXd& tau) {
  if (sigma.size() != components.m || tau.size() != components.m)
    throw std::invalid_argument("signed cross operator: sign vectors must have length m");
  const int n = components.n;
  auto a = std::make_shared<Eigen::MatrixXd>(components.vectors);
  auto w = std::make_shared<Eigen::MatrixXd>(
      (sigma * tau.transpose()).cwiseProduct(*a * a->transpose()));
  w->diagonal().setZero();

  LinearOperator op;
  op.rows = static_cast<Eigen::Index>(n) * n;
  op.cols = op.rows;
  op.apply = [a, w, n](const Eigen::VectorXd& y) -> Eigen::VectorXd {
    Eigen::Map<const Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                                   Eigen::RowMajor>>
        ymat(y.data(), n, n);
    const Eigen::MatrixXd u = *a * ymat * a->transpose();
    const Eigen::MatrixXd z = a->transpose() * w->cwiseProduct(u) * *a;
    Eigen::VectorXd out(static_cast<Eigen::Index>(n) * n);
    Eigen::Map<Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic,
                             Eigen::RowMajor>>(out.data(), n, n) = z;
    return out;
  };
  return op;
}

DecouplingSummary decoupling_experiment(int n, int m, int trials,
                                        std::uint64_t seed, double tol,
                                        int threads) {
  if (trials < 1) throw std::invalid_argument("decoupling_experiment: trials >= 1");
  // Components are drawn once and held fixed; only the signs resample.
  const Instance instance =
      sample_instance(n, m, Ensemble::kRademacherNormalized, seed);
  RngStream root = RngStream(seed).child("decoupling");

  DecouplingSummary summary;
  summary.samples.resize(trials);
  parallel_for(trials, threads, [&](int t) {
    RngStream s = root.child(static_cast<std::uint64_t>(t));
    Eigen::VectorXd sigma(m), tau(m);
    for (int i = 0; i < m; ++i) sigma[i] = s.next_sign();
    for (int i = 0; i < m; ++i) tau[i] = s.next_sign();
    SpectralOptions opt;
    opt.tol = tol;
    opt.seed = s.child("norms").key();
    DecoupledSample sample;
    sample.norm_coupled =
        spectral_norm(build_signed_cross_operator(instance.components, sigma, sigma), opt)
            .value;
    sample.norm_decoupled =
        spectral_norm(build_signed_cross_operator(instance.components, sigma, tau), opt)
            .value;
    sample.sigma = std::move(sigma);
    sample.tau = std::move(tau);
    summary.samples[t] = std::move(sample);
  });

  std::vector<double> coupled, decoupled;
  coupled.reserve(trials);
  decoupled.reserve(trials);
  for (const auto& s : summary.samples) {
    coupled.push_back(s.norm_coupled);
    decoupled.push_back(s.norm_decoupled);
  }
  auto ratio = [&](double q) {
    const double num = quantile(coupled, q);
    const double den = quantile(decoupled, q);
    if (num < 1e-12 && den < 1e-12) return 1.0;  // orthonormal convention
    return num / std::max(den, 1e-300);
  };
  summary.ratio_median = ratio(0.5);
  summary.ratio_q90 = ratio(0.9);
  return summary;
}

double bernstein_tail(int d, double r, double sigma_sq, double t) {
  if (d < 1) throw std::invalid_argument("bernstein_tail: d >= 1");
  if (r <= 0.0) throw std::invalid_argument("bernstein_tail: R > 0");
  if (sigma_sq < 0.0) throw std::invalid_argument("bernstein_tail: sigma^2 >= 0");
  if (t < 0.0) throw std::invalid_argument("bernstein_tail: t >= 0");
  const double denom = sigma_sq + r * t / 3.0;
  const double value =
      denom == 0.0 ? (t == 0.0 ? static_cast<double>(d) : 0.0)
                   : static_cast<double>(d) * std::exp(-(t * t / 2.0) / denom);
  return std::clamp(value, 0.0, 1.0);
}

namespace {

Eigen::MatrixXd dense_t_i(const ComponentSet& components, const Eigen::VectorXd& tau,
                          int index) {
  const Eigen::MatrixXd& a = components.vectors;
  const int n = components.n;
  Eigen::MatrixXd t_i = Eigen::MatrixXd::Zero(static_cast<Eigen::Index>(n) * n,
                                              static_cast<Eigen::Index>(n) * n);
  const Eigen::MatrixXd outer_i = a.row(index).transpose() * a.row(index);
  for (int j = 0; j < components.m; ++j) {
    if (j == index) continue;
    const double g = a.row(index).dot(a.row(j));
    const Eigen::MatrixXd outer_j = a.row(j).transpose() * a.row(j);
    t_i += tau[j] * g * kronecker(outer_i, outer_j);
  }
  return t_i;
}

Eigen::MatrixXd right_factor(const ComponentSet& components, const Eigen::VectorXd& tau,
                             int index) {
  const Eigen::MatrixXd& a = components.vectors;
  Eigen::MatrixXd w = Eigen::MatrixXd::Zero(components.n, components.n);
  for (int j = 0; j < components.m; ++j) {
    if (j == index) continue;
    const double g = a.row(index).dot(a.row(j));
    w += tau[j] * g * (a.row(j).transpose() * a.row(j));
  }
  return w;
}

double spectral_norm_dense_sym(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  return eig.eigenvalues().cwiseAbs().maxCoeff();
}

}  // namespace

double t_i_right_factor_norm(const ComponentSet& components,
                             const Eigen::VectorXd& tau, int index) {
  return spectral_norm_dense_sym(right_factor(components, tau, index));
}

DominationCheck t_i_domination_check(const ComponentSet& components,
                                     const Eigen::VectorXd& tau, int index,
                                     double bound_coefficient) {
  if (components.n > 25)
    throw std::length_error("t_i_domination_check: dense n^2 eigensolve capped at n <= 25");
  if (tau.size() != components.m)
    throw std::invalid_argument("t_i_domination_check: tau must have length m");
  const int n = components.n;
  const Eigen::MatrixXd outer_i =
      components.vectors.row(index).transpose() * components.vectors.row(index);
  const Eigen::MatrixXd gap =
      bound_coefficient * kronecker(outer_i, Eigen::MatrixXd::Identity(n, n)) -
      dense_t_i(components, tau, index);
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gap);
  DominationCheck check;
  check.margin = eig.eigenvalues().minCoeff();
  check.holds = check.margin >= -1e-10;
  return check;
}

bool kronecker_psd_check(const Eigen::MatrixXd& p, const Eigen::MatrixXd& q,
                         const Eigen::MatrixXd& r, int probes, std::uint64_t seed) {
  const Eigen::MatrixXd diff = q - p;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hyp1(diff);
  if (hyp1.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("kronecker_psd_check: hypothesis P <= Q fails");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> hyp2(r);
  if (hyp2.eigenvalues().minCoeff() < -1e-10)
    throw std::invalid_argument("kronecker_psd_check: hypothesis R psd fails");

  const Eigen::MatrixXd gap = kronecker(r, diff);
  RngStream stream = RngStream(seed).child("kron-psd");
  for (int t = 0; t < probes; ++t) {
    Eigen::VectorXd y(gap.rows());
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] = stream.next_gaussian();
    const double norm = y.norm();
    if (norm == 0.0) continue;
    y /= norm;
    if (y.dot(gap * y) < -1e-10) return false;
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(gap);
  return eig.eigenvalues().minCoeff() >= -1e-10;
}

BernsteinCheck bernstein_empirical_check(const ComponentSet& components,
                                         BernsteinFamily family, int index,
                                         int trials, int grid_points,
                                         std::uint64_t seed, int threads) {
  if (trials < 1 || grid_points < 1)
    throw std::invalid_argument("bernstein_empirical_check: trials, grid_points >= 1");
  const int n = components.n;
  const int m = components.m;
  const Eigen::MatrixXd& a = components.vectors;
  RngStream root = RngStream(seed).child("bernstein");

  BernsteinCheck check;
  std::vector<double> norms(trials);

  if (family == BernsteinFamily::kRightFactor) {
    check.dimension = n;
    // R = max_j ||<a_i,a_j> a_j a_j^T|| = max_j |<a_i,a_j>| for unit rows.
    double r = 0.0;
    Eigen::MatrixXd variance = Eigen::MatrixXd::Zero(n, n);
    for (int j = 0; j < m; ++j) {
      if (j == index) continue;
      const double g = a.row(index).dot(a.row(j));
      r = std::max(r, std::abs(g));
      variance += g * g * (a.row(j).transpose() * a.row(j));
    }
    check.r = r;
    check.sigma_sq = spectral_norm_dense_sym(variance);
    parallel_for(trials, threads, [&](int t) {
      RngStream s = root.child(static_cast<std::uint64_t>(t));
      Eigen::VectorXd tau(m);
      for (int j = 0; j < m; ++j) tau[j] = s.next_sign();
      norms[t] = spectral_norm_dense_sym(right_factor(components, tau, index));
    });
  } else {
    if (n > 12)
      throw std::length_error("bernstein_empirical_check: sigma-T family needs n <= 12");
    check.dimension = n * n;
    // tau is drawn once; the randomness under test is sigma.
    RngStream tau_stream = root.child("tau");
    Eigen::VectorXd tau(m);
    for (int j = 0; j < m; ++j) tau[j] = tau_stream.next_sign();
    std::vector<Eigen::MatrixXd> t_mats;
    t_mats.reserve(m);
    double r = 0.0;
    Eigen::MatrixXd variance = Eigen::MatrixXd::Zero(n * n, n * n);
    for (int i = 0; i < m; ++i) {
      t_mats.push_back(dense_t_i(components, tau, i));
      r = std::max(r, spectral_norm_dense_sym(t_mats.back()));
      variance += t_mats.back() * t_mats.back();
    }
    check.r = r;
    check.sigma_sq = spectral_norm_dense_sym(variance);
    parallel_for(trials, threads, [&](int t) {
      RngStream s = root.child(static_cast<std::uint64_t>(t));
      Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(n * n, n * n);
      for (int i = 0; i < m; ++i) sum += s.next_sign() * t_mats[i];
      norms[t] = spectral_norm_dense_sym(sum);
    });
  }

  // Grid out to where the bound itself becomes small, so the table shows
  // both the observable range and the deep-tail domination.
  double t_informative = 0.0;
  {
    double lo = 0.0, hi = 1.0;
    while (bernstein_tail(check.dimension, check.r, check.sigma_sq, hi) > 1e-2)
      hi *= 2.0;
    for (int it = 0; it < 60; ++it) {
      const double mid = 0.5 * (lo + hi);
      if (bernstein_tail(check.dimension, check.r, check.sigma_sq, mid) > 1e-2)
        lo = mid;
      else
        hi = mid;
    }
    t_informative = hi;
  }
  const double t_max =
      std::max(1.25 * *std::max_element(norms.begin(), norms.end()), t_informative);
  for (int g = 1; g <= grid_points; ++g) {
    BernsteinRow row;
    row.t = t_max * static_cast<double>(g) / static_cast<double>(grid_points);
    int count = 0;
    for (double v : norms)
      if (v >= row.t) ++count;
    row.empirical_tail = static_cast<double>(count) / static_cast<double>(trials);
    row.bound = bernstein_tail(check.dimension, check.r, check.sigma_sq, row.t);
    if (row.empirical_tail > row.bound) check.dominated = false;
    check.rows.push_back(row);
  }
  return check;
}

namespace {

std::optional<SlopeFit> fit_slope(const std::vector<std::pair<double, double>>& points) {
  if (points.size() < 3) return std::nullopt;
  const auto count = static_cast<double>(points.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [x, y] : points) {
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  const double denom = count * sxx - sx * sx;
  if (std::abs(denom) < 1e-12) return std::nullopt;
  SlopeFit fit;
  fit.slope = (count * sxy - sx * sy) / denom;
  fit.points = static_cast<int>(points.size());
  const double intercept = (sy - fit.slope * sx) / count;
  double ss_res = 0.0;
  for (const auto& [x, y] : points) {
    const double e = y - (intercept + fit.slope * x);
    ss_res += e * e;
  }
  if (points.size() > 2) {
    const double se =
        std::sqrt(ss_res / (count - 2.0) / (sxx - sx * sx / count));
    fit.half_width = 1.96 * se;
  }
  return fit;
}

}  // namespace

ScalingRun scaling_experiment(const std::vector<std::pair<int, int>>& grid,
                              int trials, std::uint64_t seed, double tol,
                              int threads) {
  ScalingRun run;
  run.cells.resize(grid.size());
  RngStream root = RngStream(seed).child("scaling");

  for (std::size_t c = 0; c < grid.size(); ++c) {
    auto& cell = run.cells[c];
    cell.n = grid[c].first;
    cell.m = grid[c].second;
    cell.cross_term_norms.resize(trials);
    cell.gersh_minus_one.resize(trials);
    cell.a_norm_sq.resize(trials);
    cell.ascent_estimates.resize(trials);
    RngStream cell_stream = root.child(static_cast<std::uint64_t>(c));
    parallel_for(trials, threads, [&](int t) {
      const std::uint64_t inst_seed = cell_stream.child(static_cast<std::uint64_t>(t)).key();
      const Instance inst =
          sample_instance(cell.n, cell.m, Ensemble::kRademacherNormalized, inst_seed);
      cell.cross_term_norms[t] = cross_term_norm(inst.components, tol);
      cell.gersh_minus_one[t] = gram_cubed_bound(inst.components) - 1.0;
      const InstanceStats stats = instance_stats(inst.components, tol);
      cell.a_norm_sq[t] = stats.a_norm_sq;
      cell.ascent_estimates[t] = ascent_injective_estimate(inst.tensor, 8, 300, inst_seed);
    });
  }

  // Slope (a)/(c): cells sharing the most common n, distinct m.
  int mode_n = 0, mode_count = 0;
  for (const auto& cell : run.cells) {
    int count = 0;
    for (const auto& other : run.cells)
      if (other.n == cell.n) ++count;
    if (count > mode_count) {
      mode_count = count;
      mode_n = cell.n;
    }
  }
  std::vector<std::pair<double, double>> cross_m, gersh_m, cross_n;
  for (auto& cell : run.cells) {
    const double med_cross = quantile(cell.cross_term_norms, 0.5);
    const double med_gersh = quantile(cell.gersh_minus_one, 0.5);
    if (cell.n == mode_n) {
      cross_m.emplace_back(std::log(static_cast<double>(cell.m)), std::log(med_cross));
      if (med_gersh > 0.0)
        gersh_m.emplace_back(std::log(static_cast<double>(cell.m)), std::log(med_gersh));
    }
    if (cell.n == cell.m)
      cross_n.emplace_back(std::log(static_cast<double>(cell.n)), std::log(med_cross));
  }
  run.cross_vs_m = fit_slope(cross_m);
  run.gersh_vs_m = fit_slope(gersh_m);
  run.cross_vs_n_at_m_eq_n = fit_slope(cross_n);
  return run;
}

std::string ScalingRun::to_csv() const {
  std::ostringstream out;
  out << "n,m,trial,cross_term_norm,gersh_minus_one,a_norm_sq,ascent_estimate\n";
  out.precision(17);
  for (const auto& cell : cells)
    for (std::size_t t = 0; t < cell.cross_term_norms.size(); ++t)
      out << cell.n << ',' << cell.m << ',' << t << ',' << cell.cross_term_norms[t]
          << ',' << cell.gersh_minus_one[t] << ',' << cell.a_norm_sq[t] << ','
          << cell.ascent_estimates[t] << '\n';
  return out.str();
}

std::string ScalingRun::summary_json() const {
  nlohmann::json j;
  auto slope_json = [](const std::optional<SlopeFit>& fit) -> nlohmann::json {
    if (!fit) return nullptr;
    return {{"slope", fit->slope}, {"half_width", fit->half_width}, {"points", fit->points}};
  };
  j["cross_vs_m"] = slope_json(cross_vs_m);
  j["cross_vs_n_at_m_eq_n"] = slope_json(cross_vs_n_at_m_eq_n);
  j["gersh_vs_m"] = slope_json(gersh_vs_m);
  nlohmann::json cells_json = nlohmann::json::array();
  for (const auto& cell : cells) {
    nlohmann::json cj;
    cj["n"] = cell.n;
    cj["m"] = cell.m;
    auto quartiles = [](const std::vector<double>& v) -> nlohmann::json {
      return {{"q25", quantile(v, 0.25)}, {"median", quantile(v, 0.5)},
              {"q75", quantile(v, 0.75)}};
    };
    cj["cross_term_norm"] = quartiles(cell.cross_term_norms);
    cj["gersh_minus_one"] = quartiles(cell.gersh_minus_one);
    cj["a_norm_sq"] = quartiles(cell.a_norm_sq);
    cj["ascent_estimate"] = quartiles(cell.ascent_estimates);
    cells_json.push_back(cj);
  }
  j["cells"] = cells_json;
  return j.dump(2);
}

}  // namespace tensorcert
