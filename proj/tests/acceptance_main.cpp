// Acceptance suite: one criterion per function, one pass/fail line each.
// Every criterion is a pure function of fixed seeds; the final criterion
// re-runs the others and demands byte-identical canonical transcripts.

#include <Eigen/Dense>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "tensorcert/certificate.hpp"
#include "tensorcert/concentration.hpp"
#include "tensorcert/decomposition.hpp"
#include "tensorcert/instances.hpp"
#include "tensorcert/moment_sdp.hpp"
#include "tensorcert/parallel.hpp"
#include "tensorcert/rng.hpp"

using namespace tensorcert;

namespace {

struct Criterion {
  bool pass = true;
  std::string detail;
  std::string canonical;
};

std::string hex(double v) {
  char buffer[64];
  std::snprintf(buffer, sizeof(buffer), "%a", v);
  return buffer;
}

std::uint64_t sub_seed(const char* tag, std::uint64_t index) {
  return RngStream(2026).child("acceptance").child(tag).child(index).key();
}

// --- criterion 1: orthonormal exactness ------------------------------------

Criterion criterion1() {
  Criterion c;
  std::ostringstream canon, detail;
  double worst_bound_err = 0.0, worst_dist = 0.0;
  for (int n : {5, 20, 50}) {
    ComponentSet set;
    set.n = n;
    set.m = n;
    set.vectors = Eigen::MatrixXd::Identity(n, n);
    set.seed = sub_seed("c1", static_cast<std::uint64_t>(n));
    const SymmetricTensor3 tensor = SymmetricTensor3::from_components(set);

    CertifyOptions opt;
    opt.tol = 1e-9;
    const CertificateReport report = certify(tensor, opt);
    worst_bound_err = std::max(worst_bound_err, std::abs(report.bound - 1.0));

    ExtractionConfig config;
    config.seed = set.seed;
    const ExtractionResult extraction = extract_components(tensor, n, config);
    if (extraction.stalled) {
      c.pass = false;
      detail << " extraction stalled at n=" << n << ";";
      continue;
    }
    const RefineResult refined = refine(tensor, extraction.components, 100, 1e-14);
    const Matching match = match_components(refined.components, set.vectors);
    worst_dist = std::max(worst_dist, match.bottleneck);
    canon << n << ":" << hex(report.bound) << ":" << hex(match.bottleneck) << ";";
  }
  c.pass = c.pass && worst_bound_err <= 1e-9 && worst_dist <= 1e-8;
  detail << "max |bound-1| = " << worst_bound_err << ", max component distance = "
         << worst_dist;
  c.detail = detail.str();
  c.canonical = canon.str();
  return c;
}

// --- criterion 2: in-regime certification ----------------------------------

Criterion criterion2() {
  Criterion c;
  const int n = 200;
  std::vector<int> ms = {200, 400};
  std::vector<std::vector<double>> bounds(2, std::vector<double>(10));
  std::vector<std::pair<int, int>> jobs;
  for (int mi = 0; mi < 2; ++mi)
    for (int s = 0; s < 10; ++s) jobs.emplace_back(mi, s);
  parallel_for(static_cast<int>(jobs.size()), 0, [&](int j) {
    const auto [mi, s] = jobs[j];
    const std::uint64_t seed = sub_seed("c2", static_cast<std::uint64_t>(mi * 100 + s));
    const Instance inst =
        sample_instance(n, ms[mi], Ensemble::kRademacherNormalized, seed);
    CertifyOptions opt;
    opt.tol = 1e-6;
    bounds[mi][s] = certify(inst.tensor, opt).bound;
  });
  double worst = 0.0;
  std::ostringstream canon;
  for (int mi = 0; mi < 2; ++mi)
    for (double b : bounds[mi]) {
      worst = std::max(worst, b);
      canon << hex(b) << ";";
    }
  const double med200 = quantile(bounds[0], 0.5);
  const double med400 = quantile(bounds[1], 0.5);
  c.pass = worst <= 1.8 && med400 > med200;
  std::ostringstream detail;
  detail << "max bound = " << worst << " (<= 1.8), median m=200: " << med200
         << ", median m=400: " << med400 << " (monotone in m)";
  c.detail = detail.str();
  c.canonical = canon.str();
  return c;
}

// --- criterion 3: certificate soundness ------------------------------------

Criterion criterion3() {
  Criterion c;
  struct Job {
    int n, m;
    std::uint64_t seed;
  };
  std::vector<Job> jobs;
  std::uint64_t counter = 0;
  for (int n : {20, 50, 100}) {
    const int m_top = static_cast<int>(std::lround(2.0 * std::pow(n, 1.4)));
    const std::vector<std::pair<int, int>> plan = {
        {n / 2, 3}, {n, 3}, {2 * n, 2}, {m_top, 2}};
    for (const auto& [m, count] : plan)
      for (int k = 0; k < count; ++k) jobs.push_back({n, m, sub_seed("c3", counter++)});
  }
  std::vector<double> bound(jobs.size()), witness(jobs.size());
  parallel_for(static_cast<int>(jobs.size()), 0, [&](int j) {
    const Instance inst =
        sample_instance(jobs[j].n, jobs[j].m, Ensemble::kRademacherNormalized,
                        jobs[j].seed);
    CertifyOptions opt;
    opt.tol = 1e-6;
    bound[j] = certify(inst.tensor, opt).bound;
    witness[j] = ascent_injective_estimate(inst.tensor, 50, 300, jobs[j].seed);
  });
  int violations = 0;
  double min_margin = 1e300;
  std::ostringstream canon;
  for (std::size_t j = 0; j < jobs.size(); ++j) {
    const double margin = bound[j] - witness[j];
    min_margin = std::min(min_margin, margin);
    if (margin < -1e-8) ++violations;
    canon << hex(bound[j]) << ":" << hex(witness[j]) << ";";
  }
  c.pass = violations == 0;
  std::ostringstream detail;
  detail << jobs.size() << " instances spanning n in {20,50,100}, m up to 2n^1.4; "
         << violations << " soundness violations, min (bound - witness) = " << min_margin;
  c.detail = detail.str();
  c.canonical = canon.str();
  return c;
}

// --- criteria 4 and 5: decomposition recovery, noiseless and noisy ----------

Criterion recovery_criterion(const char* tag, double noise_target, double pre_tol,
                             double post_tol) {
  Criterion c;
  std::vector<double> pre(3), post(3), residual(3);
  std::vector<char> stalled(3, 0);
  parallel_for(3, 0, [&](int s) {
    const std::uint64_t seed = sub_seed(tag, static_cast<std::uint64_t>(s));
    const Instance inst = sample_instance(50, 100, Ensemble::kRademacherNormalized, seed);
    SymmetricTensor3 tensor = inst.tensor;
    if (noise_target > 0.0) tensor = add_noise(tensor, NoiseSpec{noise_target, seed});
    ExtractionConfig config;
    config.seed = seed;
    config.accept_threshold = 0.6;       // finite-size thresholds; see README
    config.deflation_threshold_sq = 0.5;
    const ExtractionResult extraction = extract_components(tensor, 100, config);
    if (extraction.stalled || extraction.components.rows() != 100) {
      stalled[s] = 1;
      return;
    }
    pre[s] = match_components(extraction.components, inst.components.vectors).bottleneck;
    const RefineResult refined = refine(tensor, extraction.components, 400, 1e-13);
    post[s] = match_components(refined.components, inst.components.vectors).bottleneck;
    residual[s] = residual_frobenius(inst.tensor, refined.components);
  });
  std::ostringstream canon, detail;
  double worst_pre = 0.0, worst_post = 0.0, worst_res = 0.0;
  for (int s = 0; s < 3; ++s) {
    if (stalled[s]) {
      c.pass = false;
      detail << " seed " << s << " stalled;";
      continue;
    }
    worst_pre = std::max(worst_pre, pre[s]);
    worst_post = std::max(worst_post, post[s]);
    worst_res = std::max(worst_res, residual[s]);
    canon << hex(pre[s]) << ":" << hex(post[s]) << ":" << hex(residual[s]) << ";";
  }
  c.pass = c.pass && worst_pre <= pre_tol && worst_post <= post_tol &&
           worst_res <= 1e-5;
  detail << "max pre-refine distance = " << worst_pre << " (<= " << pre_tol
         << "), max refined distance = " << worst_post << " (<= " << post_tol
         << "), max residual vs clean tensor = " << worst_res;
  c.detail = detail.str();
  c.canonical = canon.str();
  return c;
}

Criterion criterion4() { return recovery_criterion("c4", 0.0, 0.1, 1e-6); }

Criterion criterion5() {
  return recovery_criterion("c5", decomposition_noise_budget(50), 0.1, 0.02);
}

// --- criterion 6: SDP exactness and domination ------------------------------

Criterion criterion6() {
  Criterion c;
  std::ostringstream canon, detail;
  SdpOptions opt;
  opt.tol = 1e-7;
  opt.ascent_restarts = 60;

  double worst_rank1 = 0.0;
  for (int n : {2, 3}) {
    ComponentSet set;
    set.n = n;
    set.m = 1;
    set.vectors = Eigen::MatrixXd::Zero(1, n);
    set.vectors(0, 0) = 1.0;
    set.seed = sub_seed("c6", static_cast<std::uint64_t>(n));
    const SymmetricTensor3 t = SymmetricTensor3::from_components(set);
    const auto [pe, report] = solve_moment_problem(build_certification_problem(t, 4), t, opt);
    worst_rank1 = std::max(worst_rank1, std::abs(report.opt_value - 1.0));
    canon << hex(report.opt_value) << ";";
    if (report.status != SdpStatus::kConverged) c.pass = false;
  }

  int violations = 0;
  double min_margin = 1e300;
  for (std::uint64_t k = 0; k < 10; ++k) {
    const std::uint64_t seed = sub_seed("c6r", k);
    SymmetricTensor3 t = [&]() {
      if (k % 2 == 0) {
        const Instance inst = sample_instance(3, 2, Ensemble::kSphereUniform, seed);
        return inst.tensor;
      }
      // Dense symmetric Gaussian tensor, Frobenius-normalized.
      RngStream s(seed);
      Eigen::VectorXd raw(27);
      for (int i = 0; i < 27; ++i) raw[i] = s.next_gaussian();
      Eigen::VectorXd sym(27);
      for (int i = 0; i < 3; ++i)
        for (int j = 0; j < 3; ++j)
          for (int l = 0; l < 3; ++l) {
            double total = raw[dense_index(3, i, j, l)] + raw[dense_index(3, i, l, j)] +
                           raw[dense_index(3, j, i, l)] + raw[dense_index(3, j, l, i)] +
                           raw[dense_index(3, l, i, j)] + raw[dense_index(3, l, j, i)];
            sym[dense_index(3, i, j, l)] = total / 6.0;
          }
      sym /= sym.norm();
      return SymmetricTensor3::dense(3, sym);
    }();
    const auto [pe, report] = solve_moment_problem(build_certification_problem(t, 4), t, opt);
    const double point = ascent_injective_estimate(t, 50, 300, seed);
    const double margin = report.opt_value - point;
    min_margin = std::min(min_margin, margin);
    if (margin < -1e-3) ++violations;
    canon << hex(report.opt_value) << ":" << hex(point) << ";";
  }
  c.pass = c.pass && worst_rank1 <= 1e-3 && violations == 0;
  detail << "rank-one max |OPT - 1| = " << worst_rank1
         << " (<= 1e-3), point-domination violations = " << violations
         << ", min (OPT - ascent point) = " << min_margin;
  c.detail = detail.str();
  c.canonical = canon.str();
  return c;
}

// --- criterion 7: scaling regressions ---------------------------------------

Criterion criterion7() {
  Criterion c;
  const ScalingRun run_m = scaling_experiment(
      {{100, 200}, {100, 400}, {100, 800}, {100, 1600}}, 10, sub_seed("c7a", 0), 1e-5, 0);
  const ScalingRun run_n = scaling_experiment(
      {{50, 50}, {100, 100}, {200, 200}, {400, 400}}, 10, sub_seed("c7b", 0), 1e-5, 0);
  std::ostringstream canon, detail;
  c.pass = run_m.cross_vs_m.has_value() && run_n.cross_vs_n_at_m_eq_n.has_value();
  if (c.pass) {
    const double slope_m = run_m.cross_vs_m->slope;
    const double slope_n = run_n.cross_vs_n_at_m_eq_n->slope;
    c.pass = slope_m >= 0.7 && slope_m <= 1.3 && slope_n >= -0.8 && slope_n <= -0.2;
    detail << "||M|| vs m slope = " << slope_m << " (in [0.7, 1.3]), vs n at m=n slope = "
           << slope_n << " (in [-0.8, -0.2])";
    canon << hex(slope_m) << ";" << hex(slope_n) << ";";
    for (const auto& cell : run_m.cells) canon << hex(quantile(cell.cross_term_norms, 0.5)) << ";";
    for (const auto& cell : run_n.cells) canon << hex(quantile(cell.cross_term_norms, 0.5)) << ";";
  } else {
    detail << "slope fits unavailable";
  }
  c.detail = detail.str();
  c.canonical = canon.str();
  return c;
}

// --- criterion 8: matrix Bernstein domination --------------------------------

Criterion criterion8() {
  Criterion c;
  const Instance inst =
      sample_instance(20, 40, Ensemble::kRademacherNormalized, sub_seed("c8", 0));
  const BernsteinCheck check = bernstein_empirical_check(
      inst.components, BernsteinFamily::kRightFactor, 0, 2000, 20, sub_seed("c8", 1), 0);
  c.pass = check.dominated;
  std::ostringstream canon, detail;
  int informative = 0;
  for (const auto& row : check.rows) {
    canon << hex(row.t) << ":" << hex(row.empirical_tail) << ":" << hex(row.bound) << ";";
    if (row.bound < 1.0) ++informative;
  }
  detail << "2000 sign trials, 20 grid points (" << informative
         << " with bound < 1), dominated = " << (check.dominated ? "yes" : "no");
  c.detail = detail.str();
  c.canonical = canon.str();
  return c;
}

// --- criterion 9: decoupling sanity ------------------------------------------

Criterion criterion9() {
  Criterion c;
  const DecouplingSummary summary =
      decoupling_experiment(50, 100, 200, sub_seed("c9", 0), 1e-5, 0);
  c.pass = summary.ratio_median >= 0.2 && summary.ratio_median <= 5.0;
  std::ostringstream canon, detail;
  detail << "median ||M'|| / median ||M''|| = " << summary.ratio_median
         << " (in [0.2, 5.0]); q90 ratio = " << summary.ratio_q90;
  canon << hex(summary.ratio_median) << ";" << hex(summary.ratio_q90) << ";";
  c.detail = detail.str();
  c.canonical = canon.str();
  return c;
}

// --- criterion 10: Kronecker-PSD order and T_i factorization -----------------

Criterion criterion10() {
  Criterion c;
  RngStream root = RngStream(sub_seed("c10", 0));
  int kron_failures = 0, domination_failures = 0;
  std::ostringstream canon;
  for (int trial = 0; trial < 50; ++trial) {
    RngStream s = root.child(static_cast<std::uint64_t>(trial));
    const int dim = 3 + static_cast<int>(s.next_u64() % 8);  // 3..10
    Eigen::MatrixXd p(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) p(i, j) = s.next_gaussian();
    p = (0.5 * (p + p.transpose())).eval();
    Eigen::VectorXd g(dim);
    for (int i = 0; i < dim; ++i) g[i] = s.next_gaussian();
    const Eigen::MatrixXd q = p + g * g.transpose();
    Eigen::MatrixXd w(dim, dim);
    for (int i = 0; i < dim; ++i)
      for (int j = 0; j < dim; ++j) w(i, j) = s.next_gaussian();
    const Eigen::MatrixXd r = w * w.transpose();
    const bool ok = kronecker_psd_check(p, q, r, 8, s.next_u64());
    if (!ok) ++kron_failures;
    canon << (ok ? "1" : "0");
  }
  canon << ";";
  for (int trial = 0; trial < 50; ++trial) {
    RngStream s = root.child("ti").child(static_cast<std::uint64_t>(trial));
    const int n = 4 + static_cast<int>(s.next_u64() % 7);  // 4..10
    const int m = 2 * n;
    const Instance inst =
        sample_instance(n, m, Ensemble::kRademacherNormalized, s.next_u64());
    Eigen::VectorXd tau(m);
    for (int j = 0; j < m; ++j) tau[j] = s.next_sign();
    const int index = static_cast<int>(s.next_u64() % static_cast<std::uint64_t>(m));
    const double coeff = t_i_right_factor_norm(inst.components, tau, index);
    const DominationCheck check = t_i_domination_check(inst.components, tau, index, coeff);
    if (!check.holds || check.margin < -1e-10) ++domination_failures;
    canon << (check.holds ? "1" : "0");
  }
  c.pass = kron_failures == 0 && domination_failures == 0;
  std::ostringstream detail;
  detail << "50 Kronecker-PSD checks (" << kron_failures << " failures), 50 T_i "
         << "domination checks (" << domination_failures << " failures) at tol 1e-10";
  c.detail = detail.str();
  c.canonical = canon.str();
  return c;
}

}  // namespace

int main() {
  struct Entry {
    int id;
    const char* title;
    std::function<Criterion()> run;
  };
  const std::vector<Entry> entries = {
      {1, "orthonormal exactness", criterion1},
      {2, "in-regime certification (n=200)", criterion2},
      {3, "certificate soundness vs ascent witnesses", criterion3},
      {4, "decomposition recovery (n=50, m=100)", criterion4},
      {5, "noise robustness of recovery", criterion5},
      {6, "SDP exactness and point domination", criterion6},
      {7, "spectral scaling regressions", criterion7},
      {8, "matrix Bernstein domination", criterion8},
      {9, "decoupling sanity", criterion9},
      {10, "Kronecker-PSD and T_i factorization", criterion10},
  };

  bool all_pass = true;
  std::vector<std::string> transcripts;
  for (const auto& entry : entries) {
    const auto start = std::chrono::steady_clock::now();
    const Criterion result = entry.run();
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    transcripts.push_back(result.canonical);
    all_pass = all_pass && result.pass;
    std::printf("criterion %2d [%s] (%6.1f s) %s: %s\n", entry.id,
                result.pass ? "PASS" : "FAIL", seconds, entry.title,
                result.detail.c_str());
    std::fflush(stdout);
  }

  // Criterion 11: identical seeds reproduce criteria 1-10 byte-for-byte.
  {
    const auto start = std::chrono::steady_clock::now();
    bool reproducible = true;
    for (std::size_t i = 0; i < entries.size(); ++i) {
      const Criterion again = entries[i].run();
      if (again.canonical != transcripts[i]) {
        reproducible = false;
        std::printf("criterion 11: transcript mismatch in criterion %d\n",
                    entries[i].id);
      }
    }
    const double seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    all_pass = all_pass && reproducible;
    std::printf("criterion 11 [%s] (%6.1f s) reproducibility: criteria 1-10 transcripts "
                "%s under re-execution with fixed seeds\n",
                reproducible ? "PASS" : "FAIL", seconds,
                reproducible ? "byte-identical" : "diverged");
  }

  return all_pass ? 0 : 1;
}
