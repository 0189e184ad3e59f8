#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "tensorcert/decomposition.hpp"
#include "tensorcert/instances.hpp"
#include "tensorcert/rng.hpp"

using namespace tensorcert;

namespace {

SymmetricTensor3 identity_tensor(int n, int m) {
  ComponentSet set;
  set.n = n;
  set.m = m;
  set.vectors = Eigen::MatrixXd::Identity(m, n);
  return SymmetricTensor3::from_components(set);
}

Eigen::VectorXd unit2(double a, double b) {
  Eigen::VectorXd v(2);
  v << a, b;
  return v / v.norm();
}

}  // namespace

TEST_CASE("ascend: rank-one tensor converges to the component in one step") {
  const SymmetricTensor3 t = identity_tensor(2, 1);
  const AscendResult res = ascend(t, unit2(0.8, 0.6));
  CHECK(res.converged);
  CHECK(res.value == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(std::abs(res.x[0] - 1.0) < 1e-10);
}

TEST_CASE("ascend: orthogonal start vanishes with a restart signal") {
  const SymmetricTensor3 t = identity_tensor(2, 1);
  const AscendResult res = ascend(t, unit2(0.0, 1.0));
  CHECK(res.vanished);
}

TEST_CASE("ascend: basin behavior on deep in-regime instances") {
  // Perturbed component starts return close to the component at
  // (n = 400, m = 20), where interference is ~ sqrt(3m)/n.
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const Instance inst = sample_instance(400, 20, Ensemble::kRademacherNormalized, seed);
    RngStream s(seed);
    Eigen::VectorXd x0 = inst.components.vectors.row(0).transpose();
    Eigen::VectorXd bump(400);
    for (int i = 0; i < 400; ++i) bump[i] = s.next_gaussian();
    x0 += 0.05 * bump / bump.norm();
    x0 /= x0.norm();
    const AscendResult res = ascend(inst.tensor, x0, 500, 1e-12);
    CHECK((res.x - inst.components.vectors.row(0).transpose()).norm() < 0.05);
  }
}

TEST_CASE("ascend rejects non-unit starts") {
  const SymmetricTensor3 t = identity_tensor(2, 1);
  Eigen::VectorXd bad(2);
  bad << 1.0, 1.0;
  CHECK_THROWS_AS((void)ascend(t, bad), std::invalid_argument);
}

TEST_CASE("extract_components: orthonormal recovery is exact") {
  const SymmetricTensor3 t = identity_tensor(5, 5);
  ExtractionConfig config;
  config.seed = 3;
  const ExtractionResult res = extract_components(t, 5, config);
  REQUIRE_FALSE(res.stalled);
  REQUIRE(res.components.rows() == 5);
  const Matching match =
      match_components(res.components, Eigen::MatrixXd::Identity(5, 5));
  CHECK(match.bottleneck < 1e-9);
  for (double v : res.values) CHECK(v >= doctest::Approx(1.0).epsilon(1e-9));
}

TEST_CASE("extract_components: m = 1") {
  ComponentSet set;
  set.n = 4;
  set.m = 1;
  set.vectors = Eigen::MatrixXd::Zero(1, 4);
  set.vectors(0, 1) = 1.0;
  const SymmetricTensor3 t = SymmetricTensor3::from_components(set);
  ExtractionConfig config;
  config.seed = 5;
  const ExtractionResult res = extract_components(t, 1, config);
  REQUIRE_FALSE(res.stalled);
  CHECK((res.components.row(0).transpose() - set.vectors.row(0).transpose()).norm() <
        1e-8);
}

TEST_CASE("extract_components: overcomplete in-regime instance") {
  const Instance inst = sample_instance(50, 100, Ensemble::kRademacherNormalized, 12);
  ExtractionConfig config;
  config.seed = 12;
  config.accept_threshold = 0.6;
  config.deflation_threshold_sq = 0.5;
  const ExtractionResult res = extract_components(inst.tensor, 100, config);
  REQUIRE_FALSE(res.stalled);
  REQUIRE(res.components.rows() == 100);
  const Matching match = match_components(res.components, inst.components.vectors);
  CHECK(match.bottleneck <= 0.1);
  // Deflation and acceptance honesty on the returned set.
  for (int i = 0; i < 100; ++i) {
    CHECK(res.values[i] >= 0.6);
    for (int j = i + 1; j < 100; ++j) {
      const double ip = res.components.row(i).dot(res.components.row(j));
      CHECK(ip * ip <= 0.5 + 1e-12);
    }
  }
  CHECK(res.residual_fro < 1e-5);
}

TEST_CASE("extract_components stalls loudly when the budget is tiny") {
  const Instance inst = sample_instance(30, 60, Ensemble::kRademacherNormalized, 4);
  ExtractionConfig config;
  config.seed = 4;
  config.restarts_per_component = 0;
  config.max_rounds = 1;
  config.ascent_steps = 3;
  const ExtractionResult res = extract_components(inst.tensor, 60, config);
  CHECK(res.stalled);
  CHECK(res.stall_index >= 0);
  CHECK(res.components.rows() < 60);
}

TEST_CASE("refine: stationarity at the exact decomposition") {
  const SymmetricTensor3 t = identity_tensor(6, 6);
  const RefineResult res = refine(t, Eigen::MatrixXd::Identity(6, 6), 10, 1e-12);
  CHECK_FALSE(res.diverged);
  CHECK((res.components - Eigen::MatrixXd::Identity(6, 6)).cwiseAbs().maxCoeff() <
        1e-12);
  CHECK(res.residual_fro < 1e-12);
}

TEST_CASE("refine: contracts a perturbed orthonormal initialization") {
  const int n = 8;
  const SymmetricTensor3 t = identity_tensor(n, n);
  RngStream s(9);
  Eigen::MatrixXd init(n, n);
  for (int i = 0; i < n; ++i) {
    Eigen::VectorXd row = Eigen::VectorXd::Zero(n);
    row[i] = 1.0;
    Eigen::VectorXd bump(n);
    for (int j = 0; j < n; ++j) bump[j] = s.next_gaussian();
    row += 0.05 * bump / bump.norm();
    init.row(i) = row.transpose() / row.norm();
  }
  const RefineResult res = refine(t, init, 50, 1e-14);
  CHECK_FALSE(res.diverged);
  const Matching match = match_components(res.components, Eigen::MatrixXd::Identity(n, n));
  CHECK(match.bottleneck <= 1e-8);
}

TEST_CASE("refine: polishes extraction output to high accuracy in regime") {
  const Instance inst = sample_instance(50, 100, Ensemble::kRademacherNormalized, 21);
  ExtractionConfig config;
  config.seed = 21;
  config.accept_threshold = 0.6;
  config.deflation_threshold_sq = 0.5;
  const ExtractionResult extraction = extract_components(inst.tensor, 100, config);
  REQUIRE_FALSE(extraction.stalled);
  const RefineResult refined = refine(inst.tensor, extraction.components, 300, 1e-13);
  const Matching match = match_components(refined.components, inst.components.vectors);
  CHECK(match.bottleneck <= 1e-6);
  CHECK(refined.residual_fro <= 1e-5);
}

TEST_CASE("match_components: shuffles, negation, brute-force oracle") {
  RngStream s(31);
  const int m = 5, n = 8;
  Eigen::MatrixXd truth(m, n);
  for (int i = 0; i < m; ++i) {
    for (int j = 0; j < n; ++j) truth(i, j) = s.next_gaussian();
    truth.row(i) /= truth.row(i).norm();
  }

  SUBCASE("shuffled copy matches with zero distances") {
    std::vector<int> shuffle = {3, 0, 4, 1, 2};
    Eigen::MatrixXd found(m, n);
    for (int i = 0; i < m; ++i) found.row(shuffle[i]) = truth.row(i);
    const Matching match = match_components(found, truth);
    CHECK(match.bottleneck == 0.0);
    for (int i = 0; i < m; ++i) CHECK(match.permutation[i] == shuffle[i]);
  }

  SUBCASE("negated component sits at antipodal distance 2") {
    // No sign folding: with a single component the permutation is forced
    // and the negation costs the full antipodal distance.
    const Matching match =
        match_components(-truth.topRows(1), truth.topRows(1));
    CHECK(match.bottleneck == doctest::Approx(2.0).epsilon(1e-12));
    // With several rows the bottleneck-optimal assignment may dodge the
    // negated row; it can only improve on the identity pairing.
    Eigen::MatrixXd found = truth;
    found.row(2) = -found.row(2);
    CHECK(match_components(found, truth).bottleneck <= 2.0 + 1e-12);
  }

  SUBCASE("bottleneck equals exhaustive search over permutations") {
    Eigen::MatrixXd found(m, n);
    for (int i = 0; i < m; ++i) {
      for (int j = 0; j < n; ++j) found(i, j) = s.next_gaussian();
      found.row(i) /= found.row(i).norm();
    }
    const Matching match = match_components(found, truth);

    Eigen::MatrixXd dist(m, m);
    for (int i = 0; i < m; ++i)
      for (int j = 0; j < m; ++j) dist(i, j) = (truth.row(i) - found.row(j)).norm();
    std::vector<int> perm(m);
    std::iota(perm.begin(), perm.end(), 0);
    double best = std::numeric_limits<double>::infinity();
    do {
      double worst = 0.0;
      for (int i = 0; i < m; ++i) worst = std::max(worst, dist(i, perm[i]));
      best = std::min(best, worst);
    } while (std::next_permutation(perm.begin(), perm.end()));
    CHECK(match.bottleneck == doctest::Approx(best).epsilon(1e-12));
  }
}

TEST_CASE("holder_diagnostic") {
  const Instance inst = sample_instance(12, 4, Ensemble::kSphereUniform, 41);

  SUBCASE("exact component passes with power one") {
    const HolderDiagnostic diag = holder_diagnostic(
        inst.components.vectors.row(1).transpose(), inst.components, 8, 0.01, 0.01);
    CHECK(diag.correlation_power == doctest::Approx(1.0));
    CHECK(diag.best_component_index == 1);
    CHECK(diag.passes);
  }

  SUBCASE("orthogonal candidate fails") {
    Eigen::MatrixXd a = inst.components.vectors;
    Eigen::FullPivLU<Eigen::MatrixXd> lu(a);
    const Eigen::MatrixXd null_space = lu.kernel();
    Eigen::VectorXd c = null_space.col(0);
    c /= c.norm();
    const HolderDiagnostic diag = holder_diagnostic(c, inst.components, 8, 0.01, 0.01);
    CHECK(diag.correlation_power < 1e-20);
    CHECK_FALSE(diag.passes);
  }

  SUBCASE("worked numeric example") {
    // <a_1, c> = 0.999, k = 20, eps = 0.001, delta = 0.01:
    // 0.999^20 ~ 0.9802 clears e^{-0.24} ~ 0.7866.
    ComponentSet single;
    single.n = 2;
    single.m = 1;
    single.vectors.resize(1, 2);
    single.vectors << 1.0, 0.0;
    Eigen::VectorXd c(2);
    c << 0.999, std::sqrt(1.0 - 0.999 * 0.999);
    const HolderDiagnostic diag = holder_diagnostic(c, single, 20, 0.001, 0.01);
    CHECK(diag.correlation_power == doctest::Approx(0.98019).epsilon(1e-4));
    CHECK(diag.passes);
  }

  SUBCASE("odd k is rejected") {
    CHECK_THROWS_AS((void)holder_diagnostic(inst.components.vectors.row(0).transpose(),
                                            inst.components, 7, 0.1, 0.1),
                    std::invalid_argument);
  }
}

TEST_CASE("noise robustness of the full extract-refine pipeline") {
  const Instance inst = sample_instance(50, 100, Ensemble::kRademacherNormalized, 33);
  const double budget = decomposition_noise_budget(50);  // 1/(10 ln 50)
  const SymmetricTensor3 noisy = add_noise(inst.tensor, NoiseSpec{budget, 33});
  ExtractionConfig config;
  config.seed = 33;
  config.accept_threshold = 0.6;
  config.deflation_threshold_sq = 0.5;
  const ExtractionResult extraction = extract_components(noisy, 100, config);
  REQUIRE_FALSE(extraction.stalled);
  const Matching pre = match_components(extraction.components, inst.components.vectors);
  CHECK(pre.bottleneck <= 0.1);
  const RefineResult refined = refine(noisy, extraction.components, 200, 1e-12);
  const Matching post = match_components(refined.components, inst.components.vectors);
  CHECK(post.bottleneck <= 0.02);
}
