#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "ibkit/corpus.hpp"
#include "ibkit/errors.hpp"
#include "ibkit/learnability.hpp"
#include "ibkit/prob.hpp"
#include "ibkit/solver.hpp"

using namespace ibkit;

namespace {

prob::JointXY noise_joint(double rho, Eigen::Index copies = 2) {
  return corpus::class_conditional_joint(corpus::NoiseSpec::binary_symmetric(rho, copies));
}

double closed_form(double rho) { return 1.0 / ((1.0 - 2.0 * rho) * (1.0 - 2.0 * rho)); }

}  // namespace

TEST_CASE("onset functional on indicator directions") {
  // deterministic labels: numerator and denominator both equal p(1-p)
  prob::JointXY det = noise_joint(0.0);
  Eigen::VectorXd h = Eigen::VectorXd::Zero(4);
  h(2) = h(3) = 1.0;  // class-1 inputs
  CHECK(learnability::beta0_functional(det, h) == doctest::Approx(1.0).epsilon(1e-12));

  // symmetric noise 0.2: numerator 0.25, denominator 0.5*0.64 + 0.5*0.04 - 0.25
  prob::JointXY noisy = noise_joint(0.2);
  Eigen::VectorXd h0 = Eigen::VectorXd::Zero(4);
  h0(0) = h0(1) = 1.0;  // true class-0 inputs
  const double expected = 0.25 / (0.5 * 0.64 + 0.5 * 0.04 - 0.25);
  CHECK(learnability::beta0_functional(noisy, h0) == doctest::Approx(expected).epsilon(1e-9));
  CHECK(expected == doctest::Approx(closed_form(0.2)).epsilon(1e-12));

  CHECK_THROWS_AS(learnability::beta0_functional(noisy, Eigen::VectorXd::Ones(4)), Error);
}

TEST_CASE("maximum-correlation bound") {
  CHECK(learnability::beta0_maxcorr(noise_joint(0.2)).beta0 ==
        doctest::Approx(2.7778).epsilon(1e-4));
  CHECK(learnability::beta0_maxcorr(noise_joint(0.4)).beta0 ==
        doctest::Approx(25.0).epsilon(1e-6));
  CHECK(learnability::beta0_maxcorr(noise_joint(0.48)).beta0 ==
        doctest::Approx(625.0).epsilon(1e-6));
  CHECK(learnability::beta0_maxcorr(noise_joint(0.0)).beta0 ==
        doctest::Approx(1.0).epsilon(1e-9));

  // h* attains the bound through the functional
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    prob::JointXY j = corpus::random_joint(seed, 5, 3);
    const auto mc = learnability::beta0_maxcorr(j);
    CHECK(learnability::beta0_functional(j, mc.h_star) ==
          doctest::Approx(mc.beta0).epsilon(1e-8));
    CHECK(std::abs(j.p_x().dot(mc.h_star)) < 1e-10);
  }

  Eigen::VectorXd px(2), py(2);
  px << 0.5, 0.5;
  py << 0.3, 0.7;
  prob::JointXY indep(px * py.transpose());
  CHECK_THROWS_AS(learnability::beta0_maxcorr(indep), Error);
}

TEST_CASE("getbeta windows") {
  Eigen::MatrixXd rows(4, 2);
  rows << 0.8, 0.2, 0.8, 0.2, 0.2, 0.8, 0.2, 0.8;
  Eigen::VectorXd p_y(2);
  p_y << 0.5, 0.5;

  CHECK(std::isinf(learnability::getbeta(rows, p_y, {0, 1, 2, 3})));
  CHECK(learnability::getbeta(rows, p_y, {0}) == doctest::Approx(3.0 / 0.36).epsilon(1e-12));
  CHECK(learnability::getbeta(rows, p_y, {0, 1}) == doctest::Approx(1.0 / 0.36).epsilon(1e-12));
  CHECK_THROWS_AS(learnability::getbeta(rows, p_y, {}), Error);
}

TEST_CASE("conspicuous search") {
  Eigen::MatrixXd rows(4, 2);
  rows << 0.8, 0.2, 0.8, 0.2, 0.2, 0.8, 0.2, 0.8;
  Eigen::VectorXd uniform = Eigen::VectorXd::Constant(4, 0.25);
  auto res = learnability::conspicuous_search(rows, uniform);
  CHECK(res.beta0 == doctest::Approx(1.0 / 0.36).epsilon(1e-9));
  REQUIRE(res.subset.size() == 2);
  const bool class0 = res.subset == std::vector<Eigen::Index>{0, 1};
  const bool class1 = res.subset == std::vector<Eigen::Index>{2, 3};
  CHECK((class0 || class1));

  Eigen::MatrixXd det(4, 2);
  det << 1, 0, 1, 0, 0, 1, 0, 1;
  auto det_res = learnability::conspicuous_search(det, uniform);
  CHECK(det_res.beta0 == doctest::Approx(1.0).epsilon(1e-12));
  CHECK(det_res.subset.size() == 2);

  // permutation invariance: same value, equivalent subset as a set
  Eigen::MatrixXd permuted(4, 2);
  permuted << 0.2, 0.8, 0.8, 0.2, 0.2, 0.8, 0.8, 0.2;  // rows 0,1 swapped classes
  auto perm_res = learnability::conspicuous_search(permuted, uniform);
  CHECK(perm_res.beta0 == res.beta0);
  std::vector<Eigen::Index> mapped;
  for (Eigen::Index i : perm_res.subset) mapped.push_back(i);
  std::sort(mapped.begin(), mapped.end());
  const bool perm_class0 = mapped == std::vector<Eigen::Index>{1, 3};
  const bool perm_class1 = mapped == std::vector<Eigen::Index>{0, 2};
  CHECK((perm_class0 || perm_class1));
}

TEST_CASE("narrowing heuristic stays close to the exhaustive answer") {
  // 12 rows: confident class-0 block followed by noise, uniform weights
  Eigen::MatrixXd rows(12, 2);
  for (int i = 0; i < 12; ++i) {
    const double p = i < 4 ? 0.9 : (i < 8 ? 0.55 : 0.2);
    rows(i, 0) = p;
    rows(i, 1) = 1.0 - p;
  }
  Eigen::VectorXd w = Eigen::VectorXd::Constant(12, 1.0 / 12.0);
  learnability::ConspicuousOptions exhaustive;
  learnability::ConspicuousOptions heuristic;
  heuristic.exhaustive_limit = 4;  // force the narrowing path
  const auto full = learnability::conspicuous_search(rows, w, exhaustive);
  const auto fast = learnability::conspicuous_search(rows, w, heuristic);
  CHECK(fast.beta0 >= full.beta0 - 1e-12);
  CHECK(fast.beta0 <= full.beta0 * 1.2);
}

TEST_CASE("class-conditional closed form") {
  CHECK(learnability::beta0_class_conditional(corpus::NoiseSpec::binary_symmetric(0.4)) ==
        doctest::Approx(25.0).epsilon(1e-9));
  CHECK(learnability::beta0_class_conditional(corpus::NoiseSpec::binary_symmetric(0.0)) ==
        doctest::Approx(1.0).epsilon(1e-12));
  CHECK(learnability::beta0_class_conditional(corpus::NoiseSpec::binary_symmetric(0.48)) ==
        doctest::Approx(625.0).epsilon(1e-9));
  CHECK_THROWS_AS(
      learnability::beta0_class_conditional(corpus::NoiseSpec::binary_symmetric(0.5)), Error);
}

TEST_CASE("information-style estimate") {
  prob::JointXY j = noise_joint(0.2);
  const double kl = prob::kl_divergence(Eigen::Vector2d(0.8, 0.2), Eigen::Vector2d(0.5, 0.5));
  CHECK(learnability::beta0_info_estimate(j, {0, 1}) ==
        doctest::Approx(1.0 / kl).epsilon(1e-12));
  CHECK(learnability::beta0_info_estimate(j, {0, 1}) == doctest::Approx(3.596).epsilon(1e-3));

  prob::JointXY det = noise_joint(0.0);
  CHECK(learnability::beta0_info_estimate(det, {0, 1}) == doctest::Approx(1.0).epsilon(1e-12));

  CHECK_THROWS_AS(learnability::beta0_info_estimate(j, {0, 1, 2, 3}), Error);
  CHECK_THROWS_AS(learnability::beta0_info_estimate(j, {0, 2}), Error);  // p(y|Omega) = p(y)
}

TEST_CASE("onset expansion") {
  prob::JointXY j = noise_joint(0.2);
  const auto mc = learnability::beta0_maxcorr(j);

  auto flat = learnability::onset_expansion(j, mc.h_star, 0.0, 1.0);
  for (Eigen::Index x = 0; x < j.nx(); ++x) {
    CHECK((flat.p_y_given_x.row(x).transpose() - j.p_y()).cwiseAbs().maxCoeff() < 1e-15);
  }

  auto tilted = learnability::onset_expansion(j, mc.h_star, 0.1, 1.0);
  CHECK(!tilted.perturbation_too_large);
  const corpus::NoiseSpec spec = corpus::NoiseSpec::binary_symmetric(0.2, 2);
  for (Eigen::Index x = 0; x < j.nx(); ++x) {
    CHECK(std::abs(tilted.p_y_given_x.row(x).sum() - 1.0) < 1e-12);
    const Eigen::Index truth = corpus::true_class_of_row(spec, x);
    CHECK(tilted.p_y_given_x(x, truth) - j.p_y()(truth) > 0.0);
  }
}

TEST_CASE("ordering chain and closed-form equalities") {
  for (double rho : {0.1, 0.2, 0.3, 0.4}) {
    prob::JointXY j = noise_joint(rho);
    const double mc = learnability::beta0_maxcorr(j).beta0;
    const double cs = learnability::conspicuous_search(j.p_y_given_x(), j.p_x()).beta0;
    const double cc =
        learnability::beta0_class_conditional(corpus::NoiseSpec::binary_symmetric(rho, 2));
    const double target = closed_form(rho);
    CHECK(std::abs(mc - target) < 1e-6 * target);
    CHECK(std::abs(cs - target) < 1e-6 * target);
    CHECK(std::abs(cc - target) < 1e-6 * target);
  }
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    prob::JointXY j = corpus::random_joint(seed, 5, 3);
    const double mc = learnability::beta0_maxcorr(j).beta0;
    const double cs = learnability::conspicuous_search(j.p_y_given_x(), j.p_x()).beta0;
    CHECK(mc > 1.0);
    CHECK(cs >= mc - 1e-9);
  }
}

TEST_CASE("estimators are permutation invariant") {
  prob::JointXY j = corpus::random_joint(31, 6, 3);
  prob::JointXY p = j.permute_x({4, 2, 0, 5, 1, 3});
  CHECK(std::abs(learnability::beta0_maxcorr(j).beta0 - learnability::beta0_maxcorr(p).beta0) <
        1e-12);
  CHECK(learnability::conspicuous_search(j.p_y_given_x(), j.p_x()).beta0 ==
        learnability::conspicuous_search(p.p_y_given_x(), p.p_x()).beta0);
}

TEST_CASE("information-plane slope is capped by the onset") {
  const double rho = 0.3;
  prob::JointXY j = noise_joint(rho);
  const double bound = 1.0 / closed_form(rho);
  solver::SolveParams params;
  params.seed = 2;
  auto results = solver::sweep(j, 4, solver::log_spaced(1.2, 20.0, 12), params);
  for (const auto& r : results) {
    if (r.i_xz < 1e-9) continue;
    CHECK(r.i_yz / r.i_xz <= bound + 1e-6);
  }
}

TEST_CASE("full report wiring") {
  prob::JointXY j = noise_joint(0.2);
  auto report = learnability::full_report(j, corpus::NoiseSpec::binary_symmetric(0.2, 2));
  CHECK(report.maxcorr.beta0 == doctest::Approx(closed_form(0.2)).epsilon(1e-9));
  CHECK(report.conspicuous.beta0 >= report.maxcorr.beta0 - 1e-9);
  REQUIRE(report.class_conditional.has_value());
  CHECK(*report.class_conditional == doctest::Approx(closed_form(0.2)).epsilon(1e-9));
  REQUIRE(report.info_estimate.has_value());
  CHECK(*report.info_estimate > 1.0);
}
