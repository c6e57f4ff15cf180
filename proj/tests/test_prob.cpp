#include <doctest.h>

#include <Eigen/Core>

#include <cmath>
#include <numeric>
#include <vector>

#include "ibkit/corpus.hpp"
#include "ibkit/errors.hpp"
#include "ibkit/prob.hpp"
#include "ibkit/rng.hpp"

using namespace ibkit;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (double x : v) out(i++) = x;
  return out;
}

}  // namespace

TEST_CASE("entropy basics") {
  CHECK(prob::entropy(vec({0.25, 0.25, 0.25, 0.25})) == doctest::Approx(2.0).epsilon(1e-12));
  CHECK(prob::entropy(vec({0.0, 1.0, 0.0})) == doctest::Approx(0.0).epsilon(1e-12));
  // closed form -0.9 log2 0.9 - 0.1 log2 0.1 evaluated in-test
  const double expected = -0.9 * std::log2(0.9) - 0.1 * std::log2(0.1);
  CHECK(prob::entropy(vec({0.9, 0.1})) == doctest::Approx(expected).epsilon(1e-14));
  CHECK(prob::entropy(vec({0.9, 0.1})) == doctest::Approx(0.4690).epsilon(1e-4));
}

TEST_CASE("entropy rejects bad mass") {
  CHECK_THROWS_AS(prob::entropy(vec({0.5, 0.4})), Error);
  CHECK_THROWS_AS(prob::entropy(vec({1.1, -0.1})), Error);
  try {
    prob::entropy(vec({0.6, 0.6}));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NotNormalized);
  }
  try {
    prob::entropy(vec({1.0 + 1e-6, -1e-6}));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::NegativeMass);
  }
}

TEST_CASE("kl divergence") {
  CHECK(prob::kl_divergence(vec({0.3, 0.7}), vec({0.3, 0.7})) == doctest::Approx(0.0));
  CHECK(prob::kl_divergence(vec({1.0, 0.0}), vec({0.5, 0.5})) == doctest::Approx(1.0));
  const double expected = 0.8 * std::log2(0.8 / 0.5) + 0.2 * std::log2(0.2 / 0.5);
  CHECK(prob::kl_divergence(vec({0.8, 0.2}), vec({0.5, 0.5})) ==
        doctest::Approx(expected).epsilon(1e-14));
  CHECK(prob::kl_divergence(vec({0.8, 0.2}), vec({0.5, 0.5})) ==
        doctest::Approx(0.2781).epsilon(1e-3));
  try {
    prob::kl_divergence(vec({0.5, 0.5}), vec({1.0, 0.0}));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::SupportMismatch);
  }
}

TEST_CASE("mutual information golden tables") {
  Eigen::MatrixXd two(2, 2);
  two << 0.454555, 0.045445, 0.042725, 0.457275;
  CHECK(prob::mutual_information(two) == doctest::Approx(0.5697).epsilon(2e-4));

  Eigen::MatrixXd five(2, 5);
  five << 0.350685, 0.053337, 0.054679, 0.034542, 0.006756,
          0.007794, 0.006618, 0.032516, 0.069236, 0.383836;
  CHECK(prob::mutual_information(five) == doctest::Approx(0.6882).epsilon(2e-3));

  Eigen::VectorXd px = vec({0.2, 0.5, 0.3});
  Eigen::VectorXd py = vec({0.6, 0.4});
  Eigen::MatrixXd outer = px * py.transpose();
  CHECK(prob::mutual_information(outer) == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("two mutual-information formulas agree on random joints") {
  for (std::uint64_t seed = 0; seed < 100; ++seed) {
    prob::JointXY j = corpus::random_joint(seed, 4, 3);
    const double via_marginals = prob::mutual_information(j);
    const double via_conditional = prob::entropy_y(j) - prob::conditional_entropy_y_given_x(j);
    CHECK(std::abs(via_marginals - via_conditional) < 1e-10);
  }
}

TEST_CASE("markov compose identity and trivial encoders") {
  prob::JointXY j = corpus::random_joint(7, 3, 4);
  prob::InducedDistributions ident = prob::markov_compose(j, prob::Encoder::identity(3));
  CHECK((ident.p_yz - j.p_xy().transpose()).cwiseAbs().maxCoeff() < 1e-15);
  CHECK((ident.p_z - j.p_x()).cwiseAbs().maxCoeff() < 1e-15);

  prob::InducedDistributions triv = prob::markov_compose(j, prob::Encoder::trivial(3, 2));
  for (Eigen::Index z = 0; z < 2; ++z) {
    CHECK((triv.p_y_given_z.col(z) - j.p_y()).cwiseAbs().maxCoeff() < 1e-12);
  }
  CHECK(prob::mutual_information(triv.p_yz) < 1e-12);
}

TEST_CASE("data processing inequality") {
  prob::JointXY j = corpus::random_joint(0, 4, 4);
  prob::Encoder enc = corpus::random_encoder(1, 4, 3);
  const double ixz = prob::i_xz(j, enc);
  const double iyz = prob::i_yz(j, enc);
  CHECK(iyz <= ixz + 1e-10);
  CHECK(iyz <= prob::mutual_information(j) + 1e-10);

  for (std::uint64_t seed = 2; seed < 40; ++seed) {
    prob::JointXY joint = corpus::random_joint(seed, 5, 3);
    prob::Encoder e = corpus::random_encoder(seed + 1000, 5, 4);
    CHECK(prob::i_yz(joint, e) <= prob::i_xz(joint, e) + 1e-10);
    CHECK(prob::i_yz(joint, e) <= prob::mutual_information(joint) + 1e-10);
  }
}

TEST_CASE("permuting X rows leaves information quantities bit-identical") {
  prob::JointXY j = corpus::random_joint(11, 6, 3);
  std::vector<Eigen::Index> perm = {3, 0, 5, 2, 4, 1};
  prob::JointXY p = j.permute_x(perm);
  CHECK(prob::mutual_information(j) == prob::mutual_information(p));
  CHECK(conditional_entropy_y_given_x(j) == conditional_entropy_y_given_x(p));
  CHECK(prob::entropy_y(j) == prob::entropy_y(p));
}

TEST_CASE("joint construction repairs and strips") {
  Eigen::MatrixXd slightly_off(2, 2);
  slightly_off << 0.25, 0.25, 0.25, 0.2500003;  // within the 1e-6 window
  prob::JointXY j(slightly_off);
  CHECK(std::abs(j.p_xy().sum() - 1.0) < 1e-15);

  Eigen::MatrixXd with_zero_row(3, 2);
  with_zero_row << 0.5, 0.2, 0.0, 0.0, 0.1, 0.2;
  prob::JointXY stripped(with_zero_row);
  CHECK(stripped.nx() == 2);
  CHECK(!stripped.provenance().empty());
  CHECK(stripped.p_x().minCoeff() > 0.0);

  Eigen::MatrixXd bad(2, 2);
  bad << 0.9, 0.2, 0.2, 0.2;
  CHECK_THROWS_AS(prob::JointXY{bad}, Error);
}

TEST_CASE("fano information") {
  CHECK(prob::fano_information(0.0) == doctest::Approx(1.0));
  CHECK(prob::fano_information(0.5) == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(prob::fano_information(0.01) == doctest::Approx(0.919).epsilon(1e-3));
  CHECK(prob::fano_information(0.1) > prob::fano_information(0.2));
  CHECK_THROWS_AS(prob::fano_information(0.6), Error);
  CHECK_THROWS_AS(prob::fano_information(-0.1), Error);
}

TEST_CASE("bernoulli encoding") {
  auto bits = prob::bernoulli_encode(vec({0.5, 0.5}));
  REQUIRE(bits.size() == 1);
  CHECK(bits[0] == doctest::Approx(0.5));

  bits = prob::bernoulli_encode(vec({1.0, 0.0}));
  CHECK(bits[0] == doctest::Approx(0.0));

  bits = prob::bernoulli_encode(vec({0.4, 0.3, 0.2, 0.1}));
  REQUIRE(bits.size() == 3);
  CHECK(bits[0] == doctest::Approx(3.0 / 7.0).epsilon(1e-12));
  CHECK(bits[1] == doctest::Approx(2.0 / 9.0).epsilon(1e-12));
  CHECK(bits[2] == doctest::Approx(0.1).epsilon(1e-12));

  try {
    prob::bernoulli_encode(vec({0.0, 0.0, 1.0}));
    FAIL("expected throw");
  } catch (const Error& e) {
    CHECK(e.code() == ErrorCode::DegenerateInput);
  }
}

TEST_CASE("bernoulli round trip on exhaustive small alphabets") {
  for (Eigen::Index m = 2; m <= 6; ++m) {
    for (std::uint64_t seed = 0; seed < 20; ++seed) {
      SplitMix64 rng(seed * 97 + static_cast<std::uint64_t>(m));
      Eigen::VectorXd pmf(m);
      double sum = 0.0;
      for (Eigen::Index i = 0; i < m; ++i) {
        pmf(i) = rng.uniform();
        sum += pmf(i);
      }
      pmf /= sum;
      const auto bits = prob::bernoulli_encode(pmf);
      const Eigen::VectorXd back = prob::bernoulli_decode(bits);
      CHECK((back - pmf).cwiseAbs().maxCoeff() < 1e-12);
    }
  }
}
