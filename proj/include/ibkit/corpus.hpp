#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <string>
#include <vector>

#include "ibkit/pareto.hpp"
#include "ibkit/prob.hpp"

namespace ibkit::corpus {

/// Class-conditional label noise: each x belongs to one true class y* and
/// the observed label is drawn from flip(y*, .), so p(y|x) depends on x
/// only through its true class.
struct NoiseSpec {
  Eigen::VectorXd prior;        // p(y*)
  Eigen::MatrixXd flip;         // rows y*, cols y, each row a distribution
  Eigen::Index copies_per_class = 1;

  // Balanced binary labels flipped symmetrically with rate rho.
  static NoiseSpec binary_symmetric(double rho, Eigen::Index copies_per_class = 2);
};

// Deterministic full-support joint; entries i.i.d. uniform via SplitMix64
// then normalized, so fixtures are byte-stable across platforms.
prob::JointXY random_joint(std::uint64_t seed, Eigen::Index nx, Eigen::Index ny);

prob::JointXY class_conditional_joint(const NoiseSpec& spec);

// True class of row x in a class_conditional_joint layout (class-major).
Eigen::Index true_class_of_row(const NoiseSpec& spec, Eigen::Index x);

// Fine-binned profile of the closed-form warmup likelihood, n_fine
// equal-width bins of W in [0,1]. The CDF has a removable singularity at
// w = 1/2 which is evaluated by series expansion.
pareto::LikelihoodProfile analytic_warmup_profile(Eigen::Index n_fine);

// Closed-form CDFs F_j(w) = P(W < w, Y = j) of the warmup construction.
double analytic_warmup_f1(double w);
double analytic_warmup_f2(double w);

// Named published fixtures ("cifar-2bin", "cifar-5bin"); UnknownFixture otherwise.
prob::JointXY builtin(const std::string& name);

std::vector<std::string> builtin_names();

// Random row-stochastic encoder for tests and solver restarts.
prob::Encoder random_encoder(std::uint64_t seed, Eigen::Index nx, Eigen::Index nz);

}  // namespace ibkit::corpus
