#pragma once

#include <Eigen/Core>

#include <optional>
#include <vector>

#include "ibkit/corpus.hpp"
#include "ibkit/prob.hpp"

namespace ibkit::learnability {

struct ConspicuousResult {
  double beta0 = 0.0;
  std::vector<Eigen::Index> subset;  // row indices of the conditional table
  Eigen::Index pivot_class = -1;
};

struct MaxCorrResult {
  double beta0 = 0.0;
  Eigen::VectorXd h_star;  // zero mean, unit variance under p(x)
};

struct LearnabilityReport {
  ConspicuousResult conspicuous;
  MaxCorrResult maxcorr;
  std::optional<double> class_conditional;
  std::optional<double> info_estimate;
};

// Onset functional (Var_x h) / (E_y[(E_{x|y} h)^2] - (E_x h)^2).
// Throws ConstantH when h has no variance on the support, IndependentXY
// when the denominator vanishes.
double beta0_functional(const prob::JointXY& joint, const Eigen::VectorXd& h);

// Tight bound over all h: 1/sigma_2^2 of the normalized joint
// p(x,y)/sqrt(p(x)p(y)), with h* recovered from the second left singular
// vector; beta0_functional(joint, h_star) reproduces beta0 to 1e-8.
MaxCorrResult beta0_maxcorr(const prob::JointXY& joint);

// Get-beta subroutine on a uniform-weight conditional table:
// (N/n - 1) / sum_j[(p_{y|Omega})_j^2 / p_y(j) - 1]; +infinity when the
// denominator is not positive (p(y|Omega) = p(y)).
double getbeta(const Eigen::MatrixXd& p_y_given_x, const Eigen::VectorXd& p_y,
               const std::vector<Eigen::Index>& omega);

struct ConspicuousOptions {
  Eigen::Index exhaustive_limit = 2000;  // above this the narrowing heuristic runs
  double heuristic_tol = 1e-4;
};

// Per pivot class, sorts rows by descending confidence and searches
// contiguous windows for the minimum onset estimate. Exhaustive at desk
// scale; interpolating narrowing search above exhaustive_limit rows.
ConspicuousResult conspicuous_search(const Eigen::MatrixXd& p_y_given_x,
                                     const Eigen::VectorXd& p_x,
                                     const ConspicuousOptions& options = {});

// Closed form for non-overlapping class-conditional noise:
// inf_{y*} (1/p(y*) - 1) / (sum_y p(y|y*)^2 / p(y) - 1).
double beta0_class_conditional(const corpus::NoiseSpec& spec);

// Information-style estimate h(Omega) / KL(p(y|Omega) || p(y)); an
// estimate, not a bound.
double beta0_info_estimate(const prob::JointXY& joint, const std::vector<Eigen::Index>& omega);

struct OnsetExpansion {
  Eigen::MatrixXd p_y_given_x;     // rows sum to one analytically
  bool perturbation_too_large = false;  // some entry left [0, 1]
};

// Conditional p_beta(y|x) = p(y) + eps^2 C_z (h*(x) - hbar)
// sum_x' p(x',y)(h*(x') - hbar) at the onset of learning.
OnsetExpansion onset_expansion(const prob::JointXY& joint, const Eigen::VectorXd& h_star,
                               double eps, double c_z);

// All estimators on one joint; class_conditional only when a NoiseSpec is
// supplied, info_estimate evaluated on the conspicuous subset.
LearnabilityReport full_report(const prob::JointXY& joint,
                               const std::optional<corpus::NoiseSpec>& noise = std::nullopt);

}  // namespace ibkit::learnability
