#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <vector>

#include "ibkit/prob.hpp"

namespace ibkit::pareto {

enum class Provenance { Analytic, Empirical, FromJoint };

/// Fine-binned binary-class likelihood after uniformization and sorting:
/// bin_mass sums to one and cond_p1 is nondecreasing.
struct LikelihoodProfile {
  Eigen::VectorXd bin_mass;
  Eigen::VectorXd cond_p1;
  Provenance provenance = Provenance::Empirical;

  [[nodiscard]] Eigen::Index n_bins() const noexcept { return bin_mass.size(); }
  // P(Y=1) under the profile.
  [[nodiscard]] double p1_marginal() const { return bin_mass.dot(cond_p1); }
  // I(Z;Y) of the fine-binned variable itself.
  [[nodiscard]] double mi() const;
  void validate() const;
};

/// Contiguous grouping of fine bins: group j covers fine bins
/// (b_{j-1}, b_j] with 1-based boundaries b_1 < ... < b_{m-1} in [1, N-1].
struct Binning {
  std::vector<Eigen::Index> boundaries;

  [[nodiscard]] Eigen::Index m() const noexcept {
    return static_cast<Eigen::Index>(boundaries.size()) + 1;
  }
};

struct ParetoPoint {
  double h_z = 0.0;
  double i_zy = 0.0;
  Binning binning;
  Eigen::Index m = 1;
  bool is_corner = false;
};

struct DistilledAtoms {
  Eigen::MatrixXd w;     // one row per merged atom, C-1 likelihood coordinates
  Eigen::VectorXd mass;  // merged support
};

// Merges x rows with identical conditionals (within 1e-9) into W atoms;
// I(W;Y) = I(X;Y) exactly since merged rows carry the same p(y|x).
DistilledAtoms distill(const Eigen::MatrixXd& p_y_given_x, const Eigen::VectorXd& p_x);

// Builds a sorted fine-binned profile from scalar likelihood atoms.
//
// FromJoint provenance keeps one bin per atom (n_fine must cover them);
// Analytic/Empirical provenance splits mass into n_fine equal-mass bins at
// the quantiles of the uniformized W axis. Atoms carry a position w, a
// mass, and a conditional cond_p1 which may differ from w for miscalibrated
// empirical likelihoods.
LikelihoodProfile build_profile(const Eigen::VectorXd& w,
                                const Eigen::VectorXd& mass,
                                const Eigen::VectorXd& cond_p1,
                                Eigen::Index n_fine,
                                Provenance provenance = Provenance::FromJoint);

// Joint distribution of the binned variable: rows = groups, cols = {Y=1, Y=2}.
Eigen::MatrixXd binned_joint(const LikelihoodProfile& profile, const Binning& binning);
ParetoPoint evaluate_binning(const LikelihoodProfile& profile, const Binning& binning);

// Maximum-I point over all contiguous binnings with exactly m groups.
// Exhaustive below `exhaustive_budget` candidate vectors, dynamic program
// otherwise; ties resolved to the lexicographically smallest boundaries.
ParetoPoint corner(const LikelihoodProfile& profile, Eigen::Index m,
                   std::uint64_t exhaustive_budget = 5'000'000);

struct FrontierOptions {
  std::uint64_t exhaustive_budget = 5'000'000;  // total binnings across m
  bool use_dp = false;         // corners by DP plus an H-bucketed envelope scan
  double dp_h_resolution = 0.01;  // bucket width in bits for the DP envelope
};

// Nondominated (H, I) envelope over contiguous binnings with m = 1..m_max,
// with every corner included and flagged. Throws BudgetExceeded when the
// exhaustive count overflows the budget and DP mode is not enabled.
std::vector<ParetoPoint> frontier(const LikelihoodProfile& profile, Eigen::Index m_max,
                                  const FrontierOptions& options = {});

// Largest envelope I with H <= h + slack; -infinity when no point qualifies.
double frontier_i_at_h(const std::vector<ParetoPoint>& envelope, double h,
                       double slack = 1e-9);

// Thresholds on the conditional probability applied before sorting;
// equivalent to horizontal binning after sorting. Thresholds outside [0,1]
// are ignored with a warning.
ParetoPoint vertical_binning(const Eigen::VectorXd& bin_mass,
                             const Eigen::VectorXd& cond_p1_unsorted,
                             std::vector<double> thresholds);

struct BloatLoss {
  double bloat = 0.0;  // H(Z) - I(Z,Y), excess stored bits
  double loss = 0.0;   // I(X,Y) - I(Z,Y), discarded relevant bits
};

BloatLoss bloat_loss(const ParetoPoint& point, double i_xy);

// Exact profile of a binary-class joint: one bin per distilled atom.
LikelihoodProfile profile_from_joint(const prob::JointXY& joint, Eigen::Index positive_y = 0);

// Joint table of the fine-binned variable itself (rows = fine bins,
// columns = {Y=1, Y=2}), for running solvers against a profile.
prob::JointXY joint_from_profile(const LikelihoodProfile& profile);

}  // namespace ibkit::pareto
