#pragma once

#include <Eigen/Core>

#include <string>
#include <vector>

#include "ibkit/prob.hpp"
#include "ibkit/solver.hpp"

namespace ibkit::phase {

/// Multiplicative perturbation direction r(z|x) with zero conditional mean
/// under p(z|x): the perturbed encoder is p(z|x) (1 + eps r(z|x)).
struct RelativePerturbation {
  Eigen::MatrixXd r;  // |X| x |Z|

  // Membership check against a concrete encoder (1e-10 on conditional means).
  void validate(const prob::Encoder& enc) const;
};

// Projects an arbitrary bounded direction onto zero conditional mean rows.
RelativePerturbation project_perturbation(const prob::Encoder& enc, Eigen::MatrixXd raw);

struct GResult {
  double g = 0.0;
  bool infinite = false;         // every conditional correlation vanished
  double rho_r = 0.0;            // representational maximum correlation
  Eigen::Index argmax_z = -1;
  Eigen::VectorXd per_z_sigma2;  // conditional second singular values, 0 for empty z
};

struct OracleResult {
  double g = 0.0;
  bool infinite = false;  // denominator form identically zero
};

struct TracePoint {
  double beta = 0.0;
  double g = 0.0;
  double i_xz = 0.0;
  double i_yz = 0.0;
};

struct PhaseReport {
  std::vector<double> transitions;  // strictly increasing beta_c
  // Witness encoder per transition: the tracked branch's solution at the
  // recorded root. Near-degenerate optima coexist there, so verification
  // must resume from the witness rather than a cold restart.
  std::vector<Eigen::MatrixXd> transition_encoders;
  std::vector<TracePoint> trace;
  std::vector<Eigen::MatrixXd> encoder_snapshots;  // optional, parallel to trace
  std::vector<std::string> warnings;
};

// Normalized conditional joint Q_{X,Y|Z=z} with entries
// p(x,y|z) / sqrt(p(x|z) p(y|z)); its top singular pair is
// (sqrt p(x|z), sqrt p(y|z)) with singular value one.
Eigen::MatrixXd q_matrix(const prob::JointXY& joint, const prob::Encoder& enc, Eigen::Index z);

// Threshold G[p(z|x)] = 1 / rho_r^2 with rho_r = max_z sigma_2(Q_{X,Y|Z=z}),
// computed with explicit deflation of the known top singular pair.
GResult g_threshold(const prob::JointXY& joint, const prob::Encoder& enc);

// Same threshold from first principles: the infimum of the ratio of
// quadratic forms (E[r^2(z|x)] - E[r^2(z)]) / (E[r^2(z|y)] - E[r^2(z)])
// over zero-conditional-mean perturbations, solved as a generalized
// symmetric eigenproblem with the constraints eliminated by projection.
// Cross-checks g_threshold to 1e-8 whenever |Z| >= |X|.
OracleResult g_threshold_oracle(const prob::JointXY& joint, const prob::Encoder& enc);

// Ratio of quadratic forms for one concrete direction (no infimum);
// invariant under r <- r + s(z).
double g_ratio(const prob::JointXY& joint, const prob::Encoder& enc,
               const RelativePerturbation& r);

// Variation coefficients of the IB objective (bits) along direction r:
// order 1 returns d IB / d eps, order 2 returns the coefficient of eps^2.
double ib_variation(const prob::JointXY& joint, const prob::Encoder& enc,
                    const RelativePerturbation& r, double beta, int order);

struct DiscoveryOptions {
  int patience = 5;        // K successive |dbeta| < delta steps
  double delta = 1e-3;     // precision floor and post-convergence nudge
  double max_ratio = 50.0; // stop when beta_new / beta reaches this
  double start_beta = 1.0;
  bool warm_start = true;  // reuse the previous beta's encoder inside the loop
  bool snapshots = false;
  int max_outer = 200;
};

// Fixed-point iteration beta <- G[p*_beta(z|x)], recording each converged
// root, nudging past it, and continuing until the ratio guard trips.
PhaseReport find_phase_transitions(const prob::JointXY& joint, Eigen::Index z_dim,
                                   const solver::SolveParams& solve_params,
                                   const DiscoveryOptions& options = {});

// Reporting heuristic: indices i where the forward-difference slope of
// i_yz vs beta jumps by more than `factor` times the local median slope.
std::vector<std::size_t> slope_jump_indices(const std::vector<double>& betas,
                                            const std::vector<double>& i_yz,
                                            double factor = 10.0);

}  // namespace ibkit::phase
