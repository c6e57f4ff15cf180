#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <optional>
#include <vector>

#include "ibkit/prob.hpp"

namespace ibkit::solver {

struct AnnealSchedule {
  double start_beta = 1.0;
  int steps = 0;  // linear ramp from start_beta to the target beta
};

struct SolveParams {
  double beta = 1.0;
  Eigen::Index z_dim = 2;
  double tol = 1e-10;     // max entrywise encoder change at the fixed point
  int max_iter = 100000;
  int restarts = 5;
  std::uint64_t seed = 0;
  std::optional<AnnealSchedule> anneal;

  void validate() const;
};

struct SolveResult {
  prob::Encoder encoder{Eigen::MatrixXd::Ones(1, 1)};
  double objective = 0.0;  // I(X;Z) - beta I(Y;Z) in bits (DIB: H(Z) - beta_i I(Z;Y))
  double i_xz = 0.0;       // for DIB results this is H(Z)
  double i_yz = 0.0;
  int iterations = 0;
  bool converged = false;
};

// IB objective I(X;Z) - beta I(Y;Z) in bits.
double ib_objective(const prob::JointXY& joint, const prob::Encoder& enc, double beta);

// One self-consistent update p'(z|x) proportional to p(z) exp(-beta
// KL(p(y|x) || p(y|z))), computed in a numerically stable log-space form.
// Empty clusters keep their zero column.
prob::Encoder ba_update(const prob::JointXY& joint, const prob::Encoder& enc, double beta);

// Tabular Blahut-Arimoto solve: best of `restarts` jittered starts plus the
// exact trivial encoder; flagged unconverged when every restart hits
// max_iter.
SolveResult ba_ib_solve(const prob::JointXY& joint, const SolveParams& params);

// Same solve but starting from a given encoder (jittered), used for
// warm-started continuation. Restart count in params still applies on top
// of the warm candidate.
SolveResult ba_ib_solve_warm(const prob::JointXY& joint, const SolveParams& params,
                             const prob::Encoder& warm_start);

// Deterministic-IB hard clustering. beta_i weights prediction: assignments
// follow argmax_z [log2 p(z) - beta_i KL(p(y|x) || p(y|z))], ties to the
// lowest z. Cycling runs flag converged = false and keep the best-scoring
// iterate.
SolveResult dib_solve(const prob::JointXY& joint, double beta_i, Eigen::Index z_dim,
                      std::uint64_t seed, int max_iter = 1000);

struct SweepOptions {
  bool warm_start = false;  // reuse the previous beta's encoder as one candidate
};

// One solve per beta, ascending grid required (OrderViolation otherwise).
std::vector<SolveResult> sweep(const prob::JointXY& joint, Eigen::Index z_dim,
                               const std::vector<double>& beta_grid, SolveParams params,
                               const SweepOptions& options = {});

// Log-spaced grid helper for sweeps, endpoints included.
std::vector<double> log_spaced(double beta_min, double beta_max, int steps);

}  // namespace ibkit::solver
