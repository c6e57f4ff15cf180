#include "ibkit/solver.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "ibkit/errors.hpp"
#include "ibkit/rng.hpp"

namespace ibkit::solver {

namespace {


// KL(p(y|x) || p(y|z)) in nats for every (x, z); empty clusters are left at
// zero and masked out by the caller. Infinite divergences (cluster lacks
// support the row needs) become a large finite penalty so the row simply
// avoids that cluster.
Eigen::MatrixXd divergence_table(const Eigen::MatrixXd& p_y_given_x,
                                 const prob::InducedDistributions& ind) {
  const Eigen::Index nx = p_y_given_x.rows();
  const Eigen::Index nz = ind.p_z.size();
  constexpr double kInfPenalty = 1e6;
  Eigen::MatrixXd d = Eigen::MatrixXd::Zero(nx, nz);
  for (Eigen::Index z = 0; z < nz; ++z) {
    if (ind.p_z(z) <= 0.0) continue;
    for (Eigen::Index x = 0; x < nx; ++x) {
      double acc = 0.0;
      for (Eigen::Index y = 0; y < p_y_given_x.cols(); ++y) {
        const double p = p_y_given_x(x, y);
        if (p <= 0.0) continue;
        const double q = ind.p_y_given_z(y, z);
        if (q <= 0.0) {
          acc = kInfPenalty;
          break;
        }
        acc += p * std::log(p / q);
      }
      d(x, z) = acc;
    }
  }
  return d;
}

struct RunOutcome {
  Eigen::MatrixXd encoder;
  int iterations = 0;
  bool converged = false;
};

// One self-consistent update into `next`, returning the max entrywise
// change. For full-support joints the score reduces to
// (1 - beta) ln p(z) + beta sum_y p(y|x) ln p(y,z); the constant
// -beta sum_y p(y|x) ln p(y|x) cancels in the row normalization.
class BaStepper {
public:
  BaStepper(const prob::JointXY& joint, Eigen::Index nz)
      : joint_(joint),
        p_y_given_x_(joint.p_y_given_x()),
        full_support_(joint.p_xy().minCoeff() > 0.0),
        p_z_(nz),
        p_yz_(joint.ny(), nz),
        log_pyz_(joint.ny(), nz),
        score_(joint.nx(), nz) {}

  double step(const Eigen::MatrixXd& enc, double beta, Eigen::MatrixXd& next) {
    if (full_support_) return step_fast(enc, beta, next);
    return step_guarded(enc, beta, next);
  }

private:
  double step_fast(const Eigen::MatrixXd& enc, double beta, Eigen::MatrixXd& next) {
    const Eigen::Index nx = enc.rows();
    const Eigen::Index nz = enc.cols();
    p_z_.noalias() = enc.transpose() * joint_.p_x();
    p_yz_.noalias() = joint_.p_xy().transpose() * enc;
    for (Eigen::Index z = 0; z < nz; ++z) {
      if (p_z_(z) <= 0.0) {
        log_pyz_.col(z).setZero();
        continue;
      }
      for (Eigen::Index y = 0; y < log_pyz_.rows(); ++y) log_pyz_(y, z) = std::log(p_yz_(y, z));
    }
    score_.noalias() = beta * (p_y_given_x_ * log_pyz_);
    double delta = 0.0;
    for (Eigen::Index x = 0; x < nx; ++x) {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index z = 0; z < nz; ++z) {
        if (p_z_(z) <= 0.0) continue;
        score_(x, z) += (1.0 - beta) * std::log(p_z_(z));
        best = std::max(best, score_(x, z));
      }
      double row_sum = 0.0;
      for (Eigen::Index z = 0; z < nz; ++z) {
        const double v = p_z_(z) > 0.0 ? std::exp(score_(x, z) - best) : 0.0;
        next(x, z) = v;
        row_sum += v;
      }
      for (Eigen::Index z = 0; z < nz; ++z) {
        next(x, z) /= row_sum;
        delta = std::max(delta, std::abs(next(x, z) - enc(x, z)));
      }
    }
    return delta;
  }

  double step_guarded(const Eigen::MatrixXd& enc, double beta, Eigen::MatrixXd& next) {
    prob::InducedDistributions ind = prob::markov_compose(joint_, prob::Encoder(enc));
    const Eigen::MatrixXd d = divergence_table(p_y_given_x_, ind);
    double delta = 0.0;
    for (Eigen::Index x = 0; x < enc.rows(); ++x) {
      double best = -std::numeric_limits<double>::infinity();
      for (Eigen::Index z = 0; z < enc.cols(); ++z) {
        if (ind.p_z(z) <= 0.0) continue;
        best = std::max(best, std::log(ind.p_z(z)) - beta * d(x, z));
      }
      double row_sum = 0.0;
      for (Eigen::Index z = 0; z < enc.cols(); ++z) {
        double v = 0.0;
        if (ind.p_z(z) > 0.0) v = std::exp(std::log(ind.p_z(z)) - beta * d(x, z) - best);
        next(x, z) = v;
        row_sum += v;
      }
      for (Eigen::Index z = 0; z < enc.cols(); ++z) {
        next(x, z) /= row_sum;
        delta = std::max(delta, std::abs(next(x, z) - enc(x, z)));
      }
    }
    return delta;
  }

  const prob::JointXY& joint_;
  Eigen::MatrixXd p_y_given_x_;
  bool full_support_;
  Eigen::VectorXd p_z_;
  Eigen::MatrixXd p_yz_;
  Eigen::MatrixXd log_pyz_;
  Eigen::MatrixXd score_;
};

RunOutcome run_ba(const prob::JointXY& joint, Eigen::MatrixXd enc, const SolveParams& params) {
  BaStepper stepper(joint, enc.cols());
  RunOutcome out;
  const int anneal_steps = params.anneal ? params.anneal->steps : 0;
  Eigen::MatrixXd next(enc.rows(), enc.cols());
  Eigen::MatrixXd e0, e1, candidate(enc.rows(), enc.cols());
  double delta = std::numeric_limits<double>::infinity();

  // Convergence near a transition slows critically; every 64 plain updates
  // an Aitken extrapolation along the dominant slow direction is attempted
  // and kept only when it strictly improves both the step size and the
  // objective, preserving descent and determinism.
  constexpr int kCheckpoint = 64;

  for (int it = 0; it < params.max_iter; ++it) {
    double beta = params.beta;
    if (it < anneal_steps) {
      const double t = static_cast<double>(it) / static_cast<double>(anneal_steps);
      beta = params.anneal->start_beta + t * (params.beta - params.anneal->start_beta);
    }
    const int phase_in_cycle = (it - anneal_steps) % kCheckpoint;
    if (it >= anneal_steps && phase_in_cycle == kCheckpoint - 2) e0 = enc;
    if (it >= anneal_steps && phase_in_cycle == kCheckpoint - 1) e1 = enc;
    delta = stepper.step(enc, beta, next);
    enc.swap(next);
    out.iterations = it + 1;
    if (it >= anneal_steps && delta < params.tol) {
      out.converged = true;
      break;
    }
    if (it >= anneal_steps && phase_in_cycle == kCheckpoint - 1 && e0.size() > 0) {
      const Eigen::MatrixXd d1 = e1 - e0;
      const Eigen::MatrixXd d2 = enc - e1;
      const double denom = d1.squaredNorm();
      if (denom > 0.0) {
        // Rayleigh estimate of the dominant contraction eigenvalue; negative
        // values capture oscillatory (period-two) approaches. Ratios within
        // 1e-9 of one are marginal and the geometric tail sum is meaningless.
        const double ratio = (d1.array() * d2.array()).sum() / denom;
        if (std::abs(ratio) > 0.2 && std::abs(ratio) < 1.0 - 1e-9) {
          candidate = enc + (ratio / (1.0 - ratio)) * d2;
          bool valid = true;
          for (Eigen::Index x = 0; x < candidate.rows() && valid; ++x) {
            double row_sum = 0.0;
            for (Eigen::Index z = 0; z < candidate.cols(); ++z) {
              if (candidate(x, z) < 0.0) {
                valid = false;
                break;
              }
              row_sum += candidate(x, z);
            }
            if (valid && row_sum > 0.0) candidate.row(x) /= row_sum;
            else valid = false;
          }
          if (valid) {
            const double cand_delta = stepper.step(candidate, beta, next);
            if (cand_delta < 0.9 * delta &&
                ib_objective(joint, prob::Encoder(next), beta) <=
                    ib_objective(joint, prob::Encoder(enc), beta) + 1e-12) {
              enc.swap(next);  // adopt the post-extrapolation update
              delta = cand_delta;
              if (delta < params.tol) {
                out.converged = true;
                break;
              }
            }
          }
        }
      }
    }
  }
  out.encoder = std::move(enc);
  return out;
}

Eigen::MatrixXd jittered_uniform(Eigen::Index nx, Eigen::Index nz, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Eigen::MatrixXd enc(nx, nz);
  for (Eigen::Index x = 0; x < nx; ++x) {
    double sum = 0.0;
    for (Eigen::Index z = 0; z < nz; ++z) {
      enc(x, z) = (1.0 + 1e-2 * rng.symmetric()) / static_cast<double>(nz);
      sum += enc(x, z);
    }
    enc.row(x) /= sum;
  }
  return enc;
}

Eigen::MatrixXd jittered_copy(const Eigen::MatrixXd& base, std::uint64_t seed) {
  SplitMix64 rng(seed);
  Eigen::MatrixXd enc = base;
  for (Eigen::Index x = 0; x < enc.rows(); ++x) {
    double sum = 0.0;
    for (Eigen::Index z = 0; z < enc.cols(); ++z) {
      enc(x, z) *= 1.0 + 1e-2 * rng.symmetric();
      sum += enc(x, z);
    }
    if (sum > 0.0) enc.row(x) /= sum;
  }
  return enc;
}

SolveResult finish(const prob::JointXY& joint, const SolveParams& params, RunOutcome run) {
  SolveResult result;
  result.encoder = prob::Encoder(run.encoder);
  prob::InducedDistributions ind = prob::markov_compose(joint, result.encoder);
  result.i_xz = prob::mutual_information(ind.p_xz);
  result.i_yz = prob::mutual_information(ind.p_yz);
  result.objective = result.i_xz - params.beta * result.i_yz;
  result.iterations = run.iterations;
  result.converged = run.converged;
  return result;
}

SolveResult solve_candidates(const prob::JointXY& joint, const SolveParams& params,
                             const std::optional<Eigen::MatrixXd>& warm) {
  params.validate();
  std::optional<SolveResult> best;
  bool any_converged = false;

  // The exact trivial encoder is a stationary point and attains objective
  // zero, so the returned minimum can never exceed it.
  {
    RunOutcome trivial;
    trivial.encoder = Eigen::MatrixXd::Constant(joint.nx(), params.z_dim,
                                                1.0 / static_cast<double>(params.z_dim));
    trivial.converged = true;
    best = finish(joint, params, std::move(trivial));
  }

  if (warm) {
    RunOutcome run = run_ba(joint, jittered_copy(*warm, derive_seed(params.seed, 0x77)), params);
    any_converged = any_converged || run.converged;
    SolveResult candidate = finish(joint, params, std::move(run));
    if (candidate.objective < best->objective) best = std::move(candidate);
  }

  for (int r = 0; r < params.restarts; ++r) {
    RunOutcome run = run_ba(
        joint, jittered_uniform(joint.nx(), params.z_dim, derive_seed(params.seed, static_cast<std::uint64_t>(r))),
        params);
    any_converged = any_converged || run.converged;
    SolveResult candidate = finish(joint, params, std::move(run));
    if (candidate.objective < best->objective) best = std::move(candidate);
  }
  if (!any_converged) best->converged = false;
  return std::move(*best);
}

}  // namespace

void SolveParams::validate() const {
  if (!(beta > 0.0)) throw Error(ErrorCode::OutOfRange, "SolveParams: beta must be positive");
  if (z_dim < 2) throw Error(ErrorCode::OutOfRange, "SolveParams: z_dim must be >= 2");
  if (!(tol > 0.0)) throw Error(ErrorCode::OutOfRange, "SolveParams: tol must be positive");
  if (max_iter < 1) throw Error(ErrorCode::OutOfRange, "SolveParams: max_iter must be >= 1");
  if (restarts < 1) throw Error(ErrorCode::OutOfRange, "SolveParams: restarts must be >= 1");
}

double ib_objective(const prob::JointXY& joint, const prob::Encoder& enc, double beta) {
  prob::InducedDistributions ind = prob::markov_compose(joint, enc);
  return prob::mutual_information(ind.p_xz) - beta * prob::mutual_information(ind.p_yz);
}

prob::Encoder ba_update(const prob::JointXY& joint, const prob::Encoder& enc, double beta) {
  SolveParams one;
  one.beta = beta;
  one.z_dim = enc.nz();
  one.max_iter = 1;
  one.tol = std::numeric_limits<double>::infinity();
  RunOutcome run = run_ba(joint, enc.q_zx(), one);
  return prob::Encoder(run.encoder);
}

SolveResult ba_ib_solve(const prob::JointXY& joint, const SolveParams& params) {
  return solve_candidates(joint, params, std::nullopt);
}

SolveResult ba_ib_solve_warm(const prob::JointXY& joint, const SolveParams& params,
                             const prob::Encoder& warm_start) {
  if (warm_start.nx() != joint.nx() || warm_start.nz() != params.z_dim) {
    throw Error(ErrorCode::DimensionMismatch, "ba_ib_solve_warm: warm start shape mismatch");
  }
  return solve_candidates(joint, params, warm_start.q_zx());
}

SolveResult dib_solve(const prob::JointXY& joint, double beta_i, Eigen::Index z_dim,
                      std::uint64_t seed, int max_iter) {
  if (!(beta_i >= 0.0)) throw Error(ErrorCode::OutOfRange, "dib_solve: beta_i must be >= 0");
  if (z_dim < 1) throw Error(ErrorCode::OutOfRange, "dib_solve: z_dim must be >= 1");
  const Eigen::Index nx = joint.nx();
  const Eigen::MatrixXd p_y_given_x = joint.p_y_given_x();

  auto encoder_of = [&](const std::vector<Eigen::Index>& a) {
    Eigen::MatrixXd q = Eigen::MatrixXd::Zero(nx, z_dim);
    for (Eigen::Index x = 0; x < nx; ++x) q(x, a[static_cast<std::size_t>(x)]) = 1.0;
    return prob::Encoder(q);
  };
  // For one-hot encoders I(X;Z) = H(Z), so the minimized score
  // H(Z) - beta_i I(Z;Y) matches the SolveResult objective form.
  auto dib_score = [&](const prob::Encoder& enc) {
    prob::InducedDistributions ind = prob::markov_compose(joint, enc);
    const double h_z = prob::entropy(ind.p_z);
    const double i = prob::mutual_information(ind.p_yz);
    return std::make_pair(h_z - beta_i * i, std::make_pair(h_z, i));
  };

  auto run_from = [&](std::vector<Eigen::Index> assign) {
    SolveResult best;
    best.objective = std::numeric_limits<double>::infinity();
    bool stable = false;
    int it = 0;
    for (; it < max_iter; ++it) {
      prob::Encoder enc = encoder_of(assign);
      auto [score, hi] = dib_score(enc);
      if (score < best.objective) {
        best.encoder = enc;
        best.objective = score;
        best.i_xz = hi.first;  // H(Z) for a deterministic encoder
        best.i_yz = hi.second;
      }
      prob::InducedDistributions ind = prob::markov_compose(joint, enc);
      std::vector<Eigen::Index> next(static_cast<std::size_t>(nx));
      for (Eigen::Index x = 0; x < nx; ++x) {
        double best_score = -std::numeric_limits<double>::infinity();
        Eigen::Index best_z = 0;
        for (Eigen::Index z = 0; z < z_dim; ++z) {
          if (ind.p_z(z) <= 0.0) continue;  // the rule cannot resurrect a cluster
          double kl = 0.0;
          for (Eigen::Index y = 0; y < joint.ny(); ++y) {
            const double p = p_y_given_x(x, y);
            if (p <= 0.0) continue;
            const double q = ind.p_y_given_z(y, z);
            if (q <= 0.0) {
              kl = std::numeric_limits<double>::infinity();
              break;
            }
            kl += p * std::log2(p / q);
          }
          const double s = std::log2(ind.p_z(z)) - beta_i * kl;
          if (s > best_score) {
            best_score = s;
            best_z = z;
          }
        }
        next[static_cast<std::size_t>(x)] = best_z;
      }
      if (next == assign) {
        stable = true;
        break;
      }
      assign = std::move(next);
    }
    best.iterations = it;
    best.converged = stable;
    return best;
  };

  // Hard assignments cannot repopulate a dead cluster, so run a small fixed
  // set of starts: spread round-robin, fully collapsed, and seeded draws.
  std::vector<std::vector<Eigen::Index>> starts;
  {
    SplitMix64 rng(seed);
    std::vector<Eigen::Index> order(static_cast<std::size_t>(nx));
    for (Eigen::Index x = 0; x < nx; ++x) order[static_cast<std::size_t>(x)] = x;
    for (Eigen::Index x = nx - 1; x > 0; --x) {
      const Eigen::Index j = static_cast<Eigen::Index>(rng.next() % static_cast<std::uint64_t>(x + 1));
      std::swap(order[static_cast<std::size_t>(x)], order[static_cast<std::size_t>(j)]);
    }
    std::vector<Eigen::Index> round_robin(static_cast<std::size_t>(nx));
    for (Eigen::Index i = 0; i < nx; ++i) round_robin[static_cast<std::size_t>(order[static_cast<std::size_t>(i)])] = i % z_dim;
    starts.push_back(std::move(round_robin));
    starts.emplace_back(static_cast<std::size_t>(nx), 0);
    for (int r = 0; r < 2; ++r) {
      std::vector<Eigen::Index> random(static_cast<std::size_t>(nx));
      for (auto& a : random) a = static_cast<Eigen::Index>(rng.next() % static_cast<std::uint64_t>(z_dim));
      starts.push_back(std::move(random));
    }
  }
  SolveResult best;
  best.objective = std::numeric_limits<double>::infinity();
  for (auto& start : starts) {
    SolveResult candidate = run_from(std::move(start));
    if (candidate.objective < best.objective) best = std::move(candidate);
  }
  return best;
}

std::vector<SolveResult> sweep(const prob::JointXY& joint, Eigen::Index z_dim,
                               const std::vector<double>& beta_grid, SolveParams params,
                               const SweepOptions& options) {
  if (beta_grid.empty()) throw Error(ErrorCode::OrderViolation, "sweep: empty beta grid");
  for (std::size_t i = 1; i < beta_grid.size(); ++i) {
    if (!(beta_grid[i] > beta_grid[i - 1])) {
      throw Error(ErrorCode::OrderViolation, "sweep: beta grid must be strictly ascending");
    }
  }
  params.z_dim = z_dim;
  std::vector<SolveResult> results;
  results.reserve(beta_grid.size());
  const std::uint64_t base_seed = params.seed;
  for (std::size_t i = 0; i < beta_grid.size(); ++i) {
    params.beta = beta_grid[i];
    params.seed = base_seed ^ static_cast<std::uint64_t>(i);
    if (options.warm_start && !results.empty()) {
      results.push_back(ba_ib_solve_warm(joint, params, results.back().encoder));
    } else {
      results.push_back(ba_ib_solve(joint, params));
    }
  }
  return results;
}

std::vector<double> log_spaced(double beta_min, double beta_max, int steps) {
  if (steps < 1 || !(beta_min > 0.0) || (steps > 1 && !(beta_max > beta_min))) {
    throw Error(ErrorCode::OutOfRange, "log_spaced: need 0 < beta_min < beta_max and steps >= 1");
  }
  std::vector<double> grid(static_cast<std::size_t>(steps));
  if (steps == 1) {
    grid[0] = beta_min;
    return grid;
  }
  const double ratio = std::log(beta_max / beta_min) / static_cast<double>(steps - 1);
  for (int i = 0; i < steps; ++i) grid[static_cast<std::size_t>(i)] = beta_min * std::exp(ratio * i);
  grid.back() = beta_max;
  return grid;
}

}  // namespace ibkit::solver
