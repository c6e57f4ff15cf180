#include "ibkit/phase.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

#include "ibkit/errors.hpp"
#include "ibkit/log.hpp"

namespace ibkit::phase {

namespace {

constexpr double kLn2 = 0.6931471805599453;
constexpr double kVanishTol = 1e-12;

struct SecondMoments {
  double r2_zx = 0.0;  // E[r^2(z|x)]
  double r2_z = 0.0;   // E[r^2(z)]
  double r2_zy = 0.0;  // E[r^2(z|y)]
};

SecondMoments second_moments(const prob::JointXY& joint, const prob::Encoder& enc,
                             const Eigen::MatrixXd& r) {
  const prob::InducedDistributions ind = prob::markov_compose(joint, enc);
  SecondMoments m;
  for (Eigen::Index z = 0; z < enc.nz(); ++z) {
    for (Eigen::Index x = 0; x < enc.nx(); ++x) {
      m.r2_zx += ind.p_xz(x, z) * r(x, z) * r(x, z);
    }
    if (ind.p_z(z) <= 0.0) continue;
    double r_z = 0.0;
    for (Eigen::Index x = 0; x < enc.nx(); ++x) r_z += ind.p_x_given_z(x, z) * r(x, z);
    m.r2_z += ind.p_z(z) * r_z * r_z;
    for (Eigen::Index y = 0; y < joint.ny(); ++y) {
      const double pyz = ind.p_yz(y, z);
      if (pyz <= 0.0) continue;
      double r_zy = 0.0;
      for (Eigen::Index x = 0; x < enc.nx(); ++x) {
        r_zy += joint.p_xy()(x, y) * enc.q_zx()(x, z) * r(x, z);
      }
      r_zy /= pyz;  // E_{x ~ p(x|y,z)}[r(z|x)]
      m.r2_zy += pyz * r_zy * r_zy;
    }
  }
  return m;
}

// Orthonormal basis of the hyperplane orthogonal to c (Householder columns).
Eigen::MatrixXd hyperplane_basis(const Eigen::VectorXd& c) {
  const Eigen::Index n = c.size();
  Eigen::VectorXd v = c / c.norm();
  // Reflector H = I - 2 w w^T mapping e_k -> v, where k tracks the largest
  // |v| component for stability; columns != k of H then span v-perp.
  Eigen::Index k;
  v.cwiseAbs().maxCoeff(&k);
  Eigen::VectorXd w = v;
  w(k) += (v(k) >= 0.0 ? 1.0 : -1.0);
  w /= w.norm();
  Eigen::MatrixXd h = Eigen::MatrixXd::Identity(n, n) - 2.0 * w * w.transpose();
  Eigen::MatrixXd basis(n, n - 1);
  Eigen::Index col = 0;
  for (Eigen::Index j = 0; j < n; ++j) {
    if (j == k) continue;
    basis.col(col++) = h.col(j);
  }
  return basis;
}

Eigen::MatrixXd pseudo_inverse_psd(const Eigen::MatrixXd& m) {
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(m);
  const Eigen::VectorXd& vals = eig.eigenvalues();
  const double tol = std::max(1e-12, vals.cwiseAbs().maxCoeff() * 1e-12);
  Eigen::VectorXd inv = Eigen::VectorXd::Zero(vals.size());
  for (Eigen::Index i = 0; i < vals.size(); ++i) {
    if (vals(i) > tol) inv(i) = 1.0 / vals(i);
  }
  return eig.eigenvectors() * inv.asDiagonal() * eig.eigenvectors().transpose();
}

}  // namespace

void RelativePerturbation::validate(const prob::Encoder& enc) const {
  if (r.rows() != enc.nx() || r.cols() != enc.nz()) {
    throw Error(ErrorCode::InvalidPerturbation, "RelativePerturbation: shape mismatch");
  }
  for (Eigen::Index x = 0; x < enc.nx(); ++x) {
    const double mean = enc.q_zx().row(x).dot(r.row(x));
    if (std::abs(mean) > 1e-10) {
      throw Error(ErrorCode::InvalidPerturbation,
                  "RelativePerturbation: conditional mean " + std::to_string(mean) +
                      " at row " + std::to_string(x));
    }
  }
}

RelativePerturbation project_perturbation(const prob::Encoder& enc, Eigen::MatrixXd raw) {
  if (raw.rows() != enc.nx() || raw.cols() != enc.nz()) {
    throw Error(ErrorCode::InvalidPerturbation, "project_perturbation: shape mismatch");
  }
  for (Eigen::Index x = 0; x < enc.nx(); ++x) {
    raw.row(x).array() -= enc.q_zx().row(x).dot(raw.row(x));
  }
  return RelativePerturbation{std::move(raw)};
}

Eigen::MatrixXd q_matrix(const prob::JointXY& joint, const prob::Encoder& enc, Eigen::Index z) {
  if (enc.nx() != joint.nx()) {
    throw Error(ErrorCode::DimensionMismatch, "q_matrix: encoder rows != |X|");
  }
  if (z < 0 || z >= enc.nz()) throw Error(ErrorCode::OutOfRange, "q_matrix: bad cluster index");
  const prob::InducedDistributions ind = prob::markov_compose(joint, enc);
  if (ind.p_z(z) <= 0.0) {
    throw Error(ErrorCode::EmptyCluster, "q_matrix: p(z) = 0 for z = " + std::to_string(z));
  }
  Eigen::MatrixXd q = Eigen::MatrixXd::Zero(joint.nx(), joint.ny());
  for (Eigen::Index x = 0; x < joint.nx(); ++x) {
    const double px_z = ind.p_x_given_z(x, z);
    if (px_z <= 0.0) continue;
    for (Eigen::Index y = 0; y < joint.ny(); ++y) {
      const double py_z = ind.p_y_given_z(y, z);
      if (py_z <= 0.0) continue;
      const double pxy_z = joint.p_xy()(x, y) * enc.q_zx()(x, z) / ind.p_z(z);
      q(x, y) = pxy_z / std::sqrt(px_z * py_z);
    }
  }
  return q;
}

GResult g_threshold(const prob::JointXY& joint, const prob::Encoder& enc) {
  if (enc.nx() != joint.nx()) {
    throw Error(ErrorCode::DimensionMismatch, "g_threshold: encoder rows != |X|");
  }
  const prob::InducedDistributions ind = prob::markov_compose(joint, enc);
  GResult out;
  out.per_z_sigma2 = Eigen::VectorXd::Zero(enc.nz());
  for (Eigen::Index z = 0; z < enc.nz(); ++z) {
    if (ind.p_z(z) <= 0.0) continue;  // rho_m undefined on empty clusters
    std::vector<Eigen::Index> sx, sy;
    for (Eigen::Index x = 0; x < joint.nx(); ++x) {
      if (ind.p_x_given_z(x, z) > 0.0) sx.push_back(x);
    }
    for (Eigen::Index y = 0; y < joint.ny(); ++y) {
      if (ind.p_y_given_z(y, z) > 0.0) sy.push_back(y);
    }
    if (sx.size() < 2 || sy.size() < 2) continue;  // rank one, sigma_2 = 0
    Eigen::MatrixXd q(sx.size(), sy.size());
    Eigen::VectorXd ux(sx.size()), vy(sy.size());
    for (std::size_t a = 0; a < sx.size(); ++a) ux(a) = std::sqrt(ind.p_x_given_z(sx[a], z));
    for (std::size_t b = 0; b < sy.size(); ++b) vy(b) = std::sqrt(ind.p_y_given_z(sy[b], z));
    for (std::size_t a = 0; a < sx.size(); ++a) {
      for (std::size_t b = 0; b < sy.size(); ++b) {
        const double pxy_z = joint.p_xy()(sx[a], sy[b]) * enc.q_zx()(sx[a], z) / ind.p_z(z);
        q(a, b) = pxy_z / (ux(a) * vy(b));
      }
    }
    // The top pair (sqrt p(x|z), sqrt p(y|z), sigma = 1) is exact; deflate
    // it so sigma_2 is read as the top value of the remainder, immune to
    // ordering noise when sigma_2 approaches one.
    q -= ux * vy.transpose();
    const double sigma2 =
        std::clamp(Eigen::JacobiSVD<Eigen::MatrixXd>(q).singularValues()(0), 0.0, 1.0);
    out.per_z_sigma2(z) = sigma2;
    if (sigma2 > out.rho_r) {
      out.rho_r = sigma2;
      out.argmax_z = z;
    }
  }
  if (out.rho_r < kVanishTol) {
    out.infinite = true;
    out.g = std::numeric_limits<double>::infinity();
  } else {
    out.g = 1.0 / (out.rho_r * out.rho_r);
  }
  return out;
}

OracleResult g_threshold_oracle(const prob::JointXY& joint, const prob::Encoder& enc) {
  if (enc.nx() != joint.nx()) {
    throw Error(ErrorCode::DimensionMismatch, "g_threshold_oracle: encoder rows != |X|");
  }
  const Eigen::Index nx = joint.nx();
  const Eigen::Index ny = joint.ny();
  const Eigen::Index nz = enc.nz();
  const Eigen::Index dim = nx * nz;
  const prob::InducedDistributions ind = prob::markov_compose(joint, enc);
  auto flat = [nz](Eigen::Index x, Eigen::Index z) { return x * nz + z; };

  // Quadratic forms on vec(r): numerator N = A - C, denominator D = B - C.
  Eigen::MatrixXd a_form = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index x = 0; x < nx; ++x) {
    for (Eigen::Index z = 0; z < nz; ++z) a_form(flat(x, z), flat(x, z)) = ind.p_xz(x, z);
  }
  Eigen::MatrixXd c_form = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index z = 0; z < nz; ++z) {
    if (ind.p_z(z) <= 0.0) continue;
    Eigen::VectorXd a = Eigen::VectorXd::Zero(dim);
    for (Eigen::Index x = 0; x < nx; ++x) a(flat(x, z)) = ind.p_x_given_z(x, z);
    c_form += ind.p_z(z) * a * a.transpose();
  }
  Eigen::MatrixXd b_form = Eigen::MatrixXd::Zero(dim, dim);
  for (Eigen::Index z = 0; z < nz; ++z) {
    for (Eigen::Index y = 0; y < ny; ++y) {
      const double pyz = ind.p_yz(y, z);
      if (pyz <= 0.0) continue;
      Eigen::VectorXd b = Eigen::VectorXd::Zero(dim);
      for (Eigen::Index x = 0; x < nx; ++x) {
        b(flat(x, z)) = joint.p_xy()(x, y) * enc.q_zx()(x, z) / pyz;
      }
      b_form += pyz * b * b.transpose();
    }
  }
  const Eigen::MatrixXd n_form = a_form - c_form;
  const Eigen::MatrixXd d_form = b_form - c_form;

  // Eliminate the |X| zero-conditional-mean constraints by projecting onto
  // a block-diagonal orthonormal basis (one hyperplane per x row).
  const Eigen::Index sub = nx * (nz - 1);
  if (sub == 0) return OracleResult{0.0, true};
  Eigen::MatrixXd proj = Eigen::MatrixXd::Zero(dim, sub);
  for (Eigen::Index x = 0; x < nx; ++x) {
    const Eigen::MatrixXd basis = hyperplane_basis(enc.q_zx().row(x).transpose());
    proj.block(x * nz, x * (nz - 1), nz, nz - 1) = basis;
  }
  Eigen::MatrixXd n_sub = proj.transpose() * n_form * proj;
  Eigen::MatrixXd d_sub = proj.transpose() * d_form * proj;
  n_sub = 0.5 * (n_sub + n_sub.transpose()).eval();
  d_sub = 0.5 * (d_sub + d_sub.transpose()).eval();

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> d_eig(d_sub);
  const Eigen::VectorXd& d_vals = d_eig.eigenvalues();
  const double d_tol = std::max(kVanishTol, d_vals.cwiseAbs().maxCoeff() * 1e-10);
  std::vector<Eigen::Index> pos, null;
  for (Eigen::Index i = 0; i < d_vals.size(); ++i) {
    (d_vals(i) > d_tol ? pos : null).push_back(i);
  }
  if (pos.empty()) return OracleResult{0.0, true};

  Eigen::MatrixXd v_pos(sub, static_cast<Eigen::Index>(pos.size()));
  Eigen::MatrixXd v_null(sub, static_cast<Eigen::Index>(null.size()));
  for (std::size_t i = 0; i < pos.size(); ++i) v_pos.col(static_cast<Eigen::Index>(i)) = d_eig.eigenvectors().col(pos[i]);
  for (std::size_t i = 0; i < null.size(); ++i) v_null.col(static_cast<Eigen::Index>(i)) = d_eig.eigenvectors().col(null[i]);

  // Directions in null(D) can still lower the numerator; fold them in
  // through the Schur complement before whitening by the positive part.
  Eigen::MatrixXd schur = v_pos.transpose() * n_sub * v_pos;
  if (!null.empty()) {
    const Eigen::MatrixXd n_pn = v_pos.transpose() * n_sub * v_null;
    const Eigen::MatrixXd n_nn = v_null.transpose() * n_sub * v_null;
    schur -= n_pn * pseudo_inverse_psd(n_nn) * n_pn.transpose();
  }
  Eigen::VectorXd scale(static_cast<Eigen::Index>(pos.size()));
  for (std::size_t i = 0; i < pos.size(); ++i) {
    scale(static_cast<Eigen::Index>(i)) = 1.0 / std::sqrt(d_vals(pos[i]));
  }
  Eigen::MatrixXd white = scale.asDiagonal() * schur * scale.asDiagonal();
  white = 0.5 * (white + white.transpose()).eval();
  const double g = Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(white).eigenvalues()(0);
  return OracleResult{std::max(0.0, g), false};
}

double g_ratio(const prob::JointXY& joint, const prob::Encoder& enc,
               const RelativePerturbation& r) {
  if (r.r.rows() != enc.nx() || r.r.cols() != enc.nz()) {
    throw Error(ErrorCode::InvalidPerturbation, "g_ratio: shape mismatch");
  }
  const SecondMoments m = second_moments(joint, enc, r.r);
  const double denom = m.r2_zy - m.r2_z;
  if (std::abs(denom) < kVanishTol) {
    throw Error(ErrorCode::DegenerateForm, "g_ratio: denominator form vanishes");
  }
  return (m.r2_zx - m.r2_z) / denom;
}

double ib_variation(const prob::JointXY& joint, const prob::Encoder& enc,
                    const RelativePerturbation& r, double beta, int order) {
  if (order != 1 && order != 2) {
    throw Error(ErrorCode::OutOfRange, "ib_variation: order must be 1 or 2");
  }
  r.validate(enc);
  if (order == 2) {
    const SecondMoments m = second_moments(joint, enc, r.r);
    return 0.5 * ((m.r2_zx - m.r2_z) - beta * (m.r2_zy - m.r2_z)) / kLn2;
  }
  const prob::InducedDistributions ind = prob::markov_compose(joint, enc);
  double first_x = 0.0;
  for (Eigen::Index x = 0; x < enc.nx(); ++x) {
    for (Eigen::Index z = 0; z < enc.nz(); ++z) {
      const double pxz = ind.p_xz(x, z);
      if (pxz <= 0.0) continue;
      first_x += pxz * r.r(x, z) * std::log(enc.q_zx()(x, z) / ind.p_z(z));
    }
  }
  double first_y = 0.0;
  for (Eigen::Index z = 0; z < enc.nz(); ++z) {
    if (ind.p_z(z) <= 0.0) continue;
    for (Eigen::Index y = 0; y < joint.ny(); ++y) {
      const double pyz = ind.p_yz(y, z);
      if (pyz <= 0.0) continue;
      double r_zy = 0.0;
      for (Eigen::Index x = 0; x < enc.nx(); ++x) {
        r_zy += joint.p_xy()(x, y) * enc.q_zx()(x, z) * r.r(x, z);
      }
      r_zy /= pyz;
      first_y += pyz * r_zy * std::log(pyz / (joint.p_y()(y) * ind.p_z(z)));
    }
  }
  return (first_x - beta * first_y) / kLn2;
}

PhaseReport find_phase_transitions(const prob::JointXY& joint, Eigen::Index z_dim,
                                   const solver::SolveParams& solve_params,
                                   const DiscoveryOptions& options) {
  if (options.patience < 1 || !(options.delta > 0.0) || !(options.max_ratio > 1.0)) {
    throw Error(ErrorCode::OutOfRange, "find_phase_transitions: bad discovery options");
  }
  PhaseReport report;
  solver::SolveParams params = solve_params;
  params.z_dim = z_dim;

  // While the iteration dwells at a root (small |dbeta|) the branch is
  // already tracked by the warm candidate; exploration restarts only matter
  // when beta actually moves.
  auto probe = [&](double beta, const prob::Encoder* warm, bool dwell) {
    solver::SolveParams step_params = params;
    step_params.beta = beta;
    if (dwell && warm != nullptr) step_params.restarts = 1;
    solver::SolveResult solved = warm ? solver::ba_ib_solve_warm(joint, step_params, *warm)
                                      : solver::ba_ib_solve(joint, step_params);
    const GResult g = g_threshold(joint, solved.encoder);
    report.trace.push_back({beta, g.g, solved.i_xz, solved.i_yz});
    if (options.snapshots) report.encoder_snapshots.push_back(solved.encoder.q_zx());
    return std::make_pair(solved, g);
  };

  auto [solved, g0] = probe(options.start_beta, nullptr, false);
  prob::Encoder current = solved.encoder;
  if (g0.infinite) {
    report.warnings.push_back("diverged-ratio: threshold infinite at the starting beta");
    return report;
  }

  double beta = options.start_beta;
  double beta_new = g0.g;
  int count = 0;
  int unconverged_streak = solved.converged ? 0 : 1;
  // The loop dwells at each root for `patience` steps where BA slows down
  // critically, so the failure streak must outlast that dwell.
  const int streak_limit = 2 * options.patience + 10;
  for (int outer = 0; outer < options.max_outer && beta_new / beta < options.max_ratio; ++outer) {
    const bool dwell = std::abs(beta_new - beta) < options.delta;
    beta = beta_new;
    auto [inner, g] = probe(beta, options.warm_start ? &current : nullptr, dwell);
    current = inner.encoder;
    unconverged_streak = inner.converged ? 0 : unconverged_streak + 1;
    if (unconverged_streak >= streak_limit) {
      throw Error(ErrorCode::NoConvergence,
                  "find_phase_transitions: inner solver failed repeatedly near beta = " +
                      std::to_string(beta));
    }
    if (g.infinite) {
      beta_new = std::numeric_limits<double>::infinity();
      continue;
    }
    beta_new = g.g;
    if (std::abs(beta_new - beta) < options.delta) {
      if (++count >= options.patience) {
        if (report.transitions.empty() ||
            beta_new > report.transitions.back() + 0.5 * options.delta) {
          report.transitions.push_back(beta_new);
          report.transition_encoders.push_back(current.q_zx());
        }
        beta_new += options.delta;
        count = 0;
      }
    } else {
      count = 0;
    }
  }
  if (report.transitions.empty()) {
    report.warnings.push_back("diverged-ratio: guard tripped before any transition converged");
  }
  if (static_cast<Eigen::Index>(report.transitions.size()) > joint.ny() - 1) {
    std::ostringstream msg;
    msg << "found " << report.transitions.size() << " transitions, more than |Y|-1 = "
        << (joint.ny() - 1);
    report.warnings.push_back(msg.str());
    log::warn("find_phase_transitions: " + msg.str());
  }
  return report;
}

std::vector<std::size_t> slope_jump_indices(const std::vector<double>& betas,
                                            const std::vector<double>& i_yz,
                                            double factor) {
  std::vector<std::size_t> jumps;
  if (betas.size() != i_yz.size() || betas.size() < 4) return jumps;
  std::vector<double> slope(betas.size() - 1);
  for (std::size_t i = 0; i + 1 < betas.size(); ++i) {
    const double db = betas[i + 1] - betas[i];
    slope[i] = db > 0.0 ? (i_yz[i + 1] - i_yz[i]) / db : 0.0;
  }
  // A transition shows up as a jump in the slope; compare each slope change
  // against the local median change magnitude.
  std::vector<double> change(slope.size() - 1);
  for (std::size_t i = 0; i + 1 < slope.size(); ++i) change[i] = std::abs(slope[i + 1] - slope[i]);
  for (std::size_t i = 0; i < change.size(); ++i) {
    std::vector<double> window;
    const std::size_t lo = i >= 3 ? i - 3 : 0;
    const std::size_t hi = std::min(i + 3, change.size() - 1);
    for (std::size_t j = lo; j <= hi; ++j) {
      if (j != i) window.push_back(change[j]);
    }
    if (window.empty()) continue;
    std::nth_element(window.begin(), window.begin() + window.size() / 2, window.end());
    const double med = window[window.size() / 2];
    const bool jump = med > 0.0 ? change[i] > factor * med : change[i] > 0.0;
    if (jump) jumps.push_back(i + 1);  // index of the grid point after the kink
  }
  return jumps;
}

}  // namespace ibkit::phase
