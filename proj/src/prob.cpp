#include "ibkit/prob.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <sstream>
#include <utility>
#include <vector>

#include "ibkit/log.hpp"

namespace ibkit::prob {

double sorted_sum(std::vector<double>& terms) noexcept {
  std::sort(terms.begin(), terms.end());
  double acc = 0.0;
  for (double t : terms) acc += t;
  return acc;
}

namespace {

double xlog2x(double x) noexcept { return x > 0.0 ? x * std::log2(x) : 0.0; }

double neg_plog2p_sum(const Eigen::MatrixXd& mass) {
  std::vector<double> terms;
  terms.reserve(static_cast<std::size_t>(mass.size()));
  for (Eigen::Index i = 0; i < mass.rows(); ++i) {
    for (Eigen::Index j = 0; j < mass.cols(); ++j) terms.push_back(-xlog2x(mass(i, j)));
  }
  return sorted_sum(terms);
}

// Shared validation: rejects negative mass, accepts |sum-1| <= 1e-9 as is,
// renormalizes deviations up to 1e-6 with a warning, rejects anything worse.
void validate_and_repair(Eigen::Ref<Eigen::MatrixXd> mass, const char* what) {
  for (Eigen::Index i = 0; i < mass.rows(); ++i) {
    for (Eigen::Index j = 0; j < mass.cols(); ++j) {
      double v = mass(i, j);
      if (v < -kNegativeTolerance) {
        std::ostringstream msg;
        msg << what << ": negative mass " << v << " at (" << i << "," << j << ")";
        throw Error(ErrorCode::NegativeMass, msg.str());
      }
      if (v < 0.0) mass(i, j) = 0.0;
    }
  }
  const double total = mass.sum();
  const double dev = std::abs(total - 1.0);
  if (dev <= kMassTolerance) return;
  if (dev <= kRenormTolerance) {
    mass /= total;
    std::ostringstream msg;
    msg << what << ": total mass " << total << " renormalized to 1";
    log::warn(msg.str());
    return;
  }
  std::ostringstream msg;
  msg << what << ": total mass " << total << " deviates from 1 beyond " << kRenormTolerance;
  throw Error(ErrorCode::NotNormalized, msg.str());
}

}  // namespace

JointXY::JointXY(Eigen::MatrixXd p_xy,
                 std::vector<std::string> x_labels,
                 std::vector<std::string> y_labels)
    : p_xy_(std::move(p_xy)), x_labels_(std::move(x_labels)), y_labels_(std::move(y_labels)) {
  if (p_xy_.rows() < 1 || p_xy_.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "JointXY: empty table");
  }
  if (!x_labels_.empty() && static_cast<Eigen::Index>(x_labels_.size()) != p_xy_.rows()) {
    throw Error(ErrorCode::DimensionMismatch, "JointXY: x label count mismatch");
  }
  if (!y_labels_.empty() && static_cast<Eigen::Index>(y_labels_.size()) != p_xy_.cols()) {
    throw Error(ErrorCode::DimensionMismatch, "JointXY: y label count mismatch");
  }
  validate_and_repair(p_xy_, "JointXY");

  std::ostringstream note;
  Eigen::VectorXd row_sum = p_xy_.rowwise().sum();
  Eigen::VectorXd col_sum = p_xy_.colwise().sum();
  std::vector<Eigen::Index> keep_x, keep_y;
  for (Eigen::Index i = 0; i < p_xy_.rows(); ++i) {
    if (row_sum(i) > 0.0) keep_x.push_back(i);
    else note << " stripped_x=" << i;
  }
  for (Eigen::Index j = 0; j < p_xy_.cols(); ++j) {
    if (col_sum(j) > 0.0) keep_y.push_back(j);
    else note << " stripped_y=" << j;
  }
  if (keep_x.empty() || keep_y.empty()) {
    throw Error(ErrorCode::NotNormalized, "JointXY: no support left after stripping");
  }
  if (static_cast<Eigen::Index>(keep_x.size()) != p_xy_.rows() ||
      static_cast<Eigen::Index>(keep_y.size()) != p_xy_.cols()) {
    Eigen::MatrixXd kept(keep_x.size(), keep_y.size());
    std::vector<std::string> kept_xl, kept_yl;
    for (std::size_t a = 0; a < keep_x.size(); ++a) {
      for (std::size_t b = 0; b < keep_y.size(); ++b) kept(a, b) = p_xy_(keep_x[a], keep_y[b]);
      if (!x_labels_.empty()) kept_xl.push_back(x_labels_[keep_x[a]]);
    }
    if (!y_labels_.empty()) {
      for (Eigen::Index j : keep_y) kept_yl.push_back(y_labels_[j]);
    }
    p_xy_ = std::move(kept);
    x_labels_ = std::move(kept_xl);
    y_labels_ = std::move(kept_yl);
    provenance_ = "zero-mass symbols stripped:" + note.str();
    log::warn("JointXY:" + note.str());
  }
  p_x_ = p_xy_.rowwise().sum();
  p_y_ = p_xy_.colwise().sum();
}

Eigen::MatrixXd JointXY::p_y_given_x() const {
  Eigen::MatrixXd cond = p_xy_;
  for (Eigen::Index i = 0; i < cond.rows(); ++i) cond.row(i) /= p_x_(i);
  return cond;
}

Eigen::MatrixXd JointXY::p_x_given_y() const {
  Eigen::MatrixXd cond = p_xy_.transpose();
  for (Eigen::Index j = 0; j < cond.rows(); ++j) cond.row(j) /= p_y_(j);
  return cond;
}

JointXY JointXY::permute_x(const std::vector<Eigen::Index>& perm) const {
  if (static_cast<Eigen::Index>(perm.size()) != nx()) {
    throw Error(ErrorCode::DimensionMismatch, "permute_x: wrong permutation size");
  }
  Eigen::MatrixXd out(nx(), ny());
  std::vector<std::string> labels;
  for (Eigen::Index i = 0; i < nx(); ++i) {
    out.row(i) = p_xy_.row(perm[i]);
    if (!x_labels_.empty()) labels.push_back(x_labels_[perm[i]]);
  }
  return JointXY(std::move(out), std::move(labels), y_labels_);
}

Encoder::Encoder(Eigen::MatrixXd q_zx) : q_zx_(std::move(q_zx)) {
  if (q_zx_.rows() < 1 || q_zx_.cols() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "Encoder: empty table");
  }
  for (Eigen::Index i = 0; i < q_zx_.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < q_zx_.cols(); ++j) {
      double v = q_zx_(i, j);
      if (v < -kNegativeTolerance) {
        throw Error(ErrorCode::NegativeMass, "Encoder: negative entry in row " + std::to_string(i));
      }
      if (v < 0.0) q_zx_(i, j) = 0.0;
      sum += q_zx_(i, j);
    }
    if (std::abs(sum - 1.0) > kMassTolerance) {
      throw Error(ErrorCode::NotNormalized, "Encoder: row " + std::to_string(i) + " sums to " + std::to_string(sum));
    }
    q_zx_.row(i) /= sum;
  }
}

Encoder Encoder::trivial(Eigen::Index nx, Eigen::Index nz) {
  Eigen::MatrixXd q = Eigen::MatrixXd::Constant(nx, nz, 1.0 / static_cast<double>(nz));
  return Encoder(q);
}

Encoder Encoder::identity(Eigen::Index nx) {
  return Encoder(Eigen::MatrixXd::Identity(nx, nx));
}

double entropy(const Eigen::VectorXd& dist) {
  Eigen::MatrixXd copy = dist;
  validate_and_repair(copy, "entropy");
  const double h = neg_plog2p_sum(copy);
  return h < 0.0 ? 0.0 : h;
}

double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q) {
  if (p.size() != q.size()) {
    throw Error(ErrorCode::DimensionMismatch, "kl_divergence: length mismatch");
  }
  Eigen::MatrixXd pc = p, qc = q;
  validate_and_repair(pc, "kl_divergence p");
  validate_and_repair(qc, "kl_divergence q");
  double d = 0.0;
  for (Eigen::Index i = 0; i < pc.size(); ++i) {
    if (pc(i) <= 0.0) continue;
    if (qc(i) <= 0.0) {
      throw Error(ErrorCode::SupportMismatch,
                  "kl_divergence: p has mass where q has none at index " + std::to_string(i));
    }
    d += pc(i) * std::log2(pc(i) / qc(i));
  }
  return d < 0.0 ? 0.0 : d;
}

double mutual_information(const Eigen::MatrixXd& joint) {
  Eigen::MatrixXd copy = joint;
  validate_and_repair(copy, "mutual_information");
  const Eigen::MatrixXd px = copy.rowwise().sum();
  const Eigen::MatrixXd py = copy.colwise().sum();
  const double mi = neg_plog2p_sum(px) + neg_plog2p_sum(py) - neg_plog2p_sum(copy);
  return mi < 0.0 ? 0.0 : mi;
}

double mutual_information(const JointXY& joint) { return mutual_information(joint.p_xy()); }

double entropy_x(const JointXY& joint) { return entropy(joint.p_x()); }
double entropy_y(const JointXY& joint) { return entropy(joint.p_y()); }

double conditional_entropy_y_given_x(const JointXY& joint) {
  const Eigen::MatrixXd px = joint.p_x();
  const double h = neg_plog2p_sum(joint.p_xy()) - neg_plog2p_sum(px);
  return h < 0.0 ? 0.0 : h;
}

InducedDistributions markov_compose(const JointXY& joint, const Encoder& enc) {
  if (enc.nx() != joint.nx()) {
    throw Error(ErrorCode::DimensionMismatch, "markov_compose: encoder rows != |X|");
  }
  InducedDistributions out;
  const Eigen::MatrixXd& q = enc.q_zx();
  out.p_xz = joint.p_x().asDiagonal() * q;                 // p(x,z) = p(x) p(z|x)
  out.p_z = out.p_xz.colwise().sum();
  out.p_yz = joint.p_xy().transpose() * q;                 // p(y,z) = sum_x p(x,y) p(z|x)
  out.p_y_given_z = Eigen::MatrixXd::Zero(joint.ny(), enc.nz());
  out.p_x_given_z = Eigen::MatrixXd::Zero(joint.nx(), enc.nz());
  for (Eigen::Index z = 0; z < enc.nz(); ++z) {
    if (out.p_z(z) > 0.0) {
      out.p_y_given_z.col(z) = out.p_yz.col(z) / out.p_z(z);
      out.p_x_given_z.col(z) = out.p_xz.col(z) / out.p_z(z);
    }
  }
  return out;
}

double i_xz(const JointXY& joint, const Encoder& enc) {
  return mutual_information(markov_compose(joint, enc).p_xz);
}

double i_yz(const JointXY& joint, const Encoder& enc) {
  return mutual_information(markov_compose(joint, enc).p_yz);
}

double fano_information(double eps) {
  if (!(eps >= 0.0 && eps <= 0.5)) {
    throw Error(ErrorCode::OutOfRange, "fano_information: eps must be in [0, 0.5]");
  }
  return 1.0 + xlog2x(eps) + xlog2x(1.0 - eps);
}

std::vector<double> bernoulli_encode(const Eigen::VectorXd& pmf) {
  if (pmf.size() < 2) {
    throw Error(ErrorCode::DegenerateInput, "bernoulli_encode: need at least 2 symbols");
  }
  Eigen::MatrixXd copy = pmf;
  validate_and_repair(copy, "bernoulli_encode");
  std::vector<double> bits(static_cast<std::size_t>(pmf.size()) - 1);
  double prefix = copy(0);
  for (Eigen::Index k = 1; k < copy.size(); ++k) {
    prefix += copy(k);
    if (prefix <= 0.0) {
      throw Error(ErrorCode::DegenerateInput,
                  "bernoulli_encode: zero prefix mass P(Z<=" + std::to_string(k + 1) + ")");
    }
    bits[static_cast<std::size_t>(k - 1)] = copy(k) / prefix;
  }
  return bits;
}

Eigen::VectorXd bernoulli_decode(const std::vector<double>& bits) {
  const std::size_t n_bits = bits.size();
  if (n_bits > 24) {
    throw Error(ErrorCode::OutOfRange, "bernoulli_decode: exhaustive decoder limited to 24 bits");
  }
  Eigen::VectorXd pmf = Eigen::VectorXd::Zero(static_cast<Eigen::Index>(n_bits) + 1);
  const std::uint32_t n_strings = 1u << n_bits;
  for (std::uint32_t s = 0; s < n_strings; ++s) {
    double mass = 1.0;
    // z is the position of the last set bit once the string is preceded
    // by an implicit one, so the all-zeros string decodes to symbol 1.
    Eigen::Index z = 0;
    for (std::size_t k = 0; k < n_bits; ++k) {
      const bool set = (s >> k) & 1u;
      mass *= set ? bits[k] : 1.0 - bits[k];
      if (set) z = static_cast<Eigen::Index>(k) + 1;
    }
    pmf(z) += mass;
  }
  return pmf;
}

}  // namespace ibkit::prob
