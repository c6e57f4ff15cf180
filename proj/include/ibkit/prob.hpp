#pragma once

#include <Eigen/Core>

#include <optional>
#include <string>
#include <vector>

#include "ibkit/errors.hpp"

namespace ibkit::prob {

// All information quantities are in bits (base-2 logs), with 0*log(0) := 0.

constexpr double kMassTolerance = 1e-9;       // strict normalization check
constexpr double kRenormTolerance = 1e-6;     // construction-time repair window
constexpr double kNegativeTolerance = 1e-12;  // entries below this are rejected

// Order-canonical reduction: information sums stay bit-identical under
// symbol permutations because terms are added in sorted order.
double sorted_sum(std::vector<double>& terms) noexcept;

/// Exact discrete joint distribution p(x,y).
///
/// Construction renormalizes total mass when it is within 1e-6 of one and
/// strips zero-mass rows/columns so that downstream conditionals never
/// divide by zero. Both repairs are recorded in provenance().
class JointXY {
public:
  JointXY(Eigen::MatrixXd p_xy,
          std::vector<std::string> x_labels = {},
          std::vector<std::string> y_labels = {});

  [[nodiscard]] const Eigen::MatrixXd& p_xy() const noexcept { return p_xy_; }
  [[nodiscard]] Eigen::Index nx() const noexcept { return p_xy_.rows(); }
  [[nodiscard]] Eigen::Index ny() const noexcept { return p_xy_.cols(); }

  [[nodiscard]] const Eigen::VectorXd& p_x() const noexcept { return p_x_; }
  [[nodiscard]] const Eigen::VectorXd& p_y() const noexcept { return p_y_; }

  // Row-stochastic |X| x |Y| table p(y|x).
  [[nodiscard]] Eigen::MatrixXd p_y_given_x() const;
  // Column-stochastic view transposed to |Y| x |X|: p(x|y) per column y.
  [[nodiscard]] Eigen::MatrixXd p_x_given_y() const;

  [[nodiscard]] const std::vector<std::string>& x_labels() const noexcept { return x_labels_; }
  [[nodiscard]] const std::vector<std::string>& y_labels() const noexcept { return y_labels_; }
  [[nodiscard]] const std::string& provenance() const noexcept { return provenance_; }

  // Returns a copy with X rows permuted: row i of the result is row perm[i].
  [[nodiscard]] JointXY permute_x(const std::vector<Eigen::Index>& perm) const;

private:
  Eigen::MatrixXd p_xy_;
  Eigen::VectorXd p_x_;
  Eigen::VectorXd p_y_;
  std::vector<std::string> x_labels_;
  std::vector<std::string> y_labels_;
  std::string provenance_;
};

/// Conditional table p(z|x): |X| rows, |Z| columns, each row a distribution.
class Encoder {
public:
  explicit Encoder(Eigen::MatrixXd q_zx);

  [[nodiscard]] const Eigen::MatrixXd& q_zx() const noexcept { return q_zx_; }
  [[nodiscard]] Eigen::Index nx() const noexcept { return q_zx_.rows(); }
  [[nodiscard]] Eigen::Index nz() const noexcept { return q_zx_.cols(); }

  // p(z|x) = p(z) for every x; carries no information about X.
  static Encoder trivial(Eigen::Index nx, Eigen::Index nz);
  static Encoder identity(Eigen::Index nx);

private:
  Eigen::MatrixXd q_zx_;
};

/// Everything induced by composing an encoder with a joint along Z - X - Y.
struct InducedDistributions {
  Eigen::VectorXd p_z;          // |Z|
  Eigen::MatrixXd p_yz;         // |Y| x |Z|
  Eigen::MatrixXd p_xz;         // |X| x |Z|
  Eigen::MatrixXd p_y_given_z;  // |Y| x |Z|, zero column for empty clusters
  Eigen::MatrixXd p_x_given_z;  // |X| x |Z|, zero column for empty clusters
};

// H(dist) in bits. Throws NotNormalized / NegativeMass.
double entropy(const Eigen::VectorXd& dist);

// KL(p || q) in bits. Throws SupportMismatch when p has mass where q has none.
double kl_divergence(const Eigen::VectorXd& p, const Eigen::VectorXd& q);

// Mutual information of an arbitrary nonnegative joint matrix, in bits.
double mutual_information(const Eigen::MatrixXd& joint);
double mutual_information(const JointXY& joint);

double entropy_x(const JointXY& joint);
double entropy_y(const JointXY& joint);
double conditional_entropy_y_given_x(const JointXY& joint);

InducedDistributions markov_compose(const JointXY& joint, const Encoder& enc);

// I(X;Z) and I(Y;Z) of a composed pair, in bits.
double i_xz(const JointXY& joint, const Encoder& enc);
double i_yz(const JointXY& joint, const Encoder& enc);

// Minimum mutual information compatible with binary error rate eps, in bits.
double fano_information(double eps);

// Encodes a pmf over m symbols as m-1 independent bit probabilities,
// P(B_k = 1) = P(Z = k+1) / P(Z <= k+1). Throws DegenerateInput when a
// prefix mass vanishes.
std::vector<double> bernoulli_encode(const Eigen::VectorXd& pmf);

// Inverse of bernoulli_encode by exhaustive bit-string enumeration; the
// round-trip is exercised by tests and the acceptance suite.
Eigen::VectorXd bernoulli_decode(const std::vector<double>& bits);

}  // namespace ibkit::prob
