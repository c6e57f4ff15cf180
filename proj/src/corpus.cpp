#include "ibkit/corpus.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ibkit/errors.hpp"
#include "ibkit/rng.hpp"

namespace ibkit::corpus {

namespace {

// Published cluster tables, stored row = Y as printed and transposed to the
// JointXY orientation (rows = clusters) on construction. Rows sum to one
// only to printed precision; the JointXY constructor renormalizes.
const double kCifar2Bin[2][2] = {
    {0.454555, 0.045445},
    {0.042725, 0.457275},
};

const double kCifar5Bin[2][5] = {
    {0.350685, 0.053337, 0.054679, 0.034542, 0.006756},
    {0.007794, 0.006618, 0.032516, 0.069236, 0.383836},
};

}  // namespace

NoiseSpec NoiseSpec::binary_symmetric(double rho, Eigen::Index copies_per_class) {
  NoiseSpec spec;
  spec.prior = Eigen::Vector2d(0.5, 0.5);
  spec.flip.resize(2, 2);
  spec.flip << 1.0 - rho, rho, rho, 1.0 - rho;
  spec.copies_per_class = copies_per_class;
  return spec;
}

prob::JointXY random_joint(std::uint64_t seed, Eigen::Index nx, Eigen::Index ny) {
  if (nx < 2 || ny < 2) {
    throw Error(ErrorCode::OutOfRange, "random_joint: need nx, ny >= 2");
  }
  SplitMix64 rng(seed);
  Eigen::MatrixXd table(nx, ny);
  for (Eigen::Index i = 0; i < nx; ++i) {
    for (Eigen::Index j = 0; j < ny; ++j) table(i, j) = rng.uniform();
  }
  table /= table.sum();
  return prob::JointXY(std::move(table));
}

prob::Encoder random_encoder(std::uint64_t seed, Eigen::Index nx, Eigen::Index nz) {
  SplitMix64 rng(seed);
  Eigen::MatrixXd q(nx, nz);
  for (Eigen::Index i = 0; i < nx; ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < nz; ++j) {
      q(i, j) = rng.uniform();
      sum += q(i, j);
    }
    q.row(i) /= sum;
  }
  return prob::Encoder(std::move(q));
}

Eigen::Index true_class_of_row(const NoiseSpec& spec, Eigen::Index x) {
  return x / spec.copies_per_class;
}

prob::JointXY class_conditional_joint(const NoiseSpec& spec) {
  const Eigen::Index n_classes = spec.prior.size();
  if (n_classes < 2 || spec.flip.rows() != n_classes) {
    throw Error(ErrorCode::InvalidNoise, "class_conditional_joint: prior/flip shape mismatch");
  }
  if (spec.copies_per_class < 1) {
    throw Error(ErrorCode::InvalidNoise, "class_conditional_joint: copies_per_class must be >= 1");
  }
  if (std::abs(spec.prior.sum() - 1.0) > 1e-9) {
    throw Error(ErrorCode::InvalidNoise, "class_conditional_joint: prior does not normalize");
  }
  for (Eigen::Index k = 0; k < n_classes; ++k) {
    if (std::abs(spec.flip.row(k).sum() - 1.0) > 1e-9 || spec.flip.row(k).minCoeff() < 0.0) {
      throw Error(ErrorCode::InvalidNoise,
                  "class_conditional_joint: flip row " + std::to_string(k) + " does not normalize");
    }
  }
  const Eigen::Index nx = n_classes * spec.copies_per_class;
  const Eigen::Index ny = spec.flip.cols();
  Eigen::MatrixXd table(nx, ny);
  std::vector<std::string> x_labels, y_labels;
  for (Eigen::Index x = 0; x < nx; ++x) {
    const Eigen::Index k = true_class_of_row(spec, x);
    table.row(x) = (spec.prior(k) / static_cast<double>(spec.copies_per_class)) * spec.flip.row(k);
    x_labels.push_back("c" + std::to_string(k) + "_" + std::to_string(x % spec.copies_per_class));
  }
  for (Eigen::Index y = 0; y < ny; ++y) y_labels.push_back("y" + std::to_string(y));
  return prob::JointXY(std::move(table), std::move(x_labels), std::move(y_labels));
}

double analytic_warmup_f1(double w) {
  if (!(w >= 0.0 && w <= 1.0)) {
    throw Error(ErrorCode::OutOfRange, "analytic_warmup_f1: w outside [0, 1]");
  }
  if (w == 0.0) return 0.0;
  if (w == 1.0) return 0.5;
  const double u = 2.0 * w - 1.0;
  if (std::abs(w - 0.5) < 1e-3) {
    // The closed form is 0/0 at w = 1/2; the bracket vanishes to fourth
    // order, leaving F1 = w^2 * R(u) / 2 with R analytic in u = 2w - 1.
    const double r = 2.0 / 3.0 +
                     u * (-4.0 / 15.0 +
                          u * (2.0 / 5.0 +
                               u * (-8.0 / 35.0 + u * (2.0 / 7.0 - u * (4.0 / 21.0)))));
    return 0.5 * w * w * r;
  }
  const double bracket = u * (5.0 - 4.0 * w) + 2.0 * (1.0 - w * w) * std::log(1.0 / w - 1.0);
  return w * w * bracket / (2.0 * u * u * u * u);
}

double analytic_warmup_f2(double w) { return 0.5 - analytic_warmup_f1(1.0 - w); }

pareto::LikelihoodProfile analytic_warmup_profile(Eigen::Index n_fine) {
  if (n_fine < 2) {
    throw Error(ErrorCode::OutOfRange, "analytic_warmup_profile: n_fine must be >= 2");
  }
  const Eigen::Index n = n_fine;
  Eigen::VectorXd mass(n), p1(n);
  double f1_lo = 0.0, f2_lo = 0.0;
  for (Eigen::Index i = 0; i < n; ++i) {
    const double hi = static_cast<double>(i + 1) / static_cast<double>(n);
    const double f1_hi = analytic_warmup_f1(hi);
    const double f2_hi = analytic_warmup_f2(hi);
    const double m1 = f1_hi - f1_lo;
    const double m2 = f2_hi - f2_lo;
    mass(i) = m1 + m2;
    p1(i) = mass(i) > 0.0 ? m1 / mass(i) : 0.0;
    f1_lo = f1_hi;
    f2_lo = f2_hi;
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return p1(a) < p1(b); });
  pareto::LikelihoodProfile profile;
  profile.bin_mass.resize(n);
  profile.cond_p1.resize(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    profile.bin_mass(i) = mass(order[static_cast<std::size_t>(i)]);
    profile.cond_p1(i) = p1(order[static_cast<std::size_t>(i)]);
  }
  profile.provenance = pareto::Provenance::Analytic;
  profile.validate();
  return profile;
}

prob::JointXY builtin(const std::string& name) {
  if (name == "cifar-2bin") {
    Eigen::MatrixXd table(2, 2);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 2; ++j) table(j, i) = kCifar2Bin[i][j];
    }
    return prob::JointXY(std::move(table), {"z1", "z2"}, {"cat", "dog"});
  }
  if (name == "cifar-5bin") {
    Eigen::MatrixXd table(5, 2);
    for (int i = 0; i < 2; ++i) {
      for (int j = 0; j < 5; ++j) table(j, i) = kCifar5Bin[i][j];
    }
    return prob::JointXY(std::move(table), {"z1", "z2", "z3", "z4", "z5"}, {"cat", "dog"});
  }
  throw Error(ErrorCode::UnknownFixture, "builtin: unknown fixture '" + name + "'");
}

std::vector<std::string> builtin_names() { return {"cifar-2bin", "cifar-5bin"}; }

}  // namespace ibkit::corpus
