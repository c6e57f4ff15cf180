#include "ibkit/learnability.hpp"

#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <numeric>

#include "ibkit/errors.hpp"

namespace ibkit::learnability {

namespace {

constexpr double kDenomTol = 1e-14;

// General-weight onset estimate for a row window of a sorted conditional
// table; reduces to getbeta when p_x is uniform.
double windowed_beta0(const Eigen::VectorXd& p_y, Eigen::Index lo, Eigen::Index hi,
                      const Eigen::MatrixXd& prefix_wrows, const Eigen::VectorXd& prefix_w) {
  const double p_omega = prefix_w(hi + 1) - prefix_w(lo);
  const double p_rest = 1.0 - p_omega;
  if (p_omega <= 0.0 || p_rest <= 0.0) return std::numeric_limits<double>::infinity();
  double denom = -1.0;
  for (Eigen::Index j = 0; j < p_y.size(); ++j) {
    const double mass_j = prefix_wrows(hi + 1, j) - prefix_wrows(lo, j);
    const double p_y_omega = mass_j / p_omega;
    if (p_y(j) > 0.0) denom += p_y_omega * p_y_omega / p_y(j);
  }
  if (denom <= kDenomTol) return std::numeric_limits<double>::infinity();
  return (1.0 / p_omega - 1.0) / denom;
}

struct SortedTable {
  Eigen::MatrixXd rows;      // conditional rows in pivot order
  Eigen::VectorXd weights;   // matching p(x)
  std::vector<Eigen::Index> order;  // sorted position -> original row
};

SortedTable sort_by_pivot(const Eigen::MatrixXd& p_y_given_x, const Eigen::VectorXd& p_x,
                          Eigen::Index pivot) {
  SortedTable t;
  t.order.resize(static_cast<std::size_t>(p_y_given_x.rows()));
  std::iota(t.order.begin(), t.order.end(), 0);
  std::stable_sort(t.order.begin(), t.order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return p_y_given_x(a, pivot) > p_y_given_x(b, pivot);
  });
  t.rows.resize(p_y_given_x.rows(), p_y_given_x.cols());
  t.weights.resize(p_x.size());
  for (Eigen::Index i = 0; i < p_y_given_x.rows(); ++i) {
    t.rows.row(i) = p_y_given_x.row(t.order[static_cast<std::size_t>(i)]);
    t.weights(i) = p_x(t.order[static_cast<std::size_t>(i)]);
  }
  return t;
}

}  // namespace

double beta0_functional(const prob::JointXY& joint, const Eigen::VectorXd& h) {
  if (h.size() != joint.nx()) {
    throw Error(ErrorCode::DimensionMismatch, "beta0_functional: h length != |X|");
  }
  const Eigen::VectorXd& px = joint.p_x();
  const double mean = px.dot(h);
  double var = 0.0;
  for (Eigen::Index i = 0; i < h.size(); ++i) {
    var += px(i) * (h(i) - mean) * (h(i) - mean);
  }
  if (var <= kDenomTol) {
    throw Error(ErrorCode::ConstantH, "beta0_functional: h is constant on the support");
  }
  double denom = 0.0;
  for (Eigen::Index j = 0; j < joint.ny(); ++j) {
    const double py = joint.p_y()(j);
    if (py <= 0.0) continue;
    double cond_mean = 0.0;
    for (Eigen::Index i = 0; i < h.size(); ++i) {
      cond_mean += joint.p_xy()(i, j) * (h(i) - mean);
    }
    cond_mean /= py;  // E_{x|y}[h] - mean
    denom += py * cond_mean * cond_mean;
  }
  if (denom <= kDenomTol) {
    throw Error(ErrorCode::IndependentXY, "beta0_functional: denominator vanishes");
  }
  return var / denom;
}

MaxCorrResult beta0_maxcorr(const prob::JointXY& joint) {
  Eigen::MatrixXd b(joint.nx(), joint.ny());
  for (Eigen::Index i = 0; i < joint.nx(); ++i) {
    for (Eigen::Index j = 0; j < joint.ny(); ++j) {
      b(i, j) = joint.p_xy()(i, j) / std::sqrt(joint.p_x()(i) * joint.p_y()(j));
    }
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(b, Eigen::ComputeThinU);
  if (svd.singularValues().size() < 2 || svd.singularValues()(1) < 1e-12) {
    throw Error(ErrorCode::IndependentXY, "beta0_maxcorr: second singular value vanishes");
  }
  const double sigma2 = svd.singularValues()(1);
  MaxCorrResult out;
  out.beta0 = 1.0 / (sigma2 * sigma2);
  out.h_star.resize(joint.nx());
  for (Eigen::Index i = 0; i < joint.nx(); ++i) {
    out.h_star(i) = svd.matrixU()(i, 1) / std::sqrt(joint.p_x()(i));
  }
  // Standardize under p(x) and pin the sign for determinism.
  const double mean = joint.p_x().dot(out.h_star);
  out.h_star.array() -= mean;
  double var = 0.0;
  for (Eigen::Index i = 0; i < joint.nx(); ++i) {
    var += joint.p_x()(i) * out.h_star(i) * out.h_star(i);
  }
  out.h_star /= std::sqrt(var);
  for (Eigen::Index i = 0; i < joint.nx(); ++i) {
    if (std::abs(out.h_star(i)) > 1e-9) {
      if (out.h_star(i) < 0.0) out.h_star = -out.h_star;
      break;
    }
  }
  return out;
}

double getbeta(const Eigen::MatrixXd& p_y_given_x, const Eigen::VectorXd& p_y,
               const std::vector<Eigen::Index>& omega) {
  const Eigen::Index n_rows = p_y_given_x.rows();
  if (omega.empty()) throw Error(ErrorCode::EmptySubset, "getbeta: empty subset");
  if (static_cast<Eigen::Index>(omega.size()) >= n_rows) {
    return std::numeric_limits<double>::infinity();  // full subset: p(y|Omega) = p(y)
  }
  Eigen::VectorXd p_y_omega = Eigen::VectorXd::Zero(p_y_given_x.cols());
  for (Eigen::Index i : omega) {
    if (i < 0 || i >= n_rows) throw Error(ErrorCode::OutOfRange, "getbeta: row index out of range");
    p_y_omega += p_y_given_x.row(i);
  }
  p_y_omega /= static_cast<double>(omega.size());
  double denom = -1.0;
  for (Eigen::Index j = 0; j < p_y.size(); ++j) {
    if (p_y(j) > 0.0) denom += p_y_omega(j) * p_y_omega(j) / p_y(j);
  }
  if (denom <= kDenomTol) return std::numeric_limits<double>::infinity();
  const double numer = static_cast<double>(n_rows) / static_cast<double>(omega.size()) - 1.0;
  return numer / denom;
}

ConspicuousResult conspicuous_search(const Eigen::MatrixXd& p_y_given_x,
                                     const Eigen::VectorXd& p_x,
                                     const ConspicuousOptions& options) {
  const Eigen::Index n = p_y_given_x.rows();
  const Eigen::Index n_classes = p_y_given_x.cols();
  if (n < 2) throw Error(ErrorCode::OutOfRange, "conspicuous_search: need at least 2 rows");
  if (p_x.size() != n) {
    throw Error(ErrorCode::DimensionMismatch, "conspicuous_search: p_x length mismatch");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(p_y_given_x.row(i).sum() - 1.0) > 1e-6) {
      throw Error(ErrorCode::NotNormalized,
                  "conspicuous_search: row " + std::to_string(i) + " does not normalize");
    }
  }
  Eigen::VectorXd p_y(n_classes);
  for (Eigen::Index j = 0; j < n_classes; ++j) {
    std::vector<double> terms(static_cast<std::size_t>(n));
    for (Eigen::Index i = 0; i < n; ++i) terms[static_cast<std::size_t>(i)] = p_x(i) * p_y_given_x(i, j);
    p_y(j) = prob::sorted_sum(terms);
  }

  ConspicuousResult best;
  best.beta0 = std::numeric_limits<double>::infinity();
  for (Eigen::Index pivot = 0; pivot < n_classes; ++pivot) {
    SortedTable t = sort_by_pivot(p_y_given_x, p_x, pivot);
    Eigen::MatrixXd prefix_wrows = Eigen::MatrixXd::Zero(n + 1, n_classes);
    Eigen::VectorXd prefix_w = Eigen::VectorXd::Zero(n + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
      prefix_wrows.row(i + 1) = prefix_wrows.row(i) + t.weights(i) * t.rows.row(i);
      prefix_w(i + 1) = prefix_w(i) + t.weights(i);
    }
    auto consider = [&](Eigen::Index lo, Eigen::Index hi) {
      const double value = windowed_beta0(p_y, lo, hi, prefix_wrows, prefix_w);
      if (value < best.beta0) {
        best.beta0 = value;
        best.pivot_class = pivot;
        best.subset.assign(t.order.begin() + lo, t.order.begin() + hi + 1);
        std::sort(best.subset.begin(), best.subset.end());
      }
    };
    if (n <= options.exhaustive_limit) {
      for (Eigen::Index lo = 0; lo < n; ++lo) {
        for (Eigen::Index hi = lo; hi < n; ++hi) consider(lo, hi);
      }
    } else {
      // Narrowing search over the right endpoint with the left end fixed at
      // the most confident row; interpolate at 0.8/0.2 until no improvement.
      auto value_at = [&](Eigen::Index hi) {
        return windowed_beta0(p_y, 0, hi, prefix_wrows, prefix_w);
      };
      Eigen::Index a = 0, b = n - 1;
      double va = value_at(a), vb = value_at(b);
      while (b - a > 1) {
        const auto af = static_cast<double>(a), bf = static_cast<double>(b);
        const Eigen::Index a2 = static_cast<Eigen::Index>(std::floor(0.8 * af + 0.2 * bf));
        const Eigen::Index b2 = static_cast<Eigen::Index>(std::ceil(0.2 * af + 0.8 * bf));
        const double va2 = value_at(a2), vb2 = value_at(b2);
        bool moved = false;
        if (va2 < va - options.heuristic_tol) {
          a = a2;
          va = va2;
          moved = true;
        }
        if (vb2 < vb - options.heuristic_tol) {
          b = b2;
          vb = vb2;
          moved = true;
        }
        if (!moved) break;
      }
      consider(0, va <= vb ? a : b);
    }
  }
  if (!std::isfinite(best.beta0)) {
    throw Error(ErrorCode::IndependentXY, "conspicuous_search: no window separates the classes");
  }
  return best;
}

double beta0_class_conditional(const corpus::NoiseSpec& spec) {
  const Eigen::Index n_classes = spec.prior.size();
  if (n_classes < 2 || spec.flip.rows() != n_classes) {
    throw Error(ErrorCode::InvalidNoise, "beta0_class_conditional: prior/flip shape mismatch");
  }
  Eigen::VectorXd p_y = spec.flip.transpose() * spec.prior;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < n_classes; ++k) {
    double denom = -1.0;
    for (Eigen::Index j = 0; j < spec.flip.cols(); ++j) {
      if (p_y(j) > 0.0) denom += spec.flip(k, j) * spec.flip(k, j) / p_y(j);
    }
    if (denom <= kDenomTol) {
      throw Error(ErrorCode::DegenerateNoise,
                  "beta0_class_conditional: class " + std::to_string(k) +
                      " is indistinguishable from the marginal");
    }
    best = std::min(best, (1.0 / spec.prior(k) - 1.0) / denom);
  }
  return best;
}

double beta0_info_estimate(const prob::JointXY& joint, const std::vector<Eigen::Index>& omega) {
  if (omega.empty()) throw Error(ErrorCode::DegenerateSubset, "beta0_info_estimate: empty subset");
  double p_omega = 0.0;
  Eigen::VectorXd p_y_omega = Eigen::VectorXd::Zero(joint.ny());
  for (Eigen::Index i : omega) {
    if (i < 0 || i >= joint.nx()) {
      throw Error(ErrorCode::OutOfRange, "beta0_info_estimate: row index out of range");
    }
    p_omega += joint.p_x()(i);
    p_y_omega += joint.p_xy().row(i);
  }
  if (p_omega <= 0.0 || p_omega >= 1.0 - 1e-12) {
    throw Error(ErrorCode::DegenerateSubset, "beta0_info_estimate: p(Omega) outside (0, 1)");
  }
  p_y_omega /= p_omega;
  const double kl = prob::kl_divergence(p_y_omega, joint.p_y());
  if (kl <= 1e-12) {
    throw Error(ErrorCode::DegenerateSubset, "beta0_info_estimate: p(y|Omega) matches p(y)");
  }
  return -std::log2(p_omega) / kl;
}

OnsetExpansion onset_expansion(const prob::JointXY& joint, const Eigen::VectorXd& h_star,
                               double eps, double c_z) {
  if (h_star.size() != joint.nx()) {
    throw Error(ErrorCode::DimensionMismatch, "onset_expansion: h length != |X|");
  }
  if (!(c_z > 0.0)) throw Error(ErrorCode::OutOfRange, "onset_expansion: c_z must be positive");
  const double hbar = joint.p_x().dot(h_star);
  Eigen::VectorXd coupling(joint.ny());  // sum_x' p(x',y)(h*(x') - hbar)
  for (Eigen::Index j = 0; j < joint.ny(); ++j) {
    double acc = 0.0;
    for (Eigen::Index i = 0; i < joint.nx(); ++i) {
      acc += joint.p_xy()(i, j) * (h_star(i) - hbar);
    }
    coupling(j) = acc;
  }
  OnsetExpansion out;
  out.p_y_given_x.resize(joint.nx(), joint.ny());
  for (Eigen::Index i = 0; i < joint.nx(); ++i) {
    for (Eigen::Index j = 0; j < joint.ny(); ++j) {
      const double v = joint.p_y()(j) + eps * eps * c_z * (h_star(i) - hbar) * coupling(j);
      out.p_y_given_x(i, j) = v;
      if (v < 0.0 || v > 1.0) out.perturbation_too_large = true;
    }
  }
  return out;
}

LearnabilityReport full_report(const prob::JointXY& joint,
                               const std::optional<corpus::NoiseSpec>& noise) {
  LearnabilityReport report;
  report.maxcorr = beta0_maxcorr(joint);
  report.conspicuous = conspicuous_search(joint.p_y_given_x(), joint.p_x());
  if (noise) report.class_conditional = beta0_class_conditional(*noise);
  report.info_estimate = beta0_info_estimate(joint, report.conspicuous.subset);
  return report;
}

}  // namespace ibkit::learnability
