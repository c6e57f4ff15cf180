#include "ibkit/pareto.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <numeric>
#include <vector>

#include "ibkit/errors.hpp"
#include "ibkit/log.hpp"

namespace ibkit::pareto {

namespace {

double binary_entropy(double p) noexcept {
  double h = 0.0;
  if (p > 0.0) h -= p * std::log2(p);
  if (p < 1.0) h -= (1.0 - p) * std::log2(1.0 - p);
  return h;
}

double xlog2x(double x) noexcept { return x > 0.0 ? x * std::log2(x) : 0.0; }

// Saturating binomial coefficient, capped at `cap`.
std::uint64_t binomial_capped(Eigen::Index n, Eigen::Index k, std::uint64_t cap) {
  if (k < 0 || k > n) return 0;
  if (k > n - k) k = n - k;
  long double acc = 1.0L;
  for (Eigen::Index i = 1; i <= k; ++i) {
    acc = acc * static_cast<long double>(n - k + i) / static_cast<long double>(i);
    if (acc > static_cast<long double>(cap) * 2.0L) return cap + 1;
  }
  return static_cast<std::uint64_t>(acc);
}

// Prefix sums over fine bins for O(1) group aggregates.
struct ProfileSums {
  Eigen::VectorXd mass;   // prefix of bin_mass
  Eigen::VectorXd mass1;  // prefix of bin_mass .* cond_p1
  double h_y = 0.0;       // H(Y) of the profile

  explicit ProfileSums(const LikelihoodProfile& profile) {
    const Eigen::Index n = profile.n_bins();
    mass.resize(n + 1);
    mass1.resize(n + 1);
    mass(0) = mass1(0) = 0.0;
    for (Eigen::Index i = 0; i < n; ++i) {
      mass(i + 1) = mass(i) + profile.bin_mass(i);
      mass1(i + 1) = mass1(i) + profile.bin_mass(i) * profile.cond_p1(i);
    }
    h_y = binary_entropy(mass1(n) / mass(n));
  }

  // Conditional-entropy cost of grouping fine bins [lo, hi) together.
  [[nodiscard]] double cost(Eigen::Index lo, Eigen::Index hi) const {
    const double m = mass(hi) - mass(lo);
    if (m <= 0.0) return 0.0;
    return m * binary_entropy((mass1(hi) - mass1(lo)) / m);
  }

  [[nodiscard]] double h_contrib(Eigen::Index lo, Eigen::Index hi) const {
    return -xlog2x(mass(hi) - mass(lo));
  }
};

struct HiPoint {
  double h = 0.0;
  double i = 0.0;
};

// (H, I) of the grouping defined by 1-based split points.
HiPoint evaluate_fast(const ProfileSums& sums, const std::vector<Eigen::Index>& boundaries,
                      Eigen::Index n) {
  HiPoint out;
  double cost = 0.0;
  Eigen::Index lo = 0;
  for (std::size_t k = 0; k <= boundaries.size(); ++k) {
    const Eigen::Index hi = k < boundaries.size() ? boundaries[k] : n;
    out.h += sums.h_contrib(lo, hi);
    cost += sums.cost(lo, hi);
    lo = hi;
  }
  out.i = sums.h_y - cost;
  if (out.i < 0.0) out.i = 0.0;
  return out;
}

void validate_binning(const Binning& binning, Eigen::Index n) {
  Eigen::Index prev = 0;
  for (Eigen::Index b : binning.boundaries) {
    if (b <= prev || b > n - 1) {
      throw Error(ErrorCode::OutOfRange, "Binning: boundaries must be strictly increasing in [1, N-1]");
    }
    prev = b;
  }
}

// Calls fn on every strictly increasing boundary vector of length m-1 in
// [1, n-1], in lexicographic order.
template <typename Fn>
void enumerate_binnings(Eigen::Index n, Eigen::Index m, Fn&& fn) {
  if (m == 1) {
    std::vector<Eigen::Index> empty;
    fn(empty);
    return;
  }
  std::vector<Eigen::Index> b(static_cast<std::size_t>(m - 1));
  std::iota(b.begin(), b.end(), 1);
  while (true) {
    fn(b);
    // advance the odometer
    Eigen::Index pos = m - 2;
    while (pos >= 0 && b[static_cast<std::size_t>(pos)] == n - (m - 1) + pos) --pos;
    if (pos < 0) break;
    ++b[static_cast<std::size_t>(pos)];
    for (Eigen::Index j = pos + 1; j < m - 1; ++j) {
      b[static_cast<std::size_t>(j)] = b[static_cast<std::size_t>(j - 1)] + 1;
    }
  }
}

ParetoPoint corner_exhaustive(const LikelihoodProfile& profile, const ProfileSums& sums,
                              Eigen::Index m) {
  const Eigen::Index n = profile.n_bins();
  ParetoPoint best;
  best.i_zy = -1.0;
  enumerate_binnings(n, m, [&](const std::vector<Eigen::Index>& b) {
    const HiPoint hi = evaluate_fast(sums, b, n);
    if (hi.i > best.i_zy) {
      best.i_zy = hi.i;
      best.h_z = hi.h;
      best.binning.boundaries = b;
    }
  });
  best.m = m;
  best.is_corner = true;
  return best;
}

ParetoPoint corner_dp(const LikelihoodProfile& profile, const ProfileSums& sums, Eigen::Index m) {
  const Eigen::Index n = profile.n_bins();
  constexpr double kInf = std::numeric_limits<double>::infinity();
  // dp[j]: minimum conditional-entropy cost of grouping the first j fine
  // bins into the current number of segments; parents reconstruct splits.
  std::vector<double> prev(static_cast<std::size_t>(n) + 1, kInf);
  std::vector<std::vector<Eigen::Index>> parent(
      static_cast<std::size_t>(m) + 1, std::vector<Eigen::Index>(static_cast<std::size_t>(n) + 1, -1));
  for (Eigen::Index j = 1; j <= n; ++j) prev[static_cast<std::size_t>(j)] = sums.cost(0, j);
  for (Eigen::Index k = 2; k <= m; ++k) {
    std::vector<double> cur(static_cast<std::size_t>(n) + 1, kInf);
    for (Eigen::Index j = k; j <= n; ++j) {
      double best = kInf;
      Eigen::Index best_i = -1;
      for (Eigen::Index i = k - 1; i < j; ++i) {
        const double cand = prev[static_cast<std::size_t>(i)] + sums.cost(i, j);
        if (cand < best) {  // strict: keeps the smallest split on ties
          best = cand;
          best_i = i;
        }
      }
      cur[static_cast<std::size_t>(j)] = best;
      parent[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)] = best_i;
    }
    prev = std::move(cur);
  }
  ParetoPoint best;
  best.m = m;
  best.is_corner = true;
  std::vector<Eigen::Index> b;
  Eigen::Index j = n;
  for (Eigen::Index k = m; k >= 2; --k) {
    j = parent[static_cast<std::size_t>(k)][static_cast<std::size_t>(j)];
    b.push_back(j);
  }
  std::reverse(b.begin(), b.end());
  best.binning.boundaries = std::move(b);
  const HiPoint hi = evaluate_fast(sums, best.binning.boundaries, n);
  best.h_z = hi.h;
  best.i_zy = hi.i;
  return best;
}

// 2D nondominated set keyed by H; smaller H and larger I both win.
class EnvelopeBuilder {
public:
  void offer(double h, double i, const std::vector<Eigen::Index>& boundaries, Eigen::Index m) {
    auto it = points_.upper_bound(h);
    if (it != points_.begin()) {
      auto le = std::prev(it);
      if (le->second.i_zy >= i) return;  // dominated by a point at h' <= h
    }
    auto [ins, fresh] = points_.insert_or_assign(h, make_point(h, i, boundaries, m));
    (void)fresh;
    // erase points to the right that are now dominated
    auto next = std::next(ins);
    while (next != points_.end() && next->second.i_zy <= i) next = points_.erase(next);
    // if an existing point at smaller h already had >= i we returned above,
    // so ins is nondominated here
  }

  [[nodiscard]] std::vector<ParetoPoint> take() {
    std::vector<ParetoPoint> out;
    out.reserve(points_.size());
    for (auto& [h, p] : points_) out.push_back(std::move(p));
    return out;
  }

private:
  static ParetoPoint make_point(double h, double i, const std::vector<Eigen::Index>& b,
                                Eigen::Index m) {
    ParetoPoint p;
    p.h_z = h;
    p.i_zy = i;
    p.binning.boundaries = b;
    p.m = m;
    return p;
  }

  std::map<double, ParetoPoint> points_;
};

}  // namespace

double LikelihoodProfile::mi() const {
  ProfileSums sums(*this);
  double cost = 0.0;
  for (Eigen::Index i = 0; i < n_bins(); ++i) {
    cost += bin_mass(i) * binary_entropy(cond_p1(i));
  }
  const double mi = sums.h_y - cost;
  return mi < 0.0 ? 0.0 : mi;
}

void LikelihoodProfile::validate() const {
  if (bin_mass.size() != cond_p1.size() || bin_mass.size() < 1) {
    throw Error(ErrorCode::DimensionMismatch, "LikelihoodProfile: shape mismatch");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < bin_mass.size(); ++i) {
    if (bin_mass(i) < -prob::kNegativeTolerance) {
      throw Error(ErrorCode::NegativeMass, "LikelihoodProfile: negative bin mass");
    }
    if (cond_p1(i) < -1e-9 || cond_p1(i) > 1.0 + 1e-9) {
      throw Error(ErrorCode::OutOfRange, "LikelihoodProfile: cond_p1 outside [0, 1]");
    }
    if (i > 0 && cond_p1(i) < cond_p1(i - 1) - 1e-12) {
      throw Error(ErrorCode::OrderViolation, "LikelihoodProfile: cond_p1 not sorted");
    }
    total += bin_mass(i);
  }
  if (std::abs(total - 1.0) > prob::kMassTolerance) {
    throw Error(ErrorCode::NotNormalized, "LikelihoodProfile: bin mass sums to " + std::to_string(total));
  }
}

DistilledAtoms distill(const Eigen::MatrixXd& p_y_given_x, const Eigen::VectorXd& p_x) {
  const Eigen::Index n = p_y_given_x.rows();
  const Eigen::Index c = p_y_given_x.cols();
  if (p_x.size() != n || n < 1 || c < 2) {
    throw Error(ErrorCode::DimensionMismatch, "distill: table shape mismatch");
  }
  for (Eigen::Index i = 0; i < n; ++i) {
    if (std::abs(p_y_given_x.row(i).sum() - 1.0) > 1e-6) {
      throw Error(ErrorCode::NotNormalized, "distill: conditional row " + std::to_string(i));
    }
  }
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    for (Eigen::Index j = 0; j < c; ++j) {
      if (p_y_given_x(a, j) != p_y_given_x(b, j)) return p_y_given_x(a, j) < p_y_given_x(b, j);
    }
    return false;
  });
  std::vector<Eigen::Index> reps;
  std::vector<double> masses;
  for (Eigen::Index pos = 0; pos < n; ++pos) {
    const Eigen::Index row = order[static_cast<std::size_t>(pos)];
    bool merged = false;
    if (!reps.empty()) {
      const Eigen::Index rep = reps.back();
      if ((p_y_given_x.row(row) - p_y_given_x.row(rep)).cwiseAbs().maxCoeff() <= 1e-9) {
        masses.back() += p_x(row);
        merged = true;
      }
    }
    if (!merged) {
      reps.push_back(row);
      masses.push_back(p_x(row));
    }
  }
  DistilledAtoms out;
  out.w.resize(static_cast<Eigen::Index>(reps.size()), c - 1);
  out.mass.resize(static_cast<Eigen::Index>(reps.size()));
  for (std::size_t a = 0; a < reps.size(); ++a) {
    out.w.row(static_cast<Eigen::Index>(a)) = p_y_given_x.row(reps[a]).head(c - 1);
    out.mass(static_cast<Eigen::Index>(a)) = masses[a];
  }
  return out;
}

LikelihoodProfile build_profile(const Eigen::VectorXd& w, const Eigen::VectorXd& mass,
                                const Eigen::VectorXd& cond_p1, Eigen::Index n_fine,
                                Provenance provenance) {
  const Eigen::Index n_atoms = w.size();
  if (mass.size() != n_atoms || cond_p1.size() != n_atoms || n_atoms < 1) {
    throw Error(ErrorCode::DimensionMismatch, "build_profile: atom arrays mismatch");
  }
  double total = 0.0;
  for (Eigen::Index i = 0; i < n_atoms; ++i) {
    if (mass(i) < -prob::kNegativeTolerance) {
      throw Error(ErrorCode::NegativeMass, "build_profile: negative atom mass");
    }
    if (cond_p1(i) < -1e-9 || cond_p1(i) > 1.0 + 1e-9) {
      throw Error(ErrorCode::OutOfRange, "build_profile: cond_p1 outside [0, 1]");
    }
    total += std::max(mass(i), 0.0);
  }
  if (std::abs(total - 1.0) > prob::kRenormTolerance) {
    throw Error(ErrorCode::NotNormalized, "build_profile: atom mass sums to " + std::to_string(total));
  }

  // Uniformization order: sort atoms by position w, ties by index.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n_atoms));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return w(a) < w(b); });

  Eigen::VectorXd fine_mass, fine_p1;
  if (provenance == Provenance::FromJoint) {
    if (n_fine < n_atoms) {
      throw Error(ErrorCode::TooFewBins,
                  "build_profile: exactness requires one bin per atom (" +
                      std::to_string(n_atoms) + " atoms)");
    }
    fine_mass.resize(n_atoms);
    fine_p1.resize(n_atoms);
    for (Eigen::Index i = 0; i < n_atoms; ++i) {
      fine_mass(i) = std::max(mass(order[static_cast<std::size_t>(i)]), 0.0) / total;
      fine_p1(i) = cond_p1(order[static_cast<std::size_t>(i)]);
    }
  } else {
    if (n_fine < 2) throw Error(ErrorCode::OutOfRange, "build_profile: n_fine must be >= 2");
    // Equal-mass fine bins: uniformization makes equal-width and equal-mass
    // coincide, so split the sorted mass at the quantiles.
    fine_mass = Eigen::VectorXd::Zero(n_fine);
    fine_p1 = Eigen::VectorXd::Zero(n_fine);
    Eigen::VectorXd weighted = Eigen::VectorXd::Zero(n_fine);
    const double step = 1.0 / static_cast<double>(n_fine);
    Eigen::Index bin = 0;
    double filled = 0.0;  // mass already placed into `bin`
    for (Eigen::Index pos = 0; pos < n_atoms; ++pos) {
      double remaining = std::max(mass(order[static_cast<std::size_t>(pos)]), 0.0) / total;
      const double p1 = cond_p1(order[static_cast<std::size_t>(pos)]);
      while (remaining > 0.0) {
        const bool last = bin + 1 >= n_fine;
        const double take = last ? remaining : std::min(remaining, step - filled);
        fine_mass(bin) += take;
        weighted(bin) += take * p1;
        filled += take;
        remaining -= take;
        if (!last && filled >= step - 1e-15) {
          ++bin;
          filled = 0.0;
        }
      }
    }
    for (Eigen::Index i = 0; i < n_fine; ++i) {
      fine_p1(i) = fine_mass(i) > 0.0 ? weighted(i) / fine_mass(i) : 0.0;
    }
  }

  // Sorting pass: bins ordered by conditional probability, ties by index.
  std::vector<Eigen::Index> sorted(static_cast<std::size_t>(fine_mass.size()));
  std::iota(sorted.begin(), sorted.end(), 0);
  std::stable_sort(sorted.begin(), sorted.end(),
                   [&](Eigen::Index a, Eigen::Index b) { return fine_p1(a) < fine_p1(b); });
  LikelihoodProfile profile;
  profile.bin_mass.resize(fine_mass.size());
  profile.cond_p1.resize(fine_mass.size());
  for (Eigen::Index i = 0; i < fine_mass.size(); ++i) {
    profile.bin_mass(i) = fine_mass(sorted[static_cast<std::size_t>(i)]);
    profile.cond_p1(i) = fine_p1(sorted[static_cast<std::size_t>(i)]);
  }
  profile.provenance = provenance;
  profile.validate();
  return profile;
}

Eigen::MatrixXd binned_joint(const LikelihoodProfile& profile, const Binning& binning) {
  const Eigen::Index n = profile.n_bins();
  validate_binning(binning, n);
  const Eigen::Index m = binning.m();
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(m, 2);
  Eigen::Index lo = 0;
  for (Eigen::Index g = 0; g < m; ++g) {
    const Eigen::Index hi = g < m - 1 ? binning.boundaries[static_cast<std::size_t>(g)] : n;
    for (Eigen::Index i = lo; i < hi; ++i) {
      joint(g, 0) += profile.bin_mass(i) * profile.cond_p1(i);
      joint(g, 1) += profile.bin_mass(i) * (1.0 - profile.cond_p1(i));
    }
    lo = hi;
  }
  return joint;
}

ParetoPoint evaluate_binning(const LikelihoodProfile& profile, const Binning& binning) {
  validate_binning(binning, profile.n_bins());
  ProfileSums sums(profile);
  const HiPoint hi = evaluate_fast(sums, binning.boundaries, profile.n_bins());
  ParetoPoint p;
  p.h_z = hi.h;
  p.i_zy = hi.i;
  p.binning = binning;
  p.m = binning.m();
  return p;
}

ParetoPoint corner(const LikelihoodProfile& profile, Eigen::Index m,
                   std::uint64_t exhaustive_budget) {
  const Eigen::Index n = profile.n_bins();
  if (m < 1 || m > n) throw Error(ErrorCode::OutOfRange, "corner: m outside [1, N]");
  profile.validate();
  ProfileSums sums(profile);
  if (m == 1) {
    ParetoPoint p;
    p.m = 1;
    p.is_corner = true;
    return p;
  }
  if (binomial_capped(n - 1, m - 1, exhaustive_budget) <= exhaustive_budget) {
    return corner_exhaustive(profile, sums, m);
  }
  return corner_dp(profile, sums, m);
}

std::vector<ParetoPoint> frontier(const LikelihoodProfile& profile, Eigen::Index m_max,
                                  const FrontierOptions& options) {
  const Eigen::Index n = profile.n_bins();
  if (m_max < 1) throw Error(ErrorCode::OutOfRange, "frontier: m_max must be >= 1");
  profile.validate();
  const Eigen::Index m_top = std::min(m_max, n);
  ProfileSums sums(profile);

  std::uint64_t total = 0;
  for (Eigen::Index m = 1; m <= m_top; ++m) {
    total += binomial_capped(n - 1, m - 1, options.exhaustive_budget);
    if (total > options.exhaustive_budget) break;
  }
  const bool exhaustive = total <= options.exhaustive_budget;
  if (!exhaustive && !options.use_dp) {
    throw Error(ErrorCode::BudgetExceeded,
                "frontier: enumeration over budget; reduce n_fine/m_max or enable DP mode");
  }

  EnvelopeBuilder envelope;
  std::vector<ParetoPoint> corners;
  if (exhaustive) {
    for (Eigen::Index m = 1; m <= m_top; ++m) {
      ParetoPoint best;
      best.i_zy = -1.0;
      enumerate_binnings(n, m, [&](const std::vector<Eigen::Index>& b) {
        const HiPoint hi = evaluate_fast(sums, b, n);
        envelope.offer(hi.h, hi.i, b, m);
        if (hi.i > best.i_zy) {
          best.i_zy = hi.i;
          best.h_z = hi.h;
          best.binning.boundaries = b;
        }
      });
      best.m = m;
      best.is_corner = true;
      corners.push_back(std::move(best));
    }
  } else {
    for (Eigen::Index m = 1; m <= m_top; ++m) {
      ParetoPoint c = m == 1 ? corner(profile, 1) : corner_dp(profile, sums, m);
      envelope.offer(c.h_z, c.i_zy, c.binning.boundaries, m);
      corners.push_back(std::move(c));
    }
    // Envelope scan between corners: sweep each corner boundary across its
    // feasible range with the others held fixed. Exact corners, sampled
    // in-between envelope; the exhaustive mode is the reference at small N.
    for (const ParetoPoint& c : corners) {
      std::vector<Eigen::Index> b = c.binning.boundaries;
      for (std::size_t k = 0; k < b.size(); ++k) {
        const Eigen::Index saved = b[k];
        const Eigen::Index lo = k == 0 ? 1 : b[k - 1] + 1;
        const Eigen::Index hi = k + 1 < b.size() ? b[k + 1] - 1 : n - 1;
        for (Eigen::Index v = lo; v <= hi; ++v) {
          b[k] = v;
          const HiPoint p = evaluate_fast(sums, b, n);
          envelope.offer(p.h, p.i, b, c.m);
        }
        b[k] = saved;
      }
    }
  }

  std::vector<ParetoPoint> points = envelope.take();
  // Flag envelope entries that realize a corner; append dominated corners
  // so every corner(m) appears exactly once.
  for (const ParetoPoint& c : corners) {
    bool found = false;
    for (ParetoPoint& p : points) {
      if (p.m == c.m && p.binning.boundaries == c.binning.boundaries) {
        p.is_corner = true;
        found = true;
        break;
      }
    }
    if (!found) points.push_back(c);
  }
  std::stable_sort(points.begin(), points.end(), [](const ParetoPoint& a, const ParetoPoint& b) {
    if (a.h_z != b.h_z) return a.h_z < b.h_z;
    return a.i_zy > b.i_zy;
  });
  return points;
}

double frontier_i_at_h(const std::vector<ParetoPoint>& envelope, double h, double slack) {
  double best = -std::numeric_limits<double>::infinity();
  for (const ParetoPoint& p : envelope) {
    if (p.h_z <= h + slack) best = std::max(best, p.i_zy);
  }
  return best;
}

ParetoPoint vertical_binning(const Eigen::VectorXd& bin_mass,
                             const Eigen::VectorXd& cond_p1_unsorted,
                             std::vector<double> thresholds) {
  const Eigen::Index n = bin_mass.size();
  if (cond_p1_unsorted.size() != n || n < 1) {
    throw Error(ErrorCode::DimensionMismatch, "vertical_binning: array mismatch");
  }
  std::vector<double> kept;
  for (double t : thresholds) {
    if (t < 0.0 || t > 1.0) {
      log::warn("vertical_binning: ignoring threshold outside [0, 1]");
      continue;
    }
    kept.push_back(t);
  }
  std::sort(kept.begin(), kept.end());

  // Group of a fine bin: 1 + number of thresholds at or below its p1
  // (boundaries belong to the upper bin).
  auto group_of = [&](double p1) {
    return static_cast<Eigen::Index>(
        std::upper_bound(kept.begin(), kept.end(), p1,
                         [](double value, double t) { return value < t; }) -
        kept.begin());
  };

  // Equivalent horizontal view: sort bins by p1 (ties by index); group ids
  // are then nondecreasing and induce contiguous boundaries.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](Eigen::Index a, Eigen::Index b) {
    return cond_p1_unsorted(a) < cond_p1_unsorted(b);
  });

  const Eigen::Index n_groups = static_cast<Eigen::Index>(kept.size()) + 1;
  Eigen::MatrixXd joint = Eigen::MatrixXd::Zero(n_groups, 2);
  std::vector<Eigen::Index> boundaries;
  Eigen::Index prev_group = group_of(cond_p1_unsorted(order[0]));
  for (Eigen::Index pos = 0; pos < n; ++pos) {
    const Eigen::Index i = order[static_cast<std::size_t>(pos)];
    const Eigen::Index g = group_of(cond_p1_unsorted(i));
    if (g != prev_group) {
      boundaries.push_back(pos);
      prev_group = g;
    }
    joint(g, 0) += bin_mass(i) * cond_p1_unsorted(i);
    joint(g, 1) += bin_mass(i) * (1.0 - cond_p1_unsorted(i));
  }

  ParetoPoint point;
  point.binning.boundaries = std::move(boundaries);
  point.m = static_cast<Eigen::Index>(point.binning.boundaries.size()) + 1;
  const double total = joint.sum();
  double h = 0.0, cost = 0.0;
  const double p1_total = joint.col(0).sum() / total;
  for (Eigen::Index g = 0; g < n_groups; ++g) {
    const double mass = (joint(g, 0) + joint(g, 1)) / total;
    if (mass <= 0.0) continue;
    h -= xlog2x(mass);
    cost += mass * binary_entropy(joint(g, 0) / (total * mass));
  }
  point.h_z = h;
  point.i_zy = std::max(0.0, binary_entropy(p1_total) - cost);
  return point;
}

BloatLoss bloat_loss(const ParetoPoint& point, double i_xy) {
  if (i_xy < point.i_zy - 1e-9) {
    throw Error(ErrorCode::InconsistentInputs, "bloat_loss: i_xy below the point's i_zy");
  }
  return BloatLoss{point.h_z - point.i_zy, i_xy - point.i_zy};
}

LikelihoodProfile profile_from_joint(const prob::JointXY& joint, Eigen::Index positive_y) {
  if (joint.ny() != 2) {
    throw Error(ErrorCode::OutOfRange, "profile_from_joint: binary-class joints only");
  }
  if (positive_y < 0 || positive_y > 1) {
    throw Error(ErrorCode::OutOfRange, "profile_from_joint: positive class must be 0 or 1");
  }
  Eigen::MatrixXd cond = joint.p_y_given_x();
  if (positive_y == 1) cond.col(0).swap(cond.col(1));
  const DistilledAtoms atoms = distill(cond, joint.p_x());
  return build_profile(atoms.w.col(0), atoms.mass, atoms.w.col(0), atoms.mass.size(),
                       Provenance::FromJoint);
}

prob::JointXY joint_from_profile(const LikelihoodProfile& profile) {
  profile.validate();
  Eigen::MatrixXd table(profile.n_bins(), 2);
  for (Eigen::Index i = 0; i < profile.n_bins(); ++i) {
    table(i, 0) = profile.bin_mass(i) * profile.cond_p1(i);
    table(i, 1) = profile.bin_mass(i) * (1.0 - profile.cond_p1(i));
  }
  return prob::JointXY(std::move(table), {}, {"y1", "y2"});
}

}  // namespace ibkit::pareto
