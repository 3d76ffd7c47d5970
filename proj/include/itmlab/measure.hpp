#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <cstdint>
#include <numeric>
#include <string>
#include <utility>
#include <vector>

#include "itmlab/error.hpp"
#include "itmlab/interval_set.hpp"
#include "itmlab/itm.hpp"
#include "itmlab/parallel.hpp"
#include "itmlab/random.hpp"
#include "itmlab/scalar.hpp"

namespace itmlab {

/// Normalized histogram over `weights.size()` equal cells of [lo, hi).
struct EmpiricalMeasure {
  double lo = 0.0;
  double hi = 1.0;
  std::vector<double> weights;

  std::size_t bins() const { return weights.size(); }
  double bin_width() const { return (hi - lo) / static_cast<double>(weights.size()); }
  double bin_lo(std::size_t i) const { return lo + bin_width() * static_cast<double>(i); }
  double bin_hi(std::size_t i) const {
    return i + 1 == weights.size() ? hi : lo + bin_width() * static_cast<double>(i + 1);
  }

  std::size_t bin_index(double x) const {
    const auto b = static_cast<double>(weights.size());
    auto i = static_cast<long>(std::floor((x - lo) / (hi - lo) * b));
    return static_cast<std::size_t>(std::clamp(i, 0L, static_cast<long>(weights.size()) - 1));
  }

  /// Bins holding more than `threshold`, default 1/(10 bins).
  std::vector<bool> support_mask(double threshold = -1.0) const {
    if (threshold < 0) threshold = 1.0 / (10.0 * static_cast<double>(weights.size()));
    std::vector<bool> mask(weights.size());
    for (std::size_t i = 0; i < weights.size(); ++i) mask[i] = weights[i] > threshold;
    return mask;
  }

  IntervalSet<double> support(double threshold = -1.0) const {
    const auto mask = support_mask(threshold);
    std::vector<Interval<double>> parts;
    for (std::size_t i = 0; i < mask.size(); ++i) {
      if (mask[i]) parts.push_back({bin_lo(i), bin_hi(i)});
    }
    return IntervalSet<double>(std::move(parts), {AmbientKind::Segment, lo, hi});
  }

  static EmpiricalMeasure zero(double lo, double hi, std::size_t bins) {
    if (bins < 1) throw Error(ErrorCode::InvalidArgument, "need at least one bin");
    return {lo, hi, std::vector<double>(bins, 0.0)};
  }

  void normalize() {
    const double total = std::accumulate(weights.begin(), weights.end(), 0.0);
    if (total > 0) {
      for (auto& w : weights) w /= total;
    }
  }
};

/// Normalized Lebesgue measure restricted to `set`, binned.
inline EmpiricalMeasure uniform_on(const IntervalSet<double>& set, double lo, double hi,
                                   std::size_t bins) {
  auto m = EmpiricalMeasure::zero(lo, hi, bins);
  for (std::size_t i = 0; i < bins; ++i) {
    m.weights[i] = set.intersect(m.bin_lo(i), m.bin_hi(i)).total_length();
  }
  m.normalize();
  return m;
}

/// Fraction of k in [0, n) with S^k(x0) in [lo, hi).
template <Scalar S>
double birkhoff_frequency(const Itm<S>& itm, S x0, const S& lo, const S& hi, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  itm.branch_of(x0);
  std::size_t hits = 0;
  S x = std::move(x0);
  for (std::size_t k = 0; k < n; ++k) {
    if (!(x < lo) && x < hi) ++hits;
    if (k + 1 < n) x = itm.eval(x);
  }
  return static_cast<double>(hits) / static_cast<double>(n);
}

/// Histogram of S^j(x0), burn_in <= j < burn_in + n.
template <Scalar S>
EmpiricalMeasure empirical_measure(const Itm<S>& itm, S x0, std::size_t burn_in, std::size_t n,
                                   std::size_t bins) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  auto m = EmpiricalMeasure::zero(to_double(itm.domain_lo()), to_double(itm.domain_hi()), bins);
  itm.branch_of(x0);
  S x = std::move(x0);
  for (std::size_t j = 0; j < burn_in; ++j) x = itm.eval(x);
  for (std::size_t j = 0; j < n; ++j) {
    m.weights[m.bin_index(to_double(x))] += 1.0;
    x = itm.eval(x);
  }
  m.normalize();
  return m;
}

/// Closure of S^N(D). The images are nested, so this decreases to the
/// attractor as N grows.
template <Scalar S>
ClosedIntervalSet<S> limit_set(const Itm<S>& itm, std::size_t N, Limits limits = {}) {
  if (N < 1) throw Error(ErrorCode::InvalidArgument, "N must be >= 1");
  return ClosedIntervalSet<S>::closure_of(iterate_image(itm, N, limits));
}

/// Wasserstein-1 on the line: L1 distance of the CDFs times the bin width.
inline double measure_distance(const EmpiricalMeasure& a, const EmpiricalMeasure& b) {
  if (a.bins() != b.bins()) {
    throw Error(ErrorCode::BinMismatch, std::to_string(a.bins()) + " vs " + std::to_string(b.bins()) + " bins");
  }
  double cdf_a = 0.0, cdf_b = 0.0, total = 0.0;
  for (std::size_t i = 0; i < a.bins(); ++i) {
    cdf_a += a.weights[i];
    cdf_b += b.weights[i];
    total += std::fabs(cdf_a - cdf_b);
  }
  return total * a.bin_width();
}

/// S#mu for a histogram read as a piecewise-constant density: each bin's mass
/// is split over `samples_per_bin` points, which are mapped and re-binned.
template <Scalar S>
EmpiricalMeasure pushforward(const Itm<S>& itm, const EmpiricalMeasure& mu,
                             std::size_t samples_per_bin = 16) {
  auto out = EmpiricalMeasure::zero(mu.lo, mu.hi, mu.bins());
  const double dom_hi = to_double(itm.domain_hi());
  for (std::size_t i = 0; i < mu.bins(); ++i) {
    if (mu.weights[i] == 0.0) continue;
    const double w = mu.weights[i] / static_cast<double>(samples_per_bin);
    for (std::size_t s = 0; s < samples_per_bin; ++s) {
      double x = mu.bin_lo(i) + (static_cast<double>(s) + 0.5) / static_cast<double>(samples_per_bin) *
                                    mu.bin_width();
      x = std::min(x, std::nextafter(dom_hi, mu.lo));
      out.weights[out.bin_index(to_double(itm.eval(S(x))))] += w;
    }
  }
  out.normalize();
  return out;
}

struct MaximalMeasureConfig {
  std::size_t sample_count = 8;
  std::size_t orbit_len = 100'000;
  std::size_t bins = 100;
  std::size_t max_period = 50;
  std::size_t burn_in = 10'000;
  std::uint64_t seed = 1;
  unsigned threads = 0;
  Limits limits{};
};

struct NonAtomicPart {
  IntervalSet<double> support;
  EmpiricalMeasure measure;
  std::vector<std::size_t> members;  // sample indices
};

/// mu* = (mu_na + mu_per)/2, or whichever part exists.
struct MaximalMeasureEstimate {
  std::vector<NonAtomicPart> non_atomic;
  IntervalSet<double> periodic_support;
  EmpiricalMeasure combined;
  std::vector<EmpiricalMeasure> samples;  // per sampled start, index order
  std::vector<bool> sample_periodic;      // sample landed on a periodic orbit
  std::size_t rigid_segment_count = 0;
  bool containment_holds = true;          // every sample support inside the combined one
};

namespace detail {

inline std::size_t mask_count(const std::vector<bool>& m) {
  return static_cast<std::size_t>(std::count(m.begin(), m.end(), true));
}

inline std::size_t mask_overlap(const std::vector<bool>& a, const std::vector<bool>& b) {
  std::size_t n = 0;
  for (std::size_t i = 0; i < a.size(); ++i) n += (a[i] && b[i]) ? 1 : 0;
  return n;
}

/// a subset of b dilated by one bin.
inline bool mask_inside(const std::vector<bool>& a, const std::vector<bool>& b) {
  for (std::size_t i = 0; i < a.size(); ++i) {
    if (!a[i]) continue;
    const bool near = b[i] || (i > 0 && b[i - 1]) || (i + 1 < b.size() && b[i + 1]);
    if (!near) return false;
  }
  return true;
}

}  // namespace detail

/// Estimates the maximal measure: Lebesgue on the rigid segments for the
/// periodic part, and clustered long-orbit histograms from random starts for
/// the non-atomic ergodic components. Two histograms share a component when
/// their supports overlap in at least half of the smaller support.
template <Scalar S>
MaximalMeasureEstimate estimate_maximal_measure(const Itm<S>& itm, const MaximalMeasureConfig& cfg) {
  if (cfg.sample_count < 1) throw Error(ErrorCode::InvalidArgument, "sampleCount must be >= 1");
  if (cfg.bins < 1) throw Error(ErrorCode::InvalidArgument, "bins must be >= 1");
  const double lo = to_double(itm.domain_lo());
  const double hi = to_double(itm.domain_hi());

  MaximalMeasureEstimate est;
  const auto rigid = find_rigid_segments(itm, cfg.max_period, cfg.limits);
  est.rigid_segment_count = rigid.size();
  {
    std::vector<Interval<double>> parts;
    for (const auto& r : rigid) parts.push_back({to_double(r.interval.lo), to_double(r.interval.hi)});
    est.periodic_support = IntervalSet<double>(std::move(parts), {AmbientKind::Segment, lo, hi});
  }
  const double periodic_length = est.periodic_support.total_length();
  const bool all_periodic = periodic_length >= (hi - lo) * (1.0 - 1e-12);

  est.samples.assign(all_periodic ? 0 : cfg.sample_count, {});
  est.sample_periodic.assign(est.samples.size(), false);
  parallel_for(est.samples.size(), cfg.threads, [&](std::size_t i) {
    SeededUniform rng(cfg.seed, i);
    double x0 = rng.uniform(lo, hi);
    for (int tries = 0; tries < 1000 && est.periodic_support.contains(x0); ++tries) {
      x0 = rng.uniform(lo, hi);
    }
    S x = S(x0);
    for (std::size_t j = 0; j < cfg.burn_in; ++j) x = itm.eval(x);
    // an orbit can fall into a rigid segment, or be periodic outside one
    bool periodic = est.periodic_support.contains(to_double(x));
    if (!periodic) {
      S y = x;
      for (std::size_t p = 1; p <= cfg.max_period && !periodic; ++p) {
        y = itm.eval(y);
        periodic = ScalarTraits<S>::eq(y, x, itm.tolerance().eps);
      }
    }
    est.sample_periodic[i] = periodic;
    est.samples[i] = empirical_measure(itm, x, 0, cfg.orbit_len, cfg.bins);
  });

  // greedy clustering in sample order
  std::vector<std::vector<bool>> masks;
  for (const auto& m : est.samples) masks.push_back(m.support_mask());
  std::vector<std::vector<bool>> cluster_masks;
  for (std::size_t i = 0; i < est.samples.size(); ++i) {
    if (est.sample_periodic[i]) continue;
    const auto& mask = masks[i];
    bool placed = false;
    for (std::size_t c = 0; c < est.non_atomic.size() && !placed; ++c) {
      const std::size_t smaller = std::min(detail::mask_count(mask), detail::mask_count(cluster_masks[c]));
      if (smaller > 0 && 2 * detail::mask_overlap(mask, cluster_masks[c]) >= smaller) {
        est.non_atomic[c].members.push_back(i);
        for (std::size_t b = 0; b < mask.size(); ++b) cluster_masks[c][b] = cluster_masks[c][b] || mask[b];
        placed = true;
      }
    }
    if (!placed) {
      est.non_atomic.push_back({{}, {}, {i}});
      cluster_masks.push_back(mask);
    }
  }
  for (auto& part : est.non_atomic) {
    part.measure = EmpiricalMeasure::zero(lo, hi, cfg.bins);
    for (std::size_t i : part.members) {
      for (std::size_t b = 0; b < cfg.bins; ++b) part.measure.weights[b] += est.samples[i].weights[b];
    }
    part.measure.normalize();
    part.support = part.measure.support();
  }

  auto mu_na = EmpiricalMeasure::zero(lo, hi, cfg.bins);
  for (const auto& part : est.non_atomic) {
    for (std::size_t b = 0; b < cfg.bins; ++b) mu_na.weights[b] += part.measure.weights[b];
  }
  mu_na.normalize();
  const bool has_na = !est.non_atomic.empty();
  const bool has_per = periodic_length > 0.0;
  est.combined = EmpiricalMeasure::zero(lo, hi, cfg.bins);
  if (has_per) {
    const auto mu_per = uniform_on(est.periodic_support, lo, hi, cfg.bins);
    const double w = has_na ? 0.5 : 1.0;
    for (std::size_t b = 0; b < cfg.bins; ++b) est.combined.weights[b] += w * mu_per.weights[b];
  }
  if (has_na) {
    const double w = has_per ? 0.5 : 1.0;
    for (std::size_t b = 0; b < cfg.bins; ++b) est.combined.weights[b] += w * mu_na.weights[b];
  }
  est.combined.normalize();

  // Lemma-1 style containment, one bin of slack, on every sample
  std::vector<bool> combined_any(cfg.bins);
  for (std::size_t b = 0; b < cfg.bins; ++b) combined_any[b] = est.combined.weights[b] > 0.0;
  for (std::size_t i = 0; i < est.samples.size(); ++i) {
    if (!detail::mask_inside(masks[i], combined_any)) est.containment_holds = false;
  }
  return est;
}

struct ConvergencePoint {
  double param_distance = 0.0;
  double measure_distance = 0.0;
};

struct ConvergenceReport {
  std::vector<ConvergencePoint> points;  // input order
  EmpiricalMeasure target;
  std::vector<double> breakpoint_bin_mass;  // target mass of the bin holding each interior t_k
};

/// Max abs difference of breakpoints and offsets.
template <Scalar S>
double parameter_distance(const Itm<S>& a, const Itm<S>& b) {
  if (a.segment_count() != b.segment_count()) {
    throw Error(ErrorCode::SegmentCountMismatch, "maps have different segment counts");
  }
  double d = 0.0;
  for (std::size_t k = 0; k < a.breakpoints().size(); ++k) {
    d = std::max(d, std::fabs(to_double(a.breakpoints()[k]) - to_double(b.breakpoints()[k])));
  }
  for (std::size_t k = 0; k < a.offsets().size(); ++k) {
    d = std::max(d, std::fabs(to_double(a.offsets()[k]) - to_double(b.offsets()[k])));
  }
  return d;
}

template <Scalar S>
ConvergenceReport convergence_harness(const Itm<S>& target, const std::vector<Itm<S>>& approximants,
                                      const MaximalMeasureConfig& cfg) {
  for (const auto& a : approximants) {
    if (a.segment_count() != target.segment_count()) {
      throw Error(ErrorCode::SegmentCountMismatch,
                  "approximant has " + std::to_string(a.segment_count()) + " segments, target " +
                      std::to_string(target.segment_count()));
    }
  }
  ConvergenceReport report;
  report.target = estimate_maximal_measure(target, cfg).combined;
  for (const auto& a : approximants) {
    const auto mu = estimate_maximal_measure(a, cfg).combined;
    report.points.push_back({parameter_distance(target, a), measure_distance(mu, report.target)});
  }
  const auto& t = target.breakpoints();
  for (std::size_t k = 1; k + 1 < t.size(); ++k) {
    report.breakpoint_bin_mass.push_back(report.target.weights[report.target.bin_index(to_double(t[k]))]);
  }
  return report;
}

}  // namespace itmlab
