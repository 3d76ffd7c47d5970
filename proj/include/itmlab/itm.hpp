#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "itmlab/error.hpp"
#include "itmlab/interval_set.hpp"
#include "itmlab/scalar.hpp"

namespace itmlab {

/// Caps guarding computations whose fragment counts can blow up on infinite maps.
struct Limits {
  std::size_t max_intervals = 1'000'000;
};

/// Interval translation map S(t) = t + c_k on I_k = [t_{k-1}, t_k).
///
/// The domain is [t_0, t_n); the usual normalization is t_0 = 0, t_n = 1, but
/// maps arising from Poincare reductions live on other segments. Every branch
/// image [t_{k-1}+c_k, t_k+c_k) must stay inside the domain. Images of distinct
/// branches may overlap; when they do not the map is an interval exchange.
template <Scalar S>
class Itm {
  using Traits = ScalarTraits<S>;

 public:
  /// Validating constructor. On the float backend the range condition is
  /// checked with slack `tol.eps`.
  static Itm make(std::vector<S> breakpoints, std::vector<S> offsets, Tolerance tol = {}) {
    const std::size_t n = offsets.size();
    if (n == 0 || breakpoints.size() != n + 1) {
      throw Error(ErrorCode::InvalidArgument,
                  "expected n+1 breakpoints for n offsets, got " +
                      std::to_string(breakpoints.size()) + " and " + std::to_string(n));
    }
    for (std::size_t k = 1; k <= n; ++k) {
      if (!(breakpoints[k - 1] < breakpoints[k])) {
        throw Error(ErrorCode::NonMonotoneBreakpoints,
                    "breakpoints must be strictly increasing (at index " + std::to_string(k) + ")",
                    static_cast<long>(k));
      }
    }
    const S& lo = breakpoints.front();
    const S& hi = breakpoints.back();
    for (std::size_t k = 1; k <= n; ++k) {
      const S image_lo = breakpoints[k - 1] + offsets[k - 1];
      const S image_hi = breakpoints[k] + offsets[k - 1];
      if (!Traits::le(lo, image_lo, tol.eps) || !Traits::le(image_hi, hi, tol.eps)) {
        throw Error(ErrorCode::ImageOutOfRange,
                    "image of branch " + std::to_string(k) + " leaves the domain",
                    static_cast<long>(k));
      }
    }
    return Itm(std::move(breakpoints), std::move(offsets), tol);
  }

  std::size_t segment_count() const { return offsets_.size(); }
  const std::vector<S>& breakpoints() const { return breakpoints_; }
  const std::vector<S>& offsets() const { return offsets_; }
  const S& domain_lo() const { return breakpoints_.front(); }
  const S& domain_hi() const { return breakpoints_.back(); }
  Ambient<S> ambient() const { return {AmbientKind::Segment, domain_lo(), domain_hi()}; }
  Tolerance tolerance() const { return tol_; }
  IntervalSet<S> domain() const { return IntervalSet<S>::full(ambient(), tol_); }

  /// 0-based index k of the branch containing x (t_k <= x < t_{k+1}). On the
  /// float backend a point within eps below a breakpoint is snapped onto it.
  std::size_t branch_of(const S& x) const {
    const double eps = tol_.eps;
    if (!Traits::le(domain_lo(), x, eps) || !(x < domain_hi())) {
      throw Error(ErrorCode::OutOfDomain, "point outside the domain");
    }
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), x);
    std::size_t k = it == breakpoints_.begin() ? 0 : static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    if (k >= offsets_.size()) k = offsets_.size() - 1;
    if constexpr (!Traits::exact) {
      if (k + 1 < offsets_.size() && x >= breakpoints_[k + 1] - eps) ++k;
    }
    return k;
  }

  S eval(const S& x) const { return clamp(x + offsets_[branch_of(x)]); }

  /// Applies the branch of the interval to the left of x, i.e. the k with
  /// t_k < x <= t_{k+1}; this is S(x - 0).
  S eval_left_limit(const S& x) const {
    if (!(domain_lo() < x) || domain_hi() < x) {
      throw Error(ErrorCode::OutOfDomain, "left limit needs t_0 < x <= t_n");
    }
    auto it = std::lower_bound(breakpoints_.begin(), breakpoints_.end(), x);
    std::size_t k = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return x + offsets_[k];
  }

 private:
  Itm(std::vector<S> breakpoints, std::vector<S> offsets, Tolerance tol)
      : breakpoints_(std::move(breakpoints)), offsets_(std::move(offsets)), tol_(tol) {}

  // Float roundoff may push x + c_k a hair outside the domain.
  S clamp(S y) const {
    if constexpr (!Traits::exact) {
      if (y < domain_lo()) return domain_lo();
      if (y >= domain_hi()) return std::nextafter(domain_hi(), domain_lo());
    }
    return y;
  }

  std::vector<S> breakpoints_;
  std::vector<S> offsets_;
  Tolerance tol_;
};

/// S(A) = union over k of ((A intersect I_k) + c_k).
template <Scalar S>
IntervalSet<S> image(const Itm<S>& itm, const IntervalSet<S>& set) {
  const auto& t = itm.breakpoints();
  const auto& c = itm.offsets();
  std::vector<Interval<S>> out;
  for (const auto& part : set.intervals()) {
    auto first = std::upper_bound(t.begin(), t.end(), part.lo);
    std::size_t k = first == t.begin() ? 0 : static_cast<std::size_t>(first - t.begin()) - 1;
    for (; k < c.size() && t[k] < part.hi; ++k) {
      const S& lo = part.lo < t[k] ? t[k] : part.lo;
      const S& hi = t[k + 1] < part.hi ? t[k + 1] : part.hi;
      if (lo < hi) out.push_back({lo + c[k], hi + c[k]});
    }
  }
  return IntervalSet<S>(std::move(out), itm.ambient(), itm.tolerance());
}

/// S^m of the whole domain.
template <Scalar S>
IntervalSet<S> iterate_image(const Itm<S>& itm, std::size_t m, Limits limits = {}) {
  auto set = itm.domain();
  for (std::size_t i = 0; i < m; ++i) {
    set = image(itm, set);
    if (set.size() > limits.max_intervals) {
      throw Error(ErrorCode::ResourceLimit,
                  "image has " + std::to_string(set.size()) + " intervals after " +
                      std::to_string(i + 1) + " steps");
    }
  }
  return set;
}

enum class FinitenessStatus { Finite, UndecidedAfter };

template <Scalar S>
struct FinitenessResult {
  FinitenessStatus status = FinitenessStatus::UndecidedAfter;
  std::size_t step = 0;       // m with S^m = S^{m+1}, when Finite
  IntervalSet<S> attractor;   // S^m of the domain, when Finite
  std::size_t max_iter = 0;

  bool finite() const { return status == FinitenessStatus::Finite; }
};

/// Smallest m <= maxIter with S^{m+1}(D) == S^m(D). Never reports "infinite".
template <Scalar S>
FinitenessResult<S> detect_finiteness(const Itm<S>& itm, std::size_t max_iter, Limits limits = {}) {
  if (max_iter < 1) throw Error(ErrorCode::InvalidArgument, "maxIter must be >= 1");
  FinitenessResult<S> result;
  result.max_iter = max_iter;
  auto current = itm.domain();
  for (std::size_t m = 0; m <= max_iter; ++m) {
    auto next = image(itm, current);
    if (next.size() > limits.max_intervals) {
      throw Error(ErrorCode::ResourceLimit,
                  "image has " + std::to_string(next.size()) + " intervals at step " +
                      std::to_string(m + 1));
    }
    if (next.equals(current)) {
      result.status = FinitenessStatus::Finite;
      result.step = m;
      result.attractor = std::move(current);
      return result;
    }
    current = std::move(next);
  }
  return result;
}

/// True iff the branch images are pairwise disjoint.
template <Scalar S>
bool is_iem(const Itm<S>& itm) {
  using Traits = ScalarTraits<S>;
  const auto& t = itm.breakpoints();
  const auto& c = itm.offsets();
  std::vector<Interval<S>> images;
  for (std::size_t k = 0; k < c.size(); ++k) images.push_back({t[k] + c[k], t[k + 1] + c[k]});
  std::sort(images.begin(), images.end(),
            [](const Interval<S>& a, const Interval<S>& b) { return a.lo < b.lo; });
  for (std::size_t k = 1; k < images.size(); ++k) {
    if (Traits::lt(images[k].lo, images[k - 1].hi, itm.tolerance().eps)) return false;
  }
  return true;
}

template <Scalar S>
struct RigidSegment {
  Interval<S> interval;
  std::size_t period = 0;
};

/// Intervals J on which S^p is the identity, with p <= maxPeriod minimal and
/// no iterate S^j(J), j < p, straddling a breakpoint.
///
/// The domain is refined cell by cell along the pullbacks of the breakpoints;
/// each cell carries its accumulated displacement, and a cell whose
/// displacement returns to zero is rigid with that period. Semi-decision
/// procedure: rigid segments of period > maxPeriod are not reported.
template <Scalar S>
std::vector<RigidSegment<S>> find_rigid_segments(const Itm<S>& itm, std::size_t max_period,
                                                 Limits limits = {}) {
  using Traits = ScalarTraits<S>;
  if (max_period < 1) throw Error(ErrorCode::InvalidArgument, "maxPeriod must be >= 1");
  struct Cell {
    S lo, hi;       // original coordinates
    S displacement; // S^j(x) = x + displacement on the cell
  };
  const auto& t = itm.breakpoints();
  const auto& c = itm.offsets();
  const double eps = itm.tolerance().eps;

  std::vector<Cell> cells{{itm.domain_lo(), itm.domain_hi(), S(0)}};
  std::vector<RigidSegment<S>> found;
  for (std::size_t p = 1; p <= max_period && !cells.empty(); ++p) {
    std::vector<Cell> next;
    next.reserve(cells.size() + c.size());
    for (const auto& cell : cells) {
      const S cur_lo = cell.lo + cell.displacement;
      const S cur_hi = cell.hi + cell.displacement;
      for (std::size_t k = 0; k < c.size(); ++k) {
        const S& lo = cur_lo < t[k] ? t[k] : cur_lo;
        const S& hi = t[k + 1] < cur_hi ? t[k + 1] : cur_hi;
        if (!Traits::lt(lo, hi, eps)) continue;
        next.push_back({lo - cell.displacement, hi - cell.displacement, cell.displacement + c[k]});
      }
    }
    cells.clear();
    for (auto& cell : next) {
      if (Traits::is_zero(cell.displacement, eps)) {
        found.push_back({{cell.lo, cell.hi}, p});
      } else {
        cells.push_back(std::move(cell));
      }
    }
    if (cells.size() > limits.max_intervals) {
      throw Error(ErrorCode::ResourceLimit,
                  "rigid-segment refinement exceeded " + std::to_string(limits.max_intervals) +
                      " cells at depth " + std::to_string(p));
    }
  }
  std::sort(found.begin(), found.end(), [](const RigidSegment<S>& a, const RigidSegment<S>& b) {
    return a.interval.lo < b.interval.lo;
  });
  return found;
}

/// Union of rigid segments as one set.
template <Scalar S>
IntervalSet<S> rigid_support(const Itm<S>& itm, const std::vector<RigidSegment<S>>& segments) {
  std::vector<Interval<S>> parts;
  for (const auto& r : segments) parts.push_back(r.interval);
  return IntervalSet<S>(std::move(parts), itm.ambient(), itm.tolerance());
}

/// [x0, S(x0), ..., S^steps(x0)].
template <Scalar S>
std::vector<S> orbit(const Itm<S>& itm, S x0, std::size_t steps) {
  std::vector<S> out;
  out.reserve(steps + 1);
  itm.branch_of(x0);  // validates the domain
  out.push_back(std::move(x0));
  for (std::size_t i = 0; i < steps; ++i) out.push_back(itm.eval(out.back()));
  return out;
}

}  // namespace itmlab
