#pragma once

#include <algorithm>
#include <cstddef>
#include <utility>
#include <vector>

#include "itmlab/scalar.hpp"

namespace itmlab {

/// Half-open interval [lo, hi).
template <Scalar S>
struct Interval {
  S lo;
  S hi;

  S length() const { return hi - lo; }
  friend bool operator==(const Interval&, const Interval&) = default;
};

enum class AmbientKind { Segment, Circle };

/// The space a set lives in: a segment [lo, hi] or a circle of length hi - lo
/// parametrized by [lo, hi).
template <Scalar S>
struct Ambient {
  AmbientKind kind = AmbientKind::Segment;
  S lo = S(0);
  S hi = S(1);

  S length() const { return hi - lo; }
};

/// Finite disjoint union of half-open intervals, kept sorted and merged.
///
/// On the float backend, gaps and slivers of length <= eps are treated as
/// roundoff: slivers are dropped and near-touching neighbours are merged.
template <Scalar S>
class IntervalSet {
  using Traits = ScalarTraits<S>;

 public:
  IntervalSet() = default;

  explicit IntervalSet(std::vector<Interval<S>> parts, Ambient<S> ambient = {},
                       Tolerance tol = {})
      : parts_(std::move(parts)), ambient_(std::move(ambient)), tol_(tol) {
    normalize();
  }

  static IntervalSet single(S lo, S hi, Ambient<S> ambient = {}, Tolerance tol = {}) {
    return IntervalSet({Interval<S>{std::move(lo), std::move(hi)}}, std::move(ambient), tol);
  }

  /// The whole ambient space as one interval.
  static IntervalSet full(const Ambient<S>& ambient, Tolerance tol = {}) {
    return single(ambient.lo, ambient.hi, ambient, tol);
  }

  const std::vector<Interval<S>>& intervals() const { return parts_; }
  std::size_t size() const { return parts_.size(); }
  bool empty() const { return parts_.empty(); }
  const Ambient<S>& ambient() const { return ambient_; }
  Tolerance tolerance() const { return tol_; }

  S total_length() const {
    S total = S(0);
    for (const auto& p : parts_) total += p.length();
    return total;
  }

  bool contains(const S& x) const {
    auto it = std::upper_bound(parts_.begin(), parts_.end(), x,
                               [](const S& v, const Interval<S>& p) { return v < p.lo; });
    if (it == parts_.begin()) return false;
    --it;
    return x < it->hi;
  }

  /// Length of the intersection with another set.
  S overlap_length(const IntervalSet& other) const {
    S total = S(0);
    std::size_t i = 0, j = 0;
    const auto& a = parts_;
    const auto& b = other.parts_;
    while (i < a.size() && j < b.size()) {
      const S& lo = a[i].lo < b[j].lo ? b[j].lo : a[i].lo;
      const S& hi = a[i].hi < b[j].hi ? a[i].hi : b[j].hi;
      if (lo < hi) total += hi - lo;
      if (a[i].hi < b[j].hi) ++i;
      else ++j;
    }
    return total;
  }

  S symmetric_difference_length(const IntervalSet& other) const {
    return total_length() + other.total_length() - S(2) * overlap_length(other);
  }

  /// Set equality: exact on the rational backend; on floats, same interval
  /// count and symmetric difference shorter than eps.
  bool equals(const IntervalSet& other) const {
    if constexpr (Traits::exact) {
      return parts_ == other.parts_;
    } else {
      return parts_.size() == other.parts_.size() &&
             symmetric_difference_length(other) < tol_.eps;
    }
  }

  /// Inclusion, with eps slack at interval ends on the float backend.
  bool is_subset_of(const IntervalSet& other) const {
    const double eps = tol_.eps;
    std::size_t j = 0;
    for (const auto& p : parts_) {
      while (j < other.parts_.size() && Traits::le(other.parts_[j].hi, p.lo, eps)) ++j;
      if (j == other.parts_.size()) return false;
      const auto& q = other.parts_[j];
      if (!Traits::le(q.lo, p.lo, eps) || !Traits::le(p.hi, q.hi, eps)) return false;
    }
    return true;
  }

  IntervalSet intersect(const S& lo, const S& hi) const {
    std::vector<Interval<S>> out;
    for (const auto& p : parts_) {
      S a = p.lo < lo ? lo : p.lo;
      S b = hi < p.hi ? hi : p.hi;
      if (a < b) out.push_back({std::move(a), std::move(b)});
    }
    return IntervalSet(std::move(out), ambient_, tol_);
  }

  IntervalSet unite(const IntervalSet& other) const {
    auto parts = parts_;
    parts.insert(parts.end(), other.parts_.begin(), other.parts_.end());
    return IntervalSet(std::move(parts), ambient_, tol_);
  }

  friend bool operator==(const IntervalSet& a, const IntervalSet& b) { return a.equals(b); }

 private:
  void normalize() {
    const double eps = tol_.eps;
    std::vector<Interval<S>> kept;
    kept.reserve(parts_.size());
    for (auto& p : parts_) {
      if (p.lo < ambient_.lo) p.lo = ambient_.lo;
      if (ambient_.hi < p.hi) p.hi = ambient_.hi;
      if (Traits::lt(p.lo, p.hi, eps)) kept.push_back(std::move(p));
    }
    std::sort(kept.begin(), kept.end(),
              [](const Interval<S>& a, const Interval<S>& b) { return a.lo < b.lo; });
    parts_.clear();
    for (auto& p : kept) {
      if (!parts_.empty() && Traits::le(p.lo, parts_.back().hi, eps)) {
        if (parts_.back().hi < p.hi) parts_.back().hi = std::move(p.hi);
      } else {
        parts_.push_back(std::move(p));
      }
    }
  }

  std::vector<Interval<S>> parts_;
  Ambient<S> ambient_;
  Tolerance tol_;
};

/// Finite union of closed intervals [lo, hi]; the closure of an IntervalSet.
template <Scalar S>
struct ClosedIntervalSet {
  std::vector<Interval<S>> parts;  // read as closed

  static ClosedIntervalSet closure_of(const IntervalSet<S>& set) {
    ClosedIntervalSet out;
    for (const auto& p : set.intervals()) {
      if (!out.parts.empty() && out.parts.back().hi == p.lo) {
        out.parts.back().hi = p.hi;
      } else {
        out.parts.push_back(p);
      }
    }
    return out;
  }

  bool is_subset_of(const ClosedIntervalSet& other, double eps = 0.0) const {
    using Traits = ScalarTraits<S>;
    std::size_t j = 0;
    for (const auto& p : parts) {
      while (j < other.parts.size() && Traits::lt(other.parts[j].hi, p.lo, eps)) ++j;
      if (j == other.parts.size()) return false;
      const auto& q = other.parts[j];
      if (!Traits::le(q.lo, p.lo, eps) || !Traits::le(p.hi, q.hi, eps)) return false;
    }
    return true;
  }
};

}  // namespace itmlab
