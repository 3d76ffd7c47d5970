#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "itmlab/error.hpp"
#include "itmlab/itm.hpp"
#include "itmlab/scalar.hpp"

namespace itmlab {

/// v mod L, in [0, L).
template <Scalar S>
S reduce_mod(const S& v, const S& length, double eps = 0.0) {
  if constexpr (ScalarTraits<S>::exact) {
    using boost::multiprecision::cpp_int;
    const Rational q = v / length;
    cpp_int whole = numerator(q) / denominator(q);  // truncates toward zero
    if (q < 0 && Rational(whole) != q) whole -= 1;
    return v - Rational(whole) * length;
  } else {
    double r = std::fmod(v, length);
    if (r < 0) r += length;
    if (r >= length - eps) r = 0.0;
    return r;
  }
}

/// Circle translation map on [0, L): y -> (y + d_k) mod L on [u_{k-1}, u_k).
template <Scalar S>
class Ctm {
  using Traits = ScalarTraits<S>;

 public:
  static Ctm make(S circumference, std::vector<S> breakpoints, std::vector<S> offsets,
                  Tolerance tol = {}) {
    const std::size_t n = offsets.size();
    if (!(S(0) < circumference)) {
      throw Error(ErrorCode::InvalidArgument, "circumference must be positive");
    }
    if (n == 0 || breakpoints.size() != n + 1) {
      throw Error(ErrorCode::InvalidArgument, "expected n+1 breakpoints for n offsets");
    }
    if (breakpoints.front() != S(0) || breakpoints.back() != circumference) {
      throw Error(ErrorCode::InvalidArgument, "breakpoints must run from 0 to the circumference");
    }
    for (std::size_t k = 1; k <= n; ++k) {
      if (!(breakpoints[k - 1] < breakpoints[k])) {
        throw Error(ErrorCode::NonMonotoneBreakpoints, "breakpoints must be strictly increasing",
                    static_cast<long>(k));
      }
    }
    for (auto& d : offsets) d = reduce_mod(d, circumference, tol.eps);
    return Ctm(std::move(circumference), std::move(breakpoints), std::move(offsets), tol);
  }

  const S& circumference() const { return length_; }
  const std::vector<S>& breakpoints() const { return breakpoints_; }
  const std::vector<S>& offsets() const { return offsets_; }
  std::size_t segment_count() const { return offsets_.size(); }
  Tolerance tolerance() const { return tol_; }

  std::size_t branch_of(const S& y) const {
    if (y < S(0) || !(y < length_)) throw Error(ErrorCode::OutOfDomain, "point outside [0, L)");
    auto it = std::upper_bound(breakpoints_.begin(), breakpoints_.end(), y);
    std::size_t k = static_cast<std::size_t>(it - breakpoints_.begin()) - 1;
    return std::min(k, offsets_.size() - 1);
  }

  S eval(const S& y) const {
    S out = y + offsets_[branch_of(y)];
    if (!(out < length_)) out -= length_;
    if constexpr (!Traits::exact) {
      if (out < 0) out = 0;
      if (out >= length_) out = 0;
    }
    return out;
  }

  /// True when every branch translates by the same amount: a rigid rotation.
  bool is_rotation() const {
    for (const auto& d : offsets_) {
      const S diff = reduce_mod(S(d - offsets_.front()), length_, tol_.eps);
      if (!Traits::is_zero(diff, tol_.eps) && !Traits::eq(diff, length_, tol_.eps)) return false;
    }
    return true;
  }

 private:
  Ctm(S length, std::vector<S> breakpoints, std::vector<S> offsets, Tolerance tol)
      : length_(std::move(length)),
        breakpoints_(std::move(breakpoints)),
        offsets_(std::move(offsets)),
        tol_(tol) {}

  S length_;
  std::vector<S> breakpoints_;
  std::vector<S> offsets_;
  Tolerance tol_;
};

template <Scalar S>
struct RotationNumber {
  S value;                // d / L in [0, 1)
  double orbit_estimate;  // winding count over n steps
};

/// Rotation number of a rigid rotation (a single branch, or branches that all
/// translate by the same amount).
template <Scalar S>
RotationNumber<S> rotation_number(const Ctm<S>& ctm, S x0, std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  if (!ctm.is_rotation()) {
    throw Error(ErrorCode::NotARotation,
                std::to_string(ctm.segment_count()) + "-branch map is not a rigid rotation");
  }
  const S& length = ctm.circumference();
  RotationNumber<S> out{ctm.offsets().front() / length, 0.0};
  // Lift: y_n = y_0 + n d - wraps L, so rho = (wraps + (y_n - y_0)/L) / n.
  S y = x0;
  std::size_t wraps = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const S next = ctm.eval(y);
    if (next < y) ++wraps;
    y = next;
  }
  out.orbit_estimate =
      (static_cast<double>(wraps) + to_double(S((y - x0) / length))) / static_cast<double>(n);
  return out;
}

/// Glues the endpoints of an ITM's domain [a, b) into a circle of length b - a.
/// Offsets are reduced modulo the circumference, and neighbouring branches that
/// then translate by the same amount are fused, so a map that is continuous
/// across a breakpoint on the circle loses that breakpoint.
template <Scalar S>
Ctm<S> itm_to_ctm(const Itm<S>& itm) {
  using Traits = ScalarTraits<S>;
  const double eps = itm.tolerance().eps;
  const S& a = itm.domain_lo();
  const S& b = itm.domain_hi();
  const S length = b - a;
  const auto& t = itm.breakpoints();
  const auto& c = itm.offsets();
  for (std::size_t k = 0; k < c.size(); ++k) {
    if (!Traits::le(a, S(t[k] + c[k]), eps) || !Traits::le(S(t[k + 1] + c[k]), b, eps)) {
      throw Error(ErrorCode::NotClosable, "branch image leaves the glued segment",
                  static_cast<long>(k + 1));
    }
  }
  std::vector<S> breakpoints{S(0)};
  std::vector<S> offsets;
  for (std::size_t k = 0; k < c.size(); ++k) {
    S d = reduce_mod(c[k], length, eps);
    if (!offsets.empty() && Traits::eq(offsets.back(), d, eps)) {
      breakpoints.back() = t[k + 1] - a;
      continue;
    }
    if (!offsets.empty()) {
      // fuse across the wrap: d and offsets.back() may differ by one circumference
      const S gap = reduce_mod(S(d - offsets.back()), length, eps);
      if (Traits::is_zero(gap, eps)) {
        breakpoints.back() = t[k + 1] - a;
        continue;
      }
    }
    offsets.push_back(std::move(d));
    breakpoints.push_back(t[k + 1] - a);
  }
  breakpoints.back() = length;
  return Ctm<S>::make(length, std::move(breakpoints), std::move(offsets), itm.tolerance());
}

struct RegimeClass {
  std::size_t n = 0;
  bool lower_holds = false;  // -lambda (beta^n - 1)/(beta - 1) <= 1
  bool upper_holds = false;  // 1 < -lambda (beta^{n+1} - 1)/(beta - 1)
};

/// The n for which the trader's log-ITM glues to an n-branch circle map:
/// -lambda (beta^n - 1)/(beta - 1) <= 1 < -lambda (beta^{n+1} - 1)/(beta - 1).
/// Equality on the right belongs to the larger n.
inline RegimeClass classify_regime(double lambda, double beta) {
  if (!(lambda > -1.0 && lambda < 0.0) || !(beta > 1.0)) {
    throw Error(ErrorCode::OutOfParameterRange, "classify_regime needs lambda in (-1,0), beta > 1");
  }
  // geometric sums 1 + beta + ... + beta^{k-1}, accumulated to avoid cancellation
  double power = 1.0;
  double sum = 1.0;
  std::size_t k = 1;
  while (-lambda * (sum + power * beta) <= 1.0) {
    power *= beta;
    sum += power;
    ++k;
  }
  RegimeClass out;
  out.n = k;
  out.lower_holds = -lambda * sum <= 1.0;
  out.upper_holds = 1.0 < -lambda * (sum + power * beta);
  return out;
}

}  // namespace itmlab
