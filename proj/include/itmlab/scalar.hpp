#pragma once

#include <cmath>
#include <concepts>
#include <string>
#include <string_view>

#include <boost/multiprecision/cpp_int.hpp>

#include "itmlab/error.hpp"

namespace itmlab {

/// Arbitrary-precision rational; boost keeps it in lowest terms after every
/// operation, so equality is structural.
using Rational = boost::multiprecision::cpp_rational;

/// Tolerances for the floating-point backend. Ignored by the rational backend.
struct Tolerance {
  double eps = 1e-12;
};

template <class S>
struct ScalarTraits;

template <>
struct ScalarTraits<Rational> {
  static constexpr bool exact = true;
  static constexpr std::string_view backend = "rational";

  static double to_double(const Rational& v) { return v.convert_to<double>(); }
  static Rational abs(const Rational& v) { return v < 0 ? Rational(-v) : v; }
  static bool eq(const Rational& a, const Rational& b, double) { return a == b; }
  static bool is_zero(const Rational& a, double) { return a == 0; }
  // a < b, not merely within tolerance of it.
  static bool lt(const Rational& a, const Rational& b, double) { return a < b; }
  static bool le(const Rational& a, const Rational& b, double) { return a <= b; }
};

template <>
struct ScalarTraits<double> {
  static constexpr bool exact = false;
  static constexpr std::string_view backend = "float";

  static double to_double(double v) { return v; }
  static double abs(double v) { return std::fabs(v); }
  static bool eq(double a, double b, double eps) { return std::fabs(a - b) <= eps; }
  static bool is_zero(double a, double eps) { return std::fabs(a) <= eps; }
  static bool lt(double a, double b, double eps) { return a < b - eps; }
  static bool le(double a, double b, double eps) { return a <= b + eps; }
};

template <class S>
concept Scalar = requires { ScalarTraits<S>::exact; };

template <Scalar S>
double to_double(const S& v) {
  return ScalarTraits<S>::to_double(v);
}

inline Rational parse_rational(std::string_view text) {
  try {
    return Rational(std::string(text));
  } catch (const std::exception& e) {
    throw Error(ErrorCode::InvalidArgument,
                "cannot parse rational '" + std::string(text) + "': " + e.what());
  }
}

inline std::string format_rational(const Rational& v) { return v.str(); }

}  // namespace itmlab
