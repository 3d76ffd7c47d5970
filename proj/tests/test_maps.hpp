#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "itmlab/itm.hpp"
#include "itmlab/random.hpp"

namespace itmlab::testmaps {

inline Rational R(long long p, long long q = 1) { return Rational(p, q); }

inline const double kGolden = (std::sqrt(5.0) - 1.0) / 2.0;

inline Itm<Rational> identity() { return Itm<Rational>::make({R(0), R(1)}, {R(0)}); }
inline Itm<double> identity_f() { return Itm<double>::make({0.0, 1.0}, {0.0}); }

inline Itm<Rational> swap_halves() {
  return Itm<Rational>::make({R(0), R(1, 2), R(1)}, {R(1, 2), R(-1, 2)});
}
inline Itm<double> swap_halves_f() { return Itm<double>::make({0.0, 0.5, 1.0}, {0.5, -0.5}); }

/// Both halves land on [1/2, 1).
inline Itm<Rational> collapse_right() {
  return Itm<Rational>::make({R(0), R(1, 2), R(1)}, {R(1, 2), R(0)});
}

/// Rotation x -> x + p/q mod 1 written as a 2-ITM.
inline Itm<Rational> rotation(long long p, long long q) {
  const Rational r(p, q);
  return Itm<Rational>::make({R(0), R(1) - r, R(1)}, {r, r - 1});
}
inline Itm<Rational> rotation_third() { return rotation(1, 3); }

inline Itm<double> rotation_f(double r) { return Itm<double>::make({0.0, 1.0 - r, 1.0}, {r, r - 1.0}); }
inline Itm<double> golden_rotation() { return rotation_f(kGolden); }

/// (1 2 3) -> (3 2 1) on thirds.
inline Itm<Rational> three_exchange() {
  return Itm<Rational>::make({R(0), R(1, 3), R(2, 3), R(1)}, {R(2, 3), R(0), R(-2, 3)});
}

inline Rational random_rational(SeededUniform& rng, long long max_den, const Rational& lo, const Rational& hi) {
  // a random p/q (q <= max_den) inside [lo, hi]; 0 is always admissible for our ranges
  for (int attempt = 0; attempt < 64; ++attempt) {
    const long long q = 1 + static_cast<long long>(rng.next() * static_cast<double>(max_den));
    const Rational span = (hi - lo) * q;
    const double width = span.convert_to<double>();
    if (width < 1.0) continue;
    Rational start = lo * q;
    long long p0 = static_cast<long long>(std::ceil(start.convert_to<double>() - 1e-12));
    while (Rational(p0, q) < lo) ++p0;
    long long p1 = static_cast<long long>(std::floor((hi * q).convert_to<double>() + 1e-12));
    while (Rational(p1, q) > hi) --p1;
    if (p1 < p0) continue;
    const long long p = p0 + static_cast<long long>(rng.next() * static_cast<double>(p1 - p0 + 1));
    return Rational(std::min(p, p1), q);
  }
  return 0;
}

/// Random valid n-ITMs on [0,1) whose breakpoints and offsets have
/// denominators at most max_den.
inline std::vector<Itm<Rational>> random_rational_itms(std::size_t count, std::size_t n, long long max_den,
                                                       std::uint64_t seed) {
  SeededUniform rng(seed);
  std::vector<Itm<Rational>> out;
  while (out.size() < count) {
    std::vector<Rational> t{R(0)};
    for (std::size_t k = 1; k < n; ++k) {
      const long long q = 2 + static_cast<long long>(rng.next() * static_cast<double>(max_den - 1));
      const long long p = 1 + static_cast<long long>(rng.next() * static_cast<double>(q - 1));
      t.emplace_back(p, q);
    }
    t.push_back(R(1));
    std::sort(t.begin(), t.end());
    if (std::adjacent_find(t.begin(), t.end()) != t.end()) continue;
    std::vector<Rational> c;
    for (std::size_t k = 1; k <= n; ++k) c.push_back(random_rational(rng, max_den, -t[k - 1], R(1) - t[k]));
    out.push_back(Itm<Rational>::make(std::move(t), std::move(c)));
  }
  return out;
}

}  // namespace itmlab::testmaps
