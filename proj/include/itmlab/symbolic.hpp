#pragma once

#include <algorithm>
#include <cstddef>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "itmlab/error.hpp"
#include "itmlab/itm.hpp"
#include "itmlab/scalar.hpp"

namespace itmlab {

/// Symbols are 1-based branch indices: symbols[j] = k iff S^j(x) lies in I_k.
struct Itinerary {
  std::vector<unsigned> symbols;
  std::size_t alphabet = 1;

  std::size_t size() const { return symbols.size(); }

  /// One character per symbol when n <= 9, comma-separated otherwise.
  std::string to_text() const {
    std::string out;
    for (std::size_t j = 0; j < symbols.size(); ++j) {
      if (alphabet > 9 && j > 0) out += ',';
      out += std::to_string(symbols[j]);
    }
    return out;
  }
};

template <Scalar S>
Itinerary itinerary(const Itm<S>& itm, S x0, std::size_t m) {
  if (m < 1) throw Error(ErrorCode::InvalidArgument, "m must be >= 1");
  Itinerary out{{}, itm.segment_count()};
  out.symbols.reserve(m);
  S x = std::move(x0);
  for (std::size_t j = 0; j < m; ++j) {
    const std::size_t k = itm.branch_of(x);
    out.symbols.push_back(static_cast<unsigned>(k + 1));
    if (j + 1 < m) x = itm.eval(x);
  }
  return out;
}

enum class LimitSide { Right, Left };

inline std::string_view to_string(LimitSide side) {
  return side == LimitSide::Right ? "right-limit" : "left-limit";
}

struct SeparatrixReport {
  std::size_t source = 0;  // i: orbit of t_i (right) or t_i - 0 (left)
  std::size_t target = 0;  // j: S^k lands on t_j
  std::size_t steps = 0;   // k >= 1
  LimitSide side = LimitSide::Right;

  friend bool operator==(const SeparatrixReport&, const SeparatrixReport&) = default;
};

struct SeparatrixConfig {
  double eps_left = 1e-9;  // float backend: left limit of t_i taken at t_i - eps_left
};

/// Breakpoint orbits that hit breakpoints within max_steps. Right limits start
/// at t_i for i = 0..n-1; left limits at t_i - 0 for i = 1..n. Hits are
/// checked against t_0..t_{n-1}: a left limit landing on t_n only touches the
/// right end of a branch image. For each
/// (source, target, side) only the first hit is reported. On the rational
/// backend the left-limit orbit applies the branch left of t_i to t_i itself
/// and then iterates; further discontinuities along the orbit are approached
/// from the same side by carrying the flag forward.
template <Scalar S>
std::vector<SeparatrixReport> detect_separatrices(const Itm<S>& itm, std::size_t max_steps,
                                                  SeparatrixConfig cfg = {}) {
  using Traits = ScalarTraits<S>;
  if (max_steps < 1) throw Error(ErrorCode::InvalidArgument, "maxSteps must be >= 1");
  const auto& t = itm.breakpoints();
  const std::size_t n = itm.segment_count();
  const double eps = itm.tolerance().eps;
  std::vector<SeparatrixReport> out;

  // targets are the interior breakpoints t_1..t_{n-1}; the endpoints are not discontinuities
  const auto first = t.begin() + 1;
  const auto last = t.end() - 1;
  auto hit_target = [&](const S& x, double tol) -> std::optional<std::size_t> {
    auto it = std::lower_bound(first, last, x);
    if (it != last && Traits::eq(*it, x, tol)) return static_cast<std::size_t>(it - t.begin());
    if (it != first && Traits::eq(*(it - 1), x, tol)) {
      return static_cast<std::size_t>(it - t.begin()) - 1;
    }
    return std::nullopt;
  };

  auto trace = [&](std::size_t i, LimitSide side) {
    std::vector<bool> seen(n + 1, false);
    S x = t[i];
    double tol = eps;
    if constexpr (!Traits::exact) {
      if (side == LimitSide::Left) {
        x = t[i] - cfg.eps_left;
        tol = std::max(eps, 2.0 * cfg.eps_left);
      }
    }
    for (std::size_t k = 1; k <= max_steps; ++k) {
      if (Traits::exact && side == LimitSide::Left) {
        if (!(itm.domain_lo() < x)) break;
        x = itm.eval_left_limit(x);
      } else {
        x = itm.eval(x);
      }
      if (auto j = hit_target(x, tol); j && !seen[*j]) {
        seen[*j] = true;
        out.push_back({i, *j, k, side});
      }
    }
  };

  for (std::size_t i = 0; i < n; ++i) trace(i, LimitSide::Right);
  for (std::size_t i = 1; i <= n; ++i) trace(i, LimitSide::Left);
  return out;
}

/// Largest gap between consecutive times j in [0, n] with S^j(x0) in [lo, hi);
/// nullopt when the orbit never returns.
template <Scalar S>
std::optional<std::size_t> syndetic_gap(const Itm<S>& itm, S x0, const S& lo, const S& hi,
                                        std::size_t n) {
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  if (x0 < lo || !(x0 < hi)) throw Error(ErrorCode::InvalidArgument, "x0 must lie in U");
  std::size_t last = 0, gap = 0;
  bool returned = false;
  S x = std::move(x0);
  for (std::size_t j = 1; j <= n; ++j) {
    x = itm.eval(x);
    if (!(x < lo) && x < hi) {
      gap = std::max(gap, j - last);
      last = j;
      returned = true;
    }
  }
  if (!returned) return std::nullopt;
  return gap;
}

struct ComplexityRow {
  std::size_t length = 0;
  std::size_t count = 0;
};

/// Distinct factors of each length 1..max_len across the itineraries.
inline std::vector<ComplexityRow> word_complexity(const std::vector<Itinerary>& itineraries,
                                                  std::size_t max_len) {
  if (max_len < 1) throw Error(ErrorCode::InvalidArgument, "maxLen must be >= 1");
  if (itineraries.empty()) throw Error(ErrorCode::EmptyInput, "no itineraries");
  for (const auto& it : itineraries) {
    if (it.size() < 2 * max_len) {
      throw Error(ErrorCode::ItineraryTooShort,
                  "itinerary of length " + std::to_string(it.size()) + " needs >= " +
                      std::to_string(2 * max_len));
    }
  }
  std::vector<ComplexityRow> rows;
  for (std::size_t len = 1; len <= max_len; ++len) {
    std::set<std::vector<unsigned>> words;
    for (const auto& it : itineraries) {
      for (std::size_t j = 0; j + len <= it.size(); ++j) {
        words.emplace(it.symbols.begin() + static_cast<long>(j),
                      it.symbols.begin() + static_cast<long>(j + len));
      }
    }
    rows.push_back({len, words.size()});
  }
  return rows;
}

inline std::string complexity_csv(const std::vector<ComplexityRow>& rows) {
  std::string out = "L,count\n";
  for (const auto& r : rows) out += std::to_string(r.length) + "," + std::to_string(r.count) + "\n";
  return out;
}

/// Combined evidence for minimality of the symbolic model: no separatrices and
/// every sampled itinerary has the same factor set up to length max_len.
struct MinimalityDiagnostic {
  bool separatrix_free = false;
  bool factor_sets_agree = false;
  bool minimal_evidence() const { return separatrix_free && factor_sets_agree; }
};

template <Scalar S>
MinimalityDiagnostic minimality_diagnostic(const Itm<S>& itm, const std::vector<Itinerary>& samples,
                                           std::size_t max_len, std::size_t max_steps) {
  MinimalityDiagnostic d;
  d.separatrix_free = detect_separatrices(itm, max_steps).empty();
  d.factor_sets_agree = true;
  std::set<std::vector<unsigned>> first;
  for (std::size_t s = 0; s < samples.size(); ++s) {
    std::set<std::vector<unsigned>> words;
    const auto& it = samples[s];
    for (std::size_t len = 1; len <= max_len; ++len) {
      for (std::size_t j = 0; j + len <= it.size(); ++j) {
        words.emplace(it.symbols.begin() + static_cast<long>(j),
                      it.symbols.begin() + static_cast<long>(j + len));
      }
    }
    if (s == 0) {
      first = std::move(words);
    } else if (words != first) {
      d.factor_sets_agree = false;
    }
  }
  return d;
}

}  // namespace itmlab
