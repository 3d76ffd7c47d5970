#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstddef>
#include <optional>
#include <string>
#include <vector>

#include "itmlab/circle_maps.hpp"
#include "itmlab/error.hpp"
#include "itmlab/itm.hpp"

namespace itmlab::trader {

/// Parameters of x' = lambda x + alpha s, s' = Psi(s + x' - x); beta = lambda + alpha.
class TraderParams {
 public:
  static TraderParams from_alpha(double lambda, double alpha) { return TraderParams(lambda, alpha); }
  static TraderParams from_beta(double lambda, double beta) { return TraderParams(lambda, beta - lambda); }

  double lambda() const { return lambda_; }
  double alpha() const { return alpha_; }
  double beta() const { return lambda_ + alpha_; }

  /// lambda < 0 and beta > 1: where the closed-form Poincare theory holds.
  bool in_analyzed_regime() const { return lambda_ < 0.0 && beta() > 1.0; }

 private:
  TraderParams(double lambda, double alpha) : lambda_(lambda), alpha_(alpha) {
    if (!(lambda > -1.0 && lambda < 1.0)) {
      throw Error(ErrorCode::OutOfParameterRange, "lambda must lie in (-1, 1)");
    }
    if (!std::isfinite(alpha)) throw Error(ErrorCode::OutOfParameterRange, "alpha must be finite");
  }

  double lambda_;
  double alpha_;
};

/// A point of the strip |s| <= 1.
struct TraderState {
  double x = 0.0;
  double s = 0.0;

  double p() const { return x - s; }
  friend bool operator==(const TraderState&, const TraderState&) = default;
};

/// The risk cutoff: tau inside [-1, 1], zero outside.
inline double psi(double tau) { return std::fabs(tau) <= 1.0 ? tau : 0.0; }

inline TraderState step_f(const TraderParams& params, const TraderState& st) {
  const double x_next = params.lambda() * st.x + params.alpha() * st.s;
  return {x_next, psi(st.s + x_next - st.x)};
}

struct EquilibriumSegment {
  TraderState e;  // (alpha/(1-lambda), 1)
  TraderState f;  // (-alpha/(1-lambda), -1)
};

/// Endpoints of the segment x = alpha s / (1 - lambda) of fixed points.
inline EquilibriumSegment equilibrium_segment(const TraderParams& params) {
  const double x = params.alpha() / (1.0 - params.lambda());
  return {{x, 1.0}, {-x, -1.0}};
}

inline bool in_parallelogram(const TraderParams& params, const TraderState& st) {
  const double half_width = std::fabs(params.alpha() / (1.0 - params.lambda()) - 1.0);
  return std::fabs(st.x - st.s) <= half_width && std::fabs(st.s) <= 1.0;
}

/// Fixed point on the slant line x - s = p0.
inline TraderState slant_fixed_point(const TraderParams& params, double p0) {
  const double beta = params.beta();
  if (beta == 1.0) throw Error(ErrorCode::OutOfParameterRange, "slant fixed point needs beta != 1");
  return {-params.alpha() * p0 / (1.0 - beta), -(1.0 - params.lambda()) * p0 / (1.0 - beta)};
}

/// Row-major 2x2 matrix.
struct Matrix2 {
  std::array<double, 4> m{1.0, 0.0, 0.0, 1.0};

  double operator()(int r, int c) const { return m[static_cast<std::size_t>(2 * r + c)]; }

  friend Matrix2 operator*(const Matrix2& a, const Matrix2& b) {
    return {{a(0, 0) * b(0, 0) + a(0, 1) * b(1, 0), a(0, 0) * b(0, 1) + a(0, 1) * b(1, 1),
             a(1, 0) * b(0, 0) + a(1, 1) * b(1, 0), a(1, 0) * b(0, 1) + a(1, 1) * b(1, 1)}};
  }
};

/// Linear part of the map while the cutoff is inactive.
inline Matrix2 system_matrix(const TraderParams& params) {
  const double l = params.lambda();
  const double a = params.alpha();
  return {{l, a, l - 1.0, a + 1.0}};
}

/// Closed form of system_matrix^n (eigenvalues 1 and beta).
inline Matrix2 matrix_power(const TraderParams& params, unsigned n) {
  const double l = params.lambda();
  const double a = params.alpha();
  const double beta = params.beta();
  if (beta == 1.0) throw Error(ErrorCode::OutOfParameterRange, "matrix_power needs beta != 1");
  if (n == 0) return {};
  const double bn = std::pow(beta, static_cast<double>(n));
  const double inv = 1.0 / (beta - 1.0);
  return {{(a - (1.0 - l) * bn) * inv, (a * bn - a) * inv, (l - 1.0) * (bn - 1.0) * inv,
           (a * bn - 1.0 + l) * inv}};
}

/// The ladder q_1 > q_2 > ... of discontinuities of the Poincare map T, with
/// the branch slopes chi_k = T(q_k)/q_k and the invariant segment [mLo, nuHi].
struct PoincareLadder {
  TraderParams params = TraderParams::from_alpha(-0.5, 2.0);
  std::vector<double> q;    // q[k-1] = q_k
  std::vector<double> chi;  // chi[k-1] = chi_k
  double m_lo = 0.0;        // -lambda/(1-lambda)
  double nu_hi = 0.0;       // beta - lambda/(1-lambda)
  double max_return_residual = 0.0;  // max |A^k (q_k,0) - (q_k-1,-1)|
};

inline double q_value(const TraderParams& params, std::size_t k) {
  const double beta = params.beta();
  return (beta - 1.0) / ((1.0 - params.lambda()) * (std::pow(beta, static_cast<double>(k)) - 1.0));
}

inline void require_analyzed(const TraderParams& params, const char* what) {
  if (!params.in_analyzed_regime()) {
    throw Error(ErrorCode::OutOfAnalyzedRegime,
                std::string(what) + " needs lambda in (-1,0) and beta > 1");
  }
}

inline PoincareLadder q_ladder(const TraderParams& params, std::size_t K) {
  require_analyzed(params, "q_ladder");
  if (K < 2) throw Error(ErrorCode::InvalidArgument, "ladder needs K >= 2");
  PoincareLadder ladder{params, {}, {}, 0.0, 0.0, 0.0};
  const double l = params.lambda();
  ladder.m_lo = -l / (1.0 - l);
  ladder.nu_hi = params.beta() - l / (1.0 - l);
  for (std::size_t k = 1; k <= K; ++k) {
    const double q = q_value(params, k);
    ladder.q.push_back(q);
    ladder.chi.push_back((params.beta() - l * q) / q);
    const Matrix2 ak = matrix_power(params, static_cast<unsigned>(k));
    const double rx = ak(0, 0) * q - (q - 1.0);
    const double rs = ak(1, 0) * q + 1.0;
    ladder.max_return_residual =
        std::max({ladder.max_return_residual, std::fabs(rx), std::fabs(rs)});
  }
  return ladder;
}

/// First index k with q_k < x <= ... i.e. the k with q_{k+1} < x <= q_k; 0 for x > q_1.
inline std::size_t ladder_branch(const TraderParams& params, double x) {
  const double q1 = 1.0 / (1.0 - params.lambda());
  if (x > q1) return 0;
  const double beta = params.beta();
  // q_k >= x  <=>  beta^k <= 1 + (beta-1)/((1-lambda) x)
  const double bound = 1.0 + (beta - 1.0) / ((1.0 - params.lambda()) * x);
  auto k = static_cast<std::size_t>(std::max(1.0, std::floor(std::log(bound) / std::log(beta))));
  while (k > 1 && q_value(params, k) < x) --k;
  while (q_value(params, k + 1) >= x) ++k;
  return k;
}

/// Slope of T at x: -lambda on (q_1, inf), chi_k on (q_{k+1}, q_k].
inline double branch_slope(const TraderParams& params, double x) {
  const std::size_t k = ladder_branch(params, x);
  if (k == 0) return -params.lambda();
  const double q = q_value(params, k);
  return (params.beta() - params.lambda() * q) / q;
}

enum class PoincareMode { ClosedForm, Simulated };

struct FirstReturn {
  double x = 0.0;         // signed x_i, the value of T-hat
  std::size_t steps = 0;  // i >= 1
};

/// Iterates the system from (x, 0) to the first i >= 1 with s_i == 0. The
/// cutoff writes an exact zero, so no tolerance is involved.
inline FirstReturn first_return(const TraderParams& params, double x,
                                std::size_t max_steps = 1'000'000) {
  TraderState st{x, 0.0};
  for (std::size_t i = 1; i <= max_steps; ++i) {
    st = step_f(params, st);
    if (st.s == 0.0) return {st.x, i};
  }
  throw Error(ErrorCode::NonEscaping,
              "no return to s = 0 within " + std::to_string(max_steps) + " steps");
}

/// T(x) = |T-hat(x)| for x > 0.
inline double poincare_T(const TraderParams& params, double x, PoincareMode mode,
                         std::size_t max_steps = 1'000'000) {
  if (!(x > 0.0)) throw Error(ErrorCode::OutOfDomain, "poincare_T needs x > 0");
  if (mode == PoincareMode::Simulated) return std::fabs(first_return(params, x, max_steps).x);
  require_analyzed(params, "closed-form Poincare map");
  return branch_slope(params, x) * x;
}

/// The log-conjugate of T restricted to [mLo, nuHi]: an ITM on
/// [ln mLo, ln nuHi) with breakpoints ln q_k for the q_k inside (mLo, nuHi),
/// offsets ln chi_k, and ln(-lambda) on the top branch. `ctm` is the glued
/// circle map (ln mLo identified with ln nuHi).
struct TraderItm {
  PoincareLadder ladder;
  Itm<double> itm;
  Ctm<double> ctm;
  RegimeClass regime;
  std::size_t interior_breakpoints = 0;
};

inline constexpr std::size_t kMaxLadder = 10'000;

/// Smallest K with q_K < mLo.
inline std::size_t ladder_length(const TraderParams& params) {
  require_analyzed(params, "ladder_length");
  const double m_lo = -params.lambda() / (1.0 - params.lambda());
  const double beta = params.beta();
  // q_k < m_lo  <=>  beta^k > 1 + (beta-1)/((1-lambda) m_lo)
  const double bound = 1.0 + (beta - 1.0) / ((1.0 - params.lambda()) * m_lo);
  auto k = static_cast<std::size_t>(std::max(1.0, std::floor(std::log(bound) / std::log(beta))));
  while (k > 1 && q_value(params, k - 1) < m_lo) --k;
  while (!(q_value(params, k) < m_lo)) ++k;
  if (k > kMaxLadder) {
    throw Error(ErrorCode::LadderTooShort,
                "ladder needs " + std::to_string(k) + " rungs (cap " + std::to_string(kMaxLadder) + ")");
  }
  return k;
}

inline TraderItm build_trader_itm(const TraderParams& params, std::optional<std::size_t> K = {},
                                  Tolerance tol = {}) {
  require_analyzed(params, "build_trader_itm");
  const std::size_t needed = ladder_length(params);
  const std::size_t rungs = K.value_or(needed);
  if (rungs < needed) {
    throw Error(ErrorCode::LadderTooShort,
                "K = " + std::to_string(rungs) + " but q_K < mLo first holds at K = " +
                    std::to_string(needed));
  }
  PoincareLadder ladder = q_ladder(params, std::max<std::size_t>(rungs, 2));
  std::size_t inside = 0;
  while (inside < ladder.q.size() && ladder.q[inside] > ladder.m_lo) ++inside;

  std::vector<double> breakpoints{std::log(ladder.m_lo)};
  std::vector<double> offsets;
  for (std::size_t k = inside; k >= 1; --k) {
    breakpoints.push_back(std::log(ladder.q[k - 1]));
    offsets.push_back(std::log(ladder.chi[k - 1]));
  }
  breakpoints.push_back(std::log(ladder.nu_hi));
  offsets.push_back(std::log(-params.lambda()));
  auto itm = Itm<double>::make(std::move(breakpoints), std::move(offsets), tol);
  auto ctm = itm_to_ctm(itm);
  return {std::move(ladder), std::move(itm), std::move(ctm),
          classify_regime(params.lambda(), params.beta()), inside};
}

/// (1/n) sum of ln|T'| along the closed-form orbit of x0.
inline double lyapunov_exponent(const TraderParams& params, double x0, std::size_t n,
                                double eps = 1e-12) {
  require_analyzed(params, "lyapunov_exponent");
  if (n < 1) throw Error(ErrorCode::InvalidArgument, "n must be >= 1");
  const double l = params.lambda();
  const double m_lo = -l / (1.0 - l);
  const double nu_hi = params.beta() - l / (1.0 - l);
  if (!(x0 > m_lo && x0 < nu_hi)) throw Error(ErrorCode::OutOfDomain, "x0 must lie in (mLo, nuHi)");
  double x = x0;
  double sum = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const std::size_t k = ladder_branch(params, x);
    const double upper = q_value(params, k == 0 ? 1 : k);
    const double lower = q_value(params, k + 1);
    if (std::fabs(x - upper) <= eps * upper || std::fabs(x - lower) <= eps * lower) {
      throw Error(ErrorCode::BreakpointHit, "orbit hit a discontinuity at step " + std::to_string(i));
    }
    const double slope = branch_slope(params, x);
    sum += std::log(slope);
    x *= slope;
  }
  return sum / static_cast<double>(n);
}

/// Mean of ln|T'| over a given list of points; the Lyapunov sum without the
/// dynamics.
inline double mean_log_slope(const TraderParams& params, const std::vector<double>& xs) {
  if (xs.empty()) throw Error(ErrorCode::EmptyInput, "no points");
  double sum = 0.0;
  for (double x : xs) sum += std::log(branch_slope(params, x));
  return sum / static_cast<double>(xs.size());
}

struct StabilityProbe {
  bool stays_close = false;  // some start near the endpoint never leaves a small neighbourhood
  bool escapes = false;      // some start near the endpoint leaves the eps0-neighbourhood
  bool semi_stable() const { return stays_close && escapes; }
};

/// Numerical look at the endpoint E of the equilibrium segment: perturb it in
/// a fan of directions into |s| < 1 and watch how far each orbit wanders.
inline StabilityProbe probe_endpoint(const TraderParams& params, double delta = 1e-3,
                                     std::size_t steps = 2000, double eps0 = 0.1) {
  const TraderState e = equilibrium_segment(params).e;
  StabilityProbe probe;
  constexpr int kDirections = 32;
  for (int d = 0; d < kDirections; ++d) {
    const double angle = M_PI + M_PI * (d + 0.5) / kDirections;  // lower half-plane: s < 1
    TraderState st{e.x + delta * std::cos(angle), e.s + delta * std::sin(angle)};
    double worst = 0.0;
    for (std::size_t i = 0; i < steps; ++i) {
      st = step_f(params, st);
      worst = std::max(worst, std::hypot(st.x - e.x, st.s - e.s));
    }
    if (worst <= 10.0 * delta) probe.stays_close = true;
    if (worst >= eps0) probe.escapes = true;
  }
  return probe;
}

}  // namespace itmlab::trader
