#include <gtest/gtest.h>

#include <cmath>

#include "itmlab/random.hpp"
#include "itmlab/trader.hpp"

using namespace itmlab;
using namespace itmlab::trader;

namespace {

const TraderParams kBase = TraderParams::from_alpha(-0.5, 2.0);  // beta = 1.5

Matrix2 repeated(const TraderParams& p, unsigned n) {
  Matrix2 out;
  const Matrix2 a = system_matrix(p);
  for (unsigned i = 0; i < n; ++i) out = out * a;
  return out;
}

}  // namespace

TEST(Params, BetaIsDerived) {
  EXPECT_DOUBLE_EQ(kBase.beta(), 1.5);
  EXPECT_DOUBLE_EQ(TraderParams::from_beta(-0.5, 1.5).alpha(), 2.0);
  EXPECT_THROW(TraderParams::from_alpha(1.0, 0.5), Error);
  EXPECT_THROW(TraderParams::from_alpha(-1.0, 0.5), Error);
}

TEST(Psi, Examples) {
  EXPECT_EQ(psi(0.5), 0.5);
  EXPECT_EQ(psi(1.0), 1.0);
  EXPECT_EQ(psi(-1.0), -1.0);
  EXPECT_EQ(psi(-1.0001), 0.0);
}

TEST(StepF, Examples) {
  EXPECT_EQ(step_f(kBase, {0.0, 0.0}), (TraderState{0.0, 0.0}));
  EXPECT_EQ(step_f(kBase, {1.0, 0.0}), (TraderState{-0.5, 0.0}));
  // s = +-1 sits on the cut-off, where a rounding error in x' - x resets s;
  // only interior points are checked with inexact equilibria
  for (double s : {-0.99, -0.3, 0.0, 0.7, 0.99}) {
    const TraderState eq{kBase.alpha() * s / (1.0 - kBase.lambda()), s};
    const auto next = step_f(kBase, eq);
    EXPECT_NEAR(next.x, eq.x, 1e-15);
    EXPECT_NEAR(next.s, eq.s, 1e-15);
  }
}

TEST(StepF, Oddness) {
  SeededUniform rng(1);
  for (int i = 0; i < 10'000; ++i) {
    const auto p = TraderParams::from_alpha(rng.uniform(-0.99, 0.99), rng.uniform(-3, 3));
    const TraderState st{rng.uniform(-5, 5), rng.uniform(-1, 1)};
    const auto a = step_f(p, st);
    const auto b = step_f(p, {-st.x, -st.s});
    ASSERT_EQ(a.x, -b.x);
    ASSERT_EQ(a.s, -b.s);
  }
}

TEST(StepF, OrbitsStayBounded) {
  SeededUniform rng(2);
  for (int run = 0; run < 1000; ++run) {
    const auto p = TraderParams::from_alpha(rng.uniform(-0.95, 0.95), rng.uniform(-3, 3));
    TraderState st{rng.uniform(-5, 5), rng.uniform(-1, 1)};
    const double bound = std::max(std::fabs(st.x), (std::fabs(p.alpha()) + 1.0) / (1.0 - std::fabs(p.lambda())));
    for (int i = 0; i < 100'000 / 10; ++i) {
      st = step_f(p, st);
      ASSERT_LE(std::fabs(st.x), bound + 1e-9);
      ASSERT_LE(std::fabs(st.s), 1.0);
    }
  }
}

TEST(StepF, PushTowardEquilibriaWhenBetaBelowOne) {
  SeededUniform rng(3);
  for (int i = 0; i < 2000; ++i) {
    const double lambda = rng.uniform(-0.9, 0.9);
    const auto p = TraderParams::from_beta(lambda, rng.uniform(std::max(lambda, -0.9) + 0.01, 0.99));
    const double s = rng.uniform(-1, 1);
    const double on_ef = p.alpha() * s / (1.0 - p.lambda());
    const double dx = rng.uniform(1e-3, 0.2);
    EXPECT_GT(step_f(p, {on_ef - dx, s}).x, on_ef - dx);
    EXPECT_LT(step_f(p, {on_ef + dx, s}).x, on_ef + dx);
  }
}

TEST(Equilibria, Examples) {
  const auto ef = equilibrium_segment(kBase);
  EXPECT_NEAR(ef.e.x, 4.0 / 3.0, 1e-15);
  EXPECT_EQ(ef.e.s, 1.0);
  EXPECT_NEAR(ef.f.x, -4.0 / 3.0, 1e-15);
  const auto vertical = equilibrium_segment(TraderParams::from_alpha(0.3, 0.0));
  EXPECT_EQ(vertical.e.x, 0.0);
  EXPECT_EQ(vertical.f.s, -1.0);
  EXPECT_DOUBLE_EQ(equilibrium_segment(TraderParams::from_alpha(0.5, 0.25)).e.x, 0.5);
  // exactly representable endpoints are fixed exactly
  const auto exact = TraderParams::from_alpha(0.5, 0.25);
  const auto ef_exact = equilibrium_segment(exact);
  for (const auto& pt : {ef_exact.e, ef_exact.f}) EXPECT_EQ(step_f(exact, pt), pt);
}

TEST(Parallelogram, Examples) {
  EXPECT_TRUE(in_parallelogram(kBase, {0.0, 0.0}));
  EXPECT_TRUE(in_parallelogram(TraderParams::from_alpha(0.9, -2.0), {0.0, 0.0}));
  EXPECT_TRUE(in_parallelogram(kBase, {4.0 / 3.0, 1.0}));
  EXPECT_FALSE(in_parallelogram(kBase, {2.0, 0.0}));
}

TEST(SlantFixedPoint, Examples) {
  const auto zero = slant_fixed_point(kBase, 0.0);
  EXPECT_EQ(zero.x, 0.0);
  EXPECT_EQ(zero.s, 0.0);
  const auto p = TraderParams::from_alpha(0.25, 0.25);
  const auto fp = slant_fixed_point(p, 0.4);
  EXPECT_NEAR(fp.x, -0.2, 1e-15);
  EXPECT_NEAR(fp.s, -0.6, 1e-15);
  EXPECT_NEAR(fp.x - fp.s, 0.4, 1e-15);
  EXPECT_THROW(slant_fixed_point(TraderParams::from_alpha(0.5, 0.5), 0.1), Error);
}

TEST(SlantFixedPoint, GeometricConvergenceOnTheSlant) {
  const auto p = TraderParams::from_alpha(0.25, 0.25);
  const double p0 = 0.4;
  const auto fp = slant_fixed_point(p, p0);
  TraderState st{0.1, 0.1 - p0};  // on the slant x - s = p0, |s| < 1
  const double x0 = st.x;
  for (int n = 1; n <= 200; ++n) {
    st = step_f(p, st);
    ASSERT_NEAR(st.x - st.s, p0, 1e-12);
    ASSERT_NEAR(std::fabs(st.x - fp.x), std::pow(p.beta(), n) * std::fabs(x0 - fp.x), 1e-10);
  }
  EXPECT_NEAR(st.x, fp.x, 1e-10);
  EXPECT_NEAR(st.s, fp.s, 1e-10);
}

TEST(MatrixPower, Examples) {
  const auto id = matrix_power(kBase, 0);
  EXPECT_EQ(id.m, (std::array<double, 4>{1, 0, 0, 1}));
  const auto a = matrix_power(kBase, 1);
  const auto direct = system_matrix(kBase);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(a.m[i], direct.m[i], 1e-14);
  const auto a3 = matrix_power(kBase, 3);
  const auto r3 = repeated(kBase, 3);
  for (int i = 0; i < 4; ++i) EXPECT_NEAR(a3.m[i], r3.m[i], 1e-12);
}

TEST(MatrixPower, AgreesWithRepeatedProducts) {
  SeededUniform rng(4);
  for (int trial = 0; trial < 100; ++trial) {
    const auto p = TraderParams::from_alpha(rng.uniform(-0.95, 0.95), rng.uniform(0.1, 2.5));
    if (std::fabs(p.beta() - 1.0) < 1e-3) continue;
    for (unsigned n = 0; n <= 60; n += 7) {
      const auto c = matrix_power(p, n);
      const auto r = repeated(p, n);
      double scale = 0.0;
      for (double v : r.m) scale = std::max(scale, std::fabs(v));
      for (int i = 0; i < 4; ++i) ASSERT_LE(std::fabs(c.m[i] - r.m[i]), 1e-9 * std::max(1.0, scale));
    }
  }
}

TEST(Ladder, Examples) {
  const auto ladder = q_ladder(kBase, 10);
  EXPECT_NEAR(ladder.q[0], 2.0 / 3.0, 1e-15);
  EXPECT_NEAR(ladder.m_lo, 1.0 / 3.0, 1e-15);
  EXPECT_NEAR(ladder.nu_hi, 11.0 / 6.0, 1e-15);
  EXPECT_LT(ladder.max_return_residual, 1e-9);
  for (double beta : {1.1, 1.5, 3.0}) {
    const auto p = TraderParams::from_beta(-0.3, beta);
    EXPECT_NEAR(q_ladder(p, 2).q[0], 1.0 / 1.3, 1e-14);
  }
  // one step of the linear system from (q_1, 0)
  const auto a = system_matrix(kBase);
  const double q1 = ladder.q[0];
  EXPECT_NEAR(a(0, 0) * q1, q1 - 1.0, 1e-15);
  EXPECT_NEAR(a(1, 0) * q1, -1.0, 1e-15);
}

TEST(Ladder, StructuralInvariants) {
  for (double lambda : {-0.9, -0.5, -0.2, -0.05}) {
    for (double beta : {1.05, 1.5, 2.7}) {
      const auto p = TraderParams::from_beta(lambda, beta);
      const auto ladder = q_ladder(p, 40);
      EXPECT_LT(ladder.max_return_residual, 1e-9 * std::pow(beta, 40));
      for (std::size_t k = 0; k < ladder.q.size(); ++k) {
        EXPECT_GT(ladder.chi[k], 0.0);
        const double tq = ladder.chi[k] * ladder.q[k];
        EXPECT_NEAR(tq, beta - lambda * ladder.q[k], 1e-12);
        if (k + 1 < ladder.q.size()) {
          EXPECT_GT(ladder.q[k], ladder.q[k + 1]);
          EXPECT_GE(tq - ladder.chi[k + 1] * ladder.q[k + 1], -1e-12);
          // T(q_k + 0) = 1 - q_k increases toward 1
          const double right_limit = poincare_T(p, ladder.q[k] * (1 + 1e-12), PoincareMode::ClosedForm);
          EXPECT_NEAR(right_limit, 1.0 - ladder.q[k], 1e-9);
        }
      }
      EXPECT_NEAR(ladder.chi.back() * ladder.q.back(), beta, beta * ladder.q.back() + 1e-12);
    }
  }
}

TEST(Ladder, OutsideAnalyzedRegime) {
  EXPECT_THROW(q_ladder(TraderParams::from_beta(0.2, 1.5), 4), Error);
  EXPECT_THROW(q_ladder(TraderParams::from_beta(-0.2, 0.9), 4), Error);
  try {
    q_ladder(TraderParams::from_beta(0.2, 1.5), 4);
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::OutOfAnalyzedRegime);
  }
}

TEST(Poincare, Examples) {
  EXPECT_NEAR(poincare_T(kBase, 1.0, PoincareMode::ClosedForm), 0.5, 1e-15);
  EXPECT_NEAR(poincare_T(kBase, 1.0, PoincareMode::Simulated), 0.5, 1e-15);
  EXPECT_NEAR(poincare_T(kBase, 2.0 / 3.0, PoincareMode::ClosedForm), 11.0 / 6.0, 1e-14);
  EXPECT_NEAR(poincare_T(kBase, 2.0 / 3.0, PoincareMode::Simulated), 11.0 / 6.0, 1e-12);
}

TEST(Poincare, OddReturnMap) {
  SeededUniform rng(5);
  for (int i = 0; i < 1000; ++i) {
    const double x = rng.uniform(0.01, 3.0);
    EXPECT_EQ(first_return(kBase, -x).x, -first_return(kBase, x).x);
    EXPECT_LE(first_return(kBase, x).x, 0.0);
  }
}

TEST(Poincare, ClosedFormMatchesSimulation) {
  SeededUniform rng(6);
  for (int i = 0; i < 10'000; ++i) {
    const auto p = TraderParams::from_beta(rng.uniform(-0.9, -0.05), rng.uniform(1.05, 2.5));
    const double x = rng.uniform(0.02, 3.0);
    ASSERT_NEAR(poincare_T(p, x, PoincareMode::ClosedForm), poincare_T(p, x, PoincareMode::Simulated), 1e-9);
  }
}

TEST(Poincare, SegmentIsInvariant) {
  SeededUniform rng(7);
  const auto ladder = q_ladder(kBase, 2);
  for (int i = 0; i < 100'000; ++i) {
    const double x = rng.uniform(ladder.m_lo, ladder.nu_hi);
    const double y = poincare_T(kBase, x, PoincareMode::ClosedForm);
    ASSERT_GE(y, ladder.m_lo - 1e-12);
    ASSERT_LE(y, ladder.nu_hi + 1e-12);
  }
}

TEST(Poincare, EquilibriumNeverReturns) {
  // (x, 0) with x = 0 is the origin, which returns at once; use beta < 1, where
  // the slant dynamics converge to an equilibrium instead of overflowing
  const auto p = TraderParams::from_alpha(0.25, 0.25);
  try {
    first_return(p, 0.4, 10'000);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NonEscaping);
  }
  EXPECT_THROW(poincare_T(p, 0.4, PoincareMode::ClosedForm), Error);
}

TEST(BuildItm, RotationRegime) {
  const auto p = TraderParams::from_beta(-0.6, 1.5);
  const auto built = build_trader_itm(p);
  EXPECT_EQ(built.regime.n, 1u);
  EXPECT_EQ(built.interior_breakpoints, 1u);
  ASSERT_EQ(built.itm.segment_count(), 2u);
  EXPECT_NEAR(built.itm.breakpoints()[1], std::log(built.ladder.q[0]), 1e-15);
  EXPECT_TRUE(built.ctm.is_rotation());
  EXPECT_EQ(built.ctm.segment_count(), 1u);
}

TEST(BuildItm, DoubleRotationRegime) {
  const auto built = build_trader_itm(TraderParams::from_beta(-0.3, 1.5));
  EXPECT_EQ(built.regime.n, 2u);
  EXPECT_EQ(built.interior_breakpoints, 2u);
  EXPECT_EQ(built.ctm.segment_count(), 2u);
}

TEST(BuildItm, LogConjugacy) {
  for (double lambda : {-0.6, -0.3, -0.1}) {
    const auto p = TraderParams::from_beta(lambda, 1.5);
    const auto built = build_trader_itm(p);
    double x = 0.5 * (built.ladder.m_lo + built.ladder.nu_hi) + 0.0123;
    double y = std::log(x);
    for (int i = 0; i < 10'000; ++i) {
      x = poincare_T(p, x, PoincareMode::ClosedForm);
      y = built.itm.eval(y);
      ASSERT_NEAR(std::exp(y), x, 1e-8 * x) << lambda << " step " << i;
    }
  }
}

TEST(BuildItm, LadderLengthErrors) {
  const auto p = TraderParams::from_beta(-0.3, 1.5);
  try {
    build_trader_itm(p, 2);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LadderTooShort);
  }
  try {
    // beta^k > 1 + (beta - 1)/|lambda| = 11 needs k ~ 2.4e5 rungs
    build_trader_itm(TraderParams::from_beta(-1e-6, 1.00001));
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::LadderTooShort);
  }
  EXPECT_EQ(build_trader_itm(p, 30).interior_breakpoints, 2u);
}

TEST(BuildItm, RegimeMatchesInteriorCount) {
  for (double lambda = -0.9; lambda < -0.05; lambda += 0.043) {
    for (double beta = 1.06; beta < 3.0; beta += 0.097) {
      const auto built = build_trader_itm(TraderParams::from_beta(lambda, beta));
      EXPECT_EQ(built.regime.n, built.interior_breakpoints) << lambda << " " << beta;
    }
  }
}

TEST(Lyapunov, RotationRegimeIsZero) {
  const auto p = TraderParams::from_beta(-0.6, 1.5);
  EXPECT_LT(std::fabs(lyapunov_exponent(p, 1.0, 1'000'000)), 1e-3);
}

TEST(Lyapunov, SlopeSumTelescopes) {
  // sum of ln slopes along an orbit segment is ln(x_end / x_start), so it
  // vanishes over any cycle
  const auto p = TraderParams::from_beta(-0.5, 1.5);
  std::vector<double> cycle;
  double x = 1.1;
  for (int i = 0; i < 7; ++i) {
    cycle.push_back(x);
    x = poincare_T(p, x, PoincareMode::ClosedForm);
  }
  // the log of the product telescopes: sum ln slope = ln(x_end/x_start)
  EXPECT_NEAR(mean_log_slope(p, cycle) * 7.0, std::log(x / 1.1), 1e-12);
}

TEST(Lyapunov, AlternatingOrbitHalvesTheSum) {
  const auto p = TraderParams::from_beta(-0.6, 1.5);
  const auto ladder = q_ladder(p, 2);
  const double above = 0.5 * (ladder.q[0] + ladder.nu_hi);
  const double below = 0.5 * (ladder.q[1] + ladder.q[0]);
  const double expected = 0.5 * (std::log(0.6) + std::log(ladder.chi[0]));
  EXPECT_NEAR(mean_log_slope(p, {above, below, above, below}), expected, 1e-14);
}

TEST(Lyapunov, BreakpointHit) {
  const auto p = TraderParams::from_beta(-0.6, 1.5);
  try {
    lyapunov_exponent(p, q_ladder(p, 2).q[0], 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::BreakpointHit);
  }
}

TEST(StabilityProbe, EndpointIsSemiStable) {
  for (const auto& [lambda, alpha] : {std::pair{0.5, 0.25}, {-0.5, 0.5}, {0.2, 0.5}, {-0.3, -0.2}}) {
    const auto p = TraderParams::from_alpha(lambda, alpha);
    ASSERT_LT(std::fabs(p.beta()), 1.0);
    const auto probe = probe_endpoint(p);
    EXPECT_TRUE(probe.stays_close);
    EXPECT_TRUE(probe.escapes);
    EXPECT_TRUE(probe.semi_stable());
  }
}
