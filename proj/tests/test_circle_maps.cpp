#include <gtest/gtest.h>

#include <cmath>
#include <set>

#include "itmlab/circle_maps.hpp"
#include "itmlab/trader.hpp"
#include "test_maps.hpp"

using namespace itmlab;
using namespace itmlab::testmaps;

namespace {

// oracle: scan n = 1..50 of the double inequality
std::size_t scan_regime(double lambda, double beta) {
  for (std::size_t n = 1; n <= 50; ++n) {
    const double lower = -lambda * (std::pow(beta, n) - 1.0) / (beta - 1.0);
    const double upper = -lambda * (std::pow(beta, n + 1) - 1.0) / (beta - 1.0);
    if (lower <= 1.0 && 1.0 < upper) return n;
  }
  return 0;
}

}  // namespace

TEST(Ctm, EvalExamples) {
  auto one = Ctm<double>::make(1.0, {0.0, 1.0}, {0.25});
  EXPECT_NEAR(one.eval(0.9), 0.15, 1e-15);
  auto still = Ctm<double>::make(1.0, {0.0, 1.0}, {0.0});
  EXPECT_EQ(still.eval(0.42), 0.42);
  auto two = Ctm<double>::make(2.0, {0.0, 1.0, 2.0}, {0.5, 1.5});
  EXPECT_NEAR(two.eval(1.8), 1.3, 1e-15);
  EXPECT_THROW(two.eval(2.0), Error);
}

TEST(Ctm, ExactWraparound) {
  auto c = Ctm<Rational>::make(R(1), {R(0), R(1)}, {R(3, 4)});
  EXPECT_EQ(c.eval(R(1, 2)), R(1, 4));
  auto neg = Ctm<Rational>::make(R(2), {R(0), R(2)}, {R(-1, 2)});
  EXPECT_EQ(neg.offsets()[0], R(3, 2));
}

TEST(RotationNumber, Examples) {
  auto third = Ctm<Rational>::make(R(1), {R(0), R(1)}, {R(1, 3)});
  auto rho = rotation_number(third, R(0), 300);
  EXPECT_EQ(rho.value, R(1, 3));
  EXPECT_NEAR(rho.orbit_estimate, 1.0 / 3.0, 1.0 / 300);
  auto half = Ctm<Rational>::make(R(2), {R(0), R(2)}, {R(1)});
  EXPECT_EQ(rotation_number(half, R(0), 10).value, R(1, 2));
}

TEST(RotationNumber, RejectsGenuineMultiBranchMaps) {
  auto two = Ctm<double>::make(2.0, {0.0, 1.0, 2.0}, {0.5, 1.5});
  try {
    rotation_number(two, 0.0, 10);
    FAIL();
  } catch (const Error& e) {
    EXPECT_EQ(e.code(), ErrorCode::NotARotation);
  }
  // split branches with equal offsets are still a rotation
  auto split = Ctm<double>::make(1.0, {0.0, 0.3, 1.0}, {0.2, 0.2});
  EXPECT_NEAR(rotation_number(split, 0.0, 1000).value, 0.2, 1e-15);
}

TEST(RotationNumber, RationalOrbitsArePeriodic) {
  for (long long q : {3, 5, 7, 12}) {
    for (long long p = 1; p < q; ++p) {
      const Rational d(p, q);
      const long long period = static_cast<long long>(denominator(d));
      auto c = Ctm<Rational>::make(R(1), {R(0), R(1)}, {d});
      Rational y = R(2, 9);
      for (long long i = 0; i < period; ++i) {
        y = c.eval(y);
        if (i + 1 < period) ASSERT_NE(y, R(2, 9));
      }
      EXPECT_EQ(y, R(2, 9));
    }
  }
}

TEST(RotationNumber, TraderRotationOrbitEstimate) {
  const auto p = trader::TraderParams::from_beta(-0.6, 1.5);
  const auto built = trader::build_trader_itm(p);
  ASSERT_TRUE(built.ctm.is_rotation());
  const auto rho = rotation_number(built.ctm, 0.0, 1'000'000);
  EXPECT_NEAR(rho.orbit_estimate, rho.value, 1e-6);
  // long-orbit winding count of T itself, in log coordinates
  const double theta = std::log(built.ladder.nu_hi / built.ladder.m_lo);
  double x = 1.0, lift = 0.0;
  const std::size_t n = 1'000'000;
  for (std::size_t i = 0; i < n; ++i) {
    const double next = trader::poincare_T(p, x, trader::PoincareMode::ClosedForm);
    double step = std::log(next / x);
    if (step < 0) step += theta;
    lift += step;
    x = next;
  }
  EXPECT_NEAR(lift / (n * theta), rho.value, 1e-6);
}

TEST(ClassifyRegime, Examples) {
  EXPECT_EQ(classify_regime(-0.6, 1.5).n, 1u);
  EXPECT_EQ(classify_regime(-0.3, 1.5).n, 2u);
  EXPECT_EQ(classify_regime(-0.05, 1.1).n, 11u);  // oracle scan below
  EXPECT_EQ(scan_regime(-0.05, 1.1), 11u);
}

TEST(ClassifyRegime, BoundsBracketOneAndMatchScan) {
  for (double lambda = -0.95; lambda < -0.01; lambda += 0.0137) {
    for (double beta = 1.03; beta < 3.0; beta += 0.091) {
      const auto r = classify_regime(lambda, beta);
      EXPECT_TRUE(r.lower_holds && r.upper_holds);
      EXPECT_EQ(r.n, scan_regime(lambda, beta)) << lambda << " " << beta;
    }
  }
}

TEST(ClassifyRegime, NonIncreasingInAbsLambda) {
  for (double beta : {1.1, 1.5, 2.5}) {
    std::size_t prev = 1000;
    for (double lambda = -0.02; lambda > -0.99; lambda -= 0.01) {
      const auto n = classify_regime(lambda, beta).n;
      EXPECT_LE(n, prev);
      prev = n;
    }
  }
}

TEST(ClassifyRegime, EqualityOnTheRightGoesToLargerN) {
  // -lambda (beta + 1) == 1 exactly: beta = 1.5, lambda = -0.4
  EXPECT_EQ(classify_regime(-0.4, 1.5).n, 2u);
}

TEST(ClassifyRegime, OutOfRange) {
  EXPECT_THROW(classify_regime(0.1, 1.5), Error);
  EXPECT_THROW(classify_regime(-0.5, 1.0), Error);
}

TEST(ItmToCtm, Examples) {
  auto one = itm_to_ctm(Itm<double>::make({0.0, 0.7, 1.0}, {0.3, -0.7}));
  ASSERT_EQ(one.segment_count(), 1u);
  EXPECT_NEAR(one.offsets()[0], 0.3, 1e-15);
  EXPECT_EQ(one.circumference(), 1.0);
  auto id = itm_to_ctm(identity());
  ASSERT_EQ(id.segment_count(), 1u);
  EXPECT_EQ(id.offsets()[0], R(0));
  auto shifted = itm_to_ctm(Itm<Rational>::make({R(2), R(3), R(4)}, {R(1), R(-1, 2)}));
  EXPECT_EQ(shifted.circumference(), R(2));
  ASSERT_EQ(shifted.segment_count(), 2u);
  EXPECT_EQ(shifted.breakpoints()[1], R(1));
  EXPECT_EQ(shifted.offsets()[1], R(3, 2));
  // offsets 1 and -1 agree mod 2 and fuse
  EXPECT_EQ(itm_to_ctm(Itm<Rational>::make({R(2), R(3), R(4)}, {R(1), R(-1)})).segment_count(), 1u);
}

TEST(ItmToCtm, TraderDoubleRotation) {
  const auto built = trader::build_trader_itm(trader::TraderParams::from_beta(-0.3, 1.5));
  EXPECT_EQ(built.regime.n, 2u);
  EXPECT_EQ(built.ctm.segment_count(), 2u);
  EXPECT_FALSE(built.ctm.is_rotation());
}

TEST(ItmToCtm, ConjugacyFidelity) {
  const auto built = trader::build_trader_itm(trader::TraderParams::from_beta(-0.3, 1.5));
  const double a = built.itm.domain_lo();
  const double L = built.ctm.circumference();
  double y = a + 0.123, z = 0.123;
  for (int i = 0; i < 10'000; ++i) {
    y = built.itm.eval(y);
    z = built.ctm.eval(z);
    double diff = std::fabs(y - a - z);
    diff = std::min(diff, L - diff);
    ASSERT_LT(diff, 1e-8) << i;
  }
}

TEST(ThreeDistance, IrrationalRotationGaps) {
  for (std::size_t N : {10u, 37u, 200u}) {
    std::vector<double> pts;
    double x = 0.0;
    for (std::size_t i = 0; i < N; ++i) {
      pts.push_back(x);
      x = std::fmod(x + kGolden, 1.0);
    }
    std::sort(pts.begin(), pts.end());
    std::vector<double> gaps;
    for (std::size_t i = 1; i < N; ++i) gaps.push_back(pts[i] - pts[i - 1]);
    gaps.push_back(1.0 - pts.back() + pts.front());
    std::sort(gaps.begin(), gaps.end());
    std::size_t distinct = 1;
    for (std::size_t i = 1; i < gaps.size(); ++i) distinct += gaps[i] - gaps[i - 1] > 1e-9 ? 1 : 0;
    EXPECT_LE(distinct, 3u);
  }
}
