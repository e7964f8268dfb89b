#include "vcm/bd_metrics.h"

#include <cmath>
#include <random>
#include <vector>

#include <gtest/gtest.h>

#include "support.h"
#include "vcm/error.h"

namespace vcm {
namespace {

using vcm::testing::TempDir;

RdCurve Curve(const std::string& codec, std::vector<double> rates, std::vector<double> values,
              GtMode mode = GtMode::kTrueGt, const std::string& metric = "psnr") {
  std::vector<RdPoint> pts;
  const int qps[] = {37, 32, 27, 22, 17, 12, 7};
  for (std::size_t i = 0; i < rates.size(); ++i) pts.push_back({qps[i], rates[i], values[i]});
  return RdCurve(codec, metric, mode, pts);
}

std::vector<RdPoint> Points(const RdCurve& c) { return c.points(); }

// Random monotone 4-point curve with rates spanning about a decade.
RdCurve RandomCurve(std::mt19937& rng, const std::string& codec) {
  std::uniform_real_distribution<double> base(0.01, 2.0);
  std::uniform_real_distribution<double> ratio(1.3, 2.5);
  std::uniform_real_distribution<double> start(0.2, 0.5);
  std::uniform_real_distribution<double> step(0.01, 0.1);
  std::vector<double> rates{base(rng)}, values{start(rng)};
  for (int i = 1; i < 4; ++i) {
    rates.push_back(rates.back() * ratio(rng));
    values.push_back(values.back() + step(rng));
  }
  return Curve(codec, rates, values);
}

TEST(RdCurveTest, SortsByRateAndValidates) {
  RdCurve c = Curve("a", {4, 1, 2}, {3, 1, 2});
  EXPECT_EQ(c.points().front().rate, 1.0);
  EXPECT_THROW(Curve("a", {1}, {1}), InputError);
  EXPECT_THROW(Curve("a", {1, 0}, {1, 2}), InputError);
  EXPECT_THROW(Curve("a", {1, -2}, {1, 2}), InputError);
}

TEST(BdRateTest, IdenticalCurvesGiveZero) {
  RdCurve a = Curve("a", {100, 200, 400, 800}, {30, 33, 35.5, 37.5});
  RdCurve b = Curve("b", {100, 200, 400, 800}, {30, 33, 35.5, 37.5});
  EXPECT_NEAR(BdRate(a, b).bd_rate_percent, 0.0, 1e-9);
  BdOptions pchip;
  pchip.fit = FitKind::kPchip;
  EXPECT_NEAR(BdRate(a, b, pchip).bd_rate_percent, 0.0, 1e-9);
}

TEST(BdRateTest, DoubledRateGivesPlusHundred) {
  RdCurve a = Curve("a", {100, 200, 400, 800}, {30, 33, 35.5, 37.5});
  RdCurve b = Curve("b", {200, 400, 800, 1600}, {30, 33, 35.5, 37.5});
  BdResult r = BdRate(a, b);
  EXPECT_EQ(r.fit_kind, FitKind::kCubicPoly);
  EXPECT_NEAR(r.bd_rate_percent, 100.0, 1e-9);
  EXPECT_NEAR(BdRate(b, a).bd_rate_percent, -50.0, 1e-9);
}

TEST(BdRateTest, AntiSymmetryOnRandomCurves) {
  std::mt19937 rng(50);
  for (int i = 0; i < 50; ++i) {
    RdCurve a = RandomCurve(rng, "a");
    RdCurve b = RandomCurve(rng, "b");
    double ab = 0, ba = 0;
    try {
      ab = BdRate(a, b).bd_rate_percent;
      ba = BdRate(b, a).bd_rate_percent;
    } catch (const UndefinedMetricError&) {
      continue;
    }
    ASSERT_NEAR((1 + ab / 100) * (1 + ba / 100), 1.0, 1e-9) << "curve pair " << i;
  }
}

TEST(BdRateTest, CubicMatchesTrapezoidOracle) {
  std::mt19937 rng(51);
  int checked = 0;
  while (checked < 20) {
    RdCurve a = RandomCurve(rng, "a");
    RdCurve b = RandomCurve(rng, "b");
    BdResult r;
    try {
      r = BdRate(a, b);
    } catch (const UndefinedMetricError&) {
      continue;
    }
    ++checked;
    const double want = oracle::TrapezoidBdRate(Points(a), Points(b));
    ASSERT_NEAR(r.bd_rate_percent, want, 1e-6 * std::max(1.0, std::abs(want)));
  }
}

TEST(BdRateTest, MatchesClassicPolyfitScript) {
  // Reference values from numpy polyfit/polyint and scipy PchipInterpolator.
  RdCurve a = Curve("a", {100, 200, 400, 800}, {30, 33, 35.5, 37.5});
  RdCurve b = Curve("b", {90, 170, 330, 650}, {30.2, 33.1, 35.7, 37.8});
  EXPECT_NEAR(BdRate(a, b).bd_rate_percent, -19.233457942960573, 1e-9);
  BdOptions pchip;
  pchip.fit = FitKind::kPchip;
  EXPECT_NEAR(BdRate(a, b, pchip).bd_rate_percent, -19.232788840724425, 1e-9);
}

TEST(BdRateTest, FivePointCurvesDefaultToPchip) {
  RdCurve a = Curve("a", {50, 100, 200, 400, 800}, {0.41, 0.5, 0.56, 0.6, 0.62});
  RdCurve b = Curve("b", {45, 95, 180, 350, 700}, {0.40, 0.51, 0.565, 0.605, 0.63});
  BdResult r = BdRate(a, b);
  EXPECT_EQ(r.fit_kind, FitKind::kPchip);
  EXPECT_NEAR(r.bd_rate_percent, -14.656122801824178, 1e-9);
}

TEST(BdRateTest, MismatchedCurvesAndEmptyOverlap) {
  RdCurve a = Curve("a", {1, 2, 4, 8}, {1, 2, 3, 4});
  RdCurve p = Curve("b", {1, 2, 4, 8}, {1, 2, 3, 4}, GtMode::kPseudoGt);
  EXPECT_THROW(BdRate(a, p), InputError);
  RdCurve far = Curve("b", {1, 2, 4, 8}, {5, 6, 7, 8});
  EXPECT_THROW(BdRate(a, far), UndefinedMetricError);
}

TEST(InterpolantTest, CubicThroughFourPointsIsTheLagrangePolynomial) {
  const std::vector<double> v = {0.31, 0.42, 0.47, 0.55};
  const std::vector<double> lr = {-1.2, -0.7, -0.45, 0.1};
  const auto f = LogRateInterpolant::FitCubic(v, lr);
  for (double x = 0.31; x <= 0.55; x += 0.01) {
    ASSERT_NEAR(f.Evaluate(x), oracle::LagrangeEval(v, lr, x), 1e-10);
  }
  // Coefficients in the normalized variable reproduce the same polynomial.
  const auto& c = f.coefficients();
  const double t = (0.5 - f.center()) / f.scale();
  EXPECT_NEAR(c[0] + c[1] * t + c[2] * t * t + c[3] * t * t * t,
              oracle::LagrangeEval(v, lr, 0.5), 1e-10);
}

TEST(InterpolantTest, PchipMatchesScipy) {
  const std::vector<double> x = {1, 2, 4, 5, 9};
  const std::vector<double> y = {0, 1, 1.5, 1.2, 3};
  const auto f = LogRateInterpolant::FitPchip(x, y);
  EXPECT_NEAR(f.Evaluate(1.5), 0.6026785714285714, 1e-12);
  EXPECT_NEAR(f.Evaluate(3), 1.3571428571428572, 1e-12);
  EXPECT_NEAR(f.Evaluate(4.5), 1.35, 1e-12);
  EXPECT_NEAR(f.Evaluate(7), 1.575, 1e-12);
  EXPECT_NEAR(f.Evaluate(9), 3.0, 1e-12);
  EXPECT_NEAR(f.Integrate(1.3, 8.7), 10.650649043898806, 1e-12);

  const std::vector<double> v = {0.41, 0.5, 0.56, 0.6, 0.62};
  std::vector<double> lr;
  for (double r : {50.0, 100.0, 200.0, 400.0, 800.0}) lr.push_back(std::log10(r));
  const auto g = LogRateInterpolant::FitPchip(v, lr);
  EXPECT_NEAR(g.Evaluate(0.45), 1.8132303793631883, 1e-12);
  EXPECT_NEAR(g.Evaluate(0.53), 2.1352600994030726, 1e-12);
  EXPECT_NEAR(g.Evaluate(0.58), 2.429953444950426, 1e-12);
  EXPECT_NEAR(g.Evaluate(0.615), 2.8164353187689586, 1e-12);
}

TEST(InterpolantTest, PchipIntegralMatchesQuadrature) {
  const std::vector<double> x = {0.1, 0.3, 0.35, 0.6};
  const std::vector<double> y = {1, 2, 2.2, 4};
  const auto f = LogRateInterpolant::FitPchip(x, y);
  const int n = 200000;
  const double lo = 0.12, hi = 0.58, h = (hi - lo) / n;
  double sum = 0;
  for (int i = 0; i <= n; ++i) sum += (i == 0 || i == n ? 0.5 : 1.0) * f.Evaluate(lo + h * i);
  EXPECT_NEAR(f.Integrate(lo, hi), sum * h, 1e-9);
}

TEST(InterpolantTest, RejectsDuplicatesAndShortInput) {
  const std::vector<double> dup = {1, 2, 2, 3};
  const std::vector<double> lr = {0, 1, 2, 3};
  EXPECT_THROW(LogRateInterpolant::FitCubic(dup, lr), InputError);
  const std::vector<double> three = {1, 2, 3};
  const std::vector<double> lr3 = {0, 1, 2};
  EXPECT_THROW(LogRateInterpolant::FitCubic(three, lr3), InputError);
  EXPECT_NO_THROW(LogRateInterpolant::FitPchip(three, lr3));
}

TEST(MonotonicityTest, StrictRejectsAndPruneDropsFromLowRateEnd) {
  // Values by rate: 0.5, 0.6, 0.58, 0.7. Walking down from the top keeps
  // 0.7 and 0.58, then drops 0.6.
  RdCurve c = Curve("a", {1, 2, 4, 8}, {0.5, 0.6, 0.58, 0.7});
  EXPECT_THROW(EnforceMonotonicity(c, MonotonicityPolicy::kStrict), InputError);
  std::vector<std::string> warnings;
  RdCurve pruned = EnforceMonotonicity(c, MonotonicityPolicy::kPrune, &warnings);
  ASSERT_EQ(pruned.size(), 3u);
  EXPECT_EQ(pruned.points()[0].value, 0.5);
  EXPECT_EQ(pruned.points()[1].value, 0.58);
  EXPECT_EQ(pruned.points()[2].value, 0.7);
  ASSERT_EQ(warnings.size(), 1u);
  EXPECT_NE(warnings[0].find("qp 32"), std::string::npos);
}

TEST(MonotonicityTest, PruningFallsBackToPchip) {
  RdCurve a = Curve("a", {1, 2, 4, 8}, {0.5, 0.6, 0.58, 0.7});
  RdCurve b = Curve("b", {1, 2, 4, 8}, {0.52, 0.6, 0.65, 0.71});
  EXPECT_THROW(BdRate(a, b), InputError);
  BdOptions prune;
  prune.monotonicity = MonotonicityPolicy::kPrune;
  BdResult r = BdRate(a, b, prune);
  EXPECT_EQ(r.fit_kind, FitKind::kPchip);
  EXPECT_GE(r.warnings.size(), 2u);
}

TEST(MonotonicityTest, DecreasingCurvesAreAccepted) {
  // Lower-is-better metrics run the other way; still strictly monotone.
  RdCurve c = Curve("a", {1, 2, 4, 8}, {9, 7, 4, 1});
  EXPECT_EQ(EnforceMonotonicity(c, MonotonicityPolicy::kStrict).size(), 4u);
}

TEST(CurveCsvTest, RoundTripIsLosslessAndBdrIdentical) {
  std::mt19937 rng(3);
  TempDir tmp;
  for (int i = 0; i < 10; ++i) {
    RdCurve a = RandomCurve(rng, "a");
    RdCurve b = RandomCurve(rng, "b");
    testing::WriteText(tmp.path() / "a.csv", CurveToCsv(a));
    testing::WriteText(tmp.path() / "b.csv", CurveToCsv(b));
    RdCurve a2 = ReadCurveCsv(tmp.path() / "a.csv", "a", "psnr", GtMode::kTrueGt);
    RdCurve b2 = ReadCurveCsv(tmp.path() / "b.csv", "b", "psnr", GtMode::kTrueGt);
    ASSERT_EQ(a2.points(), a.points());
    double want = 0;
    try {
      want = BdRate(a, b).bd_rate_percent;
    } catch (const UndefinedMetricError&) {
      continue;
    }
    ASSERT_EQ(BdRate(a2, b2).bd_rate_percent, want);
  }
}

TEST(CurveCsvTest, RejectsMalformedText) {
  EXPECT_THROW(ParseCurveCsv("rate,value\n1,2\n", "a", "m", GtMode::kTrueGt), InputError);
  EXPECT_THROW(ParseCurveCsv("qp,rate,value\n1,2\n", "a", "m", GtMode::kTrueGt), InputError);
  EXPECT_THROW(ParseCurveCsv("qp,rate,value\n1,x,3\n2,3,4\n", "a", "m", GtMode::kTrueGt),
               InputError);
  EXPECT_THROW(ReadCurveCsv("/nonexistent/curve.csv", "a", "m", GtMode::kTrueGt), Error);
}

TEST(BdDiffTest, TrueMinusPseudo) {
  EXPECT_DOUBLE_EQ(BdDiff(-7.48, -12.34), -7.48 + 12.34);
  BdResult t, p;
  t.bd_rate_percent = 3;
  p.bd_rate_percent = 5;
  EXPECT_EQ(BdDiff(t, p), -2.0);
}

}  // namespace
}  // namespace vcm
