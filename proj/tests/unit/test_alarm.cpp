#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "balarm/alarm.hpp"
#include "balarm/error.hpp"
#include "balarm/rng.hpp"

using namespace balarm;

namespace {

const ModelSpec kAlarm1{1, 1, 0, 288};

double mean_of(const std::vector<std::uint8_t>& x) {
  double s = 0.0;
  for (auto v : x) s += v;
  return s / static_cast<double>(x.size());
}

double lag1_autocorr(const std::vector<std::uint8_t>& x) {
  const double m = mean_of(x);
  double num = 0.0, den = 0.0;
  for (std::size_t l = 0; l < x.size(); ++l) {
    den += (x[l] - m) * (x[l] - m);
    if (l > 0) num += (x[l] - m) * (x[l - 1] - m);
  }
  return num / den;
}

}  // namespace

TEST(Alarm1Stationary, HighPrecisionValues) {
  // 40-digit evaluations of the closed form.
  struct Case { double b, c, p, rho; };
  const Case cases[] = {{2.89, -1, 0.6720412377024022, 0.5998141091914815},
                        {4.48, -4, 0.04493874869188993, 0.5997616648071574},
                        {5.43, -5, 0.01669793067952701, 0.5991808175074757},
                        {6.42, -6, 0.006197215570515344, 0.6010106267080915}};
  for (const auto& k : cases) {
    const auto s = alarm1_stationary(k.b, k.c);
    EXPECT_NEAR(s.marginal_p, k.p, 1e-14);
    EXPECT_NEAR(s.lag1_rho, k.rho, 1e-14);
  }
  const auto fair = alarm1_stationary(0, 0);
  EXPECT_DOUBLE_EQ(fair.marginal_p, 0.5);
  EXPECT_DOUBLE_EQ(fair.lag1_rho, 0.0);
}

TEST(Alarm1Stationary, BalanceAndSign) {
  std::mt19937_64 gen(11);
  std::uniform_real_distribution<double> u(-10, 10);
  for (int rep = 0; rep < 1000; ++rep) {
    const double b = u(gen), c = u(gen);
    const auto s = alarm1_stationary(b, c);
    const double p01 = inv_logit(c), p11 = inv_logit(b + c);
    EXPECT_NEAR(s.marginal_p, s.marginal_p * p11 + (1 - s.marginal_p) * p01, 1e-14);
    EXPECT_EQ(std::signbit(s.lag1_rho), std::signbit(b)) << b << " " << c;
    EXPECT_GE(s.marginal_p, 0.0);
    EXPECT_LE(s.marginal_p, 1.0);
    EXPECT_LE(std::abs(s.lag1_rho), 1.0);
  }
}

TEST(CycloCurves, MatchesExactFixedPoint) {
  // Exact solution of the cyclic affine recursion, 40-digit arithmetic.
  const ModelSpec spec{1, 1, 1, 4};
  const ClusterParams params{{0.5, -0.3}, {1.2}, -0.7};
  const auto curves = cyclo_curves(params, spec);
  const std::vector<double> p{0.59113123945123622, 0.43498579793952547, 0.34827968371784087,
                              0.50184749913995235};
  const std::vector<double> rho{0.28567575251148977, 0.27855243564736167, 0.27941961864673541,
                                0.27505369891630564};
  for (int l = 0; l < 4; ++l) {
    EXPECT_NEAR(curves.p_curve[l], p[l], 1e-12);
    EXPECT_NEAR(curves.rho_curve[l], rho[l], 1e-12);
  }
}

TEST(CycloCurves, ConstantWithoutHarmonics) {
  const auto curves = cyclo_curves({{}, {2.89}, -1.0}, kAlarm1);
  const auto s = alarm1_stationary(2.89, -1.0);
  ASSERT_EQ(curves.p_curve.size(), 288u);
  for (std::size_t l = 0; l < 288; ++l) {
    EXPECT_NEAR(curves.p_curve[l], s.marginal_p, 1e-12);
    EXPECT_NEAR(curves.rho_curve[l], s.lag1_rho, 1e-12);
  }
  const auto zero = cyclo_curves(ClusterParams::zeros(kAlarm1), kAlarm1);
  for (std::size_t l = 0; l < 288; ++l) {
    EXPECT_NEAR(zero.p_curve[l], 0.5, 1e-15);
    EXPECT_NEAR(zero.rho_curve[l], 0.0, 1e-15);
  }
}

TEST(CycloCurves, IndependentOfStartingValue) {
  const ModelSpec spec{1, 1, 3, 288};
  const ClusterParams params{{0.8, 0.5, -0.3, 0.2, 0.1, -0.1}, {2.5}, -3.0};
  const auto a = cyclo_curves(params, spec, 0.5);
  const auto b = cyclo_curves(params, spec, 0.01);
  for (std::size_t l = 0; l < 288; ++l) {
    EXPECT_NEAR(a.p_curve[l], b.p_curve[l], 1e-10);
    EXPECT_GT(a.p_curve[l], 0.0);
    EXPECT_LT(a.p_curve[l], 1.0);
  }
}

TEST(CycloCurves, RequiresFirstOrder) {
  EXPECT_THROW(cyclo_curves(ClusterParams::zeros({1, 2, 0, 10}), {1, 2, 0, 10}), ValidationError);
}

TEST(SimulateAlarm, SaturatedIntercept) {
  const ModelSpec k0{1, 1, 0, 288};
  const std::vector<std::uint8_t> init{0};
  const auto x = simulate_alarm({{}, {0.0}, 50.0}, k0, 100, 5, init);
  EXPECT_EQ(x[0], 0);
  for (std::size_t l = 1; l < x.size(); ++l) EXPECT_EQ(x[l], 1);
}

TEST(SimulateAlarm, Deterministic) {
  const std::vector<std::uint8_t> init{1};
  const ClusterParams a{{}, {2.89}, -1.0};
  EXPECT_EQ(simulate_alarm(a, kAlarm1, 500, 42, init), simulate_alarm(a, kAlarm1, 500, 42, init));
  EXPECT_NE(simulate_alarm(a, kAlarm1, 500, 42, init), simulate_alarm(a, kAlarm1, 500, 43, init));
}

TEST(SimulateAlarm, MarginalMatchesClosedForm) {
  const std::vector<std::uint8_t> init{1};
  const auto x = simulate_alarm({{}, {2.89}, -1.0}, kAlarm1, 100000, 9, init);
  EXPECT_NEAR(mean_of(x), alarm1_stationary(2.89, -1.0).marginal_p, 0.01);
  EXPECT_NEAR(lag1_autocorr(x), 0.6, 0.02);
}

TEST(SimulateAlarm, NoLagEffectGivesIndependentDraws) {
  const std::vector<std::uint8_t> init{0};
  const auto x = simulate_alarm({{}, {0.0}, -0.8}, kAlarm1, 100000, 10, init);
  EXPECT_NEAR(lag1_autocorr(x), 0.0, 0.01);
  EXPECT_NEAR(mean_of(x), inv_logit(-0.8), 0.01);
}

TEST(SimulateBalarm, SingleClusterLabels) {
  const BalarmModel m{kAlarm1, {1.0}, {{{}, {2.89}, -1.0}}};
  const auto s = simulate_balarm(m, 20, 50, 1);
  for (int z : s.labels) EXPECT_EQ(z, 0);
  EXPECT_EQ(s.panel.n_edges(), 20u);
  EXPECT_EQ(s.panel.length(), 50u);
}

TEST(SimulateBalarm, ZeroWeightClusterNeverDrawn) {
  const ModelSpec spec{2, 1, 0, 288};
  const BalarmModel m{spec, {1.0, 0.0}, {{{}, {0.0}, 50.0}, {{}, {0.0}, -50.0}}};
  const auto s = simulate_balarm(m, 50, 30, 4);
  for (int z : s.labels) EXPECT_EQ(z, 0);
  for (std::size_t i = 0; i < 50; ++i)
    for (std::size_t l = 0; l < 30; ++l) EXPECT_EQ(s.panel.value(i, l), 1);
}

TEST(SimulateBalarm, LabelProportions) {
  const ModelSpec spec{2, 1, 0, 288};
  const BalarmModel m{spec, {0.5, 0.5}, {{{}, {2.89}, -1.0}, {{}, {4.48}, -4.0}}};
  const auto s = simulate_balarm(m, 600, 20, 123);
  double ones = 0;
  for (int z : s.labels) ones += z;
  EXPECT_NEAR(ones / 600.0, 0.5, 3 * std::sqrt(0.25 / 600));
}

TEST(SimulateBalarm, IndependentOfThreadCount) {
  const ModelSpec spec{2, 1, 2, 48};
  const BalarmModel m{spec, {0.3, 0.7}, {{{0.4, 0.1, 0, 0.2}, {2.0}, -2.0}, {{-0.3, 0.2, 0.1, 0}, {1.0}, -1.0}}};
  SimulationOptions one, many;
  many.threads = 4;
  const auto a = simulate_balarm(m, 40, 100, 77, one);
  const auto b = simulate_balarm(m, 40, 100, 77, many);
  EXPECT_EQ(a.labels, b.labels);
  EXPECT_TRUE(std::equal(a.panel.values().begin(), a.panel.values().end(), b.panel.values().begin()));
}

TEST(Rng, DerivedSeedsDiffer) {
  EXPECT_NE(derive_seed(1, {1, 0}), derive_seed(1, {1, 1}));
  EXPECT_NE(derive_seed(1, {0, 1}), derive_seed(1, {1, 0}));
  EXPECT_EQ(derive_seed(9, {3, 4}), derive_seed(9, {3, 4}));
}

TEST(Rng, GeometricMean) {
  Rng rng(5);
  double s = 0;
  const int n = 200000;
  for (int i = 0; i < n; ++i) s += static_cast<double>(rng.geometric(0.2));
  EXPECT_NEAR(s / n, 5.0, 0.05);
}
