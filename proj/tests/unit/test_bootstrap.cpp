#include <gtest/gtest.h>

#include <algorithm>

#include "balarm/alarm.hpp"
#include "balarm/bootstrap.hpp"
#include "balarm/error.hpp"

using namespace balarm;

namespace {

BalarmModel model_ab() {
  const ModelSpec spec{2, 1, 0, 288};
  return {spec, {0.5, 0.5}, {{{}, {2.89}, -1.0}, {{}, {4.48}, -4.0}}};
}

}  // namespace

TEST(QuantileType7, KnownValues) {
  const std::vector<double> x{1, 2, 3, 4, 5};
  EXPECT_DOUBLE_EQ(quantile_type7(x, 0.0), 1.0);
  EXPECT_DOUBLE_EQ(quantile_type7(x, 1.0), 5.0);
  EXPECT_DOUBLE_EQ(quantile_type7(x, 0.5), 3.0);
  EXPECT_DOUBLE_EQ(quantile_type7(x, 0.1), 1.4);
  const std::vector<double> y{10, 20};
  EXPECT_DOUBLE_EQ(quantile_type7(y, 0.025), 10.25);
  const std::vector<double> one{7};
  EXPECT_DOUBLE_EQ(quantile_type7(one, 0.975), 7.0);
}

TEST(Bootstrap, SingleReplicateCollapses) {
  BootstrapOptions opt;
  opt.n_edges = 40;
  opt.length = 200;
  opt.replicates = 1;
  const auto bands = parametric_bootstrap(model_ab(), opt);
  ASSERT_EQ(bands.clusters.size(), 2u);
  EXPECT_EQ(bands.replicate_parameters.rows(), 1);
  EXPECT_EQ(bands.replicate_parameters.cols(), 1 + 2 * 2);
  for (const auto& c : bands.clusters) {
    EXPECT_EQ(c.p_lo, c.p_med);
    EXPECT_EQ(c.p_hi, c.p_med);
    EXPECT_EQ(c.rho_lo, c.rho_hi);
  }
}

TEST(Bootstrap, BandsOrderedAndThreadInvariant) {
  BootstrapOptions opt;
  opt.n_edges = 60;
  opt.length = 300;
  opt.replicates = 12;
  opt.seed = 5;
  const auto a = parametric_bootstrap(model_ab(), opt);
  opt.threads = 4;
  const auto b = parametric_bootstrap(model_ab(), opt);
  EXPECT_EQ(a.replicate_parameters, b.replicate_parameters);
  EXPECT_EQ(a.n_failed, 0);
  for (std::size_t g = 0; g < 2; ++g) {
    const auto& c = a.clusters[g];
    ASSERT_EQ(c.p_med.size(), 288u);
    for (std::size_t l = 0; l < 288; ++l) {
      EXPECT_LE(c.p_lo[l], c.p_med[l]);
      EXPECT_LE(c.p_med[l], c.p_hi[l]);
      EXPECT_LE(c.rho_lo[l], c.rho_hi[l]);
    }
    EXPECT_EQ(c.p_lo, b.clusters[g].p_lo);
  }
  EXPECT_TRUE(a.clusters[0].rho_reported);
  EXPECT_TRUE(a.clusters[1].rho_reported);
}

TEST(Bootstrap, MedianNearTruth) {
  BootstrapOptions opt;
  opt.n_edges = 600;
  opt.length = 1200;
  opt.replicates = 50;
  const auto bands = parametric_bootstrap(model_ab(), opt);
  for (double p : bands.clusters[0].p_med) EXPECT_NEAR(p, 0.672, 0.02);
}

TEST(Bootstrap, RhoReportingThreshold) {
  const ModelSpec spec{2, 1, 0, 288};
  const BalarmModel m{spec, {0.5, 0.5}, {{{}, {2.89}, -1.0}, {{}, {6.42}, -6.0}}};
  BootstrapOptions opt;
  opt.n_edges = 60;
  opt.length = 300;
  opt.replicates = 3;
  const auto bands = parametric_bootstrap(m, opt);
  EXPECT_TRUE(bands.clusters[0].rho_reported);
  EXPECT_FALSE(bands.clusters[1].rho_reported);
}

TEST(Bootstrap, Preconditions) {
  BootstrapOptions opt;
  opt.n_edges = 10;
  opt.length = 50;
  opt.replicates = 0;
  EXPECT_THROW(parametric_bootstrap(model_ab(), opt), ValidationError);
  opt.replicates = 2;
  auto k2 = model_ab();
  k2.spec.ar_order = 2;
  for (auto& c : k2.clusters) c.ar.push_back(0.0);
  EXPECT_THROW(parametric_bootstrap(k2, opt), ValidationError);
}
