#include <gtest/gtest.h>

#include <cmath>

#include "balarm/alarm.hpp"
#include "balarm/em.hpp"
#include "balarm/rng.hpp"
#include "balarm/selection.hpp"

using namespace balarm;

TEST(FreeParameters, Examples) {
  EXPECT_EQ(free_parameters({1, 0, 0, 288}), 1);
  EXPECT_EQ(free_parameters({6, 1, 3, 288}), 53);
  EXPECT_EQ(free_parameters({2, 1, 0, 288}), 5);
}

TEST(Bic, Formula) {
  EXPECT_DOUBLE_EQ(bic(-100.0, 3, 1000), 200.0 + 3 * std::log(1000.0));
  EXPECT_NEAR(bic(-50.0, 4, 777) - bic(-50.0, 3, 777), std::log(777.0), 1e-12);
  EXPECT_GT(bic(-50.0, 4, 777), bic(-50.0, 3, 777));
}

TEST(Bic, ObservationCount) {
  const auto panel = EdgePanel::from_series({{0, 1, 1, 0, 1}, {1, 1, 0, 0, 0}, {0, 0, 0, 1, 1}});
  EXPECT_EQ(bic_observations(panel, {1, 1, 0, 288}), 12u);
  EXPECT_EQ(bic_observations(panel, {1, 3, 0, 288}), 6u);
}

TEST(Bic, InvariantToRelabeling) {
  const ModelSpec spec{2, 1, 0, 288};
  const BalarmModel m{spec, {0.4, 0.6}, {{{}, {2.89}, -1.0}, {{}, {4.48}, -4.0}}};
  const auto s = simulate_balarm(m, 40, 200, 3);
  const std::vector<int> swap{1, 0};
  const auto q = free_parameters(spec);
  const auto n_obs = bic_observations(s.panel, spec);
  EXPECT_NEAR(bic(observed_loglik(s.panel, m), q, n_obs),
              bic(observed_loglik(s.panel, permute_clusters(m, swap)), q, n_obs), 1e-9);
}

TEST(Sweep, SingleCellMatchesFitAndBic) {
  const ModelSpec spec{2, 1, 0, 288};
  const BalarmModel m{spec, {0.5, 0.5}, {{{}, {2.89}, -1.0}, {{}, {4.48}, -4.0}}};
  const auto s = simulate_balarm(m, 60, 300, 4);
  SweepOptions opt;
  opt.cluster_counts = {2};
  opt.harmonic_orders = {0};
  opt.em.seed = 11;
  const auto rows = sweep(s.panel, opt);
  ASSERT_EQ(rows.size(), 1u);
  EXPECT_TRUE(rows[0].best);
  EXPECT_FALSE(rows[0].failed);

  EmOptions em = opt.em;
  em.seed = derive_seed(11, {2, 0});
  const auto fit = fit_em(s.panel, spec, em);
  EXPECT_DOUBLE_EQ(rows[0].loglik, fit.loglik);
  EXPECT_DOUBLE_EQ(rows[0].bic, bic(fit, s.panel));
  EXPECT_EQ(rows[0].q, 5);
  EXPECT_EQ(rows[0].n_obs, 60u * 299u);
}

TEST(Sweep, GridShapeOrderAndBestFlag) {
  const ModelSpec spec{1, 1, 1, 24};
  const BalarmModel m{spec, {1.0}, {{{0.3, 0.1}, {1.0}, -1.0}}};
  const auto s = simulate_balarm(m, 15, 96, 5);
  SweepOptions opt;
  opt.cluster_counts = {1, 2};
  opt.harmonic_orders = {0, 1, 2};
  opt.period = 24;
  opt.em.n_restarts = 1;
  const auto rows = sweep(s.panel, opt);
  ASSERT_EQ(rows.size(), 6u);
  int n_best = 0;
  double min_bic = 1e300;
  for (const auto& r : rows) min_bic = std::min(min_bic, r.bic);
  for (std::size_t k = 0; k < rows.size(); ++k) {
    EXPECT_EQ(rows[k].n_clusters, opt.cluster_counts[k / 3]);
    EXPECT_EQ(rows[k].harmonic_order, opt.harmonic_orders[k % 3]);
    if (rows[k].best) {
      ++n_best;
      EXPECT_EQ(rows[k].bic, min_bic);
    }
  }
  EXPECT_EQ(n_best, 1);

  auto threaded = opt;
  threaded.em.threads = 3;
  const auto again = sweep(s.panel, threaded);
  for (std::size_t k = 0; k < rows.size(); ++k) EXPECT_EQ(rows[k].bic, again[k].bic);
}

TEST(Sweep, FailedCellsAreRecorded) {
  const auto panel = EdgePanel::from_series({{0, 1, 0, 1}, {1, 0, 1, 0}});
  SweepOptions opt;
  opt.cluster_counts = {1, 3};
  opt.harmonic_orders = {0};
  const auto rows = sweep(panel, opt);
  ASSERT_EQ(rows.size(), 2u);
  EXPECT_FALSE(rows[0].failed);
  EXPECT_TRUE(rows[0].best);
  EXPECT_TRUE(rows[1].failed);
  EXPECT_FALSE(rows[1].error.empty());
  EXPECT_FALSE(rows[1].best);
}
