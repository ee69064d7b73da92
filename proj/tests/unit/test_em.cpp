#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>

#include "balarm/alarm.hpp"
#include "balarm/em.hpp"
#include "balarm/error.hpp"

using namespace balarm;

namespace {

const ModelSpec kAB{2, 1, 0, 288};

BalarmModel model_ab() {
  return {kAB, {0.5, 0.5}, {{{}, {2.89}, -1.0}, {{}, {4.48}, -4.0}}};
}

BalarmModel random_model(const ModelSpec& spec, std::mt19937_64& gen) {
  std::normal_distribution<double> nd;
  std::gamma_distribution<double> gd(2.0, 1.0);
  BalarmModel m{spec, {}, {}};
  double total = 0.0;
  for (int g = 0; g < spec.n_clusters; ++g) {
    m.mixing.push_back(gd(gen));
    total += m.mixing.back();
    auto p = ClusterParams::zeros(spec);
    for (auto& v : p.harmonic) v = 0.5 * nd(gen);
    for (auto& v : p.ar) v = nd(gen);
    p.intercept = nd(gen);
    m.clusters.push_back(p);
  }
  for (auto& w : m.mixing) w /= total;
  double s = 0.0;
  for (int g = 0; g + 1 < spec.n_clusters; ++g) s += m.mixing[static_cast<std::size_t>(g)];
  m.mixing.back() = 1.0 - s;
  return m;
}

// Probability of one series under one cluster, as a plain product.
double path_probability(std::span<const std::uint8_t> x, std::span<const std::int64_t> times,
                        const ClusterParams& params, const ModelSpec& spec) {
  double prob = 1.0;
  const auto k = static_cast<std::size_t>(spec.ar_order);
  std::vector<std::uint8_t> hist(k);
  for (std::size_t l = k; l < x.size(); ++l) {
    for (std::size_t j = 0; j < k; ++j) hist[j] = x[l - 1 - j];
    const double p = inv_logit(linear_predictor(hist, times[l], params, spec));
    prob *= x[l] ? p : 1.0 - p;
  }
  return prob;
}

}  // namespace

TEST(ClusterLoglik, Examples) {
  const ModelSpec k0{1, 0, 0, 288};
  const auto panel = EdgePanel::from_series({{0, 1, 1, 0, 1, 0, 0, 1, 1, 0, 1}});
  EXPECT_NEAR(cluster_loglik(panel, 0, ClusterParams::zeros(kAB), kAB), -10 * std::log(2.0), 1e-12);

  const auto zeros = EdgePanel::from_series({std::vector<std::uint8_t>(50, 0)});
  EXPECT_NEAR(cluster_loglik(zeros, 0, {{}, {}, -8.0}, k0), 50 * -3.3540637289576883e-4, 1e-15);

  const std::vector<std::uint8_t> full{0, 1, 1, 0, 0, 1, 1, 1};
  const auto a = EdgePanel::from_series({{0, 1, 1, 0}});
  const auto b = EdgePanel::from_series({{0, 1, 1, 1}});
  const auto f = EdgePanel::from_series({full});
  const ClusterParams p{{}, {}, 0.7};
  EXPECT_NEAR(cluster_loglik(a, 0, p, k0) + cluster_loglik(b, 0, p, k0), cluster_loglik(f, 0, p, k0), 1e-12);
}

TEST(PanelStats, AgreesWithReferencePath) {
  std::mt19937_64 gen(2);
  for (const ModelSpec spec : {ModelSpec{3, 0, 0, 10}, ModelSpec{3, 1, 2, 12}, ModelSpec{2, 3, 1, 7}}) {
    const auto m = random_model(spec, gen);
    SimulationOptions sim;
    sim.phase_offset = 5;
    const auto s = simulate_balarm(m, 25, 60, 9, sim);
    const PanelStats stats(s.panel, spec);
    EXPECT_EQ(stats.n_observations(), 25u * (60u - static_cast<std::size_t>(spec.ar_order)));
    const auto L = cluster_logliks(stats, m, 3);
    for (std::size_t i = 0; i < 25; ++i)
      for (int g = 0; g < spec.n_clusters; ++g) {
        const double ref = cluster_loglik(s.panel, i, m.clusters[static_cast<std::size_t>(g)], spec);
        EXPECT_NEAR(L(static_cast<Eigen::Index>(i), g), ref, 1e-10 * std::abs(ref));
      }
  }
}

TEST(EStep, Examples) {
  const auto panel = EdgePanel::from_series({{0, 1, 1, 0}, {1, 1, 1, 1}, {0, 0, 0, 0}});
  const ModelSpec g1{1, 1, 0, 288};
  const auto tau1 = e_step(panel, BalarmModel{g1, {1.0}, {{{}, {0.3}, -0.2}}});
  EXPECT_TRUE((tau1.array() == 1.0).all());

  const ClusterParams same{{}, {1.0}, -0.5};
  const auto tau2 = e_step(panel, BalarmModel{kAB, {0.3, 0.7}, {same, same}});
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_NEAR(tau2(i, 0), 0.3, 1e-12);
    EXPECT_NEAR(tau2(i, 1), 0.7, 1e-12);
  }

  const auto tau3 = e_step(panel, BalarmModel{kAB, {1.0, 0.0}, {{{}, {1.0}, 5.0}, {{}, {1.0}, -5.0}}});
  for (Eigen::Index i = 0; i < 3; ++i) {
    EXPECT_EQ(tau3(i, 1), 0.0);
    EXPECT_EQ(tau3(i, 0), 1.0);
  }
}

TEST(EStep, NearHardOnSeparatedClusters) {
  const auto m = model_ab();
  std::vector<int> labels(600);
  for (std::size_t i = 300; i < 600; ++i) labels[i] = 1;
  const auto panel = simulate_balarm_labeled(m, labels, 1200, 31);
  const auto tau = e_step(panel, m);
  double worst = 0.0;
  for (Eigen::Index i = 0; i < tau.rows(); ++i) worst = std::max(worst, tau.row(i).minCoeff());
  EXPECT_LT(worst, 1e-3);
}

TEST(ObservedLoglik, EqualsEnumerationOverMemberships) {
  std::mt19937_64 gen(4);
  const ModelSpec spec{2, 1, 1, 3};
  for (int rep = 0; rep < 20; ++rep) {
    const auto m = random_model(spec, gen);
    const auto s = simulate_balarm(m, 4, 8, static_cast<std::uint64_t>(rep));
    const auto& panel = s.panel;
    // Sum over all G^J membership vectors of the complete-data likelihood.
    double total = 0.0;
    for (int code = 0; code < 16; ++code) {
      double term = 1.0;
      for (std::size_t i = 0; i < 4; ++i) {
        const int z = (code >> i) & 1;
        term *= m.mixing[static_cast<std::size_t>(z)] *
                path_probability(panel.series(i), panel.timestamps(), m.clusters[static_cast<std::size_t>(z)], spec);
      }
      total += term;
    }
    EXPECT_NEAR(observed_loglik(panel, m), std::log(total), 1e-12);
  }
}

TEST(ObservedLoglik, PathProbabilitiesSumToOne) {
  // For a single edge, exp(loglik) over all 2^(n-K) continuations of a fixed
  // initial value sums to 1.
  std::mt19937_64 gen(6);
  const ModelSpec spec{3, 1, 1, 4};
  const auto m = random_model(spec, gen);
  for (std::uint8_t first : {0, 1}) {
    double total = 0.0;
    for (int code = 0; code < 128; ++code) {
      std::vector<std::uint8_t> x(8);
      x[0] = first;
      for (int l = 1; l < 8; ++l) x[static_cast<std::size_t>(l)] = (code >> (l - 1)) & 1;
      total += std::exp(observed_loglik(EdgePanel::from_series({x}), m));
    }
    EXPECT_NEAR(total, 1.0, 1e-12);
  }
}

TEST(ObservedLoglik, PermutationInvarianceAndBounds) {
  std::mt19937_64 gen(8);
  const ModelSpec spec{3, 1, 2, 24};
  for (int rep = 0; rep < 10; ++rep) {
    const auto m = random_model(spec, gen);
    const auto s = simulate_balarm(m, 30, 100, static_cast<std::uint64_t>(rep + 100));
    std::vector<int> perm{2, 0, 1};
    const auto pm = permute_clusters(m, perm);
    EXPECT_NEAR(observed_loglik(s.panel, m), observed_loglik(s.panel, pm), 1e-10);
    const auto t = e_step(s.panel, m), tp = e_step(s.panel, pm);
    for (int g = 0; g < 3; ++g)
      EXPECT_LE((t.col(perm[static_cast<std::size_t>(g)]) - tp.col(g)).cwiseAbs().maxCoeff(), 1e-10);
    for (Eigen::Index i = 0; i < t.rows(); ++i) EXPECT_NEAR(t.row(i).sum(), 1.0, 1e-10);
    EXPECT_GE(observed_loglik(s.panel, m) + 1e-10, complete_loglik(s.panel, m, hard_labels(t)));
  }
}

TEST(ObservedLoglik, SingleClusterIsSumOfEdges) {
  const ModelSpec spec{1, 1, 0, 288};
  const BalarmModel m{spec, {1.0}, {{{}, {1.5}, -2.0}}};
  const auto s = simulate_balarm(m, 10, 40, 3);
  double sum = 0.0;
  for (std::size_t i = 0; i < 10; ++i) sum += cluster_loglik(s.panel, i, m.clusters[0], spec);
  EXPECT_NEAR(observed_loglik(s.panel, m), sum, 1e-10);
  EXPECT_NEAR(complete_loglik(s.panel, m, std::vector<int>(10, 0)), sum, 1e-10);
}

TEST(MStep, MixingUpdate) {
  const auto panel = EdgePanel::from_series({{0, 1, 1, 0}, {1, 1, 0, 1}, {0, 0, 1, 1}});
  const ModelSpec spec{2, 1, 0, 288};
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(3, 2);
  tau.col(0).setOnes();
  const BalarmModel prev{spec, {0.5, 0.5}, {ClusterParams::zeros(spec), {{}, {0.7}, 0.1}}};
  const auto res = m_step(PanelStats(panel, spec), tau, prev);
  EXPECT_EQ(res.model.mixing, (std::vector<double>{1.0, 0.0}));
  EXPECT_TRUE(res.empty[1]);
  EXPECT_EQ(res.model.clusters[1], prev.clusters[1]);
  EXPECT_EQ(m_step(panel, tau, spec, prev).mixing, (std::vector<double>{1.0, 0.0}));
}

TEST(MStep, UniformResponsibilitiesGiveIdenticalClusters) {
  const auto s = simulate_balarm(model_ab(), 40, 200, 12);
  const Eigen::MatrixXd tau = Eigen::MatrixXd::Constant(40, 2, 0.5);
  const BalarmModel prev{kAB, {0.5, 0.5}, {{{}, {0.5}, -1.0}, {{}, {-0.2}, 0.3}}};
  const auto m = m_step(s.panel, tau, kAB, prev);
  EXPECT_NEAR(m.clusters[0].ar[0], m.clusters[1].ar[0], 1e-7);
  EXPECT_NEAR(m.clusters[0].intercept, m.clusters[1].intercept, 1e-7);
}

TEST(MStep, HardTrueLabelsRecoverParameters) {
  const auto truth = model_ab();
  std::vector<int> labels(600);
  for (std::size_t i = 300; i < 600; ++i) labels[i] = 1;
  const auto panel = simulate_balarm_labeled(truth, labels, 1200, 8);
  Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(600, 2);
  for (Eigen::Index i = 0; i < 600; ++i) tau(i, labels[static_cast<std::size_t>(i)]) = 1.0;
  const BalarmModel start{kAB, {0.5, 0.5}, {ClusterParams::zeros(kAB), ClusterParams::zeros(kAB)}};
  const auto m = m_step(panel, tau, kAB, start);
  for (int g = 0; g < 2; ++g) {
    EXPECT_NEAR(m.clusters[g].ar[0], truth.clusters[g].ar[0], 0.15);
    EXPECT_NEAR(m.clusters[g].intercept, truth.clusters[g].intercept, 0.15);
  }
}

TEST(FitEm, SingleClusterMatchesPooledFit) {
  const ModelSpec spec{1, 1, 1, 24};
  const BalarmModel m{spec, {1.0}, {{{0.4, -0.2}, {1.3}, -1.5}}};
  const auto s = simulate_balarm(m, 20, 150, 5);
  const auto fit = fit_em(s.panel, spec);
  Design pooled(spec.covariate_dim());
  for (const auto& d : build_design(s.panel, spec))
    for (std::size_t r = 0; r < d.n_rows(); ++r) pooled.add_row(d.covariates(r), d.response(r));
  const auto direct = weighted_logistic_fit(pooled, std::span<const double>{});
  const auto v = fit.model.clusters[0].to_vector();
  for (std::size_t k = 0; k < v.size(); ++k) EXPECT_NEAR(v[k], direct.coefficients[k], 1e-7);
}

TEST(FitEm, TraceIsMonotone) {
  std::mt19937_64 gen(10);
  for (int rep = 0; rep < 15; ++rep) {
    const ModelSpec spec{2 + rep % 2, 1, rep % 3, 12};
    const auto m = random_model(spec, gen);
    const auto s = simulate_balarm(m, 30, 80, static_cast<std::uint64_t>(rep));
    EmOptions opt;
    opt.init = rep % 2 ? InitStrategy::RandomResponsibility : InitStrategy::SummaryKMeans;
    opt.n_restarts = 1;
    opt.seed = static_cast<std::uint64_t>(rep);
    const auto fit = fit_em(s.panel, spec, opt);
    for (std::size_t t = 1; t < fit.loglik_trace.size(); ++t)
      EXPECT_GE(fit.loglik_trace[t], fit.loglik_trace[t - 1] - 1e-8);
  }
}

TEST(FitEm, RecoversSeparatedClusters) {
  const auto s = simulate_balarm(model_ab(), 600, 1200, 44);
  const auto fit = fit_em(s.panel, kAB);
  EXPECT_TRUE(fit.converged);
  EXPECT_GE(adjusted_rand_index(s.labels, fit.hard_labels), 0.95);
  EXPECT_EQ(fit.info.n_restarts_used, 5);
}

TEST(FitEm, DeterministicAcrossThreadCounts) {
  const ModelSpec spec{3, 1, 1, 24};
  std::mt19937_64 gen(12);
  const auto s = simulate_balarm(random_model(spec, gen), 60, 120, 2);
  EmOptions one, four;
  four.threads = 4;
  const auto a = fit_em(s.panel, spec, one);
  const auto b = fit_em(s.panel, spec, four);
  EXPECT_EQ(a.model, b.model);
  EXPECT_EQ(a.loglik_trace, b.loglik_trace);
}

TEST(FitEm, EdgeOrderInvariance) {
  const auto truth = model_ab();
  const auto s = simulate_balarm(truth, 80, 300, 19);
  std::vector<std::size_t> order(80);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(1);
  std::shuffle(order.begin(), order.end(), gen);
  const auto shuffled = s.panel.select_edges(order);
  EmOptions opt;
  opt.init = InitStrategy::ProvidedModel;
  opt.provided_model = truth;
  const auto a = fit_em(s.panel, kAB, opt);
  const auto b = fit_em(shuffled, kAB, opt);
  for (int g = 0; g < 2; ++g) {
    const auto va = a.model.clusters[g].to_vector(), vb = b.model.clusters[g].to_vector();
    for (std::size_t k = 0; k < va.size(); ++k) EXPECT_NEAR(va[k], vb[k], 1e-8);
  }
  for (std::size_t r = 0; r < 80; ++r)
    for (int g = 0; g < 2; ++g)
      EXPECT_NEAR(b.responsibilities(static_cast<Eigen::Index>(r), g),
                  a.responsibilities(static_cast<Eigen::Index>(order[r]), g), 1e-8);
}

TEST(FitEm, Preconditions) {
  const auto panel = EdgePanel::from_series({{0, 1, 0}});
  EXPECT_THROW(fit_em(panel, kAB), ValidationError);
  EmOptions opt;
  opt.init = InitStrategy::ProvidedModel;
  EXPECT_THROW(fit_em(EdgePanel::from_series({{0, 1}, {1, 0}}), kAB, opt), ValidationError);
}

TEST(Initialize, RandomIsSeedDeterministic) {
  const auto s = simulate_balarm(model_ab(), 20, 50, 1);
  const auto a = initialize(s.panel, kAB, InitStrategy::RandomResponsibility, 7);
  const auto b = initialize(s.panel, kAB, InitStrategy::RandomResponsibility, 7);
  const auto c = initialize(s.panel, kAB, InitStrategy::RandomResponsibility, 8);
  ASSERT_TRUE(a.responsibilities && b.responsibilities);
  EXPECT_EQ(*a.responsibilities, *b.responsibilities);
  EXPECT_NE(*a.responsibilities, *c.responsibilities);
  for (Eigen::Index i = 0; i < 20; ++i) EXPECT_NEAR(a.responsibilities->row(i).sum(), 1.0, 1e-12);
}

TEST(Initialize, KMeansSeparatesMeans) {
  std::vector<int> labels(200);
  for (std::size_t i = 100; i < 200; ++i) labels[i] = 1;
  const auto panel = simulate_balarm_labeled(model_ab(), labels, 1200, 3);
  const auto init = initialize(panel, kAB, InitStrategy::SummaryKMeans, 5);
  ASSERT_TRUE(init.responsibilities.has_value());
  EXPECT_DOUBLE_EQ(adjusted_rand_index(labels, hard_labels(*init.responsibilities)), 1.0);
}

TEST(Initialize, ProvidedModelFirstEStep) {
  const auto truth = model_ab();
  const auto s = simulate_balarm(truth, 300, 1200, 6);
  const auto init = initialize(s.panel, kAB, InitStrategy::ProvidedModel, 0, &truth);
  ASSERT_TRUE(init.model.has_value());
  EXPECT_GE(adjusted_rand_index(s.labels, hard_labels(e_step(s.panel, *init.model))), 0.95);
  EXPECT_THROW(initialize(s.panel, kAB, InitStrategy::ProvidedModel, 0, nullptr), ValidationError);
}

TEST(InitStrategyNames, ParseAndPrint) {
  EXPECT_EQ(parse_init_strategy("random-responsibility"), InitStrategy::RandomResponsibility);
  EXPECT_EQ(parse_init_strategy("kmeans"), InitStrategy::SummaryKMeans);
  EXPECT_EQ(to_string(InitStrategy::ProvidedModel), "provided-model");
  EXPECT_THROW(parse_init_strategy("spectral"), ValidationError);
}

TEST(AlignLabels, IdentitySwapAndPerturbation) {
  const ModelSpec spec{4, 1, 1, 12};
  std::mt19937_64 gen(14);
  const auto ref = random_model(spec, gen);
  EXPECT_EQ(align_labels(ref, ref), (std::vector<int>{0, 1, 2, 3}));
  std::vector<int> swap{1, 0, 2, 3};
  EXPECT_EQ(align_labels(ref, permute_clusters(ref, swap)), swap);

  std::normal_distribution<double> nd(0.0, 0.01);
  for (int rep = 0; rep < 20; ++rep) {
    std::vector<int> perm{0, 1, 2, 3};
    std::shuffle(perm.begin(), perm.end(), gen);
    auto fitted = permute_clusters(ref, perm);
    for (auto& c : fitted.clusters) {
      for (auto& v : c.harmonic) v += nd(gen);
      for (auto& v : c.ar) v += nd(gen);
      c.intercept += nd(gen);
    }
    // fitted cluster g is reference cluster perm[g]; so reference r sits at the g with perm[g] = r.
    const auto got = align_labels(ref, fitted);
    for (int r = 0; r < 4; ++r) EXPECT_EQ(perm[static_cast<std::size_t>(got[static_cast<std::size_t>(r)])], r);
    const auto back = permute_clusters(fitted, got);
    for (int r = 0; r < 4; ++r) EXPECT_NEAR(back.clusters[r].intercept, ref.clusters[r].intercept, 0.1);
  }
}

TEST(SolveAssignment, MatchesBruteForce) {
  std::mt19937_64 gen(15);
  std::uniform_real_distribution<double> u(0, 10);
  for (int rep = 0; rep < 50; ++rep) {
    Eigen::MatrixXd cost(5, 5);
    for (Eigen::Index i = 0; i < 5; ++i)
      for (Eigen::Index j = 0; j < 5; ++j) cost(i, j) = u(gen);
    std::vector<int> p{0, 1, 2, 3, 4};
    double best = 1e300;
    do {
      double c = 0;
      for (int i = 0; i < 5; ++i) c += cost(i, p[static_cast<std::size_t>(i)]);
      best = std::min(best, c);
    } while (std::next_permutation(p.begin(), p.end()));
    const auto got = solve_assignment(cost);
    double c = 0;
    for (int i = 0; i < 5; ++i) c += cost(i, got[static_cast<std::size_t>(i)]);
    EXPECT_NEAR(c, best, 1e-12);
  }
}

TEST(AdjustedRandIndex, KnownValues) {
  const std::vector<int> a{0, 0, 1, 1}, b{1, 1, 0, 0}, c{0, 1, 0, 1};
  EXPECT_DOUBLE_EQ(adjusted_rand_index(a, b), 1.0);
  EXPECT_NEAR(adjusted_rand_index(a, c), -0.5, 1e-12);
  // Reference value for labels (0,0,0,1,1,1) vs (0,0,1,1,2,2).
  const std::vector<int> x{0, 0, 0, 1, 1, 1}, y{0, 0, 1, 1, 2, 2};
  EXPECT_NEAR(adjusted_rand_index(x, y), 0.24242424242424243, 1e-12);
}
