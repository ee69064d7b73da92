#pragma once

// Run-length and cross-correlation diagnostics of binary edge series.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "balarm/alarm.hpp"
#include "balarm/model.hpp"

namespace balarm {

/// Maximal runs of equal values in order of appearance. The first and last
/// runs touch the series boundary and are flagged censored.
struct RunLengths {
  std::vector<std::size_t> off_runs;
  std::vector<bool> off_censored;
  std::vector<std::size_t> on_runs;
  std::vector<bool> on_censored;
  std::uint8_t first_state = 0;

  /// Runs of the given state that are not censored.
  std::vector<std::size_t> interior(std::uint8_t state) const;
};

RunLengths run_lengths(std::span<const std::uint8_t> series);

/// Inverse of run_lengths.
std::vector<std::uint8_t> reconstruct_series(const RunLengths& runs);

/// Smallest k >= 1 with 1 - (1-p)^k >= u.
std::size_t geometric_quantile(double u, double p);
double geometric_cdf(double k, double p);

/// (theoretical, sample) pairs: sorted runs against Geometric(p) quantiles at
/// plotting positions (i - 0.5) / m.
std::vector<std::pair<double, double>> geometric_qq(std::span<const std::size_t> runs, double p);

/// sup_k |F_m(k) - F_p(k)| between the empirical CDF of runs and Geometric(p).
double ks_statistic(std::span<const std::size_t> runs, double p);

/// How the Monte Carlo null re-estimates p in every replicate.
struct KsCalibration {
  enum class Kind {
    Fixed,       ///< p is known: m draws from Geometric(p), no re-estimation
    RunMean,     ///< m draws from Geometric(p), p* = 1 / mean run length
    SeriesMean,  ///< iid Bernoulli(p) series of `length`, interior off-runs, p* = series mean
  };
  Kind kind = Kind::RunMean;
  std::size_t length = 0;  // SeriesMean only
};

struct KsResult {
  double statistic = 0.0;
  double p_value = 1.0;
  int n_mc = 0;
};

/// Monte Carlo KS test; p-value = (1 + #{D* >= D}) / (n_mc + 1). Requires
/// n_mc >= 100.
KsResult ks_geometric(std::span<const std::size_t> runs, double p, int n_mc, std::uint64_t seed,
                      const KsCalibration& calibration = {});

struct IndependenceProbe {
  double p_hat_mean = 0.0;
  double p_hat_runs = 0.0;  // 1 / mean interior off-run length
  double discrepancy = 0.0; // p_hat_mean - p_hat_runs
  std::size_t n_runs = 0;
};

/// ValidationError when the series has no interior off-run.
IndependenceProbe independence_probe(std::span<const std::uint8_t> series);

/// Pearson correlation of x_l and y_{l+lag}; nullopt if either window is constant.
std::optional<double> lagged_correlation(std::span<const std::uint8_t> x,
                                         std::span<const std::uint8_t> y, std::size_t lag);

struct CrossCorrOptions {
  std::size_t lag = 0;
  int bins = 40;                   // shared bins on [-1, 1]
  std::size_t max_pairs = 200000;  // per group; larger groups are subsampled
  std::uint64_t seed = 1;          // pair subsampling and null simulation
  int threads = 1;
};

struct PairHistogram {
  int group_a = 0;  // 0-based cluster, group_a <= group_b
  int group_b = 0;
  std::vector<std::size_t> counts;
  std::size_t n_series_excluded = 0;  // constant series left out of the group
  std::size_t n_pairs = 0;            // pairs evaluated (all, or the subsample)
  std::size_t n_pairs_excluded = 0;   // pairs with an undefined correlation
  bool subsampled = false;
  bool skipped = false;  // fewer than 2 usable series
};

struct CrossCorrHistograms {
  std::vector<double> bin_edges;  // bins + 1 values from -1 to 1
  std::vector<PairHistogram> groups;
};

/// Histograms of correlations between m independently simulated series per
/// cluster, for every cluster pair (g, h) with g <= h.
CrossCorrHistograms crosscorr_null(const BalarmModel& model, std::size_t m, std::size_t n,
                                   const CrossCorrOptions& options,
                                   const SimulationOptions& simulation = {});

/// Same histograms for observed edges grouped by (0-based) hard label.
CrossCorrHistograms crosscorr_observed(const EdgePanel& panel, std::span<const int> labels,
                                       int n_clusters, const CrossCorrOptions& options);

}  // namespace balarm
