#include "balarm/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "balarm/error.hpp"
#include "balarm/parallel.hpp"
#include "balarm/rng.hpp"

namespace balarm {

std::vector<std::size_t> RunLengths::interior(std::uint8_t state) const {
  const auto& runs = state ? on_runs : off_runs;
  const auto& censored = state ? on_censored : off_censored;
  std::vector<std::size_t> out;
  for (std::size_t r = 0; r < runs.size(); ++r)
    if (!censored[r]) out.push_back(runs[r]);
  return out;
}

RunLengths run_lengths(std::span<const std::uint8_t> series) {
  require(!series.empty(), "run_lengths: empty series");
  RunLengths out;
  out.first_state = series[0] ? 1 : 0;
  std::size_t start = 0;
  for (std::size_t l = 1; l <= series.size(); ++l) {
    if (l < series.size() && (series[l] != 0) == (series[start] != 0)) continue;
    const bool censored = start == 0 || l == series.size();
    if (series[start]) {
      out.on_runs.push_back(l - start);
      out.on_censored.push_back(censored);
    } else {
      out.off_runs.push_back(l - start);
      out.off_censored.push_back(censored);
    }
    start = l;
  }
  return out;
}

std::vector<std::uint8_t> reconstruct_series(const RunLengths& runs) {
  std::vector<std::uint8_t> out;
  std::size_t off = 0, on = 0;
  std::uint8_t state = runs.first_state;
  while (off < runs.off_runs.size() || on < runs.on_runs.size()) {
    const std::size_t len = state ? runs.on_runs.at(on++) : runs.off_runs.at(off++);
    out.insert(out.end(), len, state);
    state = state ? 0 : 1;
  }
  return out;
}

double geometric_cdf(double k, double p) {
  if (k < 1.0) return 0.0;
  return -std::expm1(std::floor(k) * std::log1p(-p));
}

std::size_t geometric_quantile(double u, double p) {
  require(p > 0.0 && p < 1.0, "geometric_quantile: p must lie in (0, 1)");
  if (u <= 0.0) return 1;
  require(u < 1.0, "geometric_quantile: u must be below 1");
  double k = std::max(1.0, std::ceil(std::log1p(-u) / std::log1p(-p)));
  while (k > 1.0 && geometric_cdf(k - 1.0, p) >= u) k -= 1.0;
  while (geometric_cdf(k, p) < u) k += 1.0;
  return static_cast<std::size_t>(k);
}

std::vector<std::pair<double, double>> geometric_qq(std::span<const std::size_t> runs, double p) {
  require(!runs.empty(), "geometric_qq: no runs");
  require(p > 0.0 && p < 1.0, "geometric_qq: p must lie in (0, 1)");
  std::vector<std::size_t> sorted(runs.begin(), runs.end());
  std::sort(sorted.begin(), sorted.end());
  const auto m = static_cast<double>(sorted.size());
  std::vector<std::pair<double, double>> out;
  out.reserve(sorted.size());
  for (std::size_t i = 0; i < sorted.size(); ++i) {
    const double u = (static_cast<double>(i) + 0.5) / m;
    out.emplace_back(static_cast<double>(geometric_quantile(u, p)), static_cast<double>(sorted[i]));
  }
  return out;
}

namespace {

double ks_sorted(const std::vector<std::size_t>& sorted, double p) {
  const auto m = static_cast<double>(sorted.size());
  double d = 0.0;
  std::size_t i = 0;
  const std::size_t top = sorted.back();
  for (std::size_t k = 1; k <= top; ++k) {
    while (i < sorted.size() && sorted[i] <= k) ++i;
    d = std::max(d, std::abs(static_cast<double>(i) / m - geometric_cdf(static_cast<double>(k), p)));
  }
  return d;
}

double ks_of(std::vector<std::size_t> runs, double p) {
  std::sort(runs.begin(), runs.end());
  return ks_sorted(runs, p);
}

}  // namespace

double ks_statistic(std::span<const std::size_t> runs, double p) {
  require(!runs.empty(), "ks_statistic: no runs");
  require(p > 0.0 && p < 1.0, "ks_statistic: p must lie in (0, 1)");
  for (auto r : runs) require(r >= 1, "ks_statistic: run lengths must be positive");
  return ks_of(std::vector<std::size_t>(runs.begin(), runs.end()), p);
}

KsResult ks_geometric(std::span<const std::size_t> runs, double p, int n_mc, std::uint64_t seed,
                      const KsCalibration& calibration) {
  require(n_mc >= 100, "ks_geometric: n_mc must be at least 100");
  KsResult out;
  out.statistic = ks_statistic(runs, p);
  out.n_mc = n_mc;
  const std::size_t m = runs.size();
  if (calibration.kind == KsCalibration::Kind::SeriesMean)
    require(calibration.length >= 3, "ks_geometric: series-mean calibration needs a length >= 3");

  Rng rng(seed);
  int exceed = 0;
  std::vector<std::size_t> sim;
  std::vector<std::uint8_t> series(calibration.length);
  for (int b = 0; b < n_mc; ++b) {
    double p_star = p;
    sim.clear();
    switch (calibration.kind) {
      case KsCalibration::Kind::Fixed:
      case KsCalibration::Kind::RunMean: {
        double total = 0.0;
        for (std::size_t r = 0; r < m; ++r) {
          sim.push_back(rng.geometric(p));
          total += static_cast<double>(sim.back());
        }
        if (calibration.kind == KsCalibration::Kind::RunMean)
          p_star = static_cast<double>(m) / total;
        if (p_star >= 1.0) p_star = 1.0 - 1e-12;
        break;
      }
      case KsCalibration::Kind::SeriesMean: {
        for (int attempt = 0;; ++attempt) {
          if (attempt == 1000)
            throw NumericalError("ks_geometric: null series never produced an interior off-run");
          double ones = 0.0;
          for (auto& x : series) {
            x = rng.bernoulli(p) ? 1 : 0;
            ones += x;
          }
          sim = run_lengths(series).interior(0);
          p_star = ones / static_cast<double>(series.size());
          if (!sim.empty() && p_star > 0.0 && p_star < 1.0) break;
        }
        break;
      }
    }
    if (ks_of(sim, p_star) >= out.statistic - 1e-12) ++exceed;
  }
  out.p_value = (1.0 + exceed) / (static_cast<double>(n_mc) + 1.0);
  return out;
}

IndependenceProbe independence_probe(std::span<const std::uint8_t> series) {
  const auto runs = run_lengths(series).interior(0);
  if (runs.empty()) throw ValidationError("independence_probe: insufficient data (no interior off-run)");
  IndependenceProbe out;
  double ones = 0.0;
  for (auto x : series) ones += x;
  out.p_hat_mean = ones / static_cast<double>(series.size());
  const double mean_run =
      std::accumulate(runs.begin(), runs.end(), 0.0) / static_cast<double>(runs.size());
  out.p_hat_runs = 1.0 / mean_run;
  out.discrepancy = out.p_hat_mean - out.p_hat_runs;
  out.n_runs = runs.size();
  return out;
}

std::optional<double> lagged_correlation(std::span<const std::uint8_t> x,
                                         std::span<const std::uint8_t> y, std::size_t lag) {
  require(x.size() == y.size(), "lagged_correlation: series lengths differ");
  require(lag < x.size(), "lagged_correlation: lag must be shorter than the series");
  const std::size_t n = x.size() - lag;
  double sx = 0.0, sy = 0.0, sxy = 0.0, sxx = 0.0, syy = 0.0;
  for (std::size_t l = 0; l < n; ++l) {
    const double a = x[l], b = y[l + lag];
    sx += a;
    sy += b;
    sxy += a * b;
    sxx += a * a;
    syy += b * b;
  }
  const double nn = static_cast<double>(n);
  const double vx = sxx - sx * sx / nn;
  const double vy = syy - sy * sy / nn;
  if (vx <= 0.0 || vy <= 0.0) return std::nullopt;
  return (sxy - sx * sy / nn) / std::sqrt(vx * vy);
}

namespace {

using SeriesList = std::vector<std::span<const std::uint8_t>>;

bool is_constant(std::span<const std::uint8_t> s) {
  return std::all_of(s.begin(), s.end(), [&](std::uint8_t v) { return v == s[0]; });
}

std::vector<double> make_edges(int bins) {
  std::vector<double> edges(static_cast<std::size_t>(bins) + 1);
  for (int b = 0; b <= bins; ++b) edges[static_cast<std::size_t>(b)] = -1.0 + 2.0 * b / bins;
  return edges;
}

PairHistogram histogram_group(const SeriesList& a_all, const SeriesList& b_all, bool same_group,
                              int ga, int gb, const CrossCorrOptions& options) {
  PairHistogram h;
  h.group_a = ga;
  h.group_b = gb;
  h.counts.assign(static_cast<std::size_t>(options.bins), 0);

  SeriesList a, b;
  for (auto s : a_all) {
    if (is_constant(s)) ++h.n_series_excluded;
    else a.push_back(s);
  }
  if (same_group) {
    b = a;
  } else {
    for (auto s : b_all) {
      if (is_constant(s)) ++h.n_series_excluded;
      else b.push_back(s);
    }
  }
  if (same_group ? a.size() < 2 : (a.empty() || b.empty())) {
    h.skipped = true;
    return h;
  }

  const std::uint64_t total = same_group ? a.size() * (a.size() - 1) / 2 : a.size() * b.size();
  std::vector<std::pair<std::uint32_t, std::uint32_t>> pairs;
  if (total <= options.max_pairs) {
    pairs.reserve(total);
    for (std::size_t i = 0; i < a.size(); ++i)
      for (std::size_t j = same_group ? i + 1 : 0; j < b.size(); ++j)
        pairs.emplace_back(static_cast<std::uint32_t>(i), static_cast<std::uint32_t>(j));
  } else {
    h.subsampled = true;
    Rng rng(derive_seed(options.seed, {3, static_cast<std::uint64_t>(ga), static_cast<std::uint64_t>(gb)}));
    pairs.reserve(options.max_pairs);
    while (pairs.size() < options.max_pairs) {
      auto i = static_cast<std::uint32_t>(rng.below(a.size()));
      auto j = static_cast<std::uint32_t>(rng.below(b.size()));
      if (same_group) {
        if (i == j) continue;
        if (i > j) std::swap(i, j);
      }
      pairs.emplace_back(i, j);
    }
  }
  h.n_pairs = pairs.size();

  std::vector<double> r(pairs.size(), std::nan(""));
  parallel_for(pairs.size(), options.threads, [&](std::size_t p) {
    const auto c = lagged_correlation(a[pairs[p].first], b[pairs[p].second], options.lag);
    if (c) r[p] = *c;
  });
  for (double v : r) {
    if (std::isnan(v)) {
      ++h.n_pairs_excluded;
      continue;
    }
    const auto bin = static_cast<std::size_t>(
        std::clamp(static_cast<int>(std::floor((v + 1.0) * 0.5 * options.bins)), 0, options.bins - 1));
    ++h.counts[bin];
  }
  return h;
}

CrossCorrHistograms histograms(const std::vector<SeriesList>& groups, const CrossCorrOptions& options) {
  require(options.bins >= 1, "crosscorr: need at least one bin");
  CrossCorrHistograms out;
  out.bin_edges = make_edges(options.bins);
  const int g_count = static_cast<int>(groups.size());
  for (int g = 0; g < g_count; ++g)
    for (int k = g; k < g_count; ++k)
      out.groups.push_back(histogram_group(groups[static_cast<std::size_t>(g)],
                                           groups[static_cast<std::size_t>(k)], g == k, g, k, options));
  return out;
}

}  // namespace

CrossCorrHistograms crosscorr_null(const BalarmModel& model, std::size_t m, std::size_t n,
                                   const CrossCorrOptions& options,
                                   const SimulationOptions& simulation) {
  model.validate();
  require(m >= 2, "crosscorr_null: need at least 2 series per cluster");
  require(n > options.lag + 1, "crosscorr_null: series too short for the lag");
  const auto g_count = model.clusters.size();
  SimulationOptions sim = simulation;
  sim.threads = 1;
  std::vector<std::vector<std::uint8_t>> series(g_count * m);
  parallel_for(series.size(), options.threads, [&](std::size_t idx) {
    const std::size_t g = idx / m, s = idx % m;
    series[idx] = simulate_edge(model.clusters[g], model.spec, n,
                                derive_seed(options.seed, {2, g, s}), sim);
  });
  std::vector<SeriesList> groups(g_count);
  for (std::size_t idx = 0; idx < series.size(); ++idx) groups[idx / m].emplace_back(series[idx]);
  return histograms(groups, options);
}

CrossCorrHistograms crosscorr_observed(const EdgePanel& panel, std::span<const int> labels,
                                       int n_clusters, const CrossCorrOptions& options) {
  require(labels.size() == panel.n_edges(), "crosscorr_observed: one label per edge");
  require(n_clusters >= 1, "crosscorr_observed: need at least one cluster");
  require(panel.length() > options.lag + 1, "crosscorr_observed: series too short for the lag");
  std::vector<SeriesList> groups(static_cast<std::size_t>(n_clusters));
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < n_clusters, "crosscorr_observed: label out of range");
    groups[static_cast<std::size_t>(labels[i])].push_back(panel.series(i));
  }
  return histograms(groups, options);
}

}  // namespace balarm
