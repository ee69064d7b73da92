#include "balarm/alarm.hpp"

#include <algorithm>
#include <cmath>

#include "balarm/error.hpp"
#include "balarm/parallel.hpp"
#include "balarm/rng.hpp"

namespace balarm {

namespace {

constexpr int kMaxSweeps = 10000;
constexpr double kFixedPointTol = 1e-12;

// Predictor without the AR terms at harmonic time t.
double base_predictor(const ClusterParams& params, const ModelSpec& spec, std::int64_t t,
                      std::vector<double>& basis) {
  double eta = params.intercept;
  if (spec.harmonic_order > 0) {
    harmonic_basis(t, spec.harmonic_order, spec.period, basis);
    for (std::size_t d = 0; d < basis.size(); ++d) eta += params.harmonic[d] * basis[d];
  }
  return eta;
}

// Draw the K values preceding the first simulated step.
std::vector<std::uint8_t> draw_initial(const ClusterParams& params, const ModelSpec& spec,
                                       const CycloCurves* curves, std::int64_t first_time,
                                       Rng& rng) {
  std::vector<std::uint8_t> init(static_cast<std::size_t>(spec.ar_order));
  std::vector<double> basis(static_cast<std::size_t>(spec.harmonic_dim()));
  for (std::size_t k = 0; k < init.size(); ++k) {
    const std::int64_t t = first_time + static_cast<std::int64_t>(k);
    double p;
    if (curves != nullptr) {
      p = curves->p_curve[static_cast<std::size_t>(phase_of(t, spec.period))];
    } else {
      p = inv_logit(base_predictor(params, spec, t, basis));
    }
    init[k] = rng.bernoulli(p) ? 1 : 0;
  }
  return init;
}

std::vector<std::uint8_t> simulate_edge_impl(const ClusterParams& params, const ModelSpec& spec,
                                             std::size_t n, std::uint64_t seed,
                                             const SimulationOptions& options,
                                             const CycloCurves* curves) {
  const std::size_t burn = options.burn_in.value_or(static_cast<std::size_t>(spec.period));
  const auto k = static_cast<std::size_t>(spec.ar_order);
  Rng rng(seed);
  // Time of the first initial value, so that retained index 0 lands on first_time.
  const std::int64_t t0 = options.first_time + options.phase_offset -
                          static_cast<std::int64_t>(burn) - static_cast<std::int64_t>(k);
  const auto init = draw_initial(params, spec, curves, t0, rng);
  auto path = simulate_alarm(params, spec, n + burn + k, rng, init, t0);
  path.erase(path.begin(), path.begin() + static_cast<std::ptrdiff_t>(burn + k));
  return path;
}

}  // namespace

StationarySummary alarm1_stationary(double b, double c) {
  const double p01 = inv_logit(c);
  const double p11 = inv_logit(b + c);
  return {p01 / (1.0 + p01 - p11), p11 - p01};
}

CycloCurves cyclo_curves(const ClusterParams& params, const ModelSpec& spec, double start) {
  spec.validate();
  params.validate(spec);
  require(spec.ar_order <= 1, "cyclo_curves: requires AR order K <= 1");
  const auto period = static_cast<std::size_t>(spec.period);
  const double b = spec.ar_order == 1 ? params.ar[0] : 0.0;

  std::vector<double> pi0(period), pi1(period);
  std::vector<double> basis(static_cast<std::size_t>(spec.harmonic_dim()));
  for (std::size_t l = 0; l < period; ++l) {
    const double eta = base_predictor(params, spec, static_cast<std::int64_t>(l), basis);
    pi0[l] = inv_logit(eta);
    pi1[l] = inv_logit(eta + b);
  }

  CycloCurves out;
  out.p_curve.assign(period, start);
  std::vector<double> next(period);
  bool converged = false;
  for (int sweep = 0; sweep < kMaxSweeps && !converged; ++sweep) {
    double prev = out.p_curve[period - 1];
    double change = 0.0;
    for (std::size_t l = 0; l < period; ++l) {
      next[l] = prev * pi1[l] + (1.0 - prev) * pi0[l];
      change = std::max(change, std::abs(next[l] - out.p_curve[l]));
      prev = next[l];
    }
    out.p_curve.swap(next);
    converged = change < kFixedPointTol;
  }
  if (!converged)
    throw NumericalError("cyclo_curves: no cyclostationary fixed point after 10000 sweeps");

  out.rho_curve.resize(period);
  for (std::size_t l = 0; l < period; ++l) {
    const double p_prev = out.p_curve[(l + period - 1) % period];
    const double p_cur = out.p_curve[l];
    const double denom = p_cur * (1.0 - p_cur);
    out.rho_curve[l] =
        denom > 0.0 ? std::sqrt(p_prev * (1.0 - p_prev) / denom) * (pi1[l] - pi0[l]) : 0.0;
  }
  return out;
}

std::vector<std::uint8_t> simulate_alarm(const ClusterParams& params, const ModelSpec& spec,
                                         std::size_t n, Rng& rng,
                                         std::span<const std::uint8_t> init,
                                         std::int64_t first_time) {
  params.validate(spec);
  const auto k = static_cast<std::size_t>(spec.ar_order);
  require(init.size() == k, "simulate_alarm: init must hold K values");
  require(n > k, "simulate_alarm: series length must exceed K");
  std::vector<std::uint8_t> x(n);
  for (std::size_t l = 0; l < k; ++l) {
    require(init[l] <= 1, "simulate_alarm: init must be binary");
    x[l] = init[l];
  }
  std::vector<double> basis(static_cast<std::size_t>(spec.harmonic_dim()));
  for (std::size_t l = k; l < n; ++l) {
    double eta = base_predictor(params, spec, first_time + static_cast<std::int64_t>(l), basis);
    for (std::size_t j = 0; j < k; ++j)
      if (x[l - 1 - j]) eta += params.ar[j];
    x[l] = rng.bernoulli(inv_logit(eta)) ? 1 : 0;
  }
  return x;
}

std::vector<std::uint8_t> simulate_alarm(const ClusterParams& params, const ModelSpec& spec,
                                         std::size_t n, std::uint64_t seed,
                                         std::span<const std::uint8_t> init,
                                         std::int64_t first_time) {
  Rng rng(seed);
  return simulate_alarm(params, spec, n, rng, init, first_time);
}

std::vector<std::uint8_t> simulate_edge(const ClusterParams& params, const ModelSpec& spec,
                                        std::size_t n, std::uint64_t seed,
                                        const SimulationOptions& options) {
  spec.validate();
  params.validate(spec);
  if (spec.ar_order == 1) {
    const auto curves = cyclo_curves(params, spec);
    return simulate_edge_impl(params, spec, n, seed, options, &curves);
  }
  return simulate_edge_impl(params, spec, n, seed, options, nullptr);
}

EdgePanel simulate_balarm_labeled(const BalarmModel& model, std::span<const int> labels,
                                  std::size_t n, std::uint64_t seed,
                                  const SimulationOptions& options) {
  model.validate();
  const auto& spec = model.spec;
  require(!labels.empty(), "simulate_balarm: need at least one edge");
  require(n > static_cast<std::size_t>(spec.ar_order), "simulate_balarm: n must exceed K");
  for (int z : labels)
    require(z >= 0 && z < spec.n_clusters, "simulate_balarm: label out of range");

  std::vector<std::optional<CycloCurves>> curves(model.clusters.size());
  if (spec.ar_order == 1)
    for (std::size_t g = 0; g < curves.size(); ++g)
      curves[g] = cyclo_curves(model.clusters[g], spec);

  const std::size_t j = labels.size();
  std::vector<std::vector<std::uint8_t>> series(j);
  parallel_for(j, options.threads, [&](std::size_t i) {
    const auto g = static_cast<std::size_t>(labels[i]);
    series[i] = simulate_edge_impl(model.clusters[g], spec, n, derive_seed(seed, {1, i}), options,
                                   curves[g] ? &*curves[g] : nullptr);
  });

  auto panel = EdgePanel::from_series(series, options.first_time);
  if (options.phase_offset == 0) return panel;
  PanelMetadata meta = panel.metadata();
  meta.phase_offset = options.phase_offset;
  meta.phase_origin = "explicit";
  std::vector<std::uint8_t> values(panel.values().begin(), panel.values().end());
  std::vector<std::int64_t> times(panel.timestamps().begin(), panel.timestamps().end());
  return EdgePanel(panel.n_edges(), panel.length(), std::move(values), std::move(times),
                   panel.edge_map(), {}, std::move(meta));
}

SimulatedPanel simulate_balarm(const BalarmModel& model, std::size_t n_edges, std::size_t n,
                               std::uint64_t seed, const SimulationOptions& options) {
  model.validate();
  require(n_edges >= 1, "simulate_balarm: need at least one edge");
  Rng rng(derive_seed(seed, {0}));
  std::vector<int> labels(n_edges);
  for (auto& z : labels) {
    const double u = rng.uniform();
    double cumulative = 0.0;
    int g = 0;
    // Last cluster with positive weight absorbs rounding in the cumulative sum.
    int last_positive = 0;
    for (int c = 0; c < model.spec.n_clusters; ++c)
      if (model.mixing[static_cast<std::size_t>(c)] > 0.0) last_positive = c;
    for (g = 0; g < last_positive; ++g) {
      cumulative += model.mixing[static_cast<std::size_t>(g)];
      if (u < cumulative) break;
    }
    z = g;
  }
  auto panel = simulate_balarm_labeled(model, labels, n, seed, options);
  return {std::move(panel), std::move(labels)};
}

}  // namespace balarm
