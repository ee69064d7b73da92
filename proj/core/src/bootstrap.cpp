#include "balarm/bootstrap.hpp"

#include <algorithm>
#include <cmath>
#include <optional>

#include "balarm/error.hpp"
#include "balarm/parallel.hpp"
#include "balarm/rng.hpp"

namespace balarm {

namespace {

struct Replicate {
  bool ok = false;
  std::string failure;
  std::vector<double> parameters;
  std::vector<CycloCurves> curves;
};

std::vector<double> flatten(const BalarmModel& model) {
  std::vector<double> out(model.mixing.begin(), model.mixing.end() - 1);
  for (const auto& c : model.clusters) {
    const auto v = c.to_vector();
    out.insert(out.end(), v.begin(), v.end());
  }
  return out;
}

}  // namespace

double quantile_type7(std::span<const double> sorted, double prob) {
  require(!sorted.empty(), "quantile: empty sample");
  require(prob >= 0.0 && prob <= 1.0, "quantile: probability outside [0, 1]");
  const double h = (static_cast<double>(sorted.size()) - 1.0) * prob;
  const auto lo = static_cast<std::size_t>(std::floor(h));
  if (lo + 1 >= sorted.size()) return sorted.back();
  return sorted[lo] + (h - static_cast<double>(lo)) * (sorted[lo + 1] - sorted[lo]);
}

BootstrapBands parametric_bootstrap(const BalarmModel& model, const BootstrapOptions& options) {
  model.validate();
  const auto& spec = model.spec;
  require(options.replicates >= 1, "bootstrap: need B >= 1");
  require(spec.ar_order <= 1, "bootstrap: curves require AR order K <= 1");
  require(options.n_edges >= static_cast<std::size_t>(spec.n_clusters),
          "bootstrap: need at least G edges per replicate");
  require(options.length > static_cast<std::size_t>(spec.ar_order),
          "bootstrap: replicate length must exceed K");

  const auto g_count = static_cast<std::size_t>(spec.n_clusters);
  std::vector<CycloCurves> fitted(g_count);
  for (std::size_t g = 0; g < g_count; ++g) fitted[g] = cyclo_curves(model.clusters[g], spec);

  EmOptions em = options.em;
  em.init = InitStrategy::ProvidedModel;
  em.provided_model = model;
  em.n_restarts = 1;
  em.threads = 1;
  SimulationOptions sim = options.simulation;
  sim.threads = 1;

  const auto b_count = static_cast<std::size_t>(options.replicates);
  std::vector<Replicate> reps(b_count);
  parallel_for(b_count, options.threads, [&](std::size_t b) {
    Replicate& rep = reps[b];
    try {
      const auto seed = derive_seed(options.seed, {static_cast<std::uint64_t>(b + 1)});
      const auto sample = simulate_balarm(model, options.n_edges, options.length, seed, sim);
      const FitResult fit = fit_em(sample.panel, spec, em);
      const auto perm = align_labels(model, fit.model);
      const BalarmModel aligned = permute_clusters(fit.model, perm);
      rep.parameters = flatten(aligned);
      for (const auto& c : aligned.clusters) rep.curves.push_back(cyclo_curves(c, spec));
      rep.ok = true;
    } catch (const NumericalError& e) {
      rep.failure = e.what();
    }
  });

  BootstrapBands out;
  out.n_requested = options.replicates;
  std::vector<const Replicate*> ok;
  for (std::size_t b = 0; b < b_count; ++b) {
    if (reps[b].ok) {
      ok.push_back(&reps[b]);
    } else {
      ++out.n_failed;
      out.failures.push_back("replicate " + std::to_string(b + 1) + ": " + reps[b].failure);
    }
  }
  const double failed_fraction = static_cast<double>(out.n_failed) / static_cast<double>(b_count);
  if (ok.empty() || failed_fraction > options.max_failure_fraction) {
    std::string msg = "bootstrap: " + std::to_string(out.n_failed) + " of " +
                      std::to_string(b_count) + " replicate fits failed";
    for (std::size_t f = 0; f < std::min<std::size_t>(out.failures.size(), 5); ++f)
      msg += "\n  " + out.failures[f];
    throw NumericalError(msg);
  }

  const auto q = ok.front()->parameters.size();
  out.replicate_parameters.resize(static_cast<Eigen::Index>(ok.size()), static_cast<Eigen::Index>(q));
  for (std::size_t r = 0; r < ok.size(); ++r)
    for (std::size_t d = 0; d < q; ++d)
      out.replicate_parameters(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(d)) =
          ok[r]->parameters[d];

  const auto period = static_cast<std::size_t>(spec.period);
  std::vector<double> ps(ok.size()), rs(ok.size());
  out.clusters.resize(g_count);
  for (std::size_t g = 0; g < g_count; ++g) {
    ClusterBands& band = out.clusters[g];
    band.p_fit = fitted[g].p_curve;
    band.rho_fit = fitted[g].rho_curve;
    band.rho_reported =
        *std::max_element(band.p_fit.begin(), band.p_fit.end()) > options.rho_threshold;
    for (auto* v : {&band.p_lo, &band.p_med, &band.p_hi, &band.rho_lo, &band.rho_med, &band.rho_hi})
      v->resize(period);
    double bias = 0.0;
    for (std::size_t l = 0; l < period; ++l) {
      for (std::size_t r = 0; r < ok.size(); ++r) {
        ps[r] = ok[r]->curves[g].p_curve[l];
        rs[r] = ok[r]->curves[g].rho_curve[l];
      }
      std::sort(ps.begin(), ps.end());
      std::sort(rs.begin(), rs.end());
      band.p_lo[l] = quantile_type7(ps, 0.025);
      band.p_med[l] = quantile_type7(ps, 0.5);
      band.p_hi[l] = quantile_type7(ps, 0.975);
      band.rho_lo[l] = quantile_type7(rs, 0.025);
      band.rho_med[l] = quantile_type7(rs, 0.5);
      band.rho_hi[l] = quantile_type7(rs, 0.975);
      bias += band.rho_med[l] - band.rho_fit[l];
    }
    band.rho_bias = bias / static_cast<double>(period);
  }
  return out;
}

}  // namespace balarm
