#include "balarm/selection.hpp"

#include <cmath>

#include "balarm/error.hpp"
#include "balarm/parallel.hpp"
#include "balarm/rng.hpp"

namespace balarm {

int free_parameters(const ModelSpec& spec) {
  return (spec.n_clusters - 1) + spec.n_clusters * spec.covariate_dim();
}

std::size_t bic_observations(const EdgePanel& panel, const ModelSpec& spec) {
  const auto k = static_cast<std::size_t>(spec.ar_order);
  require(panel.length() > k, "bic: series length must exceed K");
  return panel.n_edges() * (panel.length() - k);
}

double bic(double loglik, int q, std::size_t n_obs) {
  require(n_obs > 0, "bic: need at least one observation");
  return -2.0 * loglik + static_cast<double>(q) * std::log(static_cast<double>(n_obs));
}

double bic(const FitResult& fit, const EdgePanel& panel) {
  const auto& spec = fit.model.spec;
  require(fit.responsibilities.rows() == static_cast<Eigen::Index>(panel.n_edges()),
          "bic: fit was produced on a panel with a different number of edges");
  return bic(fit.loglik, free_parameters(spec), bic_observations(panel, spec));
}

std::vector<SweepRow> sweep(const EdgePanel& panel, const SweepOptions& options) {
  require(!options.cluster_counts.empty() && !options.harmonic_orders.empty(),
          "sweep: G and H lists must be non-empty");
  std::vector<SweepRow> rows;
  for (int g : options.cluster_counts)
    for (int h : options.harmonic_orders) {
      SweepRow row;
      row.n_clusters = g;
      row.harmonic_order = h;
      rows.push_back(row);
    }

  // Cells run in parallel; each fit is single-threaded inside.
  parallel_for(rows.size(), options.em.threads, [&](std::size_t r) {
    SweepRow& row = rows[r];
    ModelSpec spec{row.n_clusters, options.ar_order, row.harmonic_order, options.period};
    EmOptions em = options.em;
    em.threads = 1;
    em.seed = derive_seed(options.em.seed, {static_cast<std::uint64_t>(row.n_clusters),
                                            static_cast<std::uint64_t>(row.harmonic_order)});
    try {
      spec.validate();
      row.q = free_parameters(spec);
      row.n_obs = bic_observations(panel, spec);
      const FitResult fit = fit_em(panel, spec, em);
      row.loglik = fit.loglik;
      row.bic = bic(row.loglik, row.q, row.n_obs);
      row.converged = fit.converged;
      row.n_restarts_used = fit.info.n_restarts_used;
    } catch (const std::exception& e) {
      row.failed = true;
      row.error = e.what();
    }
  });

  SweepRow* best = nullptr;
  for (auto& row : rows)
    if (!row.failed && (best == nullptr || row.bic < best->bic)) best = &row;
  if (best != nullptr) best->best = true;
  return rows;
}

}  // namespace balarm
