#pragma once

// BIC and the (G, H) grid sweep.

#include <cstdint>
#include <string>
#include <vector>

#include "balarm/em.hpp"

namespace balarm {

/// (G - 1) + G (2H + K + 1).
int free_parameters(const ModelSpec& spec);

/// J (n - K), the number of conditioned Bernoulli observations.
std::size_t bic_observations(const EdgePanel& panel, const ModelSpec& spec);

/// -2 loglik + q log(N_obs). Lower is better.
double bic(double loglik, int q, std::size_t n_obs);
double bic(const FitResult& fit, const EdgePanel& panel);

struct SweepRow {
  int n_clusters = 0;
  int harmonic_order = 0;
  double loglik = 0.0;
  int q = 0;
  std::size_t n_obs = 0;
  double bic = 0.0;
  bool converged = false;
  int n_restarts_used = 0;
  bool failed = false;
  std::string error;  // set when failed
  bool best = false;  // minimum BIC among rows that did not fail
};

struct SweepOptions {
  std::vector<int> cluster_counts;
  std::vector<int> harmonic_orders;
  int ar_order = 1;
  int period = 288;
  EmOptions em;  // em.seed is the master seed; em.threads bounds cell parallelism
};

/// Fits every (G, H) cell independently with seed derive_seed(seed, {G, H}).
/// Rows are ordered by G, then H. Failed cells are recorded, not thrown.
std::vector<SweepRow> sweep(const EdgePanel& panel, const SweepOptions& options);

}  // namespace balarm
