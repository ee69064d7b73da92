#pragma once

// Parametric bootstrap bands for the time-of-day curves of a fitted model.

#include <cstdint>
#include <span>
#include <string>
#include <vector>

#include <Eigen/Core>

#include "balarm/alarm.hpp"
#include "balarm/em.hpp"

namespace balarm {

struct BootstrapOptions {
  std::size_t n_edges = 0;  // J of each replicate
  std::size_t length = 0;   // n of each replicate
  int replicates = 100;     // B
  std::uint64_t seed = 1;
  /// Refit settings; init, provided_model and n_restarts are overridden
  /// (provided-model at the fitted model, one run).
  EmOptions em;
  /// Timestamps and phase offset of the replicate panels.
  SimulationOptions simulation;
  double rho_threshold = 0.04;
  double max_failure_fraction = 0.2;
  int threads = 1;
};

struct ClusterBands {
  std::vector<double> p_lo, p_med, p_hi, p_fit;
  std::vector<double> rho_lo, rho_med, rho_hi, rho_fit;
  /// max p_fit > rho_threshold; rho bands are meaningful only then.
  bool rho_reported = false;
  /// Mean over time of day of rho_med - rho_fit.
  double rho_bias = 0.0;
};

struct BootstrapBands {
  std::vector<ClusterBands> clusters;
  /// One row per successful replicate: (pi_1..pi_{G-1}, then every cluster's
  /// (harmonic, ar, intercept)), aligned to the fitted labels.
  Eigen::MatrixXd replicate_parameters;
  int n_requested = 0;
  int n_failed = 0;
  std::vector<std::string> failures;
};

/// Sample quantile, linear interpolation between order statistics (R type 7).
double quantile_type7(std::span<const double> sorted, double prob);

/// Replicate b = 1..B: simulate_balarm with seed derive_seed(seed, {b}), refit
/// from `model`, align labels to `model`, evaluate cyclo_curves. Failed refits
/// are dropped and counted; NumericalError when more than
/// max_failure_fraction of them fail. Requires K <= 1.
BootstrapBands parametric_bootstrap(const BalarmModel& model, const BootstrapOptions& options);

}  // namespace balarm
