#pragma once

// Sample-path generation for ALARM / BALARM processes and the analysis of
// their marginal probabilities and lag-1 autocorrelations.

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

#include "balarm/model.hpp"

namespace balarm {

class Rng;

struct StationarySummary {
  double marginal_p = 0.0;
  double lag1_rho = 0.0;
};

/// Time-of-day marginal probability and lag-1 autocorrelation; index l is the
/// harmonic time modulo P.
struct CycloCurves {
  std::vector<double> p_curve;
  std::vector<double> rho_curve;
};

/// Stationary law of the two-state chain induced by ALARM(1) with
/// coefficients (b, c): p01 = logit^-1(c), p11 = logit^-1(b + c).
StationarySummary alarm1_stationary(double b, double c);

/// Cyclostationary fixed point of p_l = p_{l-1} pi1(l) + (1 - p_{l-1}) pi0(l)
/// around one period, where pi_x(l) is the on-probability after state x.
/// Requires K <= 1. `start` seeds the iteration; throws NumericalError after
/// 10,000 period sweeps without a 1e-12 sup-norm fixed point.
CycloCurves cyclo_curves(const ClusterParams& params, const ModelSpec& spec, double start = 0.5);

/// Draws x_l ~ Bernoulli(logit^-1(eta_l)) for l > K. The first K values are
/// `init`; index l has harmonic time first_time + l.
std::vector<std::uint8_t> simulate_alarm(const ClusterParams& params, const ModelSpec& spec,
                                         std::size_t n, std::uint64_t seed,
                                         std::span<const std::uint8_t> init,
                                         std::int64_t first_time = 1);
std::vector<std::uint8_t> simulate_alarm(const ClusterParams& params, const ModelSpec& spec,
                                         std::size_t n, Rng& rng,
                                         std::span<const std::uint8_t> init,
                                         std::int64_t first_time = 1);

struct SimulationOptions {
  /// Discarded warm-up steps before the retained series; default one period.
  std::optional<std::size_t> burn_in;
  /// Timestamp of the first retained snapshot.
  std::int64_t first_time = 1;
  /// Added to timestamps to form the harmonic time (copied into the panel).
  std::int64_t phase_offset = 0;
  int threads = 1;
};

/// One edge under `params`: K initial values drawn from the cyclostationary
/// marginal (K = 1) or from logit^-1 of the zero-history predictor (K != 1),
/// then burn-in, then n retained values.
std::vector<std::uint8_t> simulate_edge(const ClusterParams& params, const ModelSpec& spec,
                                        std::size_t n, std::uint64_t seed,
                                        const SimulationOptions& options = {});

struct SimulatedPanel {
  EdgePanel panel;
  std::vector<int> labels;  // 0-based true cluster per edge
};

/// Draws Z_i ~ Multinomial(pi), then each edge independently from its cluster.
/// Edge i uses the stream derive_seed(seed, {1, i}).
SimulatedPanel simulate_balarm(const BalarmModel& model, std::size_t n_edges, std::size_t n,
                               std::uint64_t seed, const SimulationOptions& options = {});

/// Same as simulate_balarm with the memberships given.
EdgePanel simulate_balarm_labeled(const BalarmModel& model, std::span<const int> labels,
                                  std::size_t n, std::uint64_t seed,
                                  const SimulationOptions& options = {});

}  // namespace balarm
