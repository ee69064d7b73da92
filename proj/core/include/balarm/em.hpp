#pragma once

// EM fitting of the BALARM mixture.
//
// The likelihood of an edge under a cluster depends on the edge only through
// counts of (phase, lag pattern, response) cells, so PanelStats compresses the
// panel once and the E- and M-steps work on those counts. The direct
// per-series routines (cluster_loglik on an EdgePanel) are kept as the
// reference path.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "balarm/glm.hpp"
#include "balarm/model.hpp"

namespace balarm {

class PanelStats {
 public:
  struct Entry {
    std::uint32_t cell = 0;
    std::uint32_t n0 = 0;  // responses equal to 0
    std::uint32_t n1 = 0;  // responses equal to 1
  };

  /// Requires n > K and K <= 32.
  PanelStats(const EdgePanel& panel, const ModelSpec& spec);

  std::size_t n_edges() const { return offsets_.size() - 1; }
  std::size_t n_cells() const { return n_cells_; }
  std::size_t dim() const { return dim_; }
  /// J * (n - K), the number of conditioned Bernoulli observations.
  std::size_t n_observations() const { return n_observations_; }

  std::span<const double> cell_covariates(std::size_t cell) const {
    return {covariates_.data() + cell * dim_, dim_};
  }
  std::span<const Entry> entries(std::size_t edge) const {
    return {entries_.data() + offsets_[edge], offsets_[edge + 1] - offsets_[edge]};
  }

  /// eta for every cell under the given coefficients.
  std::vector<double> cell_predictors(const ClusterParams& params) const;

  /// sum over the edge's observations of x eta - log(1 + e^eta).
  double edge_loglik(std::size_t edge, std::span<const double> cell_eta) const;

  /// Two rows per cell (y = 0, y = 1) weighted by sum_i w_i * count; rows with
  /// zero weight are dropped. Accumulates in edge order.
  Design weighted_design(std::span<const double> edge_weights) const;

 private:
  std::size_t dim_ = 0;
  std::size_t n_cells_ = 0;
  std::size_t n_observations_ = 0;
  std::vector<double> covariates_;
  std::vector<std::size_t> offsets_;
  std::vector<Entry> entries_;
};

/// Reference: sum_{l=K+1}^{n} bernoulli_loglik_term(x_il, eta_ilg) for one edge.
double cluster_loglik(const EdgePanel& panel, std::size_t edge, const ClusterParams& params,
                      const ModelSpec& spec);

/// J x G matrix of cluster_loglik values.
Eigen::MatrixXd cluster_logliks(const PanelStats& stats, const BalarmModel& model,
                                int threads = 1);

struct Posterior {
  Eigen::MatrixXd responsibilities;  // J x G
  double loglik = 0.0;               // sum_i logsumexp_g(log pi_g + L_ig)
};

/// Softmax over g of log pi_g + L_ig with max-subtraction; pi_g = 0 gives
/// responsibility exactly 0.
Posterior posterior(const Eigen::MatrixXd& cluster_ll, std::span<const double> mixing);

Eigen::MatrixXd e_step(const EdgePanel& panel, const BalarmModel& model, int threads = 1);
Eigen::MatrixXd e_step(const PanelStats& stats, const BalarmModel& model, int threads = 1);

double observed_loglik(const EdgePanel& panel, const BalarmModel& model);
double observed_loglik(const PanelStats& stats, const BalarmModel& model, int threads = 1);

/// Complete-data log-likelihood at fixed (0-based) memberships.
double complete_loglik(const EdgePanel& panel, const BalarmModel& model,
                       std::span<const int> labels);

struct MStepOptions {
  LogisticFitOptions glm;
  /// Ridge used for each cluster; empty means glm.ridge for all.
  std::vector<double> cluster_ridge;
  /// Escalation cap when a cluster's normal system is singular.
  double ridge_cap = 1e-2;
  int threads = 1;
};

struct MStepResult {
  BalarmModel model;
  std::vector<bool> empty;            // sum_i tau_ig < 1e-8 J: parameters kept
  std::vector<double> ridge_used;     // per cluster, after any escalation
  std::vector<LogisticFitStatus> status;
  int n_nonconverged = 0;  // non-empty clusters whose IRLS did not converge
  bool ridge_escalated = false;
};

/// pi_g = mean_i tau_ig; per-cluster weighted logistic fits warm-started at
/// `previous`. Singular systems escalate the ridge x10 (from at least 1e-6) up
/// to ridge_cap.
MStepResult m_step(const PanelStats& stats, const Eigen::MatrixXd& responsibilities,
                   const BalarmModel& previous, const MStepOptions& options = {});
BalarmModel m_step(const EdgePanel& panel, const Eigen::MatrixXd& responsibilities,
                   const ModelSpec& spec, const BalarmModel& previous);

enum class InitStrategy { RandomResponsibility, SummaryKMeans, ProvidedModel };

/// Accepts "random-responsibility" (or "random"), "summary-kmeans" (or
/// "kmeans"), "provided-model" (or "provided"); throws ValidationError otherwise.
InitStrategy parse_init_strategy(std::string_view name);
std::string_view to_string(InitStrategy strategy);

struct Initialization {
  std::optional<BalarmModel> model;
  std::optional<Eigen::MatrixXd> responsibilities;
};

/// Per-edge features used by summary-kmeans: logit of the clipped mean, lag-1
/// sample autocorrelation, and activity in 8 time-of-day bins.
Eigen::MatrixXd summary_features(const EdgePanel& panel, const ModelSpec& spec);

/// Lloyd's algorithm with k-means++ seeding on standardized rows of `features`.
std::vector<int> kmeans(const Eigen::MatrixXd& features, int k, std::uint64_t seed,
                        int max_iter = 100);

Initialization initialize(const EdgePanel& panel, const ModelSpec& spec, InitStrategy strategy,
                          std::uint64_t seed, const BalarmModel* provided = nullptr);

struct EmOptions {
  InitStrategy init = InitStrategy::SummaryKMeans;
  std::optional<BalarmModel> provided_model;
  /// 0 selects the default: 10 for random, 5 for kmeans, 1 for provided.
  int n_restarts = 0;
  std::uint64_t seed = 1;
  double tol = 1e-6;
  int max_iter = 500;
  LogisticFitOptions glm;
  double ridge_cap = 1e-2;
  int threads = 1;
};

int default_restarts(InitStrategy strategy);

/// Alternates E- and M-steps until the penalized observed log-likelihood
/// improves by less than tol, keeping the best restart by observed
/// log-likelihood. A restart fails when its log-likelihood is not finite or
/// the final M-step left a non-empty cluster unconverged; NumericalError when
/// every restart fails.
FitResult fit_em(const EdgePanel& panel, const ModelSpec& spec, const EmOptions& options = {});

/// Permutation perm with fitted cluster perm[g] matched to reference cluster g,
/// minimizing the total Euclidean distance between coefficient vectors.
std::vector<int> align_labels(const BalarmModel& reference, const BalarmModel& fitted);

/// Model whose cluster g is cluster perm[g] of `model`.
BalarmModel permute_clusters(const BalarmModel& model, std::span<const int> perm);

/// Minimum-cost perfect matching on a square cost matrix (Hungarian method);
/// result[r] is the column assigned to row r.
std::vector<int> solve_assignment(const Eigen::MatrixXd& cost);

double adjusted_rand_index(std::span<const int> a, std::span<const int> b);

}  // namespace balarm
