#pragma once

// Shared domain types of the BALARM model (a finite mixture of logistic
// autoregressive binary time series) and the scalar kernels every other
// module builds on.

#include <cmath>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace balarm {

/// Structural hyperparameters of a BALARM model.
struct ModelSpec {
  int n_clusters = 1;      ///< G
  int ar_order = 1;        ///< K, number of autoregressive lags
  int harmonic_order = 0;  ///< H, number of cos/sin pairs
  int period = 288;        ///< P, time steps per cycle

  int harmonic_dim() const { return 2 * harmonic_order; }
  /// Length of a design row: 2H harmonics, K lags, one intercept.
  int covariate_dim() const { return 2 * harmonic_order + ar_order + 1; }

  void validate() const;

  friend bool operator==(const ModelSpec&, const ModelSpec&) = default;
};

/// Coefficients of one link community.
struct ClusterParams {
  std::vector<double> harmonic;  // a_1..a_2H, (cos m, sin m) interleaved
  std::vector<double> ar;        // b_1..b_K
  double intercept = 0.0;        // c

  static ClusterParams zeros(const ModelSpec& spec);

  /// Flattened as (harmonic, ar, intercept), the design-row order.
  std::vector<double> to_vector() const;
  static ClusterParams from_vector(std::span<const double> values, const ModelSpec& spec);

  void validate(const ModelSpec& spec) const;

  friend bool operator==(const ClusterParams&, const ClusterParams&) = default;
};

struct BalarmModel {
  ModelSpec spec;
  std::vector<double> mixing;
  std::vector<ClusterParams> clusters;

  void validate() const;

  friend bool operator==(const BalarmModel&, const BalarmModel&) = default;
};

/// Unordered node pair stored with first < second. Nodes are 0-based.
struct NodePair {
  int first = 0;
  int second = 0;

  friend bool operator==(const NodePair&, const NodePair&) = default;
};

/// All N(N-1)/2 pairs in lexicographic order: (0,1), (0,2), ..., (N-2,N-1).
std::vector<NodePair> complete_edge_map(int n_nodes);

struct PanelMetadata {
  std::int64_t window_seconds = 0;  // 0 for synthetic panels
  std::int64_t t_start = 0;
  /// Added to a snapshot timestamp to get the harmonic time argument.
  std::int64_t phase_offset = 0;
  std::string phase_origin = "t_start";
};

/// J binary edge series of common length n on a regular unit-spaced grid.
class EdgePanel {
 public:
  EdgePanel() = default;

  /// `values` is row-major J x n. Throws ValidationError on non-binary values,
  /// irregular timestamps, or a malformed edge map.
  EdgePanel(std::size_t n_edges, std::size_t length, std::vector<std::uint8_t> values,
            std::vector<std::int64_t> timestamps, std::vector<NodePair> edge_map,
            std::vector<std::string> node_labels = {}, PanelMetadata metadata = {});

  /// Panel from raw series with timestamps first_time, first_time+1, ...
  /// The edge map is the first J pairs of the smallest complete node set.
  static EdgePanel from_series(const std::vector<std::vector<std::uint8_t>>& series,
                               std::int64_t first_time = 1);

  std::size_t n_edges() const { return n_edges_; }
  std::size_t length() const { return length_; }
  int n_nodes() const { return n_nodes_; }

  std::span<const std::uint8_t> series(std::size_t edge) const {
    return {values_.data() + edge * length_, length_};
  }
  std::uint8_t value(std::size_t edge, std::size_t l) const { return values_[edge * length_ + l]; }
  std::span<const std::uint8_t> values() const { return values_; }

  std::span<const std::int64_t> timestamps() const { return timestamps_; }
  std::int64_t harmonic_time(std::size_t l) const {
    return timestamps_[l] + metadata_.phase_offset;
  }

  NodePair edge_pair(std::size_t edge) const { return edge_map_[edge]; }
  const std::vector<NodePair>& edge_map() const { return edge_map_; }
  std::optional<std::size_t> edge_index(NodePair pair) const;

  const std::vector<std::string>& node_labels() const { return node_labels_; }
  const PanelMetadata& metadata() const { return metadata_; }

  /// Rows `order[0], order[1], ...` of this panel (a permutation or subset).
  EdgePanel select_edges(std::span<const std::size_t> order) const;

 private:
  std::size_t n_edges_ = 0;
  std::size_t length_ = 0;
  int n_nodes_ = 0;
  std::vector<std::uint8_t> values_;
  std::vector<std::int64_t> timestamps_;
  std::vector<NodePair> edge_map_;
  std::vector<std::string> node_labels_;
  PanelMetadata metadata_;
  std::unordered_map<std::uint64_t, std::size_t> pair_index_;
};

/// Settings and bookkeeping recorded alongside a fit.
struct FitInfo {
  std::string init_strategy;
  std::uint64_t seed = 0;
  double tol = 0.0;
  int max_iter = 0;
  double ridge = 0.0;
  std::vector<double> cluster_ridge;  // ridge in force per cluster at the end
  std::vector<bool> empty_clusters;   // frozen by the empty-cluster policy
  int n_restarts_used = 0;
  int n_failed_restarts = 0;
  int best_restart = 0;
  int mstep_nonconverged = 0;  // IRLS solves that hit their iteration limit
  bool ridge_escalated = false;
};

struct FitResult {
  BalarmModel model;
  Eigen::MatrixXd responsibilities;  // J x G
  std::vector<int> hard_labels;      // 0-based cluster index per edge
  /// Penalized observed log-likelihood per EM iteration (equals the observed
  /// log-likelihood when the ridge is zero).
  std::vector<double> loglik_trace;
  double loglik = 0.0;  // observed log-likelihood of `model`
  bool converged = false;
  int n_iters = 0;
  FitInfo info;
};

/// Row-wise argmax, ties to the lowest index.
std::vector<int> hard_labels(const Eigen::MatrixXd& responsibilities);

// --- kernels ---------------------------------------------------------------

/// (cos(2 pi m t / P), sin(2 pi m t / P)) for m = 1..H. Exactly P-periodic in t.
std::vector<double> harmonic_basis(std::int64_t t, int harmonic_order, int period);
void harmonic_basis(std::int64_t t, int harmonic_order, int period, std::span<double> out);

/// sum_d a_d f_d(t) + sum_k b_k x_{l-k} + c, with history = (x_{l-1}, ..., x_{l-K}).
double linear_predictor(std::span<const std::uint8_t> history, std::int64_t t,
                        const ClusterParams& params, const ModelSpec& spec);

inline double inv_logit(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

inline double logit(double p) { return std::log(p) - std::log1p(-p); }

/// log(1 + e^x) without overflow.
inline double log1p_exp(double x) {
  if (x > 0.0) return x + std::log1p(std::exp(-x));
  return std::log1p(std::exp(x));
}

/// x * eta - log(1 + e^eta).
inline double bernoulli_loglik_term(int x, double eta) {
  return (x != 0 ? eta : 0.0) - log1p_exp(eta);
}

/// Non-negative residue of t modulo period.
inline std::int64_t phase_of(std::int64_t t, int period) {
  const std::int64_t r = t % period;
  return r < 0 ? r + period : r;
}

}  // namespace balarm
