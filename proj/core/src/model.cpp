#include "balarm/model.hpp"

#include <algorithm>
#include <numbers>

#include "balarm/error.hpp"

namespace balarm {

namespace {

std::uint64_t pair_key(NodePair p) {
  return (static_cast<std::uint64_t>(static_cast<std::uint32_t>(p.first)) << 32) |
         static_cast<std::uint32_t>(p.second);
}

bool all_finite(std::span<const double> v) {
  return std::all_of(v.begin(), v.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void ModelSpec::validate() const {
  require(n_clusters >= 1, "ModelSpec: n_clusters (G) must be >= 1");
  require(ar_order >= 0, "ModelSpec: ar_order (K) must be >= 0");
  require(harmonic_order >= 0, "ModelSpec: harmonic_order (H) must be >= 0");
  require(period >= 1, "ModelSpec: period (P) must be >= 1");
  require(harmonic_order == 0 || period >= 2, "ModelSpec: period (P) must be >= 2 when H > 0");
}

ClusterParams ClusterParams::zeros(const ModelSpec& spec) {
  ClusterParams p;
  p.harmonic.assign(spec.harmonic_dim(), 0.0);
  p.ar.assign(spec.ar_order, 0.0);
  return p;
}

std::vector<double> ClusterParams::to_vector() const {
  std::vector<double> v;
  v.reserve(harmonic.size() + ar.size() + 1);
  v.insert(v.end(), harmonic.begin(), harmonic.end());
  v.insert(v.end(), ar.begin(), ar.end());
  v.push_back(intercept);
  return v;
}

ClusterParams ClusterParams::from_vector(std::span<const double> values, const ModelSpec& spec) {
  require(values.size() == static_cast<std::size_t>(spec.covariate_dim()),
          "ClusterParams: coefficient vector has length " + std::to_string(values.size()) +
              ", expected " + std::to_string(spec.covariate_dim()));
  ClusterParams p;
  const auto h = static_cast<std::size_t>(spec.harmonic_dim());
  const auto k = static_cast<std::size_t>(spec.ar_order);
  p.harmonic.assign(values.begin(), values.begin() + h);
  p.ar.assign(values.begin() + h, values.begin() + h + k);
  p.intercept = values[h + k];
  return p;
}

void ClusterParams::validate(const ModelSpec& spec) const {
  require(harmonic.size() == static_cast<std::size_t>(spec.harmonic_dim()),
          "ClusterParams: expected " + std::to_string(spec.harmonic_dim()) +
              " harmonic coefficients, got " + std::to_string(harmonic.size()));
  require(ar.size() == static_cast<std::size_t>(spec.ar_order),
          "ClusterParams: expected " + std::to_string(spec.ar_order) +
              " autoregressive coefficients, got " + std::to_string(ar.size()));
  require(all_finite(harmonic) && all_finite(ar) && std::isfinite(intercept),
          "ClusterParams: coefficients must be finite");
}

void BalarmModel::validate() const {
  spec.validate();
  const auto g = static_cast<std::size_t>(spec.n_clusters);
  require(mixing.size() == g, "BalarmModel: mixing weights must have length G");
  require(clusters.size() == g, "BalarmModel: expected G cluster parameter sets");
  double total = 0.0;
  for (double w : mixing) {
    require(std::isfinite(w) && w >= 0.0, "BalarmModel: mixing weights must be non-negative");
    total += w;
  }
  require(std::abs(total - 1.0) <= 1e-12, "BalarmModel: mixing weights must sum to 1");
  for (const auto& c : clusters) c.validate(spec);
}

std::vector<NodePair> complete_edge_map(int n_nodes) {
  std::vector<NodePair> map;
  if (n_nodes < 2) return map;
  map.reserve(static_cast<std::size_t>(n_nodes) * (n_nodes - 1) / 2);
  for (int k = 0; k < n_nodes; ++k)
    for (int j = k + 1; j < n_nodes; ++j) map.push_back({k, j});
  return map;
}

EdgePanel::EdgePanel(std::size_t n_edges, std::size_t length, std::vector<std::uint8_t> values,
                     std::vector<std::int64_t> timestamps, std::vector<NodePair> edge_map,
                     std::vector<std::string> node_labels, PanelMetadata metadata)
    : n_edges_(n_edges),
      length_(length),
      values_(std::move(values)),
      timestamps_(std::move(timestamps)),
      edge_map_(std::move(edge_map)),
      node_labels_(std::move(node_labels)),
      metadata_(std::move(metadata)) {
  require(values_.size() == n_edges_ * length_, "EdgePanel: value matrix has the wrong size");
  require(timestamps_.size() == length_, "EdgePanel: need one timestamp per snapshot");
  require(edge_map_.size() == n_edges_, "EdgePanel: edge map must cover every edge");
  for (auto v : values_) require(v <= 1, "EdgePanel: values must be 0 or 1");
  for (std::size_t l = 1; l < length_; ++l) {
    require(timestamps_[l] == timestamps_[l - 1] + 1,
            "EdgePanel: timestamps must be consecutive (gap or disorder at snapshot " +
                std::to_string(l + 1) + ")");
  }
  pair_index_.reserve(n_edges_);
  for (std::size_t i = 0; i < n_edges_; ++i) {
    const NodePair p = edge_map_[i];
    require(p.first >= 0 && p.first < p.second, "EdgePanel: edge map pairs must satisfy k < j");
    require(pair_index_.emplace(pair_key(p), i).second, "EdgePanel: edge map is not injective");
    n_nodes_ = std::max(n_nodes_, p.second + 1);
  }
  if (!node_labels_.empty()) {
    require(node_labels_.size() >= static_cast<std::size_t>(n_nodes_),
            "EdgePanel: node labels must cover every node");
    n_nodes_ = static_cast<int>(node_labels_.size());
  }
}

EdgePanel EdgePanel::from_series(const std::vector<std::vector<std::uint8_t>>& series,
                                 std::int64_t first_time) {
  const std::size_t j = series.size();
  const std::size_t n = j == 0 ? 0 : series.front().size();
  std::vector<std::uint8_t> values;
  values.reserve(j * n);
  for (const auto& s : series) {
    require(s.size() == n, "EdgePanel: all series must have the same length");
    values.insert(values.end(), s.begin(), s.end());
  }
  std::vector<std::int64_t> times(n);
  for (std::size_t l = 0; l < n; ++l) times[l] = first_time + static_cast<std::int64_t>(l);

  int nodes = 2;
  while (static_cast<std::size_t>(nodes) * (nodes - 1) / 2 < j) ++nodes;
  auto map = complete_edge_map(nodes);
  map.resize(j);
  return EdgePanel(j, n, std::move(values), std::move(times), std::move(map));
}

std::optional<std::size_t> EdgePanel::edge_index(NodePair pair) const {
  if (pair.first > pair.second) std::swap(pair.first, pair.second);
  const auto it = pair_index_.find(pair_key(pair));
  if (it == pair_index_.end()) return std::nullopt;
  return it->second;
}

EdgePanel EdgePanel::select_edges(std::span<const std::size_t> order) const {
  std::vector<std::uint8_t> values;
  values.reserve(order.size() * length_);
  std::vector<NodePair> map;
  map.reserve(order.size());
  for (std::size_t i : order) {
    require(i < n_edges_, "EdgePanel::select_edges: index out of range");
    const auto s = series(i);
    values.insert(values.end(), s.begin(), s.end());
    map.push_back(edge_map_[i]);
  }
  return EdgePanel(order.size(), length_, std::move(values), timestamps_, std::move(map),
                   node_labels_, metadata_);
}

std::vector<int> hard_labels(const Eigen::MatrixXd& responsibilities) {
  std::vector<int> labels(static_cast<std::size_t>(responsibilities.rows()), 0);
  for (Eigen::Index i = 0; i < responsibilities.rows(); ++i) {
    int best = 0;
    for (Eigen::Index g = 1; g < responsibilities.cols(); ++g)
      if (responsibilities(i, g) > responsibilities(i, best)) best = static_cast<int>(g);
    labels[static_cast<std::size_t>(i)] = best;
  }
  return labels;
}

void harmonic_basis(std::int64_t t, int harmonic_order, int period, std::span<double> out) {
  require(out.size() == static_cast<std::size_t>(2 * harmonic_order),
          "harmonic_basis: output span must have length 2H");
  if (harmonic_order == 0) return;
  // Reduce m*t modulo P in integers so the basis is exactly periodic.
  const std::int64_t phase = phase_of(t, period);
  for (int m = 1; m <= harmonic_order; ++m) {
    const std::int64_t r = (static_cast<std::int64_t>(m) * phase) % period;
    const double angle = 2.0 * std::numbers::pi * static_cast<double>(r) / period;
    out[2 * (m - 1)] = std::cos(angle);
    out[2 * (m - 1) + 1] = std::sin(angle);
  }
}

std::vector<double> harmonic_basis(std::int64_t t, int harmonic_order, int period) {
  require(harmonic_order >= 0 && period >= 1, "harmonic_basis: need H >= 0 and P >= 1");
  std::vector<double> out(2 * static_cast<std::size_t>(harmonic_order));
  harmonic_basis(t, harmonic_order, period, out);
  return out;
}

double linear_predictor(std::span<const std::uint8_t> history, std::int64_t t,
                        const ClusterParams& params, const ModelSpec& spec) {
  require(history.size() == static_cast<std::size_t>(spec.ar_order),
          "linear_predictor: history length must equal K");
  require(params.ar.size() == history.size() &&
              params.harmonic.size() == static_cast<std::size_t>(spec.harmonic_dim()),
          "linear_predictor: parameter dimensions do not match the model spec");
  double eta = params.intercept;
  if (spec.harmonic_order > 0) {
    const auto basis = harmonic_basis(t, spec.harmonic_order, spec.period);
    for (std::size_t d = 0; d < basis.size(); ++d) eta += params.harmonic[d] * basis[d];
  }
  for (std::size_t k = 0; k < history.size(); ++k) {
    require(history[k] <= 1, "linear_predictor: history must be binary");
    if (history[k]) eta += params.ar[k];
  }
  return eta;
}

}  // namespace balarm
