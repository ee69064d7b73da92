#include "balarm/em.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <sstream>
#include <unordered_map>

#include "balarm/error.hpp"
#include "balarm/parallel.hpp"
#include "balarm/rng.hpp"

namespace balarm {

namespace {

constexpr double kEmptyClusterFraction = 1e-8;
constexpr double kMixingFloor = 1e-10;

void check_model_matches(const BalarmModel& model, const ModelSpec& spec) {
  model.validate();
  require(model.spec == spec, "model spec (G, K, H, P) does not match the requested spec");
}

double ridge_penalty(const ClusterParams& params, double ridge) {
  double s = 0.0;
  for (double a : params.harmonic) s += a * a;
  for (double b : params.ar) s += b * b;
  return 0.5 * ridge * s;
}

}  // namespace

// --- PanelStats --------------------------------------------------------------

PanelStats::PanelStats(const EdgePanel& panel, const ModelSpec& spec) {
  spec.validate();
  const auto n = panel.length();
  const auto k = static_cast<std::size_t>(spec.ar_order);
  const auto h = static_cast<std::size_t>(spec.harmonic_dim());
  require(k <= 32, "PanelStats: AR order above 32 is not supported");
  require(n > k, "PanelStats: series length must exceed K");
  dim_ = h + k + 1;
  n_observations_ = panel.n_edges() * (n - k);

  const std::uint64_t mask = k == 0 ? 0 : (k == 64 ? ~0ULL : ((1ULL << k) - 1));
  std::vector<std::uint64_t> phase(n, 0);
  if (spec.harmonic_order > 0)
    for (std::size_t l = 0; l < n; ++l)
      phase[l] = static_cast<std::uint64_t>(phase_of(panel.harmonic_time(l), spec.period));

  std::unordered_map<std::uint64_t, std::uint32_t> cell_of;
  std::vector<std::uint32_t> n0, n1, touched;
  std::vector<double> row(dim_);
  offsets_.reserve(panel.n_edges() + 1);
  offsets_.push_back(0);
  for (std::size_t i = 0; i < panel.n_edges(); ++i) {
    const auto x = panel.series(i);
    std::uint64_t pattern = 0;
    for (std::size_t j = 0; j < k; ++j) pattern |= static_cast<std::uint64_t>(x[k - 1 - j]) << j;
    touched.clear();
    for (std::size_t l = k; l < n; ++l) {
      if (l > k) pattern = ((pattern << 1) | x[l - 1]) & mask;
      const std::uint64_t key = (phase[l] << 32) | pattern;
      auto [it, inserted] = cell_of.try_emplace(key, static_cast<std::uint32_t>(n_cells_));
      if (inserted) {
        harmonic_basis(static_cast<std::int64_t>(phase[l]), spec.harmonic_order, spec.period,
                       std::span<double>(row.data(), h));
        for (std::size_t j = 0; j < k; ++j) row[h + j] = static_cast<double>((pattern >> j) & 1U);
        row[h + k] = 1.0;
        covariates_.insert(covariates_.end(), row.begin(), row.end());
        ++n_cells_;
        n0.push_back(0);
        n1.push_back(0);
      }
      const std::uint32_t c = it->second;
      if (n0[c] == 0 && n1[c] == 0) touched.push_back(c);
      (x[l] ? n1[c] : n0[c]) += 1;
    }
    std::sort(touched.begin(), touched.end());
    for (std::uint32_t c : touched) {
      entries_.push_back({c, n0[c], n1[c]});
      n0[c] = 0;
      n1[c] = 0;
    }
    offsets_.push_back(entries_.size());
  }
}

std::vector<double> PanelStats::cell_predictors(const ClusterParams& params) const {
  const auto v = params.to_vector();
  require(v.size() == dim_, "PanelStats: coefficient vector has the wrong length");
  std::vector<double> eta(n_cells_);
  for (std::size_t c = 0; c < n_cells_; ++c) {
    const auto x = cell_covariates(c);
    double s = 0.0;
    for (std::size_t d = 0; d < dim_; ++d) s += x[d] * v[d];
    eta[c] = s;
  }
  return eta;
}

double PanelStats::edge_loglik(std::size_t edge, std::span<const double> cell_eta) const {
  double s = 0.0;
  for (const Entry& e : entries(edge)) {
    const double eta = cell_eta[e.cell];
    s += static_cast<double>(e.n1) * eta -
         static_cast<double>(e.n0 + e.n1) * log1p_exp(eta);
  }
  return s;
}

Design PanelStats::weighted_design(std::span<const double> edge_weights) const {
  require(edge_weights.size() == n_edges(), "PanelStats: one weight per edge");
  std::vector<double> w0(n_cells_, 0.0), w1(n_cells_, 0.0);
  for (std::size_t i = 0; i < n_edges(); ++i) {
    const double w = edge_weights[i];
    if (w == 0.0) continue;
    for (const Entry& e : entries(i)) {
      w0[e.cell] += w * e.n0;
      w1[e.cell] += w * e.n1;
    }
  }
  Design design(dim_);
  design.reserve(2 * n_cells_);
  for (std::size_t c = 0; c < n_cells_; ++c) {
    if (w0[c] > 0.0) design.add_row(cell_covariates(c), 0, w0[c]);
    if (w1[c] > 0.0) design.add_row(cell_covariates(c), 1, w1[c]);
  }
  return design;
}

// --- likelihoods -------------------------------------------------------------

double cluster_loglik(const EdgePanel& panel, std::size_t edge, const ClusterParams& params,
                      const ModelSpec& spec) {
  spec.validate();
  params.validate(spec);
  const auto n = panel.length();
  const auto k = static_cast<std::size_t>(spec.ar_order);
  require(n > k, "cluster_loglik: series length must exceed K");
  require(edge < panel.n_edges(), "cluster_loglik: edge index out of range");
  const auto x = panel.series(edge);
  std::vector<std::uint8_t> history(k);
  double s = 0.0;
  for (std::size_t l = k; l < n; ++l) {
    for (std::size_t j = 0; j < k; ++j) history[j] = x[l - 1 - j];
    s += bernoulli_loglik_term(x[l], linear_predictor(history, panel.harmonic_time(l), params, spec));
  }
  return s;
}

Eigen::MatrixXd cluster_logliks(const PanelStats& stats, const BalarmModel& model, int threads) {
  const auto g_count = model.clusters.size();
  std::vector<std::vector<double>> eta(g_count);
  for (std::size_t g = 0; g < g_count; ++g) eta[g] = stats.cell_predictors(model.clusters[g]);
  Eigen::MatrixXd out(static_cast<Eigen::Index>(stats.n_edges()),
                      static_cast<Eigen::Index>(g_count));
  parallel_for(stats.n_edges(), threads, [&](std::size_t i) {
    for (std::size_t g = 0; g < g_count; ++g)
      out(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(g)) =
          stats.edge_loglik(i, eta[g]);
  });
  return out;
}

Posterior posterior(const Eigen::MatrixXd& cluster_ll, std::span<const double> mixing) {
  const Eigen::Index j = cluster_ll.rows();
  const Eigen::Index g_count = cluster_ll.cols();
  require(static_cast<std::size_t>(g_count) == mixing.size(),
          "posterior: mixing weights do not match the number of clusters");
  std::vector<double> log_pi(mixing.size());
  for (std::size_t g = 0; g < mixing.size(); ++g)
    log_pi[g] = mixing[g] > 0.0 ? std::log(mixing[g]) : -std::numeric_limits<double>::infinity();

  Posterior out{Eigen::MatrixXd::Zero(j, g_count), 0.0};
  std::vector<double> a(mixing.size());
  for (Eigen::Index i = 0; i < j; ++i) {
    double m = -std::numeric_limits<double>::infinity();
    for (Eigen::Index g = 0; g < g_count; ++g) {
      const auto gs = static_cast<std::size_t>(g);
      a[gs] = mixing[gs] > 0.0 ? log_pi[gs] + cluster_ll(i, g)
                               : -std::numeric_limits<double>::infinity();
      m = std::max(m, a[gs]);
    }
    double total = 0.0;
    for (Eigen::Index g = 0; g < g_count; ++g) {
      const auto gs = static_cast<std::size_t>(g);
      if (mixing[gs] > 0.0) total += std::exp(a[gs] - m);
    }
    for (Eigen::Index g = 0; g < g_count; ++g) {
      const auto gs = static_cast<std::size_t>(g);
      out.responsibilities(i, g) = mixing[gs] > 0.0 ? std::exp(a[gs] - m) / total : 0.0;
    }
    out.loglik += m + std::log(total);
  }
  return out;
}

Eigen::MatrixXd e_step(const PanelStats& stats, const BalarmModel& model, int threads) {
  model.validate();
  return posterior(cluster_logliks(stats, model, threads), model.mixing).responsibilities;
}

Eigen::MatrixXd e_step(const EdgePanel& panel, const BalarmModel& model, int threads) {
  model.validate();
  return e_step(PanelStats(panel, model.spec), model, threads);
}

double observed_loglik(const PanelStats& stats, const BalarmModel& model, int threads) {
  model.validate();
  return posterior(cluster_logliks(stats, model, threads), model.mixing).loglik;
}

double observed_loglik(const EdgePanel& panel, const BalarmModel& model) {
  model.validate();
  return observed_loglik(PanelStats(panel, model.spec), model);
}

double complete_loglik(const EdgePanel& panel, const BalarmModel& model,
                       std::span<const int> labels) {
  model.validate();
  require(labels.size() == panel.n_edges(), "complete_loglik: one label per edge");
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    require(labels[i] >= 0 && labels[i] < model.spec.n_clusters,
            "complete_loglik: label out of range");
    const auto g = static_cast<std::size_t>(labels[i]);
    s += std::log(model.mixing[g]) + cluster_loglik(panel, i, model.clusters[g], model.spec);
  }
  return s;
}

// --- M-step ------------------------------------------------------------------

MStepResult m_step(const PanelStats& stats, const Eigen::MatrixXd& responsibilities,
                   const BalarmModel& previous, const MStepOptions& options) {
  previous.validate();
  const auto& spec = previous.spec;
  const auto g_count = static_cast<std::size_t>(spec.n_clusters);
  const auto j = stats.n_edges();
  require(responsibilities.rows() == static_cast<Eigen::Index>(j) &&
              responsibilities.cols() == static_cast<Eigen::Index>(g_count),
          "m_step: responsibilities must be J x G");
  require(stats.dim() == static_cast<std::size_t>(spec.covariate_dim()),
          "m_step: panel statistics were built for a different spec");
  for (Eigen::Index i = 0; i < responsibilities.rows(); ++i)
    require(std::abs(responsibilities.row(i).sum() - 1.0) <= 1e-8,
            "m_step: responsibility rows must sum to 1");

  MStepResult out;
  out.model = previous;
  out.empty.assign(g_count, false);
  out.status.assign(g_count, LogisticFitStatus::Converged);
  out.ridge_used = options.cluster_ridge;
  if (out.ridge_used.empty()) out.ridge_used.assign(g_count, options.glm.ridge);
  require(out.ridge_used.size() == g_count, "m_step: need one ridge value per cluster");

  const Eigen::VectorXd mass = responsibilities.colwise().sum().transpose();
  for (std::size_t g = 0; g < g_count; ++g)
    out.model.mixing[g] = mass(static_cast<Eigen::Index>(g)) / static_cast<double>(j);
  // Make the weights sum to 1 to working precision.
  double total = 0.0;
  for (double w : out.model.mixing) total += w;
  for (double& w : out.model.mixing) w /= total;

  std::vector<bool> escalated(g_count, false);
  parallel_for(g_count, options.threads, [&](std::size_t g) {
    if (mass(static_cast<Eigen::Index>(g)) < kEmptyClusterFraction * static_cast<double>(j)) {
      out.empty[g] = true;
      return;
    }
    const Eigen::VectorXd w = responsibilities.col(static_cast<Eigen::Index>(g));
    const Design design = stats.weighted_design(std::span<const double>(w.data(), j));
    const auto init = previous.clusters[g].to_vector();
    LogisticFitOptions glm = options.glm;
    glm.ridge = out.ridge_used[g];
    LogisticFit fit = weighted_logistic_fit(design, init, glm);
    while (fit.status == LogisticFitStatus::Singular && glm.ridge < options.ridge_cap) {
      glm.ridge = std::min(options.ridge_cap, std::max(glm.ridge * 10.0, 1e-6));
      escalated[g] = true;
      fit = weighted_logistic_fit(design, init, glm);
    }
    out.ridge_used[g] = glm.ridge;
    out.status[g] = fit.status;
    out.model.clusters[g] = ClusterParams::from_vector(fit.coefficients, spec);
  });
  for (std::size_t g = 0; g < g_count; ++g) {
    if (!out.empty[g] && out.status[g] != LogisticFitStatus::Converged) ++out.n_nonconverged;
    out.ridge_escalated = out.ridge_escalated || escalated[g];
  }
  return out;
}

BalarmModel m_step(const EdgePanel& panel, const Eigen::MatrixXd& responsibilities,
                   const ModelSpec& spec, const BalarmModel& previous) {
  check_model_matches(previous, spec);
  return m_step(PanelStats(panel, spec), responsibilities, previous).model;
}

// --- EM driver ---------------------------------------------------------------

InitStrategy parse_init_strategy(std::string_view name) {
  if (name == "random-responsibility" || name == "random") return InitStrategy::RandomResponsibility;
  if (name == "summary-kmeans" || name == "kmeans") return InitStrategy::SummaryKMeans;
  if (name == "provided-model" || name == "provided") return InitStrategy::ProvidedModel;
  throw ValidationError("unknown initialization strategy '" + std::string(name) +
                        "' (expected random-responsibility, summary-kmeans or provided-model)");
}

std::string_view to_string(InitStrategy strategy) {
  switch (strategy) {
    case InitStrategy::RandomResponsibility: return "random-responsibility";
    case InitStrategy::SummaryKMeans: return "summary-kmeans";
    case InitStrategy::ProvidedModel: return "provided-model";
  }
  return "unknown";
}

int default_restarts(InitStrategy strategy) {
  switch (strategy) {
    case InitStrategy::RandomResponsibility: return 10;
    case InitStrategy::SummaryKMeans: return 5;
    case InitStrategy::ProvidedModel: return 1;
  }
  return 1;
}

namespace {

struct RunOutcome {
  FitResult fit;
  bool ok = false;
  std::string failure;
};

void floor_mixing(BalarmModel& model, const std::vector<bool>& empty) {
  bool changed = false;
  for (std::size_t g = 0; g < empty.size(); ++g) {
    if (empty[g] && model.mixing[g] < kMixingFloor) {
      model.mixing[g] = kMixingFloor;
      changed = true;
    }
  }
  if (!changed) return;
  double total = 0.0;
  for (double w : model.mixing) total += w;
  for (double& w : model.mixing) w /= total;
}

double total_penalty(const BalarmModel& model, const std::vector<double>& ridge) {
  double s = 0.0;
  for (std::size_t g = 0; g < model.clusters.size(); ++g)
    s += ridge_penalty(model.clusters[g], ridge[g]);
  return s;
}

RunOutcome run_em(const EdgePanel& panel, const PanelStats& stats, const ModelSpec& spec,
                  const EmOptions& options, std::uint64_t seed) {
  RunOutcome run;
  FitResult& fit = run.fit;
  const auto g_count = static_cast<std::size_t>(spec.n_clusters);

  MStepOptions mopts;
  mopts.glm = options.glm;
  mopts.cluster_ridge.assign(g_count, options.glm.ridge);
  mopts.ridge_cap = options.ridge_cap;
  mopts.threads = options.threads;

  const Initialization init = initialize(
      panel, spec, options.init, seed, options.provided_model ? &*options.provided_model : nullptr);

  std::vector<bool> ever_empty(g_count, false);
  int last_nonconverged = 0;
  BalarmModel model;
  if (init.model) {
    model = *init.model;
  } else {
    BalarmModel start{spec, std::vector<double>(g_count, 1.0 / static_cast<double>(g_count)),
                      std::vector<ClusterParams>(g_count, ClusterParams::zeros(spec))};
    auto ms = m_step(stats, *init.responsibilities, start, mopts);
    model = std::move(ms.model);
    mopts.cluster_ridge = ms.ridge_used;
    for (std::size_t g = 0; g < g_count; ++g) ever_empty[g] = ever_empty[g] || ms.empty[g];
    floor_mixing(model, ms.empty);
    last_nonconverged = ms.n_nonconverged;
    fit.info.mstep_nonconverged += ms.n_nonconverged;
    fit.info.ridge_escalated = fit.info.ridge_escalated || ms.ridge_escalated;
  }

  Posterior post;
  int n_msteps = 0;
  for (;;) {
    post = posterior(cluster_logliks(stats, model, options.threads), model.mixing);
    const double objective = post.loglik - total_penalty(model, mopts.cluster_ridge);
    if (!std::isfinite(objective)) {
      run.failure = "non-finite log-likelihood after " + std::to_string(n_msteps) + " iterations";
      return run;
    }
    fit.loglik_trace.push_back(objective);
    const auto t = fit.loglik_trace.size();
    if (t > 1 && fit.loglik_trace[t - 1] - fit.loglik_trace[t - 2] < options.tol) {
      fit.converged = true;
      break;
    }
    if (n_msteps >= options.max_iter) break;
    auto ms = m_step(stats, post.responsibilities, model, mopts);
    model = std::move(ms.model);
    mopts.cluster_ridge = ms.ridge_used;
    for (std::size_t g = 0; g < g_count; ++g) ever_empty[g] = ever_empty[g] || ms.empty[g];
    floor_mixing(model, ms.empty);
    last_nonconverged = ms.n_nonconverged;
    fit.info.mstep_nonconverged += ms.n_nonconverged;
    fit.info.ridge_escalated = fit.info.ridge_escalated || ms.ridge_escalated;
    ++n_msteps;
  }

  fit.model = std::move(model);
  fit.responsibilities = std::move(post.responsibilities);
  fit.hard_labels = hard_labels(fit.responsibilities);
  fit.loglik = post.loglik;
  fit.n_iters = n_msteps;
  fit.info.cluster_ridge = mopts.cluster_ridge;
  fit.info.empty_clusters = ever_empty;
  if (last_nonconverged > 0) {
    run.failure = "final M-step left " + std::to_string(last_nonconverged) +
                  " cluster fit(s) unconverged";
    return run;
  }
  run.ok = true;
  return run;
}

}  // namespace

FitResult fit_em(const EdgePanel& panel, const ModelSpec& spec, const EmOptions& options) {
  spec.validate();
  require(panel.length() > static_cast<std::size_t>(spec.ar_order),
          "fit_em: series length must exceed K");
  require(panel.n_edges() >= static_cast<std::size_t>(spec.n_clusters),
          "fit_em: need at least as many edges as clusters");
  require(options.tol >= 0.0 && options.max_iter >= 0, "fit_em: invalid tolerance or iteration cap");
  if (options.init == InitStrategy::ProvidedModel) {
    require(options.provided_model.has_value(), "fit_em: provided-model init needs a model");
    check_model_matches(*options.provided_model, spec);
  }

  const PanelStats stats(panel, spec);
  const int restarts = options.n_restarts > 0 ? options.n_restarts : default_restarts(options.init);

  std::optional<RunOutcome> best;
  int best_index = -1;
  int failed = 0;
  std::ostringstream failures;
  for (int r = 0; r < restarts; ++r) {
    RunOutcome run;
    try {
      run = run_em(panel, stats, spec, options, derive_seed(options.seed, {static_cast<std::uint64_t>(r)}));
    } catch (const NumericalError& e) {
      run.failure = e.what();
    }
    if (!run.ok) {
      ++failed;
      failures << "\n  restart " << r << ": " << run.failure;
      continue;
    }
    if (!best || run.fit.loglik > best->fit.loglik) {
      best = std::move(run);
      best_index = r;
    }
  }
  if (!best)
    throw NumericalError("fit_em: all " + std::to_string(restarts) + " restart(s) failed" +
                         failures.str());

  FitResult fit = std::move(best->fit);
  fit.info.init_strategy = std::string(to_string(options.init));
  fit.info.seed = options.seed;
  fit.info.tol = options.tol;
  fit.info.max_iter = options.max_iter;
  fit.info.ridge = options.glm.ridge;
  fit.info.n_restarts_used = restarts;
  fit.info.n_failed_restarts = failed;
  fit.info.best_restart = best_index;
  return fit;
}

// --- label alignment and agreement ------------------------------------------

std::vector<int> solve_assignment(const Eigen::MatrixXd& cost) {
  require(cost.rows() == cost.cols(), "solve_assignment: cost matrix must be square");
  const auto n = static_cast<std::size_t>(cost.rows());
  const double inf = std::numeric_limits<double>::infinity();
  // Potentials method, 1-based with a dummy column 0.
  std::vector<double> u(n + 1, 0.0), v(n + 1, 0.0);
  std::vector<std::size_t> match(n + 1, 0), way(n + 1, 0);
  for (std::size_t i = 1; i <= n; ++i) {
    match[0] = i;
    std::size_t j0 = 0;
    std::vector<double> minv(n + 1, inf);
    std::vector<bool> used(n + 1, false);
    do {
      used[j0] = true;
      const std::size_t i0 = match[j0];
      double delta = inf;
      std::size_t j1 = 0;
      for (std::size_t j = 1; j <= n; ++j) {
        if (used[j]) continue;
        const double cur = cost(static_cast<Eigen::Index>(i0 - 1), static_cast<Eigen::Index>(j - 1)) -
                           u[i0] - v[j];
        if (cur < minv[j]) {
          minv[j] = cur;
          way[j] = j0;
        }
        if (minv[j] < delta) {
          delta = minv[j];
          j1 = j;
        }
      }
      for (std::size_t j = 0; j <= n; ++j) {
        if (used[j]) {
          u[match[j]] += delta;
          v[j] -= delta;
        } else {
          minv[j] -= delta;
        }
      }
      j0 = j1;
    } while (match[j0] != 0);
    do {
      const std::size_t j1 = way[j0];
      match[j0] = match[j1];
      j0 = j1;
    } while (j0 != 0);
  }
  std::vector<int> result(n, 0);
  for (std::size_t j = 1; j <= n; ++j) result[match[j] - 1] = static_cast<int>(j - 1);
  return result;
}

std::vector<int> align_labels(const BalarmModel& reference, const BalarmModel& fitted) {
  require(reference.spec.n_clusters == fitted.spec.n_clusters,
          "align_labels: models must have the same number of clusters");
  const auto g_count = static_cast<Eigen::Index>(reference.spec.n_clusters);
  Eigen::MatrixXd cost(g_count, g_count);
  for (Eigen::Index r = 0; r < g_count; ++r) {
    const auto a = reference.clusters[static_cast<std::size_t>(r)].to_vector();
    for (Eigen::Index f = 0; f < g_count; ++f) {
      const auto b = fitted.clusters[static_cast<std::size_t>(f)].to_vector();
      require(a.size() == b.size(), "align_labels: cluster dimensions differ");
      double s = 0.0;
      for (std::size_t d = 0; d < a.size(); ++d) s += (a[d] - b[d]) * (a[d] - b[d]);
      cost(r, f) = std::sqrt(s);
    }
  }
  return solve_assignment(cost);
}

BalarmModel permute_clusters(const BalarmModel& model, std::span<const int> perm) {
  require(perm.size() == model.clusters.size(), "permute_clusters: permutation has the wrong length");
  std::vector<bool> seen(perm.size(), false);
  BalarmModel out = model;
  for (std::size_t g = 0; g < perm.size(); ++g) {
    const int src = perm[g];
    require(src >= 0 && static_cast<std::size_t>(src) < perm.size() && !seen[static_cast<std::size_t>(src)],
            "permute_clusters: not a permutation");
    seen[static_cast<std::size_t>(src)] = true;
    out.clusters[g] = model.clusters[static_cast<std::size_t>(src)];
    out.mixing[g] = model.mixing[static_cast<std::size_t>(src)];
  }
  return out;
}

double adjusted_rand_index(std::span<const int> a, std::span<const int> b) {
  require(a.size() == b.size(), "adjusted_rand_index: labelings differ in length");
  const auto n = static_cast<double>(a.size());
  if (a.size() < 2) return 1.0;
  std::map<std::pair<int, int>, double> joint;
  std::map<int, double> rows, cols;
  for (std::size_t i = 0; i < a.size(); ++i) {
    joint[{a[i], b[i]}] += 1.0;
    rows[a[i]] += 1.0;
    cols[b[i]] += 1.0;
  }
  auto choose2 = [](double x) { return 0.5 * x * (x - 1.0); };
  double index = 0.0, sum_rows = 0.0, sum_cols = 0.0;
  for (const auto& [key, count] : joint) index += choose2(count);
  for (const auto& [key, count] : rows) sum_rows += choose2(count);
  for (const auto& [key, count] : cols) sum_cols += choose2(count);
  const double expected = sum_rows * sum_cols / choose2(n);
  const double maximum = 0.5 * (sum_rows + sum_cols);
  if (maximum == expected) return 1.0;
  return (index - expected) / (maximum - expected);
}

}  // namespace balarm
