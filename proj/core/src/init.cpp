#include <algorithm>
#include <cmath>
#include <limits>

#include "balarm/em.hpp"
#include "balarm/error.hpp"
#include "balarm/rng.hpp"

namespace balarm {

namespace {

constexpr int kPhaseBins = 8;

Eigen::MatrixXd standardize(const Eigen::MatrixXd& features) {
  std::vector<Eigen::Index> keep;
  const auto rows = features.rows();
  Eigen::VectorXd mean = features.colwise().mean().transpose();
  Eigen::VectorXd sd(features.cols());
  for (Eigen::Index c = 0; c < features.cols(); ++c) {
    const double v = (features.col(c).array() - mean(c)).square().sum() / static_cast<double>(rows);
    sd(c) = std::sqrt(v);
    if (sd(c) > 1e-12) keep.push_back(c);
  }
  Eigen::MatrixXd out(rows, static_cast<Eigen::Index>(keep.size()));
  for (std::size_t k = 0; k < keep.size(); ++k) {
    const auto c = keep[k];
    out.col(static_cast<Eigen::Index>(k)) = (features.col(c).array() - mean(c)) / sd(c);
  }
  return out;
}

}  // namespace

Eigen::MatrixXd summary_features(const EdgePanel& panel, const ModelSpec& spec) {
  spec.validate();
  const auto n = panel.length();
  require(n >= 2, "summary_features: series length must be at least 2");
  Eigen::MatrixXd out(static_cast<Eigen::Index>(panel.n_edges()), 2 + kPhaseBins);

  std::vector<int> bin(n);
  std::vector<double> bin_size(kPhaseBins, 0.0);
  for (std::size_t l = 0; l < n; ++l) {
    bin[l] = static_cast<int>(phase_of(panel.harmonic_time(l), spec.period) * kPhaseBins /
                              spec.period);
    bin_size[static_cast<std::size_t>(bin[l])] += 1.0;
  }
  const double lo = 0.5 / static_cast<double>(n);

  for (std::size_t i = 0; i < panel.n_edges(); ++i) {
    const auto x = panel.series(i);
    const auto r = static_cast<Eigen::Index>(i);
    double ones = 0.0;
    std::vector<double> bin_ones(kPhaseBins, 0.0);
    for (std::size_t l = 0; l < n; ++l) {
      ones += x[l];
      bin_ones[static_cast<std::size_t>(bin[l])] += x[l];
    }
    const double mean = ones / static_cast<double>(n);
    out(r, 0) = logit(std::clamp(mean, lo, 1.0 - lo));

    double num = 0.0, den = 0.0;
    for (std::size_t l = 0; l < n; ++l) {
      const double d = x[l] - mean;
      den += d * d;
      if (l > 0) num += d * (x[l - 1] - mean);
    }
    out(r, 1) = den > 0.0 ? num / den : 0.0;

    for (int b = 0; b < kPhaseBins; ++b) {
      const auto bs = static_cast<std::size_t>(b);
      out(r, 2 + b) = bin_size[bs] > 0.0 ? bin_ones[bs] / bin_size[bs] : 0.0;
    }
  }
  return out;
}

std::vector<int> kmeans(const Eigen::MatrixXd& features, int k, std::uint64_t seed, int max_iter) {
  const auto rows = features.rows();
  require(k >= 1, "kmeans: k must be positive");
  require(rows >= k, "kmeans: need at least k rows");
  std::vector<int> labels(static_cast<std::size_t>(rows), 0);
  if (k == 1) return labels;

  const Eigen::MatrixXd x = standardize(features);
  const auto cols = x.cols();
  Rng rng(seed);

  // k-means++ seeding.
  Eigen::MatrixXd centers(k, cols);
  centers.row(0) = x.row(static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(rows))));
  Eigen::VectorXd d2(rows);
  for (Eigen::Index i = 0; i < rows; ++i) d2(i) = (x.row(i) - centers.row(0)).squaredNorm();
  for (int c = 1; c < k; ++c) {
    const double total = d2.sum();
    Eigen::Index pick = 0;
    if (total > 0.0) {
      const double u = rng.uniform() * total;
      double acc = 0.0;
      pick = rows - 1;
      for (Eigen::Index i = 0; i < rows; ++i) {
        acc += d2(i);
        if (u < acc && d2(i) > 0.0) {
          pick = i;
          break;
        }
      }
    } else {
      pick = static_cast<Eigen::Index>(rng.below(static_cast<std::uint64_t>(rows)));
    }
    centers.row(c) = x.row(pick);
    for (Eigen::Index i = 0; i < rows; ++i)
      d2(i) = std::min(d2(i), (x.row(i) - centers.row(c)).squaredNorm());
  }

  std::vector<int> counts(static_cast<std::size_t>(k));
  for (int iter = 0; iter < max_iter; ++iter) {
    bool changed = iter == 0;
    Eigen::VectorXd own(rows);
    for (Eigen::Index i = 0; i < rows; ++i) {
      int best = 0;
      double best_d = std::numeric_limits<double>::infinity();
      for (int c = 0; c < k; ++c) {
        const double d = (x.row(i) - centers.row(c)).squaredNorm();
        if (d < best_d) {
          best_d = d;
          best = c;
        }
      }
      auto& z = labels[static_cast<std::size_t>(i)];
      changed = changed || z != best;
      z = best;
      own(i) = best_d;
    }

    std::fill(counts.begin(), counts.end(), 0);
    for (int z : labels) ++counts[static_cast<std::size_t>(z)];
    // Empty clusters take the point farthest from its center among clusters
    // with more than one member.
    for (int c = 0; c < k; ++c) {
      if (counts[static_cast<std::size_t>(c)] > 0) continue;
      Eigen::Index far = -1;
      for (Eigen::Index i = 0; i < rows; ++i) {
        if (counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(i)])] < 2) continue;
        if (far < 0 || own(i) > own(far)) far = i;
      }
      if (far < 0) break;
      --counts[static_cast<std::size_t>(labels[static_cast<std::size_t>(far)])];
      labels[static_cast<std::size_t>(far)] = c;
      counts[static_cast<std::size_t>(c)] = 1;
      own(far) = 0.0;
      changed = true;
    }
    if (!changed) break;

    centers.setZero();
    for (Eigen::Index i = 0; i < rows; ++i) centers.row(labels[static_cast<std::size_t>(i)]) += x.row(i);
    for (int c = 0; c < k; ++c)
      if (counts[static_cast<std::size_t>(c)] > 0)
        centers.row(c) /= static_cast<double>(counts[static_cast<std::size_t>(c)]);
  }
  return labels;
}

Initialization initialize(const EdgePanel& panel, const ModelSpec& spec, InitStrategy strategy,
                          std::uint64_t seed, const BalarmModel* provided) {
  spec.validate();
  const auto j = static_cast<Eigen::Index>(panel.n_edges());
  const Eigen::Index g_count = spec.n_clusters;
  Initialization out;
  switch (strategy) {
    case InitStrategy::ProvidedModel: {
      require(provided != nullptr, "initialize: provided-model strategy needs a model");
      provided->validate();
      require(provided->spec == spec, "initialize: provided model spec does not match");
      out.model = *provided;
      return out;
    }
    case InitStrategy::RandomResponsibility: {
      // Rows drawn from the flat Dirichlet.
      Rng rng(seed);
      Eigen::MatrixXd tau(j, g_count);
      for (Eigen::Index i = 0; i < j; ++i) {
        double total = 0.0;
        for (Eigen::Index g = 0; g < g_count; ++g) {
          tau(i, g) = rng.exponential();
          total += tau(i, g);
        }
        tau.row(i) /= total;
      }
      out.responsibilities = std::move(tau);
      return out;
    }
    case InitStrategy::SummaryKMeans: {
      const auto labels = kmeans(summary_features(panel, spec), spec.n_clusters, seed);
      Eigen::MatrixXd tau = Eigen::MatrixXd::Zero(j, g_count);
      for (Eigen::Index i = 0; i < j; ++i) tau(i, labels[static_cast<std::size_t>(i)]) = 1.0;
      out.responsibilities = std::move(tau);
      return out;
    }
  }
  throw ValidationError("initialize: unknown strategy");
}

}  // namespace balarm
