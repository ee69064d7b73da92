#include "balarm/glm.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Dense>

#include "balarm/error.hpp"

namespace balarm {

void Design::add_row(std::span<const double> covariates, int response, double weight) {
  require(covariates.size() == dim_, "Design: covariate row has the wrong length");
  require(response == 0 || response == 1, "Design: response must be 0 or 1");
  covariates_.insert(covariates_.end(), covariates.begin(), covariates.end());
  responses_.push_back(static_cast<std::uint8_t>(response));
  weights_.push_back(weight);
}

void Design::reserve(std::size_t rows) {
  covariates_.reserve(rows * dim_);
  responses_.reserve(rows);
  weights_.reserve(rows);
}

Design build_edge_design(const EdgePanel& panel, std::size_t edge, const ModelSpec& spec) {
  spec.validate();
  const auto n = panel.length();
  const auto k = static_cast<std::size_t>(spec.ar_order);
  const auto h = static_cast<std::size_t>(spec.harmonic_dim());
  require(n > k, "build_design: series length must exceed K");
  require(edge < panel.n_edges(), "build_design: edge index out of range");

  Design design(h + k + 1);
  design.reserve(n - k);
  std::vector<double> row(h + k + 1);
  const auto x = panel.series(edge);
  for (std::size_t l = k; l < n; ++l) {
    harmonic_basis(panel.harmonic_time(l), spec.harmonic_order, spec.period,
                   std::span<double>(row.data(), h));
    for (std::size_t j = 0; j < k; ++j) row[h + j] = x[l - 1 - j];
    row[h + k] = 1.0;
    design.add_row(row, x[l]);
  }
  return design;
}

std::vector<Design> build_design(const EdgePanel& panel, const ModelSpec& spec) {
  std::vector<Design> out;
  out.reserve(panel.n_edges());
  for (std::size_t i = 0; i < panel.n_edges(); ++i)
    out.push_back(build_edge_design(panel, i, spec));
  return out;
}

std::string_view to_string(LogisticFitStatus status) {
  switch (status) {
    case LogisticFitStatus::Converged: return "converged";
    case LogisticFitStatus::MaxIterations: return "max_iterations";
    case LogisticFitStatus::Stalled: return "stalled";
    case LogisticFitStatus::Singular: return "singular";
  }
  return "unknown";
}

namespace {

double dot(std::span<const double> a, std::span<const double> b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

// Neumaier compensated sum.
struct CompensatedSum {
  double sum = 0.0;
  double carry = 0.0;
  void add(double v) {
    const double t = sum + v;
    carry += std::abs(sum) >= std::abs(v) ? (sum - t) + v : (v - t) + sum;
    sum = t;
  }
  double value() const { return sum + carry; }
};

double ridge_penalty(std::span<const double> beta, double ridge) {
  double s = 0.0;
  for (std::size_t d = 0; d + 1 < beta.size(); ++d) s += beta[d] * beta[d];
  return 0.5 * ridge * s;
}

struct NewtonSystem {
  Eigen::VectorXd gradient;
  Eigen::MatrixXd information;  // X^T W X + ridge on non-intercept diagonal
};

NewtonSystem newton_system(const Design& design, std::span<const double> beta, double ridge,
                           std::span<const double> weights) {
  const auto dim = static_cast<Eigen::Index>(design.dim());
  NewtonSystem sys{Eigen::VectorXd::Zero(dim), Eigen::MatrixXd::Zero(dim, dim)};
  for (std::size_t j = 0; j < design.n_rows(); ++j) {
    const double w = weights[j];
    if (w == 0.0) continue;
    const auto x = design.covariates(j);
    const double p = inv_logit(dot(x, beta));
    const double r = w * (design.response(j) - p);
    const double v = w * p * (1.0 - p);
    Eigen::Map<const Eigen::VectorXd> xv(x.data(), dim);
    sys.gradient.noalias() += r * xv;
    sys.information.selfadjointView<Eigen::Lower>().rankUpdate(xv, v);
  }
  sys.information = sys.information.selfadjointView<Eigen::Lower>();
  for (Eigen::Index d = 0; d + 1 < dim; ++d) {
    sys.gradient(d) -= ridge * beta[static_cast<std::size_t>(d)];
    sys.information(d, d) += ridge;
  }
  return sys;
}

}  // namespace

double penalized_objective(const Design& design, std::span<const double> beta, double ridge,
                           std::span<const double> weights) {
  require(beta.size() == design.dim(), "penalized_objective: coefficient length mismatch");
  CompensatedSum s;
  for (std::size_t j = 0; j < design.n_rows(); ++j) {
    const double w = weights[j];
    if (w == 0.0) continue;
    s.add(w * bernoulli_loglik_term(design.response(j), dot(design.covariates(j), beta)));
  }
  s.add(-ridge_penalty(beta, ridge));
  return s.value();
}

std::vector<double> penalized_gradient(const Design& design, std::span<const double> beta,
                                       double ridge, std::span<const double> weights) {
  require(beta.size() == design.dim(), "penalized_gradient: coefficient length mismatch");
  std::vector<double> g(design.dim(), 0.0);
  for (std::size_t j = 0; j < design.n_rows(); ++j) {
    const double w = weights[j];
    if (w == 0.0) continue;
    const auto x = design.covariates(j);
    const double r = w * (design.response(j) - inv_logit(dot(x, beta)));
    for (std::size_t d = 0; d < g.size(); ++d) g[d] += r * x[d];
  }
  for (std::size_t d = 0; d + 1 < g.size(); ++d) g[d] -= ridge * beta[d];
  return g;
}

LogisticFit weighted_logistic_fit(const Design& design, std::span<const double> weights,
                                  std::span<const double> init,
                                  const LogisticFitOptions& options) {
  require(design.dim() >= 1, "weighted_logistic_fit: empty design");
  require(weights.size() == design.n_rows(), "weighted_logistic_fit: one weight per row");
  require(options.ridge >= 0.0, "weighted_logistic_fit: ridge must be >= 0");
  bool any_positive = false;
  for (double w : weights) {
    require(std::isfinite(w) && w >= 0.0, "weighted_logistic_fit: weights must be finite and >= 0");
    any_positive = any_positive || w > 0.0;
  }
  require(any_positive, "weighted_logistic_fit: need at least one row with positive weight");
  require(init.empty() || init.size() == design.dim(),
          "weighted_logistic_fit: init has the wrong length");

  const auto dim = static_cast<Eigen::Index>(design.dim());
  LogisticFit fit;
  fit.coefficients.assign(init.begin(), init.end());
  if (fit.coefficients.empty()) fit.coefficients.assign(design.dim(), 0.0);
  fit.objective = penalized_objective(design, fit.coefficients, options.ridge, weights);
  fit.objective_trace.push_back(fit.objective);

  std::vector<double> candidate(design.dim());
  for (;;) {
    const auto sys = newton_system(design, fit.coefficients, options.ridge, weights);
    fit.gradient_norm = sys.gradient.lpNorm<Eigen::Infinity>();
    if (fit.gradient_norm <= options.grad_tol) {
      fit.status = LogisticFitStatus::Converged;
      break;
    }
    if (fit.iterations >= options.max_iter) {
      fit.status = LogisticFitStatus::MaxIterations;
      break;
    }
    const Eigen::LDLT<Eigen::MatrixXd> ldlt(sys.information);
    const auto diag = ldlt.vectorD();
    const double dmax = diag.cwiseAbs().maxCoeff();
    if (ldlt.info() != Eigen::Success || !ldlt.isPositive() ||
        diag.minCoeff() <= 1e-13 * std::max(dmax, 1e-300)) {
      fit.status = LogisticFitStatus::Singular;
      break;
    }
    const Eigen::VectorXd step = ldlt.solve(sys.gradient);
    if (!step.allFinite()) {
      fit.status = LogisticFitStatus::Singular;
      break;
    }

    // Inside the quadratic region the predicted gain can fall below the
    // rounding noise of the objective sum; the full Newton step is then taken
    // unless it loses more than that noise.
    const double noise = 1e-12 * (1.0 + std::abs(fit.objective));
    const double predicted_gain = 0.5 * sys.gradient.dot(step);
    double candidate_objective = fit.objective;
    bool accepted = false;
    if (predicted_gain <= noise) {
      for (Eigen::Index d = 0; d < dim; ++d)
        candidate[static_cast<std::size_t>(d)] =
            fit.coefficients[static_cast<std::size_t>(d)] + step(d);
      candidate_objective = penalized_objective(design, candidate, options.ridge, weights);
      accepted = std::isfinite(candidate_objective) && candidate_objective >= fit.objective - noise;
    } else {
      double scale = 1.0;
      for (int h = 0; h <= options.max_halvings; ++h, scale *= 0.5) {
        for (Eigen::Index d = 0; d < dim; ++d)
          candidate[static_cast<std::size_t>(d)] =
              fit.coefficients[static_cast<std::size_t>(d)] + scale * step(d);
        candidate_objective = penalized_objective(design, candidate, options.ridge, weights);
        if (std::isfinite(candidate_objective) && candidate_objective >= fit.objective) {
          accepted = true;
          break;
        }
      }
    }
    ++fit.iterations;
    if (!accepted) {
      fit.status = LogisticFitStatus::Stalled;
      break;
    }
    fit.coefficients = candidate;
    fit.objective = candidate_objective;
    fit.objective_trace.push_back(fit.objective);
  }
  fit.converged = fit.status == LogisticFitStatus::Converged;
  return fit;
}

LogisticFit weighted_logistic_fit(const Design& design, std::span<const double> init,
                                  const LogisticFitOptions& options) {
  return weighted_logistic_fit(design, design.weights(), init, options);
}

}  // namespace balarm
