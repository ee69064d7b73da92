#pragma once

// Weighted logistic regression: design rows built from harmonics, lags and an
// intercept, fitted by ridge-penalized IRLS with step-halving.

#include <cstdint>
#include <span>
#include <string_view>
#include <vector>

#include "balarm/model.hpp"

namespace balarm {

struct DesignRow {
  std::span<const double> covariates;
  int response = 0;
  double weight = 1.0;
};

/// Flat row-major design. The last covariate of every row is the intercept
/// column, which the ridge penalty skips.
class Design {
 public:
  Design() = default;
  explicit Design(std::size_t dim) : dim_(dim) {}

  void add_row(std::span<const double> covariates, int response, double weight = 1.0);
  void reserve(std::size_t rows);

  std::size_t dim() const { return dim_; }
  std::size_t n_rows() const { return responses_.size(); }

  DesignRow row(std::size_t j) const { return {covariates(j), responses_[j], weights_[j]}; }
  std::span<const double> covariates(std::size_t j) const {
    return {covariates_.data() + j * dim_, dim_};
  }
  int response(std::size_t j) const { return responses_[j]; }
  double weight(std::size_t j) const { return weights_[j]; }
  std::span<const double> weights() const { return weights_; }
  std::span<double> weights() { return weights_; }

 private:
  std::size_t dim_ = 0;
  std::vector<double> covariates_;
  std::vector<std::uint8_t> responses_;
  std::vector<double> weights_;
};

/// Rows for l = K+1..n of one edge: (harmonic_basis(t_l), x_{l-1}..x_{l-K}, 1)
/// with response x_l and unit weight.
Design build_edge_design(const EdgePanel& panel, std::size_t edge, const ModelSpec& spec);

/// build_edge_design for every edge, in edge order.
std::vector<Design> build_design(const EdgePanel& panel, const ModelSpec& spec);

struct LogisticFitOptions {
  double ridge = 1e-6;     ///< lambda on non-intercept coefficients
  double grad_tol = 1e-8;  ///< sup-norm of the penalized gradient
  int max_iter = 100;
  int max_halvings = 60;
};

enum class LogisticFitStatus { Converged, MaxIterations, Stalled, Singular };

std::string_view to_string(LogisticFitStatus status);

struct LogisticFit {
  std::vector<double> coefficients;
  bool converged = false;
  LogisticFitStatus status = LogisticFitStatus::MaxIterations;
  int iterations = 0;
  double objective = 0.0;      ///< penalized log-likelihood at `coefficients`
  double gradient_norm = 0.0;  ///< sup-norm of the penalized gradient there
  std::vector<double> objective_trace;
};

/// sum_j w_j [y_j eta_j - log(1 + e^eta_j)] - (ridge / 2) |beta_{-intercept}|^2
double penalized_objective(const Design& design, std::span<const double> beta, double ridge,
                           std::span<const double> weights);
std::vector<double> penalized_gradient(const Design& design, std::span<const double> beta,
                                       double ridge, std::span<const double> weights);

/// Maximizes the penalized objective from `init` (empty = zeros). Accepts a
/// Newton step only if it does not decrease the objective (up to 1e-12 relative
/// rounding once the predicted gain is that small), halving otherwise.
/// `converged` holds exactly when the gradient sup-norm is <= grad_tol.
/// Status Singular means the penalized normal matrix could not be factored
/// (separation with too little ridge); the last iterate is returned.
LogisticFit weighted_logistic_fit(const Design& design, std::span<const double> weights,
                                  std::span<const double> init,
                                  const LogisticFitOptions& options = {});

/// Uses the design's own row weights.
LogisticFit weighted_logistic_fit(const Design& design, std::span<const double> init,
                                  const LogisticFitOptions& options = {});

}  // namespace balarm
