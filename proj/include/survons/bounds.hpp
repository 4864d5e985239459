// Copyright 2026 The SurvONS Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef SURVONS_BOUNDS_HPP
#define SURVONS_BOUNDS_HPP

#include <cstdint>
#include <vector>

#include <Eigen/Core>

#include "survons/cohort.hpp"

namespace survons {

/// Per-round gamma_t estimates. Non-finite or non-positive entries are
/// degenerate rounds and are skipped by every statistic below.
struct GammaTrace {
  std::vector<double> gammas;
  Eigen::VectorXd grid;

  static bool is_degenerate(double gamma);
  /// Number of degenerate entries among the first n.
  int degenerate_count(int n) const;
};

/// Regret-order curve options.
struct CurveOptions {
  /// Drop the d log n factor.
  bool bare_order = false;
  /// Use the running sum of gamma_t instead of the running mean.
  bool sum_gamma = false;
};

/// #{t <= n : gamma_t < gamma}.
int n_gamma(const GammaTrace& trace, double gamma, int n);

/// min over the grid of (2 log K + 5 d log n) / gamma + gamma G^2 D^2 n_gamma.
double bound_survons(const GammaTrace& trace, int n, int dim, double grad_bound,
                     double radius);

/// d log(n) / min_{t<=n} gamma_t.
double bound_ons_order(const GammaTrace& trace, int n, int dim,
                       const CurveOptions& options = {});
/// G D sqrt(n).
double bound_ogd_order(int n, double grad_bound, double radius);
/// d log(n) / gamma_bar_n, gamma_bar the running mean (or sum).
double bound_ons_avg_order(const GammaTrace& trace, int n, int dim,
                           const CurveOptions& options = {});

/// d log(2 n G^2 gamma^2 D^2) / gamma, n >= 4.
double bound_hazan_ons(int n, int dim, double grad_bound, double radius,
                       double gamma);

/// Constants of the Poisson-arrival stochastic model.
struct StochasticConstants {
  double lambda = 1.0;
  /// Smallest eigenvalue of the censored design matrix.
  double design_a = 1.0;
  double radius = 1.0;
  double x_inf = 1.0;
  int dim = 1;
  /// Confidence level, in (0, 1].
  double rho = 0.05;
  double grad_bound = 1.0;

  void validate() const;
};

/// 32 e^{D x} (4 lambda + 1 + log(2/rho)) (1 + e^{D x}) x.
double theoretical_G(const StochasticConstants& sc);
/// 32 e^{D x} (4 lambda + 1 + log(2/rho)): high-probability risk-set bound.
double risk_set_bound(const StochasticConstants& sc);

/// Logarithmic stochastic regret bound of ONS.
double stochastic_regret_bound(const StochasticConstants& sc, int n);

/// The two summands of the bounds above, exposed for term-wise checks.
struct BoundTerms {
  double leading = 0.0;
  double confidence = 0.0;
};
BoundTerms stochastic_regret_terms(const StochasticConstants& sc, int n);
BoundTerms corollary_terms(const StochasticConstants& sc, int n);

/// Cumulative squared-distance bound; divided by n it bounds
/// ||theta_bar_n - theta*||^2.
double corollary_bound(const StochasticConstants& sc, int n);

/// lambda e^{-D x_inf} A.
double strong_convexity_mu(const StochasticConstants& sc);

struct DesignEstimate {
  double value = 0.0;
  double standard_error = 0.0;
  Eigen::VectorXd eigenvector;
  std::int64_t samples = 0;
};

/// Monte-Carlo estimate of lambda_min E[x x^T 1{T <= C} (1 - T)_+ | tau = 0]
/// with x an intercept plus standard normals rejected to ||x||_inf <= x_inf
/// and T, C ~ Exp(exp(theta*^T x)).
DesignEstimate estimate_A(const Eigen::VectorXd& theta_star, double x_inf,
                          std::int64_t samples, std::uint64_t seed,
                          bool intercept = true);

/// Fraction of rounds t <= n whose risk-set size exceeds `bound`.
double rt_exceedance(const Cohort& cohort, int n, double bound);
/// Same with the bound taken from risk_set_bound(sc).
double rt_diagnostic(const Cohort& cohort, int n, const StochasticConstants& sc);

}  // namespace survons

#endif  // SURVONS_BOUNDS_HPP
