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

#include "survons/bounds.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Eigenvalues>

#include "survons/error.hpp"
#include "survons/rng.hpp"

namespace survons {

bool GammaTrace::is_degenerate(double gamma) {
  return !std::isfinite(gamma) || !(gamma > 0.0);
}

int GammaTrace::degenerate_count(int n) const {
  int count = 0;
  for (int t = 0; t < n && t < static_cast<int>(gammas.size()); ++t) {
    if (is_degenerate(gammas[static_cast<std::size_t>(t)])) ++count;
  }
  return count;
}

namespace {

void check_horizon(const GammaTrace& trace, int n) {
  if (n < 1 || n > static_cast<int>(trace.gammas.size())) {
    throw InvalidArgument("horizon must satisfy 1 <= n <= trace length");
  }
}

double trace_min(const GammaTrace& trace, int n) {
  double m = std::numeric_limits<double>::infinity();
  for (int t = 0; t < n; ++t) {
    const double g = trace.gammas[static_cast<std::size_t>(t)];
    if (!GammaTrace::is_degenerate(g)) m = std::min(m, g);
  }
  if (!std::isfinite(m)) {
    throw InvalidArgument("gamma trace has no non-degenerate entry");
  }
  return m;
}

}  // namespace

int n_gamma(const GammaTrace& trace, double gamma, int n) {
  check_horizon(trace, n);
  int count = 0;
  for (int t = 0; t < n; ++t) {
    const double g = trace.gammas[static_cast<std::size_t>(t)];
    if (!GammaTrace::is_degenerate(g) && g < gamma) ++count;
  }
  return count;
}

double bound_survons(const GammaTrace& trace, int n, int dim, double grad_bound,
                     double radius) {
  if (trace.grid.size() < 1) throw InvalidArgument("bound_survons: empty grid");
  if (n < 2) throw InvalidArgument("bound_survons: need n >= 2");
  const double k = static_cast<double>(trace.grid.size());
  const double numerator = 2.0 * std::log(k) + 5.0 * dim * std::log(n);
  const double gd2 = grad_bound * grad_bound * radius * radius;
  double best = std::numeric_limits<double>::infinity();
  for (Eigen::Index i = 0; i < trace.grid.size(); ++i) {
    const double gamma = trace.grid[i];
    const double value =
        numerator / gamma + gamma * gd2 * n_gamma(trace, gamma, n);
    best = std::min(best, value);
  }
  return best;
}

double bound_ons_order(const GammaTrace& trace, int n, int dim,
                       const CurveOptions& options) {
  check_horizon(trace, n);
  const double factor = options.bare_order ? 1.0 : dim * std::log(n);
  return factor / trace_min(trace, n);
}

double bound_ogd_order(int n, double grad_bound, double radius) {
  if (n < 1) throw InvalidArgument("bound_ogd_order: need n >= 1");
  return grad_bound * radius * std::sqrt(static_cast<double>(n));
}

double bound_ons_avg_order(const GammaTrace& trace, int n, int dim,
                           const CurveOptions& options) {
  check_horizon(trace, n);
  double sum = 0.0;
  int used = 0;
  for (int t = 0; t < n; ++t) {
    const double g = trace.gammas[static_cast<std::size_t>(t)];
    if (GammaTrace::is_degenerate(g)) continue;
    sum += g;
    ++used;
  }
  if (used == 0) throw InvalidArgument("gamma trace has no non-degenerate entry");
  const double gamma_bar = options.sum_gamma ? sum : sum / used;
  const double factor = options.bare_order ? 1.0 : dim * std::log(n);
  return factor / gamma_bar;
}

double bound_hazan_ons(int n, int dim, double grad_bound, double radius,
                       double gamma) {
  if (n < 4) throw InvalidArgument("bound_hazan_ons: need n >= 4");
  const double arg =
      2.0 * n * grad_bound * grad_bound * gamma * gamma * radius * radius;
  if (!(arg > 1.0)) {
    throw InvalidArgument("bound_hazan_ons: log argument 2 n G^2 gamma^2 D^2 <= 1");
  }
  return dim * std::log(arg) / gamma;
}

void StochasticConstants::validate() const {
  if (!(lambda > 0.0) || !(design_a > 0.0) || !(radius > 0.0) ||
      !(x_inf > 0.0) || dim < 1 || !(grad_bound > 0.0)) {
    throw InvalidArgument("stochastic constants must be strictly positive");
  }
  if (!(rho > 0.0 && rho <= 1.0)) {
    throw InvalidArgument("confidence level rho must lie in (0, 1]");
  }
}

double theoretical_G(const StochasticConstants& sc) {
  sc.validate();
  const double e = std::exp(sc.radius * sc.x_inf);
  return 32.0 * e * (4.0 * sc.lambda + 1.0 + std::log(2.0 / sc.rho)) *
         (1.0 + e) * sc.x_inf;
}

double risk_set_bound(const StochasticConstants& sc) {
  sc.validate();
  return 32.0 * std::exp(sc.radius * sc.x_inf) *
         (4.0 * sc.lambda + 1.0 + std::log(2.0 / sc.rho));
}

double strong_convexity_mu(const StochasticConstants& sc) {
  sc.validate();
  return sc.lambda * std::exp(-sc.radius * sc.x_inf) * sc.design_a;
}

namespace {

// Shared log factor 1 + d log(1 + 2 (lambda A D)^2 (n + log(1/rho)) / (9 G^2 e^{2Dx})).
double log_factor(const StochasticConstants& sc, int n) {
  const double e2 = std::exp(2.0 * sc.radius * sc.x_inf);
  const double lad = sc.lambda * sc.design_a * sc.radius;
  const double inner = 2.0 * lad * lad * (n + std::log(1.0 / sc.rho)) /
                       (9.0 * sc.grad_bound * sc.grad_bound * e2);
  return 1.0 + sc.dim * std::log1p(inner);
}

double confidence_term(const StochasticConstants& sc) {
  const double e = std::exp(sc.radius * sc.x_inf);
  const double la = sc.lambda * sc.design_a;
  return (4.0 * la * sc.radius * sc.radius / (9.0 * e) +
          18.0 * sc.grad_bound * e / la) *
         std::log(1.0 / sc.rho);
}

}  // namespace

BoundTerms stochastic_regret_terms(const StochasticConstants& sc, int n) {
  sc.validate();
  if (n < 1) throw InvalidArgument("need n >= 1");
  const double e = std::exp(sc.radius * sc.x_inf);
  const double la = sc.lambda * sc.design_a;
  return {3.0 * sc.grad_bound * sc.grad_bound * e / (2.0 * la) *
              log_factor(sc, n),
          confidence_term(sc)};
}

double stochastic_regret_bound(const StochasticConstants& sc, int n) {
  const BoundTerms t = stochastic_regret_terms(sc, n);
  return t.leading + t.confidence;
}

BoundTerms corollary_terms(const StochasticConstants& sc, int n) {
  sc.validate();
  if (n < 1) throw InvalidArgument("need n >= 1");
  const double e2 = std::exp(2.0 * sc.radius * sc.x_inf);
  const double la = sc.lambda * sc.design_a;
  // Only the leading term carries the extra 1/mu; the confidence term is
  // kept as in the regret bound.
  return {3.0 * sc.grad_bound * sc.grad_bound * e2 / (2.0 * la * la) *
              log_factor(sc, n),
          confidence_term(sc)};
}

double corollary_bound(const StochasticConstants& sc, int n) {
  const BoundTerms t = corollary_terms(sc, n);
  return t.leading + t.confidence;
}

DesignEstimate estimate_A(const Eigen::VectorXd& theta_star, double x_inf,
                          std::int64_t samples, std::uint64_t seed,
                          bool intercept) {
  if (samples < 1) throw InvalidArgument("estimate_A: need samples >= 1");
  if (!(x_inf > 0.0)) throw InvalidArgument("estimate_A: x_inf must be > 0");
  const Eigen::Index d = theta_star.size();
  if (d < 1) throw InvalidArgument("estimate_A: empty theta_star");
  if (intercept && x_inf < 1.0) {
    throw InvalidArgument("estimate_A: intercept column needs x_inf >= 1");
  }
  Philox rng(seed);
  Eigen::MatrixXd sum = Eigen::MatrixXd::Zero(d, d);
  std::vector<std::pair<Eigen::VectorXd, double>> draws;
  draws.reserve(static_cast<std::size_t>(samples));
  Eigen::VectorXd x(d);
  for (std::int64_t s = 0; s < samples; ++s) {
    const Eigen::Index first = intercept ? 1 : 0;
    if (intercept) x[0] = 1.0;
    for (Eigen::Index j = first; j < d; ++j) {
      double z;
      do {
        z = rng.normal();
      } while (std::abs(z) > x_inf);
      x[j] = z;
    }
    const double rate = std::exp(theta_star.dot(x));
    const double event = rng.exponential(rate);
    const double censor = rng.exponential(rate);
    const double w = (event <= censor) ? std::max(1.0 - event, 0.0) : 0.0;
    if (w > 0.0) sum.selfadjointView<Eigen::Lower>().rankUpdate(x, w);
    draws.emplace_back(x, w);
  }
  sum.triangularView<Eigen::StrictlyUpper>() = sum.transpose();
  const Eigen::MatrixXd mean = sum / static_cast<double>(samples);
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(mean);
  DesignEstimate out;
  out.samples = samples;
  out.value = eig.eigenvalues()[0];
  out.eigenvector = eig.eigenvectors().col(0);
  if (out.value < 0.0) {
    log_warning("estimate_A: negative smallest eigenvalue clamped to 0");
    out.value = 0.0;
  }
  // Standard error of the Rayleigh quotient along the estimated eigenvector.
  if (samples > 1) {
    double acc = 0.0;
    for (const auto& [xi, wi] : draws) {
      const double proj = out.eigenvector.dot(xi);
      const double dev = wi * proj * proj - out.value;
      acc += dev * dev;
    }
    const double var = acc / static_cast<double>(samples - 1);
    out.standard_error = std::sqrt(var / static_cast<double>(samples));
  }
  return out;
}

double rt_exceedance(const Cohort& cohort, int n, double bound) {
  if (n < 1) throw InvalidArgument("rt_exceedance: need n >= 1");
  int exceed = 0;
  std::vector<int> counts(static_cast<std::size_t>(n), 0);
  for (const Individual& ind : cohort.individuals()) {
    const int first = std::max(1, static_cast<int>(std::floor(ind.arrival())));
    for (int t = first; t <= n; ++t) {
      if (ind.observed() <= t - 1.0) break;
      if (interval_indicators(ind, t).r) ++counts[static_cast<std::size_t>(t - 1)];
    }
  }
  for (const int c : counts) {
    if (c > bound) ++exceed;
  }
  return static_cast<double>(exceed) / n;
}

double rt_diagnostic(const Cohort& cohort, int n, const StochasticConstants& sc) {
  return rt_exceedance(cohort, n, risk_set_bound(sc));
}

}  // namespace survons
