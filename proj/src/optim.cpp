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

#include "survons/optim.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include <Eigen/Eigenvalues>

#include "survons/error.hpp"

namespace survons {

Eigen::VectorXd project_ball(const Eigen::VectorXd& theta, double radius) {
  if (!(radius > 0.0)) throw InvalidArgument("project_ball: radius must be > 0");
  const double norm = theta.norm();
  if (norm <= radius) return theta;
  return theta * (radius / norm);
}

ProjectionResult project_mahalanobis(const Eigen::VectorXd& target,
                                     const Eigen::MatrixXd& a, double radius,
                                     double tol, int max_iterations) {
  if (a.rows() != a.cols() || a.rows() != target.size()) {
    throw InvalidArgument("project_mahalanobis: dimension mismatch");
  }
  if (!(radius > 0.0) || !(tol > 0.0)) {
    throw InvalidArgument("project_mahalanobis: radius and tol must be > 0");
  }
  ProjectionResult out;
  if (target.norm() <= radius) {
    out.theta = target;
    return out;
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(a);
  if (eig.info() != Eigen::Success) {
    throw NumericalError("project_mahalanobis: eigendecomposition failed");
  }
  const Eigen::VectorXd lambda = eig.eigenvalues();
  if (!(lambda.minCoeff() > 0.0)) {
    throw InvalidArgument("project_mahalanobis: metric is not positive definite");
  }
  // In the eigenbasis theta(nu)_i = lambda_i c_i / (lambda_i + nu).
  const Eigen::VectorXd c = eig.eigenvectors().transpose() * target;
  const Eigen::VectorXd lc = lambda.cwiseProduct(c);

  auto norm_at = [&](double nu, double& dnorm) {
    const Eigen::ArrayXd denom = lambda.array() + nu;
    const Eigen::ArrayXd comp = lc.array() / denom;
    const double norm = std::sqrt(comp.square().sum());
    dnorm = -(comp.square() / denom).sum() / norm;
    return norm;
  };

  double lo = 0.0;
  double hi = lambda.maxCoeff() * target.norm() / radius;
  double nu = 0.0;
  double dnorm = 0.0;
  double norm = norm_at(nu, dnorm);
  int iter = 0;
  for (; iter < max_iterations; ++iter) {
    if (std::abs(norm - radius) <= tol * radius) break;
    if (norm > radius) {
      lo = nu;
    } else {
      hi = nu;
    }
    // Newton on 1/||theta(nu)|| - 1/D, which is close to linear in nu.
    const double psi = 1.0 / norm - 1.0 / radius;
    const double dpsi = -dnorm / (norm * norm);
    double next = nu - psi / dpsi;
    if (!(next > lo && next < hi)) next = 0.5 * (lo + hi);
    nu = next;
    norm = norm_at(nu, dnorm);
  }
  if (std::abs(norm - radius) > tol * radius) {
    std::ostringstream msg;
    msg << "Mahalanobis projection did not converge in " << max_iterations
        << " iterations; multiplier bracket [" << lo << ", " << hi << "]";
    throw ProjectionError(msg.str(), lo, hi);
  }

  const Eigen::VectorXd comp = lc.array() / (lambda.array() + nu);
  out.theta = eig.eigenvectors() * comp;
  // Rounding can leave the result a hair outside; pull it onto the sphere.
  const double final_norm = out.theta.norm();
  if (final_norm > radius) out.theta *= radius / final_norm;
  out.nu = nu;
  out.active = true;
  out.iterations = iter;
  const Eigen::VectorXd stationarity = a * (out.theta - target) + nu * out.theta;
  const double scale = std::max(1.0, (a * target).norm());
  out.kkt_residual = std::max(stationarity.norm() / scale,
                              std::abs(out.theta.norm() - radius) / radius);
  return out;
}

OnsState OnsState::initial(Eigen::Index dim, double learning_rate,
                           double radius) {
  if (!(learning_rate > 0.0) || !(radius > 0.0)) {
    throw InvalidArgument("ONS learning rate and radius must be positive");
  }
  const double scaled = learning_rate * radius;
  return initial(dim, learning_rate, radius, 1.0 / (scaled * scaled));
}

OnsState OnsState::initial(Eigen::Index dim, double learning_rate,
                           double radius, double epsilon) {
  if (!(learning_rate > 0.0) || !(radius > 0.0) || !(epsilon > 0.0)) {
    throw InvalidArgument("ONS learning rate, radius, epsilon must be positive");
  }
  OnsState s;
  s.theta = Eigen::VectorXd::Zero(dim);
  s.a = epsilon * Eigen::MatrixXd::Identity(dim, dim);
  s.a_inv = (1.0 / epsilon) * Eigen::MatrixXd::Identity(dim, dim);
  s.learning_rate = learning_rate;
  s.epsilon = epsilon;
  s.radius = radius;
  return s;
}

OnsState ons_step(OnsState state, const Eigen::VectorXd& g) {
  if (g.size() != state.theta.size()) {
    throw InvalidArgument("ons_step: gradient dimension mismatch");
  }
  state.a.noalias() += g * g.transpose();
  const Eigen::VectorXd ag = state.a_inv * g;
  state.a_inv.noalias() -= (ag * ag.transpose()) / (1.0 + g.dot(ag));
  // keep the maintained inverse exactly symmetric
  state.a_inv = 0.5 * (state.a_inv + state.a_inv.transpose()).eval();
  const Eigen::VectorXd step = state.theta - (state.a_inv * g) / state.learning_rate;
  state.theta = project_mahalanobis(step, state.a, state.radius).theta;
  return state;
}

OgdState OgdState::initial(Eigen::Index dim, double gradient_bound,
                           double radius) {
  if (!(gradient_bound > 0.0) || !(radius > 0.0)) {
    throw InvalidArgument("OGD gradient bound and radius must be positive");
  }
  return {Eigen::VectorXd::Zero(dim), gradient_bound, radius, 1};
}

OgdState ogd_step(OgdState state, const Eigen::VectorXd& g) {
  if (g.size() != state.theta.size()) {
    throw InvalidArgument("ogd_step: gradient dimension mismatch");
  }
  const double eta =
      state.radius / (state.gradient_bound * std::sqrt(static_cast<double>(state.t)));
  state.theta = project_ball(state.theta - eta * g, state.radius);
  ++state.t;
  return state;
}

Eigen::VectorXd boa_update(const Eigen::VectorXd& weights,
                           const Eigen::VectorXd& grid,
                           const Eigen::VectorXd& lin_losses) {
  if (weights.size() != grid.size() || grid.size() != lin_losses.size() ||
      weights.size() == 0) {
    throw InvalidArgument("boa_update: lengths differ or are zero");
  }
  const Eigen::Index k = weights.size();
  Eigen::ArrayXd log_w(k);
  for (Eigen::Index i = 0; i < k; ++i) {
    const double gl = grid[i] * lin_losses[i];
    log_w[i] = std::log(weights[i]) - gl - gl * gl;
  }
  const double top = log_w.maxCoeff();
  Eigen::VectorXd out(k);
  if (std::isfinite(top)) {
    out = (log_w - top).exp().matrix();
    const double total = out.sum();
    if (std::isfinite(total) && total > 0.0) return out / total;
  }
  log_warning("BOA weights underflowed; resetting to uniform");
  return Eigen::VectorXd::Constant(k, 1.0 / static_cast<double>(k));
}

SurvOnsState SurvOnsState::initial(Eigen::Index dim,
                                   const Eigen::VectorXd& grid, double radius) {
  Eigen::VectorXd eps(grid.size());
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    const double scaled = grid[k] * radius;
    eps[k] = 1.0 / (scaled * scaled);
  }
  return initial(dim, grid, eps, radius);
}

SurvOnsState SurvOnsState::initial(Eigen::Index dim,
                                   const Eigen::VectorXd& grid,
                                   const Eigen::VectorXd& epsilons,
                                   double radius) {
  if (grid.size() < 1 || epsilons.size() != grid.size()) {
    throw InvalidArgument("SurvONS needs a non-empty grid with matching epsilons");
  }
  SurvOnsState s;
  s.grid = grid;
  s.radius = radius;
  for (Eigen::Index k = 0; k < grid.size(); ++k) {
    s.learners.push_back(OnsState::initial(dim, grid[k], radius, epsilons[k]));
  }
  s.weights = Eigen::VectorXd::Constant(grid.size(), 1.0 / grid.size());
  s.aggregated = Eigen::VectorXd::Zero(dim);
  return s;
}

RoundOutput survons_round(SurvOnsState& state, const LossContext& ctx,
                          AggregationMode mode, double degenerate_gamma) {
  const auto k_count = static_cast<Eigen::Index>(state.learners.size());
  RoundOutput out;
  out.weights = state.weights;

  Eigen::VectorXd prediction = Eigen::VectorXd::Zero(ctx.dim);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    prediction += state.weights[k] * state.learners[static_cast<std::size_t>(k)].theta;
  }
  out.prediction = prediction;

  const LossDerivatives d = evaluate_loss(ctx.entries, ctx.dim, prediction, true);
  out.loss = d.value;
  out.gradient = d.gradient;
  out.curvature = estimate_curvature(d.gradient, d.hessian, state.radius);

  out.surrogate_gammas.resize(k_count);
  Eigen::VectorXd lin_losses(k_count);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    OnsState& learner = state.learners[static_cast<std::size_t>(k)];
    const double gamma_k = state.grid[k];
    double surrogate_gamma = mode == AggregationMode::kAdaptive
                                 ? clip_gamma(out.curvature, gamma_k)
                                 : gamma_k;
    if (!out.curvature.valid && degenerate_gamma > 0.0) {
      surrogate_gamma = degenerate_gamma;
    }
    out.surrogate_gammas[k] = surrogate_gamma;
    const SurrogateAnchor anchor{prediction, d.value, d.gradient, surrogate_gamma};
    lin_losses[k] = d.gradient.dot(learner.theta - prediction);
    const Eigen::VectorXd g = surrogate_gradient(anchor, learner.theta);
    learner = ons_step(std::move(learner), g);
  }

  state.weights = boa_update(state.weights, state.grid, lin_losses);
  state.aggregated = Eigen::VectorXd::Zero(ctx.dim);
  for (Eigen::Index k = 0; k < k_count; ++k) {
    state.aggregated += state.weights[k] * state.learners[static_cast<std::size_t>(k)].theta;
  }
  ++state.round;
  return out;
}

}  // namespace survons
