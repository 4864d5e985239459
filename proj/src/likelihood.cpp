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

#include "survons/likelihood.hpp"

#include <cmath>
#include <sstream>

#include <Eigen/Cholesky>

#include "survons/error.hpp"
#include "survons/optim.hpp"

namespace survons {

Parameter::Parameter(Eigen::VectorXd theta_in, double radius_in)
    : theta(std::move(theta_in)), radius(radius_in) {
  if (!(radius > 0.0)) throw InvalidArgument("domain radius must be positive");
  if (theta.norm() > radius * (1.0 + 1e-12)) {
    throw InvalidArgument("parameter lies outside the domain ball");
  }
}

LossEntry make_loss_entry(const Individual& ind, const IntervalExposure& e) {
  LossEntry entry;
  entry.event = e.y;
  entry.event_covariate = ind.covariates().at(ind.observed());
  entry.start = e.start;
  entry.end = e.end;
  ind.covariates().for_each_piece(
      e.start, e.end, [&](double length, const Eigen::VectorXd& x) {
        entry.pieces.push_back({length, x});
      });
  return entry;
}

LossContext make_loss_context(const Cohort& cohort, int t) {
  LossContext ctx;
  ctx.t = t;
  ctx.dim = cohort.dim();
  for (const RiskEntry& r : risk_set(cohort, t)) {
    ctx.entries.push_back(make_loss_entry(cohort[r.index], r.exposure));
  }
  return ctx;
}

std::vector<LossContext> make_loss_contexts(const Cohort& cohort, int n) {
  // One pass over individuals instead of n passes over the cohort.
  std::vector<LossContext> contexts(static_cast<std::size_t>(n));
  for (int t = 1; t <= n; ++t) {
    contexts[static_cast<std::size_t>(t - 1)].t = t;
    contexts[static_cast<std::size_t>(t - 1)].dim = cohort.dim();
  }
  for (const Individual& ind : cohort.individuals()) {
    const int first = std::max(1, static_cast<int>(std::floor(ind.arrival())));
    for (int t = first; t <= n; ++t) {
      if (ind.observed() <= t - 1.0) break;
      const IntervalExposure e = interval_indicators(ind, t);
      if (e.r) {
        contexts[static_cast<std::size_t>(t - 1)].entries.push_back(
            make_loss_entry(ind, e));
      }
    }
  }
  return contexts;
}

namespace {

void check_dim(Eigen::Index dim, const Eigen::VectorXd& theta) {
  if (theta.size() != dim) {
    std::ostringstream msg;
    msg << "parameter has dimension " << theta.size() << ", context expects "
        << dim;
    throw InvalidArgument(msg.str());
  }
}

double guarded_exp(double eta) {
  if (!(std::abs(eta) <= kMaxLinearPredictor)) {
    std::ostringstream msg;
    msg << "linear predictor theta^T x = " << eta << " exceeds +/-"
        << kMaxLinearPredictor;
    throw OverflowError(msg.str(), eta);
  }
  return std::exp(eta);
}

}  // namespace

LossDerivatives evaluate_loss(std::span<const LossEntry> entries,
                              Eigen::Index dim, const Eigen::VectorXd& theta,
                              bool with_hessian) {
  check_dim(dim, theta);
  LossDerivatives out;
  out.gradient = Eigen::VectorXd::Zero(dim);
  if (with_hessian) out.hessian = Eigen::MatrixXd::Zero(dim, dim);
  for (const LossEntry& entry : entries) {
    if (entry.event) {
      out.value -= theta.dot(entry.event_covariate);
      out.gradient -= entry.event_covariate;
    }
    for (const ExposurePiece& piece : entry.pieces) {
      const double w = guarded_exp(theta.dot(piece.x)) * piece.length;
      out.value += w;
      out.gradient += w * piece.x;
      if (with_hessian) {
        out.hessian.selfadjointView<Eigen::Lower>().rankUpdate(piece.x, w);
      }
    }
  }
  if (with_hessian) {
    out.hessian.triangularView<Eigen::StrictlyUpper>() =
        out.hessian.transpose();
  }
  return out;
}

double interval_loss(const LossContext& ctx, const Eigen::VectorXd& theta) {
  check_dim(ctx.dim, theta);
  double value = 0.0;
  for (const LossEntry& entry : ctx.entries) {
    if (entry.event) value -= theta.dot(entry.event_covariate);
    for (const ExposurePiece& piece : entry.pieces) {
      value += guarded_exp(theta.dot(piece.x)) * piece.length;
    }
  }
  return value;
}

Eigen::VectorXd interval_gradient(const LossContext& ctx,
                                  const Eigen::VectorXd& theta) {
  return evaluate_loss(ctx.entries, ctx.dim, theta, false).gradient;
}

Eigen::MatrixXd interval_hessian(const LossContext& ctx,
                                 const Eigen::VectorXd& theta) {
  return evaluate_loss(ctx.entries, ctx.dim, theta, true).hessian;
}

double cumulative_loss(const Cohort& cohort, const Eigen::VectorXd& theta,
                       int n) {
  if (n < 1) throw InvalidArgument("cumulative loss needs n >= 1");
  double total = 0.0;
  for (const LossContext& ctx : make_loss_contexts(cohort, n)) {
    total += interval_loss(ctx, theta);
  }
  return total;
}

BatchMinimizerResult batch_minimizer(const Cohort& cohort, int n,
                                     double radius,
                                     const BatchMinimizerOptions& options) {
  if (n < 1) throw InvalidArgument("batch minimizer needs n >= 1");
  const std::vector<LossContext> contexts = make_loss_contexts(cohort, n);
  return batch_minimizer(contexts, cohort.dim(), radius, options);
}

BatchMinimizerResult batch_minimizer(std::span<const LossContext> contexts,
                                     Eigen::Index dim, double radius,
                                     const BatchMinimizerOptions& options) {
  if (!(options.tol > 0.0)) throw InvalidArgument("tol must be positive");
  if (!(radius > 0.0)) throw InvalidArgument("radius must be positive");
  std::vector<LossEntry> pooled;
  for (const LossContext& ctx : contexts) {
    pooled.insert(pooled.end(), ctx.entries.begin(), ctx.entries.end());
  }

  auto residual_of = [&](const Eigen::VectorXd& theta,
                         const Eigen::VectorXd& grad) {
    return (theta - project_ball(theta - grad, radius)).norm();
  };

  Eigen::VectorXd theta = Eigen::VectorXd::Zero(dim);
  LossDerivatives cur = evaluate_loss(pooled, dim, theta, true);
  double residual = residual_of(theta, cur.gradient);
  constexpr double kArmijo = 1e-4;

  for (int iter = 0; iter < options.max_iterations; ++iter) {
    if (residual <= options.tol) {
      return {Parameter(theta, radius), cur.value, residual, iter};
    }
    // Scaled-projection Newton: Newton point projected in the Hessian metric.
    Eigen::MatrixXd h = cur.hessian;
    const double ridge = 1e-12 * (1.0 + h.trace());
    h.diagonal().array() += ridge;
    const Eigen::VectorXd newton_point =
        theta - h.ldlt().solve(cur.gradient);
    Eigen::VectorXd target = newton_point;
    if (newton_point.norm() > radius) {
      target = project_mahalanobis(newton_point, h, radius).theta;
    }

    auto try_direction = [&](const Eigen::VectorXd& direction,
                             Eigen::VectorXd& accepted) {
      const double slope = cur.gradient.dot(direction);
      if (!(slope < 0.0)) return false;
      double step = 1.0;
      for (int k = 0; k < 60; ++k, step *= 0.5) {
        Eigen::VectorXd candidate = project_ball(theta + step * direction, radius);
        const LossDerivatives next = evaluate_loss(pooled, dim, candidate, false);
        const double noise = 1e-12 * (1.0 + std::abs(cur.value));
        const bool armijo = next.value <= cur.value + kArmijo * step * slope;
        const bool flat_but_better =
            next.value - cur.value <= noise &&
            residual_of(candidate, next.gradient) < residual;
        if (armijo || flat_but_better) {
          accepted = std::move(candidate);
          return true;
        }
      }
      return false;
    };

    Eigen::VectorXd next_theta;
    bool moved = try_direction(target - theta, next_theta);
    if (!moved) {
      // Projected gradient, initial step 1/L with L ~ largest curvature.
      const double lipschitz = std::max(cur.hessian.norm(), 1e-12);
      const Eigen::VectorXd pg =
          project_ball(theta - cur.gradient / lipschitz, radius) - theta;
      moved = try_direction(pg, next_theta);
    }
    if (!moved) break;
    theta = std::move(next_theta);
    cur = evaluate_loss(pooled, dim, theta, true);
    residual = residual_of(theta, cur.gradient);
  }
  if (residual <= options.tol) {
    return {Parameter(theta, radius), cur.value, residual,
            options.max_iterations};
  }
  std::ostringstream msg;
  msg << "batch minimizer did not reach tol " << options.tol
      << " (residual " << residual << ")";
  throw ConvergenceError(msg.str(), theta, residual);
}

}  // namespace survons
