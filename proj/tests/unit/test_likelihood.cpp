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

#include <doctest.h>

#include <cmath>

#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "survons/error.hpp"
#include "survons/likelihood.hpp"

using namespace survons;
using survons::testing::random_context;
using survons::testing::random_in_ball;

namespace {

Eigen::VectorXd vec(std::initializer_list<double> v) {
  Eigen::VectorXd out(static_cast<Eigen::Index>(v.size()));
  Eigen::Index i = 0;
  for (const double x : v) out[i++] = x;
  return out;
}

Cohort single(double tau, double u, bool delta, const Eigen::VectorXd& x) {
  return Cohort({Individual::from_observed(tau, u, delta, CovariatePath(x))}, x.size());
}

// Whole-trajectory negative log-likelihood of one individual, integrating the
// hazard piece by piece straight from the breakpoint list.
double trajectory_nll(const Individual& ind, const Eigen::VectorXd& theta) {
  const CovariatePath& p = ind.covariates();
  double value = ind.event_flag() ? -theta.dot(p.at(ind.observed())) : 0.0;
  const auto& bp = p.breakpoints();
  const auto& vals = p.values();
  if (vals.size() == 1) {
    return value + (ind.observed() - ind.arrival()) * std::exp(theta.dot(vals[0]));
  }
  for (std::size_t k = 0; k < vals.size(); ++k) {
    const double lo = std::max(k == 0 ? -1e300 : bp[k], ind.arrival());
    const double hi = std::min(k + 1 < vals.size() ? bp[k + 1] : 1e300, ind.observed());
    if (hi > lo) value += (hi - lo) * std::exp(theta.dot(vals[k]));
  }
  return value;
}

}  // namespace

TEST_CASE("interval loss hand examples") {
  LossContext empty;
  empty.dim = 2;
  CHECK(interval_loss(empty, Eigen::VectorXd::Zero(2)) == 0.0);
  CHECK(interval_gradient(empty, Eigen::VectorXd::Zero(2)).isZero());
  CHECK(interval_hessian(empty, Eigen::VectorXd::Zero(2)).isZero());

  // One entry, theta = 0, y = 0, duration 1.
  const Cohort a = single(0.0, 5.0, false, vec({0.3, -0.4}));
  const LossContext ca = make_loss_context(a, 2);
  CHECK(interval_loss(ca, Eigen::VectorXd::Zero(2)) == doctest::Approx(1.0));

  // d = 1, x = 1, theta = ln 2, y = 1, duration 1.
  const Cohort b = single(1.0, 2.0, true, vec({1.0}));
  const LossContext cb = make_loss_context(b, 2);
  CHECK(interval_loss(cb, vec({std::log(2.0)})) ==
        doctest::Approx(2.0 - std::log(2.0)).epsilon(1e-14));

  // Gradient and Hessian at 0 with duration 0.6.
  const Eigen::VectorXd x = vec({0.5, 2.0, -1.0});
  const Cohort c = single(0.4, 3.0, false, x);
  const LossContext cc = make_loss_context(c, 1);
  CHECK((interval_gradient(cc, Eigen::VectorXd::Zero(3)) - 0.6 * x).norm() < 1e-14);
  CHECK((interval_hessian(cc, Eigen::VectorXd::Zero(3)) - 0.6 * x * x.transpose()).norm() <
        1e-14);
}

TEST_CASE("gradient and Hessian agree with finite differences") {
  Philox rng(123);
  for (int trial = 0; trial < 150; ++trial) {
    const LossContext ctx = random_context(rng, 4);
    const Eigen::VectorXd theta = random_in_ball(rng, 4, 1.5);
    const Eigen::VectorXd g = interval_gradient(ctx, theta);
    const Eigen::MatrixXd h = interval_hessian(ctx, theta);
    const double step = 1e-5 * (1.0 + theta.norm());
    Eigen::VectorXd fd(4);
    Eigen::MatrixXd fdh(4, 4);
    for (int j = 0; j < 4; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
      e[j] = step;
      fd[j] = (interval_loss(ctx, theta + e) - interval_loss(ctx, theta - e)) / (2 * step);
      fdh.col(j) =
          (interval_gradient(ctx, theta + e) - interval_gradient(ctx, theta - e)) / (2 * step);
    }
    CHECK((fd - g).norm() / std::max(1.0, g.norm()) <= 1e-6);
    CHECK((fdh - h).norm() / std::max(1.0, h.norm()) <= 1e-5);
    CHECK((h - h.transpose()).norm() == 0.0);
    CHECK(Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd>(h).eigenvalues().minCoeff() >= -1e-10);
    const LossDerivatives d = evaluate_loss(ctx.entries, 4, theta, true);
    CHECK(d.value == interval_loss(ctx, theta));
    CHECK(d.gradient == g);
  }
}

TEST_CASE("loss context windows") {
  Philox rng(8);
  const Cohort c = testing::random_cohort(rng, 3, 100, 6);
  for (int t = 1; t <= 8; ++t) {
    const LossContext ctx = make_loss_context(c, t);
    const auto rs = risk_set(c, t);
    REQUIRE(ctx.entries.size() == rs.size());
    for (const LossEntry& e : ctx.entries) {
      CHECK(e.start >= t - 1.0);
      CHECK(e.end <= t);
      double total = 0.0;
      for (const auto& p : e.pieces) total += p.length;
      CHECK(total == doctest::Approx(e.end - e.start).epsilon(1e-12));
    }
  }
  const auto all = make_loss_contexts(c, 8);
  REQUIRE(all.size() == 8);
  for (int t = 1; t <= 8; ++t) {
    const Eigen::VectorXd theta = Eigen::VectorXd::Constant(3, 0.2);
    CHECK(interval_loss(all[static_cast<std::size_t>(t - 1)], theta) ==
          interval_loss(make_loss_context(c, t), theta));
  }
}

TEST_CASE("cumulative loss equals the whole-trajectory likelihood") {
  Philox rng(31);
  for (int trial = 0; trial < 20; ++trial) {
    const Cohort c = testing::random_cohort(rng, 3, 60, 5);
    const int n = static_cast<int>(std::ceil(c.max_observed())) + 1;
    const Eigen::VectorXd theta = random_in_ball(rng, 3, 1.0);
    double direct = 0.0;
    for (const auto& ind : c.individuals()) direct += trajectory_nll(ind, theta);
    const double value = cumulative_loss(c, theta, n);
    CHECK(std::abs(value - direct) <= 1e-9 * (1.0 + std::abs(value)));
  }
  const Cohort c = testing::random_cohort(rng, 2, 10, 3);
  CHECK_THROWS_AS(cumulative_loss(c, Eigen::VectorXd::Zero(2), 0), InvalidArgument);
  CHECK(cumulative_loss(c, Eigen::VectorXd::Zero(2), 1) ==
        interval_loss(make_loss_context(c, 1), Eigen::VectorXd::Zero(2)));
}

TEST_CASE("truth beats a large perturbation on simulated data") {
  int wins = 0;
  for (int r = 0; r < 20; ++r) {
    SimulationConfig cfg;
    cfg.n_individuals = 1000;
    cfg.horizon = 100;
    cfg.seed = 100 + static_cast<std::uint64_t>(r);
    const Cohort c = simulate_cohort(cfg);
    const Eigen::VectorXd truth = *c.theta_star();
    Philox rng(cfg.seed);
    const Eigen::VectorXd bump = testing::random_vector(rng, 4).normalized();
    if (cumulative_loss(c, truth, 100) < cumulative_loss(c, truth + bump, 100)) ++wins;
  }
  CHECK(wins >= 19);
}

TEST_CASE("overflow guard") {
  const Cohort c = single(0.0, 2.0, true, vec({1.0, 1.0}));
  const LossContext ctx = make_loss_context(c, 1);
  CHECK_THROWS_AS(interval_loss(ctx, vec({400.0, 400.0})), OverflowError);
}

TEST_CASE("parameter domain") {
  CHECK_NOTHROW(Parameter(vec({0.6, 0.8}), 1.0));
  CHECK_THROWS_AS(Parameter(vec({3.0, 4.0}), 1.0), InvalidArgument);
  CHECK_THROWS_AS(Parameter(vec({0.0}), 0.0), InvalidArgument);
}

TEST_CASE("batch minimizer") {
  SUBCASE("no exposure returns the origin") {
    const Cohort c = single(5.0, 6.0, true, vec({1.0, 2.0}));
    const BatchMinimizerResult r = batch_minimizer(c, 3, 1.0);
    CHECK(r.parameter.theta.isZero());
  }
  SUBCASE("closed form in one dimension") {
    const Cohort c = single(0.0, 1.0, true, vec({1.0}));
    const BatchMinimizerResult r = batch_minimizer(c, 1, 10.0);
    CHECK(std::abs(r.parameter.theta[0]) < 1e-7);
  }
  SUBCASE("boundary solution") {
    // Pure exposure, no event: the loss e^theta decreases towards -D.
    const Cohort c = single(0.0, 5.0, false, vec({1.0}));
    const BatchMinimizerResult r = batch_minimizer(c, 1, 2.0);
    CHECK(r.parameter.theta[0] == doctest::Approx(-2.0).epsilon(1e-9));
  }
  SUBCASE("beats random feasible points") {
    SimulationConfig cfg;
    cfg.n_individuals = 500;
    cfg.horizon = 60;
    cfg.seed = 77;
    const Cohort c = simulate_cohort(cfg);
    const double radius = 1.1 * c.theta_star()->norm();
    const BatchMinimizerResult r = batch_minimizer(c, 60, radius);
    CHECK(r.parameter.theta.norm() <= radius * (1 + 1e-12));
    const double best = cumulative_loss(c, r.parameter.theta, 60);
    Philox rng(5);
    for (int i = 0; i < 1000; ++i) {
      CHECK(best <= cumulative_loss(c, random_in_ball(rng, 4, radius), 60) + 1e-9);
    }
    // A tight ball makes the constraint active.
    const BatchMinimizerResult tight = batch_minimizer(c, 60, 0.3);
    CHECK(tight.parameter.theta.norm() == doctest::Approx(0.3).epsilon(1e-9));
    const double tbest = cumulative_loss(c, tight.parameter.theta, 60);
    for (int i = 0; i < 300; ++i) {
      CHECK(tbest <= cumulative_loss(c, random_in_ball(rng, 4, 0.3), 60) + 1e-9);
    }
  }
}
