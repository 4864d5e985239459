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

#include <boost/multiprecision/cpp_bin_float.hpp>
#include <Eigen/Eigenvalues>

#include "helpers.hpp"
#include "survons/concavity.hpp"
#include "survons/error.hpp"

using namespace survons;
using survons::testing::random_in_ball;
using survons::testing::random_vector;
using Big = boost::multiprecision::cpp_bin_float_50;

namespace {

double ddc_reference(double mu, double z) {
  const Big m(mu), zz(z);
  const Big v = 2 * (zz - boost::multiprecision::log1p(m * zz) / m) / (zz * zz);
  return static_cast<double>(v);
}

std::vector<double> log_grid(double lo, double hi, int points) {
  std::vector<double> out;
  for (int i = 0; i < points; ++i) {
    out.push_back(lo * std::pow(hi / lo, static_cast<double>(i) / (points - 1)));
  }
  return out;
}

}  // namespace

TEST_CASE("exp-concavity constant") {
  Eigen::VectorXd x(3);
  x << 0.6, 0.0, 0.8;
  CHECK(*exp_concavity_mu(x, x * x.transpose()) == doctest::Approx(1.0).epsilon(1e-15));
  CHECK(*exp_concavity_mu(2.0 * x, 3.0 * x * x.transpose()) ==
        doctest::Approx(3.0 / 4.0).epsilon(1e-15));
  CHECK(*exp_concavity_mu(Eigen::VectorXd::Unit(3, 0), Eigen::MatrixXd::Identity(3, 3)) == 1.0);
  CHECK_FALSE(exp_concavity_mu(Eigen::VectorXd::Zero(3), Eigen::MatrixXd::Identity(3, 3)));

  Philox rng(4);
  for (int i = 0; i < 200; ++i) {
    const Eigen::MatrixXd b = Eigen::MatrixXd::NullaryExpr(4, 4, [&] { return rng.normal(); });
    const Eigen::MatrixXd h = b * b.transpose();
    const Eigen::VectorXd g = random_vector(rng, 4);
    const double mu = *exp_concavity_mu(g, h);
    // Exact along g.
    const Eigen::MatrixXd m = h - mu * g * g.transpose();
    CHECK(std::abs(g.dot(m * g)) <= 1e-12 * h.norm() * g.squaredNorm());
  }
}

TEST_CASE("ddc constant examples and limits") {
  CHECK(std::abs(*ddc_gamma(1.0, 1.0, 1.0) - 2.0 * (1.0 - std::log(2.0))) <= 1e-12);
  CHECK(std::abs(*ddc_gamma(1e-8, 1.0, 1.0) - 1e-8) <= 0.01 * 1e-8);
  CHECK(std::abs(*ddc_gamma(1e8, 1.0, 1.0) - 2.0) <= 1e-6);
  CHECK(std::abs(*ddc_gamma(1e8, 0.5, 4.0) - 1.0) <= 1e-6);
  CHECK_FALSE(ddc_gamma(1.0, 0.0, 1.0));
  CHECK_THROWS_AS(ddc_gamma(0.0, 1.0, 1.0), InvalidArgument);
}

TEST_CASE("ddc constant against a 50-digit evaluation") {
  for (const double mu : log_grid(1e-12, 1e6, 60)) {
    for (const double z : log_grid(1e-4, 1e4, 30)) {
      const double ours = *ddc_gamma(mu, z, 1.0);
      const double ref = ddc_reference(mu, z);
      CHECK(std::abs(ours - ref) <= 1e-13 * ref);
    }
  }
}

TEST_CASE("ddc constant improves on the Hazan constant and is monotone") {
  const auto mus = log_grid(1e-4, 1e4, 81);
  for (const double z : log_grid(1e-3, 1e3, 61)) {
    double prev = 0.0;
    for (const double mu : mus) {
      const double g = *ddc_gamma(mu, z, 1.0);
      CHECK(g >= 0.5 * std::min(1.0 / z, mu));
      CHECK(g >= prev);
      prev = g;
    }
  }
}

TEST_CASE("clip rule") {
  CHECK(clip_gamma(8.0, 0.1) == 2.0);
  CHECK(clip_gamma(0.2, 0.1) == 0.1);
  CurvatureEstimate degenerate;
  CHECK(clip_gamma(degenerate, 0.1) == 0.1);
  CHECK(clip_gamma(std::nan(""), 0.1) == 0.1);
  CHECK_THROWS_AS(clip_gamma(1.0, 0.0), InvalidArgument);
}

TEST_CASE("curvature estimate degeneracy floor") {
  const Eigen::MatrixXd h = Eigen::MatrixXd::Identity(2, 2);
  CurvatureEstimate e = estimate_curvature(Eigen::VectorXd::Constant(2, 1e-13), h, 1.0);
  CHECK_FALSE(e.valid);
  CHECK(std::isnan(e.gamma));
  e = estimate_curvature(Eigen::VectorXd::Constant(2, 0.5), h, 1.0);
  CHECK(e.valid);
  CHECK(e.mu > 0.0);
  CHECK(e.gamma > 0.0);
  CHECK(degeneracy_floor(1.0) == 2e-12);
}

TEST_CASE("surrogate value and gradient") {
  Philox rng(12);
  for (int i = 0; i < 200; ++i) {
    SurrogateAnchor a{random_vector(rng, 4), rng.normal(), random_vector(rng, 4),
                      rng.uniform()};
    CHECK(surrogate_value(a, a.anchor) == a.loss_at_anchor);
    CHECK(surrogate_gradient(a, a.anchor) == a.grad_at_anchor);
    const Eigen::VectorXd theta = random_vector(rng, 4);
    // Scalar re-evaluation.
    double z = 0.0;
    for (int j = 0; j < 4; ++j) z += a.grad_at_anchor[j] * (theta[j] - a.anchor[j]);
    CHECK(surrogate_value(a, theta) ==
          doctest::Approx(a.loss_at_anchor + z + 0.5 * a.gamma * z * z).epsilon(1e-14));
    const Eigen::VectorXd g = surrogate_gradient(a, theta);
    Eigen::VectorXd fd(4);
    const double h = 1e-6;
    for (int j = 0; j < 4; ++j) {
      Eigen::VectorXd e = Eigen::VectorXd::Zero(4);
      e[j] = h;
      fd[j] = (surrogate_value(a, theta + e) - surrogate_value(a, theta - e)) / (2 * h);
    }
    CHECK((fd - g).norm() / std::max(1.0, g.norm()) <= 1e-7);
  }
  SurrogateAnchor flat{Eigen::VectorXd::Ones(2), 3.0, Eigen::VectorXd::Zero(2), 0.5};
  CHECK(surrogate_value(flat, Eigen::VectorXd::Constant(2, 7.0)) == 3.0);
  CHECK(surrogate_gradient(flat, Eigen::VectorXd::Constant(2, 7.0)).isZero());
}

TEST_CASE("surrogate ddc constant") {
  CHECK(surrogate_ddc_constant(0.7, 0.0, 3.0) == 0.7);
  CHECK(surrogate_ddc_constant(1.0, 1.0, 1.0) == 0.25);
  Philox rng(2);
  for (int i = 0; i < 1000; ++i) {
    const double g = rng.uniform() * 10, gn = rng.uniform() * 10, d = rng.uniform() * 10;
    CHECK(surrogate_ddc_constant(g, gn, d) <= g);
  }
}

TEST_CASE("surrogate inequality on random tuples") {
  Philox rng(99);
  for (int i = 0; i < 500; ++i) {
    const double radius = 0.2 + 3.0 * rng.uniform();
    const Eigen::VectorXd g = random_vector(rng, 4, 0.2 + 5.0 * rng.uniform());
    const double gamma = rng.uniform() / (4.0 * g.norm() * radius);
    const SurrogateAnchor a{random_in_ball(rng, 4, radius), rng.normal(), g, gamma};
    const Eigen::VectorXd t1 = random_in_ball(rng, 4, radius);
    const Eigen::VectorXd t2 = random_in_ball(rng, 4, radius);
    const double hat = surrogate_ddc_constant(gamma, g.norm(), 2.0 * radius);
    const Eigen::VectorXd g1 = surrogate_gradient(a, t1);
    const double lin = g1.dot(t2 - t1);
    const double lhs = surrogate_value(a, t2);
    const double rhs = surrogate_value(a, t1) + lin + 0.5 * hat * lin * lin;
    CHECK(lhs - rhs >= -1e-9);
  }
}
