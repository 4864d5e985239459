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

#ifndef SURVONS_TESTS_HELPERS_HPP
#define SURVONS_TESTS_HELPERS_HPP

#include <Eigen/Core>

#include "survons/cohort.hpp"
#include "survons/likelihood.hpp"
#include "survons/rng.hpp"

namespace survons::testing {

inline Eigen::VectorXd random_vector(Philox& rng, Eigen::Index d,
                                     double scale = 1.0) {
  Eigen::VectorXd v(d);
  for (Eigen::Index i = 0; i < d; ++i) v[i] = scale * rng.normal();
  return v;
}

/// Uniform draw from the ball of the given radius.
inline Eigen::VectorXd random_in_ball(Philox& rng, Eigen::Index d, double radius) {
  Eigen::VectorXd v = random_vector(rng, d);
  const double r = radius * std::pow(rng.uniform(), 1.0 / static_cast<double>(d));
  return v * (r / v.norm());
}

/// A small cohort mixing constant and piecewise covariate paths, observed
/// over a few rounds.
inline Cohort random_cohort(Philox& rng, Eigen::Index d, int size, int horizon,
                            bool piecewise = true) {
  std::vector<Individual> people;
  for (int i = 0; i < size; ++i) {
    const double tau = horizon * rng.uniform();
    const double u = tau + rng.exponential(0.7);
    const bool delta = rng.uniform() < 0.5;
    if (piecewise && rng.uniform() < 0.5) {
      std::vector<double> bp = {tau};
      std::vector<Eigen::VectorXd> vals = {random_vector(rng, d, 0.6)};
      const int extra = 1 + static_cast<int>(3 * rng.uniform());
      double s = tau;
      for (int k = 0; k < extra; ++k) {
        s += 0.2 + 0.8 * rng.uniform();
        bp.push_back(s);
        vals.push_back(random_vector(rng, d, 0.6));
      }
      people.push_back(Individual::from_observed(
          tau, u, delta, CovariatePath(std::move(bp), std::move(vals))));
    } else {
      people.push_back(Individual::from_observed(
          tau, u, delta, CovariatePath(random_vector(rng, d, 0.6))));
    }
  }
  return Cohort(std::move(people), d);
}

/// Loss context of one round with at least one entry, from a random cohort.
inline LossContext random_context(Philox& rng, Eigen::Index d) {
  for (;;) {
    const Cohort c = random_cohort(rng, d, 12, 3);
    const int t = 1 + static_cast<int>(3 * rng.uniform());
    LossContext ctx = make_loss_context(c, t);
    if (!ctx.empty()) return ctx;
  }
}

inline double rel_err(const Eigen::MatrixXd& a, const Eigen::MatrixXd& b) {
  return (a - b).norm() / std::max(1.0, b.norm());
}

}  // namespace survons::testing

#endif  // SURVONS_TESTS_HELPERS_HPP
