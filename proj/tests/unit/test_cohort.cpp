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
#include <map>
#include <sstream>

#include "helpers.hpp"
#include "survons/cohort.hpp"
#include "survons/error.hpp"

using namespace survons;

namespace {

Individual person(double tau, double u, bool delta) {
  return Individual::from_observed(tau, u, delta,
                                   CovariatePath(Eigen::VectorXd::Ones(2)));
}

}  // namespace

TEST_CASE("interval indicators on hand examples") {
  const Individual a = person(0.5, 2.3, true);
  IntervalExposure e = interval_indicators(a, 3);
  CHECK(e.y);
  CHECK(e.r);
  CHECK(e.duration == doctest::Approx(0.3));
  CHECK(e.start == 2.0);
  CHECK(e.end == doctest::Approx(2.3));

  e = interval_indicators(a, 2);
  CHECK_FALSE(e.y);
  CHECK(e.r);
  CHECK(e.duration == 1.0);

  e = interval_indicators(person(4.0, 6.0, true), 2);
  CHECK_FALSE(e.y);
  CHECK_FALSE(e.r);
  CHECK(e.duration == 0.0);

  // First interval starts at the arrival.
  e = interval_indicators(a, 1);
  CHECK(e.r);
  CHECK(e.duration == doctest::Approx(0.5));

  // Censored individuals never carry y = 1.
  e = interval_indicators(person(0.5, 2.3, false), 3);
  CHECK_FALSE(e.y);
  CHECK(e.r);
}

TEST_CASE("indicator invariants on random individuals") {
  Philox rng(11);
  for (int i = 0; i < 2000; ++i) {
    const double tau = 10 * rng.uniform();
    const Individual ind = person(tau, tau + rng.exponential(0.5), rng.uniform() < 0.5);
    for (int t = 1; t <= 15; ++t) {
      const IntervalExposure e = interval_indicators(ind, t);
      CHECK((!e.y || e.r));
      CHECK(e.duration >= 0.0);
      CHECK(e.duration <= 1.0);
      if (!e.r) CHECK(e.duration == 0.0);
    }
  }
}

TEST_CASE("risk set") {
  CHECK(risk_set(Cohort({}, 2), 1).empty());
  Cohort one({person(0.5, 2.3, true)}, 2);
  CHECK(risk_set(one, 5).empty());
  CHECK(risk_set(one, 3).size() == 1);

  Philox rng(5);
  const Cohort c = testing::random_cohort(rng, 3, 200, 10);
  for (int t = 1; t <= 12; ++t) {
    std::size_t brute = 0;
    for (const auto& ind : c.individuals()) {
      const bool at_risk = ind.arrival() <= t && ind.observed() > t - 1;
      if (at_risk) ++brute;
    }
    const auto rs = risk_set(c, t);
    CHECK(rs.size() == brute);
    for (std::size_t i = 1; i < rs.size(); ++i) CHECK(rs[i].index > rs[i - 1].index);
  }
}

TEST_CASE("individual invariants and validation") {
  CHECK_THROWS_AS(person(1.0, 0.5, true), InvalidArgument);
  CHECK_THROWS_AS(Individual::from_latent(1.0, 0.5, 2.0, CovariatePath(Eigen::VectorXd::Ones(1))),
                  InvalidArgument);
  const Individual l = Individual::from_latent(1.0, 3.0, 2.0, CovariatePath(Eigen::VectorXd::Ones(1)));
  CHECK(l.observed() == 2.0);
  CHECK_FALSE(l.event_flag());
  const Individual m = Individual::from_latent(1.0, 2.0, 3.0, CovariatePath(Eigen::VectorXd::Ones(1)));
  CHECK(m.observed() == 2.0);
  CHECK(m.event_flag());
  CHECK_THROWS_AS(CovariatePath({0.0, 0.0}, {Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)}),
                  InvalidArgument);
  CHECK_THROWS_AS(Individual::from_observed(
                      0.5, 1.0, true,
                      CovariatePath({0.7, 0.9}, {Eigen::VectorXd::Ones(1), Eigen::VectorXd::Ones(1)})),
                  InvalidArgument);
}

TEST_CASE("covariate path is left-continuous") {
  Eigen::VectorXd a(1), b(1);
  a << 1.0;
  b << 2.0;
  const CovariatePath p({0.0, 1.0}, {a, b});
  CHECK(p.at(0.5)[0] == 1.0);
  CHECK(p.at(1.0)[0] == 1.0);
  CHECK(p.at(1.0 + 1e-12)[0] == 2.0);
  double total = 0.0;
  double weighted = 0.0;
  p.for_each_piece(0.5, 1.5, [&](double len, const Eigen::VectorXd& v) {
    total += len;
    weighted += len * v[0];
  });
  CHECK(total == doctest::Approx(1.0));
  CHECK(weighted == doctest::Approx(1.5));
}

TEST_CASE("simulation config validation") {
  SimulationConfig c;
  c.dim = 1;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c.intercept = false;
  CHECK_NOTHROW(c.validate());
  c.n_individuals = 0;
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
  c = SimulationConfig{};
  c.theta_star = Eigen::VectorXd::Zero(3);
  CHECK_THROWS_AS(c.validate(), InvalidArgument);
}

TEST_CASE("simulation is deterministic in the seed") {
  SimulationConfig c;
  c.n_individuals = 300;
  c.seed = 9;
  std::ostringstream a, b, other;
  write_cohort_csv(simulate_cohort(c), a);
  write_cohort_csv(simulate_cohort(c), b);
  c.seed = 10;
  write_cohort_csv(simulate_cohort(c), other);
  CHECK(a.str() == b.str());
  CHECK(a.str() != other.str());
}

TEST_CASE("zero parameter gives Exp(1) durations and balanced censoring") {
  SimulationConfig c;
  c.n_individuals = 20000;
  c.theta_star = Eigen::VectorXd::Zero(4);
  c.seed = 2;
  const Cohort cohort = simulate_cohort(c);
  double sum = 0.0;
  int events = 0;
  for (const auto& ind : cohort.individuals()) {
    sum += *ind.event_time() - ind.arrival();
    if (ind.event_flag()) ++events;
    CHECK(ind.arrival() >= 0.0);
    CHECK(ind.arrival() <= c.horizon);
  }
  const double n = static_cast<double>(cohort.size());
  CHECK(std::abs(sum / n - 1.0) < 4.0 / std::sqrt(n));
  CHECK(std::abs(events / n - 0.5) <= 3.0 * std::sqrt(0.25 / n));
}

TEST_CASE("event durations match exp(-s) by linear-predictor bin") {
  SimulationConfig c;
  c.n_individuals = 10000;
  c.horizon = 1000;
  c.seed = 17;
  const Cohort cohort = simulate_cohort(c);
  const Eigen::VectorXd theta = *cohort.theta_star();
  std::map<int, std::vector<std::pair<double, double>>> bins;
  for (const auto& ind : cohort.individuals()) {
    const double s = theta.dot(ind.covariates().at(ind.arrival()));
    bins[static_cast<int>(std::floor(s * 2.0))].push_back(
        {*ind.event_time() - ind.arrival(), std::exp(-s)});
  }
  int checked = 0;
  for (const auto& [key, members] : bins) {
    if (members.size() < 300) continue;
    double obs = 0.0, expected = 0.0, second = 0.0;
    for (const auto& [dur, mean] : members) {
      obs += dur;
      expected += mean;
      second += 2.0 * mean * mean;
    }
    const double m = static_cast<double>(members.size());
    // Var(T | s) = e^{-2s}; sum over members.
    const double sd = std::sqrt(second / 2.0) / m;
    CHECK(std::abs(obs / m - expected / m) < 4.0 * sd);
    ++checked;
  }
  CHECK(checked >= 3);
}

TEST_CASE("poisson arrivals") {
  SimulationConfig c;
  c.arrival_model = ArrivalModel::kPoisson;
  c.poisson_rate = 2.0;
  c.horizon = 500;
  c.seed = 4;
  const Cohort cohort = simulate_cohort(c);
  const double n = static_cast<double>(cohort.size());
  CHECK(std::abs(n - 1000.0) < 4.0 * std::sqrt(1000.0));
  double prev = 0.0;
  for (const auto& ind : cohort.individuals()) {
    CHECK(ind.arrival() >= prev);
    CHECK(ind.arrival() <= 500.0);
    prev = ind.arrival();
  }
}

TEST_CASE("cohort CSV round trip") {
  SimulationConfig c;
  c.n_individuals = 100;
  c.seed = 1;
  const Cohort a = simulate_cohort(c);
  std::stringstream s;
  write_cohort_csv(a, s);
  const Cohort b = read_cohort_csv(s);
  REQUIRE(b.size() == a.size());
  CHECK(b.dim() == a.dim());
  for (std::size_t i = 0; i < a.size(); ++i) {
    CHECK(b[i].arrival() == a[i].arrival());
    CHECK(b[i].observed() == a[i].observed());
    CHECK(b[i].event_flag() == a[i].event_flag());
    CHECK(b[i].covariates().at(0.0) == a[i].covariates().at(0.0));
  }
  std::stringstream bad("id,tau,u,delta,x_0\n0,1,0.5,1,0.3\n");
  CHECK_THROWS_AS(read_cohort_csv(bad), InvalidArgument);
  std::stringstream bad_delta("id,tau,u,delta,x_0\n0,1,2,3,0.3\n");
  CHECK_THROWS_AS(read_cohort_csv(bad_delta), InvalidArgument);
}
