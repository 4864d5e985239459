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

#include "survons/cohort.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

#include "survons/error.hpp"
#include "survons/format.hpp"
#include "survons/rng.hpp"

namespace survons {

CovariatePath::CovariatePath(Eigen::VectorXd value) {
  values_.push_back(std::move(value));
}

CovariatePath::CovariatePath(std::vector<double> breakpoints,
                             std::vector<Eigen::VectorXd> values)
    : breakpoints_(std::move(breakpoints)), values_(std::move(values)) {
  if (values_.empty() || breakpoints_.size() != values_.size()) {
    throw InvalidArgument(
        "covariate path needs one breakpoint per piece and at least one piece");
  }
  for (std::size_t k = 1; k < values_.size(); ++k) {
    if (!(breakpoints_[k] > breakpoints_[k - 1])) {
      throw InvalidArgument("covariate breakpoints must be strictly increasing");
    }
    if (values_[k].size() != values_[0].size()) {
      throw InvalidArgument("covariate pieces have mismatched dimensions");
    }
  }
}

Eigen::Index CovariatePath::dim() const {
  return values_.empty() ? 0 : values_.front().size();
}

std::size_t CovariatePath::piece_index(double s) const {
  const auto count = static_cast<std::size_t>(
      std::lower_bound(breakpoints_.begin(), breakpoints_.end(), s) -
      breakpoints_.begin());
  return count == 0 ? 0 : count - 1;
}

const Eigen::VectorXd& CovariatePath::at(double s) const {
  return values_[piece_index(s)];
}

Individual Individual::from_latent(double arrival, double event_time,
                                   double censor_time,
                                   CovariatePath covariates) {
  if (!(event_time >= arrival) || !(censor_time >= arrival)) {
    throw InvalidArgument("event and censoring times must not precede arrival");
  }
  Individual ind = from_observed(arrival, std::min(event_time, censor_time),
                                 event_time <= censor_time,
                                 std::move(covariates));
  ind.event_time_ = event_time;
  ind.censor_time_ = censor_time;
  return ind;
}

Individual Individual::from_observed(double arrival, double observed,
                                     bool event_flag,
                                     CovariatePath covariates) {
  if (!(arrival >= 0.0) || !(observed >= arrival)) {
    throw InvalidArgument("need 0 <= arrival <= observed time");
  }
  if (covariates.pieces() > 1 && covariates.breakpoints().front() > arrival) {
    throw InvalidArgument("first covariate breakpoint must not follow arrival");
  }
  Individual ind;
  ind.arrival_ = arrival;
  ind.observed_ = observed;
  ind.event_flag_ = event_flag;
  ind.covariates_ = std::move(covariates);
  return ind;
}

void SimulationConfig::validate() const {
  if (n_individuals < 1 || horizon < 1 || dim < 1) {
    throw InvalidArgument("individuals, horizon and dim must all be >= 1");
  }
  if (intercept && dim < 2) {
    throw InvalidArgument(
        "dim must be >= 2 when an intercept column is requested");
  }
  if (arrival_model == ArrivalModel::kPoisson && !(poisson_rate > 0.0)) {
    throw InvalidArgument("Poisson arrival rate must be positive");
  }
  if (theta_star && theta_star->size() != dim) {
    throw InvalidArgument("theta_star dimension does not match dim");
  }
}

Cohort::Cohort(std::vector<Individual> individuals, Eigen::Index dim,
               std::optional<Eigen::VectorXd> theta_star)
    : individuals_(std::move(individuals)),
      dim_(dim),
      theta_star_(std::move(theta_star)) {
  for (const auto& ind : individuals_) {
    if (ind.covariates().dim() != dim_) {
      throw InvalidArgument("covariate dimension does not match cohort dim");
    }
  }
  if (theta_star_ && theta_star_->size() != dim_) {
    throw InvalidArgument("theta_star dimension does not match cohort dim");
  }
}

double Cohort::max_observed() const {
  double m = 0.0;
  for (const auto& ind : individuals_) m = std::max(m, ind.observed());
  return m;
}

double Cohort::covariate_sup_norm() const {
  double m = 0.0;
  for (const auto& ind : individuals_) {
    for (const auto& v : ind.covariates().values()) {
      m = std::max(m, v.cwiseAbs().maxCoeff());
    }
  }
  return m;
}

Cohort simulate_cohort(const SimulationConfig& config) {
  config.validate();
  const Philox root(config.seed);
  Philox theta_stream = root.split(0);
  Philox arrival_stream = root.split(1);
  Philox subject_stream = root.split(2);

  Eigen::VectorXd theta_star(config.dim);
  if (config.theta_star) {
    theta_star = *config.theta_star;
  } else {
    for (Eigen::Index j = 0; j < config.dim; ++j) {
      theta_star[j] = theta_stream.normal();
    }
  }

  std::vector<double> arrivals;
  if (config.arrival_model == ArrivalModel::kUniform) {
    arrivals.reserve(static_cast<std::size_t>(config.n_individuals));
    for (int i = 0; i < config.n_individuals; ++i) {
      arrivals.push_back(config.horizon * arrival_stream.uniform());
    }
  } else {
    double clock = arrival_stream.exponential(config.poisson_rate);
    while (clock <= config.horizon) {
      arrivals.push_back(clock);
      clock += arrival_stream.exponential(config.poisson_rate);
    }
  }

  std::vector<Individual> individuals;
  individuals.reserve(arrivals.size());
  const Eigen::Index first_random = config.intercept ? 1 : 0;
  for (const double tau : arrivals) {
    Eigen::VectorXd x(config.dim);
    if (config.intercept) x[0] = 1.0;
    for (Eigen::Index j = first_random; j < config.dim; ++j) {
      x[j] = subject_stream.normal();
    }
    const double rate = std::exp(theta_star.dot(x));
    const double event_time = tau + subject_stream.exponential(rate);
    const double censor_time = tau + subject_stream.exponential(rate);
    individuals.push_back(Individual::from_latent(
        tau, event_time, censor_time, CovariatePath(std::move(x))));
  }
  return Cohort(std::move(individuals), config.dim, std::move(theta_star));
}

IntervalExposure interval_indicators(const Individual& ind, int t) {
  IntervalExposure e;
  const double lo = t - 1.0;
  const double hi = static_cast<double>(t);
  const double u = ind.observed();
  e.r = ind.arrival() <= hi && u > lo;
  e.y = ind.event_flag() && lo < u && u <= hi;
  e.start = std::max(ind.arrival(), lo);
  e.end = std::min(u, hi);
  e.duration = e.r ? std::max(e.end - e.start, 0.0) : 0.0;
  return e;
}

std::vector<RiskEntry> risk_set(const Cohort& cohort, int t) {
  std::vector<RiskEntry> out;
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    const IntervalExposure e = interval_indicators(cohort[i], t);
    if (e.r) out.push_back({i, e});
  }
  return out;
}

void write_cohort_csv(const Cohort& cohort, std::ostream& out) {
  out << "id,tau,u,delta";
  for (Eigen::Index j = 0; j < cohort.dim(); ++j) out << ",x_" << j;
  out << '\n';
  for (std::size_t i = 0; i < cohort.size(); ++i) {
    const Individual& ind = cohort[i];
    if (!ind.covariates().is_constant()) {
      throw InvalidArgument(
          "cohort CSV supports constant covariates only (individual " +
          std::to_string(i) + ")");
    }
    out << i << ',' << format_double(ind.arrival()) << ','
        << format_double(ind.observed()) << ',' << (ind.event_flag() ? 1 : 0);
    const Eigen::VectorXd& x = ind.covariates().values().front();
    for (Eigen::Index j = 0; j < x.size(); ++j) out << ',' << format_double(x[j]);
    out << '\n';
  }
}

void write_cohort_csv(const Cohort& cohort, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw InvalidArgument("cannot open for writing: " + path);
  write_cohort_csv(cohort, out);
  if (!out) throw InvalidArgument("write failed: " + path);
}

Cohort read_cohort_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("cohort CSV is empty");
  const std::vector<std::string> header = split_csv_line(line);
  if (header.size() < 5 || header[0] != "id" || header[1] != "tau" ||
      header[2] != "u" || header[3] != "delta") {
    throw InvalidArgument("cohort CSV header must start with id,tau,u,delta,x_0");
  }
  const auto dim = static_cast<Eigen::Index>(header.size() - 4);
  std::vector<Individual> individuals;
  std::size_t row = 1;
  while (std::getline(in, line)) {
    ++row;
    if (line.empty()) continue;
    const std::vector<std::string> cells = split_csv_line(line);
    if (cells.size() != header.size()) {
      throw InvalidArgument("cohort CSV row " + std::to_string(row) +
                            " has the wrong number of columns");
    }
    Eigen::VectorXd x(dim);
    for (Eigen::Index j = 0; j < dim; ++j) {
      x[j] = parse_double(cells[static_cast<std::size_t>(4 + j)]);
    }
    const double delta = parse_double(cells[3]);
    if (delta != 0.0 && delta != 1.0) {
      throw InvalidArgument("delta must be 0 or 1 (row " + std::to_string(row) +
                            ")");
    }
    individuals.push_back(Individual::from_observed(
        parse_double(cells[1]), parse_double(cells[2]), delta == 1.0,
        CovariatePath(std::move(x))));
  }
  return Cohort(std::move(individuals), dim);
}

Cohort read_cohort_csv(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open for reading: " + path);
  return read_cohort_csv(in);
}

}  // namespace survons
