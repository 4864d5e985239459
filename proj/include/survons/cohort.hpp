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

#ifndef SURVONS_COHORT_HPP
#define SURVONS_COHORT_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace survons {

/// Left-continuous piecewise-constant covariate path x(s).
///
/// Piece k holds on (breakpoint[k], breakpoint[k+1]]; the last piece extends
/// to +inf and the first piece also covers everything at or before
/// breakpoint[0]. A constant path is a single piece.
class CovariatePath {
 public:
  CovariatePath() = default;
  /// Constant path.
  explicit CovariatePath(Eigen::VectorXd value);
  /// Breakpoints must be strictly increasing; all values share one dimension.
  CovariatePath(std::vector<double> breakpoints,
                std::vector<Eigen::VectorXd> values);

  Eigen::Index dim() const;
  bool is_constant() const { return values_.size() == 1; }
  std::size_t pieces() const { return values_.size(); }

  /// Path value at time s (left-continuous).
  const Eigen::VectorXd& at(double s) const;

  /// Calls fn(length, value) for every piece overlapping [start, end] with
  /// the overlap length > 0, in time order.
  template <typename Fn>
  void for_each_piece(double start, double end, Fn&& fn) const;

  const std::vector<double>& breakpoints() const { return breakpoints_; }
  const std::vector<Eigen::VectorXd>& values() const { return values_; }

 private:
  std::size_t piece_index(double s) const;

  std::vector<double> breakpoints_{0.0};
  std::vector<Eigen::VectorXd> values_;
};

/// Observation bits and exposure window of one individual on (t-1, t].
struct IntervalExposure {
  bool y = false;
  bool r = false;
  double start = 0.0;
  double end = 0.0;
  double duration = 0.0;
};

/// One subject. Latent event and censoring times are only present for
/// simulated data; estimators read (arrival, observed, event_flag, covariates).
class Individual {
 public:
  /// From simulation ground truth; observed and event_flag are derived.
  static Individual from_latent(double arrival, double event_time,
                                double censor_time, CovariatePath covariates);
  /// From observed data only.
  static Individual from_observed(double arrival, double observed,
                                  bool event_flag, CovariatePath covariates);

  double arrival() const { return arrival_; }
  double observed() const { return observed_; }
  bool event_flag() const { return event_flag_; }
  const std::optional<double>& event_time() const { return event_time_; }
  const std::optional<double>& censor_time() const { return censor_time_; }
  const CovariatePath& covariates() const { return covariates_; }

 private:
  Individual() = default;

  double arrival_ = 0.0;
  std::optional<double> event_time_;
  std::optional<double> censor_time_;
  double observed_ = 0.0;
  bool event_flag_ = false;
  CovariatePath covariates_;
};

enum class ArrivalModel { kUniform, kPoisson };

struct SimulationConfig {
  int n_individuals = 2000;
  int horizon = 300;
  int dim = 4;
  std::uint64_t seed = 0;
  ArrivalModel arrival_model = ArrivalModel::kUniform;
  /// Intensity for the Poisson arrival model.
  double poisson_rate = 1.0;
  /// Drawn from N(0, I_d) when empty.
  std::optional<Eigen::VectorXd> theta_star;
  bool intercept = true;

  void validate() const;
};

class Cohort {
 public:
  Cohort() = default;
  Cohort(std::vector<Individual> individuals, Eigen::Index dim,
         std::optional<Eigen::VectorXd> theta_star = std::nullopt);

  const std::vector<Individual>& individuals() const { return individuals_; }
  std::size_t size() const { return individuals_.size(); }
  bool empty() const { return individuals_.empty(); }
  Eigen::Index dim() const { return dim_; }
  const std::optional<Eigen::VectorXd>& theta_star() const {
    return theta_star_;
  }
  const Individual& operator[](std::size_t i) const { return individuals_[i]; }

  /// Largest observed time; 0 for an empty cohort.
  double max_observed() const;
  /// max_i sup_s ||x_i(s)||_inf.
  double covariate_sup_norm() const;

 private:
  std::vector<Individual> individuals_;
  Eigen::Index dim_ = 0;
  std::optional<Eigen::VectorXd> theta_star_;
};

/// Draws a cohort. Covariates are an optional intercept column followed by
/// standard normals; latent event and censoring durations are independent
/// Exp(exp(theta*^T x)). In the Poisson model arrivals on [0, horizon] come
/// from a rate-`poisson_rate` process and n_individuals is ignored.
Cohort simulate_cohort(const SimulationConfig& config);

IntervalExposure interval_indicators(const Individual& ind, int t);

struct RiskEntry {
  std::size_t index;
  IntervalExposure exposure;
};

/// Individuals with r_it = 1, in index order.
std::vector<RiskEntry> risk_set(const Cohort& cohort, int t);

/// CSV interchange: header `id,tau,u,delta,x_0,...,x_{d-1}`. Constant
/// covariates only.
void write_cohort_csv(const Cohort& cohort, std::ostream& out);
void write_cohort_csv(const Cohort& cohort, const std::string& path);
Cohort read_cohort_csv(std::istream& in);
Cohort read_cohort_csv(const std::string& path);

// ---------------------------------------------------------------------------

template <typename Fn>
void CovariatePath::for_each_piece(double start, double end, Fn&& fn) const {
  if (!(end > start)) return;
  std::size_t k = piece_index(start);
  // piece_index(start) returns the piece holding `start`, but the open
  // integration window begins just after it.
  if (k + 1 < values_.size() && breakpoints_[k + 1] <= start) ++k;
  double lo = start;
  for (; k < values_.size(); ++k) {
    const double piece_end =
        k + 1 < values_.size() ? breakpoints_[k + 1] : end;
    const double hi = piece_end < end ? piece_end : end;
    if (hi > lo) fn(hi - lo, values_[k]);
    lo = hi;
    if (lo >= end) break;
  }
}

}  // namespace survons

#endif  // SURVONS_COHORT_HPP
