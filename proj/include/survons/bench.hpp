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

#ifndef SURVONS_BENCH_HPP
#define SURVONS_BENCH_HPP

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <Eigen/Core>

#include "survons/cohort.hpp"
#include "survons/likelihood.hpp"

namespace survons {

// ---------------------------------------------------------------- grids ----

enum class GridKind { kGamma1, kGamma2, kExplicit };

std::string to_string(GridKind kind);
GridKind parse_grid_kind(std::string_view text);

struct GridSpec {
  GridKind kind = GridKind::kGamma2;
  int k = 10;
  double grad_bound = 1.0;
  double radius = 1.0;
  int horizon = 300;
  /// Used when kind == kExplicit; strictly increasing, positive.
  std::vector<double> values;
  /// Gamma_1 runs from 1/sqrt(n) to 1/(4GD). When 1/sqrt(n) >= 1/(4GD) the
  /// endpoints are inverted and build_grid refuses unless this is set, in
  /// which case the same geometric point set is generated in increasing order.
  bool allow_inverted = false;
};

struct Grid {
  Eigen::VectorXd gammas;
  /// epsilon_k = 1 / (gamma_k D)^2.
  Eigen::VectorXd epsilons;
};

/// K points equidistant in log between the endpoints of the chosen kind.
Grid build_grid(const GridSpec& spec);

// ----------------------------------------------------------- experiments ---

enum class Algorithm {
  kOgd,
  /// One ONS learner on the raw interval gradients.
  kOnsFixed,
  /// BOA over ONS experts with surrogate curvature gamma_k.
  kBoaOns,
  /// BOA over ONS experts with surrogate curvature max(gamma_t/4, gamma_k).
  kSurvOns,
};

std::string to_string(Algorithm algorithm);
Algorithm parse_algorithm(std::string_view text);

struct RunConfig {
  SimulationConfig sim;
  Algorithm algorithm = Algorithm::kSurvOns;
  /// Grid kind, K, explicit values and the inversion switch. Its G, D and n
  /// are filled in per replication.
  GridSpec grid;
  /// G for the grid and for OGD; estimated by the pilot run when absent.
  std::optional<double> grad_bound;
  int replications = 20;
  /// Explicit D; when absent D = 1.1 ||theta*|| per replication.
  std::optional<double> radius;
  /// Learning rate for kOnsFixed; when absent the best grid value per
  /// replication is selected (see run_best_in_grid).
  std::optional<double> ons_gamma;
  int pilot_reps = 3;
  double minimizer_tol = 1e-8;
  /// Surrogate curvature substituted on degenerate rounds; 0 keeps gamma_k.
  double gamma_floor = 0.0;
  /// 0 = hardware concurrency.
  unsigned threads = 0;

  void validate() const;
};

/// One round of one run.
struct TraceRow {
  int t = 0;
  double loss_pred = 0.0;
  /// Interval loss at the batch minimizer theta_hat (regret comparator).
  double loss_star = 0.0;
  /// Interval loss at the generating parameter theta*.
  double loss_truth = 0.0;
  double grad_norm = 0.0;
  double mu = 0.0;
  double gamma = 0.0;
  /// sum_{s<=t} loss_pred - loss_star.
  double cum_regret = 0.0;
  /// ||mean_{s<=t} pred_s - theta*||^2.
  double sq_err_mean_iterate = 0.0;
  double pred_norm = 0.0;
  Eigen::VectorXd weights;
  Eigen::VectorXd prediction;
  Eigen::VectorXd mean_prediction;
};

struct ExperimentTrace {
  Algorithm algorithm = Algorithm::kSurvOns;
  int replication = 0;
  std::uint64_t seed = 0;
  double radius = 0.0;
  double grad_bound = 0.0;
  Eigen::VectorXd grid;
  Eigen::VectorXd theta_star;
  Eigen::VectorXd theta_batch;
  std::vector<TraceRow> rows;

  /// sum_t loss_pred - loss_truth over the whole run.
  double final_nll_difference() const;
  int degenerate_rounds() const;
};

/// Pointwise means over replications.
struct AveragedRow {
  int t = 0;
  double cum_nll_diff = 0.0;
  double cum_regret = 0.0;
  double sq_err_mean_iterate = 0.0;
  double gamma = 0.0;
};

struct ExperimentResult {
  std::vector<ExperimentTrace> traces;
  std::vector<AveragedRow> averaged;
  double grad_bound = 0.0;
};

/// Everything an online run needs from one simulated data set.
struct Replication {
  int index = 0;
  std::uint64_t seed = 0;
  Cohort cohort;
  std::vector<LossContext> contexts;
  double radius = 0.0;
  Eigen::VectorXd theta_star;
  BatchMinimizerResult batch;
};

/// Seed of replication r, an independent substream of the master seed.
std::uint64_t replication_seed(std::uint64_t master, int replication);

/// Simulates replication r and computes its batch minimizer.
Replication prepare_replication(const RunConfig& config, int r);

/// Online run of one algorithm on a prepared replication. `grid` is ignored
/// by OGD; kOnsFixed uses grid[0] as its learning rate.
ExperimentTrace run_online(const Replication& rep, Algorithm algorithm,
                           const Grid& grid, double grad_bound,
                           double gamma_floor = 0.0);

/// max_t ||grad l_t(theta_hat_t)|| along a SurvONS run.
double pilot_gradient_max(std::span<const LossContext> contexts, double radius,
                          const Grid& grid);

struct PilotResult {
  double grad_bound = 0.0;
  std::vector<double> per_rep_max;
};

/// Pilot estimate of G: SurvONS with the provisional grid Gamma_2(G = 1) on
/// `pilot_reps` freshly simulated cohorts (own substreams). The first pilot
/// cohort can be supplied instead of simulated.
PilotResult estimate_G_pilot(const RunConfig& config, int pilot_reps,
                             const Cohort* first_cohort = nullptr);

/// Grid for a replication: config.grid with G and D filled in.
Grid replication_grid(const RunConfig& config, double grad_bound,
                      double radius);

/// Seed of pilot cohort p; disjoint from the replication substreams.
std::uint64_t pilot_seed(std::uint64_t master, int pilot);

/// G from config or pilot.
double resolve_grad_bound(const RunConfig& config);

ExperimentResult run_experiment(const RunConfig& config);

/// Runs fixed-gamma ONS for every grid value on each replication and keeps,
/// per replication, the one with the lowest final cumulative loss. This
/// selection uses hindsight and overstates the comparator.
ExperimentResult run_best_in_grid(const RunConfig& config);

std::vector<AveragedRow> average_traces(
    const std::vector<ExperimentTrace>& traces);

// ------------------------------------------------------------ emission ----

/// t, loss_pred, loss_star, grad_norm, mu_t, gamma_t, cum_regret,
/// sq_err_mean_iterate, pred_norm, w_1..w_K.
std::vector<std::string> trace_csv_header(Eigen::Index k);
void emit_csv(const ExperimentTrace& trace, std::ostream& out);
void emit_csv(const ExperimentTrace& trace, const std::string& path);
/// Parses the columns written by emit_csv back into rows (loss_truth is not
/// part of the file and comes back as NaN).
std::vector<TraceRow> read_trace_csv(std::istream& in);
std::vector<TraceRow> read_trace_csv(const std::string& path);

void emit_averaged_csv(const std::vector<AveragedRow>& rows,
                       const std::string& path);

struct FigureSeries {
  std::string label;
  std::vector<double> x;
  std::vector<double> y;
};

/// Static SVG figures in `directory`:
///  gamma_density_<tag>.svg     histogram (Freedman-Diaconis bins) of gamma_t
///  cum_nll_<tag>.svg           averaged cumulative NLL difference per method
///  sq_error_<tag>.svg          log-log averaged quadratic error per method
struct FigureSet {
  std::string tag;
  std::vector<std::pair<std::string, const ExperimentResult*>> methods;
};
void emit_figures(const FigureSet& set, const std::string& directory);

/// Log-log line chart; used for the bound-order curves too.
void write_line_chart(const std::string& path, const std::string& title,
                      const std::vector<FigureSeries>& series, bool log_x,
                      bool log_y);
/// Histogram with Freedman-Diaconis bin width.
void write_histogram(const std::string& path, const std::string& title,
                     const std::vector<std::vector<double>>& samples,
                     const std::vector<std::string>& labels);

/// Freedman-Diaconis bin width 2 IQR n^{-1/3}.
double freedman_diaconis_width(std::vector<double> values);

}  // namespace survons

#endif  // SURVONS_BENCH_HPP
