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

#include "survons/bench.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <fstream>
#include <functional>
#include <limits>
#include <sstream>
#include <thread>

#include "survons/concavity.hpp"
#include "survons/error.hpp"
#include "survons/format.hpp"
#include "survons/optim.hpp"
#include "survons/rng.hpp"

namespace survons {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

// Substream ids; replications and pilots never share a stream.
constexpr std::uint64_t kReplicationStream = 0x5245'5000'0000'0000ULL;
constexpr std::uint64_t kPilotStream = 0x5049'4C00'0000'0000ULL;

Grid finish_grid(Eigen::VectorXd gammas, double radius) {
  Grid g;
  g.epsilons.resize(gammas.size());
  for (Eigen::Index k = 0; k < gammas.size(); ++k) {
    const double scaled = gammas[k] * radius;
    g.epsilons[k] = 1.0 / (scaled * scaled);
  }
  g.gammas = std::move(gammas);
  return g;
}

Eigen::VectorXd geometric(double lo, double hi, int k) {
  Eigen::VectorXd out(k);
  if (k == 1) {
    out[0] = lo;
    return out;
  }
  const double a = std::log(lo);
  const double b = std::log(hi);
  for (int i = 0; i < k; ++i) {
    out[i] = std::exp(a + (b - a) * static_cast<double>(i) / (k - 1));
  }
  out[0] = lo;
  out[k - 1] = hi;
  return out;
}

double default_radius(const RunConfig& config, const Cohort& cohort) {
  if (config.radius) return *config.radius;
  if (!cohort.theta_star()) {
    throw InvalidArgument("no generating parameter available; D must be given");
  }
  const double d = 1.1 * cohort.theta_star()->norm();
  if (!(d > 0.0)) {
    throw InvalidArgument("D = 1.1 ||theta*|| is zero; give D explicitly");
  }
  return d;
}

// Runs fn(i) for i in [0, count) on a small thread pool. Results are written
// by index, so the outcome does not depend on scheduling. The exception of the
// lowest failing index is rethrown.
void parallel_for(int count, unsigned threads,
                  const std::function<void(int)>& fn) {
  if (threads == 0) threads = std::max(1u, std::thread::hardware_concurrency());
  threads = std::min<unsigned>(threads, static_cast<unsigned>(std::max(count, 1)));
  std::vector<std::exception_ptr> errors(static_cast<std::size_t>(count));
  std::atomic<int> next{0};
  auto worker = [&] {
    for (int i = next++; i < count; i = next++) {
      try {
        fn(i);
      } catch (...) {
        errors[static_cast<std::size_t>(i)] = std::current_exception();
      }
    }
  };
  if (threads <= 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned i = 0; i < threads; ++i) pool.emplace_back(worker);
    for (auto& th : pool) th.join();
  }
  for (const auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

Eigen::Index trace_width(const ExperimentTrace& trace) {
  if (!trace.rows.empty()) return trace.rows.front().weights.size();
  return std::max<Eigen::Index>(trace.grid.size(), 1);
}

}  // namespace

// ----------------------------------------------------------------- grids ---

std::string to_string(GridKind kind) {
  switch (kind) {
    case GridKind::kGamma1:
      return "g1";
    case GridKind::kGamma2:
      return "g2";
    case GridKind::kExplicit:
      return "file";
  }
  return "?";
}

GridKind parse_grid_kind(std::string_view text) {
  if (text == "g1") return GridKind::kGamma1;
  if (text == "g2") return GridKind::kGamma2;
  if (text == "file" || text == "explicit") return GridKind::kExplicit;
  throw InvalidArgument("unknown grid kind '" + std::string(text) +
                        "' (expected g1, g2 or file)");
}

Grid build_grid(const GridSpec& spec) {
  if (spec.kind == GridKind::kExplicit) {
    if (spec.values.empty()) throw InvalidArgument("explicit grid is empty");
    Eigen::VectorXd gammas(static_cast<Eigen::Index>(spec.values.size()));
    for (std::size_t i = 0; i < spec.values.size(); ++i) {
      const double v = spec.values[i];
      if (!(v > 0.0) || !std::isfinite(v)) {
        throw InvalidArgument("explicit grid values must be finite and > 0");
      }
      if (i > 0 && !(v > spec.values[i - 1])) {
        throw InvalidArgument("explicit grid must be strictly increasing");
      }
      gammas[static_cast<Eigen::Index>(i)] = v;
    }
    if (!(spec.radius > 0.0)) throw InvalidArgument("grid: D must be > 0");
    return finish_grid(std::move(gammas), spec.radius);
  }
  if (spec.k < 1) throw InvalidArgument("grid size K must be >= 1");
  if (!(spec.grad_bound > 0.0) || !(spec.radius > 0.0)) {
    throw InvalidArgument("grid: G and D must be > 0");
  }
  const double gd = spec.grad_bound * spec.radius;
  double lo;
  double hi;
  if (spec.kind == GridKind::kGamma2) {
    lo = 1.0 / gd;
    hi = 10.0 / gd;
  } else {
    if (spec.horizon < 1) throw InvalidArgument("grid: horizon must be >= 1");
    lo = 1.0 / std::sqrt(static_cast<double>(spec.horizon));
    hi = 1.0 / (4.0 * gd);
    if (!(lo < hi)) {
      if (!spec.allow_inverted || lo == hi) {
        std::ostringstream msg;
        msg << "Gamma_1 endpoints are inverted: 1/sqrt(n) = " << lo
            << " >= 1/(4GD) = " << hi
            << ". Use a longer horizon (n > 16 G^2 D^2 = " << 16.0 * gd * gd
            << "), an explicit grid, or allow the inverted range";
        throw InvalidArgument(msg.str());
      }
      std::swap(lo, hi);
    }
  }
  return finish_grid(geometric(lo, hi, spec.k), spec.radius);
}

// ------------------------------------------------------------ algorithms ---

std::string to_string(Algorithm algorithm) {
  switch (algorithm) {
    case Algorithm::kOgd:
      return "ogd";
    case Algorithm::kOnsFixed:
      return "ons-fixed";
    case Algorithm::kBoaOns:
      return "boa-ons";
    case Algorithm::kSurvOns:
      return "survons";
  }
  return "?";
}

Algorithm parse_algorithm(std::string_view text) {
  if (text == "ogd") return Algorithm::kOgd;
  if (text == "ons-fixed" || text == "ons") return Algorithm::kOnsFixed;
  if (text == "boa-ons") return Algorithm::kBoaOns;
  if (text == "survons") return Algorithm::kSurvOns;
  throw InvalidArgument("unknown algorithm '" + std::string(text) +
                        "' (expected ogd, ons-fixed, boa-ons or survons)");
}

void RunConfig::validate() const {
  sim.validate();
  if (replications < 1) throw InvalidArgument("replications must be >= 1");
  if (pilot_reps < 1) throw InvalidArgument("pilot repetitions must be >= 1");
  if (grid.k < 1) throw InvalidArgument("grid size K must be >= 1");
  if (radius && !(*radius > 0.0)) throw InvalidArgument("D must be > 0");
  if (grad_bound && !(*grad_bound > 0.0)) throw InvalidArgument("G must be > 0");
  if (ons_gamma && !(*ons_gamma > 0.0)) {
    throw InvalidArgument("ONS learning rate must be > 0");
  }
  if (!(minimizer_tol > 0.0)) throw InvalidArgument("minimizer tol must be > 0");
  if (gamma_floor < 0.0) throw InvalidArgument("gamma floor must be >= 0");
}

double ExperimentTrace::final_nll_difference() const {
  double sum = 0.0;
  for (const TraceRow& row : rows) sum += row.loss_pred - row.loss_truth;
  return sum;
}

int ExperimentTrace::degenerate_rounds() const {
  int count = 0;
  for (const TraceRow& row : rows) {
    if (!std::isfinite(row.gamma)) ++count;
  }
  return count;
}

std::uint64_t replication_seed(std::uint64_t master, int replication) {
  return Philox(master)
      .split(kReplicationStream + static_cast<std::uint64_t>(replication))
      .next_u64();
}

std::uint64_t pilot_seed(std::uint64_t master, int pilot) {
  return Philox(master)
      .split(kPilotStream + static_cast<std::uint64_t>(pilot))
      .next_u64();
}

Replication prepare_replication(const RunConfig& config, int r) {
  Replication rep;
  rep.index = r;
  rep.seed = replication_seed(config.sim.seed, r);
  SimulationConfig sim = config.sim;
  sim.seed = rep.seed;
  rep.cohort = simulate_cohort(sim);
  rep.contexts = make_loss_contexts(rep.cohort, sim.horizon);
  rep.radius = default_radius(config, rep.cohort);
  rep.theta_star = rep.cohort.theta_star().value_or(
      Eigen::VectorXd::Constant(sim.dim, kNaN));
  try {
    rep.batch = batch_minimizer(rep.contexts, sim.dim, rep.radius,
                                {config.minimizer_tol, 200});
  } catch (const NumericalError& e) {
    std::ostringstream msg;
    msg << "replication " << r << " (seed " << rep.seed
        << "): batch minimizer failed: " << e.what();
    throw NumericalError(msg.str());
  }
  return rep;
}

ExperimentTrace run_online(const Replication& rep, Algorithm algorithm,
                           const Grid& grid, double grad_bound,
                           double gamma_floor) {
  const Eigen::Index dim = rep.cohort.dim();
  const int n = static_cast<int>(rep.contexts.size());
  ExperimentTrace trace;
  trace.algorithm = algorithm;
  trace.replication = rep.index;
  trace.seed = rep.seed;
  trace.radius = rep.radius;
  trace.grad_bound = grad_bound;
  if (algorithm != Algorithm::kOgd) trace.grid = grid.gammas;
  trace.theta_star = rep.theta_star;
  trace.theta_batch = rep.batch.parameter.theta;
  trace.rows.reserve(static_cast<std::size_t>(n));

  const bool truth_known = rep.theta_star.allFinite();
  std::optional<SurvOnsState> agg;
  std::optional<OnsState> ons;
  std::optional<OgdState> ogd;
  switch (algorithm) {
    case Algorithm::kSurvOns:
    case Algorithm::kBoaOns:
      agg = SurvOnsState::initial(dim, grid.gammas, grid.epsilons, rep.radius);
      break;
    case Algorithm::kOnsFixed:
      if (grid.gammas.size() < 1) throw InvalidArgument("ONS needs a learning rate");
      ons = OnsState::initial(dim, grid.gammas[0], rep.radius, grid.epsilons[0]);
      break;
    case Algorithm::kOgd:
      ogd = OgdState::initial(dim, grad_bound, rep.radius);
      break;
  }
  const AggregationMode mode = algorithm == Algorithm::kSurvOns
                                   ? AggregationMode::kAdaptive
                                   : AggregationMode::kFixed;

  Eigen::VectorXd sum_pred = Eigen::VectorXd::Zero(dim);
  double cum_regret = 0.0;
  for (int t = 1; t <= n; ++t) {
    const LossContext& ctx = rep.contexts[static_cast<std::size_t>(t - 1)];
    TraceRow row;
    row.t = t;
    try {
      if (agg) {
        const RoundOutput out = survons_round(*agg, ctx, mode, gamma_floor);
        row.prediction = out.prediction;
        row.loss_pred = out.loss;
        row.grad_norm = out.curvature.grad_norm;
        row.mu = out.curvature.mu;
        row.gamma = out.curvature.gamma;
        row.weights = out.weights;
      } else {
        const Eigen::VectorXd& theta = ons ? ons->theta : ogd->theta;
        const LossDerivatives d = evaluate_loss(ctx.entries, dim, theta, true);
        const CurvatureEstimate c = estimate_curvature(d.gradient, d.hessian, rep.radius);
        row.prediction = theta;
        row.loss_pred = d.value;
        row.grad_norm = c.grad_norm;
        row.mu = c.mu;
        row.gamma = c.gamma;
        row.weights = Eigen::VectorXd::Ones(1);
        if (ons) {
          *ons = ons_step(std::move(*ons), d.gradient);
        } else {
          *ogd = ogd_step(std::move(*ogd), d.gradient);
        }
      }
      row.loss_star = interval_loss(ctx, rep.batch.parameter.theta);
      row.loss_truth = truth_known ? interval_loss(ctx, rep.theta_star) : kNaN;
    } catch (const NumericalError& e) {
      std::ostringstream msg;
      msg << to_string(algorithm) << " replication " << rep.index << " seed "
          << rep.seed << " round " << t << ": " << e.what();
      throw NumericalError(msg.str());
    }
    sum_pred += row.prediction;
    row.mean_prediction = sum_pred / static_cast<double>(t);
    cum_regret += row.loss_pred - row.loss_star;
    row.cum_regret = cum_regret;
    row.sq_err_mean_iterate =
        truth_known ? (row.mean_prediction - rep.theta_star).squaredNorm() : kNaN;
    row.pred_norm = row.prediction.norm();
    trace.rows.push_back(std::move(row));
  }
  return trace;
}

double pilot_gradient_max(std::span<const LossContext> contexts, double radius,
                          const Grid& grid) {
  if (contexts.empty()) return 0.0;
  SurvOnsState state =
      SurvOnsState::initial(contexts.front().dim, grid.gammas, grid.epsilons, radius);
  double best = 0.0;
  for (const LossContext& ctx : contexts) {
    const RoundOutput out = survons_round(state, ctx);
    best = std::max(best, out.gradient.norm());
  }
  return best;
}

PilotResult estimate_G_pilot(const RunConfig& config, int pilot_reps,
                             const Cohort* first_cohort) {
  if (pilot_reps < 1) throw InvalidArgument("pilot repetitions must be >= 1");
  PilotResult result;
  for (int p = 0; p < pilot_reps; ++p) {
    Cohort cohort;
    if (p == 0 && first_cohort != nullptr) {
      cohort = *first_cohort;
    } else {
      SimulationConfig sim = config.sim;
      sim.seed = pilot_seed(config.sim.seed, p);
      cohort = simulate_cohort(sim);
    }
    double value = 0.0;
    if (!cohort.empty()) {
      const double radius = default_radius(config, cohort);
      GridSpec spec;
      spec.kind = GridKind::kGamma2;
      spec.k = config.grid.k;
      spec.grad_bound = 1.0;
      spec.radius = radius;
      const Grid grid = build_grid(spec);
      const std::vector<LossContext> contexts =
          make_loss_contexts(cohort, config.sim.horizon);
      value = pilot_gradient_max(contexts, radius, grid);
    }
    result.per_rep_max.push_back(value);
    result.grad_bound = std::max(result.grad_bound, value);
  }
  return result;
}

Grid replication_grid(const RunConfig& config, double grad_bound,
                      double radius) {
  GridSpec spec = config.grid;
  spec.grad_bound = grad_bound;
  spec.radius = radius;
  spec.horizon = config.sim.horizon;
  return build_grid(spec);
}

double resolve_grad_bound(const RunConfig& config) {
  if (config.grad_bound) return *config.grad_bound;
  const double g = estimate_G_pilot(config, config.pilot_reps).grad_bound;
  if (!(g > 0.0)) {
    throw InvalidArgument("pilot run saw no risk exposure; G cannot be estimated");
  }
  return g;
}

std::vector<AveragedRow> average_traces(
    const std::vector<ExperimentTrace>& traces) {
  if (traces.empty()) return {};
  const std::size_t n = traces.front().rows.size();
  for (const auto& tr : traces) {
    if (tr.rows.size() != n) throw InvalidArgument("traces differ in length");
  }
  std::vector<AveragedRow> out(n);
  std::vector<double> cum(traces.size(), 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    AveragedRow& row = out[i];
    row.t = traces.front().rows[i].t;
    int gamma_count = 0;
    for (std::size_t r = 0; r < traces.size(); ++r) {
      const TraceRow& src = traces[r].rows[i];
      cum[r] += src.loss_pred - src.loss_truth;
      row.cum_nll_diff += cum[r];
      row.cum_regret += src.cum_regret;
      row.sq_err_mean_iterate += src.sq_err_mean_iterate;
      if (std::isfinite(src.gamma)) {
        row.gamma += src.gamma;
        ++gamma_count;
      }
    }
    const double count = static_cast<double>(traces.size());
    row.cum_nll_diff /= count;
    row.cum_regret /= count;
    row.sq_err_mean_iterate /= count;
    row.gamma = gamma_count > 0 ? row.gamma / gamma_count : kNaN;
  }
  return out;
}

namespace {

ExperimentTrace best_fixed_ons(const Replication& rep, const Grid& grid,
                               double grad_bound) {
  ExperimentTrace best;
  double best_loss = std::numeric_limits<double>::infinity();
  for (Eigen::Index k = 0; k < grid.gammas.size(); ++k) {
    Grid single;
    single.gammas = grid.gammas.segment(k, 1);
    single.epsilons = grid.epsilons.segment(k, 1);
    ExperimentTrace trace = run_online(rep, Algorithm::kOnsFixed, single, grad_bound);
    double total = 0.0;
    for (const TraceRow& row : trace.rows) total += row.loss_pred;
    if (total < best_loss) {
      best_loss = total;
      best = std::move(trace);
    }
  }
  return best;
}

}  // namespace

ExperimentResult run_experiment(const RunConfig& config) {
  config.validate();
  ExperimentResult result;
  result.grad_bound = resolve_grad_bound(config);
  result.traces.resize(static_cast<std::size_t>(config.replications));
  parallel_for(config.replications, config.threads, [&](int r) {
    const Replication rep = prepare_replication(config, r);
    Grid grid;
    if (config.algorithm == Algorithm::kOnsFixed && config.ons_gamma) {
      GridSpec spec;
      spec.kind = GridKind::kExplicit;
      spec.values = {*config.ons_gamma};
      spec.radius = rep.radius;
      grid = build_grid(spec);
    } else if (config.algorithm != Algorithm::kOgd) {
      grid = replication_grid(config, result.grad_bound, rep.radius);
    }
    ExperimentTrace trace;
    if (config.algorithm == Algorithm::kOnsFixed && !config.ons_gamma) {
      trace = best_fixed_ons(rep, grid, result.grad_bound);
    } else {
      trace = run_online(rep, config.algorithm, grid, result.grad_bound,
                         config.gamma_floor);
    }
    result.traces[static_cast<std::size_t>(r)] = std::move(trace);
  });
  result.averaged = average_traces(result.traces);
  return result;
}

ExperimentResult run_best_in_grid(const RunConfig& config) {
  RunConfig c = config;
  c.algorithm = Algorithm::kOnsFixed;
  c.ons_gamma.reset();
  return run_experiment(c);
}

// -------------------------------------------------------------- emission ---

std::vector<std::string> trace_csv_header(Eigen::Index k) {
  std::vector<std::string> h = {"t",          "loss_pred", "loss_star",
                                "grad_norm",  "mu_t",      "gamma_t",
                                "cum_regret", "sq_err_mean_iterate",
                                "pred_norm"};
  for (Eigen::Index i = 1; i <= k; ++i) h.push_back("w_" + std::to_string(i));
  return h;
}

void emit_csv(const ExperimentTrace& trace, std::ostream& out) {
  const Eigen::Index k = trace_width(trace);
  const auto header = trace_csv_header(k);
  for (std::size_t i = 0; i < header.size(); ++i) {
    out << (i ? "," : "") << header[i];
  }
  out << '\n';
  for (const TraceRow& row : trace.rows) {
    out << row.t;
    for (const double v : {row.loss_pred, row.loss_star, row.grad_norm, row.mu,
                           row.gamma, row.cum_regret, row.sq_err_mean_iterate,
                           row.pred_norm}) {
      out << ',' << format_double(v);
    }
    if (row.weights.size() != k) {
      throw InvalidArgument("emit_csv: weight vectors differ in length");
    }
    for (Eigen::Index i = 0; i < k; ++i) out << ',' << format_double(row.weights[i]);
    out << '\n';
  }
}

void emit_csv(const ExperimentTrace& trace, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  emit_csv(trace, out);
  if (!out) throw InvalidArgument("write to '" + path + "' failed");
}

std::vector<TraceRow> read_trace_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line)) throw InvalidArgument("trace CSV: missing header");
  const auto header = split_csv_line(line);
  if (header.size() < 10) throw InvalidArgument("trace CSV: too few columns");
  const Eigen::Index k = static_cast<Eigen::Index>(header.size()) - 9;
  if (header != trace_csv_header(k)) {
    throw InvalidArgument("trace CSV: unexpected header");
  }
  std::vector<TraceRow> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    const auto f = split_csv_line(line);
    if (f.size() != header.size()) {
      throw InvalidArgument("trace CSV: row has wrong column count");
    }
    TraceRow row;
    row.t = static_cast<int>(parse_double(f[0]));
    row.loss_pred = parse_double(f[1]);
    row.loss_star = parse_double(f[2]);
    row.grad_norm = parse_double(f[3]);
    row.mu = parse_double(f[4]);
    row.gamma = parse_double(f[5]);
    row.cum_regret = parse_double(f[6]);
    row.sq_err_mean_iterate = parse_double(f[7]);
    row.pred_norm = parse_double(f[8]);
    row.loss_truth = kNaN;
    row.weights.resize(k);
    for (Eigen::Index i = 0; i < k; ++i) {
      row.weights[i] = parse_double(f[static_cast<std::size_t>(9 + i)]);
    }
    rows.push_back(std::move(row));
  }
  return rows;
}

std::vector<TraceRow> read_trace_csv(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidArgument("cannot open '" + path + "'");
  return read_trace_csv(in);
}

void emit_averaged_csv(const std::vector<AveragedRow>& rows,
                       const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw InvalidArgument("cannot open '" + path + "' for writing");
  out << "t,cum_nll_diff,cum_regret,sq_err_mean_iterate,gamma_t\n";
  for (const AveragedRow& r : rows) {
    out << r.t << ',' << format_double(r.cum_nll_diff) << ','
        << format_double(r.cum_regret) << ','
        << format_double(r.sq_err_mean_iterate) << ','
        << format_double(r.gamma) << '\n';
  }
  if (!out) throw InvalidArgument("write to '" + path + "' failed");
}

}  // namespace survons
