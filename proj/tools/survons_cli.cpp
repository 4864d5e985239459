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

// survons: simulate cohorts, run the online algorithms, benchmark them and
// evaluate the regret-bound calculators.

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <numeric>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "survons/bench.hpp"
#include "survons/bounds.hpp"
#include "survons/cohort.hpp"
#include "survons/error.hpp"
#include "survons/format.hpp"

namespace fs = std::filesystem;
using namespace survons;

namespace {

struct Common {
  std::uint64_t seed = 1;
  int n = 300;
  int individuals = 2000;
  int dim = 4;
  int reps = 20;
  std::string grid = "g2";
  std::string grid_file;
  int k = 10;
  double gamma_floor = 0.0;
  bool paper_scale = false;
  bool bare_order = false;
  bool sum_gamma = false;
  bool allow_inverted = false;
  std::string out = "survons_out";
  double radius = 0.0;
  double grad_bound = 0.0;
  int pilot_reps = 3;
  unsigned threads = 0;
  std::string arrivals = "uniform";
  double poisson_rate = 1.0;
};

std::vector<double> read_grid_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InvalidArgument("cannot open grid file '" + path + "'");
  std::vector<double> values;
  std::string token;
  while (in >> token) {
    for (const auto& piece : split_csv_line(token)) {
      if (!piece.empty()) values.push_back(parse_double(piece));
    }
  }
  return values;
}

RunConfig make_config(const Common& c, CLI::App& app) {
  RunConfig rc;
  rc.sim.n_individuals = c.individuals;
  rc.sim.horizon = c.n;
  rc.sim.dim = c.dim;
  rc.replications = c.reps;
  if (c.paper_scale) {
    if (app.count("--individuals") == 0) rc.sim.n_individuals = 10000;
    if (app.count("--n") == 0) rc.sim.horizon = 1000;
    if (app.count("--reps") == 0) rc.replications = 100;
  }
  rc.sim.seed = c.seed;
  rc.sim.arrival_model =
      c.arrivals == "poisson" ? ArrivalModel::kPoisson : ArrivalModel::kUniform;
  rc.sim.poisson_rate = c.poisson_rate;
  if (rc.sim.arrival_model == ArrivalModel::kPoisson && app.count("--individuals") > 0) {
    log_warning("--individuals is ignored with Poisson arrivals (size is Poisson(rate * n))");
  }
  rc.grid.kind = parse_grid_kind(c.grid);
  rc.grid.k = c.k;
  rc.grid.allow_inverted = c.allow_inverted;
  if (rc.grid.kind == GridKind::kExplicit) {
    if (c.grid_file.empty()) throw InvalidArgument("--grid file needs --grid-file");
    rc.grid.values = read_grid_file(c.grid_file);
  }
  rc.gamma_floor = c.gamma_floor;
  if (c.radius > 0.0) rc.radius = c.radius;
  if (c.grad_bound > 0.0) rc.grad_bound = c.grad_bound;
  rc.pilot_reps = c.pilot_reps;
  rc.threads = c.threads;
  rc.validate();
  return rc;
}

std::string trace_name(const std::string& method, int r) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "_rep%03d.csv", r);
  return method + buf;
}

void write_traces(const ExperimentResult& result, const std::string& method,
                  const fs::path& dir) {
  fs::create_directories(dir / "traces");
  for (const auto& tr : result.traces) {
    emit_csv(tr, (dir / "traces" / trace_name(method, tr.replication)).string());
  }
  emit_averaged_csv(result.averaged, (dir / ("averaged_" + method + ".csv")).string());
}

struct Summary {
  double mean = 0.0;
  double sd = 0.0;
};

Summary final_nll_summary(const ExperimentResult& result) {
  std::vector<double> v;
  for (const auto& tr : result.traces) v.push_back(tr.final_nll_difference());
  Summary s;
  s.mean = std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
  if (v.size() > 1) {
    double acc = 0.0;
    for (const double x : v) acc += (x - s.mean) * (x - s.mean);
    s.sd = std::sqrt(acc / static_cast<double>(v.size() - 1));
  }
  return s;
}

double mean_gamma(const ExperimentResult& result, int& degenerate) {
  double sum = 0.0;
  int count = 0;
  degenerate = 0;
  for (const auto& tr : result.traces) {
    degenerate += tr.degenerate_rounds();
    for (const auto& row : tr.rows) {
      if (std::isfinite(row.gamma)) {
        sum += row.gamma;
        ++count;
      }
    }
  }
  return count > 0 ? sum / count : std::nan("");
}

// Bound-order curves along one gamma trace.
std::vector<FigureSeries> bound_curves(const std::vector<double>& gammas,
                                       const Eigen::VectorXd& grid, int dim,
                                       double g, double d,
                                       const CurveOptions& opt,
                                       std::ostream* csv) {
  GammaTrace trace{gammas, grid};
  std::vector<FigureSeries> s = {{"SurvONS", {}, {}},
                                 {"ONS (min gamma_t)", {}, {}},
                                 {"ONS (mean gamma_t)", {}, {}},
                                 {"OGD", {}, {}}};
  if (csv) *csv << "t,survons,ons_min_gamma,ons_mean_gamma,ogd\n";
  const int n = static_cast<int>(gammas.size());
  for (int t = 2; t <= n; ++t) {
    double vals[4];
    vals[0] = grid.size() > 0 ? bound_survons(trace, t, dim, g, d) : std::nan("");
    try {
      vals[1] = bound_ons_order(trace, t, dim, opt);
      vals[2] = bound_ons_avg_order(trace, t, dim, opt);
    } catch (const InvalidArgument&) {
      vals[1] = vals[2] = std::nan("");
    }
    vals[3] = bound_ogd_order(t, g, d);
    if (csv) {
      *csv << t;
      for (const double v : vals) *csv << ',' << format_double(v);
      *csv << '\n';
    }
    for (int i = 0; i < 4; ++i) {
      s[static_cast<std::size_t>(i)].x.push_back(t);
      s[static_cast<std::size_t>(i)].y.push_back(vals[i]);
    }
  }
  return s;
}

int cmd_simulate(const Common& c, CLI::App& app) {
  const RunConfig rc = make_config(c, app);
  fs::create_directories(c.out);
  const Cohort cohort = simulate_cohort(rc.sim);
  const fs::path path = fs::path(c.out) / "cohort.csv";
  write_cohort_csv(cohort, path.string());
  std::cout << "wrote " << cohort.size() << " individuals to " << path.string()
            << "\n";
  return 0;
}

int cmd_run(const Common& c, CLI::App& app, const std::string& algorithm,
            double ons_gamma) {
  RunConfig rc = make_config(c, app);
  rc.algorithm = parse_algorithm(algorithm);
  if (ons_gamma > 0.0) rc.ons_gamma = ons_gamma;
  const ExperimentResult result = run_experiment(rc);
  write_traces(result, to_string(rc.algorithm), c.out);
  const Summary s = final_nll_summary(result);
  int degenerate = 0;
  const double g = mean_gamma(result, degenerate);
  std::cout << "algorithm " << to_string(rc.algorithm) << " G "
            << format_double(result.grad_bound) << " final_nll_diff_mean "
            << format_double(s.mean) << " sd " << format_double(s.sd)
            << " mean_gamma_t " << format_double(g) << " degenerate_rounds "
            << degenerate << "\n";
  return 0;
}

int cmd_bench(const Common& c, CLI::App& app) {
  RunConfig base = make_config(c, app);
  const fs::path dir(c.out);
  fs::create_directories(dir);
  // One G for every method so that all grids are comparable.
  if (!base.grad_bound) {
    const PilotResult pilot = estimate_G_pilot(base, base.pilot_reps);
    if (!(pilot.grad_bound > 0.0)) {
      throw InvalidArgument("pilot run saw no risk exposure; G cannot be estimated");
    }
    base.grad_bound = pilot.grad_bound;
  }

  struct Method {
    std::string name;
    Algorithm algorithm;
    GridKind grid;
  };
  std::vector<Method> methods = {
      {"ogd", Algorithm::kOgd, GridKind::kGamma2},
      {"ons_best_g2", Algorithm::kOnsFixed, GridKind::kGamma2},
      {"boa_ons_g2", Algorithm::kBoaOns, GridKind::kGamma2},
      {"survons_g2", Algorithm::kSurvOns, GridKind::kGamma2},
      {"survons_g1", Algorithm::kSurvOns, GridKind::kGamma1},
  };
  if (base.grid.kind == GridKind::kExplicit) {
    methods.push_back({"survons_file", Algorithm::kSurvOns, GridKind::kExplicit});
  }

  std::vector<std::pair<std::string, ExperimentResult>> results;
  for (const Method& m : methods) {
    RunConfig rc = base;
    rc.algorithm = m.algorithm;
    rc.grid.kind = m.grid;
    try {
      results.emplace_back(m.name, run_experiment(rc));
    } catch (const InvalidArgument& e) {
      if (m.grid != GridKind::kGamma1) throw;
      log_warning(std::string("skipping ") + m.name + ": " + e.what());
      continue;
    }
    write_traces(results.back().second, m.name, dir);
  }

  std::ofstream summary(dir / "summary.csv", std::ios::binary);
  summary << "method,reps,G,final_nll_diff_mean,final_nll_diff_sd,"
             "mean_gamma_t,degenerate_rounds,note\n";
  for (const auto& [name, result] : results) {
    const Summary s = final_nll_summary(result);
    int degenerate = 0;
    const double g = mean_gamma(result, degenerate);
    const char* note = name.rfind("ons_best", 0) == 0
                           ? "best grid value chosen in hindsight per "
                             "replication; overestimates the comparator"
                           : "";
    summary << name << ',' << result.traces.size() << ','
            << format_double(result.grad_bound) << ',' << format_double(s.mean)
            << ',' << format_double(s.sd) << ',' << format_double(g) << ','
            << degenerate << ',' << note << '\n';
    std::cout << name << ": final NLL difference " << s.mean << " (sd " << s.sd
              << "), mean gamma_t " << g << "\n";
  }

  FigureSet set;
  set.tag = "bench";
  for (const auto& [name, result] : results) set.methods.emplace_back(name, &result);
  emit_figures(set, (dir / "figures").string());

  for (const auto& [name, result] : results) {
    if (name != "survons_g2" || result.traces.empty()) continue;
    const ExperimentTrace& tr = result.traces.front();
    std::vector<double> gammas;
    for (const auto& row : tr.rows) gammas.push_back(row.gamma);
    std::ofstream csv(dir / "bound_orders.csv", std::ios::binary);
    const auto curves =
        bound_curves(gammas, tr.grid, base.sim.dim, tr.grad_bound, tr.radius,
                     {c.bare_order, c.sum_gamma}, &csv);
    write_line_chart((dir / "figures" / "bound_orders_bench.svg").string(),
                     "Regret-bound orders", curves, true, true);
  }
  return 0;
}

int cmd_bounds(const Common& c, CLI::App& app, const std::string& trace_path,
               const StochasticConstants& sc_in, bool from_constants) {
  const fs::path dir(c.out);
  fs::create_directories(dir);
  if (!trace_path.empty()) {
    if (!(c.grad_bound > 0.0) || !(c.radius > 0.0)) {
      throw InvalidArgument("bounds from a trace need --G and --radius");
    }
    const auto rows = read_trace_csv(trace_path);
    std::vector<double> gammas;
    for (const auto& row : rows) gammas.push_back(row.gamma);
    GridSpec spec;
    spec.kind = parse_grid_kind(c.grid);
    spec.k = c.k;
    spec.grad_bound = c.grad_bound;
    spec.radius = c.radius;
    spec.horizon = static_cast<int>(rows.size());
    spec.allow_inverted = c.allow_inverted;
    if (spec.kind == GridKind::kExplicit) spec.values = read_grid_file(c.grid_file);
    const Grid grid = build_grid(spec);
    std::ofstream csv(dir / "bound_orders.csv", std::ios::binary);
    const auto curves = bound_curves(gammas, grid.gammas, c.dim, c.grad_bound,
                                     c.radius, {c.bare_order, c.sum_gamma}, &csv);
    fs::create_directories(dir / "figures");
    write_line_chart((dir / "figures" / "bound_orders.svg").string(),
                     "Regret-bound orders", curves, true, true);
    std::cout << "wrote " << (dir / "bound_orders.csv").string() << "\n";
  }
  if (from_constants) {
    StochasticConstants sc = sc_in;
    sc.dim = c.dim;
    if (c.radius > 0.0) sc.radius = c.radius;
    if (app.count("--G") == 0) sc.grad_bound = theoretical_G(sc);
    if (c.grad_bound > 0.0) sc.grad_bound = c.grad_bound;
    const int n = c.n;
    const BoundTerms stc = stochastic_regret_terms(sc, n);
    const BoundTerms cor = corollary_terms(sc, n);
    std::cout << "theoretical_G " << format_double(theoretical_G(sc)) << "\n"
              << "grad_bound_used " << format_double(sc.grad_bound) << "\n"
              << "risk_set_bound " << format_double(risk_set_bound(sc)) << "\n"
              << "mu " << format_double(strong_convexity_mu(sc)) << "\n"
              << "stochastic_regret_bound " << format_double(stc.leading + stc.confidence)
              << " (leading " << format_double(stc.leading) << ", confidence "
              << format_double(stc.confidence) << ")\n"
              << "corollary_bound " << format_double(cor.leading + cor.confidence)
              << " per-round " << format_double((cor.leading + cor.confidence) / n)
              << "\n";
  }
  if (trace_path.empty() && !from_constants) {
    throw InvalidArgument("bounds needs --trace or --lambda/--design-a constants");
  }
  return 0;
}

int cmd_pilot(const Common& c, CLI::App& app) {
  const RunConfig rc = make_config(c, app);
  const PilotResult p = estimate_G_pilot(rc, rc.pilot_reps);
  std::cout << "G " << format_double(p.grad_bound) << "\n";
  for (std::size_t i = 0; i < p.per_rep_max.size(); ++i) {
    std::cout << "pilot " << i << " max_grad_norm "
              << format_double(p.per_rep_max[i]) << "\n";
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Online Newton Step methods for right-censored survival data"};
  app.require_subcommand(1);
  app.fallthrough();
  app.set_config("--config", "", "flat key=value file mirroring the flags");

  Common c;
  app.add_option("--seed", c.seed, "master seed");
  app.add_option("--n", c.n, "horizon (number of rounds)")->check(CLI::PositiveNumber);
  app.add_option("--individuals", c.individuals, "cohort size N")
      ->check(CLI::PositiveNumber);
  app.add_option("--dim", c.dim, "covariate dimension d")->check(CLI::PositiveNumber);
  app.add_option("--reps", c.reps, "replications")->check(CLI::PositiveNumber);
  app.add_option("--grid", c.grid, "learning-rate grid")
      ->check(CLI::IsMember({"g1", "g2", "file"}));
  app.add_option("--grid-file", c.grid_file, "explicit grid values");
  app.add_option("--k", c.k, "grid size K")->check(CLI::PositiveNumber);
  app.add_option("--gamma-floor", c.gamma_floor,
                 "surrogate curvature on degenerate rounds (0 keeps gamma_k)");
  app.add_flag("--paper-scale", c.paper_scale, "N=10000, n=1000, R=100");
  app.add_flag("--bare-order", c.bare_order, "drop the d log n factor");
  app.add_flag("--sum-gamma", c.sum_gamma, "ONS order with the sum of gamma_t");
  app.add_flag("--allow-inverted-g1", c.allow_inverted,
               "build Gamma_1 even when 1/sqrt(n) >= 1/(4GD)");
  app.add_option("--out", c.out, "output directory");
  app.add_option("--radius", c.radius, "explicit D (default 1.1 ||theta*||)");
  app.add_option("--G", c.grad_bound, "explicit gradient bound G (default: pilot)");
  app.add_option("--pilot-reps", c.pilot_reps, "pilot repetitions for G")
      ->check(CLI::PositiveNumber);
  app.add_option("--threads", c.threads, "worker threads (0 = all cores)");
  app.add_option("--arrivals", c.arrivals, "arrival model")
      ->check(CLI::IsMember({"uniform", "poisson"}));
  app.add_option("--poisson-rate", c.poisson_rate, "Poisson arrival intensity");

  auto* simulate = app.add_subcommand("simulate", "write a simulated cohort CSV");
  auto* run = app.add_subcommand("run", "run one algorithm and write its traces");
  std::string algorithm = "survons";
  double ons_gamma = 0.0;
  run->add_option("--algorithm", algorithm, "ogd, ons-fixed, boa-ons, survons");
  run->add_option("--ons-gamma", ons_gamma,
                  "learning rate for ons-fixed (default: best in grid)");
  auto* bench = app.add_subcommand("bench", "all algorithms, comparator, figures");
  auto* bounds = app.add_subcommand("bounds", "bound curves and constants");
  std::string trace_path;
  StochasticConstants sc;
  bounds->add_option("--trace", trace_path, "trace CSV with a gamma_t column");
  auto* lambda_opt = bounds->add_option("--lambda", sc.lambda, "arrival intensity");
  bounds->add_option("--design-a", sc.design_a, "design constant A");
  bounds->add_option("--x-inf", sc.x_inf, "covariate sup norm");
  bounds->add_option("--rho", sc.rho, "confidence level in (0, 1]");
  auto* pilot = app.add_subcommand("pilot-g", "estimate G with pilot runs");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 2;
  }

  try {
    if (*simulate) return cmd_simulate(c, app);
    if (*run) return cmd_run(c, app, algorithm, ons_gamma);
    if (*bench) return cmd_bench(c, app);
    if (*bounds) {
      const bool constants = lambda_opt->count() > 0 || bounds->count("--design-a") > 0;
      return cmd_bounds(c, app, trace_path, sc, constants);
    }
    if (*pilot) return cmd_pilot(c, app);
  } catch (const InvalidArgument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const NumericalError& e) {
    std::cerr << "numerical failure (seed " << c.seed << "): " << e.what() << "\n";
    return 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }
  return 2;
}
