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

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "survons/bench.hpp"
#include "survons/bounds.hpp"
#include "survons/cohort.hpp"
#include "survons/concavity.hpp"
#include "survons/error.hpp"
#include "survons/likelihood.hpp"
#include "survons/optim.hpp"

namespace py = pybind11;
using namespace survons;

namespace {

Cohort make_cohort(int n_individuals, int horizon, int dim, std::uint64_t seed,
                   const std::string& arrivals, double poisson_rate,
                   std::optional<Eigen::VectorXd> theta_star, bool intercept) {
  SimulationConfig c;
  c.n_individuals = n_individuals;
  c.horizon = horizon;
  c.dim = dim;
  c.seed = seed;
  c.arrival_model = arrivals == "poisson" ? ArrivalModel::kPoisson
                                          : ArrivalModel::kUniform;
  c.poisson_rate = poisson_rate;
  c.theta_star = std::move(theta_star);
  c.intercept = intercept;
  return simulate_cohort(c);
}

py::dict trace_to_dict(const ExperimentTrace& tr) {
  const auto n = static_cast<py::ssize_t>(tr.rows.size());
  const Eigen::Index k = tr.rows.empty() ? 0 : tr.rows.front().weights.size();
  Eigen::MatrixXd columns(n, 8);
  Eigen::MatrixXd weights(n, k);
  for (py::ssize_t i = 0; i < n; ++i) {
    const TraceRow& r = tr.rows[static_cast<std::size_t>(i)];
    columns.row(i) << r.loss_pred, r.loss_star, r.loss_truth, r.grad_norm, r.mu,
        r.gamma, r.cum_regret, r.sq_err_mean_iterate;
    weights.row(i) = r.weights.transpose();
  }
  py::dict d;
  d["algorithm"] = to_string(tr.algorithm);
  d["replication"] = tr.replication;
  d["seed"] = tr.seed;
  d["radius"] = tr.radius;
  d["grad_bound"] = tr.grad_bound;
  d["grid"] = tr.grid;
  d["theta_star"] = tr.theta_star;
  d["theta_batch"] = tr.theta_batch;
  d["loss_pred"] = Eigen::VectorXd(columns.col(0));
  d["loss_star"] = Eigen::VectorXd(columns.col(1));
  d["loss_truth"] = Eigen::VectorXd(columns.col(2));
  d["grad_norm"] = Eigen::VectorXd(columns.col(3));
  d["mu"] = Eigen::VectorXd(columns.col(4));
  d["gamma"] = Eigen::VectorXd(columns.col(5));
  d["cum_regret"] = Eigen::VectorXd(columns.col(6));
  d["sq_err_mean_iterate"] = Eigen::VectorXd(columns.col(7));
  d["weights"] = weights;
  d["final_nll_difference"] = tr.final_nll_difference();
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Online Newton Step methods for right-censored survival data";

  py::register_exception<InvalidArgument>(m, "InvalidArgument", PyExc_ValueError);
  py::register_exception<NumericalError>(m, "NumericalError", PyExc_ArithmeticError);
  m.def("set_warnings_enabled", &set_warnings_enabled);

  py::class_<Cohort>(m, "Cohort")
      .def_property_readonly("dim", &Cohort::dim)
      .def_property_readonly("theta_star", &Cohort::theta_star)
      .def("__len__", &Cohort::size)
      .def("max_observed", &Cohort::max_observed)
      .def("covariate_sup_norm", &Cohort::covariate_sup_norm)
      .def("arrivals", [](const Cohort& c) {
        std::vector<double> v;
        for (const auto& i : c.individuals()) v.push_back(i.arrival());
        return v;
      })
      .def("observed", [](const Cohort& c) {
        std::vector<double> v;
        for (const auto& i : c.individuals()) v.push_back(i.observed());
        return v;
      })
      .def("events", [](const Cohort& c) {
        std::vector<bool> v;
        for (const auto& i : c.individuals()) v.push_back(i.event_flag());
        return v;
      })
      .def("write_csv", [](const Cohort& c, const std::string& path) {
        write_cohort_csv(c, path);
      });

  m.def("simulate_cohort", &make_cohort, py::arg("n_individuals") = 2000,
        py::arg("horizon") = 300, py::arg("dim") = 4, py::arg("seed") = 0,
        py::arg("arrivals") = "uniform", py::arg("poisson_rate") = 1.0,
        py::arg("theta_star") = std::nullopt, py::arg("intercept") = true);
  m.def("read_cohort_csv",
        [](const std::string& path) { return read_cohort_csv(path); });
  m.def("risk_set_size", [](const Cohort& c, int t) {
    return static_cast<int>(risk_set(c, t).size());
  });

  m.def("interval_loss", [](const Cohort& c, int t, const Eigen::VectorXd& th) {
    return interval_loss(make_loss_context(c, t), th);
  });
  m.def("interval_gradient", [](const Cohort& c, int t, const Eigen::VectorXd& th) {
    return interval_gradient(make_loss_context(c, t), th);
  });
  m.def("interval_hessian", [](const Cohort& c, int t, const Eigen::VectorXd& th) {
    return interval_hessian(make_loss_context(c, t), th);
  });
  m.def("cumulative_loss", &cumulative_loss);
  m.def(
      "batch_minimizer",
      [](const Cohort& c, int n, double radius, double tol) {
        const BatchMinimizerResult r = batch_minimizer(c, n, radius, {tol, 200});
        return py::make_tuple(r.parameter.theta, r.loss, r.residual, r.iterations);
      },
      py::arg("cohort"), py::arg("n"), py::arg("radius"), py::arg("tol") = 1e-8);

  m.def("exp_concavity_mu", &exp_concavity_mu, py::arg("g"), py::arg("h"),
        py::arg("floor") = 1e-12);
  m.def("ddc_gamma", &ddc_gamma);
  m.def("clip_gamma", py::overload_cast<double, double>(&clip_gamma));
  m.def("surrogate_ddc_constant", &surrogate_ddc_constant);
  m.def("degeneracy_floor", &degeneracy_floor);

  m.def("project_ball", &project_ball);
  m.def(
      "project_mahalanobis",
      [](const Eigen::VectorXd& target, const Eigen::MatrixXd& a, double radius) {
        const ProjectionResult r = project_mahalanobis(target, a, radius);
        return py::make_tuple(r.theta, r.nu, r.active, r.kkt_residual);
      });
  m.def("boa_update", &boa_update);

  py::class_<OnsState>(m, "OnsState")
      .def_static("initial",
                  py::overload_cast<Eigen::Index, double, double>(&OnsState::initial))
      .def_readonly("theta", &OnsState::theta)
      .def_readonly("a", &OnsState::a)
      .def_readonly("a_inv", &OnsState::a_inv)
      .def("step", [](const OnsState& s, const Eigen::VectorXd& g) {
        return ons_step(s, g);
      });

  py::class_<Grid>(m, "Grid")
      .def_readonly("gammas", &Grid::gammas)
      .def_readonly("epsilons", &Grid::epsilons);
  m.def(
      "build_grid",
      [](const std::string& kind, int k, double grad_bound, double radius,
         int horizon, std::vector<double> values, bool allow_inverted) {
        GridSpec s;
        s.kind = parse_grid_kind(kind);
        s.k = k;
        s.grad_bound = grad_bound;
        s.radius = radius;
        s.horizon = horizon;
        s.values = std::move(values);
        s.allow_inverted = allow_inverted;
        return build_grid(s);
      },
      py::arg("kind") = "g2", py::arg("k") = 10, py::arg("grad_bound") = 1.0,
      py::arg("radius") = 1.0, py::arg("horizon") = 300,
      py::arg("values") = std::vector<double>{},
      py::arg("allow_inverted") = false);

  m.def(
      "run_experiment",
      [](const std::string& algorithm, int n_individuals, int horizon, int dim,
         std::uint64_t seed, int replications, const std::string& grid, int k,
         std::optional<double> grad_bound, std::optional<double> radius,
         bool allow_inverted, unsigned threads) {
        RunConfig c;
        c.algorithm = parse_algorithm(algorithm);
        c.sim.n_individuals = n_individuals;
        c.sim.horizon = horizon;
        c.sim.dim = dim;
        c.sim.seed = seed;
        c.replications = replications;
        c.grid.kind = parse_grid_kind(grid);
        c.grid.k = k;
        c.grid.allow_inverted = allow_inverted;
        c.grad_bound = grad_bound;
        c.radius = radius;
        c.threads = threads;
        ExperimentResult r;
        {
          py::gil_scoped_release release;
          r = run_experiment(c);
        }
        py::list traces;
        for (const auto& tr : r.traces) traces.append(trace_to_dict(tr));
        return py::make_tuple(r.grad_bound, traces);
      },
      py::arg("algorithm") = "survons", py::arg("n_individuals") = 2000,
      py::arg("horizon") = 300, py::arg("dim") = 4, py::arg("seed") = 0,
      py::arg("replications") = 20, py::arg("grid") = "g2", py::arg("k") = 10,
      py::arg("grad_bound") = std::nullopt, py::arg("radius") = std::nullopt,
      py::arg("allow_inverted") = false, py::arg("threads") = 0u);

  py::class_<StochasticConstants>(m, "StochasticConstants")
      .def(py::init([](double lambda, double design_a, double radius,
                       double x_inf, int dim, double rho, double grad_bound) {
             return StochasticConstants{lambda, design_a, radius, x_inf,
                                        dim,    rho,      grad_bound};
           }),
           py::arg("lambda_") = 1.0, py::arg("design_a") = 1.0,
           py::arg("radius") = 1.0, py::arg("x_inf") = 1.0, py::arg("dim") = 1,
           py::arg("rho") = 0.05, py::arg("grad_bound") = 1.0);
  m.def("theoretical_G", &theoretical_G);
  m.def("risk_set_bound", &risk_set_bound);
  m.def("stochastic_regret_bound", &stochastic_regret_bound);
  m.def("corollary_bound", &corollary_bound);
  m.def("bound_hazan_ons", &bound_hazan_ons);
  m.def("bound_ogd_order", &bound_ogd_order);
  m.def("bound_survons",
        [](std::vector<double> gammas, const Eigen::VectorXd& grid, int n,
           int dim, double g, double d) {
          return bound_survons(GammaTrace{std::move(gammas), grid}, n, dim, g, d);
        });
  m.def("bound_ons_order",
        [](std::vector<double> gammas, int n, int dim, bool bare) {
          CurveOptions o;
          o.bare_order = bare;
          return bound_ons_order(GammaTrace{std::move(gammas), {}}, n, dim, o);
        },
        py::arg("gammas"), py::arg("n"), py::arg("dim"), py::arg("bare") = false);
  m.def(
      "estimate_A",
      [](const Eigen::VectorXd& theta, double x_inf, std::int64_t samples,
         std::uint64_t seed, bool intercept) {
        const DesignEstimate e = estimate_A(theta, x_inf, samples, seed, intercept);
        return py::make_tuple(e.value, e.standard_error);
      },
      py::arg("theta_star"), py::arg("x_inf"), py::arg("samples"),
      py::arg("seed") = 0, py::arg("intercept") = true);
}
