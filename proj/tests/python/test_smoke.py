# Copyright 2026 The SurvONS Authors.
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import survons


def test_simulate_and_loss_derivatives():
    cohort = survons.simulate_cohort(n_individuals=200, horizon=30, dim=3, seed=5)
    assert len(cohort) == 200
    assert cohort.dim == 3
    theta = np.array([0.1, -0.2, 0.3])
    t = 10
    g = survons.interval_gradient(cohort, t, theta)
    h = survons.interval_hessian(cohort, t, theta)
    eps = 1e-6
    for j in range(3):
        e = np.zeros(3)
        e[j] = eps
        fd = (survons.interval_loss(cohort, t, theta + e)
              - survons.interval_loss(cohort, t, theta - e)) / (2 * eps)
        assert fd == pytest.approx(g[j], rel=1e-6, abs=1e-8)
    assert np.allclose(h, h.T)
    assert np.linalg.eigvalsh(h).min() >= -1e-10


def test_concavity_constants():
    assert survons.ddc_gamma(1.0, 1.0, 1.0) == pytest.approx(2 * (1 - math.log(2)), abs=1e-12)
    assert survons.clip_gamma(8.0, 0.1) == 2.0
    assert survons.surrogate_ddc_constant(1.0, 1.0, 1.0) == pytest.approx(0.25)


def test_boa_update_example():
    w = survons.boa_update(np.array([0.5, 0.5]), np.array([1.0, 1.0]), np.array([0.0, 1.0]))
    e2 = math.exp(-2)
    assert w[0] == pytest.approx(1 / (1 + e2), abs=1e-12)
    assert w.sum() == pytest.approx(1.0, abs=1e-12)


def test_ons_step_and_projection():
    state = survons.OnsState.initial(2, 0.5, 1.0)
    state = state.step(np.array([3.0, -1.0]))
    assert np.linalg.norm(state.theta) <= 1.0 + 1e-9
    assert np.allclose(state.a_inv @ state.a, np.eye(2), atol=1e-10)
    theta, nu, active, kkt = survons.project_mahalanobis(
        np.array([3.0, 4.0]), np.array([[2.0, 0.3], [0.3, 1.0]]), 1.0)
    assert active and kkt <= 1e-6
    assert np.linalg.norm(theta) == pytest.approx(1.0, abs=1e-9)


def test_grids():
    g = survons.build_grid("g2", k=10, grad_bound=1.0, radius=1.0)
    ratios = g.gammas[1:] / g.gammas[:-1]
    assert np.allclose(ratios, 10 ** (1 / 9), rtol=1e-12)
    with pytest.raises(survons.InvalidArgument):
        survons.build_grid("g1", k=10, grad_bound=10.0, radius=2.0, horizon=300)


def test_run_experiment_small():
    G, traces = survons.run_experiment(
        "survons", n_individuals=150, horizon=20, dim=3, seed=3, replications=2,
        threads=1)
    assert G > 0
    assert len(traces) == 2
    for tr in traces:
        assert tr["weights"].shape == (20, 10)
        assert np.allclose(tr["weights"].sum(axis=1), 1.0, atol=1e-12)


def test_bounds():
    sc = survons.StochasticConstants(lambda_=1.0, design_a=0.5, radius=1.0,
                                     x_inf=1.0, dim=2, rho=0.05, grad_bound=2.0)
    e = math.e
    expected_g = 32 * e * (4 + 1 + math.log(2 / 0.05)) * (1 + e)
    assert survons.theoretical_G(sc) == pytest.approx(expected_g, rel=1e-12)
    assert survons.corollary_bound(sc, 100) > 0
