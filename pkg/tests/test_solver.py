import dataclasses

import numpy as np
import pytest

from jangbench.barriers import build_integral_barrier, certify_barrier, verify_barrier
from jangbench.continuation import _ordered, enclosure_check, epsilon_stage, geometric_schedule
from jangbench.geometry import flat_data
from jangbench.grid import extended_grid, geometric_grid
from jangbench.operator import OperatorParams
from jangbench.schwarzschild import schwarzschild_grid
from jangbench.solver import derivatives, solve_regularized


@pytest.mark.parametrize("eps", [0.0, 1e-3, 1.0])
def test_flat_zero_solution(eps):
    d = flat_data()
    grid = geometric_grid(0.0, d.tau_max, 400, h_min=1e-3)
    prof, rep = solve_regularized(d, OperatorParams(epsilon=eps, source_mode="eps_f"), (0.0, 0.0), grid,
                                  init=lambda x: np.sin(x / 10.0))
    assert rep.converged
    assert np.max(np.abs(prof.values)) <= 1e-10
    assert prof.classification == "bounded"


def test_derivatives_exact_for_quadratics():
    x = np.cumsum(np.r_[0.0, np.random.default_rng(0).uniform(0.1, 1.0, 30)])
    p = 3 * x ** 2 - 2 * x + 1
    d1, d2 = derivatives(x, p)
    assert np.allclose(d1, 6 * x - 2, rtol=1e-12, atol=1e-9)
    assert np.allclose(d2, 6.0, rtol=1e-9)


def _recover(case, n):
    grid = schwarzschild_grid(case, n)
    x = grid.nodes
    ex = case.exact.psi(x)
    prof, rep = solve_regularized(case.data, OperatorParams(), (ex[0], ex[-1]), grid, init="zero")
    return prof, rep, float(np.max(np.abs(prof.values - ex)))


def test_schwarzschild_recovery(schw_inv_r):
    prof, rep, err = _recover(schw_inv_r, 2000)
    assert rep.converged, rep.message
    assert err <= 1e-6
    assert rep.final_residual <= 1e-10 * (1 + rep.sup_psi)
    assert prof.classification == "bounded"


def test_refinement_order(schw_inv_r):
    errs = [_recover(schw_inv_r, n)[2] for n in (1000, 2000, 4000)]
    orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
    assert np.all((orders >= 1.7) & (orders <= 2.3)), orders


def test_non_convergence_is_reported(schw_inv_r):
    grid = schwarzschild_grid(schw_inv_r, 400)
    ex = schw_inv_r.exact.psi(grid.nodes)
    prof, rep = solve_regularized(schw_inv_r.data, OperatorParams(), (ex[0], ex[-1]), grid, init="zero",
                                  max_iter=1)
    assert not rep.converged
    assert rep.newton_iterations == 1
    assert prof.values.shape == grid.nodes.shape
    assert rep.classification != "bounded"


def test_regularized_solution_enclosed(syn13):
    """eps = 1e-3, delta = 1e-2, inner value vartheta/(2 eps): between the shifted sub and the super barrier."""
    eps, delta = 1e-3, 1e-2
    grid = extended_grid(-0.05, syn13.tau_max, 2000, h_min=1e-6)
    st = epsilon_stage(syn13, delta, geometric_schedule(1.0, eps, 0.5), grid)
    assert st.completed and st.eps[-1] == pytest.approx(eps)
    assert all(st.inner_growth_ok) and st.monotone_ok
    prof = st.profile
    x, p = prof.grid.nodes, prof.values
    assert p[0] == pytest.approx(1.0 / (2 * eps))
    i0 = int(np.searchsorted(x, 0.0))
    sub = certify_barrier(syn13, "sub", family=1)
    j = int(np.searchsorted(x, sub.tau0, side="right")) - 1
    t0 = float(x[j])
    lower = _ordered(sub, t0, float(p[j]), float(p[i0]), delta, below=True)
    up = build_integral_barrier(1.0, 5.0, 1.0, 0.0, delta, l=3.0)
    mu2 = max(p[i0] - up.value(np.array([0.0]))[0], p[j] - up.value(np.array([t0]))[0])
    upper = dataclasses.replace(up, params={**up.params, "mu2": float(mu2)}, valid_range=(0.0, t0))
    # barrier inequalities on (0, t0]
    ext = syn13.extend_inward(0.05, 1.0)
    tg = np.geomspace(1e-8, t0, 10_000)
    prm = OperatorParams(epsilon=eps, delta=delta, source_mode="eps_f")
    assert verify_barrier(upper, ext, prm, tau_grid=tg).ok
    assert verify_barrier(lower, ext, OperatorParams(delta=delta), tau_grid=tg, margin_lambda=1e-300).ok
    enc = enclosure_check(prof.restrict(0.0), lower, upper)
    assert enc.both_ok and enc.n_checked > 100
