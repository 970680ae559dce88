import numpy as np
import pytest

from jangbench.barriers import build_power_barrier
from jangbench.continuation import (blowup_profile, boundary_value_T, check_regime, chi_cutoff, classify_limit,
                                    continuation_family1, continuation_family2, enclosure_check, family2_grid,
                                    geometric_schedule, limit_grid, shooting_family2, solve_family2_delta)
from jangbench.errors import RegimeError, ValidationError
from jangbench.geometry import synthetic_data
from jangbench.grid import Grid
from jangbench.solver import JangProfile


def test_boundary_value_T():
    assert boundary_value_T(0.75, 1e-4) == pytest.approx(100.0, rel=1e-12)
    assert boundary_value_T(1.0, 1e-3) == pytest.approx(1000.0, rel=1e-12)
    assert boundary_value_T(0.5, 1e-3) == pytest.approx(-np.log(1e-3))
    with pytest.raises(RegimeError):
        boundary_value_T(0.25, 1e-3)


def test_chi_cutoff_properties():
    T, t0 = 100.0, 0.1
    chi = chi_cutoff(T, t0)
    t = np.linspace(0.0, 0.3, 3001)
    v = chi(t)
    assert v[0] == pytest.approx(T)
    assert np.all(v[t >= t0] == 0.0)
    assert np.all(np.abs(v) <= T) and np.all(np.diff(v) <= 0)
    h = 1e-7
    tt = np.linspace(0.001, 0.099, 50)
    assert np.allclose((chi(tt + h) - chi(tt - h)) / (2 * h), chi.deriv(tt), rtol=1e-5, atol=1e-6)


def test_geometric_schedule_reaches_stop():
    s = geometric_schedule(1.0, 1e-6, 0.5)
    assert s[0] == 1.0 and s[-1] == pytest.approx(1e-6)
    assert np.all(np.diff(s) < 0)
    with pytest.raises(ValidationError):
        geometric_schedule(1.0, 1e-3, 1.5)


def test_regime_errors(schw_inv_r):
    with pytest.raises(RegimeError):
        check_regime(2.0, 3.0, 1)
    with pytest.raises(RegimeError):
        check_regime(0.25, 3.0, 2)
    with pytest.raises(RegimeError):
        continuation_family1(schw_inv_r.data, eps_stage=False)
    check_regime(1.0, 3.0, 1)
    check_regime(0.5, 3.0, 2)


def _prof(x, v):
    return JangProfile(Grid(np.asarray(x, float), "test"), np.asarray(v, float))


def test_enclosure_examples():
    bar = build_power_barrier(1.0, 3.0, "sub", 0.5, 1.0, tau0=0.1)
    x = np.geomspace(1e-4, 1.0, 500)
    inside = x <= 0.1
    vals = np.where(inside, bar.value(x), 0.0)
    enc = enclosure_check(_prof(x, vals), bar, None)
    assert enc.lower_ok and enc.worst_violation == 0.0
    enc = enclosure_check(_prof(x, vals - 10.0), bar, None)
    assert not enc.lower_ok and enc.worst_violation == pytest.approx(10.0, rel=1e-9)
    upper = build_power_barrier(1.0, 3.0, "super", 2.0, 5.0, tau0=0.1)
    enc = enclosure_check(_prof(x, vals + 1.0), bar, upper)
    assert enc.both_ok and enc.tau_range[1] <= 0.1


def test_classify_limit():
    x = np.geomspace(1e-8, 10.0, 400)
    assert classify_limit(x ** -2.0, x) == "blowup_plus"
    assert classify_limit(-0.5 * np.log(x), x) == "blowup_plus"
    assert classify_limit(0.5 * np.log(x), x) == "blowup_minus"
    assert classify_limit(np.sqrt(x) + 1.0, x) == "bounded"


@pytest.mark.parametrize("b,l", [(1.0, 3.0), (0.75, 3.0)])
def test_blowup_profiles_converge_in_delta(b, l):
    data = synthetic_data(b, l, 1.0)
    grid = limit_grid(data, n=1000)
    x = grid.nodes
    away = x >= 0.01
    limit = blowup_profile(data, 0.0, grid)[0]
    diffs = [np.max(np.abs(blowup_profile(data, d, grid)[0][away] - limit[away])) for d in (1e-2, 1e-3, 1e-4, 1e-5)]
    assert np.all(np.diff(diffs) < 0)
    assert diffs[-1] <= 1e-2 * diffs[0]
    psi, dpsi, eta = blowup_profile(data, 0.0, grid)
    assert np.all(dpsi < 0) and np.all((eta > 0) & (eta < 1))
    assert psi[-1] == 0.0


def test_unwarped_profile_independent_of_delta():
    # b = 0: (tau + delta)^0 = 1, so delta does not enter
    data = synthetic_data(0.0, 1.0, 1.0)
    grid = limit_grid(data, n=500)
    p0 = blowup_profile(data, 0.0, grid)[0]
    for d in (1e-2, 1e-4):
        assert np.max(np.abs(blowup_profile(data, d, grid)[0] - p0)) <= 1e-8 * np.max(np.abs(p0))


def test_shooting_agrees_with_newton():
    data = synthetic_data(0.75, 3.0, 1.0)
    grid = family2_grid(data, 2000, 1e-8)
    prof, rep, _ = solve_family2_delta(data, 1e-2, grid, None)
    assert rep.converged
    ref = shooting_family2(data, 1e-2, grid)
    assert prof.values[0] == pytest.approx(10.0)
    assert np.max(np.abs(prof.values - ref)) <= 1e-3 * 10.0


def test_family1_quick(syn13):
    res = continuation_family1(syn13, eps_stage=False, n=1000)
    assert res.limit.classification == "blowup_plus"
    assert res.report.enclosure["lower_ok"] and res.report.enclosure["upper_ok"]
    assert len(res.sequence) == 4


def test_family2_quick():
    data = synthetic_data(0.75, 3.0, 1.0)
    res = continuation_family2(data, delta_schedule=[1e-2, 1e-3, 1e-4], n=1000, eps_stage=False)
    assert res.report.converged
    assert [p.values[0] for p in res.sequence] == pytest.approx([10.0, 10 ** 1.5, 100.0])
    assert res.report.enclosure["lower_ok"] and res.report.enclosure["upper_ok"]
