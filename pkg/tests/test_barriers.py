import numpy as np
import pytest
from scipy.integrate import quad

from jangbench.barriers import (build_integral_barrier, build_linear_barrier, build_log_barrier, build_ode_barrier,
                                build_power_barrier, certify_barrier, integrate_to, verify_barrier)
from jangbench.errors import RegimeError, ValidationError
from jangbench.geometry import synthetic_data

CASES = [(1.0, 3.0), (0.0, 1.0), (0.75, 3.0), (0.5, 2.0)]


def test_power_refuses_sticking_and_beyond():
    with pytest.raises(RegimeError, match="sticking"):
        build_power_barrier(1.0, 1.0, "sub", 1.0)
    with pytest.raises(RegimeError):
        build_power_barrier(2.5, 3.0, "sub", 1.0)
    with pytest.raises(RegimeError, match="log"):
        build_power_barrier(0.0, 1.0, "sub", 1.0)
    with pytest.raises(RegimeError):
        build_log_barrier(1.0, 3.0, "sub", 1.0)
    with pytest.raises(RegimeError):
        build_ode_barrier(0.25, 3.0, None, 10.0, 1.0, "sub")
    with pytest.raises(ValidationError):
        build_power_barrier(1.0, 3.0, "middle", 1.0)
    with pytest.raises(ValidationError):
        build_integral_barrier(1.0, 1.0, 1.0, 0.0, 0.0)


def test_power_exponent():
    bar = build_power_barrier(0.75, 3.0, "sub", 2.0, beta=1.0)
    assert bar.params["a"] == pytest.approx(1.75)
    assert bar.value(np.array([0.01]))[0] == pytest.approx(2.0 * 0.01 ** -1.75 + 1.0)


BARRIERS = [
    build_power_barrier(1.0, 3.0, "sub", 0.3, 1.0),
    build_log_barrier(0.0, 1.0, "super", 2.0, -1.0),
    build_ode_barrier(0.75, 3.0, None, 10.0, 1.0, "sub"),
    build_ode_barrier(1.0, 3.0, 1.5, 1.0, 1.0, "super", tau0=0.03),
    build_integral_barrier(1.0, 5.0, 2.0, 0.5, 1e-2),
    build_linear_barrier(1.0, 2.0, -1, "sub"),
    build_power_barrier(1.0, 3.0, "super", 0.3).translate(1e-3),
]


@pytest.mark.parametrize("bar", BARRIERS, ids=lambda b: f"{b.kind}-{b.role}")
def test_derivatives_match_finite_differences(bar):
    t = np.geomspace(1e-3, 0.02, 7)
    h = 1e-6 * t
    d1 = (bar.value(t + h) - bar.value(t - h)) / (2 * h)
    d2 = (bar.d1(t + h) - bar.d1(t - h)) / (2 * h)
    scale1 = np.maximum(np.abs(bar.d1(t)), 1.0)
    scale2 = np.maximum(np.abs(bar.d2(t)), 1.0)
    assert np.all(np.abs(d1 - bar.d1(t)) <= 1e-6 * scale1)
    assert np.all(np.abs(d2 - bar.d2(t)) <= 1e-6 * scale2)


def test_ode_barrier_derivative_formula():
    b, l, lt, lam, Lam = 0.75, 3.0, 1.5, 10.0, 1.0
    bar = build_ode_barrier(b, l, lt, lam, Lam, "sub", tau0=0.1)
    t = np.geomspace(1e-6, 0.1, 9)
    c = 2 * lam / (lt + 1 - 2 * b)
    expect = -1.0 / np.sqrt(c * t ** (lt + 1 + 2 * b) + Lam ** 2 * t ** (4 * b))
    assert np.allclose(bar.d1(t), expect, rtol=1e-14)
    assert bar.value(np.array([0.1]))[0] == pytest.approx(0.0, abs=1e-14)


def test_integrate_to_matches_quad():
    g = lambda x: x ** -1.5 * np.exp(x)
    s = np.array([1e-4, 1e-2, 0.3, 0.9])
    got = integrate_to(g, s, 1.0)
    ref = [quad(g, v, 1.0, epsrel=1e-13, limit=200)[0] for v in s]
    assert np.allclose(got, ref, rtol=1e-11)


@pytest.mark.parametrize("b,l", CASES)
@pytest.mark.parametrize("role", ["sub", "super"])
def test_family1_certificates(b, l, role):
    data = synthetic_data(b, l, 1.0)
    cert = certify_barrier(data, role, family=1)
    rep = cert.report
    assert rep.ok and rep.violations == 0 and rep.n_points == 10_000
    # margins: lambda = 1/(2c) with exponent l
    assert rep.margin_lambda == pytest.approx(0.5 / data.c_rate)
    assert rep.margin_exponent == pytest.approx(l)
    t = rep.tau
    if role == "sub":
        assert np.all(rep.residual >= 0.5 * t ** l)
    else:
        assert np.all(rep.residual <= -0.5 * t ** l)


@pytest.mark.parametrize("b,l", [c for c in CASES if c[0] >= 0.5])
@pytest.mark.parametrize("role", ["sub", "super"])
def test_family2_ode_certificates(b, l, role):
    data = synthetic_data(b, l, 1.0)
    cert = certify_barrier(data, role, family=2)
    rep = cert.report
    lt = min(l, 2 * b)
    assert rep.ok and rep.violations == 0
    assert rep.margin_exponent == pytest.approx(lt)
    sgn = 1.0 if role == "sub" else -1.0
    assert np.all(sgn * rep.residual >= 0.5 * cert.barrier.params["lam"] * rep.tau ** lt)


def test_family2_refused_below_half():
    with pytest.raises(RegimeError):
        certify_barrier(synthetic_data(0.0, 1.0, 1.0), "sub", family=2)


def test_verification_reports_failures():
    data = synthetic_data(1.0, 3.0, 1.0)
    cert = certify_barrier(data, "sub", family=1)
    too_big = build_power_barrier(1.0, 3.0, "sub", 10.0 * cert.search["alpha_edge"])
    rep = verify_barrier(too_big, data, tau_grid=cert.report.tau)
    assert not rep.ok and rep.violations > 0 and rep.failing_tau is not None
    other = verify_barrier(build_power_barrier(0.75, 3.0, "sub", 0.01), data)
    assert other.regime_mismatch
