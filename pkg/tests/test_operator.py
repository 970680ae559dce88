import numpy as np
import pytest

from jangbench.errors import NumericError, ValidationError
from jangbench.geometry import flat_data, synthetic_data
from jangbench.operator import OperatorParams, jang_linearization, jang_residual

RNG = np.random.default_rng(20260101)


def random_states(n=1000, vmax=50.0):
    tau = RNG.uniform(1e-3, 2.0, n)
    psi = RNG.normal(0.0, 5.0, n)
    dpsi = RNG.uniform(-vmax, vmax, n)
    ddpsi = RNG.normal(0.0, 50.0, n)
    return tau, psi, dpsi, ddpsi


def test_linearization_matches_central_differences(syn13):
    tau, psi, dpsi, ddpsi = random_states()
    params = OperatorParams(epsilon=0.3, delta=1e-2, source_mode="eps_f")
    d0, d1, d2 = jang_linearization(syn13, tau, psi, dpsi, ddpsi, params)
    for k, ana in enumerate((d0, d1, d2)):
        args = [psi, dpsi, ddpsi]
        h = 1e-6 * np.maximum(1.0, np.abs(args[k]))
        up = list(args)
        dn = list(args)
        up[k] = args[k] + h
        dn[k] = args[k] - h
        fd = (jang_residual(syn13, tau, *up, params) - jang_residual(syn13, tau, *dn, params)) / (2 * h)
        scale = np.maximum(np.abs(ana), 1e-6 * np.max(np.abs(ana)))
        assert np.max(np.abs(fd - ana) / scale) < 1e-5


def test_odd_symmetry_identity(syn13):
    tau, psi, dpsi, ddpsi = random_states()
    neg = syn13.with_k_negated()
    for params in (OperatorParams(), OperatorParams(epsilon=0.1, delta=1e-3, source_mode="eps_f")):
        r = jang_residual(syn13, tau, psi, dpsi, ddpsi, params)
        rn = jang_residual(neg, tau, -psi, -dpsi, -ddpsi, params)
        assert np.max(np.abs(rn + r)) <= 1e-12


def test_printed_and_stable_forms_agree(syn13):
    tau, psi, dpsi, ddpsi = random_states(vmax=10.0)
    a = jang_residual(syn13, tau, psi, dpsi, ddpsi, form="stable")
    b = jang_residual(syn13, tau, psi, dpsi, ddpsi, form="printed")
    assert np.max(np.abs(a - b)) <= 1e-12


def test_stable_form_tends_to_minus_theta_plus_for_steep_falling_graphs(syn13):
    tau = np.geomspace(1e-4, 0.05, 10)
    phi, dphi = syn13.warp(tau)
    dpsi = -1e12 + 0 * tau
    # psi'' chosen so that phi psi'' + 2 phi' psi' = 0
    r = jang_residual(syn13, tau, 0.0 * tau, dpsi, -2.0 * dphi * dpsi / phi)
    v = phi * dpsi
    # exact value is -theta_plus + H / (Q^2 (1 - s)), and the correction is below H / v^2
    assert np.all(np.abs(r + syn13.theta_plus(tau)) <= syn13.H_S(tau) / v ** 2)


def test_delta_consistency(syn13):
    tau, psi, dpsi, ddpsi = random_states(200)
    d = 1e-2
    r1 = jang_residual(syn13, tau, psi, dpsi, ddpsi, OperatorParams(delta=d))
    r2 = jang_residual(syn13.delta_shifted(d), tau, psi, dpsi, ddpsi, OperatorParams())
    assert np.max(np.abs(r1 - r2)) <= 1e-12


def test_flat_data_zero_graph_has_zero_residual():
    d = flat_data()
    t = np.linspace(0.0, 50.0, 101)
    z = np.zeros_like(t)
    for eps in (0.0, 0.5):
        r = jang_residual(d, t, z, z, z, OperatorParams(epsilon=eps, source_mode="eps_f"))
        assert np.all(r == 0.0)


def test_scalar_input_and_source():
    d = flat_data()
    r = jang_residual(d, 1.0, 2.0, 0.0, 0.0, OperatorParams(epsilon=0.25, source_mode="eps_f"))
    assert isinstance(r, float) and r == pytest.approx(-0.5)


def test_parameter_validation():
    with pytest.raises(ValidationError):
        OperatorParams(epsilon=-1.0)
    with pytest.raises(ValidationError):
        OperatorParams(source_mode="eps_f_minus_chi")
    with pytest.raises(NumericError):
        jang_residual(synthetic_data(1.0, 3.0), 0.5, np.nan, 0.0, 0.0)
