"""The reduced generalized Jang operator for graphs constant on the leaves.

For psi = psi(tau) and v = phi_delta * psi' the operator is

    (phi psi'' + 2 phi' psi') / Q**3 + v H_S / Q - k_nn / Q**2 - trS_k - source,

with Q = sqrt(1 + v**2).  The default evaluation regroups the last three
terms around the null expansions so that no cancellation occurs when
theta_plus is tiny and |v| is large:

    v < 0:  v H/Q - trS_k = -theta_plus + H / (Q**2 (1 - s))
    v > 0:  v H/Q - trS_k =  theta_minus - H / (Q**2 (1 + s))

where s = v/Q.  Both groupings are algebraically identical to the direct one.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import DegenerateError, NumericError, ValidationError
from .geometry import FoliatedData, Profile

SOURCE_MODES = ("none", "eps_f", "eps_f_minus_chi")
_BIG = 1e8


@dataclass(frozen=True)
class OperatorParams:
    """Regularization parameters: epsilon, delta and the source mode."""

    epsilon: float = 0.0
    delta: float = 0.0
    source_mode: str = "none"
    chi: Profile | None = field(default=None, compare=False)

    def __post_init__(self):
        if not (self.epsilon >= 0 and np.isfinite(self.epsilon)):
            raise ValidationError(f"epsilon must be >= 0, got {self.epsilon}")
        if not (self.delta >= 0 and np.isfinite(self.delta)):
            raise ValidationError(f"delta must be >= 0, got {self.delta}")
        if self.source_mode not in SOURCE_MODES:
            raise ValidationError(f"unknown source_mode {self.source_mode!r}")
        if self.source_mode == "eps_f_minus_chi" and self.chi is None:
            raise ValidationError("source_mode eps_f_minus_chi needs a chi profile")

    @property
    def source_eps(self) -> float:
        """Coefficient of the psi source term (0 when there is no source)."""
        return 0.0 if self.source_mode == "none" else float(self.epsilon)

    def chi_values(self, tau) -> np.ndarray:
        t = np.asarray(tau, dtype=float)
        if self.source_mode == "eps_f_minus_chi" and self.epsilon > 0:
            return np.asarray(self.chi(t), dtype=float)
        return np.zeros_like(t)


@dataclass(frozen=True, eq=False)
class NodeData:
    """Data profiles sampled at points; independent of psi."""

    tau: np.ndarray
    phi: np.ndarray
    dphi: np.ndarray
    H: np.ndarray
    theta_plus: np.ndarray
    theta_minus: np.ndarray
    trS_k: np.ndarray
    k_nn: np.ndarray
    eps: float
    chi: np.ndarray


def sample(data: FoliatedData, tau, params: OperatorParams, check: bool = True) -> NodeData:
    t = data.check_domain(tau) if check else np.asarray(tau, dtype=float)
    t = np.atleast_1d(t)
    phi, dphi = data.warp(t, params.delta)
    phi = np.asarray(phi, float) * np.ones_like(t)
    dphi = np.asarray(dphi, float) * np.ones_like(t)
    if check and np.any(~(phi > 0.0)):
        i = int(np.argmax(~(phi > 0.0)))
        raise DegenerateError(f"warp phi_delta = {phi[i]:g} <= 0 at tau = {t[i]:g}")
    ones = np.ones_like(t)
    return NodeData(
        tau=t,
        phi=phi,
        dphi=dphi,
        H=data.H_S(t) * ones,
        theta_plus=data.theta_plus(t) * ones,
        theta_minus=data.theta_minus(t) * ones,
        trS_k=data.trS_k(t) * ones,
        k_nn=data.k_nn(t) * ones,
        eps=params.source_eps,
        chi=params.chi_values(t) * ones,
    )


def inv_q(v):
    """1/sqrt(1+v**2), rescaled for large |v|."""
    av = np.abs(v)
    with np.errstate(over="ignore", divide="ignore", invalid="ignore"):
        big = 1.0 / (av * np.sqrt(1.0 + 1.0 / (av * av)))
    return np.where(av > _BIG, big, 1.0 / np.sqrt(1.0 + v * v))


def residual_core(nd: NodeData, psi, dpsi, ddpsi, form: str = "stable"):
    """Operator values from sampled data and (psi, psi', psi'')."""
    phi = nd.phi
    v = phi * dpsi
    iq = inv_q(v)
    s = v * iq
    iq2 = iq * iq
    N = phi * ddpsi + 2.0 * nd.dphi * dpsi
    t1 = N * (iq2 * iq)
    if form == "stable":
        with np.errstate(divide="ignore", invalid="ignore"):
            neg = -nd.theta_plus + nd.H * iq2 / (1.0 - s)
            pos = nd.theta_minus - nd.H * iq2 / (1.0 + s)
        t2 = np.where(v < 0.0, neg, np.where(v > 0.0, pos, -nd.trS_k))
    elif form == "printed":
        t2 = v * nd.H * iq - nd.trS_k
    else:
        raise ValueError(f"unknown form {form!r}")
    r = t1 + t2 - nd.k_nn * iq2
    if nd.eps != 0.0:
        r = r - nd.eps * (psi - nd.chi)
    return r


def linearization_core(nd: NodeData, psi, dpsi, ddpsi):
    """(dR/dpsi, dR/dpsi', dR/dpsi'') in closed form."""
    phi = nd.phi
    v = phi * dpsi
    iq = inv_q(v)
    s = v * iq
    iq2 = iq * iq
    iq3 = iq2 * iq
    N = phi * ddpsi + 2.0 * nd.dphi * dpsi
    d2 = phi * iq3
    d1 = 2.0 * nd.dphi * iq3 - 3.0 * N * phi * s * iq2 * iq2 + phi * nd.H * iq3 + 2.0 * nd.k_nn * phi * s * iq3
    d0 = np.full(np.shape(v), -nd.eps)
    return d0, d1, d2


def _inputs(tau, psi, dpsi, ddpsi):
    arrs = np.broadcast_arrays(*(np.asarray(a, dtype=float) for a in (tau, psi, dpsi, ddpsi)))
    for a in arrs:
        if not np.all(np.isfinite(a)):
            raise NumericError("non-finite operator input")
    return arrs


def jang_residual(data: FoliatedData, tau, psi, dpsi, ddpsi, params: OperatorParams | None = None,
                  form: str = "stable"):
    """Evaluate the reduced Jang operator minus the source at tau.

    Scalar inputs return a float; array inputs broadcast.
    """
    params = params or OperatorParams()
    t, p, dp, ddp = _inputs(tau, psi, dpsi, ddpsi)
    scalar = t.ndim == 0
    nd = sample(data, t.ravel(), params)
    r = residual_core(nd, p.ravel(), dp.ravel(), ddp.ravel(), form=form)
    if not np.all(np.isfinite(r)):
        raise NumericError("non-finite residual")
    return float(r[0]) if scalar else r.reshape(t.shape)


def jang_linearization(data: FoliatedData, tau, psi, dpsi, ddpsi, params: OperatorParams | None = None):
    """Partial derivatives of jang_residual in (psi, psi', psi'')."""
    params = params or OperatorParams()
    t, p, dp, ddp = _inputs(tau, psi, dpsi, ddpsi)
    scalar = t.ndim == 0
    nd = sample(data, t.ravel(), params)
    out = linearization_core(nd, p.ravel(), dp.ravel(), ddp.ravel())
    if scalar:
        return tuple(float(o[0]) for o in out)
    return tuple(o.reshape(t.shape) for o in out)


def residual_along(data: FoliatedData, fn: Callable, dfn: Callable, ddfn: Callable, tau,
                   params: OperatorParams | None = None, form: str = "stable"):
    """Operator applied to a closed-form function given with its derivatives."""
    t = np.asarray(tau, dtype=float)
    return jang_residual(data, t, fn(t), dfn(t), ddfn(t), params, form=form)
