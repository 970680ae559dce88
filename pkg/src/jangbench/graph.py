"""Geometry of the Jang graph and the scalar curvature identity for radial data.

For psi = psi(tau) on data with leaves of area radius rho(tau), the Jang metric
is gbar = (1 + phi^2 psi'^2) dtau^2 + rho^2 dOmega.  All tensors below are
given by their tau-tau component and their (constant) eigenvalue on the
leaves.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import DegenerateError, UnsupportedError, ValidationError
from .geometry import FoliatedData


@dataclass(frozen=True)
class GraphGeometry:
    A_rr: np.ndarray
    A_sphere: np.ndarray
    gbar_11: np.ndarray
    q_1: np.ndarray
    w_1: np.ndarray
    tilt: np.ndarray


@dataclass(frozen=True)
class ConstraintDensities:
    """Energy density mu and radial momentum density J_n as functions of tau."""

    mu: Callable
    J_n: Callable


def _psi_callables(psi):
    """Return callables (psi, psi', psi'') for exact or discrete profiles."""
    from .solver import JangProfile

    if isinstance(psi, JangProfile):
        x = psi.grid.nodes
        d1, d2 = psi.derivatives()
        interp = psi.interpolant()
        return (lambda t: interp(t), lambda t: np.interp(t, x, d1), lambda t: np.interp(t, x, d2))
    if hasattr(psi, "psi") and hasattr(psi, "dpsi") and hasattr(psi, "ddpsi"):
        return psi.psi, psi.dpsi, psi.ddpsi
    try:
        f, df, ddf = psi
    except (TypeError, ValueError):
        raise ValidationError("psi must be a JangProfile, an exact solution or (psi, psi', psi'')") from None
    return f, df, ddf


def graph_geometry(data: FoliatedData, psi, tau, delta: float = 0.0) -> GraphGeometry:
    """Second fundamental form, induced metric, q, w and tilt of the graph at tau."""
    t = np.asarray(data.check_domain(tau), dtype=float)
    f, df, ddf = _psi_callables(psi)
    phi, dphi = data.warp(t, delta)
    phi = np.asarray(phi, float) * np.ones_like(t)
    if np.any(~(phi > 0.0)):
        raise DegenerateError("phi vanishes: graph geometry is degenerate")
    p1 = np.asarray(df(t), float)
    p2 = np.asarray(ddf(t), float)
    v = phi * p1
    Q = np.sqrt(1.0 + v * v)
    H = data.H_S(t)
    A_rr = (phi * p2 + 2.0 * dphi * p1 + phi * phi * dphi * p1 ** 3) / Q
    A_sph = v * H / (2.0 * Q)
    akk = (phi * p2 + 2.0 * dphi * p1) / Q - data.k_nn(t)
    q1 = v * akk / Q
    return GraphGeometry(A_rr=A_rr, A_sphere=A_sph, gbar_11=1.0 + v * v, q_1=q1, w_1=v / Q, tilt=-phi / Q)


def _d(fn, t, h):
    """Central difference with a step relative to |t|."""
    hh = h * np.maximum(1.0, np.abs(t))
    return (fn(t + hh) - fn(t - hh)) / (2.0 * hh)


def constraint_densities(data: FoliatedData, h: float = 1e-4) -> ConstraintDensities:
    """mu = (R_g + (tr k)^2 - |k|^2)/2 and J_n = div(k - tr k g)_n from closed-form profiles."""
    if not data.closed_form or data.r_of_tau is None:
        raise UnsupportedError("constraint densities need closed-form data with an area radius")
    rho = data.r_of_tau

    def mu(t):
        t = np.asarray(t, float)
        r, r1 = rho(t), rho.deriv(t)
        r2 = _d(rho.deriv, t, h)
        R = -4.0 * r2 / r + 2.0 * (1.0 - r1 * r1) / (r * r)
        kn, ts = data.k_nn(t), data.trS_k(t)
        return 0.5 * (R + (kn + ts) ** 2 - kn * kn - 0.5 * ts * ts)

    def J(t):
        t = np.asarray(t, float)
        kn, ts, H = data.k_nn(t), data.trS_k(t), data.H_S(t)
        return -data.trS_k.deriv(t) + H * (kn - 0.5 * ts)

    return ConstraintDensities(mu=mu, J_n=J)


def scalar_curvature_sides(data: FoliatedData, psi, tau, h: float = 1e-4):
    """Return (Rbar, rhs) of the identity

        Rbar = 2(mu - J(w)) + |A - K|^2 + 2|q|^2 - 2 phi^-1 divbar(phi q).
    """
    if not data.closed_form or data.r_of_tau is None:
        raise UnsupportedError("the curvature identity check needs closed-form data")
    t = np.asarray(data.check_domain(tau), dtype=float)
    f, df, ddf = _psi_callables(psi)
    rho = data.r_of_tau
    cd = constraint_densities(data, h)

    def Ag(s):
        ph = data.phi(s)
        return 1.0 + (ph * df(s)) ** 2

    r, r1 = rho(t), rho.deriv(t)
    r2 = _d(rho.deriv, t, h)
    A = Ag(t)
    A1 = _d(Ag, t, h)
    Rbar = -4.0 * r2 / (A * r) + 2.0 * r1 * A1 / (A * A * r) + 2.0 * (1.0 - r1 * r1 / A) / (r * r)

    def pieces(s):
        phi, dphi = data.warp(s)
        p1, p2 = df(s), ddf(s)
        v = phi * p1
        Q = np.sqrt(1.0 + v * v)
        akk = (phi * p2 + 2.0 * dphi * p1) / Q - data.k_nn(s)
        tan = v * data.H_S(s) / (2.0 * Q) - 0.5 * data.trS_k(s)
        q = v * akk / Q
        return phi, v, Q, akk, tan, q

    phi, v, Q, akk, tan, q = pieces(t)
    AK2 = (akk / A) ** 2 + 2.0 * tan * tan
    q2 = q * q / A

    def flux(s):
        ph, _, _, _, _, qq = pieces(s)
        return ph * rho(s) ** 2 * qq / np.sqrt(Ag(s))

    div = _d(flux, t, h) / (phi * np.sqrt(A) * r * r)
    w = v / Q
    Jw = cd.J_n(t) * w / A
    rhs = 2.0 * (cd.mu(t) - Jw) + AK2 + 2.0 * q2 - 2.0 * div
    return Rbar, rhs


def verify_scalar_curvature_identity(data: FoliatedData, psi, tau_grid, h: float = 1e-4) -> float:
    """Maximum |Rbar - rhs| over tau_grid."""
    Rbar, rhs = scalar_curvature_sides(data, psi, tau_grid, h)
    return float(np.max(np.abs(Rbar - rhs)))
