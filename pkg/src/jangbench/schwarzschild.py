"""Graph slices t = f(r) of the Schwarzschild exterior as closed-form test data.

The slice metric is g = g11 dr^2 + r^2 dOmega with g11 = 1/x - x f'^2,
x = 1 - 2m/r, and the warp is phi = sqrt(x).  With the slice's second
fundamental form as k, the function psi = f (as a function of the distance
tau to r = 2m) solves the Jang equation exactly.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .errors import SteepGraphError, ValidationError
from .geometry import FoliatedData, Profile

_GL_X, _GL_W = np.polynomial.legendre.leggauss(12)


def _f_choice(f_choice):
    if isinstance(f_choice, str):
        if f_choice == "zero":
            z = lambda r: np.zeros(np.shape(r))
            return z, z, z, "zero"
        if f_choice == "inv_r":
            return (lambda r: 1.0 / r, lambda r: -1.0 / r ** 2, lambda r: 2.0 / r ** 3, "inv_r")
        raise ValidationError(f"unknown f_choice {f_choice!r}; use 'zero', 'inv_r' or (f, f', f'')")
    try:
        f, df, ddf = f_choice
    except (TypeError, ValueError):
        raise ValidationError("f_choice must be a name or a triple of callables (f, f', f'')") from None
    return f, df, ddf, "custom"


@dataclass(frozen=True)
class ExactSolution:
    """Closed-form psi(tau) with derivatives."""

    psi: Callable
    dpsi: Callable
    ddpsi: Callable

    def values(self, tau):
        t = np.asarray(tau, dtype=float)
        return self.psi(t), self.dpsi(t), self.ddpsi(t)


@dataclass(frozen=True)
class SchwarzschildCase:
    data: FoliatedData
    exact: ExactSolution
    r_of_tau: Callable
    tau_of_r: Callable
    detected_b: float
    detected_l: float


class _TauMap:
    """tau(r) = int_{2m}^r sqrt(g11) dr and its inverse, via u = sqrt(r - 2m)."""

    def __init__(self, m, df, r_out, n_table=1500):
        self.m = m
        self.df = df
        u_max = np.sqrt(r_out - 2.0 * m) * (1.0 + 1e-6)
        u = np.concatenate([[0.0], np.geomspace(u_max * 1e-7, u_max, n_table)])
        seg = np.empty(u.size - 1)
        for j in range(seg.size):
            seg[j] = quad(self.integrand, u[j], u[j + 1], epsabs=0.0, epsrel=1e-13, limit=200)[0]
        self.u = u
        self.tau = np.concatenate([[0.0], np.cumsum(seg)])
        self._guess = PchipInterpolator(self.tau, self.u)

    def integrand(self, u):
        u = np.asarray(u, dtype=float)
        r = 2.0 * self.m + u * u
        fp = self.df(r)
        return 2.0 * np.sqrt(r - u ** 4 * fp * fp / r)

    def _from_node(self, j, u):
        a = self.u[j]
        half = 0.5 * (u - a)
        pts = a[..., None] + half[..., None] * (_GL_X + 1.0)
        return self.tau[j] + half * (self.integrand(pts) @ _GL_W)

    def tau_of_u(self, u):
        u = np.asarray(u, dtype=float)
        j = np.clip(np.searchsorted(self.u, u) - 1, 0, self.u.size - 2)
        return self._from_node(j, u)

    def u_of_tau(self, tau):
        t = np.asarray(tau, dtype=float)
        u = self._guess(t)
        for _ in range(4):
            j = np.clip(np.searchsorted(self.u, u) - 1, 0, self.u.size - 2)
            u = u - (self._from_node(j, u) - t) / self.integrand(u)
        return u


def schwarzschild_data(m: float = 1.0, f_choice="inv_r", r_in: float | None = None,
                       r_out: float = 100.0) -> SchwarzschildCase:
    """Induced data (g, k, phi) on the slice t = f(r), r in [r_in, r_out], plus psi = f."""
    if not m > 0:
        raise ValidationError(f"m must be positive, got {m}")
    if r_in is None:
        r_in = 2.0 * m * (1.0 + 5e-5)
    if not (2.0 * m < r_in < r_out):
        raise ValidationError(f"need 2m < r_in < r_out, got r_in={r_in}, r_out={r_out}")
    f, df, ddf, name = _f_choice(f_choice)

    rs = np.geomspace(r_in - 2.0 * m, r_out - 2.0 * m, 20001) + 2.0 * m
    xs = 1.0 - 2.0 * m / rs
    w2 = 1.0 - (xs * df(rs)) ** 2
    if np.any(~(w2 > 0.0)):
        r_bad = rs[np.argmax(~(w2 > 0.0))]
        raise SteepGraphError(f"graph too steep: g_11 <= 0 at r = {r_bad:.6g}")

    tm = _TauMap(m, df, r_out)

    def r_of_tau(t):
        u = tm.u_of_tau(t)
        return 2.0 * m + u * u

    def tau_of_r(r):
        return tm.tau_of_u(np.sqrt(np.asarray(r, float) - 2.0 * m))

    def parts(t):
        r = r_of_tau(np.asarray(t, dtype=float))
        x = 1.0 - 2.0 * m / r
        fp, fpp = df(r), ddf(r)
        w = np.sqrt(1.0 - (x * fp) ** 2)  # = 1/Q = phi*sqrt(g11)
        return r, x, fp, fpp, w

    # closed forms as functions of tau
    def phi(t):
        r, x, *_ = parts(t)
        return np.sqrt(x)

    def dphi(t):
        r, x, fp, fpp, w = parts(t)
        return m / (r * r * w)

    def H(t):
        r, x, fp, fpp, w = parts(t)
        return 2.0 * np.sqrt(x) / (r * w)

    def trk(t):
        r, x, fp, fpp, w = parts(t)
        return 2.0 * x ** 1.5 * fp / (r * w)

    def theta_p(t):
        r, x, fp, fpp, w = parts(t)
        return 2.0 * np.sqrt(x) * (1.0 + x * fp) / (r * w)

    def theta_m(t):
        r, x, fp, fpp, w = parts(t)
        return 2.0 * np.sqrt(x) * (1.0 - x * fp) / (r * w)

    def g11_and_deriv(r, x, fp, fpp):
        xr = 2.0 * m / (r * r)
        g11 = 1.0 / x - x * fp * fp
        dg11 = -xr / (x * x) - xr * fp * fp - 2.0 * x * fp * fpp
        return g11, dg11

    def knn(t):
        r, x, fp, fpp, w = parts(t)
        g11, dg11 = g11_and_deriv(r, x, fp, fpp)
        hess = fpp - 0.5 * dg11 / g11 * fp
        phr = m / (r * r * np.sqrt(x))
        return (np.sqrt(x) * hess + 2.0 * phr * fp) * w / g11

    def psi(t):
        return f(r_of_tau(np.asarray(t, dtype=float)))

    def dpsi(t):
        r, x, fp, fpp, w = parts(t)
        return fp * np.sqrt(x) / w

    def ddpsi(t):
        r, x, fp, fpp, w = parts(t)
        g11, dg11 = g11_and_deriv(r, x, fp, fpp)
        return fpp / g11 - fp * dg11 / (2.0 * g11 * g11)

    def drdtau(t):
        r, x, fp, fpp, w = parts(t)
        return np.sqrt(x) / w

    def tau_deriv(fn):
        """d/dtau via a central difference in r (relative step 1e-6 of r - 2m)."""

        def d(t):
            r = r_of_tau(np.asarray(t, dtype=float))
            hr = 1e-6 * (r - 2.0 * m)
            tp, tmn = tau_of_r(r + hr), tau_of_r(r - hr)
            return (fn(tp) - fn(tmn)) / (tp - tmn)

        return d

    tau_in = float(tau_of_r(r_in))
    tau_max = float(tau_of_r(r_out))

    # phi = tau**b * phi_tilde with the detected b = 1
    def pt(t):
        t = np.asarray(t, dtype=float)
        return phi(t) / t

    def dpt(t):
        t = np.asarray(t, dtype=float)
        return dphi(t) / t - phi(t) / (t * t)

    H_p = Profile(H, tau_deriv(H))
    trk_p = Profile(trk, tau_deriv(trk))
    data = FoliatedData(
        tau_in=tau_in,
        tau_max=tau_max,
        b=1.0,
        l=1.0,
        c_rate=1.0,
        phi_tilde=Profile(pt, dpt),
        H_S=H_p,
        trS_k=trk_p,
        k_nn=Profile(knn, tau_deriv(knn)),
        theta_plus=Profile(theta_p, tau_deriv(theta_p)),
        theta_minus=Profile(theta_m, tau_deriv(theta_m)),
        r_of_tau=Profile(r_of_tau, drdtau),
        phi_exact=Profile(phi, dphi),
        rate_condition="none",
        collar=min(0.1, tau_max),
        k_zero=(name == "zero"),
        label=f"schwarzschild(m={m:g},f={name})",
        meta={"kind": "schwarzschild", "m": m, "f": name, "r_in": r_in, "r_out": r_out},
    )

    # exponents from log-log slopes very close to the horizon
    tt = np.array([tau_of_r(2.0 * m + 1e-10 * m), tau_of_r(2.0 * m + 1e-8 * m)])
    det_b = float(np.diff(np.log(phi(tt)))[0] / np.diff(np.log(tt))[0])
    det_l = float(np.diff(np.log(theta_p(tt)))[0] / np.diff(np.log(tt))[0])

    return SchwarzschildCase(
        data=data,
        exact=ExactSolution(psi, dpsi, ddpsi),
        r_of_tau=r_of_tau,
        tau_of_r=tau_of_r,
        detected_b=det_b,
        detected_l=det_l,
    )


# log-density knots (per unit ln tau) of the default grid; smooth and in the
# asymptotic O(h^2) regime from N = 2000 on
_GRID_KNOTS = (0.0, 1.0 / 3.0, 2.0 / 3.0, 1.0)
_GRID_LOG_DENSITY = (-8.735, -2.72, -0.015, 0.0)


def schwarzschild_grid(case: SchwarzschildCase, n: int = 2000):
    """Default grid on the data domain, sparse near r = 2m where psi is smooth."""
    from .grid import density_grid

    return density_grid(case.data.tau_in, case.data.tau_max, n, _GRID_KNOTS, _GRID_LOG_DENSITY)
