"""Graded one-dimensional grids."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq

from .errors import ValidationError

MIN_NODES = 64
MIN_SPACING = 1e-12


@dataclass(frozen=True, eq=False)
class Grid:
    """Strictly increasing nodes with a description of their grading."""

    nodes: np.ndarray
    grading: str = "custom"

    def __post_init__(self):
        x = np.ascontiguousarray(self.nodes, dtype=float)
        object.__setattr__(self, "nodes", x)
        x.setflags(write=False)
        if x.ndim != 1 or x.size < MIN_NODES + 1:
            raise ValidationError(f"grid needs at least {MIN_NODES + 1} nodes, got {x.size}")
        if not np.all(np.isfinite(x)):
            raise ValidationError("grid nodes must be finite")
        h = np.diff(x)
        if np.any(h <= 0):
            raise ValidationError("grid nodes must be strictly increasing")
        if h.min() < MIN_SPACING * (1.0 - 1e-9):
            raise ValidationError(f"grid spacing {h.min():.3g} below {MIN_SPACING:g}")

    @property
    def N(self) -> int:
        return self.nodes.size - 1

    @property
    def h(self) -> np.ndarray:
        return np.diff(self.nodes)

    @property
    def h_min(self) -> float:
        return float(self.h.min())

    def __len__(self):
        return self.nodes.size

    def refined(self) -> "Grid":
        """Insert midpoints; spacing halves everywhere."""
        x = self.nodes
        y = np.empty(2 * x.size - 1)
        y[0::2] = x
        y[1::2] = 0.5 * (x[:-1] + x[1:])
        return Grid(y, grading=self.grading + "/refined")


def _ratio_for(length: float, h0: float, n: int) -> float:
    """Ratio q with h0 * (q**n - 1)/(q - 1) = length."""
    if h0 * n >= length:
        raise ValidationError(f"first spacing {h0:g} too large for {n} cells on length {length:g}")

    def g(q):
        with np.errstate(over="ignore"):
            return h0 * np.expm1(n * np.log(q)) / (q - 1.0) - length

    hi = 2.0
    while g(hi) < 0:
        hi *= 2.0
    return brentq(g, 1.0 + 1e-14, hi, xtol=1e-15)


def geometric_grid(a: float, b: float, n: int = 2000, h_min: float | None = None, ratio: float | None = None) -> Grid:
    """Geometric grading toward ``a``: spacings h0 * q**i.

    Either ``ratio`` or ``h_min`` (first spacing) may be given.  With ``ratio``
    alone the first spacing follows from the length; with ``h_min`` alone the
    ratio is solved for.
    """
    L = b - a
    if not L > 0:
        raise ValidationError("empty interval")
    if ratio is not None and h_min is not None:
        raise ValidationError("give either ratio or h_min, not both")
    if ratio is not None:
        if ratio == 1.0:
            h0 = L / n
        else:
            h0 = L * (ratio - 1.0) / np.expm1(n * np.log(ratio))
        q = ratio
    else:
        h0 = h_min if h_min is not None else max(MIN_SPACING, L * 1e-9)
        q = _ratio_for(L, h0, n)
    s = np.concatenate([[0.0], np.cumsum(h0 * q ** np.arange(n))])
    x = a + L * s / s[-1]
    x[-1] = b
    return Grid(x, grading=f"geometric(ratio={q:.6g})")


def uniform_grid(a: float, b: float, n: int = 2000) -> Grid:
    return Grid(np.linspace(a, b, n + 1), grading="uniform")


def power_grid(a: float, b: float, n: int = 2000, p: float = 2.0) -> Grid:
    """Nodes a + (b-a) * (i/n)**p."""
    s = np.linspace(0.0, 1.0, n + 1) ** p
    return Grid(a + (b - a) * s, grading=f"power(p={p:g})")


def extended_grid(tau_in: float, tau_max: float, n: int = 2000, h_min: float = 1e-9,
                  n_inner: int | None = None) -> Grid:
    """Grid on [tau_in, tau_max] with tau_in < 0, clustered toward tau_in and toward 0.

    The inner piece [tau_in, 0] is a symmetric two-sided geometric grading; the
    outer piece is geometric from 0.
    """
    if not tau_in < 0 < tau_max:
        raise ValidationError("extended grid needs tau_in < 0 < tau_max")
    if n_inner is None:
        n_inner = max(32, n // 5)
    half = n_inner // 2
    L = -tau_in
    left = geometric_grid(0.0, 0.5 * L, half, h_min=h_min).nodes
    inner = np.concatenate([tau_in + left, (-left[::-1])[1:]])
    inner[-1] = 0.0
    outer = geometric_grid(0.0, tau_max, n - inner.size + 1, h_min=h_min).nodes
    return Grid(np.concatenate([inner, outer[1:]]), grading=f"extended(h_min={h_min:g})")


def density_grid(a: float, b: float, n: int, log_knots, log_density, samples: int = 200_001) -> Grid:
    """Nodes equidistributing a density per unit ln(tau) that is piecewise linear in ln(tau).

    ``log_knots`` are positions in [0, 1] along [ln a, ln b] and ``log_density``
    the log of the (unnormalised) density at those knots.  Requires a > 0.
    """
    if not 0 < a < b:
        raise ValidationError("density grid needs 0 < a < b")
    la, lb = np.log(a), np.log(b)
    knots = la + (lb - la) * np.asarray(log_knots, float)
    s = np.linspace(la, lb, samples)
    rho = np.exp(np.interp(s, knots, np.asarray(log_density, float)))
    cum = np.concatenate([[0.0], np.cumsum(0.5 * (rho[1:] + rho[:-1]) * np.diff(s))])
    x = np.exp(np.interp(np.linspace(0.0, cum[-1], n + 1), cum, s))
    x[0], x[-1] = a, b
    return Grid(x, grading="density")
