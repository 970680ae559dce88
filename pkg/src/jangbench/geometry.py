"""Radial (collar) initial data for the generalized Jang equation.

Data are described on an interval of the distance coordinate ``tau`` to the
horizon.  Every profile is a vectorised callable carrying its derivative so
that operators and barriers never differentiate the data numerically.
"""
from __future__ import annotations

import csv
import dataclasses
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable

import numpy as np
from scipy.interpolate import PchipInterpolator

from .errors import DegenerateError, DomainError, ValidationError

ArrayFn = Callable[[np.ndarray], np.ndarray]

TABULATED_HEADER = ["tau", "phi_tilde", "H_S", "trS_k", "k_nn"]


def smoothstep(x):
    """Quintic C^2 step: 0 for x <= 0, 1 for x >= 1."""
    x = np.clip(x, 0.0, 1.0)
    return x * x * x * (10.0 + x * (-15.0 + 6.0 * x))


def smoothstep_deriv(x):
    inside = (x > 0.0) & (x < 1.0)
    x = np.clip(x, 0.0, 1.0)
    return np.where(inside, 30.0 * x * x * (1.0 - x) ** 2, 0.0)


@dataclass(frozen=True)
class Profile:
    """A scalar function of tau together with its derivative."""

    f: ArrayFn
    df: ArrayFn

    def __call__(self, tau):
        return self.f(np.asarray(tau, dtype=float))

    def deriv(self, tau):
        return self.df(np.asarray(tau, dtype=float))

    @classmethod
    def constant(cls, c: float) -> "Profile":
        return cls(lambda t: np.full(np.shape(t), float(c)), lambda t: np.zeros(np.shape(t)))

    @classmethod
    def tabulated(cls, tau, values) -> "Profile":
        """Monotone cubic (PCHIP) interpolant; the derivative comes from the interpolant."""
        interp = PchipInterpolator(np.asarray(tau, float), np.asarray(values, float), extrapolate=True)
        dinterp = interp.derivative()
        return cls(lambda t: interp(t), lambda t: dinterp(t))

    def __neg__(self) -> "Profile":
        f, df = self.f, self.df
        return Profile(lambda t: -f(t), lambda t: -df(t))


def _blend(inner: Profile, outer: Profile, t0: float, t1: float) -> Profile:
    """C^2 transition from ``inner`` (tau <= t0) to ``outer`` (tau >= t1)."""
    w = t1 - t0

    def f(t):
        s = smoothstep((t - t0) / w)
        return (1.0 - s) * inner(t) + s * outer(t)

    def df(t):
        x = (t - t0) / w
        s = smoothstep(x)
        ds = smoothstep_deriv(x) / w
        return (1.0 - s) * inner.deriv(t) + s * outer.deriv(t) + ds * (outer(t) - inner(t))

    return Profile(f, df)


@dataclass(frozen=True)
class Extension:
    """Parameters of the inward extension onto [-sigma0, 0]."""

    sigma0: float
    vartheta: float


@dataclass(frozen=True)
class FoliatedData:
    """Radial initial data (M, g, k, phi) in collar coordinates.

    ``theta_plus``/``theta_minus`` are stored separately from ``H_S`` and
    ``trS_k`` so that the operator can use them without cancellation when the
    expansion vanishes to high order at the horizon.  ``phi_exact`` (optional)
    gives phi directly where phi_tilde = phi / tau**b would be singular to form.
    """

    tau_in: float
    tau_max: float
    b: float
    l: float
    c_rate: float
    phi_tilde: Profile
    H_S: Profile
    trS_k: Profile
    k_nn: Profile
    theta_plus: Profile
    theta_minus: Profile
    r_of_tau: Profile | None = None
    phi_exact: Profile | None = None
    rate_condition: str = "none"  # "two_sided" (12), "upper" (15) or "none"
    collar: float = 0.1
    outer_C: float = 0.0
    extension: Extension | None = None
    closed_form: bool = True
    k_zero: bool = False
    label: str = "data"
    meta: dict = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not self.tau_max > self.tau_in:
            raise ValidationError(f"empty tau domain [{self.tau_in}, {self.tau_max}]")
        if self.b < 0:
            raise ValidationError(f"b must be >= 0, got {self.b}")

    # -- evaluation -----------------------------------------------------
    def check_domain(self, tau) -> np.ndarray:
        t = np.asarray(tau, dtype=float)
        if not np.all(np.isfinite(t)):
            raise DomainError("non-finite tau")
        lo, hi = self.tau_in, self.tau_max
        span = hi - lo
        if np.any(t < lo - 1e-12 * span) or np.any(t > hi + 1e-12 * span):
            raise DomainError(f"tau outside data domain [{lo:.6g}, {hi:.6g}]")
        return t

    def warp(self, tau, delta: float = 0.0):
        """Return (phi_delta, d phi_delta / d tau) at tau.

        phi_delta = (tau + delta)**b * phi_tilde for tau >= 0.  On an inward
        extension (tau < 0) the warp is continued positively and C^1 by
        phi0 * exp(kappa*tau / (1 + |kappa*tau|)).
        """
        t = np.asarray(tau, dtype=float)
        if delta == 0.0 and self.phi_exact is not None and self.extension is None:
            return self.phi_exact(t), self.phi_exact.deriv(t)
        tp = np.maximum(t, 0.0)
        phi, dphi = self._warp_nonneg(tp, delta)
        if self.extension is not None and np.any(t < 0.0):
            phi0, dphi0 = self._warp_nonneg(np.zeros(1), delta)
            phi0, dphi0 = float(phi0[0]), float(dphi0[0])
            if not phi0 > 0.0:
                raise DegenerateError("phi vanishes at tau=0; the extension needs delta > 0")
            kappa = dphi0 / phi0
            x = kappa * t
            e = np.exp(x / (1.0 + np.abs(x)))
            ext = phi0 * e
            dext = phi0 * e * kappa / (1.0 + np.abs(x)) ** 2
            neg = t < 0.0
            phi = np.where(neg, ext, phi)
            dphi = np.where(neg, dext, dphi)
        return phi, dphi

    def _warp_nonneg(self, t, delta):
        pt = self.phi_tilde(t)
        dpt = self.phi_tilde.deriv(t)
        if self.b == 0.0:
            return pt, dpt
        s = t + delta
        with np.errstate(divide="ignore", invalid="ignore"):
            sb = s ** self.b
            dsb = np.where(s > 0.0, self.b * s ** (self.b - 1.0), 0.0 if self.b > 1.0 else np.inf)
        return sb * pt, dsb * pt + sb * dpt

    def phi(self, tau, delta: float = 0.0):
        return self.warp(tau, delta)[0]

    # -- derived data ---------------------------------------------------
    def with_k_negated(self) -> "FoliatedData":
        """k -> -k: swaps the roles of theta_plus and theta_minus (past horizon)."""
        return dataclasses.replace(
            self,
            trS_k=-self.trS_k,
            k_nn=-self.k_nn,
            theta_plus=self.theta_minus,
            theta_minus=self.theta_plus,
            label=self.label + ",-k",
        )

    def delta_shifted(self, delta: float) -> "FoliatedData":
        """Data with b = 0 whose phi_tilde is phi_delta; same warp, no shift needed."""
        src = self

        def f(t):
            return src._warp_nonneg(t, delta)[0]

        def df(t):
            return src._warp_nonneg(t, delta)[1]

        return dataclasses.replace(
            self, b=0.0, phi_tilde=Profile(f, df), phi_exact=None, label=f"{self.label},shift={delta:g}"
        )

    def extend_inward(self, sigma0: float = 0.05, vartheta: float = 1.0) -> "FoliatedData":
        return extend_inward(self, sigma0, vartheta)


def null_expansion(data: FoliatedData, tau, sign: str = "+"):
    """theta_(+/-) = H_S +/- Tr_S k."""
    t = data.check_domain(tau)
    if sign in ("+", "plus", 1):
        return data.H_S(t) + data.trS_k(t)
    if sign in ("-", "minus", -1):
        return data.H_S(t) - data.trS_k(t)
    raise ValueError(f"sign must be '+' or '-', got {sign!r}")


def check_rate_certificate(data: FoliatedData, n: int = 10_000, tau_lo: float = 1e-10):
    """Check the declared vanishing-rate condition on log-spaced points of (0, collar].

    Returns (ok, worst_lower_ratio, worst_upper_ratio) where the ratios are
    theta_plus / tau**l against c_rate**-1 and c_rate.
    """
    t = np.geomspace(tau_lo, data.collar, n)
    ratio = data.theta_plus(t) / t ** data.l
    c = data.c_rate
    if data.rate_condition == "two_sided":
        ok = bool(np.all(ratio >= 1.0 / c) and np.all(ratio <= c))
    elif data.rate_condition == "upper":
        ok = bool(np.all(np.abs(ratio) <= c))
    else:
        ok = True
    return ok, float(ratio.min()), float(ratio.max())


# ---------------------------------------------------------------------------
# constructors


def synthetic_data(
    b: float,
    l: float,
    c0: float = 1.0,
    *,
    r_h: float = 1.0,
    collar: float = 0.1,
    blend_width: float = 0.4,
    r_max: float = 1000.0,
    k_nn0: float = 0.0,
    outer_C: float = 0.0,
    outer_knn: float = -2.0,
) -> FoliatedData:
    """Synthetic collar data with phi = tau**b and theta_plus = c0 * tau**l exactly.

    Leaves are flat spheres of area radius r = r_h + tau, so H_S = 2/r.  Beyond
    the collar the data blend (quintic smoothstep over ``blend_width``) into an
    asymptotically flat model with phi = 1 + outer_C/r, theta_plus = 2/r and
    k_nn = outer_knn * r**-2.5.
    """
    if b < 0:
        raise ValidationError(f"b must be >= 0, got {b}")
    if l < 1:
        raise ValidationError(f"l must be >= 1, got {l}")
    if c0 <= 0:
        raise ValidationError(f"c0 must be > 0, got {c0}")
    if r_max <= r_h + collar + blend_width:
        raise ValidationError("r_max must lie beyond the blend region")
    t0, t1 = collar, collar + blend_width

    r = Profile(lambda t: r_h + t, lambda t: np.ones(np.shape(t)))
    H = Profile(lambda t: 2.0 / (r_h + t), lambda t: -2.0 / (r_h + t) ** 2)

    theta_in = Profile(
        lambda t: c0 * np.abs(t) ** l * np.sign(t),
        lambda t: c0 * l * np.abs(t) ** (l - 1.0),
    )
    theta = _blend(theta_in, H, t0, t1)

    phi_out = Profile(lambda t: 1.0 + outer_C / (r_h + t), lambda t: -outer_C / (r_h + t) ** 2)
    if b == 0.0:
        phi_tilde = _blend(Profile.constant(1.0), phi_out, t0, t1)
    else:
        # phi_tilde = phi / tau**b with phi blended from tau**b to phi_out.
        def pt(t):
            s = smoothstep((t - t0) / (t1 - t0))
            with np.errstate(divide="ignore", invalid="ignore"):
                ratio = np.where(t > 0, phi_out(t) / np.where(t > 0, t, 1.0) ** b, 0.0)
            return (1.0 - s) + s * ratio

        def dpt(t):
            x = (t - t0) / (t1 - t0)
            s = smoothstep(x)
            ds = smoothstep_deriv(x) / (t1 - t0)
            tt = np.where(t > 0, t, 1.0)
            ratio = phi_out(tt) / tt ** b
            dratio = phi_out.deriv(tt) / tt ** b - b * phi_out(tt) / tt ** (b + 1.0)
            return np.where(t > t0, -ds + ds * ratio + s * dratio, 0.0)

        phi_tilde = Profile(pt, dpt)

    knn_out = Profile(lambda t: outer_knn * (r_h + t) ** -2.5, lambda t: -2.5 * outer_knn * (r_h + t) ** -3.5)
    k_nn = _blend(Profile.constant(k_nn0), knn_out, t0, t1)

    trk = Profile(lambda t: theta(t) - H(t), lambda t: theta.deriv(t) - H.deriv(t))
    theta_minus = Profile(lambda t: 2.0 * H(t) - theta(t), lambda t: 2.0 * H.deriv(t) - theta.deriv(t))

    return FoliatedData(
        tau_in=0.0,
        tau_max=r_max - r_h,
        b=float(b),
        l=float(l),
        c_rate=max(c0, 1.0 / c0),
        phi_tilde=phi_tilde,
        H_S=H,
        trS_k=trk,
        k_nn=k_nn,
        theta_plus=theta,
        theta_minus=theta_minus,
        r_of_tau=r,
        rate_condition="two_sided",
        collar=collar,
        outer_C=outer_C,
        label=f"synthetic(b={b:g},l={l:g},c0={c0:g})",
        meta={"kind": "synthetic", "b": b, "l": l, "c0": c0, "r_h": r_h, "r_max": r_max,
              "blend_width": blend_width, "k_nn0": k_nn0, "outer_knn": outer_knn},
    )


def flat_data(r_h: float = 1.0, r_max: float = 100.0) -> FoliatedData:
    """Time-symmetric Euclidean data outside a sphere of radius r_h: phi = 1, k = 0."""
    H = Profile(lambda t: 2.0 / (r_h + t), lambda t: -2.0 / (r_h + t) ** 2)
    zero = Profile.constant(0.0)
    return FoliatedData(
        tau_in=0.0,
        tau_max=r_max - r_h,
        b=0.0,
        l=1.0,
        c_rate=1.0,
        phi_tilde=Profile.constant(1.0),
        H_S=H,
        trS_k=zero,
        k_nn=zero,
        theta_plus=H,
        theta_minus=H,
        r_of_tau=Profile(lambda t: r_h + t, lambda t: np.ones(np.shape(t))),
        k_zero=True,
        label="flat",
        meta={"kind": "flat", "r_h": r_h, "r_max": r_max},
    )


def extend_inward(data: FoliatedData, sigma0: float = 0.05, vartheta: float = 1.0) -> FoliatedData:
    """Extend data onto [-sigma0, tau_max] through a foliation of trapped leaves.

    On [-sigma0, 0) theta_plus is (theta(0) + theta'(0) tau)(1 - s) - vartheta*s with
    s a quintic smoothstep saturating at tau = -0.75 sigma0, and the k profiles are
    linear continuations cut off to zero for tau <= -sigma0/2.  H_S is then
    theta_plus - trS_k.  All profiles are C^1 across tau = 0.
    """
    if sigma0 <= 0 or vartheta <= 0:
        raise ValidationError("sigma0 and vartheta must be positive")
    if data.tau_in != 0.0:
        raise ValidationError("extension requires data starting at the horizon tau = 0")
    th0 = float(data.theta_plus(np.zeros(1))[0])
    if abs(th0) > 1e-12:
        raise ValidationError(f"theta_plus(0) = {th0:g}; the inner boundary is not a horizon")
    if sigma0 > 0.5 * data.collar + 0.5:
        raise ValidationError(f"sigma0 = {sigma0} too large for profile blending")
    z = np.zeros(1)
    dth0 = float(data.theta_plus.deriv(z)[0])
    if dth0 < 0:
        raise ValidationError("theta_plus decreasing at the horizon; cannot extend with trapped leaves")
    sat = 0.75 * sigma0
    cut = 0.5 * sigma0

    def lin(p: Profile):
        v0, d0 = float(p(z)[0]), float(p.deriv(z)[0])
        return v0, d0

    def trapped(t):
        s = smoothstep(-t / sat)
        return (th0 + dth0 * t) * (1.0 - s) - vartheta * s

    def dtrapped(t):
        x = -t / sat
        s = smoothstep(x)
        ds = -smoothstep_deriv(x) / sat
        return dth0 * (1.0 - s) - (th0 + dth0 * t) * ds - vartheta * ds

    def cutoff_profile(p: Profile) -> Profile:
        v0, d0 = lin(p)

        def f(t):
            c = 1.0 - smoothstep(-t / cut)
            return np.where(t < 0.0, (v0 + d0 * t) * c, p(np.maximum(t, 0.0)))

        def df(t):
            x = -t / cut
            c = 1.0 - smoothstep(x)
            dc = smoothstep_deriv(x) / cut
            return np.where(t < 0.0, d0 * c + (v0 + d0 * t) * dc, p.deriv(np.maximum(t, 0.0)))

        return Profile(f, df)

    def piecewise(inner_f, inner_df, p: Profile) -> Profile:
        return Profile(
            lambda t: np.where(t < 0.0, inner_f(t), p(np.maximum(t, 0.0))),
            lambda t: np.where(t < 0.0, inner_df(t), p.deriv(np.maximum(t, 0.0))),
        )

    trk = cutoff_profile(data.trS_k)
    knn = cutoff_profile(data.k_nn)
    theta = piecewise(trapped, dtrapped, data.theta_plus)
    H = Profile(
        lambda t: np.where(t < 0.0, trapped(t) - trk(t), data.H_S(np.maximum(t, 0.0))),
        lambda t: np.where(t < 0.0, dtrapped(t) - trk.deriv(t), data.H_S.deriv(np.maximum(t, 0.0))),
    )
    theta_minus = Profile(
        lambda t: np.where(t < 0.0, H(t) - trk(t), data.theta_minus(np.maximum(t, 0.0))),
        lambda t: np.where(t < 0.0, H.deriv(t) - trk.deriv(t), data.theta_minus.deriv(np.maximum(t, 0.0))),
    )
    r = data.r_of_tau
    return dataclasses.replace(
        data,
        tau_in=-sigma0,
        H_S=H,
        trS_k=trk,
        k_nn=knn,
        theta_plus=theta,
        theta_minus=theta_minus,
        r_of_tau=r,
        phi_exact=None,
        extension=Extension(sigma0, vartheta),
        label=data.label + f",ext(sigma0={sigma0:g})",
    )


# ---------------------------------------------------------------------------
# tabulated input


def read_tabulated_csv(path, b: float, l: float, c_rate: float = 1.0, rate_condition: str = "none") -> FoliatedData:
    """Read ``tau,phi_tilde,H_S,trS_k,k_nn`` samples (strictly increasing tau, >= 2 rows)."""
    path = Path(path)
    with path.open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = [h.strip() for h in next(reader)]
        except StopIteration:
            raise ValidationError(f"{path}: empty file") from None
        if header != TABULATED_HEADER:
            raise ValidationError(f"{path}: header must be {','.join(TABULATED_HEADER)}, got {','.join(header)}")
        rows = []
        for lineno, row in enumerate(reader, start=2):
            if not row or all(not c.strip() for c in row):
                continue
            if len(row) != 5:
                raise ValidationError(f"{path}:{lineno}: expected 5 columns, got {len(row)}")
            try:
                rows.append([float(c) for c in row])
            except ValueError as exc:
                raise ValidationError(f"{path}:{lineno}: {exc}") from None
    if len(rows) < 2:
        raise ValidationError(f"{path}: need at least 2 data rows")
    a = np.array(rows)
    tau = a[:, 0]
    if np.any(np.diff(tau) <= 0):
        raise ValidationError(f"{path}: tau must be strictly increasing")
    if np.any(a[:, 1] <= 0):
        raise ValidationError(f"{path}: phi_tilde must be positive")
    H = Profile.tabulated(tau, a[:, 2])
    trk = Profile.tabulated(tau, a[:, 3])
    theta = Profile.tabulated(tau, a[:, 2] + a[:, 3])
    theta_m = Profile.tabulated(tau, a[:, 2] - a[:, 3])
    return FoliatedData(
        tau_in=float(tau[0]),
        tau_max=float(tau[-1]),
        b=float(b),
        l=float(l),
        c_rate=float(c_rate),
        phi_tilde=Profile.tabulated(tau, a[:, 1]),
        H_S=H,
        trS_k=trk,
        k_nn=Profile.tabulated(tau, a[:, 4]),
        theta_plus=theta,
        theta_minus=theta_m,
        rate_condition=rate_condition,
        closed_form=False,
        label=f"tabulated({path.name})",
        meta={"kind": "tabulated", "path": str(path)},
    )
