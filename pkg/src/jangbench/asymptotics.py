"""Blow-up exponents, log coefficients and outer decay rates of computed profiles."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import ValidationError
from .solver import JangProfile, derivatives

VERDICTS = ("family1_match", "family2_match", "sticking", "mismatch", "out_of_regime")
EXPONENT_TOL = 0.1
_TOL = 1e-9


@dataclass
class BlowupFit:
    """Result of an exponent fit near tau = 0.

    ``kind`` is "power" (psi ~ tau^-a_hat), "log" (psi ~ -alpha_hat ln tau) or
    "bounded".  ``slope_curve`` holds (tau, local slope of ln|psi'| in ln tau).
    """

    kind: str
    a_hat: float = float("nan")
    alpha_hat: float = float("nan")
    fit_window: tuple = (float("nan"), float("nan"))
    slope_curve: tuple = field(default_factory=lambda: (np.empty(0), np.empty(0)))
    spread: float = float("nan")
    log_ratio_spread: float = float("nan")
    low_confidence: bool = False
    verdict: str | None = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        t, s = self.slope_curve
        return {
            "kind": self.kind,
            "a_hat": self.a_hat,
            "alpha_hat": self.alpha_hat,
            "fit_window": list(self.fit_window),
            "spread": self.spread,
            "log_ratio_spread": self.log_ratio_spread,
            "low_confidence": self.low_confidence,
            "verdict": self.verdict,
            "notes": list(self.notes),
            "slope_curve": {"tau": [float(v) for v in t], "slope": [float(v) for v in s]},
        }


def _arrays(profile):
    if isinstance(profile, JangProfile):
        return profile.grid.nodes, profile.values, profile.params.delta, profile.classification
    try:
        tau, psi = profile
    except (TypeError, ValueError):
        raise ValidationError("profile must be a JangProfile or a (tau, psi) pair") from None
    return np.asarray(tau, float), np.asarray(psi, float), 0.0, "indeterminate"


def fit_window(tau, delta: float = 0.0, tau0: float = 0.1) -> tuple:
    """Default window [max(4 h_min, 100 delta, tau_2), tau0/10]."""
    tau = np.asarray(tau, float)
    pos = tau[tau > 0]
    if pos.size < 4:
        raise ValidationError("profile has too few points with tau > 0")
    h_min = float(np.min(np.diff(tau)))
    lo = max(4.0 * h_min, 100.0 * delta, float(pos[2]))
    return lo, tau0 / 10.0


def fit_blowup_exponent(profile, *, delta: float | None = None, tau0: float = 0.1, window: tuple | None = None,
                        per_decade: int = 40) -> BlowupFit:
    """Exponent of psi near tau = 0 from local slopes of ln|psi'| in ln tau.

    psi' is taken from three-point differences at the nodes, which removes the
    additive constant exactly; ln|psi'| is resampled at ``per_decade`` log
    spaced points per decade and differenced centrally.  The slope s(tau) is
    extrapolated to tau = 0 with a least-squares fit linear in tau (first-order
    Richardson).  a_hat = -s(0) - 1; when a_hat < 0.1 the profile is of log
    type and alpha_hat = -tau psi' over the lowest decade of the window.
    """
    tau, psi, d0, cls = _arrays(profile)
    delta = d0 if delta is None else delta
    if cls == "bounded":
        return BlowupFit(kind="bounded", notes=["profile classified bounded"])
    lo, hi = window if window is not None else fit_window(tau, delta, tau0)
    if not (hi > lo > 0):
        raise ValidationError(f"empty fit window [{lo:g}, {hi:g}]")
    notes = []
    decades = np.log10(hi / lo)
    low_conf = decades < 1.0
    if low_conf:
        notes.append(f"window spans {decades:.2f} decades (< 1)")
    d1, _ = derivatives(tau, psi)
    keep = (tau >= lo * 0.5) & (tau <= hi * 2.0) & (tau > 0) & (d1 != 0)
    lt, ld = np.log(tau[keep]), np.log(np.abs(d1[keep]))
    m = max(int(np.ceil(decades * per_decade)), 8)
    ls = np.linspace(np.log(lo), np.log(hi), m + 1)
    lv = np.interp(ls, lt, ld)
    slope = np.gradient(lv, ls)
    ts = np.exp(ls)
    A = np.vstack([np.ones_like(ts), ts]).T
    s0 = float(np.linalg.lstsq(A, slope, rcond=None)[0][0])
    last = ts <= lo * 10.0
    spread = float(np.ptp(slope[last]))
    if spread >= 0.05:
        low_conf = True
        notes.append(f"local slope spread {spread:.3g} over the lowest decade")
    a_hat = -s0 - 1.0
    sign = -np.sign(np.median(d1[keep]))
    # psi / (-ln tau) over the lowest decade of the window
    pl = np.interp(ls[last], np.log(tau[tau > 0]), psi[tau > 0])
    ratio = pl / (-ls[last])
    lrs = float(np.ptp(ratio) / max(np.max(np.abs(ratio)), 1e-300))
    if a_hat < 0.1:
        alpha = float(np.median(-np.exp(ls[last]) * np.interp(ls[last], lt, d1[keep])))
        return BlowupFit("log", a_hat=a_hat, alpha_hat=alpha, fit_window=(lo, hi), slope_curve=(ts, slope),
                         spread=spread, log_ratio_spread=lrs, low_confidence=low_conf, notes=notes)
    if sign < 0:
        notes.append("psi decreases toward tau = 0 (blow-down)")
    return BlowupFit("power", a_hat=a_hat, fit_window=(lo, hi), slope_curve=(ts, slope), spread=spread,
                     log_ratio_spread=lrs, low_confidence=low_conf, notes=notes)


def _in_family1(b, l):
    return -(l - 1.0) / 2.0 - _TOL <= b < (l + 1.0) / 2.0 - _TOL


def _in_family2(b, l):
    return 0.5 - _TOL <= b < (l + 1.0) / 2.0 - _TOL


def classify_rate(fit: BlowupFit, b: float, l: float, tol: float = EXPONENT_TOL) -> str:
    """Verdict for a fit against the two blow-up families of data with rates (b, l).

    Order: sticking (bounded at b = (l+1)/2), out_of_regime (neither family's
    hypothesis holds), family1_match, family2_match, mismatch.
    """
    sticking = abs(b - (l + 1.0) / 2.0) <= _TOL
    if fit.kind == "bounded" and sticking:
        return "sticking"
    f1, f2 = _in_family1(b, l), _in_family2(b, l)
    if not (f1 or f2):
        return "out_of_regime"
    if fit.kind == "power" and np.isfinite(fit.a_hat):
        if f1 and abs(fit.a_hat - (b + (l - 1.0) / 2.0)) <= tol:
            return "family1_match"
        if f2 and abs(fit.a_hat - (2.0 * b - 1.0)) <= tol:
            return "family2_match"
    if fit.kind == "log":
        if f1 and abs(b + (l - 1.0) / 2.0) <= _TOL:
            return "family1_match"
        if f2 and abs(b - 0.5) <= _TOL:
            return "family2_match"
    return "mismatch"


def fit_decay_exponent(r, psi, r_max: float | None = None) -> float:
    """Least-squares slope of ln|psi| against ln r over [r_max/100, r_max/10].

    The decade next to the Dirichlet truncation at r_max is excluded because
    psi is forced to 0 there.
    """
    r = np.asarray(r, float)
    psi = np.asarray(psi, float)
    r_max = float(r[-1]) if r_max is None else float(r_max)
    w = (r >= r_max / 100.0) & (r <= r_max / 10.0)
    if w.sum() < 3:
        raise ValidationError("fewer than 3 points in the decay window")
    if np.all(psi[w] == 0.0):
        raise ValidationError("psi vanishes on the decay window: exponent undefined")
    a = np.abs(psi[w])
    ok = a > 0
    return float(np.polyfit(np.log(r[w][ok]), np.log(a[ok]), 1)[0])


def profile_decay_exponent(profile: JangProfile, data) -> float:
    """Outer decay exponent of a profile on data with an area radius r(tau)."""
    if data.r_of_tau is None:
        raise ValidationError("data carry no area radius")
    r = data.r_of_tau(profile.grid.nodes)
    return fit_decay_exponent(r, profile.values, r_max=float(r[-1]))
