"""Sub- and supersolutions of the reduced Jang equation near the horizon.

Barrier functions are monotonically decreasing in tau and blow up at tau = 0.
A barrier with ``delta_shift`` d stores psi(tau + d).  ``verify_barrier``
checks the differential inequality with an explicit margin on a dense grid.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np

from .errors import RegimeError, ValidationError
from .geometry import FoliatedData
from .operator import OperatorParams, jang_residual

ROLES = ("sub", "super")
KINDS = ("power", "log", "ode", "integral", "linear")
_TOL = 1e-12
_GL_X, _GL_W = np.polynomial.legendre.leggauss(20)


def _check_role(role):
    if role not in ROLES:
        raise ValidationError(f"role must be 'sub' or 'super', got {role!r}")


def integrate_to(g, s, upper: float, max_log_step: float = 0.05):
    """int_s^upper g(x) dx for each s > 0, by composite Gauss-Legendre in ln x.

    The integrand is evaluated on panels between consecutive sorted points, so a
    dense set of s values costs O(len(s)) panels.  Values of s above ``upper``
    give negative integrals as usual.
    """
    s = np.asarray(s, dtype=float)
    flat = s.ravel()
    if np.any(flat <= 0) or upper <= 0:
        raise ValidationError("integration limits must be positive")
    pts = np.unique(np.concatenate([np.log(flat), [np.log(upper)]]))
    # refine long panels
    edges = [pts[0]]
    for a, b in zip(pts[:-1], pts[1:]):
        k = max(1, int(np.ceil((b - a) / max_log_step)))
        edges.extend(np.linspace(a, b, k + 1)[1:])
    edges = np.asarray(edges)
    a, b = edges[:-1], edges[1:]
    half = 0.5 * (b - a)
    t = a[:, None] + half[:, None] * (_GL_X + 1.0)
    x = np.exp(t)
    panel = half * ((g(x) * x) @ _GL_W)
    cum = np.concatenate([[0.0], np.cumsum(panel)])  # int from edges[0] to edges[i]
    c_up = cum[np.searchsorted(edges, np.log(upper))]
    idx = np.searchsorted(edges, np.log(flat))
    return (c_up - cum[idx]).reshape(s.shape)


@dataclass(frozen=True)
class Barrier:
    """A closed-form or ODE-defined barrier psi(tau) = F(tau + delta_shift)."""

    kind: str
    role: str
    b: float
    l: float
    params: dict
    delta_shift: float = 0.0
    valid_range: tuple = (0.0, 0.1)
    meta: dict = field(default_factory=dict, compare=False)

    # -- function of s = tau + delta ------------------------------------
    def _F(self, s):
        p = self.params
        k = self.kind
        if k == "power":
            return p["alpha"] * s ** (-p["a"]) + p["beta"]
        if k == "log":
            return -p["alpha"] * np.log(s) + p["beta"]
        if k == "ode":
            return integrate_to(lambda x: -self._ode_d1(x), s, p["tau0"]) + p["beta"]
        if k == "integral":
            lam, b2 = p["lam"], 2.0 * self.b
            g = lambda x: np.exp(lam * x) * x ** (-b2)
            return p["mu1"] * integrate_to(g, s, 1.0) + p["mu2"]
        if k == "linear":
            return p["a"] + p["sign"] * p["b_slope"] * s
        raise ValidationError(f"unknown barrier kind {k!r}")

    def _ode_E(self, s):
        p = self.params
        c = 2.0 * p["lam"] / (p["l_tilde"] + 1.0 - 2.0 * self.b)
        return p["sigma"] * c * s ** (p["l_tilde"] + 1.0 + 2.0 * self.b) + p["Lam"] ** 2 * s ** (4.0 * self.b)

    def _ode_d1(self, s):
        return -1.0 / np.sqrt(self._ode_E(s))

    def _dF(self, s):
        p = self.params
        k = self.kind
        if k == "power":
            return -p["a"] * p["alpha"] * s ** (-p["a"] - 1.0)
        if k == "log":
            return -p["alpha"] / s
        if k == "ode":
            return self._ode_d1(s)
        if k == "integral":
            return -p["mu1"] * np.exp(p["lam"] * s) * s ** (-2.0 * self.b)
        if k == "linear":
            return np.full(np.shape(s), p["sign"] * p["b_slope"])
        raise ValidationError(f"unknown barrier kind {k!r}")

    def _ddF(self, s):
        p = self.params
        k = self.kind
        if k == "power":
            a = p["a"]
            return a * (a + 1.0) * p["alpha"] * s ** (-a - 2.0)
        if k == "log":
            return p["alpha"] / s ** 2
        if k == "ode":
            q = p["l_tilde"] + 1.0 + 2.0 * self.b
            c = 2.0 * p["lam"] / (p["l_tilde"] + 1.0 - 2.0 * self.b)
            dE = p["sigma"] * c * q * s ** (q - 1.0) + 4.0 * self.b * p["Lam"] ** 2 * s ** (4.0 * self.b - 1.0)
            return 0.5 * self._ode_E(s) ** -1.5 * dE
        if k == "integral":
            d1 = self._dF(s)
            return d1 * (p["lam"] - 2.0 * self.b / s)
        if k == "linear":
            return np.zeros(np.shape(s))
        raise ValidationError(f"unknown barrier kind {k!r}")

    # -- public evaluation ----------------------------------------------
    def _s(self, tau):
        return np.asarray(tau, dtype=float) + self.delta_shift

    def value(self, tau):
        return self._F(self._s(tau))

    def d1(self, tau):
        return self._dF(self._s(tau))

    def d2(self, tau):
        return self._ddF(self._s(tau))

    __call__ = value

    def translate(self, delta: float) -> "Barrier":
        """Barrier tau -> F(tau + delta) (replaces any previous shift)."""
        if delta < 0:
            raise ValidationError("delta shift must be >= 0")
        return dataclasses.replace(self, delta_shift=float(delta))

    def with_beta(self, beta: float) -> "Barrier":
        key = {"power": "beta", "log": "beta", "ode": "beta", "integral": "mu2", "linear": "a"}[self.kind]
        return dataclasses.replace(self, params={**self.params, key: float(beta)})

    def matched_at(self, tau: float, value: float) -> "Barrier":
        """Shift the additive constant so that barrier(tau) == value."""
        cur = float(self.value(np.array([tau]))[0])
        key = {"power": "beta", "log": "beta", "ode": "beta", "integral": "mu2", "linear": "a"}[self.kind]
        return self.with_beta(self.params[key] + (value - cur))

    @property
    def margin_exponent(self) -> float:
        return self.params.get("l_tilde", self.l) if self.kind == "ode" else self.l


# ---------------------------------------------------------------------------
# constructors


def build_power_barrier(b: float, l: float, role: str, alpha: float, beta: float = 0.0, tau0: float = 0.1) -> Barrier:
    """psi = alpha * tau**-a + beta with a = b + (l - 1)/2."""
    _check_role(role)
    if abs(b - (l + 1.0) / 2.0) <= _TOL:
        raise RegimeError(
            f"b = (l+1)/2 = {b:g}: borderline sticking case (as for Schwarzschild data, b = l = 1); "
            "no power blow-up barrier exists"
        )
    if b > (l + 1.0) / 2.0:
        raise RegimeError(f"b = {b:g} > (l+1)/2 = {(l + 1) / 2:g}: outside -(l-1)/2 <= b < (l+1)/2")
    a = b + (l - 1.0) / 2.0
    if a <= _TOL:
        raise RegimeError(f"a = b + (l-1)/2 = {a:g} <= 0: b <= -(l-1)/2, use build_log_barrier")
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    return Barrier("power", role, float(b), float(l), {"alpha": float(alpha), "a": a, "beta": float(beta)},
                   valid_range=(0.0, tau0))


def build_log_barrier(b: float, l: float, role: str, alpha: float, beta: float = 0.0, tau0: float = 0.1) -> Barrier:
    """psi = -alpha * ln(tau) + beta, for b = -(l - 1)/2."""
    _check_role(role)
    if abs(b + (l - 1.0) / 2.0) > _TOL:
        raise RegimeError(f"log barrier needs b = -(l-1)/2 = {-(l - 1) / 2:g}, got b = {b:g}")
    if not alpha > 0:
        raise ValidationError("alpha must be positive")
    return Barrier("log", role, float(b), float(l), {"alpha": float(alpha), "beta": float(beta)},
                   valid_range=(0.0, tau0))


def ode_bracket_tau0(b, l_tilde, lam, Lam, sigma) -> float:
    """Largest tau0 on which Lam^-1 tau^-2b / 2 <= -chi' <= 2 Lam^-1 tau^-2b holds."""
    c = 2.0 * lam / (l_tilde + 1.0 - 2.0 * b)
    q = l_tilde + 1.0 - 2.0 * b
    bound = 3.0 * Lam ** 2 / c if sigma > 0 else 0.75 * Lam ** 2 / c
    return float(bound ** (1.0 / q)) if c > 0 else np.inf


def build_ode_barrier(b: float, l: float, l_tilde: float | None, lam: float, Lam: float, role: str,
                      tau0: float = 0.1, beta: float = 0.0) -> Barrier:
    """Barrier with chi' = -(+-2 lam/(l~+1-2b) tau**(l~+1+2b) + Lam**2 tau**(4b))**-1/2.

    The sub barrier takes the + sign under the root, the super barrier the - sign.
    chi(tau) = int_tau^tau0 (-chi') + beta.
    """
    _check_role(role)
    if not (0.5 - _TOL <= b < (l + 1.0) / 2.0):
        raise RegimeError(f"ODE barriers need 1/2 <= b < (l+1)/2; got b = {b:g}, l = {l:g}")
    if l_tilde is None:
        l_tilde = min(l, 2.0 * b)
    if not (2.0 * b - 1.0 < l_tilde <= min(l, 2.0 * b) + _TOL):
        raise RegimeError(f"l_tilde = {l_tilde:g} must satisfy 2b-1 < l_tilde <= min(l, 2b)")
    if not (lam >= 0 and Lam > 0):
        raise ValidationError("need lam >= 0 and Lam > 0")
    sigma = 1.0 if role == "sub" else -1.0
    c = 2.0 * lam / (l_tilde + 1.0 - 2.0 * b)
    if sigma < 0 and Lam ** 2 - c * tau0 ** (l_tilde + 1.0 - 2.0 * b) <= 0:
        raise RegimeError(f"expression under the root vanishes on (0, {tau0:g}]; shrink tau0 or lam")
    bt = min(tau0, ode_bracket_tau0(b, l_tilde, lam, Lam, sigma))
    return Barrier("ode", role, float(b), float(l),
                   {"lam": float(lam), "Lam": float(Lam), "l_tilde": float(l_tilde), "sigma": sigma,
                    "tau0": float(tau0), "beta": float(beta)},
                   valid_range=(0.0, tau0), meta={"bracket_tau0": bt})


def build_integral_barrier(b: float, lam: float, mu1: float, mu2: float, delta: float, l: float = 1.0) -> Barrier:
    """psi_delta(tau) = mu1 int_{tau+delta}^1 e^(lam s) s^(-2b) ds + mu2 (a supersolution for large lam)."""
    if b < 0.5 - _TOL:
        raise RegimeError("this barrier needs b >= 1/2")
    if not (lam > 0 and mu1 > 0):
        raise ValidationError("need lam > 0 and mu1 > 0")
    if delta < 0:
        raise ValidationError("delta must be >= 0")
    if delta == 0.0:
        raise ValidationError("delta = 0 with 2b >= 1: the integral diverges at tau = 0")
    return Barrier("integral", "super", float(b), float(l), {"lam": float(lam), "mu1": float(mu1), "mu2": float(mu2)},
                   delta_shift=float(delta), valid_range=(0.0, 1.0 - delta))


def build_linear_barrier(a: float, b_slope: float, sign: int, role: str) -> Barrier:
    """psi = a + sign * b_slope * tau (boundary barriers of the extended problem)."""
    _check_role(role)
    if sign not in (-1, 1):
        raise ValidationError("sign must be +1 or -1")
    return Barrier("linear", role, 0.0, 1.0, {"a": float(a), "b_slope": float(b_slope), "sign": int(sign)},
                   valid_range=(-np.inf, np.inf))


# ---------------------------------------------------------------------------
# verification


@dataclass
class MarginReport:
    ok: bool
    n_points: int
    violations: int
    worst_ratio: float
    failing_tau: float | None
    margin_lambda: float
    margin_exponent: float
    regime_mismatch: bool
    tau0: float
    tau: np.ndarray = field(repr=False)
    residual: np.ndarray = field(repr=False)
    margin: np.ndarray = field(repr=False)
    ratio: np.ndarray = field(repr=False)

    def summary(self) -> dict:
        return {k: v for k, v in dataclasses.asdict(self).items() if not isinstance(v, np.ndarray)}


def default_margin(barrier: Barrier, data: FoliatedData) -> float:
    """Margin constant: lam/2 for ODE barriers, 1/(2c) for the others."""
    if barrier.kind == "ode":
        return 0.5 * barrier.params["lam"]
    return 0.5 / data.c_rate


def log_grid(tau0: float, n: int = 10_000, decades: float = 8.0) -> np.ndarray:
    return np.geomspace(tau0 * 10.0 ** (-decades), tau0, n)


def verify_barrier(barrier: Barrier, data: FoliatedData, params: OperatorParams | None = None, tau_grid=None,
                   margin_lambda: float | None = None) -> MarginReport:
    """Check residual >= margin (sub) or residual <= -margin (super) on tau_grid.

    margin(tau) = margin_lambda * (tau + delta)**m with m = l (power, log) or
    l_tilde (ODE barriers).  Failures are reported, not raised.
    """
    params = params or OperatorParams(delta=barrier.delta_shift)
    tau0 = barrier.valid_range[1]
    t = log_grid(min(tau0, data.tau_max)) if tau_grid is None else np.asarray(tau_grid, dtype=float)
    lam = default_margin(barrier, data) if margin_lambda is None else float(margin_lambda)
    mexp = barrier.margin_exponent
    mismatch = (abs(barrier.b - data.b) > _TOL or abs(barrier.l - data.l) > _TOL) and barrier.kind != "linear"
    # at epsilon = 0 the operator ignores psi itself; skip the quadrature then
    vals = barrier.value(t) if params.source_eps != 0.0 or barrier.kind not in ("ode", "integral") else np.zeros_like(t)
    res = jang_residual(data, t, vals, barrier.d1(t), barrier.d2(t), params)
    sgn = 1.0 if barrier.role == "sub" else -1.0
    margin = sgn * lam * (t + params.delta) ** mexp
    with np.errstate(divide="ignore", invalid="ignore"):
        ratio = res / margin
    good = ratio >= 1.0
    bad = np.flatnonzero(~good)
    return MarginReport(
        ok=bool(bad.size == 0),
        n_points=int(t.size),
        violations=int(bad.size),
        worst_ratio=float(np.min(ratio)),
        failing_tau=float(t[bad[0]]) if bad.size else None,
        margin_lambda=lam,
        margin_exponent=float(mexp),
        regime_mismatch=bool(mismatch),
        tau0=float(t.max()),
        tau=t,
        residual=res,
        margin=margin,
        ratio=ratio,
    )


def _bisect_log(passes, lo, hi, want_small: bool, iters: int = 60):
    """Boundary of the pass region in log space; returns the extreme passing value."""
    if want_small:
        # passes for small values: find sup of passing
        if not passes(lo):
            return None
        if passes(hi):
            return hi
    else:
        if not passes(hi):
            return None
        if passes(lo):
            return lo
    a, b = np.log(lo), np.log(hi)
    for _ in range(iters):
        m = 0.5 * (a + b)
        ok = passes(np.exp(m))
        if want_small == ok:
            a = m
        else:
            b = m
        if b - a < 1e-6:
            break
    return float(np.exp(a if want_small else b))


@dataclass
class Certificate:
    barrier: Barrier
    report: MarginReport
    tau0: float
    search: dict


def certify_barrier(data: FoliatedData, role: str, family: int = 1, tau0: float | None = None,
                    n: int = 10_000, decades: float = 8.0, Lam: float = 1.0, l_tilde: float | None = None,
                    tau0_min: float = 1e-6) -> Certificate:
    """Build and certify a barrier for ``data``.

    Family 1 uses power (or log) barriers: the constant alpha is bisected on
    the pass/fail boundary and backed off by x0.5 (sub) or x2 (super).  Family
    2 uses ODE barriers with lam = 10, 20, 40, ... up to 2**20.  The collar tau0
    is halved until the check passes (not below tau0_min).
    """
    _check_role(role)
    b, l = data.b, data.l
    tau0 = data.collar if tau0 is None else tau0
    search: dict = {"tau0_tried": []}
    while tau0 >= tau0_min:
        search["tau0_tried"].append(tau0)
        grid = log_grid(tau0, n, decades)
        cert = None
        if family == 1:
            log_kind = abs(b + (l - 1.0) / 2.0) <= _TOL
            build = build_log_barrier if log_kind else build_power_barrier

            def passes(alpha):
                bar = build(b, l, role, alpha, 0.0, tau0)
                return verify_barrier(bar, data, tau_grid=grid).ok

            edge = _bisect_log(passes, 1e-6, 1e6, want_small=(role == "sub"))
            if edge is not None:
                alpha = edge * (0.5 if role == "sub" else 2.0)
                bar = build(b, l, role, alpha, 0.0, tau0)
                rep = verify_barrier(bar, data, tau_grid=grid)
                if rep.ok:
                    search["alpha_edge"] = edge
                    cert = Certificate(bar, rep, tau0, search)
        elif family == 2:
            lam = 10.0
            while lam <= 2.0 ** 20:
                t0 = tau0
                try:
                    if role == "super":
                        lt = min(l, 2.0 * b) if l_tilde is None else l_tilde
                        t0 = min(tau0, 0.99 * ode_bracket_tau0(b, lt, lam, Lam, -1.0))
                    bar = build_ode_barrier(b, l, l_tilde, lam, Lam, role, tau0=t0)
                    bar = dataclasses.replace(bar, valid_range=(0.0, min(t0, bar.meta["bracket_tau0"])))
                except RegimeError:
                    break
                g = log_grid(bar.valid_range[1], n, decades)
                rep = verify_barrier(bar, data, tau_grid=g)
                if rep.ok:
                    search["lam"] = lam
                    cert = Certificate(bar, rep, bar.valid_range[1], search)
                    break
                lam *= 2.0
        else:
            raise ValidationError("family must be 1 or 2")
        if cert is not None:
            return cert
        tau0 *= 0.5
    raise RegimeError(f"could not certify a {role} barrier down to tau0 = {tau0_min:g}")


# ---------------------------------------------------------------------------
# structure coefficients


def structure_coefficients(data: FoliatedData, tau, dpsi, delta: float = 0.0):
    """Bounded coefficients (c1, c2) with, for psi' < 0 and epsilon = 0,

        R = -theta_plus - c1/(s^2b psi'^2) (psi''/psi' + 2b/s) + c2/(s^2b psi'^2),  s = tau + delta.
    """
    t = np.asarray(tau, dtype=float)
    p1 = np.asarray(dpsi, dtype=float)
    if np.any(p1 >= 0):
        raise ValidationError("structure coefficients need psi' < 0")
    s = t + delta
    pt = data.phi_tilde(t)
    dpt = data.phi_tilde.deriv(t)
    u = s ** data.b * pt * np.abs(p1)
    Q = np.sqrt(1.0 + u * u)
    c1 = u ** 3 / (Q ** 3 * pt * pt)
    c2 = (u * u / (pt * pt)) * (-2.0 * u * dpt / (pt * Q ** 3) - data.k_nn(t) / Q ** 2 + data.H_S(t) / (Q * (Q + u)))
    return c1, c2
