"""Regularization limits that produce the two families of blow-up solutions.

Family 1 (blow-up through the horizon): for each delta the data are extended
inward through trapped leaves and the epsilon-regularized Dirichlet problem
is continued down the epsilon schedule.  The epsilon -> 0 limit at fixed
delta is the radial blow-up solution; it is computed from the first-order
equation for eta = 1 + phi psi' / Q with eta(0) = 0, which is what the
regularized solutions converge to away from the inner edge.

Family 2 (finite boundary values T_delta): the delta-regularized Dirichlet
problem with psi(0) = T_delta is solved with the eps (psi - chi) source down
an epsilon schedule, then exactly at epsilon = 0.
"""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .barriers import Barrier, certify_barrier
from .errors import NumericError, RegimeError, ValidationError
from .geometry import FoliatedData, Profile, smoothstep, smoothstep_deriv
from .grid import Grid, extended_grid, geometric_grid
from .operator import OperatorParams
from .solver import JangProfile, SolveReport, solve_regularized

_GL_X, _GL_W = np.polynomial.legendre.leggauss(8)


def geometric_schedule(start: float, stop: float, ratio: float) -> list:
    """start, start*ratio, ... down to stop (inclusive, up to rounding)."""
    if not (start > 0 and stop > 0 and 0 < ratio < 1):
        raise ValidationError("schedule needs start, stop > 0 and 0 < ratio < 1")
    out = [start]
    while out[-1] * ratio >= stop * (1.0 - 1e-9):
        out.append(out[-1] * ratio)
    if out[-1] > stop * (1.0 + 1e-9):
        out.append(stop)
    return out


def regime_family1(b: float, l: float) -> bool:
    return -(l - 1.0) / 2.0 - 1e-12 <= b < (l + 1.0) / 2.0 - 1e-12


def regime_family2(b: float, l: float) -> bool:
    return 0.5 - 1e-12 <= b < (l + 1.0) / 2.0 - 1e-12


def check_regime(b: float, l: float, family: int):
    if abs(b - (l + 1.0) / 2.0) <= 1e-12:
        raise RegimeError(f"b = (l+1)/2 = {b:g}: sticking regime, no blow-up family")
    if family == 1 and not regime_family1(b, l):
        raise RegimeError(f"family 1 needs -(l-1)/2 <= b < (l+1)/2; got b = {b:g}, l = {l:g}")
    if family == 2 and not regime_family2(b, l):
        raise RegimeError(f"family 2 needs 1/2 <= b < (l+1)/2; got b = {b:g}, l = {l:g}")


# ---------------------------------------------------------------------------
# epsilon -> 0 at fixed delta through the tilt equation


def _eta_rhs(data: FoliatedData, delta: float):
    def rhs(t, y):
        eta = y[0]
        tt = np.array([t])
        phi, dphi = data.warp(tt, delta)
        g = float(dphi[0] / phi[0])
        H = float(data.H_S(tt)[0])
        th = float(data.theta_plus(tt)[0])
        kn = float(data.k_nn(tt)[0])
        e2 = eta * (2.0 - eta)
        return [g * (1.0 - eta) * e2 + th - eta * H + kn * e2]

    return rhs


def _series_start(data: FoliatedData, tau_s: float) -> float:
    """eta ~ c tau^(l+1) / (l+1-2b) near tau = 0 for the unshifted warp."""
    return float(data.c_rate * tau_s ** (data.l + 1.0) / (data.l + 1.0 - 2.0 * data.b))


def blowup_profile(data: FoliatedData, delta: float, grid: Grid, rtol: float = 1e-11):
    """psi on the grid for the radial blow-up solution with phi_delta, psi(tau_max) = 0.

    eta = 1 + phi psi'/Q solves
        eta' = (phi'/phi)(1 - eta) eta (2 - eta) + theta_plus - eta H + k_nn eta (2 - eta)
    with eta(0) = 0 (psi -> +infinity at the horizon), and
        psi' = (eta - 1) / (phi sqrt(eta (2 - eta))).
    For delta = 0 the integration starts from the leading series term at a
    point well inside the first grid cell.  psi is integrated cell by cell
    with Gauss-Legendre on the dense output.  All nodes must be positive.
    Returns (psi, dpsi at the nodes, eta at the nodes).
    """
    if delta < 0:
        raise ValidationError("delta must be >= 0")
    x = grid.nodes
    if x[0] <= 0.0:
        raise ValidationError("the blow-up profile is infinite at tau = 0; the grid must start at tau > 0")
    if delta == 0.0 and not data.l + 1.0 - 2.0 * data.b > 0:
        raise RegimeError("series start needs b < (l+1)/2")
    rhs = _eta_rhs(data, delta)
    if delta > 0:
        t0, y0 = 0.0, 0.0
    else:
        t0 = 1e-3 * x[0]
        y0 = _series_start(data, t0)
    sol = solve_ivp(rhs, (t0, x[-1]), [y0], method="DOP853", rtol=rtol, atol=1e-300, dense_output=True,
                    first_step=1e-3 * (x[0] - t0 if delta == 0 else min(delta, x[0])))
    if sol.status != 0:
        raise NumericError(f"blow-up initial value problem failed: {sol.message}")

    def dpsi(t):
        eta = np.clip(sol.sol(t)[0], 1e-300, 2.0)
        phi = data.warp(t, delta)[0]
        return (eta - 1.0) / (phi * np.sqrt(eta * (2.0 - eta)))

    a, bb = x[:-1], x[1:]
    half = 0.5 * (bb - a)
    pts = a[:, None] + half[:, None] * (_GL_X + 1.0)
    cell = half * (dpsi(pts.ravel()).reshape(pts.shape) @ _GL_W)
    psi = np.zeros_like(x)
    psi[:-1] = -np.cumsum(cell[::-1])[::-1]
    return psi, dpsi(x), sol.sol(x)[0]


# ---------------------------------------------------------------------------
# epsilon stage on the extended problem


@dataclass
class EpsilonStage:
    eps: list = field(default_factory=list)
    sup_psi: list = field(default_factory=list)
    inner_growth_ok: list = field(default_factory=list)
    monotone_ok: bool = True
    completed: bool = False
    message: str = ""
    refinements: int = 0
    profile: JangProfile | None = None
    report: SolveReport | None = None


def epsilon_stage(data: FoliatedData, delta: float, eps_schedule, grid: Grid, sigma0: float = 0.05,
                  vartheta: float = 1.0, min_ratio: float = 0.97, max_refinements: int = 12,
                  max_iter: int = 200) -> EpsilonStage:
    """Continue the eps-regularized Dirichlet problem on the inward extension.

    Boundary values: vartheta/(2 eps) at -sigma0 and 0 at tau_max.  On a failed
    step the step ratio is replaced by its square root (up to
    ``max_refinements`` times).  Records the inner growth check
    psi >= vartheta/(4 eps) at the inner edge node next to the boundary and the
    monotonicity of sup|psi| along the schedule.
    """
    ext = data.extend_inward(sigma0, vartheta)
    st = EpsilonStage()
    targets = list(eps_schedule)
    prev = None
    eps_prev = None
    refinements = 0
    i = 0
    while i < len(targets):
        eps = targets[i]
        params = OperatorParams(epsilon=eps, delta=delta, source_mode="eps_f")
        init = None if prev is None else _rescaled_start(prev, eps_prev / eps)
        prof, rep = solve_regularized(ext, params, (vartheta / (2.0 * eps), 0.0), grid, init=init,
                                      max_iter=max_iter)
        if not rep.converged:
            if eps_prev is None:
                st.message = f"first step eps={eps:g} failed: {rep.message}"
                break
            ratio = eps / eps_prev
            refinements += 1
            if ratio >= min_ratio or refinements > max_refinements:
                st.message = f"step refinement exhausted at eps={eps:g}: {rep.message}"
                break
            targets.insert(i, eps_prev * np.sqrt(ratio))
            continue
        sup = rep.sup_psi
        if st.sup_psi and sup < st.sup_psi[-1] * (1.0 - 0.01):
            st.monotone_ok = False
        st.eps.append(eps)
        st.sup_psi.append(sup)
        st.inner_growth_ok.append(bool(prof.values[1] >= vartheta / (4.0 * eps)))
        prev, eps_prev = prof, eps
        st.profile, st.report = prof, rep
        i += 1
    st.refinements = refinements
    st.completed = bool(st.eps) and st.eps[-1] <= targets[-1] * (1.0 + 1e-9)
    return st


def _rescaled_start(prev: JangProfile, factor: float) -> np.ndarray:
    """Warm start: stretch the trapped part (tau < 0) by the boundary value ratio."""
    x, p = prev.grid.nodes, prev.values
    i0 = int(np.searchsorted(x, 0.0))
    out = p.copy()
    base = p[i0]
    out[:i0] = base + factor * (p[:i0] - base)
    return out


# ---------------------------------------------------------------------------
# enclosure


@dataclass
class EnclosureResult:
    lower_ok: bool
    upper_ok: bool
    worst_violation: float
    n_checked: int
    tau_range: tuple

    @property
    def both_ok(self) -> bool:
        return self.lower_ok and self.upper_ok

    def to_dict(self) -> dict:
        return {"lower_ok": self.lower_ok, "upper_ok": self.upper_ok, "worst_violation": self.worst_violation,
                "n_checked": self.n_checked, "tau_range": list(self.tau_range)}


def enclosure_check(profile: JangProfile, lower: Barrier | None, upper: Barrier | None,
                    rtol: float = 1e-9) -> EnclosureResult:
    """Check lower(tau_i) <= psi_i <= upper(tau_i) on the nodes inside both valid ranges.

    ``worst_violation`` is the largest amount by which psi leaves the band
    (0 when enclosed).  Values within rtol * (1 + |psi|) count as enclosed.
    """
    x, p = profile.grid.nodes, profile.values
    lo_t, hi_t = -np.inf, np.inf
    for bar in (lower, upper):
        if bar is not None:
            lo_t = max(lo_t, bar.valid_range[0] - bar.delta_shift)
            hi_t = min(hi_t, bar.valid_range[1])
    mask = (x > lo_t) & (x <= hi_t * (1.0 + 1e-12))
    if lower is not None and lower.delta_shift == 0.0:
        mask &= x > 0.0
    if not np.any(mask):
        raise ValidationError("barriers and profile have no common range")
    xs, ps = x[mask], p[mask]
    slack = rtol * (1.0 + np.abs(ps))
    worst = 0.0
    lower_ok = upper_ok = True
    if lower is not None:
        d = lower.value(xs) - ps
        lower_ok = bool(np.all(d <= slack))
        worst = max(worst, float(np.max(d)))
    if upper is not None:
        d = ps - upper.value(xs)
        upper_ok = bool(np.all(d <= slack))
        worst = max(worst, float(np.max(d)))
    return EnclosureResult(lower_ok, upper_ok, max(worst, 0.0), int(mask.sum()), (float(xs[0]), float(xs[-1])))


def barrier_midpoint(lower: Barrier, upper: Barrier, bc, grid: Grid) -> np.ndarray:
    """Initial iterate: the barrier midpoint on their common range, linear to the outer value beyond."""
    x = grid.nodes
    t1 = min(lower.valid_range[1], upper.valid_range[1])
    inside = (x <= t1) & (x + lower.delta_shift > 0) & (x + upper.delta_shift > 0)
    out = np.empty_like(x)
    mid = 0.5 * (lower.value(x[inside]) + upper.value(x[inside]))
    out[inside] = mid
    edge = mid[-1] if mid.size else bc[0]
    rest = ~inside
    xr = x[rest]
    out[rest] = edge + (bc[1] - edge) * (xr - xr[0]) / max(x[-1] - xr[0], 1e-300)
    return out


def _power_or_log(data: FoliatedData, role: str, tau0: float | None = None):
    return certify_barrier(data, role, family=1, tau0=tau0)


def _matched(cert, tau0: float, value: float, delta: float = 0.0) -> Barrier:
    bar = cert.barrier.translate(delta) if delta else cert.barrier
    bar = dataclasses.replace(bar, valid_range=(0.0, tau0))
    return bar.matched_at(tau0, value)


def _ordered(cert, tau0: float, v_tau0: float, v_inner: float, delta: float, below: bool) -> Barrier:
    """Barrier shifted by delta with beta chosen so it lies below (or above) psi at tau = 0 and tau0."""
    bar = dataclasses.replace(cert.barrier.translate(delta), valid_range=(0.0, tau0))
    a = bar.matched_at(tau0, v_tau0)
    b = bar.matched_at(0.0, v_inner)
    ka = {"power": "beta", "log": "beta", "ode": "beta"}[bar.kind]
    pick = min if below else max
    return a if pick(a.params[ka], b.params[ka]) == a.params[ka] else b


# ---------------------------------------------------------------------------
# classification of limits


def classify_limit(profile_values, tau, threshold: float = 1e3) -> str:
    """blowup_plus if psi(tau_min) exceeds ``threshold`` or tau |psi'| stays bounded below at the
    inner end (non-integrable psi', log-type divergence); blowup_minus symmetrically; else bounded
    when psi' is integrable at the inner end, indeterminate otherwise."""
    p = np.asarray(profile_values, float)
    x = np.asarray(tau, float)
    if p[0] > threshold:
        return "blowup_plus"
    if p[0] < -threshold:
        return "blowup_minus"
    k = np.searchsorted(x, [x[0] * 10.0, x[0] * 100.0])
    if k[1] >= x.size:
        return "indeterminate"
    # mean slope d psi / d ln tau over the first two decades
    s1 = (p[k[0]] - p[0]) / np.log(x[k[0]] / x[0])
    s2 = (p[k[1]] - p[k[0]]) / np.log(x[k[1]] / x[k[0]])
    if s1 < 0 and s2 < 0 and s1 <= 0.9 * s2 * 1.0 and abs(s1) > 0.1:
        return "blowup_plus"
    if s1 > 0 and s2 > 0 and s1 >= 0.9 * s2 and abs(s1) > 0.1:
        return "blowup_minus"
    return "bounded" if abs(s1) < 0.5 * abs(s2) + 1e-12 else "indeterminate"


# ---------------------------------------------------------------------------
# family 1


@dataclass
class ContinuationResult:
    limit: JangProfile
    sequence: list
    report: SolveReport
    eps_stages: list = field(default_factory=list)
    barriers: tuple = (None, None)


def default_tau_min(b: float, l: float) -> float:
    """Inner end of the limit grid: tau^-a stays below about 1e10 (1e-8 for log type)."""
    a = b + (l - 1.0) / 2.0
    if a <= 1e-12:
        return 1e-8
    return max(1e-8, 10.0 ** (-10.0 / a))


def limit_grid(data: FoliatedData, tau_min: float | None = None, n: int = 2000) -> Grid:
    """Log-uniform grid on [tau_min, tau_max] for limit profiles."""
    from .grid import density_grid

    tau_min = default_tau_min(data.b, data.l) if tau_min is None else tau_min
    return density_grid(tau_min, data.tau_max, n, [0.0, 1.0], [0.0, 0.0])


def continuation_family1(data: FoliatedData, eps_schedule=None, delta_schedule=None, grid: Grid | None = None,
                         *, sigma0: float = 0.05, vartheta: float = 1.0, tau_min: float | None = None, n: int = 2000,
                         eps_stage: bool = True, ext_h_min: float = 1e-6) -> ContinuationResult:
    """Family-1 limit: epsilon -> 0 at each delta, then delta -> 0.

    For each delta the eps-regularized problem on the inward extension is
    continued down ``eps_schedule`` (trace, inner growth and monotonicity are
    recorded).  The epsilon -> 0 limit at that delta is the blow-up solution of
    the tilt equation with eta(0) = 0, computed on ``grid`` (tau > 0).  The
    delta -> 0 limit is the same equation with the unshifted warp.  The limit
    is checked against certified power (or log) barriers matched at the
    collar edge.
    """
    check_regime(data.b, data.l, 1)
    eps_schedule = geometric_schedule(1.0, 1e-6, 0.5) if eps_schedule is None else list(eps_schedule)
    delta_schedule = [1e-2, 1e-3, 1e-4, 1e-5] if delta_schedule is None else list(delta_schedule)
    if any(d <= 0 for d in delta_schedule):
        raise ValidationError("delta schedule must be positive")
    grid = limit_grid(data, tau_min, n) if grid is None else grid
    rep = SolveReport()
    seq, stages = [], []
    ext_grid = extended_grid(-sigma0, data.tau_max, n, h_min=ext_h_min) if eps_stage else None
    for delta in delta_schedule:
        if eps_stage:
            st = epsilon_stage(data, delta, eps_schedule, ext_grid, sigma0=sigma0, vartheta=vartheta)
            stages.append(st)
            rep.continuation_trace.extend([e, delta, s] for e, s in zip(st.eps, st.sup_psi))
        psi, _, _ = blowup_profile(data, delta, grid)
        params = OperatorParams(delta=delta)
        prof = JangProfile(grid, psi, params, classification=classify_limit(psi, grid.nodes), label=data.label)
        seq.append(prof)
        rep.continuation_trace.append([0.0, delta, float(np.max(np.abs(psi)))])
    psi, _, _ = blowup_profile(data, 0.0, grid)
    limit = JangProfile(grid, psi, OperatorParams(), classification=classify_limit(psi, grid.nodes),
                        label=data.label)
    limit.recompute_residual(data)
    rep.continuation_trace.append([0.0, 0.0, float(np.max(np.abs(psi)))])
    rep.classification = limit.classification
    rep.sup_psi = float(np.max(np.abs(psi)))
    rep.final_residual = limit.residual_norm
    rep.converged = all(s.completed for s in stages) if stages else True
    rep.message = "; ".join(f"delta={d:g}: {s.message}" for d, s in zip(delta_schedule, stages) if s.message) \
        or "limit computed"
    lower, upper = _family1_barriers(data, limit)
    enc = enclosure_check(limit, lower, upper)
    rep.enclosure = enc.to_dict()
    return ContinuationResult(limit, seq, rep, stages, (lower, upper))


def _family1_barriers(data: FoliatedData, prof: JangProfile):
    sub = _power_or_log(data, "sub")
    sup = _power_or_log(data, "super")
    tau0 = min(sub.tau0, sup.tau0)
    x = prof.grid.nodes
    j = int(np.searchsorted(x, tau0, side="right")) - 1
    t_m = float(x[j])
    v = float(prof.values[j])
    return _matched(sub, t_m, v), _matched(sup, t_m, v)


# ---------------------------------------------------------------------------
# family 2


def boundary_value_T(b: float, delta: float) -> float:
    """T_delta = delta^(1-2b) for b > 1/2 and -ln(delta) for b = 1/2."""
    if abs(b - 0.5) <= 1e-12:
        return float(-np.log(delta))
    if b < 0.5:
        raise RegimeError(f"family 2 needs b >= 1/2, got b = {b:g}")
    return float(delta ** (1.0 - 2.0 * b))


def chi_cutoff(T: float, tau0: float) -> Profile:
    """chi(tau) = T s(1 - tau/tau0) with the quintic smoothstep s (T at tau = 0, 0 beyond tau0)."""
    return Profile(lambda t: T * smoothstep(1.0 - np.asarray(t, float) / tau0),
                   lambda t: -T / tau0 * smoothstep_deriv(1.0 - np.asarray(t, float) / tau0))


def family2_grid(data: FoliatedData, n: int = 2000, h_min: float = 1e-9) -> Grid:
    return geometric_grid(0.0, data.tau_max, n, h_min=h_min)


def solve_family2_delta(data: FoliatedData, delta: float, grid: Grid, eps_schedule, init=None,
                        tau0: float | None = None, max_iter: int = 200):
    """Finite-boundary-value problem psi(0) = T_delta, psi(tau_max) = 0 for one delta.

    Runs the eps (psi - chi) source down ``eps_schedule`` (step refinement on
    failure) and then solves at eps = 0.  Returns (profile, report, trace).
    """
    T = boundary_value_T(data.b, delta)
    tau0 = data.collar if tau0 is None else tau0
    chi = chi_cutoff(T, tau0)
    if eps_schedule is None:
        eps_schedule = geometric_schedule(1.0, 1e-6, 0.5)
    trace = []
    prev = chi(grid.nodes) if init is None else init
    targets = list(eps_schedule) + [0.0]
    i = 0
    last_eps = None
    refinements = 0
    rep = None
    while i < len(targets):
        eps = targets[i]
        params = OperatorParams(epsilon=eps, delta=delta,
                                source_mode="eps_f_minus_chi" if eps > 0 else "none", chi=chi)
        prof, rep = solve_regularized(data, params, (T, 0.0), grid, init=prev, max_iter=max_iter)
        if not rep.converged:
            refinements += 1
            if last_eps is None or refinements > 12:
                rep.message = f"family-2 stage failed at eps={eps:g}: {rep.message}"
                return prof, rep, trace
            nxt = np.sqrt(last_eps * eps) if eps > 0 else last_eps * 0.5
            if nxt >= last_eps * 0.97:
                rep.message = f"step refinement exhausted at eps={eps:g}: {rep.message}"
                return prof, rep, trace
            targets.insert(i, nxt)
            continue
        trace.append([eps, delta, rep.sup_psi])
        prev, last_eps = prof, eps
        i += 1
    return prof, rep, trace


def continuation_family2(data: FoliatedData, delta_schedule=None, eps_schedule=None, grid: Grid | None = None,
                         *, n: int = 2000, h_min: float = 1e-8, max_iter: int = 200,
                         eps_stage: bool = True) -> ContinuationResult:
    """Family-2 limit: psi(0) = T_delta on the delta-regularized problem, delta -> 0.

    The first delta runs the eps (psi - chi) schedule down to eps = 0.  Each
    later delta is solved at eps = 0 warm-started from the previous delta's
    solution plus (T_new - T_old) exp(-tau/delta), with step refinement on
    failure.  When ``eps_stage`` is set the eps schedule is also run for every
    delta; if it reaches eps = 0 the max difference to the warm-started
    solution is recorded (``eps_path_diff``).  Each stage is checked against
    certified ODE barriers shifted by delta and ordered against psi at tau = 0
    and at the collar edge.  The limit is the smallest-delta profile.
    """
    check_regime(data.b, data.l, 2)
    delta_schedule = [1e-2, 1e-3, 1e-4, 1e-5, 1e-6] if delta_schedule is None else list(delta_schedule)
    if any(d <= 0 for d in delta_schedule) or any(d2 >= d1 for d1, d2 in zip(delta_schedule, delta_schedule[1:])):
        raise ValidationError("delta schedule must be positive and decreasing")
    eps_schedule = geometric_schedule(1.0, 1e-6, 0.5) if eps_schedule is None else list(eps_schedule)
    grid = family2_grid(data, n, h_min) if grid is None else grid
    x = grid.nodes
    sub = certify_barrier(data, "sub", family=2)
    sup = certify_barrier(data, "super", family=2)
    tau0 = min(sub.tau0, sup.tau0)
    j = int(np.searchsorted(x, tau0, side="right")) - 1
    rep = SolveReport()
    seq, encl, stages = [], [], []
    lower = upper = None
    prev, d_prev = None, None
    targets = list(delta_schedule)
    i = 0
    refinements = 0
    while i < len(targets):
        delta = targets[i]
        T = boundary_value_T(data.b, delta)
        stage = None
        if prev is None or eps_stage:
            sprof, srep, trace = solve_family2_delta(data, delta, grid, eps_schedule, max_iter=max_iter)
            rep.continuation_trace.extend(trace)
            stage = {"delta": delta, "completed": bool(srep.converged), "message": srep.message,
                     "eps_min": trace[-1][0] if trace else None}
        if prev is None:
            prof, r = sprof, srep
        else:
            T_old = boundary_value_T(data.b, d_prev)
            init = prev.values + (T - T_old) * np.exp(-x / delta)
            prof, r = solve_regularized(data, OperatorParams(delta=delta), (T, 0.0), grid, init=init,
                                        max_iter=max_iter)
            if not r.converged:
                refinements += 1
                if refinements > 12:
                    rep.message = f"delta={delta:g}: {r.message}"
                    rep.classification = "indeterminate"
                    return ContinuationResult(prof, seq, rep, stages, (lower, upper))
                targets.insert(i, float(np.sqrt(d_prev * delta)))
                continue
            rep.continuation_trace.append([0.0, delta, r.sup_psi])
            if stage is not None and stage["completed"]:
                stage["eps_path_diff"] = float(np.max(np.abs(sprof.values - prof.values)))
        rep.newton_iterations += r.newton_iterations
        rep.damping_events += r.damping_events
        if not r.converged:
            rep.message = f"delta={delta:g}: {r.message}"
            rep.classification = "indeterminate"
            return ContinuationResult(prof, seq, rep, stages, (lower, upper))
        if stage is not None:
            stages.append(stage)
        prof.classification = "bounded"
        seq.append(prof)
        lower = _ordered(sub, float(x[j]), float(prof.values[j]), float(prof.values[0]), delta, below=True)
        upper = _ordered(sup, float(x[j]), float(prof.values[j]), float(prof.values[0]), delta, below=False)
        encl.append(enclosure_check(prof, lower, upper))
        prev, d_prev = prof, delta
        i += 1
    limit = seq[-1]
    limit.recompute_residual(data)
    rep.converged = True
    rep.final_residual = limit.residual_norm
    rep.sup_psi = float(np.max(np.abs(limit.values)))
    growth = [s.values[0] for s in seq]
    grows = len(growth) > 1 and all(g2 >= 1.5 * g1 for g1, g2 in zip(growth, growth[1:]))
    inner = x >= 100.0 * targets[-1]
    shape = classify_limit(limit.values[inner], x[inner]) if inner.sum() > 10 else "indeterminate"
    rep.classification = "blowup_plus" if growth[-1] > 1e3 or grows or shape == "blowup_plus" else "indeterminate"
    limit.classification = rep.classification
    rep.enclosure = {"lower_ok": all(e.lower_ok for e in encl), "upper_ok": all(e.upper_ok for e in encl),
                     "worst_violation": max(e.worst_violation for e in encl),
                     "stages": [e.to_dict() for e in encl]}
    rep.message = "limit computed"
    return ContinuationResult(limit, seq, rep, stages, (lower, upper))


def shooting_family2(data: FoliatedData, delta: float, grid: Grid, rtol: float = 1e-11) -> np.ndarray:
    """Independent eps = 0 oracle: shoot on eta(0) in (0, 1) so that psi(tau_max) = 0 with psi(0) = T_delta."""
    T = boundary_value_T(data.b, delta)
    x = grid.nodes
    rhs = _eta_rhs(data, delta)

    def run(eta0):
        sol = solve_ivp(rhs, (x[0], x[-1]), [eta0], method="DOP853", rtol=rtol, atol=1e-14, dense_output=True)

        def dpsi(t):
            eta = np.clip(sol.sol(t)[0], 1e-300, 2.0)
            return (eta - 1.0) / (data.warp(t, delta)[0] * np.sqrt(eta * (2.0 - eta)))

        a, bb = x[:-1], x[1:]
        half = 0.5 * (bb - a)
        pts = a[:, None] + half[:, None] * (_GL_X + 1.0)
        cell = half * (dpsi(pts.ravel()).reshape(pts.shape) @ _GL_W)
        return T + np.concatenate([[0.0], np.cumsum(cell)])

    eta0 = brentq(lambda e: run(e)[-1], 1e-12, 1.0 - 1e-12, xtol=1e-15, rtol=1e-14)
    return run(eta0)
