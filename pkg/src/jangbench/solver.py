"""Damped Newton solver for the regularized radial Dirichlet problems."""
from __future__ import annotations

import dataclasses
from dataclasses import dataclass, field

import numpy as np
from scipy.interpolate import PchipInterpolator

from . import kernels
from ._kernels_py import fd_weights
from .errors import DegenerateError, ValidationError
from .geometry import FoliatedData
from .grid import Grid
from .operator import NodeData, OperatorParams, sample

CLASSIFICATIONS = ("bounded", "blowup_plus", "blowup_minus", "indeterminate", "overflow")
OVERFLOW = 1e12


def derivatives(x, psi):
    """Three-point first/second derivatives at every node (one-sided at the ends)."""
    x = np.asarray(x, float)
    psi = np.asarray(psi, float)
    d1 = np.empty_like(psi)
    d2 = np.empty_like(psi)
    (cm, c0, cp), (em, e0, ep) = fd_weights(x)
    d1[1:-1] = cm * psi[:-2] + c0 * psi[1:-1] + cp * psi[2:]
    d2[1:-1] = em * psi[:-2] + e0 * psi[1:-1] + ep * psi[2:]
    for end, idx in ((0, [0, 1, 2]), (-1, [-3, -2, -1])):
        xs, ys = x[idx], psi[idx]
        # derivative of the interpolating quadratic
        a = np.polyfit(xs - xs[0], ys, 2)
        xe = x[end] - xs[0]
        d1[end] = 2 * a[0] * xe + a[1]
        d2[end] = 2 * a[0]
    return d1, d2


@dataclass(eq=False)
class JangProfile:
    """Discrete graph function psi on a grid with its regularization parameters."""

    grid: Grid
    values: np.ndarray
    params: OperatorParams = field(default_factory=OperatorParams)
    classification: str = "indeterminate"
    residual_norm: float = float("nan")
    label: str = ""

    @property
    def tau(self) -> np.ndarray:
        return self.grid.nodes

    def derivatives(self):
        return derivatives(self.grid.nodes, self.values)

    def dpsi(self) -> np.ndarray:
        return self.derivatives()[0]

    def residuals(self, data: FoliatedData, bc=None) -> np.ndarray:
        """Discrete operator values at every node (boundary entries set to 0)."""
        if bc is None:
            bc = (self.values[0], self.values[-1])
        nd = _node_data(data, self.grid, self.params)
        res = kernels.assemble(*_kernel_args(self.grid, self.values, nd, bc))[0]
        res = np.array(res)
        res[0] = res[-1] = 0.0
        return res

    def recompute_residual(self, data: FoliatedData) -> float:
        self.residual_norm = float(np.max(np.abs(self.residuals(data)[1:-1])))
        return self.residual_norm

    def restrict(self, tau_lo: float) -> "JangProfile":
        """Profile on the nodes with tau >= tau_lo (at least 65 nodes kept)."""
        keep = self.grid.nodes >= tau_lo
        return dataclasses.replace(self, grid=Grid(self.grid.nodes[keep], self.grid.grading + "/restricted"),
                                   values=self.values[keep].copy())

    def interpolant(self):
        return PchipInterpolator(self.grid.nodes, self.values)


@dataclass
class SolveReport:
    converged: bool = False
    newton_iterations: int = 0
    damping_events: int = 0
    final_residual: float = float("nan")
    final_step: float = float("nan")
    scaled_residual: float = float("nan")
    sup_psi: float = float("nan")
    eps_sup_psi: float = float("nan")
    message: str = ""
    enclosure: dict | None = None
    continuation_trace: list = field(default_factory=list)
    classification: str = "indeterminate"
    backend: str = kernels.BACKEND

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)


def _node_data(data: FoliatedData, grid: Grid, params: OperatorParams) -> NodeData:
    nd = sample(data, grid.nodes, params, check=False)
    phi = nd.phi[1:-1]
    if np.any(~(phi > 0.0)):
        i = int(np.argmax(~(phi > 0.0))) + 1
        raise DegenerateError(f"warp phi_delta <= 0 at interior node tau = {grid.nodes[i]:g}")
    # boundary rows are identities; keep their (unused) data finite
    arrs = {}
    for name in ("phi", "dphi", "H", "theta_plus", "theta_minus", "trS_k", "k_nn", "chi"):
        a = np.array(getattr(nd, name), dtype=float)
        bad = ~np.isfinite(a)
        bad[1:-1] = False
        a[bad] = 0.0
        arrs[name] = np.ascontiguousarray(a)
    return dataclasses.replace(nd, **arrs)


def _kernel_args(grid, psi, nd: NodeData, bc):
    return (grid.nodes, np.ascontiguousarray(psi, dtype=float), nd.phi, nd.dphi, nd.H, nd.theta_plus,
            nd.theta_minus, nd.trS_k, nd.k_nn, float(nd.eps), nd.chi, float(bc[0]), float(bc[1]))


def _initial(grid: Grid, bc, init):
    x = grid.nodes
    if init is None or (isinstance(init, str) and init == "linear"):
        psi = bc[0] + (bc[1] - bc[0]) * (x - x[0]) / (x[-1] - x[0])
    elif isinstance(init, str) and init == "zero":
        psi = np.zeros_like(x)
    elif isinstance(init, JangProfile):
        if init.grid.nodes.shape == x.shape and np.array_equal(init.grid.nodes, x):
            psi = init.values.copy()
        else:
            psi = np.asarray(init.interpolant()(x), dtype=float)
    elif callable(init):
        psi = np.asarray(init(x), dtype=float)
    else:
        psi = np.array(init, dtype=float)
        if psi.shape != x.shape:
            raise ValidationError("initial values do not match the grid")
    # boundary rows are linear, so the first full Newton step imposes bc;
    # overwriting here would plant a jump next to the boundary
    return np.array(psi, dtype=float)


def solve_regularized(data: FoliatedData, params: OperatorParams, bc, grid: Grid, init=None, *,
                      tol: float = 1e-10, step_tol: float = 1e-9, max_iter: int = 50, max_halvings: int = 30,
                      nonmonotone: int = 5, backend: str | None = None):
    """Solve the Dirichlet problem R[psi] = 0, psi(tau_0) = bc[0], psi(tau_N) = bc[1].

    Success requires the diagonally scaled residual max |R_i / J_ii| and the
    last Newton update to be below tol * (1 + sup|psi|) and step_tol * (1 +
    sup|psi|).  The raw residual max |R_i| is reported as ``final_residual``;
    on strongly graded grids it has a rounding floor of order
    |psi| * 1e-16 * phi / h**2, so it is not used as the stopping test.  The
    scaled residual is also the merit for the backtracking search, which
    accepts a trial that improves on the largest of the last ``nonmonotone``
    merits (1 gives the classical monotone Armijo test).
    """
    kern = kernels.get_backend(backend)
    bc = (float(bc[0]), float(bc[1]))
    if not (np.isfinite(bc[0]) and np.isfinite(bc[1])):
        raise ValidationError("boundary values must be finite")
    if grid.nodes[0] < data.tau_in - 1e-12 or grid.nodes[-1] > data.tau_max + 1e-9 * max(1.0, data.tau_max):
        raise ValidationError("grid extends outside the data domain")
    nd = _node_data(data, grid, params)
    psi = _initial(grid, bc, init)
    report = SolveReport(backend="cython" if kern.__name__.endswith("._kernels") else "python")

    def evaluate(p):
        res, lo, di, up = kern.assemble(*_kernel_args(grid, p, nd, bc))
        return np.asarray(res), np.asarray(lo), np.asarray(di), np.asarray(up)

    res, lo, di, up = evaluate(psi)
    scale = np.abs(di)
    merit = float(np.max(np.abs(res) / scale))
    step = np.inf
    history = [merit]
    for it in range(max_iter + 1):
        sup = float(np.max(np.abs(psi)))
        if not np.isfinite(merit):
            report.message = "non-finite residual"
            break
        if merit <= tol * (1.0 + sup) and step <= step_tol * (1.0 + sup):
            report.converged = True
            break
        if it == max_iter:
            report.message = f"no convergence after {max_iter} Newton iterations (scaled residual {merit:.3g})"
            break
        delta = np.asarray(kern.thomas(lo, di, up, -res))
        if not np.all(np.isfinite(delta)):
            report.message = "singular Jacobian"
            break
        lam = 1.0
        accepted = False
        ref = max(history[-nonmonotone:])
        for k in range(max_halvings + 1):
            trial = psi + lam * delta
            tr = evaluate(trial)
            m_trial = float(np.max(np.abs(tr[0]) / scale))
            if np.isfinite(m_trial) and (m_trial <= (1.0 - 1e-4 * lam) * ref
                                         or m_trial <= tol * (1.0 + sup)):
                accepted = True
                break
            lam *= 0.5
            report.damping_events += 1
        if not accepted:
            if np.isfinite(m_trial) and m_trial <= merit:
                accepted = True
            else:
                report.message = "line search failed"
                report.newton_iterations = it + 1
                break
        step = float(np.max(np.abs(lam * delta)))
        psi = trial
        res, lo, di, up = tr
        scale = np.abs(di)
        merit = float(np.max(np.abs(res) / scale))
        history.append(merit)
        report.newton_iterations = it + 1
        if np.max(np.abs(psi)) > OVERFLOW:
            report.message = "overflow: |psi| exceeded 1e12"
            report.classification = "overflow"
            break

    report.scaled_residual = merit
    report.final_residual = float(np.max(np.abs(res[1:-1])))
    report.final_step = step
    report.sup_psi = float(np.max(np.abs(psi)))
    report.eps_sup_psi = params.epsilon * report.sup_psi
    if report.converged and report.classification != "overflow":
        report.classification = "bounded"
        report.message = report.message or "converged"
    prof = JangProfile(grid, psi, params, classification=report.classification,
                       residual_norm=report.final_residual, label=data.label)
    return prof, report
