"""Acceptance criteria 1 to 9; each test prints one PASS/FAIL line."""
import shutil
import time
from pathlib import Path

import numpy as np
import pytest

from jangbench.asymptotics import BlowupFit, classify_rate, fit_blowup_exponent, profile_decay_exponent
from jangbench.barriers import build_power_barrier, certify_barrier, verify_barrier
from jangbench.cli import main
from jangbench.continuation import continuation_family1, continuation_family2, enclosure_check
from jangbench.errors import RegimeError
from jangbench.geometry import synthetic_data
from jangbench.graph import verify_scalar_curvature_identity
from jangbench.operator import OperatorParams, jang_linearization, jang_residual
from jangbench.schwarzschild import schwarzschild_data, schwarzschild_grid
from jangbench.solver import solve_regularized

CONFIGS = Path(__file__).resolve().parent.parent / "configs"


@pytest.fixture(scope="module")
def family1_b1():
    t = time.perf_counter()
    res = continuation_family1(synthetic_data(1.0, 3.0, 1.0))
    return res, time.perf_counter() - t


def _recovery(case, n):
    grid = schwarzschild_grid(case, n)
    ex = case.exact.psi(grid.nodes)
    prof, rep = solve_regularized(case.data, OperatorParams(), (ex[0], ex[-1]), grid, init="zero")
    return prof, rep, float(np.max(np.abs(prof.values - ex)))


def test_criterion_1_manufactured_schwarzschild(criterion):
    with criterion(1, "manufactured Schwarzschild solution") as c:
        t = time.perf_counter()
        case = schwarzschild_data(1.0, "inv_r", r_in=2.0001, r_out=100.0)
        grid = schwarzschild_grid(case, 2000)
        x = grid.nodes
        res = float(np.max(np.abs(jang_residual(case.data, x, *case.exact.values(x)))))
        _, rep, err = _recovery(case, 2000)
        dt = time.perf_counter() - t
        c.detail = f"residual {res:.2e}, recovery error {err:.3e}, {dt:.1f} s"
        assert res <= 1e-8
        assert rep.converged and err <= 1e-6
        assert dt < 10.0


def test_criterion_2_family1_rate(criterion, family1_b1):
    with criterion(2, "family-1 blow-up rate b=1, l=3") as c:
        res, dt = family1_b1
        fit = fit_blowup_exponent(res.limit)
        lower, upper = res.barriers
        data = synthetic_data(1.0, 3.0, 1.0)
        # the matched barriers are certified on the collar (beta does not enter at eps = 0)
        lo_rep = verify_barrier(lower, data)
        up_rep = verify_barrier(upper, data)
        enc = enclosure_check(res.limit, lower, upper)
        nodes = res.limit.grid.nodes
        in_collar = int(np.sum((nodes > 0) & (nodes <= lower.valid_range[1])))
        stages = ", ".join(f"{'done' if s.completed else 'stalled'}@{s.eps[-1]:.1e}" for s in res.eps_stages)
        c.detail = (f"a_hat {fit.a_hat:.4f}, enclosed at {enc.n_checked}/{in_collar} collar nodes, "
                    f"{dt:.1f} s; eps stages per delta: {stages}")
        assert 1.9 <= fit.a_hat <= 2.1 and fit.kind == "power"
        assert lo_rep.ok and up_rep.ok
        assert enc.both_ok and enc.n_checked == in_collar
        assert dt < 120.0


def test_criterion_3_log_rate(criterion):
    with criterion(3, "log rate at b=-(l-1)/2, b=0, l=1") as c:
        t = time.perf_counter()
        res = continuation_family1(synthetic_data(0.0, 1.0, 1.0))
        fit = fit_blowup_exponent(res.limit)
        dt = time.perf_counter() - t
        c.detail = f"kind {fit.kind}, alpha {fit.alpha_hat:.4f}, ratio spread {fit.log_ratio_spread:.2%}, {dt:.1f} s"
        assert fit.kind == "log"
        assert fit.log_ratio_spread <= 0.05
        assert res.report.enclosure["lower_ok"] and res.report.enclosure["upper_ok"]
        assert dt < 120.0


def test_criterion_4_two_families(criterion):
    with criterion(4, "two blow-up rates from identical data b=0.75, l=3") as c:
        t = time.perf_counter()
        data = synthetic_data(0.75, 3.0, 1.0)
        f1 = fit_blowup_exponent(continuation_family1(data).limit)
        r2 = continuation_family2(data)
        f2 = fit_blowup_exponent(r2.limit)
        dt = time.perf_counter() - t
        c.detail = f"family 1 a_hat {f1.a_hat:.4f}, family 2 a_hat {f2.a_hat:.4f}, {dt:.1f} s"
        assert 1.65 <= f1.a_hat <= 1.85
        assert 0.4 <= f2.a_hat <= 0.6
        assert r2.sequence[-1].values[0] == pytest.approx(1e-6 ** -0.5)
        assert r2.report.enclosure["lower_ok"] and r2.report.enclosure["upper_ok"]
        assert dt < 240.0


def test_criterion_5_sticking(criterion):
    with criterion(5, "sticking regime on Schwarzschild data") as c:
        t = time.perf_counter()
        case = schwarzschild_data(1.0, "inv_r")
        prof, rep, _ = _recovery(case, 2000)
        verdict = classify_rate(BlowupFit(prof.classification), case.data.b, case.data.l)
        with pytest.raises(RegimeError):
            build_power_barrier(case.data.b, case.data.l, "sub", 1.0)
        dt = time.perf_counter() - t
        c.detail = f"classification {prof.classification}, verdict {verdict}, {dt:.1f} s"
        assert rep.converged and prof.classification == "bounded"
        assert verdict == "sticking"
        assert dt < 30.0


def test_criterion_6_barrier_certificates(criterion):
    with criterion(6, "barrier certificates for four rate pairs") as c:
        done = []
        for b, l in [(1.0, 3.0), (0.0, 1.0), (0.75, 3.0), (0.5, 2.0)]:
            data = synthetic_data(b, l, 1.0)
            fams = (1, 2) if b >= 0.5 else (1,)
            for fam in fams:
                for role in ("sub", "super"):
                    cert = certify_barrier(data, role, family=fam)
                    rep = cert.report
                    t = rep.tau
                    assert rep.n_points == 10_000 and rep.violations == 0
                    if role == "super":
                        assert np.all(rep.residual <= -0.5 / data.c_rate * t ** l)
                    elif fam == 1:
                        assert np.all(rep.residual >= rep.margin_lambda * t ** l)
                    else:
                        assert np.all(rep.residual >= rep.margin_lambda * t ** min(l, 2 * b))
                    done.append(f"{b:g}/{l:g}/f{fam}/{role}")
        c.detail = f"{len(done)} barriers, 0 violations"


def test_criterion_7_curvature_identity(criterion):
    with criterion(7, "scalar-curvature identity on Schwarzschild") as c:
        defects = []
        for f in ("zero", "inv_r"):
            case = schwarzschild_data(1.0, f)
            nodes = schwarzschild_grid(case, 2000).nodes[1:-1]
            defects.append(verify_scalar_curvature_identity(case.data, case.exact, nodes))
        c.detail = f"defects {defects[0]:.2e} (f=0), {defects[1]:.2e} (f=1/r)"
        assert max(defects) <= 1e-5


def _tree(d):
    return {p.relative_to(d).as_posix(): p.read_bytes() for p in sorted(d.rglob("*")) if p.is_file()}


def test_criterion_8_numerics_hygiene(criterion, tmp_path, monkeypatch):
    with criterion(8, "numerics hygiene") as c:
        rng = np.random.default_rng(8)
        data = synthetic_data(1.0, 3.0, 1.0)
        n = 1000
        tau = rng.uniform(1e-3, 2.0, n)
        state = [rng.normal(0, 5, n), rng.uniform(-50, 50, n), rng.normal(0, 50, n)]
        params = OperatorParams(epsilon=0.3, delta=1e-2, source_mode="eps_f")
        ana = jang_linearization(data, tau, *state, params)
        worst = 0.0
        for k in range(3):
            h = 1e-6 * np.maximum(1.0, np.abs(state[k]))
            up, dn = list(state), list(state)
            up[k], dn[k] = state[k] + h, state[k] - h
            fd = (jang_residual(data, tau, *up, params) - jang_residual(data, tau, *dn, params)) / (2 * h)
            scale = np.maximum(np.abs(ana[k]), 1e-6 * np.max(np.abs(ana[k])))
            worst = max(worst, float(np.max(np.abs(fd - ana[k]) / scale)))
        assert worst < 1e-5

        case = schwarzschild_data(1.0, "inv_r")
        errs = [_recovery(case, m)[2] for m in (1000, 2000, 4000)]
        orders = np.log2(np.array(errs[:-1]) / np.array(errs[1:]))
        assert np.all((orders >= 1.7) & (orders <= 2.3))

        neg = data.with_k_negated()
        sym = max(float(np.max(np.abs(jang_residual(neg, tau, *[-s for s in state], p)
                                      + jang_residual(data, tau, *state, p))))
                  for p in (OperatorParams(), params))
        assert sym <= 1e-12

        monkeypatch.setenv("JANGBENCH_WORKERS", "2")
        trees = []
        for run in ("a", "b"):
            root = tmp_path / run
            shutil.copytree(CONFIGS, root / "configs")
            for cfg in sorted((root / "configs").glob("*.ini")):
                assert main([cfg.stem if cfg.stem in ("barrier", "schwarzschild", "sweep") else
                             "solve" if cfg.stem == "sticking" else "continue", str(cfg)]) == 0
            trees.append(_tree(root / "out"))
        identical = trees[0] == trees[1]
        c.detail = (f"linearization rel {worst:.1e}, orders {', '.join(f'{o:.3f}' for o in orders)}, "
                    f"odd symmetry {sym:.1e}, reruns of {len(list(CONFIGS.glob('*.ini')))} configs "
                    f"{'byte-identical' if identical else 'DIFFER'} ({len(trees[0])} files)")
        assert identical and len(trees[0]) > 10


def test_criterion_9_outer_decay(criterion, family1_b1):
    with criterion(9, "outer decay of the family-1 limit") as c:
        res, _ = family1_b1
        data = synthetic_data(1.0, 3.0, 1.0)
        slope = profile_decay_exponent(res.limit, data)
        c.detail = f"slope {slope:.4f} on [r_max/100, r_max/10], r_max {data.meta.get('r_max', 'default')}"
        assert -0.65 <= slope <= -0.35
