import numpy as np
import pytest
from scipy.linalg import solve_banded

from jangbench import _kernels_py, kernels
from jangbench.operator import OperatorParams
from jangbench.solver import _kernel_args, _node_data
from jangbench.grid import geometric_grid

RNG = np.random.default_rng(7)


def _args(data, eps=0.2, delta=1e-2):
    grid = geometric_grid(0.0, 3.0, 500, h_min=1e-5)
    params = OperatorParams(epsilon=eps, delta=delta, source_mode="eps_f")
    nd = _node_data(data, grid, params)
    psi = 50.0 * np.exp(-grid.nodes / 0.05) + RNG.normal(0, 1e-3, grid.nodes.size)
    return _kernel_args(grid, psi, nd, (psi[0] + 1.0, 0.0))


def test_fd_weights_exact_for_quadratics():
    x = np.sort(RNG.uniform(0, 1, 40))
    (cm, c0, cp), (em, e0, ep) = _kernels_py.fd_weights(x)
    q = 3 * x ** 2 - 2 * x + 1
    d1 = cm * q[:-2] + c0 * q[1:-1] + cp * q[2:]
    d2 = em * q[:-2] + e0 * q[1:-1] + ep * q[2:]
    assert np.allclose(d1, 6 * x[1:-1] - 2, atol=1e-9)
    assert np.allclose(d2, 6.0, atol=1e-6)


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")
def test_backends_agree(syn13):
    args = _args(syn13)
    py = [np.asarray(a) for a in kernels.get_backend("python").assemble(*args)]
    cy = [np.asarray(a) for a in kernels.get_backend("cython").assemble(*args)]
    for a, b in zip(py, cy):
        assert np.allclose(a, b, rtol=1e-13, atol=1e-13 * np.max(np.abs(a)))
    lo, di, up = py[1], py[2], py[3]
    rhs = RNG.normal(size=di.size)
    xp = np.asarray(kernels.get_backend("python").thomas(lo, di, up, rhs))
    xc = np.asarray(kernels.get_backend("cython").thomas(lo, di, up, rhs))
    assert np.allclose(xp, xc, rtol=1e-10, atol=1e-12)


def test_boundary_rows_are_identities(syn13):
    args = _args(syn13)
    res, lo, di, up = (np.asarray(a) for a in kernels.assemble(*args))
    assert di[0] == 1.0 and up[0] == 0.0 and di[-1] == 1.0 and lo[-1] == 0.0
    psi = args[1]
    assert res[0] == pytest.approx(psi[0] - args[-2])


def test_thomas_matches_banded_solver():
    n = 200
    lo = RNG.uniform(0.1, 1, n)
    up = RNG.uniform(0.1, 1, n)
    di = -(lo + up) - RNG.uniform(0.5, 1, n)
    rhs = RNG.normal(size=n)
    ab = np.zeros((3, n))
    ab[0, 1:] = up[:-1]
    ab[1] = di
    ab[2, :-1] = lo[1:]
    ref = solve_banded((1, 1), ab, rhs)
    got = np.asarray(kernels.thomas(lo, di, up, rhs))
    assert np.allclose(got, ref, rtol=1e-10, atol=1e-12)
