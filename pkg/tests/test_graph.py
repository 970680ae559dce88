import numpy as np
import pytest

from jangbench.geometry import flat_data
from jangbench.graph import constraint_densities, graph_geometry, verify_scalar_curvature_identity


@pytest.fixture(params=["zero", "inv_r"])
def case(request, schw_inv_r, schw_zero):
    return schw_zero if request.param == "zero" else schw_inv_r


def test_schwarzschild_is_vacuum(case):
    cd = constraint_densities(case.data)
    tau = np.geomspace(1e-2, 50.0, 50)
    assert np.max(np.abs(cd.mu(tau))) <= 1e-6
    assert np.max(np.abs(cd.J_n(tau))) <= 1e-10


def test_identity_on_exact_solution(case, schw_grid):
    tau = schw_grid.nodes[1:-1]
    assert verify_scalar_curvature_identity(case.data, case.exact, tau) <= 1e-5


def test_identity_detects_non_solutions(schw_inv_r):
    # the identity uses the Jang equation; a perturbed graph must show a defect
    ex = schw_inv_r.exact
    tau = np.linspace(0.5, 20.0, 200)
    bumped = (lambda t: ex.psi(t) + 0.3 * np.sin(t), lambda t: ex.dpsi(t) + 0.3 * np.cos(t),
              lambda t: ex.ddpsi(t) - 0.3 * np.sin(t))
    assert verify_scalar_curvature_identity(schw_inv_r.data, ex, tau) <= 1e-5
    assert verify_scalar_curvature_identity(schw_inv_r.data, bumped, tau) > 1e-2


def test_flat_graph_of_constant_is_flat():
    d = flat_data()
    tau = np.linspace(0.1, 50.0, 100)
    z = lambda t: 0.0 * t
    g = graph_geometry(d, (z, z, z), tau)
    assert np.all(g.A_rr == 0) and np.all(g.A_sphere == 0) and np.all(g.q_1 == 0)
    assert np.allclose(g.tilt, -1.0)
    assert verify_scalar_curvature_identity(d, (z, z, z), tau) <= 1e-8
