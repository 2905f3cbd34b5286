
import numpy as np
import pytest

from qglab.fdsolver import DiscretizedOperator
from qglab.graphs import build_example, datta_weights
from qglab.krein import ComponentFrame, ResolventWorkspace, make_grid
from qglab.mmatrix import FiberParams


def _op(name="ex0", eps=0.3, tau=1.0, z=2 + 1j, res=256):
    g = build_example(name)
    w = datta_weights(g, tau)
    return g, DiscretizedOperator(g, w, FiberParams(eps, tau, z), resolution=res)


def test_resolution_floor():
    g = build_example("ex0")
    with pytest.raises(ValueError):
        DiscretizedOperator(g, datta_weights(g, 0.0), FiberParams(0.3, 0.0, 1.0), 8)


def test_assembled_form_is_symmetric():
    for name in ("ex0", "ex1", "ex2"):
        _, op = _op(name, tau=0.9, res=64)
        assert op.symmetry_defect(n_pairs=8, seed=1) < 1e-10


def test_vertex_flux_residual_small_after_solve():
    g, op = _op("ex1", tau=0.7, res=512)
    z = 2 + 1j
    f = np.cos(2.0 * op.grid.x) + 0.4j
    rhs = op.prolong.conj().T @ (op.grid.w * f)
    u_dofs = op._solve(z, rhs)
    assert op.vertex_flux_residual(u_dofs, f, z) < 1e-10


def test_matches_krein_resolvent():
    for name in ("ex0", "ex1", "ex2"):
        g = build_example(name)
        tau, z = 0.8, 2 + 1j
        w = datta_weights(g, tau)
        fiber = FiberParams(0.3, tau, z)
        res = 512
        op = DiscretizedOperator(g, w, fiber, resolution=res)
        ws = ResolventWorkspace(ComponentFrame(g, w, fiber), grid=make_grid(g, res))
        r_fd = op.resolvent_matrix(z)
        r_ex = ws.krein_matrix(z)
        err = np.linalg.norm(r_fd - r_ex, 2)
        h = 1.0 / res
        assert err < 5.0 * h * h * np.linalg.norm(r_ex, 2)


def test_resolvent_halving_is_second_order():
    errs = []
    for res in (128, 256, 512):
        g = build_example("ex0")
        w = datta_weights(g, 1.0)
        fiber = FiberParams(0.3, 1.0, 2 + 1j)
        op = DiscretizedOperator(g, w, fiber, resolution=res)
        ws = ResolventWorkspace(ComponentFrame(g, w, fiber), grid=make_grid(g, res))
        errs.append(np.linalg.norm(op.resolvent_matrix(2 + 1j) - ws.krein_matrix(2 + 1j), 2))
    assert 3.0 < errs[0] / errs[1] < 5.0
    assert 3.0 < errs[1] / errs[2] < 5.0


def test_lowest_eigenvalue_at_tau_zero():
    # at tau = 0 the constant function satisfies the matching conditions,
    # so zero is an eigenvalue of the fiber operator
    _, op = _op("ex0", eps=0.25, tau=0.0, res=256)
    evs = op.eigenvalues(3)
    assert abs(evs[0]) < 1e-8
    assert evs[1] > 1.0


def test_eigenvalues_increase_and_match_refinement():
    _, op1 = _op("ex2", eps=0.2, tau=1.0, res=256)
    _, op2 = _op("ex2", eps=0.2, tau=1.0, res=512)
    e1, e2 = op1.eigenvalues(4), op2.eigenvalues(4)
    assert np.all(np.diff(e1) > 0)
    assert np.max(np.abs(e1 - e2)) < 1e-2 * (1 + np.max(np.abs(e2)))
