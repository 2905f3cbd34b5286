import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from qglab.graphs import build_example, datta_weights
from qglab.mmatrix import (
    FiberParams,
    PoleError,
    ccot,
    ccsc,
    check_additivity,
    guard_pole,
    herglotz_min_eig,
    m_blocks_closed,
    m_general,
)


def test_fiber_k_branch():
    assert FiberParams(0.1, 0.0, 4.0).k == pytest.approx(2.0)
    k = FiberParams(0.1, 0.0, -4.0).k
    assert k.imag > 0
    k = FiberParams(0.1, 0.0, 2 + 1j).k
    assert k.imag >= 0


def test_fiber_rejects_bad_eps():
    with pytest.raises(ValueError):
        FiberParams(0.0, 0.0, 1.0)


def test_speed_contrast():
    g = build_example("ex0")
    f = FiberParams(0.1, 0.0, 1.0)
    assert f.speed(g.edge(1)) == pytest.approx(10.0)  # stiff: a1/eps
    assert f.speed(g.edge(2)) == pytest.approx(1.0)  # soft: a2


def test_trig_guard():
    with pytest.raises(PoleError):
        guard_pole(math.pi + 1e-10)
    with pytest.raises(PoleError):
        ccot(2 * math.pi + 1e-9 + 0j)


def test_trig_overflow_safe():
    # large |Im| arguments approach -+i without overflow
    assert ccot(1.0 + 100j) == pytest.approx(-1j)
    assert ccot(1.0 - 100j) == pytest.approx(1j)
    assert abs(ccsc(1.0 + 200j)) < 1e-10


def test_m_matrix_oracle_point():
    # ex0, eps = 0.1, z = 1 (k = 1): stiff argument 0.05, soft argument 0.5
    g = build_example("ex0")
    fiber = FiberParams(0.1, 0.0, 1.0)
    m = m_blocks_closed(g, fiber).m_full
    m11 = -10.0 / math.tan(0.05) - 1.0 / math.tan(0.5)
    m12 = 10.0 / math.sin(0.05) + 1.0 / math.sin(0.5)
    assert m[0, 0] == pytest.approx(m11, rel=1e-13)
    assert m[0, 1] == pytest.approx(m12, rel=1e-13)
    assert m11 == pytest.approx(-201.66379327065258)
    assert m12 == pytest.approx(202.1691872882311)


@settings(max_examples=30, deadline=None)
@given(
    name=st.sampled_from(["ex0", "ex1", "ex2"]),
    tau=st.floats(-3.1, 3.1),
    eps=st.sampled_from([0.5, 0.2, 0.1, 0.05]),
    re=st.floats(0.5, 20.0),
    im=st.floats(0.2, 3.0),
)
def test_closed_blocks_match_general(name, tau, eps, re, im):
    g = build_example(name)
    fiber = FiberParams(eps, tau, complex(re, im))
    mset = m_blocks_closed(g, fiber)
    m = m_general(g, datta_weights(g, tau), fiber)
    assert np.max(np.abs(m - mset.m_full)) / (1 + np.max(np.abs(m))) < 1e-12


@settings(max_examples=30, deadline=None)
@given(
    name=st.sampled_from(["ex0", "ex1", "ex2"]),
    tau=st.floats(-3.1, 3.1),
    re=st.floats(0.5, 20.0),
    im=st.floats(0.2, 3.0),
)
def test_additivity_and_symmetry(name, tau, re, im):
    g = build_example(name)
    z = complex(re, im)
    mset = m_blocks_closed(g, FiberParams(0.1, tau, z))
    assert check_additivity(mset) < 1e-11
    conj_set = m_blocks_closed(g, FiberParams(0.1, tau, np.conj(z)))
    assert mset.symmetry_defect(conj_set) < 1e-11


def test_herglotz_positivity():
    for name in ("ex0", "ex1", "ex2"):
        g = build_example(name)
        for z in (2 + 1j, 5 + 2j, 10 + 0.7j):
            m = m_blocks_closed(g, FiberParams(0.1, 0.8, z)).m_full
            assert herglotz_min_eig(m) > -1e-10


def test_nonuniform_speeds_ex2():
    g = build_example("ex2", a1=1.2, a2=0.8)
    fiber = FiberParams(0.2, 1.1, 3 + 0.5j)
    mset = m_blocks_closed(g, fiber)
    m = m_general(g, datta_weights(g, 1.1), fiber)
    assert np.max(np.abs(m - mset.m_full)) < 1e-12


def test_pole_raises_in_blocks():
    g = build_example("ex0")
    # soft argument k*l2 = pi exactly: z = (pi/0.5)^2 with k real
    z = (math.pi / 0.5) ** 2
    with pytest.raises(PoleError):
        m_blocks_closed(g, FiberParams(0.1, 0.0, z))
