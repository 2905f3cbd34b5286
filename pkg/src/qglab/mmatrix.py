"""Weyl M-matrices (vertex Dirichlet-to-Neumann maps) of the fiber operators.

For a fiber parameter (eps, tau, z) the operator acts edgewise as
-(c_e)^2 (d/dx + i tau)^2 with c_e = a_e/eps on stiff edges and c_e = a_e on
soft edges.  The M-matrix maps the common weighted vertex values to the sums
of weighted co-derivatives; its entries are built from cot/csc of the
arguments k l_e / c_e with k = sqrt(z), Im k >= 0.

Two independent code paths are provided: ``m_general`` (the generic N x N
formula, any loop-free graph) and ``m_blocks_closed`` (the literal 2 x 2
stiff/soft block formulas of the three examples).  ``check_additivity``
verifies that the blocks sum to the full matrix.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .graphs import EdgeSpec, MetricGraph

POLE_GUARD = 1e-8


class PoleError(ArithmeticError):
    """A trigonometric argument is too close to a pole of cot/csc."""


@dataclass(frozen=True)
class FiberParams:
    """Fiber parameters: contrast eps, quasimomentum tau, spectral point z."""

    eps: float
    tau: float
    z: complex

    def __post_init__(self):
        if self.eps <= 0:
            raise ValueError("eps must be positive")

    @property
    def k(self) -> complex:
        """sqrt(z) on the branch with Im k >= 0 (k = +sqrt(z) for z > 0)."""
        k = cmath.sqrt(self.z)
        if k.imag < 0:
            k = -k
        return k

    def speed(self, edge: EdgeSpec) -> float:
        """Rescaled propagation speed c_e: a_e/eps (stiff) or a_e (soft)."""
        return edge.speed_a / self.eps if edge.is_stiff else edge.speed_a


def guard_pole(x: complex, guard: float = POLE_GUARD) -> complex:
    """Raise PoleError when x is within ``guard`` of a pole of cot/csc."""
    nearest = math.pi * round(x.real / math.pi)
    if abs(x - nearest) < guard:
        raise PoleError(f"trig argument {x} within {guard} of {nearest}")
    return x


def ccot(x: complex) -> complex:
    """cot(x) for complex x, overflow-safe for large |Im x|."""
    guard_pole(x)
    if x.imag > 50.0:
        q = cmath.exp(2j * x)  # |q| << 1
        return 1j * (q + 1.0) / (q - 1.0)
    if x.imag < -50.0:
        q = cmath.exp(-2j * x)
        return 1j * (1.0 + q) / (1.0 - q)
    return cmath.cos(x) / cmath.sin(x)


def ccsc(x: complex) -> complex:
    """csc(x) = 1/sin(x) for complex x, overflow-safe for large |Im x|."""
    guard_pole(x)
    if x.imag > 50.0:
        return 2j * cmath.exp(1j * x) / (cmath.exp(2j * x) - 1.0)
    if x.imag < -50.0:
        return 2j * cmath.exp(-1j * x) / (1.0 - cmath.exp(-2j * x))
    return 1.0 / cmath.sin(x)


def m_general(
    graph: MetricGraph,
    weights: dict[tuple[int, int], complex],
    fiber: FiberParams,
) -> np.ndarray:
    """The N x N M-matrix from the generic vertex formula.

    Diagonal (j, j): -k * sum over incident edges of c_e cot(k l_e / c_e).
    Off-diagonal (j, m): sum over shared edges of
        conj(w_{Vm}(e)) w_{Vj}(e) e^{i sgn_m(e) l_e tau} k c_e csc(k l_e/c_e),
    where sgn_m(e) is -1 when V_m sits at coordinate 0 of e and +1 when it
    sits at coordinate l_e.  Entries are 0 for vertex pairs sharing no edge.
    """
    verts = list(graph.vertices)
    idx = {v: i for i, v in enumerate(verts)}
    n = len(verts)
    k = fiber.k
    m = np.zeros((n, n), dtype=complex)
    for e in graph.edges:
        c = fiber.speed(e)
        arg = k * e.length / c
        cot = ccot(arg)
        csc = ccsc(arg)
        jl, jr = idx[e.left], idx[e.right]
        m[jl, jl] += -k * c * cot
        m[jr, jr] += -k * c * cot
        for vj, vm, sgn_m in ((e.left, e.right, +1), (e.right, e.left, -1)):
            j, mm = idx[vj], idx[vm]
            wj = weights[(vj, e.id)]
            wm = weights[(vm, e.id)]
            m[j, mm] += (
                np.conj(wm)
                * wj
                * cmath.exp(1j * sgn_m * e.length * fiber.tau)
                * k
                * c
                * csc
            )
    return m


@dataclass(frozen=True)
class MMatrixSet:
    """Full M-matrix and its stiff/soft blocks for one fiber point."""

    m_full: np.ndarray
    m_stiff: np.ndarray
    m_soft: np.ndarray
    fiber: FiberParams

    def symmetry_defect(self, other: "MMatrixSet") -> float:
        """max entrywise |M(conj z) - M(z)^*| over the three blocks.

        ``other`` must be the set evaluated at the conjugate spectral point.
        """
        return max(
            float(np.max(np.abs(a_conj - a.conj().T)))
            for a, a_conj in (
                (self.m_full, other.m_full),
                (self.m_stiff, other.m_stiff),
                (self.m_soft, other.m_soft),
            )
        )


def _stiff_block_ex0(l1, a1, tau, fiber):
    k, eps = fiber.k, fiber.eps
    x1 = k * eps * l1 / a1
    cot, csc = ccot(x1), ccsc(x1)
    ph = cmath.exp(1j * l1 * tau)
    return (k / eps) * np.array(
        [[-a1 * cot, a1 * csc / ph], [a1 * csc * ph, -a1 * cot]]
    )


def _soft_block_single(l2, a2, tau, fiber):
    k = fiber.k
    y = k * l2 / a2
    cot, csc = ccot(y), ccsc(y)
    ph = cmath.exp(1j * l2 * tau)
    return k * np.array(
        [[-a2 * cot, a2 * csc * ph], [a2 * csc / ph, -a2 * cot]]
    )


def m_blocks_closed(graph: MetricGraph, fiber: FiberParams) -> MMatrixSet:
    """Literal closed-form stiff/soft M-matrix blocks of the three examples.

    The vertex ordering is (V1, V2).  The full matrix is the blockwise sum.
    """
    if graph.example not in ("ex0", "ex1", "ex2"):
        raise ValueError("closed-form blocks exist for the three examples only")
    p = graph.params
    k, eps, tau = fiber.k, fiber.eps, fiber.tau
    if graph.example == "ex0":
        m_stiff = _stiff_block_ex0(p["l1"], p["a1"], tau, fiber)
        m_soft = _soft_block_single(p["l2"], p["a2"], tau, fiber)
    elif graph.example == "ex1":
        l1, l2, l3 = p["l1"], p["l2"], p["l3"]
        a1, a3 = p["a1"], p["a3"]
        x1 = k * eps * l1 / a1
        x3 = k * eps * l3 / a3
        cot1, csc1 = ccot(x1), ccsc(x1)
        cot3, csc3 = ccot(x3), ccsc(x3)
        off = a1 * cmath.exp(-1j * (l1 + l3) * tau) * csc1 + a3 * cmath.exp(
            1j * l2 * tau
        ) * csc3
        off_c = a1 * cmath.exp(1j * (l1 + l3) * tau) * csc1 + a3 * cmath.exp(
            -1j * l2 * tau
        ) * csc3
        diag = -a1 * cot1 - a3 * cot3
        m_stiff = (k / eps) * np.array([[diag, off], [off_c, diag]])
        m_soft = _soft_block_single(l2, p["a2"], tau, fiber)
    else:  # ex2
        l1, l2, l3 = p["l1"], p["l2"], p["l3"]
        a1, a2, a3 = p["a1"], p["a2"], p["a3"]
        x3 = k * eps * l3 / a3
        cot3, csc3 = ccot(x3), ccsc(x3)
        m_stiff = (k / eps) * np.array(
            [
                [-a3 * cot3, a3 * cmath.exp(1j * l2 * tau) * csc3],
                [a3 * cmath.exp(-1j * l2 * tau) * csc3, -a3 * cot3],
            ]
        )
        y1 = k * l1 / a1
        y2 = k * l2 / a2
        cot1, csc1 = ccot(y1), ccsc(y1)
        cot2, csc2 = ccot(y2), ccsc(y2)
        off = a1 * cmath.exp(-1j * (l1 + l3) * tau) * csc1 + a2 * cmath.exp(
            1j * l2 * tau
        ) * csc2
        off_c = a1 * cmath.exp(1j * (l1 + l3) * tau) * csc1 + a2 * cmath.exp(
            -1j * l2 * tau
        ) * csc2
        diag = -a1 * cot1 - a2 * cot2
        m_soft = k * np.array([[diag, off], [off_c, diag]])
    return MMatrixSet(
        m_full=m_stiff + m_soft, m_stiff=m_stiff, m_soft=m_soft, fiber=fiber
    )


def check_additivity(mset: MMatrixSet) -> float:
    """max relative entrywise |m_full - m_stiff - m_soft| / (1 + |m_full|)."""
    num = np.abs(mset.m_full - mset.m_stiff - mset.m_soft)
    return float(np.max(num / (1.0 + np.abs(mset.m_full))))


def herglotz_min_eig(m: np.ndarray) -> float:
    """Smallest eigenvalue of the imaginary part (M - M^*)/(2i)."""
    im_part = (m - m.conj().T) / 2j
    return float(np.min(np.linalg.eigvalsh(im_part)))
