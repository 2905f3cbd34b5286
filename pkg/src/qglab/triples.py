"""Boundary-triple asymptotics: rotated triples, the projection transform,
delta(tau, eps), and the effective boundary matrices.

The z-dependent boundary matrix of the soft-component generalised resolvent
is B(z) = -M_stiff(z).  Conjugating by the unitary X built from the
zero-eigenvalue branch psi of eps*B(0) and then applying the triple swap
    B_tilde = (P B_hat - P_perp)(P_perp B_hat + P)^{-1},   P = diag(1, 0),
produces a boundary matrix with an O(eps^2) limit: diag(-L z / 2, 0) for
ex0/ex2.  For ex1 a second swap
    B_prime = (P_perp B_tilde - P)(P B_tilde + P_perp)^{-1}
is required; its (1,1) entry is -delta(tau, eps), which converges at
O(eps^2), uniformly in tau, to
    delta_limit = 2 D / [ (a1^2 a3^2/(l1 l3)) (tau/eps)^2 - (l1+l3) D z ],
with D = a1^2/l1 + a3^2/l3.
"""

from __future__ import annotations

import cmath
import math

import numpy as np

from .effective import xi_ex1
from .graphs import MetricGraph
from .mmatrix import FiberParams, ccot, ccsc, m_blocks_closed

P_PROJ = np.diag([1.0, 0.0]).astype(complex)
P_PERP = np.diag([0.0, 1.0]).astype(complex)


def b_matrix(graph: MetricGraph, fiber: FiberParams) -> np.ndarray:
    """The z-dependent boundary matrix B(z) = -M_stiff(z)."""
    return -m_blocks_closed(graph, fiber).m_stiff


def rotation_x(graph: MetricGraph, tau: float) -> np.ndarray:
    """Unitary with columns (psi, psi_perp) diagonalising eps*B(0)."""
    p = graph.params
    if graph.example == "ex0":
        xi = cmath.exp(1j * p["l1"] * tau)
        return np.array([[1.0, 1.0], [xi, -xi]]) / math.sqrt(2.0)
    if graph.example == "ex1":
        u = xi_ex1(graph, tau)
        u = u / abs(u)
        return np.array([[1.0, 1.0], [-u, u]]) / math.sqrt(2.0)
    if graph.example == "ex2":
        xi2 = cmath.exp(-1j * tau * p["l2"])
        return np.array([[1.0, 1.0], [xi2, -xi2]]) / math.sqrt(2.0)
    raise ValueError("rotations defined for the three examples only")


def rotate_triple(b: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Similarity transform B_hat = X^* B X (X unitary)."""
    if np.max(np.abs(x.conj().T @ x - np.eye(2))) > 1e-13:
        raise ValueError("X is not unitary")
    return x.conj().T @ b @ x


def projection_transform(
    b_hat: np.ndarray, p: np.ndarray = P_PROJ, p_perp: np.ndarray = P_PERP
) -> np.ndarray:
    """Boundary matrix of the swapped triple: (P B - P_perp)(P_perp B + P)^{-1}."""
    denom = p_perp @ b_hat + p
    det = denom[0, 0] * denom[1, 1] - denom[0, 1] * denom[1, 0]
    if abs(det) == 0:
        raise ArithmeticError("projection transform: singular denominator")
    inv = (
        np.array([[denom[1, 1], -denom[0, 1]], [-denom[1, 0], denom[0, 0]]])
        / det
    )
    return (p @ b_hat - p_perp) @ inv


def second_swap(b_tilde: np.ndarray) -> np.ndarray:
    """The swap with the roles of P and P_perp exchanged."""
    return projection_transform(b_tilde, p=P_PERP, p_perp=P_PROJ)


def btilde_closed_ex0(graph: MetricGraph, fiber: FiberParams) -> np.ndarray:
    """Closed diagonal form of B_tilde for ex0 (and, mutatis mutandis, ex2).

    diag( (a k/eps)(cot - csc)(k eps l/a),
          -(eps/(a k)) / (cot + csc)(k eps l/a) )
    with (l, a) the stiff-edge data.
    """
    p = graph.params
    if graph.example == "ex0":
        l, a = p["l1"], p["a1"]
    elif graph.example == "ex2":
        l, a = p["l3"], p["a3"]
    else:
        raise ValueError("closed diagonal form is for ex0/ex2")
    k, eps = fiber.k, fiber.eps
    x = k * eps * l / a
    cot, csc = ccot(x), ccsc(x)
    return np.diag(
        [(a * k / eps) * (cot - csc), -(eps / (a * k)) / (cot + csc)]
    )


def alpha_beta_ex1(graph: MetricGraph, fiber: FiberParams):
    """The scalars (alpha, beta21, beta12) of B(z) = (1/eps)[[alpha, beta12],
    [beta21, alpha]] for ex1 (beta12 is the analytic continuation of
    conj(beta) off the real z axis)."""
    p = graph.params
    l1, l2, l3 = p["l1"], p["l2"], p["l3"]
    a1, a3 = p["a1"], p["a3"]
    k, eps, tau = fiber.k, fiber.eps, fiber.tau
    x1, x3 = k * eps * l1 / a1, k * eps * l3 / a3
    alpha = a1 * k * ccot(x1) + a3 * k * ccot(x3)
    beta21 = -a1 * k * cmath.exp(1j * tau * (l1 + l3)) * ccsc(x1) - a3 * k * cmath.exp(
        -1j * tau * l2
    ) * ccsc(x3)
    beta12 = -a1 * k * cmath.exp(-1j * tau * (l1 + l3)) * ccsc(x1) - a3 * k * cmath.exp(
        1j * tau * l2
    ) * ccsc(x3)
    return alpha, beta21, beta12


def delta_fn(graph: MetricGraph, fiber: FiberParams) -> complex:
    """delta(tau, eps) = eps (alpha + Re(u_bar beta)) / (alpha^2 - |beta|^2),
    with u = xi/|xi| and the bars understood as analytic continuations."""
    alpha, beta21, beta12 = alpha_beta_ex1(graph, fiber)
    xi = xi_ex1(graph, fiber.tau)
    u = xi / abs(xi)
    s = (np.conj(u) * beta21 + u * beta12) / 2.0
    denom = alpha * alpha - beta21 * beta12
    if abs(denom) < 1e-12:
        raise ArithmeticError("delta: denominator below guard")
    return fiber.eps * (alpha + s) / denom


def delta_limit(graph: MetricGraph, fiber: FiberParams) -> complex:
    """The uniform-in-tau limit of delta(tau, eps)."""
    p = graph.params
    l1, l3 = p["l1"], p["l3"]
    a1, a3 = p["a1"], p["a3"]
    d = a1**2 / l1 + a3**2 / l3
    t_sq = (fiber.tau / fiber.eps) ** 2
    return 2.0 * d / ((a1**2 * a3**2 / (l1 * l3)) * t_sq - (l1 + l3) * d * fiber.z)


def b_eff(graph: MetricGraph, fiber: FiberParams) -> np.ndarray:
    """Effective boundary matrix in the swapped-triple coordinates.

    ex0: diag(-l1 z/2, 0); ex2: diag(-l3 z/2, 0); ex1 carries the
    quasimomentum term: diag(1/delta_limit, 0).
    """
    p = graph.params
    z = fiber.z
    if graph.example == "ex0":
        return np.diag([-p["l1"] * z / 2.0, 0.0])
    if graph.example == "ex2":
        return np.diag([-p["l3"] * z / 2.0, 0.0])
    if graph.example == "ex1":
        return np.diag([1.0 / delta_limit(graph, fiber), 0.0])
    raise ValueError("b_eff defined for the three examples only")


def btilde_numeric(graph: MetricGraph, fiber: FiberParams) -> np.ndarray:
    """B_tilde computed along the generic route (rotate, then swap)."""
    return projection_transform(
        rotate_triple(b_matrix(graph, fiber), rotation_x(graph, fiber.tau))
    )


def beff_deviation(graph: MetricGraph, fiber: FiberParams) -> float:
    """Distance of the swapped boundary matrix from its effective limit.

    ex0/ex2: ||B_tilde - b_eff||.  ex1: the comparison is made after the
    second swap, where the boundary matrix is -diag(delta, 0) up to higher
    order: ||B_prime + diag(delta_limit, 0)||.
    """
    bt = btilde_numeric(graph, fiber)
    if graph.example in ("ex0", "ex2"):
        return float(np.linalg.norm(bt - b_eff(graph, fiber), 2))
    bp = second_swap(bt)
    return float(
        np.linalg.norm(bp + np.diag([delta_limit(graph, fiber), 0.0]), 2)
    )
