"""Dispersion functions K(tau, z) of the effective fiber models.

Both routes are implemented: a spectral series over the Dirichlet
eigenfunctions of the soft component and a closed trigonometric form, with
the auxiliary lattice sums that connect them.  The closed forms carry the
soft-edge speeds explicitly and reduce to the unit-speed expressions when
a = 1.  ``band_roots`` solves K(tau, z) = z on the positive half-line, which
yields the limiting band structure.
"""

from __future__ import annotations

import cmath
import math

import numpy as np
from scipy.optimize import brentq

from .effective import EffectiveModel
from .graphs import MetricGraph, datta_weights
from .krein import make_grid
from .mmatrix import POLE_GUARD, FiberParams, ccot, ccsc


def _sqrt_upper(z: complex) -> complex:
    k = cmath.sqrt(z)
    if k.imag < 0:
        k = -k
    return k


def _theta_ex1(graph: MetricGraph, tau: float) -> complex:
    p = graph.params
    num = (p["a1"] ** 2 / p["l1"]) * cmath.exp(-1j * tau) + p["a3"] ** 2 / p["l3"]
    return num / abs(num)


def k_closed(
    graph: MetricGraph, tau: float, z: complex, eps: float | None = None
) -> complex:
    """Closed form of the dispersion function.

    ex0: (2 sqrt(z)/l1) a2 (cos(l2 sqrt(z)/a2) - cos tau) / sin(l2 sqrt(z)/a2)
    ex1: (1/(l1+l3)) { 2 a2 sqrt(z) (cos y - Re theta)/sin y + sigma^2 (tau/eps)^2 },
         y = l2 sqrt(z)/a2,  sigma^2 = (l1/a1^2 + l3/a3^2)^{-1}
    ex2: (2 sqrt(z)/l3) { a1 (cos(l1 sqrt(z)/a1) - cos tau)/sin(l1 sqrt(z)/a1)
                          - a2 tan(l2 sqrt(z)/(2 a2)) }
    For ex1 the quasimomentum enters through t = tau/eps, so ``eps`` is
    required.
    """
    p = graph.params
    k = _sqrt_upper(z)
    if graph.example == "ex0":
        y = k * p["l2"] / p["a2"]
        return (2.0 * k / p["l1"]) * p["a2"] * (cmath.cos(y) - math.cos(tau)) * ccsc(y)
    if graph.example == "ex1":
        if eps is None:
            raise ValueError("ex1 dispersion needs eps (quasimomentum t = tau/eps)")
        length = p["l1"] + p["l3"]
        sigma_sq = 1.0 / (p["l1"] / p["a1"] ** 2 + p["l3"] / p["a3"] ** 2)
        y = k * p["l2"] / p["a2"]
        re_theta = _theta_ex1(graph, tau).real
        trig = 2.0 * p["a2"] * k * (cmath.cos(y) - re_theta) * ccsc(y)
        return (trig + sigma_sq * (tau / eps) ** 2) / length
    if graph.example == "ex2":
        y1 = k * p["l1"] / p["a1"]
        y2 = k * p["l2"] / p["a2"]
        tan_half = ccsc(y2) - ccot(y2)  # tan(y2/2)
        loop = p["a1"] * (cmath.cos(y1) - math.cos(tau)) * ccsc(y1)
        return (2.0 * k / p["l3"]) * (loop - p["a2"] * tan_half)
    raise ValueError("dispersion defined for the three examples only")


def k_series(
    graph: MetricGraph,
    tau: float,
    z: complex,
    n_terms: int,
    eps: float | None = None,
) -> complex:
    """Spectral-series form of the dispersion function, truncated at n_terms.

    K = (1/rho^2) { z * sum_j <v, phi_j> G(phi_j) / (mu_j - z) + G(v) },
    with phi_j the Dirichlet modes of the soft component, v the
    zero-energy lift of psi, and G the co-derivative boundary functional.
    The summand products collapse to -(4 a^2/l)(1 -+ cos-like factors); the
    truncation error decays like 1/n_terms.
    """
    if n_terms < 1:
        raise ValueError("n_terms must be >= 1")
    p = graph.params
    j = np.arange(1, n_terms + 1, dtype=float)
    sign = np.where(j.astype(int) % 2 == 0, 1.0, -1.0)  # (-1)^j
    if graph.example == "ex0":
        l2, a2 = p["l2"], p["a2"]
        mu = (a2 * math.pi * j / l2) ** 2
        prod = -(4.0 * a2**2 / l2) * (1.0 - sign * math.cos(tau))
        total = z * np.sum(prod / (mu - z)) + (2.0 * a2**2 / l2) * (
            1.0 - math.cos(tau)
        )
        return total / p["l1"]
    if graph.example == "ex1":
        if eps is None:
            raise ValueError("ex1 dispersion needs eps (quasimomentum t = tau/eps)")
        l2, a2 = p["l2"], p["a2"]
        length = p["l1"] + p["l3"]
        sigma_sq = 1.0 / (p["l1"] / p["a1"] ** 2 + p["l3"] / p["a3"] ** 2)
        re_theta = _theta_ex1(graph, tau).real
        mu = (a2 * math.pi * j / l2) ** 2
        prod = -(4.0 * a2**2 / l2) * (1.0 - sign * re_theta)
        total = (
            z * np.sum(prod / (mu - z))
            + (2.0 * a2**2 / l2) * (1.0 - re_theta)
            + sigma_sq * (tau / eps) ** 2
        )
        return total / length
    if graph.example == "ex2":
        l1, l2 = p["l1"], p["l2"]
        a1, a2 = p["a1"], p["a2"]
        mu1 = (a1 * math.pi * j / l1) ** 2
        prod1 = -(4.0 * a1**2 / l1) * (1.0 - sign * math.cos(tau))
        mu2 = (a2 * math.pi * j / l2) ** 2
        prod2 = np.where(j.astype(int) % 2 == 1, -(8.0 * a2**2 / l2), 0.0)
        total = (
            z * np.sum(prod1 / (mu1 - z))
            + z * np.sum(prod2 / (mu2 - z))
            + (2.0 * a1**2 / l1) * (1.0 - math.cos(tau))
        )
        return total / p["l3"]
    raise ValueError("dispersion defined for the three examples only")


def verify_sum_identities(x: float, n_terms: int) -> dict[str, float]:
    """Deviation of the truncated lattice sums from their closed forms.

    sum_{j>=1} 1/((pi j)^2 - x^2)        = (1/x^2 - cos x/(x sin x)) / 2
    sum_{j>=1} (-1)^j/((pi j)^2 - x^2)   = (1/x^2 - 1/(x sin x)) / 2
    """
    j = np.arange(1, n_terms + 1, dtype=float)
    denom = (math.pi * j) ** 2 - x * x
    if np.min(np.abs(denom)) < 1e-12:
        raise ValueError("x lies on a lattice point pi*j")
    plain = float(np.sum(1.0 / denom))
    alt = float(np.sum(np.where(j.astype(int) % 2 == 0, 1.0, -1.0) / denom))
    closed_plain = 0.5 * (1.0 / x**2 - math.cos(x) / (x * math.sin(x)))
    closed_alt = 0.5 * (1.0 / x**2 - 1.0 / (x * math.sin(x)))
    return {
        "plain": abs(plain - closed_plain),
        "alternating": abs(alt - closed_alt),
    }


def schur_frobenius(
    graph: MetricGraph,
    tau: float,
    z: complex,
    eps: float,
    resolution: int = 64,
) -> complex:
    """The scalar Schur complement 1/(K(tau, z) - z) of the homogenised
    fiber operator, computed from the boundary-value assembly (independent
    of the closed dispersion formulas)."""
    weights = datta_weights(graph, tau)
    fiber = FiberParams(eps, tau, z)
    soft = graph.subgraph("soft")
    grid = make_grid(soft, resolution)
    model = EffectiveModel(graph, weights, fiber, grid=grid)
    return model.schur_frobenius(z)


def _pole_list(
    graph: MetricGraph, z_max: float, with_parity: bool = False
):
    """Positive poles of z -> K(tau, z) up to z_max (tau-independent).

    With ``with_parity`` each pole carries its coupling parity: a sine pole
    of index j couples through (1 - (-1)^j cos tau), so it is removable --
    and then hosts a decoupled Dirichlet eigenvalue -- exactly when
    cos tau = (-1)^j.  Odd half-poles of tan couple tau-independently and
    are never removable (parity None).
    """
    p = graph.params
    poles: list[tuple[float, int | None]] = []

    def sine_poles(length: float, speed: float) -> None:
        j = 1
        while (speed * math.pi * j / length) ** 2 <= z_max:
            z_p = (speed * math.pi * j / length) ** 2
            poles.append((z_p, 1 - 2 * (j % 2), 2.0 * speed * math.sqrt(z_p) / length))
            j += 1

    def tan_half_poles(length: float, speed: float) -> None:
        j = 1
        while (speed * math.pi * (2 * j - 1) / length) ** 2 <= z_max:
            z_p = (speed * math.pi * (2 * j - 1) / length) ** 2
            poles.append((z_p, None, 2.0 * speed * math.sqrt(z_p) / length))
            j += 1

    if graph.example in ("ex0", "ex1"):
        sine_poles(p["l2"], p["a2"])
    elif graph.example == "ex2":
        sine_poles(p["l1"], p["a1"])
        tan_half_poles(p["l2"], p["a2"])
    else:
        raise ValueError("band poles defined for the three examples only")
    poles.sort(key=lambda t: t[0])
    if with_parity:
        return poles
    return [z for z, _, _ in poles]


def flat_levels(graph: MetricGraph, z_max: float) -> list[float]:
    """tau-independent fiber eigenvalues carried by Dirichlet modes with
    identically vanishing boundary coupling (ex2 loop modes of even index)."""
    if graph.example != "ex2":
        return []
    p = graph.params
    out, j = [], 2
    while (p["a2"] * math.pi * j / p["l2"]) ** 2 <= z_max:
        out.append((p["a2"] * math.pi * j / p["l2"]) ** 2)
        j += 2
    return out


def band_roots(
    graph: MetricGraph,
    tau: float,
    z_max: float,
    eps: float | None = None,
    scan_points: int = 256,
    root_tol: float = 1e-12,
) -> np.ndarray:
    """Limiting fiber eigenvalues in [0, z_max], sorted ascending.

    These are the roots of K(tau, z) = z between consecutive poles of K
    (simple roots by sign-change scan plus Brent refinement; tangent roots
    at band touchings by locating near-zero local minima of |K - z|),
    together with the decoupled Dirichlet levels: removable poles at the
    symmetry points cos tau = +-1 and the tau-independent flat levels.
    z = 0 itself is reported as a root when K(tau, 0) vanishes.
    """
    from scipy.optimize import minimize_scalar

    pole_data = _pole_list(graph, z_max * (1.0 + 1e-9), with_parity=True)
    edges = [0.0] + [z for z, _, _ in pole_data] + [z_max]
    # smallest z-distance from each pole at which the trig guards stay clear
    pads = [10.0 * POLE_GUARD * slope for _, _, slope in pole_data]

    def f(z: float) -> float:
        return (k_closed(graph, tau, z + 0j, eps=eps) - z).real

    roots: list[float] = list(flat_levels(graph, z_max))
    for z_p, parity, _ in pole_data:
        if parity is not None and abs(math.cos(tau) - parity) < 1e-9:
            roots.append(z_p)
    z0 = 1e-9
    if abs(f(z0)) <= 10.0 * z0:
        roots.append(0.0)
    n_poles = len(pole_data)
    for i, (lo, hi) in enumerate(zip(edges[:-1], edges[1:])):
        if hi <= lo:
            continue
        a = lo + pads[i - 1] if i >= 1 else max(lo, 1e-12)
        b = hi - pads[i] if i + 1 <= n_poles else hi
        if b <= a:
            continue
        grid = np.linspace(a, b, scan_points)
        vals = np.array([f(g) for g in grid])
        hits = np.nonzero(np.diff(np.sign(vals)) != 0)[0]
        for i in hits:
            roots.append(brentq(f, grid[i], grid[i + 1], xtol=root_tol, rtol=1e-15))
        # tangent roots: interior local minima of |f| that reach (near) zero
        mags = np.abs(vals)
        scale = max(1.0, float(np.max(mags)))
        for i in range(1, scan_points - 1):
            if not (mags[i] <= mags[i - 1] and mags[i] <= mags[i + 1]):
                continue
            if np.sign(vals[i - 1]) != np.sign(vals[i + 1]) or vals[i] == 0.0:
                continue  # covered by the sign-change pass
            res = minimize_scalar(
                lambda t: f(t) ** 2,
                bounds=(grid[i - 1], grid[i + 1]),
                method="bounded",
                options={"xatol": root_tol},
            )
            z_star = float(res.x)
            if abs(f(z_star)) <= 1e-7 * scale and not any(
                abs(z_star - r) < 1e-6 * max(1.0, z_star) for r in roots
            ):
                roots.append(z_star)
    return np.array(sorted(roots))
