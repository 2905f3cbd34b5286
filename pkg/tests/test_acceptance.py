"""End-to-end acceptance checks.

Each test exercises one headline guarantee of the library at its stated
tolerance and runtime budget, and prints a single PASS/FAIL line (outside
pytest's capture, so the verdicts always appear in the run log).
"""

import time

import pytest

from qglab.graphs import build_example
from qglab.lab import _dilation_certificates, run_experiment

_CACHE: dict[str, tuple[object, float]] = {}


@pytest.fixture
def verdict(capsys):
    def _verdict(num: int, ok: bool, text: str) -> None:
        line = f"ACCEPTANCE {num:02d} {'PASS' if ok else 'FAIL'} {text}"
        with capsys.disabled():
            print(line, flush=True)
        assert ok, line

    return _verdict


def _run(tag: str):
    if tag not in _CACHE:
        t0 = time.perf_counter()
        result = run_experiment(tag)
        _CACHE[tag] = (result, time.perf_counter() - t0)
    return _CACHE[tag]


def test_criterion_01_m_matrix_additivity(verdict):
    res, dt = _run("additivity")
    worst_add = max(r["additivity"] for r in res.rows)
    worst_gen = max(r["vs_general"] for r in res.rows)
    per_example = len(res.rows) / 3
    ok = worst_add <= 1e-11 and worst_gen <= 1e-11 and per_example >= 100 and dt < 5
    verdict(
        1,
        ok,
        f"M-matrix additivity {worst_add:.1e} and closed-vs-general "
        f"{worst_gen:.1e} <= 1e-11 on {per_example:.0f} points/example "
        f"({dt:.1f} s < 5 s)",
    )


def test_criterion_02_symmetry_and_herglotz(verdict):
    res, dt = _run("additivity")
    worst_sym = max(r["symmetry"] for r in res.rows)
    worst_herg = min(r["herglotz_min"] for r in res.rows)
    ok = worst_sym <= 1e-12 and worst_herg >= -1e-10 and dt < 5
    verdict(
        2,
        ok,
        f"M(z)* = M(conj z) to {worst_sym:.1e} <= 1e-12 and Herglotz min "
        f"eigenvalue {worst_herg:.1e} >= -1e-10 ({dt:.1f} s < 5 s)",
    )


def test_criterion_03_krein_vs_direct_discretization(verdict):
    res, dt = _run("krein_vs_direct")
    bounds_ok = all(r["within_bound"] for r in res.rows)
    ok = res.passed and bounds_ok and dt < 120
    verdict(
        3,
        ok,
        "Krein resolvent matches the finite-element resolvent within "
        f"5 h^2 ||R|| at resolutions 256/512/1024 with ~4x halving ratios "
        f"({dt:.1f} s < 120 s)",
    )


def _slopes_from_rows(rows):
    from qglab.lab import fit_slope

    slopes = []
    keys = sorted({(r["example"], r["tau"]) for r in rows})
    for key in keys:
        pts = [(r["eps"], r["error"]) for r in rows if (r["example"], r["tau"]) == key]
        pts.sort(reverse=True)
        eps = [p[0] for p in pts]
        errs = [p[1] for p in pts]
        slopes.append(fit_slope(eps, errs).slope)
    return slopes


def test_criterion_04_generalised_resolvent_rate(verdict):
    res, dt = _run("gen_res_rate")
    slopes = _slopes_from_rows(res.rows)
    ok = (
        res.passed
        and all(1.8 <= s <= 2.2 for s in slopes)
        and len(slopes) >= 24  # 8 quasimomenta per example
        and dt < 600
    )
    verdict(
        4,
        ok,
        f"generalised-resolvent error is O(eps^2): slopes in "
        f"[{min(slopes):.3f}, {max(slopes):.3f}] within [1.8, 2.2] over "
        f"{len(slopes)} (example, tau) pairs ({dt:.1f} s < 600 s)",
    )


def test_criterion_05_full_norm_resolvent_rate(verdict):
    res, dt = _run("full_res_rate")
    slopes = _slopes_from_rows(res.rows)
    ok = res.passed and all(1.8 <= s <= 2.2 for s in slopes) and dt < 900
    verdict(
        5,
        ok,
        f"whole-graph norm-resolvent distance to the homogenised model is "
        f"O(eps^2): slopes in [{min(slopes):.3f}, {max(slopes):.3f}] within "
        f"[1.8, 2.2] ({dt:.1f} s < 900 s)",
    )


def test_criterion_06_triple_transform_closed_form(verdict):
    res, dt = _run("btilde_identity")
    ex0 = [r["deviation"] for r in res.rows if r["example"] == "ex0"]
    worst = max(ex0)
    ok = res.passed and worst <= 1e-12 and len(ex0) == 500 and dt < 5
    verdict(
        6,
        ok,
        f"rotated-and-swapped boundary matrix equals its closed diagonal "
        f"form to {worst:.1e} <= 1e-12 on a 10 x 10 x 5 (tau, z, eps) grid "
        f"({dt:.1f} s < 5 s)",
    )


def test_criterion_07_effective_boundary_matrix_rate(verdict):
    res, dt = _run("beff_rate")
    ok = res.passed and dt < 60
    verdict(
        7,
        ok,
        "swapped boundary matrix reaches its effective limit at O(eps^2) "
        "uniformly in tau (including near +-pi), and the ex1 scalar delta "
        f"matches its limit at O(eps^2) ({dt:.1f} s < 60 s)",
    )


def test_criterion_08_dispersion_series(verdict):
    res, dt = _run("dispersion_series")
    worst = max(r["rel_error"] for r in res.rows)
    tails_ok = all(abs(r["tail_ratio"] - 2.0) <= 1.0 for r in res.rows)
    counts = {
        name: sum(1 for r in res.rows if r["example"] == name)
        for name in ("ex0", "ex1", "ex2")
    }
    ok = (
        res.passed
        and worst <= 1e-3
        and tails_ok
        and all(c >= 50 for c in counts.values())
        and dt < 120
    )
    verdict(
        8,
        ok,
        f"spectral series matches the closed dispersion function to "
        f"{worst:.1e} <= 1e-3 at 10^4 terms on >= 50 points/example, with "
        f"1/J tail decay ({dt:.1f} s < 120 s)",
    )


def test_criterion_09_sum_identities(verdict):
    res, dt = _run("sum_identities")
    worst = max(max(r["plain"], r["alternating"]) for r in res.rows)
    xs = sorted(r["x"] for r in res.rows)
    ok = res.passed and worst <= 2e-6 and xs == [0.3, 1.0, 2.5] and dt < 10
    verdict(
        9,
        ok,
        f"lattice-sum identities hold to {worst:.1e} <= 2e-6 at 10^6 terms "
        f"for x in {{0.3, 1, 2.5}} ({dt:.1f} s < 10 s)",
    )


def test_criterion_10_schur_frobenius_inverse(verdict):
    res, dt = _run("schur_check")
    ok = res.passed and dt < 30
    verdict(
        10,
        ok,
        "boundary Schur complement of the homogenised resolvent inverts "
        f"(K(tau, z) - z) to 1e-9 with Herglotz sign ({dt:.1f} s < 30 s)",
    )


def test_criterion_11_band_convergence(verdict):
    res, dt = _run("bands")
    ok = res.passed and dt < 600
    verdict(
        11,
        ok,
        "lowest three Brillouin bands of the discretised fiber operators "
        "converge to the limiting dispersion roots at O(eps^2) (Hausdorff "
        f"slope within [1.7, 2.3] on a 17-point tau grid) ({dt:.1f} s < 600 s)",
    )


def test_criterion_12_resolvent_identity_certificates(verdict):
    t0 = time.perf_counter()
    worst = dict(ident=0.0, adj=0.0, herg=float("inf"), route=0.0)
    for name in ("ex0", "ex1", "ex2"):
        g = build_example(name)
        ident, adj, herg, route = _dilation_certificates(
            g, 1.0, 0.1, 2 + 1j, 5 + 2j, 96
        )
        worst["ident"] = max(worst["ident"], ident)
        worst["adj"] = max(worst["adj"], adj)
        worst["herg"] = min(worst["herg"], herg)
        worst["route"] = max(worst["route"], route)
    dt = time.perf_counter() - t0
    ok = (
        worst["ident"] <= 1e-9
        and worst["adj"] <= 1e-10
        and worst["herg"] >= -1e-10
        and worst["route"] <= 1e-9
        and dt < 60
    )
    verdict(
        12,
        ok,
        f"homogenised and dilated resolvents satisfy the resolvent identity "
        f"({worst['ident']:.1e} <= 1e-9), adjoint symmetry "
        f"({worst['adj']:.1e} <= 1e-10), and the Herglotz sign "
        f"({worst['herg']:.1e} >= -1e-10) ({dt:.1f} s < 60 s)",
    )


def test_criterion_13_real_line_models(verdict):
    res, dt = _run("line_models")
    defects = [r["value"] for r in res.rows if r["kind"] == "symbol_defect"]
    worst = max(defects)
    ok = res.passed and worst <= 1e-10 and dt < 120
    verdict(
        13,
        ok,
        f"finite-difference symbols on the real line equal the dispersion "
        f"multiplier L (K(eps t, z) - z) to {worst:.1e} <= 1e-10 (ex0/ex2), "
        f"and the ex1 differential model is O(eps^2) close to the dispersive "
        f"one ({dt:.1f} s < 120 s)",
    )
