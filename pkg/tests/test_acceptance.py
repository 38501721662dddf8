"""Acceptance criteria, one test per criterion.

Each test records a single PASS/FAIL line (printed in the terminal summary)
and then asserts, so a failing criterion is both reported and red.
"""

import math
import time

import numpy as np

from bpbmod.attainment import dist_to_pi, l1_sum_witness, linf_sum_witness, pi_distances
from bpbmod.cli import main
from bpbmod.geometry import SymmetricPolytope, polar
from bpbmod.modulus import estimate_phi, phi_lower, phi_upper_certified, reference_phi
from bpbmod.spaces import Diamond, catalog
from bpbmod.squareness import containment_check, squareness_defect


class Timer:
    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, *exc):
        self.elapsed = time.perf_counter() - self.t0


def finish(report, label, failures, elapsed, limit):
    ok = not failures and elapsed <= limit
    detail = f"{elapsed:.1f}s (limit {limit:g}s)"
    if failures:
        detail += "; " + "; ".join(failures[:5])
    report(label, ok, detail)
    assert not failures, failures
    assert elapsed <= limit, f"runtime {elapsed:.1f}s exceeds {limit}s"


def test_c1_linf2_sharpness(report):
    S = catalog("linf2")
    failures = []
    with Timer() as t:
        for spherical in (False, True):
            for d in (0.1, 0.3, 0.5, 1.0, 1.5, 1.9):
                h = 0.02 if d <= 1 else 0.05
                cap = math.sqrt(2 * d)
                lo = phi_lower(S, d, spherical)
                up = phi_upper_certified(S, d, spherical, mesh=h)
                if lo.lower < cap - 1e-3:
                    failures.append(f"lower({d},{spherical})={lo.lower:.6f}")
                if not (up.upper <= cap + h + 1e-6 and up.grid_upper <= cap + h + 1e-6):
                    failures.append(f"upper({d},{spherical})={up.grid_upper:.6f}")
    finish(report, "1 linf2 sharpness", failures, t.elapsed, 60)


def test_c2_line(report):
    S = catalog("line")
    failures = []
    with Timer() as t:
        for d in (0.2, 0.7, 1.0):
            v = phi_lower(S, d).lower
            if abs(v - d) > 1e-6:
                failures.append(f"phi({d})={v}")
        for d in (1.2, 1.8):
            v = phi_lower(S, d).lower
            if abs(v - (math.sqrt(d - 1) + 1)) > 1e-6:
                failures.append(f"phi({d})={v}")
        for d in (0.2, 0.7, 1.0, 1.2, 1.8):
            v = phi_lower(S, d, spherical=True).lower
            if v != 0.0:
                failures.append(f"spherical({d})={v}")
    finish(report, "2 real line", failures, t.elapsed, 1)


def test_c3_hilbert_plane(report):
    S = catalog("euclidean")
    failures = []
    with Timer() as t:
        for d in (0.2, 0.5, 0.9):
            sph = math.sqrt(2 - math.sqrt(4 - 2 * d))
            vs = estimate_phi(S, d, spherical=True).lower
            vn = estimate_phi(S, d).lower
            if abs(vs - sph) > 5e-3:
                failures.append(f"spherical({d})={vs:.6f}")
            if abs(vn - max(d, sph)) > 5e-3:
                failures.append(f"phi({d})={vn:.6f}")
        for d in (1.2, 1.6):
            vn = estimate_phi(S, d).lower
            if abs(vn - math.sqrt(d)) > 5e-3:
                failures.append(f"phi({d})={vn:.6f}")
    finish(report, "3 Hilbert plane", failures, t.elapsed, 120)


def test_c4_sum_maximality(report):
    failures = []
    cases = [
        (catalog("l1sum", parts=["line", "line"]), l1_sum_witness),
        (catalog("l1sum", parts=["line", "l1-2"]), l1_sum_witness),
        (catalog("linfsum", parts=["line", "line"]), linf_sum_witness),
        (catalog("linfsum", parts=["line", "linf2"]), linf_sum_witness),
    ]
    with Timer() as t:
        for S, make in cases:
            for d in (0.1, 0.3, 0.5):
                w = make(S, d)
                dist, _ = dist_to_pi(S, w.x, w.f)
                if not w.check(S) or dist < math.sqrt(2 * d) - 1e-8:
                    failures.append(f"{S!r} {d}: {dist:.10f}")
                est = phi_lower(S, d, budget=20_000, starts=8)
                if abs(est.lower - math.sqrt(2 * d)) > 1e-8:
                    failures.append(f"{S!r} lower {d}: {est.lower:.10f}")
    finish(report, "4 l1/linf sum maximality", failures, t.elapsed, 10)


def test_c5_diamond_strict_gap(report):
    failures, margins = [], []
    with Timer() as t:
        for eps, delta in ((0.6, 0.18), (0.5, 0.125), (0.8, 0.32)):
            est = phi_upper_certified(Diamond(eps), delta, mesh=0.05)
            cap = math.sqrt(2 * delta)
            margins.append(f"eps={eps}: upper {est.grid_upper:.6f} margin {est.margin:.6f}")
            if not (est.certified and est.grid_upper < cap and est.margin > 0):
                failures.append(f"eps={eps} upper {est.grid_upper:.6f} vs cap {cap:.6f}")
    # the budget is per (eps, delta); the total here is well inside one
    finish(report, "5 diamond strict gap (" + ", ".join(margins) + ")", failures, t.elapsed, 1800)


def test_c6_diamond_geometry(report):
    failures = []
    swap = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1.0]])
    neg = np.diag([1.0, -1.0, 1.0])
    g = np.linspace(-2, 2, 21)
    A, B = np.meshgrid(g, g)
    plane = np.stack([A.ravel(), B.ravel(), np.zeros(A.size)], axis=1)
    with Timer() as t:
        for eps in (0.25, 0.5, 0.6, 0.75):
            D = Diamond(eps)
            ball, pol = D.ball, D.dual().ball
            if not polar(polar(ball)).same_vertex_set(ball):
                failures.append(f"polar round trip eps={eps}")
            for T in (swap, neg):
                if not ball.same_vertex_set(SymmetricPolytope(ball.vertices @ T.T), tol=0.0):
                    failures.append(f"isometry on ball eps={eps}")
                if not pol.same_vertex_set(SymmetricPolytope(pol.vertices @ T.T), tol=1e-12):
                    failures.append(f"isometry on polar eps={eps}")
            err = np.max(np.abs(D.norms(plane) - np.max(np.abs(plane[:, :2]), axis=1)))
            if err > 1e-9:
                failures.append(f"plane eps={eps}: {err:.2e}")
            if abs(D.norm([0, 0, eps / 2]) - 2 * eps / 3) > 1e-9:
                failures.append(f"norm eps={eps}")
            if abs(D.dual_norm([0, 0, eps]) - 0.75 * eps) > 1e-9:
                failures.append(f"dual norm eps={eps}")
    finish(report, "6 diamond geometry", failures, t.elapsed, 5)


def _sample_pairs(S, k, rng):
    """Pairs in the product of unit balls, half of them close to norming."""
    n = S.dim
    X = rng.standard_normal((k, n))
    X /= S.norms(X)[:, None]
    X *= rng.uniform(0, 1, size=(k, 1)) ** (1 / n)
    F = rng.standard_normal((k, n))
    F /= S.dual_norms(F)[:, None]
    half = k // 2
    G = np.array([S.support_functional(x).functional for x in X[:half]])
    s = rng.uniform(0, 1, size=(half, 1)) ** 2
    F[:half] = (1 - s) * G + s * F[:half]
    F[:half] /= np.maximum(S.dual_norms(F[:half]), 1.0)[:, None]
    return X, F


EXACT_SPACES = {
    "line": catalog("line"),
    "linf2": catalog("linf2"),
    "l1-2": catalog("l1-2"),
    "euclidean2": catalog("euclidean"),
    "euclidean3": catalog("euclidean", n=3),
    "l1-3": catalog("lp", p=1, n=3),
    "linf3": catalog("lp", p="inf", n=3),
    "l1sum": catalog("l1sum"),
    "linfsum": catalog("linfsum", parts=["line", "linf2"]),
    "diamond0.6": Diamond(0.6),
    "diamond0.25-dual": Diamond(0.25).dual(),
}


def test_c7_invariants(report, rng):
    failures = []
    with Timer() as t:
        # universal cap on random pairs
        for name, S in EXACT_SPACES.items():
            X, F = _sample_pairs(S, 10_000, rng)
            d, _ = pi_distances(S, X, F)
            bound = np.sqrt(2 * np.maximum(1 - np.sum(X * F, axis=1), 0))
            worst = float(np.max(d - bound))
            if worst > 1e-8:
                failures.append(f"cap {name}: excess {worst:.2e}")
            # 1-Lipschitz in the max metric
            Y, G = _sample_pairs(S, 2000, rng)
            e, _ = pi_distances(S, Y, G)
            step = np.maximum(S.norms(X[:2000] - Y), S.dual_norms(F[:2000] - G))
            if np.max(np.abs(d[:2000] - e) - step) > 1e-9:
                failures.append(f"lipschitz {name}")
        grid = (0.1, 0.25, 0.4, 0.7, 1.0)
        for name in ("linf2", "euclidean2", "diamond0.6", "l1sum"):
            S = EXACT_SPACES[name]
            full = [estimate_phi(S, d) for d in grid]
            sph = [estimate_phi(S, d, spherical=True) for d in grid]
            for d, a, b in zip(grid, full, sph):
                if b.lower > a.upper + 1e-9:
                    failures.append(f"spherical above full {name} {d}")
                if a.lower < d - 1e-6:
                    failures.append(f"floor {name} {d}: {a.lower:.8f}")
            for i in range(len(grid)):
                for j in range(i + 1, len(grid)):
                    if full[i].lower > full[j].upper + 1e-9:
                        failures.append(f"monotone {name} {grid[i]}<{grid[j]}")
        smooth = catalog("lp", p=3, n=2)
        for d in (0.2, 0.6, 1.0):
            v = phi_lower(smooth, d, budget=30_000, starts=16).lower
            if v < d - 1e-6:
                failures.append(f"floor lp3 {d}: {v:.8f}")
        pairs = [("linf2", "l1-2"), ("l1sum", None), ("l1-3", "linf3"), ("diamond0.6", None)]
        for a, b in pairs:
            S = EXACT_SPACES[a]
            T = EXACT_SPACES[b] if b else S.dual()
            for d in (0.18, 0.5):
                ea, eb = estimate_phi(S, d), estimate_phi(T, d)
                if ea.lower > eb.upper + 1e-9 or eb.lower > ea.upper + 1e-9:
                    failures.append(f"duality {a} {d}: [{ea.lower:.5f},{ea.upper:.5f}] vs [{eb.lower:.5f},{eb.upper:.5f}]")
    finish(report, "7 universal invariants", failures, t.elapsed, 600)


def test_c8_squareness(report):
    failures = []
    with Timer() as t:
        for name, S in (("linf2", catalog("linf2")), ("l1-2", catalog("l1-2")), ("diamond", Diamond(0.6))):
            w = squareness_defect(S)
            if w.defect != 0.0:
                failures.append(f"{name} defect {w.defect}")
            if name == "diamond" and (w.u[2] != 0 or w.v[2] != 0):
                failures.append("diamond witness off the plane")
        E = catalog("euclidean")
        w = squareness_defect(E)
        th = np.linspace(0, np.pi, 2000, endpoint=False)
        # u = e(a), v = e(a + s); the defect depends only on s
        oracle = float(np.min(2 - np.minimum(2 * np.abs(np.cos(th / 2)), 2 * np.abs(np.sin(th / 2)))))
        if abs(w.defect - (2 - math.sqrt(2))) > 1e-4 or abs(oracle - (2 - math.sqrt(2))) > 1e-4:
            failures.append(f"euclidean defect {w.defect:.6f}, oracle {oracle:.6f}")
        rep = containment_check(E)
        if not (rep.asserted and rep.passed):
            failures.append("euclidean containment")
        eps = 0.6
        rep = containment_check(Diamond(eps), deltas=(eps * eps / 2,), mesh=0.05)
        if rep.strict_despite_square != [eps * eps / 2]:
            failures.append("diamond not recorded as strict despite a square")
    finish(report, "8 squareness", failures, t.elapsed, 60)


def test_c9_figures(report, tmp_path):
    failures = []
    refs = {"line": ("line", False), "euclidean2": ("euclidean", False), "linf2": ("linf2", False)}
    with Timer() as t:
        for name, (ref, spherical) in refs.items():
            out = tmp_path / f"{name}.csv"
            code = main(["plot", name, "0.05..1.95", "--step", "0.05", "--out", str(out)])
            rows = [list(map(float, r.split(",")[:3])) for r in out.read_text().strip().splitlines()[1:]]
            if code != 0 or len(rows) != 39:
                failures.append(f"{name}: exit {code}, {len(rows)} rows")
                continue
            dev = max(abs(lo - reference_phi(ref, d, spherical)) for d, lo, _ in rows)
            if dev > 5e-3:
                failures.append(f"{name}: sup deviation {dev:.2e}")
    finish(report, "9 figure curves", failures, t.elapsed, 600)
