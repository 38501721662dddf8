"""Detection of isometric copies of the ℓ∞ plane via unit vectors u, v with ‖u ± v‖ = 2."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import minimize

from .errors import BadParameter
from .modulus import phi_upper_certified
from .spaces import NormedSpace

DEFAULT_MARGIN = 1e-3


@dataclass(frozen=True)
class SquareWitness:
    """Unit vectors u, v with defect 2 − min(‖u+v‖, ‖u−v‖)."""

    u: np.ndarray
    v: np.ndarray
    defect: float
    vertex_defect: float = math.inf

    def basis(self) -> tuple[np.ndarray, np.ndarray]:
        """(u+v)/2 and (u−v)/2; for defect 0 they span a copy of the ℓ∞ plane."""
        return (self.u + self.v) / 2, (self.u - self.v) / 2


def _defects(S: NormedSpace, U: np.ndarray, V: np.ndarray) -> np.ndarray:
    return 2.0 - np.minimum(S.norms(U + V), S.norms(U - V))


def _refine(S: NormedSpace, starts: np.ndarray, budget: int, polish: int = 4):
    """Pattern search minimizing the defect over pairs normalized onto the sphere."""
    n = S.dim
    Z = starts.copy()

    def score(Z):
        U, V = Z[:, :n], Z[:, n:]
        nu, nv = S.norms(U), S.norms(V)
        ok = (nu > 0) & (nv > 0)
        U = U / np.where(ok, nu, 1.0)[:, None]
        V = V / np.where(ok, nv, 1.0)[:, None]
        return np.where(ok, _defects(S, U, V), np.inf), U, V

    vals, _, _ = score(Z)
    steps = np.full(len(Z), 0.25)
    dirs = np.vstack([np.eye(2 * n), -np.eye(2 * n)])
    used = len(Z)
    while used < budget:
        idx = np.flatnonzero(steps >= 1e-9)
        if not idx.size:
            break
        cand = Z[idx, None, :] + steps[idx, None, None] * dirs[None]
        cv, _, _ = score(cand.reshape(-1, 2 * n))
        cv = cv.reshape(idx.size, -1)
        used += cv.size
        best = np.argmin(cv, axis=1)
        bv = cv[np.arange(idx.size), best]
        down = bv < vals[idx]
        Z[idx[down]] = cand[down, best[down]]
        vals[idx[down]] = bv[down]
        steps[idx[~down]] *= 0.5
    # coordinate polling stalls on the kink ‖u+v‖ = ‖u−v‖; a simplex method does not
    for i in np.argsort(vals, kind="stable")[:polish]:
        res = minimize(lambda z: score(z[None])[0][0], Z[i], method="Nelder-Mead",
                       options={"xatol": 1e-12, "fatol": 1e-15, "maxiter": 4000})
        if res.fun < vals[i]:
            Z[i], vals[i] = res.x, res.fun
    _, U, V = score(Z)
    return vals, U, V


def _pick(defects: np.ndarray, U: np.ndarray, V: np.ndarray, tol: float = 1e-12) -> int:
    """Smallest defect; ties broken by the lexicographically largest (u, v)."""
    best = defects.min()
    tied = np.flatnonzero(defects <= best + tol)
    keys = np.round(np.hstack([U[tied], V[tied]]), 12)
    order = np.lexsort(keys.T[::-1])
    return int(tied[order[-1]])


def squareness_defect(S: NormedSpace, budget: int = 60_000, seed: int = 0, starts: int = 32) -> SquareWitness:
    """Smallest squareness defect found over pairs of unit vectors."""
    if S.dim < 2:
        raise BadParameter("squareness needs dimension at least 2")
    n = S.dim
    rng = np.random.default_rng(seed)
    pools = []
    vertex_defect = math.inf
    if S.poly is not None:
        Vt = S.poly.ball.vertices
        a, b = np.meshgrid(np.arange(len(Vt)), np.arange(len(Vt)), indexing="ij")
        U, V = Vt[a.ravel()], Vt[b.ravel()]
        d = _defects(S, U, V)
        k = _pick(d, U, V)
        vertex_defect = float(d[k])
        pools.append((d, U, V))
        top = np.argsort(d, kind="stable")[: min(16, len(d))]
        seeds = np.hstack([U[top], V[top]])
    else:
        seeds = np.zeros((0, 2 * n))
    rand = rng.standard_normal((starts, 2 * n))
    vals, U, V = _refine(S, np.vstack([seeds, rand]), budget)
    pools.append((vals, U, V))
    d = np.concatenate([p[0] for p in pools])
    U = np.vstack([p[1] for p in pools])
    V = np.vstack([p[2] for p in pools])
    if vertex_defect < math.inf:
        # keep a vertex witness unless refinement genuinely improves on it
        improved = d < vertex_defect - 1e-12
        base = len(pools[0][0])
        mask = np.zeros(len(d), dtype=bool)
        mask[:base] = True
        mask |= improved
        d = np.where(mask, d, np.inf)
    k = _pick(d, U, V)
    return SquareWitness(U[k].copy(), V[k].copy(), float(max(d[k], 0.0)), vertex_defect)


@dataclass
class ContainmentReport:
    """Outcome of testing: no ℓ∞ plane in the dual ⇒ Φ(δ) < √(2δ) on (0, 1/2).

    ``asserted`` says whether the dual is square-free by the margin, so the
    implication applies; ``violations`` lists δ where it applied but the
    certified upper bound did not beat √(2δ).  ``strict_despite_square``
    lists δ where the dual does contain a square yet the bound is strict,
    showing the condition is necessary rather than sufficient.
    """

    dual_defect: float
    margin: float
    asserted: bool
    entries: list[tuple[float, float, float]] = field(default_factory=list)
    violations: list[float] = field(default_factory=list)
    strict_despite_square: list[float] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return not self.violations


def containment_check(
    S: NormedSpace,
    deltas=(0.1, 0.25, 0.4),
    margin: float = DEFAULT_MARGIN,
    mesh: float | None = None,
    seed: int = 0,
) -> ContainmentReport:
    dual_defect = squareness_defect(S.dual(), seed=seed).defect
    report = ContainmentReport(dual_defect, margin, dual_defect > margin)
    for delta in deltas:
        if not 0 < delta < 0.5:
            continue
        est = phi_upper_certified(S, delta, mesh=mesh)
        cap = math.sqrt(2 * delta)
        report.entries.append((float(delta), est.grid_upper, cap))
        strict = est.grid_upper < cap
        if report.asserted and not strict:
            report.violations.append(float(delta))
        if not report.asserted and strict:
            report.strict_despite_square.append(float(delta))
    return report
