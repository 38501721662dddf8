"""Lower and certified upper bounds for the modulus Φ(δ) and its spherical variant.

``phi_lower`` evaluates the distance to the norming pairs at points of the
A-set found by a batched multistart pattern search, so every value it
reports is attained and hence a valid lower bound.

``phi_upper_certified`` covers the A-set by cells and bounds the distance
on each cell from above.  For polyhedral spaces the cells are pairs of
axis-aligned boxes (one for x, one for f) and the bound uses the exact
maximum of each face distance over a box.  Euclidean spaces are reduced by
rotation to at most three coordinates and bounded by the 1-Lipschitz
property of the distance.  Cells are refined adaptively until every bound
is within the requested tolerance of the best lower bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .attainment import BpbPoint, NormingPair, _euclidean_batch, dist_to_pi, pi_distances
from .errors import BadParameter, BudgetTooSmall, OutOfDomain, UnsupportedSpace
from .spaces import DirectSum, Euclidean, LpSpace, NormedSpace

FEAS_TOL = 1e-12
DEFAULT_BUDGET = 150_000
DEFAULT_STARTS = 64
MAX_CERT_DELTA = 1.9


def _check_delta(delta) -> float:
    delta = float(delta)
    if not 0.0 < delta < 2.0:
        raise OutOfDomain(f"delta must lie in (0, 2), got {delta}")
    return delta


# ---------------------------------------------------------------- references


@dataclass(frozen=True)
class ReferenceCurve:
    space_name: str
    spherical: bool
    formula: str
    domain: tuple[float, float] = (0.0, 2.0)

    def __call__(self, delta: float) -> float:
        return reference_phi(self.space_name, delta, self.spherical)


REFERENCE_CURVES = {
    ("line", False): ReferenceCurve("line", False, "delta on (0,1], 1 + sqrt(delta - 1) on (1,2)"),
    ("line", True): ReferenceCurve("line", True, "0"),
    ("euclidean", False): ReferenceCurve(
        "euclidean", False, "max(delta, sqrt(2 - sqrt(4 - 2 delta))) on (0,1], sqrt(delta) on (1,2)"
    ),
    ("euclidean", True): ReferenceCurve("euclidean", True, "sqrt(2 - sqrt(4 - 2 delta))"),
    ("linf2", False): ReferenceCurve("linf2", False, "sqrt(2 delta)"),
    ("linf2", True): ReferenceCurve("linf2", True, "sqrt(2 delta)"),
}


def reference_phi(name: str, delta: float, spherical: bool = False) -> float:
    """Closed-form modulus of the line, a Hilbert space or the ℓ∞ plane."""
    delta = _check_delta(delta)
    if name == "line":
        if spherical:
            return 0.0
        return delta if delta <= 1 else 1.0 + math.sqrt(delta - 1)
    if name == "euclidean":
        sph = math.sqrt(2 - math.sqrt(4 - 2 * delta))
        if spherical:
            return sph
        return max(delta, sph) if delta <= 1 else math.sqrt(delta)
    if name == "linf2":
        return math.sqrt(2 * delta)
    raise OutOfDomain(f"no closed form for {name!r}")


def reference_name(S: NormedSpace) -> str | None:
    """Name of the closed-form curve matching ``S``, if any."""
    if isinstance(S, Euclidean):
        return "line" if S.dim == 1 else "euclidean"
    if S.dim == 1 and S.poly is not None:
        return "line"
    if isinstance(S, LpSpace) and S.dim == 2 and S.p in (1.0, math.inf):
        return "linf2"
    if isinstance(S, DirectSum) and S.dim == 2:
        return "linf2"
    return None


# -------------------------------------------------------------- shift bounds


def a_set_shift_bound(delta: float, delta0: float) -> float:
    """Bound on the distance from a point of A(δ0) to A(δ), for δ < δ0.

    Obtained by moving (x0, f0) towards a norming pair along a segment of
    parameter λ, which costs at most 2λ in the max-metric.  For δ, δ0 ≥ 1
    the parameter is (δ0 − δ)/(δ0 − 1 + √(1 − 2δ + δδ0)).
    """
    delta, delta0 = float(delta), float(delta0)
    if not 0 < delta < delta0 < 2:
        raise OutOfDomain("need 0 < delta < delta0 < 2")
    if delta0 <= 1:
        s0 = math.sqrt(1 - delta0)
        return 2 * (math.sqrt(1 - delta) - s0) / (1 - s0)
    if delta >= 1:
        lam = (delta0 - delta) / (delta0 - 1 + math.sqrt(1 - 2 * delta + delta * delta0))
        return 2 * lam
    raise OutOfDomain("delta and delta0 lie on different sides of 1; split the interval")


def spherical_shift_bound(delta: float, delta0: float) -> float:
    """Bound on the distance from a point of A^S(δ0) to A^S(δ), for δ < δ0."""
    delta, delta0 = float(delta), float(delta0)
    if not 0 < delta < delta0 < 2:
        raise OutOfDomain("need 0 < delta < delta0 < 2")
    if delta < 1:
        return 4 * (delta0 - delta) / delta0
    if 2 - math.sqrt(2 - delta0) < delta:
        return 2 * (delta0 - delta) / (2 - delta)
    raise OutOfDomain("for delta >= 1 need 2 - sqrt(2 - delta0) < delta")


# ---------------------------------------------------------------- estimates


@dataclass
class ModulusEstimate:
    """Bounds lower ≤ Φ(δ) ≤ upper with a witness attaining ``lower``.

    ``grid_upper`` is the raw bound from the cell covering (infinite when no
    covering was run); ``upper`` also takes the universal cap √(2δ) into
    account.  ``vacuous`` marks a covering that failed to improve on the cap
    while the lower bound stays below it.
    """

    delta: float
    spherical: bool
    lower: float
    upper: float
    witness: BpbPoint | None
    witness_distance: float
    mesh: float = 0.0
    certified: bool = False
    grid_upper: float = math.inf
    vacuous: bool = False
    nearest: NormingPair | None = None
    stats: dict = field(default_factory=dict)

    @property
    def cap(self) -> float:
        return math.sqrt(2 * self.delta)

    @property
    def margin(self) -> float:
        """Gap between the universal cap and the certified upper bound."""
        return self.cap - self.grid_upper


# ------------------------------------------------------------ search helpers


def has_exact_distance(S: NormedSpace) -> bool:
    return S.poly is not None or isinstance(S, Euclidean)


def _sampled_distances(S: NormedSpace, X: np.ndarray, F: np.ndarray, rng) -> np.ndarray:
    """Upper approximation of the distance for smooth ℓp, by sampling the sphere."""
    k = 4096
    G = rng.standard_normal((k, S.dim))
    Z = G / S.norms(G)[:, None]
    J = np.array([S.support_functional(z).functional for z in Z])
    out = np.empty(len(X))
    for s in range(0, len(X), 64):
        dx = S.norms(X[s : s + 64, None, :] - Z[None])
        df = S.dual_norms(F[s : s + 64, None, :] - J[None])
        out[s : s + 64] = np.min(np.maximum(dx, df), axis=1)
    return out


class _Objective:
    """Maps raw coordinates z = (r, s) to a pair and scores it.

    Feasible pairs score their distance to the norming pairs; infeasible
    ones score below -1 so that any feasible point beats them.
    """

    def __init__(self, S: NormedSpace, delta: float, spherical: bool, rng):
        self.S = S
        self.n = S.dim
        self.delta = delta
        self.spherical = spherical
        self.evals = 0
        self.exact = has_exact_distance(S)
        self.rng = rng

    def pairs(self, Z: np.ndarray):
        n = self.n
        R, Sd = Z[:, :n], Z[:, n:]
        nr = self.S.norms(R)
        ns = self.S.dual_norms(Sd)
        if self.spherical:
            ok = (nr > 0) & (ns > 0)
            X = R / np.where(ok, nr, 1.0)[:, None]
            F = Sd / np.where(ok, ns, 1.0)[:, None]
        else:
            ok = np.ones(len(Z), dtype=bool)
            X = R / np.maximum(1.0, nr)[:, None]
            F = Sd / np.maximum(1.0, ns)[:, None]
        return X, F, ok

    def __call__(self, Z: np.ndarray) -> np.ndarray:
        X, F, ok = self.pairs(Z)
        self.evals += len(Z)
        gap = np.sum(X * F, axis=1) - (1.0 - self.delta)
        feas = ok & (gap >= -FEAS_TOL)
        vals = np.where(ok, -1.0 + np.minimum(gap, 0.0), -3.0)
        if feas.any():
            if self.exact:
                d, _ = pi_distances(self.S, X[feas], F[feas])
            else:
                d = _sampled_distances(self.S, X[feas], F[feas], self.rng)
            vals[feas] = d
        return vals


def _pattern_search(obj, Z0, budget, step0=0.25, shrink=0.5, min_step=1e-7):
    """Batched coordinate pattern search (maximization), one state per start."""
    Z = np.array(Z0, dtype=float)
    vals = obj(Z)
    m, d = Z.shape
    steps = np.full(m, step0)
    dirs = np.vstack([np.eye(d), -np.eye(d)])
    while obj.evals < budget:
        idx = np.flatnonzero(steps >= min_step)
        if idx.size == 0:
            break
        cand = Z[idx, None, :] + steps[idx, None, None] * dirs[None, :, :]
        cv = obj(cand.reshape(-1, d)).reshape(idx.size, 2 * d)
        best = np.argmax(cv, axis=1)
        bv = cv[np.arange(idx.size), best]
        up = bv > vals[idx]
        Z[idx[up]] = cand[up, best[up]]
        vals[idx[up]] = bv[up]
        steps[idx[~up]] *= shrink
    return Z, vals


def _support(S: NormedSpace, x: np.ndarray) -> np.ndarray:
    return S.support_functional(x).functional


def _unit_vectors(S: NormedSpace) -> list[np.ndarray]:
    if S.poly is not None:
        return [v for v in S.poly.ball.vertices]
    out = []
    for i in range(S.dim):
        e = np.zeros(S.dim)
        e[i] = 1.0
        out += [e, -e]
    return out


def seed_pairs(S: NormedSpace, delta: float, spherical: bool) -> list[tuple[np.ndarray, np.ndarray]]:
    """Structured starting pairs with pairing 1 − δ (infeasible ones are scored out)."""
    n = S.dim
    seeds = []
    units = _unit_vectors(S)
    r = math.sqrt(2 * delta)
    for u in units:
        g = _support(S, u)
        if not spherical and delta <= 1:
            seeds.append(((1 - delta) * u, g))
        if not spherical and delta > 1:
            t = math.sqrt(delta - 1)
            seeds.append((t * u, -t * g))
    if n >= 2:
        # ℓ∞- and ℓ1-type pairs on the first two coordinates
        a = np.zeros(n)
        b = np.zeros(n)
        a[:2] = (1 - r, 1.0)
        b[:2] = (r / 2, 1 - r / 2)
        seeds.append((a, b))
        seeds.append((b.copy(), a.copy()))
        if isinstance(S, Euclidean):
            c, s = math.sqrt(1 - delta / 2), math.sqrt(delta / 2)
            x = np.zeros(n)
            f = np.zeros(n)
            x[:2] = (c, s)
            f[:2] = (c, -s)
            seeds.append((x, f))
    if isinstance(S, DirectSum) and delta <= 0.5:
        from .attainment import l1_sum_witness, linf_sum_witness

        w = (l1_sum_witness if S.combiner == "l1" else linf_sum_witness)(S, delta)
        seeds.append((w.x, w.f))
    out = []
    for x, f in seeds:
        nx, nf = S.norm(x), S.dual_norm(f)
        if spherical:
            if nx == 0 or nf == 0:
                continue
            x, f = x / nx, f / nf
        else:
            x, f = x / max(1.0, nx), f / max(1.0, nf)
        out.append((np.asarray(x, float), np.asarray(f, float)))
    return out


def _random_starts(S: NormedSpace, k: int, spherical: bool, rng) -> np.ndarray:
    n = S.dim
    R = rng.standard_normal((k, n))
    R /= S.norms(R)[:, None]
    if not spherical:
        R *= rng.uniform(0.0, 1.0, size=(k, 1)) ** (1.0 / n)
    F = np.array([_support(S, x) for x in R])
    F = F + 0.5 * rng.standard_normal((k, n)) * rng.uniform(0, 1, size=(k, 1))
    F /= np.maximum(S.dual_norms(F), 1e-300)[:, None]
    return np.hstack([R, F])


def phi_lower(
    S: NormedSpace,
    delta: float,
    spherical: bool = False,
    budget: int | None = None,
    seed: int = 0,
    starts: int = DEFAULT_STARTS,
) -> ModulusEstimate:
    """Best attained distance over a multistart pattern search of the A-set."""
    delta = _check_delta(delta)
    budget = DEFAULT_BUDGET if budget is None else int(budget)
    rng = np.random.default_rng(seed)
    obj = _Objective(S, delta, spherical, rng)
    seeds = seed_pairs(S, delta, spherical)
    Z0 = [np.concatenate(p) for p in seeds]
    if starts > 0:
        Z0 = Z0 + list(_random_starts(S, starts, spherical, rng))
    if not Z0:
        raise BudgetTooSmall("no starting points")
    Z, vals = _pattern_search(obj, np.asarray(Z0), budget)
    best = int(np.argmax(vals))
    if vals[best] < 0:
        raise BudgetTooSmall("no feasible pair found")
    X, F, _ = obj.pairs(Z[best : best + 1])
    x, f = X[0], F[0]
    witness = BpbPoint(x, f, delta, spherical)
    nearest = None
    if obj.exact:
        d, nearest = dist_to_pi(S, x, f)
    else:
        d = float(vals[best])
    return ModulusEstimate(
        delta=delta,
        spherical=spherical,
        lower=min(float(d), math.sqrt(2 * delta)),
        upper=math.sqrt(2 * delta),
        witness=witness,
        witness_distance=float(d),
        nearest=nearest,
        stats={"evaluations": obj.evals, "starts": len(Z0), "exact": obj.exact},
    )


# ------------------------------------------------------- polyhedral covering


class _BoxPool:
    """Axis-aligned boxes with cached face-distance bounds.

    For each box it stores the exact maximum over the box of the distance to
    every face, a representative point of the (dual) ball with its face
    distances, and the box radius measured in the relevant norm.
    """

    def __init__(self, table, normals, face_order, spherical, min_norm, cone=None):
        self.table = table
        self.N = normals
        self.absN = np.abs(normals)
        self.order = face_order
        self.spherical = spherical
        self.min_norm = min_norm
        self.cone = cone
        n = normals.shape[1]
        self.n = n
        self.C = np.zeros((0, n))
        self.W = np.zeros((0, n))
        self.U = np.zeros((0, len(face_order)))
        self.R = np.zeros((0, len(face_order)))
        self.P = np.zeros((0, n))
        self.rep_ok = np.zeros(0, dtype=bool)
        self.rad = np.zeros(0)
        self.children: dict[int, np.ndarray] = {}

    def _alive(self, C, W):
        proj = C @ self.N.T
        spread = W @ self.absN.T
        hi = np.max(proj + spread, axis=1)
        lo = np.max(proj - spread, axis=1)
        ok = (lo <= 1 + 1e-12) & (hi >= self.min_norm - 1e-12)
        if self.cone is not None:
            ok &= np.all(C @ self.cone.T + W @ np.abs(self.cone).T >= -1e-12, axis=1)
        return ok

    def add(self, C, W) -> np.ndarray:
        keep = self._alive(C, W)
        C, W = C[keep], W[keep]
        if len(C) == 0:
            return np.zeros(0, dtype=int)
        g = np.max(C @ self.N.T, axis=1)
        if self.spherical:
            rep_ok = g > 1e-12
            P = C / np.where(rep_ok, g, 1.0)[:, None]
        else:
            rep_ok = np.ones(len(C), dtype=bool)
            P = C / np.maximum(1.0, g)[:, None]
        U = self.table.box_sup(C, W)[:, self.order]
        R = self.table.distances(P)[:, self.order]
        start = len(self.C)
        self.C = np.vstack([self.C, C])
        self.W = np.vstack([self.W, W])
        self.U = np.vstack([self.U, U])
        self.R = np.vstack([self.R, R])
        self.P = np.vstack([self.P, P])
        self.rep_ok = np.concatenate([self.rep_ok, rep_ok])
        self.rad = np.concatenate([self.rad, np.max(W @ self.absN.T, axis=1)])
        return np.arange(start, start + len(C))

    def split(self, ids: np.ndarray) -> dict[int, np.ndarray]:
        todo = [int(i) for i in ids if int(i) not in self.children]
        if todo:
            C = self.C[todo]
            W = self.W[todo]
            ax = np.argmax(W * np.max(self.absN, axis=0), axis=1)
            rows = np.arange(len(todo))
            Wc = W.copy()
            Wc[rows, ax] /= 2
            C1 = C.copy()
            C2 = C.copy()
            C1[rows, ax] -= Wc[rows, ax]
            C2[rows, ax] += Wc[rows, ax]
            keep1 = self._alive(C1, Wc)
            keep2 = self._alive(C2, Wc)
            new1 = self.add(C1, Wc)
            new2 = self.add(C2, Wc)
            it1, it2 = iter(new1), iter(new2)
            for r, i in enumerate(todo):
                kids = []
                if keep1[r]:
                    kids.append(next(it1))
                if keep2[r]:
                    kids.append(next(it2))
                self.children[i] = np.asarray(kids, dtype=int)
        return {int(i): self.children[int(i)] for i in ids}


def _symmetry_cone(isometries: list[np.ndarray], n: int) -> np.ndarray | None:
    """Half-space normals of a fundamental domain {x : <a, x> >= 0} for the group."""
    if not isometries or len(isometries) <= 1:
        return None
    p = np.array([1.0, 0.7, 0.4, 0.25])[:n]
    rows = [p - T.T @ p for T in isometries if not np.allclose(T, np.eye(n))]
    return np.asarray(rows)


def _pairing_max(Cx, Wx, Cf, Wf) -> np.ndarray:
    xl, xu = Cx - Wx, Cx + Wx
    fl, fu = Cf - Wf, Cf + Wf
    m = np.maximum(np.maximum(xl * fl, xl * fu), np.maximum(xu * fl, xu * fu))
    return m.sum(axis=1)


def _pair_min_max(A: np.ndarray, B: np.ndarray, I: np.ndarray, J: np.ndarray, chunk=40000):
    out = np.empty(len(I))
    for s in range(0, len(I), chunk):
        out[s : s + chunk] = np.min(np.maximum(A[I[s : s + chunk]], B[J[s : s + chunk]]), axis=1)
    return out


def _certify_polyhedral(S, delta, spherical, h, target, max_cells, min_radius, lb0):
    poly = S.poly
    n = S.dim
    conj = np.array([face.conjugate for face in poly.lattice.faces])
    ident = np.arange(len(conj))
    min_norm = 1.0 if spherical else max(0.0, 1.0 - delta)
    cone = _symmetry_cone(poly.isometries, n)
    X = _BoxPool(poly.primal_table, poly.ball.normals, ident, spherical, min_norm, cone)
    F = _BoxPool(poly.dual_table, poly.polar.normals, conj, spherical, min_norm)
    Rx = np.max(np.abs(poly.ball.vertices), axis=0)
    Rf = np.max(np.abs(poly.polar.vertices), axis=0)
    ix = X.add(np.zeros((1, n)), Rx[None, :] * (1 + 1e-9))
    jf = F.add(np.zeros((1, n)), Rf[None, :] * (1 + 1e-9))
    I, J = np.meshgrid(ix, jf, indexing="ij")
    I, J = I.ravel(), J.ravel()
    lb, lb_pair = lb0, None
    done_max = -np.inf
    floor_hit = False
    processed = 0
    exhausted = False
    max_rad = 0.0
    thresh = 1.0 - delta - 1e-12
    while len(I):
        keep = _pairing_max(X.C[I], X.W[I], F.C[J], F.W[J]) >= thresh
        I, J = I[keep], J[keep]
        if not len(I):
            break
        processed += len(I)
        bound = _pair_min_max(X.U, F.U, I, J)
        feas = X.rep_ok[I] & F.rep_ok[J]
        feas &= np.sum(X.P[I] * F.P[J], axis=1) >= 1.0 - delta
        if feas.any():
            vals = _pair_min_max(X.R, F.R, I[feas], J[feas])
            k = int(np.argmax(vals))
            if vals[k] > lb:
                lb = float(vals[k])
                lb_pair = (X.P[I[feas][k]].copy(), F.P[J[feas][k]].copy())
        stop = target if target is not None else lb + h
        fin = bound <= stop
        rx, rf = X.rad[I], F.rad[J]
        tiny = ~fin & (np.maximum(rx, rf) < min_radius)
        over = processed > max_cells
        if over:
            tiny = ~fin
            exhausted = True
        closing = fin | tiny
        if closing.any():
            done_max = max(done_max, float(bound[closing].max()))
            max_rad = max(max_rad, float(np.maximum(rx, rf)[closing].max()))
            floor_hit |= bool(tiny.any())
        I, J, rx, rf = I[~closing], J[~closing], rx[~closing], rf[~closing]
        if not len(I):
            break
        side_x = rx >= rf
        newI, newJ = [], []
        if side_x.any():
            kids = X.split(np.unique(I[side_x]))
            for i, j in zip(I[side_x], J[side_x]):
                c = kids[int(i)]
                newI.append(c)
                newJ.append(np.full(len(c), j))
        if (~side_x).any():
            kids = F.split(np.unique(J[~side_x]))
            for i, j in zip(I[~side_x], J[~side_x]):
                c = kids[int(j)]
                newI.append(np.full(len(c), i))
                newJ.append(c)
        I = np.concatenate(newI) if newI else np.zeros(0, dtype=int)
        J = np.concatenate(newJ) if newJ else np.zeros(0, dtype=int)
    stats = {
        "pairs_processed": processed,
        "boxes_x": len(X.C),
        "boxes_f": len(F.C),
        "exhausted": exhausted,
        "radius_floor_hit": floor_hit,
        "max_final_radius": max_rad,
        "symmetry_order": len(poly.isometries),
    }
    return max(done_max, 0.0), lb, lb_pair, stats


# -------------------------------------------------------- euclidean covering


def _certify_euclidean(S, delta, spherical, h, target, max_cells, min_radius, lb0):
    """Covering in rotation-reduced coordinates x = ρe1, f = (f1, f2, 0, ...)."""
    n = S.dim
    lb, lb_pair = lb0, None
    done_max = -np.inf
    processed = 0
    exhausted = False
    floor_hit = False
    max_rad = 0.0

    def embed(rho, f1, f2):
        X = np.zeros((len(rho), n))
        Fm = np.zeros((len(rho), n))
        X[:, 0] = rho
        Fm[:, 0] = f1
        if n > 1:
            Fm[:, 1] = f2
        return X, Fm

    if spherical:
        # x = e1, f = (cos t, sin t), t in [0, pi]; t > arccos(1 - delta) is infeasible
        tmax = math.acos(max(-1.0, 1.0 - delta)) if n > 1 else 0.0
        if n == 1:
            C = np.zeros((1, 1))
            W = np.zeros((1, 1))
        else:
            C = np.array([[tmax / 2]])
            W = np.array([[tmax / 2]])
    else:
        C = np.array([[0.5, 0.0, 0.5 if n > 1 else 0.0]])
        W = np.array([[0.5, 1.0, 0.5 if n > 1 else 0.0]])
    while len(C):
        if spherical:
            t = C[:, 0]
            rho, f1, f2 = np.ones(len(t)), np.cos(t), np.sin(t)
            rad = W[:, 0]
            feas = np.cos(t) >= 1.0 - delta
        else:
            rho, f1, f2 = C[:, 0], C[:, 1], C[:, 2]
            rad = np.maximum(W[:, 0], np.hypot(W[:, 1], W[:, 2]))
            feas = (rho <= 1) & (np.hypot(f1, f2) <= 1) & (rho * f1 >= 1.0 - delta)
        processed += len(C)
        Xc, Fc = embed(rho, f1, f2)
        d, _ = _euclidean_batch(Xc, Fc)
        if feas.any():
            k = int(np.argmax(np.where(feas, d, -np.inf)))
            if d[k] > lb:
                lb = float(d[k])
                lb_pair = (Xc[k].copy(), Fc[k].copy())
        bound = d + rad
        stop = target if target is not None else lb + h
        fin = bound <= stop
        tiny = ~fin & (rad < min_radius)
        if processed > max_cells:
            tiny = ~fin
            exhausted = True
        closing = fin | tiny
        if closing.any():
            done_max = max(done_max, float(bound[closing].max()))
            max_rad = max(max_rad, float(rad[closing].max()))
            floor_hit |= bool(tiny.any())
        C, W = C[~closing], W[~closing]
        if not len(C):
            break
        ax = np.argmax(W, axis=1)
        rows = np.arange(len(C))
        W = W.copy()
        W[rows, ax] /= 2
        C1, C2 = C.copy(), C.copy()
        C1[rows, ax] -= W[rows, ax]
        C2[rows, ax] += W[rows, ax]
        C = np.vstack([C1, C2])
        W = np.vstack([W, W])
        if spherical:
            keep = C[:, 0] - W[:, 0] <= tmax + 1e-12
        else:
            rl, ru = C[:, 0] - W[:, 0], C[:, 0] + W[:, 0]
            al, au = C[:, 1] - W[:, 1], C[:, 1] + W[:, 1]
            bl = np.maximum(C[:, 2] - W[:, 2], 0.0)
            near = np.hypot(np.clip(0.0, al, au), bl)
            pmax = np.maximum(np.maximum(rl * al, rl * au), np.maximum(ru * al, ru * au))
            keep = (near <= 1 + 1e-12) & (pmax >= 1.0 - delta - 1e-12)
        C, W = C[keep], W[keep]
    stats = {
        "cells_processed": processed,
        "exhausted": exhausted,
        "radius_floor_hit": floor_hit,
        "max_final_radius": max_rad,
    }
    return max(done_max, 0.0), lb, lb_pair, stats


def phi_upper_certified(
    S: NormedSpace,
    delta: float,
    spherical: bool = False,
    mesh: float | None = None,
    target: float | None = None,
    max_cells: int = 20_000_000,
    seed_lower: ModulusEstimate | None = None,
) -> ModulusEstimate:
    """Certified upper bound on Φ(δ) (or the spherical modulus) by adaptive covering.

    ``mesh`` is the tolerance h: refinement stops once every cell bound is
    at most (best lower bound + h), or at most ``target`` when one is given.
    The returned ``grid_upper`` is the maximum cell bound, a rigorous upper
    bound up to floating-point rounding.  Passing the result of
    :func:`phi_lower` as ``seed_lower`` starts refinement from its (attained)
    lower bound, which lets the covering stop earlier.
    """
    delta = _check_delta(delta)
    if delta > MAX_CERT_DELTA:
        raise OutOfDomain(f"certified runs are limited to delta <= {MAX_CERT_DELTA}")
    if S.dim > 3:
        raise UnsupportedSpace("certified bounds need dimension at most 3")
    if mesh is None:
        mesh = 0.02 if S.dim <= 2 else 0.05
    h = float(mesh)
    if not h > 0:
        raise BadParameter("mesh must be positive")
    min_radius = h / 64
    if isinstance(S, Euclidean):
        runner = _certify_euclidean
    elif S.poly is not None:
        runner = _certify_polyhedral
    else:
        raise UnsupportedSpace(f"no certified covering for {S!r}")
    if seed_lower is not None and (seed_lower.delta != delta or seed_lower.spherical != spherical):
        raise BadParameter("seed_lower was computed for a different problem")
    seeded = seed_lower if seed_lower is not None and seed_lower.witness is not None else None
    lb0 = seeded.lower if seeded is not None else -np.inf
    grid, lb, lb_pair, stats = runner(S, delta, spherical, h, target, max_cells, min_radius, lb0)
    cap = math.sqrt(2 * delta)
    candidates = []
    if lb_pair is not None:
        candidates.append(lb_pair)
    if seeded is not None:
        candidates.append((seeded.witness.x, seeded.witness.f))
    for x, f in seed_pairs(S, delta, spherical):
        candidates.append((x, f))
    best, best_pair = -np.inf, None
    for x, f in candidates:
        if float(np.dot(x, f)) < 1 - delta - FEAS_TOL:
            continue
        d, _ = pi_distances(S, x[None, :], f[None, :])
        if d[0] > best:
            best, best_pair = float(d[0]), (x, f)
    if best_pair is None:
        raise BudgetTooSmall("no feasible pair found")
    d, nearest = dist_to_pi(S, *best_pair)
    upper = min(grid, cap)
    lower = min(d, upper)
    return ModulusEstimate(
        delta=delta,
        spherical=spherical,
        lower=lower,
        upper=upper,
        witness=BpbPoint(best_pair[0], best_pair[1], delta, spherical),
        witness_distance=d,
        mesh=h,
        certified=True,
        grid_upper=grid,
        vacuous=bool(grid >= cap and d < cap - h),
        nearest=nearest,
        stats=stats,
    )


def can_certify(S: NormedSpace, delta: float) -> bool:
    return delta <= MAX_CERT_DELTA and S.dim <= 3 and has_exact_distance(S)


def estimate_phi(
    S: NormedSpace,
    delta: float,
    spherical: bool = False,
    certify: bool = True,
    mesh: float | None = None,
    budget: int | None = None,
    seed: int = 0,
) -> ModulusEstimate:
    """Search lower bound, then (when possible) a certified upper bound.

    The better of the two witnesses is kept.  Without a covering the upper
    bound is the universal cap √(2δ).
    """
    low = phi_lower(S, delta, spherical, budget=budget, seed=seed)
    if not (certify and can_certify(S, low.delta)):
        return low
    up = phi_upper_certified(S, low.delta, spherical, mesh=mesh, seed_lower=low)
    if up.lower < low.lower:
        up.lower, up.witness, up.witness_distance, up.nearest = (
            low.lower, low.witness, low.witness_distance, low.nearest)
    return up


def phi_curve(
    S: NormedSpace,
    deltas,
    spherical: bool = False,
    certify: bool = False,
    mesh: float | None = None,
    budget: int | None = None,
    seed: int = 0,
) -> list[ModulusEstimate]:
    """Estimates over a grid of δ with monotone post-processing.

    Φ is non-decreasing in δ, so a lower bound at δ1 is one at every δ2 > δ1
    and an upper bound at δ2 is one at every δ1 < δ2; the running maximum
    of lowers and running minimum of uppers are therefore still valid.
    """
    deltas = [_check_delta(d) for d in deltas]
    order = np.argsort(deltas, kind="stable")
    out: list[ModulusEstimate | None] = [None] * len(deltas)
    for i in order:
        out[i] = estimate_phi(S, deltas[i], spherical, certify=certify, mesh=mesh, budget=budget, seed=seed)
    run = -math.inf
    for i in order:
        run = max(run, out[i].lower)
        out[i].lower = run
    run = math.inf
    for i in order[::-1]:
        run = min(run, out[i].upper)
        out[i].upper = run
    return out
