"""Norm-attaining pairs and the distance from a pair (x, f) to that set.

For a polyhedral space the norm-attaining pairs are the union of E x Ê over
proper faces E of the unit ball, Ê being the conjugate face of the dual
ball.  The distance in the max-metric therefore splits into one primal and
one dual face distance per face pair.  Euclidean spaces use a closed form.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BadParameter, DimensionMismatch, UnsupportedSpace
from .geometry import as_vector, nearest_on_face
from .spaces import DirectSum, Euclidean, NormedSpace

TOL = 1e-9


@dataclass(frozen=True)
class NormingPair:
    """A pair (x, f) with ‖x‖ = ‖f‖* = ⟨f, x⟩ = 1."""

    x: np.ndarray
    f: np.ndarray

    def check(self, S: NormedSpace, tol: float = TOL) -> bool:
        return (
            abs(S.norm(self.x) - 1) <= tol
            and abs(S.dual_norm(self.f) - 1) <= tol
            and abs(float(self.f @ self.x) - 1) <= tol
        )


@dataclass(frozen=True)
class BpbPoint:
    """A pair from the ball product with ⟨f, x⟩ ≥ 1 − δ (closed version)."""

    x: np.ndarray
    f: np.ndarray
    delta: float
    spherical: bool = False

    def check(self, S: NormedSpace, tol: float = TOL) -> bool:
        nx, nf = S.norm(self.x), S.dual_norm(self.f)
        ok = nx <= 1 + tol and nf <= 1 + tol and float(self.f @ self.x) >= 1 - self.delta - tol
        if self.spherical:
            ok = ok and abs(nx - 1) <= tol and abs(nf - 1) <= tol
        return bool(ok)


@dataclass(frozen=True)
class PiDecomposition:
    """Conjugate face pairs (E, Ê) as vertex arrays, or a parametric description."""

    pairs: tuple[tuple[np.ndarray, np.ndarray], ...] = ()
    face_ids: tuple[tuple[int, int], ...] = ()
    parametric: str | None = None


def _is_euclidean(S: NormedSpace) -> bool:
    return isinstance(S, Euclidean)


def _require_supported(S: NormedSpace) -> None:
    if S.poly is None and not _is_euclidean(S):
        raise UnsupportedSpace(f"no exact distance to norming pairs for {S!r}")


def pi_decomposition(S: NormedSpace) -> PiDecomposition:
    if _is_euclidean(S):
        return PiDecomposition(parametric="{(z, z) : |z|_2 = 1}")
    _require_supported(S)
    poly = S.poly
    V, W = poly.ball.vertices, poly.polar.vertices
    pairs, ids = [], []
    for i, face in enumerate(poly.lattice.faces):
        conj = poly.lattice.dual.faces[face.conjugate]
        pairs.append((V[list(face.vertices)], W[list(conj.vertices)]))
        ids.append((i, face.conjugate))
    return PiDecomposition(tuple(pairs), tuple(ids))


def face_pair_tables(S: NormedSpace, X, F) -> tuple[np.ndarray, np.ndarray]:
    """Primal and dual face distance tables aligned by face pair."""
    poly = S.poly
    conj = np.array([face.conjugate for face in poly.lattice.faces])
    return poly.primal_table.distances(X), poly.dual_table.distances(F)[:, conj]


def pi_distances(S: NormedSpace, X, F) -> tuple[np.ndarray, np.ndarray]:
    """Distances from the pairs (X[i], F[i]) to the norming pairs.

    Returns the distances and, for polyhedral spaces, the index of the face
    pair attaining the minimum (lowest index on ties); Euclidean spaces
    return -1 there.
    """
    X = np.atleast_2d(np.asarray(X, dtype=float))
    F = np.atleast_2d(np.asarray(F, dtype=float))
    if X.shape != F.shape or X.shape[1] != S.dim:
        raise DimensionMismatch(f"expected two (m, {S.dim}) arrays")
    if _is_euclidean(S):
        d, _ = _euclidean_batch(X, F)
        return d, np.full(len(d), -1)
    _require_supported(S)
    Dx, Df = face_pair_tables(S, X, F)
    M = np.maximum(Dx, Df)
    k = np.argmin(M, axis=1)
    return M[np.arange(len(k)), k], k


def dist_to_pi(S: NormedSpace, x, f) -> tuple[float, NormingPair]:
    """Distance from (x, f) to the norming pairs of S, with a nearest pair."""
    x = as_vector(x, S.dim)
    f = as_vector(f, S.dim)
    if _is_euclidean(S):
        return dist_to_pi_euclidean(S.dim, x, f)
    d, k = pi_distances(S, x[None, :], f[None, :])
    poly = S.poly
    face = poly.lattice.faces[int(k[0])]
    conj = poly.lattice.dual.faces[face.conjugate]
    _, y = nearest_on_face(x, poly.ball.vertices[list(face.vertices)], poly.ball)
    _, g = nearest_on_face(f, poly.polar.vertices[list(conj.vertices)], poly.polar)
    return float(d[0]), NormingPair(y, g)


def _plane_frames(X: np.ndarray, F: np.ndarray):
    """Orthonormal e1, e2 per row with X in span{e1} and F in span{e1, e2}."""
    m, n = X.shape
    nx = np.linalg.norm(X, axis=1)
    nf = np.linalg.norm(F, axis=1)
    e1 = np.zeros_like(X)
    e1[:, 0] = 1.0
    use_x = nx > 0
    use_f = ~use_x & (nf > 0)
    e1[use_x] = X[use_x] / nx[use_x, None]
    e1[use_f] = F[use_f] / nf[use_f, None]
    if n == 1:
        return e1, None
    r = F - np.sum(F * e1, axis=1)[:, None] * e1
    nr = np.linalg.norm(r, axis=1)
    flat = nr <= 1e-15 * np.maximum(1.0, nf)
    # any unit vector orthogonal to e1 for rows where F is parallel to X
    basis = np.eye(n)[np.argmin(np.abs(e1), axis=1)]
    alt = basis - np.sum(basis * e1, axis=1)[:, None] * e1
    alt /= np.linalg.norm(alt, axis=1)[:, None]
    e2 = np.where(flat[:, None], alt, r / np.where(flat, 1.0, nr)[:, None])
    return e1, e2


def _euclidean_batch(X: np.ndarray, F: np.ndarray):
    """Closed-form minimum of max(|x - z|, |f - z|) over unit vectors z."""
    m, n = X.shape
    e1, e2 = _plane_frames(X, F)
    a = np.sum(X * X, axis=1)
    b = np.sum(F * F, axis=1)
    x1 = np.sum(X * e1, axis=1)
    f1 = np.sum(F * e1, axis=1)
    if e2 is None:
        cands = np.stack([np.zeros(m), np.full(m, math.pi)], axis=1)
        f2 = np.zeros(m)
    else:
        f2 = np.sum(F * e2, axis=1)
        A = 2 * (f1 - x1)
        B = 2 * f2
        C = b - a
        R = np.hypot(A, B)
        phi = np.arctan2(B, A)
        ratio = np.clip(C / np.where(R > 0, R, 1.0), -1.0, 1.0)
        spread = np.arccos(ratio)
        valid = (R > 0) & (np.abs(C) <= R * (1 + 1e-12))
        tie1 = np.where(valid, phi + spread, 0.0)
        tie2 = np.where(valid, phi - spread, 0.0)
        cands = np.stack([np.zeros(m), np.arctan2(f2, f1), tie1, tie2], axis=1)
    c, s = np.cos(cands), np.sin(cands)
    g1 = a[:, None] + 1 - 2 * x1[:, None] * c
    g2 = b[:, None] + 1 - 2 * (f1[:, None] * c + f2[:, None] * s)
    g = np.maximum(g1, g2)
    j = np.argmin(g, axis=1)
    rows = np.arange(m)
    d = np.sqrt(np.maximum(g[rows, j], 0.0))
    Z = c[rows, j][:, None] * e1
    if e2 is not None:
        Z = Z + s[rows, j][:, None] * e2
    return d, Z


def dist_to_pi_euclidean(n: int, x, f) -> tuple[float, NormingPair]:
    x = as_vector(x, n)
    f = as_vector(f, n)
    d, Z = _euclidean_batch(x[None, :], f[None, :])
    z = Z[0] / np.linalg.norm(Z[0])
    return float(d[0]), NormingPair(z, z.copy())


def _unit_and_support(S: NormedSpace) -> tuple[np.ndarray, np.ndarray]:
    e = np.zeros(S.dim)
    e[0] = 1.0
    y = e / S.norm(e)
    return y, S.support_functional(y).functional


def _split_sum(S: NormedSpace, combiner: str) -> tuple[NormedSpace, NormedSpace]:
    if not isinstance(S, DirectSum) or S.combiner != combiner:
        raise BadParameter(f"expected an {combiner} direct sum, got {S!r}")
    head = S.parts[0]
    rest = S.parts[1:]
    tail = rest[0] if len(rest) == 1 else DirectSum(rest, combiner)
    return head, tail


def _check_witness_delta(delta: float) -> float:
    delta = float(delta)
    if not 0 < delta <= 0.5:
        raise BadParameter(f"the sum witness needs 0 < delta <= 1/2, got {delta}")
    return delta


def l1_sum_witness(S: NormedSpace, delta: float) -> BpbPoint:
    """Pair with pairing 1 − δ at distance √(2δ) from the norming pairs of Y ⊕₁ Z."""
    delta = _check_witness_delta(delta)
    Y, Z = _split_sum(S, "l1")
    y0, y0s = _unit_and_support(Y)
    z0, z0s = _unit_and_support(Z)
    r = math.sqrt(2 * delta)
    x = np.concatenate([(r / 2) * y0, (1 - r / 2) * z0])
    f = np.concatenate([(1 - r) * y0s, z0s])
    return BpbPoint(x, f, delta)


def linf_sum_witness(S: NormedSpace, delta: float) -> BpbPoint:
    """The dual construction of :func:`l1_sum_witness` for Y ⊕∞ Z."""
    delta = _check_witness_delta(delta)
    Y, Z = _split_sum(S, "linf")
    y0, y0s = _unit_and_support(Y)
    z0, z0s = _unit_and_support(Z)
    r = math.sqrt(2 * delta)
    x = np.concatenate([(1 - r) * y0, z0])
    f = np.concatenate([(r / 2) * y0s, (1 - r / 2) * z0s])
    return BpbPoint(x, f, delta)
