"""Origin-symmetric polytopes in small dimension.

Vectors and functionals are plain float arrays paired by the standard inner
product.  A :class:`SymmetricPolytope` is given by its vertex list; facets,
the incidence matrix and the face lattice are derived from it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

import numpy as np
from scipy.optimize import linprog

from .errors import (
    BadParameter,
    DegeneratePolytope,
    DimensionMismatch,
    InvalidFace,
    InvalidPolytope,
)

INCIDENCE_TOL = 1e-9
DEGENERACY_TOL = 1e-12
DEDUP_TOL = 1e-7
MAX_DIM = 4


def as_vector(x, dim: int | None = None) -> np.ndarray:
    """Return ``x`` as a finite 1-D float array, checking its length."""
    arr = np.asarray(x, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.ndim != 1:
        raise DimensionMismatch(f"expected a 1-D coordinate array, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise ValueError("coordinates must be finite")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"expected dimension {dim}, got {arr.shape[0]}")
    return arr


def pairing(f, x) -> float:
    return float(np.dot(as_vector(f), as_vector(x)))


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class Facet:
    normal: np.ndarray
    vertex_indices: tuple[int, ...]


def _exact_pairs(A: np.ndarray) -> np.ndarray:
    """Snap rows that are negatives of each other (within tolerance) to exact negatives.

    The lexicographically larger row of each pair is kept, which keeps the
    result independent of row order and makes x -> -x an exact symmetry of
    every later floating-point computation.
    """
    A = A.copy()
    gaps = np.max(np.abs(A[:, None, :] + A[None, :, :]), axis=2)
    partner = np.argmin(gaps, axis=1)
    for i, j in enumerate(partner):
        if gaps[i, j] <= INCIDENCE_TOL and i != j and tuple(A[i]) > tuple(A[j]):
            A[j] = -A[i]
    return A + 0.0


def _facet_normals(V: np.ndarray) -> np.ndarray:
    """Brute-force facet normals of the symmetric hull of ``V`` (rows)."""
    m, n = V.shape
    idx = np.array(list(combinations(range(m), n)), dtype=int)
    M = V[idx]
    ok = np.abs(np.linalg.det(M)) > DEGENERACY_TOL
    if not ok.any():
        raise DegeneratePolytope("no affinely independent vertex subset")
    M = M[ok]
    normals = np.linalg.solve(M, np.ones((M.shape[0], n, 1)))[..., 0]
    one_sided = np.all(normals @ V.T <= 1.0 + INCIDENCE_TOL, axis=1)
    normals = normals[one_sided]
    kept: list[np.ndarray] = []
    for c in normals:
        if not kept or np.min(np.max(np.abs(np.asarray(kept) - c), axis=1)) > DEDUP_TOL:
            kept.append(c)
    out = _exact_pairs(np.asarray(kept))
    order = np.lexsort(np.round(out, 9).T[::-1])
    return out[order]


class SymmetricPolytope:
    """Origin-symmetric full-dimensional polytope given by its vertices.

    The constructor validates the vertex list (closed under negation,
    full-dimensional, irredundant) and enumerates the facets eagerly, so an
    instance is immutable once built.
    """

    def __init__(self, vertices, symmetrize: bool = False):
        V = np.asarray(vertices, dtype=float)
        if V.ndim != 2 or V.shape[0] < 2 or V.shape[1] < 1:
            raise InvalidPolytope("vertices must be a non-empty (m, n) array")
        if not np.all(np.isfinite(V)):
            raise InvalidPolytope("vertex coordinates must be finite")
        if V.shape[1] > MAX_DIM:
            raise BadParameter(f"dimension {V.shape[1]} exceeds {MAX_DIM}")
        if symmetrize:
            V = np.vstack([V, -V])
        gaps = np.max(np.abs(V[:, None, :] - V[None, :, :]), axis=2)
        np.fill_diagonal(gaps, np.inf)
        if np.min(gaps) <= INCIDENCE_TOL:
            raise InvalidPolytope("duplicate vertices")
        neg = np.max(np.abs(V[:, None, :] + V[None, :, :]), axis=2)
        if not np.all(np.min(neg, axis=1) <= INCIDENCE_TOL):
            raise InvalidPolytope("vertex set is not closed under negation")
        V = _exact_pairs(V)
        n = V.shape[1]
        if np.linalg.matrix_rank(V, tol=DEGENERACY_TOL) < n:
            raise DegeneratePolytope("vertices do not span the ambient space")
        normals = _facet_normals(V)
        incidence = np.abs(normals @ V.T - 1.0) <= INCIDENCE_TOL
        for j in range(V.shape[0]):
            touching = normals[incidence[:, j]]
            if touching.shape[0] == 0 or np.linalg.matrix_rank(touching, tol=1e-9) < n:
                raise InvalidPolytope(f"vertex {j} is not extreme")
        self._vertices = _frozen(V)
        self._normals = _frozen(normals)
        incidence.setflags(write=False)
        self._incidence = incidence
        self._facets = tuple(
            Facet(self._normals[k], tuple(int(i) for i in np.flatnonzero(incidence[k])))
            for k in range(normals.shape[0])
        )
        self._lattice: FaceLattice | None = None

    @property
    def vertices(self) -> np.ndarray:
        return self._vertices

    @property
    def dim(self) -> int:
        return self._vertices.shape[1]

    @property
    def normals(self) -> np.ndarray:
        """Facet normals, one per row, scaled so the support value is 1."""
        return self._normals

    @property
    def facets(self) -> tuple[Facet, ...]:
        return self._facets

    @property
    def incidence(self) -> np.ndarray:
        """Boolean (facets, vertices) incidence matrix."""
        return self._incidence

    @property
    def lattice(self) -> "FaceLattice":
        if self._lattice is None:
            self._lattice = _build_lattice(self)
        return self._lattice

    def gauge(self, x) -> np.ndarray | float:
        """Minkowski functional of the polytope (vectorized over rows)."""
        X = np.asarray(x, dtype=float)
        if X.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected dimension {self.dim}, got {X.shape[-1]}")
        vals = np.max(X @ self._normals.T, axis=-1)
        return float(vals) if X.ndim == 1 else vals

    def support(self, f) -> np.ndarray | float:
        """Support function max over the polytope of the pairing with ``f``."""
        F = np.asarray(f, dtype=float)
        if F.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected dimension {self.dim}, got {F.shape[-1]}")
        vals = np.max(F @ self._vertices.T, axis=-1)
        return float(vals) if F.ndim == 1 else vals

    def same_vertex_set(self, other: "SymmetricPolytope", tol: float = 1e-9) -> bool:
        if self._vertices.shape != other.vertices.shape:
            return False
        gaps = np.max(np.abs(self._vertices[:, None, :] - other.vertices[None, :, :]), axis=2)
        return bool(np.all(gaps.min(axis=1) <= tol) and np.all(gaps.min(axis=0) <= tol))

    def __repr__(self) -> str:
        return f"SymmetricPolytope(dim={self.dim}, vertices={len(self._vertices)}, facets={len(self._facets)})"


def hull_facets(P) -> list[Facet]:
    """Facets of a symmetric polytope (a :class:`SymmetricPolytope` or vertex array)."""
    if not isinstance(P, SymmetricPolytope):
        P = SymmetricPolytope(P)
    return list(P.facets)


def polar(P: SymmetricPolytope) -> SymmetricPolytope:
    """Polar polytope; its vertices are the facet normals of ``P`` in facet order."""
    return SymmetricPolytope(P.normals)


@dataclass(frozen=True)
class Face:
    dim: int
    vertices: tuple[int, ...]
    conjugate: int


@dataclass(eq=False)
class FaceLattice:
    """Proper faces of a polytope, each linked to its conjugate in the polar.

    ``dual`` is the lattice of the polar polytope, whose vertex indices refer
    to the facet order of the primal polytope.
    """

    faces: tuple[Face, ...]
    dual: "FaceLattice | None" = field(default=None, repr=False)

    def index(self, vertices) -> int:
        key = tuple(sorted(int(v) for v in vertices))
        for i, face in enumerate(self.faces):
            if face.vertices == key:
                return i
        raise InvalidFace(f"{key} is not a face")

    def of_dim(self, d: int) -> list[int]:
        return [i for i, face in enumerate(self.faces) if face.dim == d]


def _closure(generators: list[frozenset]) -> list[frozenset]:
    seen = set(generators)
    frontier = list(seen)
    while frontier:
        fresh = []
        for a in frontier:
            for g in generators:
                c = a & g
                if c and c not in seen:
                    seen.add(c)
                    fresh.append(c)
        frontier = fresh
    return list(seen)


def _affine_dim(points: np.ndarray) -> int:
    if len(points) == 1:
        return 0
    return int(np.linalg.matrix_rank(points[1:] - points[0], tol=1e-9))


def _build_lattice(P: SymmetricPolytope) -> FaceLattice:
    inc = P.incidence
    K, m = inc.shape
    primal = _closure([frozenset(np.flatnonzero(inc[k]).tolist()) for k in range(K)])
    dual = _closure([frozenset(np.flatnonzero(inc[:, j]).tolist()) for j in range(m)])
    W = P.normals

    def ordered(sets, pts):
        keyed = [(_affine_dim(pts[sorted(s)]), tuple(sorted(s))) for s in sets]
        keyed.sort()
        return keyed

    p_faces = ordered(primal, P.vertices)
    d_faces = ordered(dual, W)
    p_index = {verts: i for i, (_, verts) in enumerate(p_faces)}
    d_index = {verts: i for i, (_, verts) in enumerate(d_faces)}

    def conj_primal(verts):
        return tuple(int(k) for k in np.flatnonzero(np.all(inc[:, list(verts)], axis=1)))

    def conj_dual(verts):
        return tuple(int(j) for j in np.flatnonzero(np.all(inc[list(verts), :], axis=0)))

    n = P.dim
    pf, df = [], []
    for d, verts in p_faces:
        c = d_index[conj_primal(verts)]
        if d + d_faces[c][0] != n - 1:
            raise DegeneratePolytope("face conjugacy is not dimension-reversing")
        pf.append(Face(d, verts, c))
    for d, verts in d_faces:
        df.append(Face(d, verts, p_index[conj_dual(verts)]))
    lat = FaceLattice(tuple(pf))
    dlat = FaceLattice(tuple(df), lat)
    lat.dual = dlat
    return lat


def face_lattice(P: SymmetricPolytope) -> FaceLattice:
    return P.lattice


def face_conjugate(L: FaceLattice, face_id: int) -> int:
    """Index of the conjugate face in ``L.dual``."""
    if not isinstance(face_id, (int, np.integer)) or not 0 <= face_id < len(L.faces):
        raise InvalidFace(f"no proper face with id {face_id!r}")
    return L.faces[int(face_id)].conjugate


def nearest_on_face(x, E, ball: SymmetricPolytope) -> tuple[float, np.ndarray]:
    """Distance from ``x`` to conv(E) in the gauge of ``ball``, with a nearest point.

    Solved as the linear program  min t  s.t.  N(x - E^T lam) <= t,
    sum(lam) = 1, lam >= 0, where the rows of N are the facet normals.
    """
    n = ball.dim
    x = as_vector(x, n)
    E = np.atleast_2d(np.asarray(E, dtype=float))
    if E.shape[1] != n or E.shape[0] == 0:
        raise DimensionMismatch(f"face vertices must be (k, {n})")
    if E.shape[0] == 1:
        return float(ball.gauge(x - E[0])), E[0].copy()
    N = ball.normals
    k = E.shape[0]
    A_ub = np.hstack([-(N @ E.T), -np.ones((N.shape[0], 1))])
    b_ub = -(N @ x)
    A_eq = np.hstack([np.ones((1, k)), np.zeros((1, 1))])
    c = np.zeros(k + 1)
    c[-1] = 1.0
    bounds = [(0, None)] * k + [(None, None)]
    res = linprog(c, A_ub=A_ub, b_ub=b_ub, A_eq=A_eq, b_eq=[1.0], bounds=bounds, method="highs",
                  options={"primal_feasibility_tolerance": 1e-10, "dual_feasibility_tolerance": 1e-10})
    if res.status != 0:
        raise RuntimeError(f"face distance LP failed: {res.message}")
    lam = np.clip(res.x[:k], 0.0, None)
    lam /= lam.sum()
    y = lam @ E
    return float(ball.gauge(x - y)), y


def dist_to_face(x, E, ball: SymmetricPolytope) -> float:
    return nearest_on_face(x, E, ball)[0]


class FaceDistanceTable:
    """Exact distances from many points to every face of a polytope at once.

    For a face F of the ball B, the distance in the gauge of B is
    ``max(0, max_c <c, x> - h_F(c))`` where c runs over the facet normals of
    the Minkowski sum F + B, scaled to support value 1 on B.  Those normals
    are facet normals of B, plus (in dimension 3) cross products of an edge
    of F with an edge of B.  Extra candidates only give lower bounds, so a
    superset is harmless.  Dimension 4 falls back to linear programming.
    """

    CHUNK = 1 << 22

    def __init__(self, ball: SymmetricPolytope, lattice: FaceLattice):
        self.ball = ball
        self.lattice = lattice
        V = ball.vertices
        n = ball.dim
        self.exact = n <= 3
        face_sets = [set(face.vertices) for face in lattice.faces]
        edges = [face.vertices for face in lattice.faces if face.dim == 1]
        edge_dirs = np.array([V[b] - V[a] for a, b in edges]) if edges else np.zeros((0, n))
        blocks, offsets, heights = [], [], []
        start = 0
        for fs, face in zip(face_sets, lattice.faces):
            cands = [ball.normals]
            if n == 3 and face.dim >= 1 and len(edge_dirs):
                own = [V[b] - V[a] for a, b in edges if {a, b} <= fs]
                if own:
                    cross = np.cross(np.asarray(own)[:, None, :], edge_dirs[None, :, :]).reshape(-1, 3)
                    cross = cross[np.linalg.norm(cross, axis=1) > 1e-12]
                    if len(cross):
                        cross = np.vstack([cross, -cross])
                        cross = cross / ball.support(cross)[:, None]
                        cands.append(cross)
            C = np.vstack(cands)
            _, keep = np.unique(np.round(C, 10), axis=0, return_index=True)
            C = C[np.sort(keep)]
            blocks.append(C)
            heights.append(np.max(C @ V[list(face.vertices)].T, axis=1))
            offsets.append(start)
            start += C.shape[0]
        self.C = np.vstack(blocks)
        self.absC = np.abs(self.C)
        self.h = np.concatenate(heights)
        self.offsets = np.asarray(offsets)
        self.face_vertices = [V[list(face.vertices)] for face in lattice.faces]

    @property
    def n_faces(self) -> int:
        return len(self.offsets)

    def _reduce(self, vals: np.ndarray) -> np.ndarray:
        return np.maximum(np.maximum.reduceat(vals, self.offsets, axis=1), 0.0)

    def _rows(self, m: int) -> int:
        return max(1, self.CHUNK // max(1, self.C.shape[0]))

    def distances(self, X) -> np.ndarray:
        """(m, faces) array of distances from the rows of ``X`` to each face."""
        X = np.atleast_2d(np.asarray(X, dtype=float))
        if not self.exact:
            return np.array([[dist_to_face(x, Fv, self.ball) for Fv in self.face_vertices] for x in X])
        out = np.empty((X.shape[0], self.n_faces))
        step = self._rows(X.shape[0])
        for s in range(0, X.shape[0], step):
            out[s : s + step] = self._reduce(X[s : s + step] @ self.C.T - self.h)
        return out

    def box_sup(self, centers, halfwidths) -> np.ndarray:
        """Exact maximum of each face distance over axis-aligned boxes."""
        if not self.exact:
            raise BadParameter("box bounds need dimension at most 3")
        Cn = np.atleast_2d(np.asarray(centers, dtype=float))
        W = np.atleast_2d(np.asarray(halfwidths, dtype=float))
        out = np.empty((Cn.shape[0], self.n_faces))
        step = self._rows(Cn.shape[0])
        for s in range(0, Cn.shape[0], step):
            vals = Cn[s : s + step] @ self.C.T + W[s : s + step] @ self.absC.T - self.h
            out[s : s + step] = self._reduce(vals)
        return out
