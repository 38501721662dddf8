"""Finite-dimensional normed spaces and the catalog of named examples."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import permutations, product

import numpy as np

from .errors import BadParameter, DimensionMismatch, UnknownSpace, ZeroVector
from .geometry import FaceDistanceTable, FaceLattice, SymmetricPolytope, as_vector, polar

SUPPORT_TOL = 1e-9


@dataclass(frozen=True)
class SupportResult:
    """A norm-one functional attaining the norm of a vector.

    ``face`` is the index of the exposed face of the dual ball (in the dual
    face lattice) for polyhedral spaces, or a short description otherwise.
    """

    face: int | str | None
    functional: np.ndarray


class Polyhedral:
    """Cached polyhedral data of a space whose unit ball is a polytope."""

    def __init__(self, ball: SymmetricPolytope):
        self.ball = ball
        self.lattice: FaceLattice = ball.lattice
        self.polar = polar(ball)
        self.primal_table = FaceDistanceTable(ball, self.lattice)
        self.dual_table = FaceDistanceTable(self.polar, self.lattice.dual)
        self._isometries: list[np.ndarray] | None = None

    @property
    def isometries(self) -> list[np.ndarray]:
        """Signed permutation matrices mapping the ball onto itself.

        Such a matrix T is orthogonal, so it also preserves the dual ball and
        maps the pair (x, f) to (Tx, Tf) isometrically.
        """
        if self._isometries is None:
            n = self.ball.dim
            V = self.ball.vertices
            found = []
            for perm in permutations(range(n)):
                for signs in product((1.0, -1.0), repeat=n):
                    T = np.zeros((n, n))
                    T[np.arange(n), perm] = signs
                    img = V @ T.T
                    gaps = np.max(np.abs(img[:, None, :] - V[None, :, :]), axis=2)
                    if np.all(gaps.min(axis=1) <= 1e-9):
                        found.append(T)
            self._isometries = found
        return self._isometries


class NormedSpace:
    """Base class: ℝⁿ with a norm, its dual norm and supporting functionals."""

    dim: int
    poly: Polyhedral | None = None

    def norms(self, X) -> np.ndarray:
        raise NotImplementedError

    def dual_norms(self, F) -> np.ndarray:
        raise NotImplementedError

    def dual(self) -> "NormedSpace":
        raise NotImplementedError

    def _support(self, x: np.ndarray) -> SupportResult:
        return _polyhedral_support(self.poly, x)

    def _check(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=float)
        if X.shape[-1] != self.dim:
            raise DimensionMismatch(f"expected dimension {self.dim}, got {X.shape[-1]}")
        return X

    def norm(self, x) -> float:
        return float(self.norms(as_vector(x, self.dim)[None, :])[0])

    def dual_norm(self, f) -> float:
        return float(self.dual_norms(as_vector(f, self.dim)[None, :])[0])

    def support_functional(self, x) -> SupportResult:
        x = as_vector(x, self.dim)
        if not np.any(x):
            raise ZeroVector("the zero vector has no supporting functional")
        return self._support(x)

    @property
    def is_polyhedral(self) -> bool:
        return self.poly is not None

    @property
    def isometries(self) -> list[np.ndarray] | None:
        return self.poly.isometries if self.poly is not None else None


def _polyhedral_support(poly: Polyhedral, x: np.ndarray) -> SupportResult:
    # Centroid of all maximizing facet normals: deterministic and independent
    # of facet ordering.  It lies in the exposed face of the dual ball.
    N = poly.ball.normals
    vals = N @ x
    top = vals.max()
    hits = np.flatnonzero(vals >= top - SUPPORT_TOL * max(1.0, abs(top)))
    f = N[hits].mean(axis=0)
    try:
        face = poly.lattice.dual.index(hits)
    except Exception:
        face = None
    return SupportResult(face, f)


class Line(NormedSpace):
    dim = 1

    def __init__(self):
        self.poly = Polyhedral(SymmetricPolytope([[1.0], [-1.0]]))

    def norms(self, X):
        return np.abs(self._check(X)[..., 0])

    def dual_norms(self, F):
        return self.norms(F)

    def dual(self):
        return Line()

    def _support(self, x):
        return _polyhedral_support(self.poly, x)

    def __repr__(self):
        return "Line()"


def _conjugate_exponent(p: float) -> float:
    if p == 1:
        return math.inf
    if math.isinf(p):
        return 1.0
    return p / (p - 1.0)


def _cube(n: int) -> np.ndarray:
    return np.array(list(product((1.0, -1.0), repeat=n)))


def _cross(n: int) -> np.ndarray:
    eye = np.eye(n)
    return np.vstack([eye, -eye])


class LpSpace(NormedSpace):
    """ℓp norm on ℝⁿ, 1 ≤ p ≤ ∞."""

    def __init__(self, p: float, n: int):
        p = _parse_p(p)
        n = _parse_dim(n)
        self.p = p
        self.dim = n
        if n <= 4 and (p == 1 or math.isinf(p)):
            self.poly = Polyhedral(SymmetricPolytope(_cross(n) if p == 1 else _cube(n)))

    def norms(self, X):
        return np.linalg.norm(self._check(X), ord=self.p, axis=-1)

    def dual_norms(self, F):
        return np.linalg.norm(self._check(F), ord=_conjugate_exponent(self.p), axis=-1)

    def dual(self):
        q = _conjugate_exponent(self.p)
        return Euclidean(self.dim) if q == 2 else LpSpace(q, self.dim)

    def _support(self, x):
        p = self.p
        if p == 1:
            return SupportResult("sign pattern", np.sign(x))
        a = np.abs(x)
        if math.isinf(p):
            top = a.max()
            hits = a >= top - SUPPORT_TOL * top
            f = np.where(hits, np.sign(x), 0.0) / hits.sum()
            return SupportResult("maximal coordinates", f)
        nx = np.linalg.norm(x, ord=p)
        return SupportResult("duality map", np.sign(x) * (a / nx) ** (p - 1.0))

    def __repr__(self):
        return f"LpSpace(p={self.p}, n={self.dim})"


class Euclidean(LpSpace):
    def __init__(self, n: int = 2):
        super().__init__(2.0, n)

    def dual(self):
        return Euclidean(self.dim)

    def _support(self, x):
        return SupportResult("x / |x|", x / np.linalg.norm(x))

    def __repr__(self):
        return f"Euclidean(n={self.dim})"


class Polytopal(NormedSpace):
    """Space whose unit ball is a given symmetric polytope."""

    def __init__(self, ball: SymmetricPolytope):
        self.dim = ball.dim
        self.poly = Polyhedral(ball)

    @property
    def ball(self) -> SymmetricPolytope:
        return self.poly.ball

    def norms(self, X):
        return np.max(self._check(X) @ self.poly.ball.normals.T, axis=-1)

    def dual_norms(self, F):
        return np.max(self._check(F) @ self.poly.ball.vertices.T, axis=-1)

    def dual(self):
        return Polytopal(self.poly.polar)

    def __repr__(self):
        return f"Polytopal({self.poly.ball!r})"


def diamond_points(eps: float) -> np.ndarray:
    """The eleven points whose absolute convex hull is the diamond ball."""
    e = float(eps)
    return np.array(
        [
            [0.0, 0.0, 0.75],
            [1 - e, 1.0, e / 2],
            [1 - e, -1.0, e / 2],
            [e - 1, 1.0, e / 2],
            [e - 1, -1.0, e / 2],
            [1.0, 1 - e, e / 2],
            [-1.0, 1 - e, e / 2],
            [1.0, e - 1, e / 2],
            [-1.0, e - 1, e / 2],
            [1.0, 1.0, 0.0],
            [1.0, -1.0, 0.0],
        ]
    )


class Diamond(Polytopal):
    """ℝ³ normed by the symmetric hull of :func:`diamond_points`, 0 < ε < 1."""

    def __init__(self, eps: float):
        eps = float(eps)
        if not 0.0 < eps < 1.0:
            raise BadParameter(f"diamond parameter must lie in (0, 1), got {eps}")
        self.eps = eps
        super().__init__(SymmetricPolytope(diamond_points(eps), symmetrize=True))

    def __repr__(self):
        return f"Diamond(eps={self.eps})"


COMBINERS = ("l1", "linf")


class DirectSum(NormedSpace):
    """ℓ₁ or ℓ∞ direct sum of spaces, coordinates concatenated in order.

    When every part is polyhedral the unit ball is materialized as a polytope
    (vertex set built from the parts' vertices), provided the total
    dimension is at most 4.
    """

    def __init__(self, parts, combiner: str):
        if combiner not in COMBINERS:
            raise BadParameter(f"combiner must be one of {COMBINERS}")
        parts = [p if isinstance(p, NormedSpace) else catalog(p) for p in parts]
        if len(parts) < 2:
            raise BadParameter("a direct sum needs at least two parts")
        self.parts = tuple(parts)
        self.combiner = combiner
        self.dim = sum(p.dim for p in parts)
        self._cuts = np.cumsum([0] + [p.dim for p in parts])
        if self.dim <= 4 and all(p.is_polyhedral for p in parts):
            self.poly = Polyhedral(SymmetricPolytope(self._materialize()))

    def _materialize(self) -> np.ndarray:
        blocks = [p.poly.ball.vertices for p in self.parts]
        if self.combiner == "l1":
            rows = []
            for i, B in enumerate(blocks):
                Z = np.zeros((B.shape[0], self.dim))
                Z[:, self._cuts[i] : self._cuts[i + 1]] = B
                rows.append(Z)
            return np.vstack(rows)
        return np.array([np.concatenate(c) for c in product(*blocks)])

    def _split(self, X):
        return [X[..., self._cuts[i] : self._cuts[i + 1]] for i in range(len(self.parts))]

    def norms(self, X):
        vals = np.stack([p.norms(b) for p, b in zip(self.parts, self._split(self._check(X)))])
        return vals.sum(axis=0) if self.combiner == "l1" else vals.max(axis=0)

    def dual_norms(self, F):
        vals = np.stack([p.dual_norms(b) for p, b in zip(self.parts, self._split(self._check(F)))])
        return vals.max(axis=0) if self.combiner == "l1" else vals.sum(axis=0)

    def dual(self):
        other = "linf" if self.combiner == "l1" else "l1"
        return DirectSum([p.dual() for p in self.parts], other)

    def _support(self, x):
        if self.poly is not None:
            return _polyhedral_support(self.poly, x)
        blocks = self._split(x)
        sizes = np.array([p.norm(b) for p, b in zip(self.parts, blocks)])
        if self.combiner == "l1":
            active = sizes > 0
            weights = active.astype(float)
        else:
            active = sizes >= sizes.max() * (1 - SUPPORT_TOL)
            weights = active / active.sum()
        f = np.concatenate(
            [
                w * p.support_functional(b).functional if a else np.zeros(p.dim)
                for p, b, a, w in zip(self.parts, blocks, active, weights)
            ]
        )
        return SupportResult("componentwise", f)

    def __repr__(self):
        return f"DirectSum({list(self.parts)!r}, {self.combiner!r})"


def _parse_p(p) -> float:
    if isinstance(p, str):
        p = math.inf if p.strip().lower() in ("inf", "infinity", "∞") else float(p)
    p = float(p)
    if not p >= 1.0:
        raise BadParameter(f"p must be at least 1, got {p}")
    return p


def _parse_dim(n) -> int:
    if isinstance(n, float) and not n.is_integer():
        raise BadParameter(f"dimension must be a positive integer, got {n}")
    n = int(n)
    if n < 1:
        raise BadParameter(f"dimension must be a positive integer, got {n}")
    return n


CATALOG_NAMES = ("line", "linf2", "l1-2", "lp", "euclidean", "l1sum", "linfsum", "diamond")


def catalog(name: str, **params) -> NormedSpace:
    """Build a named space.

    ``lp`` takes ``p`` and ``n``; ``euclidean`` takes ``n`` (default 2);
    ``l1sum``/``linfsum`` take ``parts`` (names or spaces, default two lines);
    ``diamond`` takes ``eps`` in (0, 1).
    """
    if name == "line":
        return Line()
    if name == "linf2":
        return LpSpace(math.inf, 2)
    if name == "l1-2":
        return LpSpace(1, 2)
    if name == "lp":
        p = _parse_p(params.get("p", 2))
        n = _parse_dim(params.get("n", 2))
        return Euclidean(n) if p == 2 else LpSpace(p, n)
    if name == "euclidean":
        return Euclidean(_parse_dim(params.get("n", 2)))
    if name in ("l1sum", "linfsum"):
        parts = params.get("parts", ["line", "line"])
        return DirectSum(parts, "l1" if name == "l1sum" else "linf")
    if name == "diamond":
        if "eps" not in params:
            raise BadParameter("diamond needs eps")
        return Diamond(params["eps"])
    raise UnknownSpace(name)


def norm(S: NormedSpace, x) -> float:
    return S.norm(x)


def dual_norm(S: NormedSpace, f) -> float:
    return S.dual_norm(f)


def support_functional(S: NormedSpace, x) -> SupportResult:
    return S.support_functional(x)


def dual_space(S: NormedSpace) -> NormedSpace:
    return S.dual()
