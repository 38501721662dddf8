from itertools import combinations

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog
from scipy.spatial import ConvexHull

from bpbmod.errors import DegeneratePolytope, DimensionMismatch, InvalidFace, InvalidPolytope
from bpbmod.geometry import (
    FaceDistanceTable,
    SymmetricPolytope,
    dist_to_face,
    face_conjugate,
    face_lattice,
    hull_facets,
    nearest_on_face,
    polar,
)
from bpbmod.spaces import diamond_points

SQUARE = [[1, 1], [1, -1], [-1, 1], [-1, -1]]
CROSS2 = [[1, 0], [-1, 0], [0, 1], [0, -1]]
CROSS3 = np.vstack([np.eye(3), -np.eye(3)])


def catalog_polytopes():
    cube3 = np.array([[a, b, c] for a in (1, -1) for b in (1, -1) for c in (1, -1)], dtype=float)
    return {
        "square": SymmetricPolytope(SQUARE),
        "cross2": SymmetricPolytope(CROSS2),
        "cross3": SymmetricPolytope(CROSS3),
        "cube3": SymmetricPolytope(cube3),
        "diamond-0.25": SymmetricPolytope(diamond_points(0.25), symmetrize=True),
        "diamond-0.5": SymmetricPolytope(diamond_points(0.5), symmetrize=True),
        "diamond-0.75": SymmetricPolytope(diamond_points(0.75), symmetrize=True),
        "hexagon": SymmetricPolytope([[1, 0], [0.5, 0.9], [-0.5, 0.9], [-1, 0], [-0.5, -0.9], [0.5, -0.9]]),
    }


def rows_as_set(A, digits=9):
    return {tuple(np.round(r, digits) + 0.0) for r in np.asarray(A)}


def brute_force_normals(V):
    """Fit a plane through every triple of vertices and keep the one-sided ones."""
    found = set()
    for idx in combinations(range(len(V)), V.shape[1]):
        M = V[list(idx)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        nrm = np.linalg.solve(M, np.ones(V.shape[1]))
        if np.all(V @ nrm <= 1 + 1e-9):
            found.add(tuple(np.round(nrm, 9) + 0.0))
    return found


def lp_gauge(V, x):
    """min t such that x = V^T lam, lam >= 0, sum lam = t."""
    m = len(V)
    res = linprog(np.ones(m), A_eq=V.T, b_eq=x, bounds=[(0, None)] * m, method="highs")
    assert res.status == 0
    return res.fun


class TestFacets:
    def test_square_normals(self):
        assert rows_as_set(SymmetricPolytope(SQUARE).normals) == {(1.0, 0.0), (-1.0, 0.0), (0.0, 1.0), (0.0, -1.0)}

    def test_cross_polytope_normals(self):
        assert rows_as_set(SymmetricPolytope(CROSS2).normals) == {(a, b) for a in (1.0, -1.0) for b in (1.0, -1.0)}

    def test_diamond_half_matches_brute_force_oracle(self):
        V = np.vstack([diamond_points(0.5), -diamond_points(0.5)])
        P = SymmetricPolytope(V)
        oracle = brute_force_normals(V)
        assert rows_as_set(P.normals) == oracle
        assert rows_as_set(polar(P).vertices) == oracle

    @pytest.mark.parametrize("name", list(catalog_polytopes()))
    def test_matches_qhull(self, name):
        P = catalog_polytopes()[name]
        eq = ConvexHull(P.vertices).equations
        normals = eq[:, :-1] / -eq[:, -1:]
        assert rows_as_set(P.normals, 7) == rows_as_set(normals, 7)

    @pytest.mark.parametrize("name", list(catalog_polytopes()))
    def test_incidence_and_symmetry(self, name):
        P = catalog_polytopes()[name]
        vals = P.normals @ P.vertices.T
        assert np.all(vals <= 1 + 1e-9)
        for facet in hull_facets(P):
            on = np.flatnonzero(np.abs(P.vertices @ facet.normal - 1) <= 1e-9)
            assert tuple(on) == facet.vertex_indices
            assert len(on) >= P.dim
            pts = P.vertices[list(on)]
            assert np.linalg.matrix_rank(pts[1:] - pts[0]) == P.dim - 1
        assert rows_as_set(P.normals) == rows_as_set(-P.normals)

    def test_hull_facets_accepts_arrays(self):
        assert len(hull_facets(np.array(SQUARE, dtype=float))) == 4

    def test_coplanar_clusters_are_merged(self):
        # the top facet of the 0.5-diamond through A_1 carries more than three vertices
        P = SymmetricPolytope(diamond_points(0.5), symmetrize=True)
        assert max(len(f.vertex_indices) for f in P.facets) > 3
        assert len(rows_as_set(P.normals)) == len(P.normals)


class TestValidation:
    def test_flat_polytope(self):
        with pytest.raises(DegeneratePolytope):
            SymmetricPolytope([[1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0]])

    def test_not_symmetric(self):
        with pytest.raises(InvalidPolytope):
            SymmetricPolytope([[1, 0], [0, 1], [-1, 0]])

    def test_redundant_vertex(self):
        with pytest.raises(InvalidPolytope):
            SymmetricPolytope(SQUARE + [[0.5, 0], [-0.5, 0]])

    def test_duplicates(self):
        with pytest.raises(InvalidPolytope):
            SymmetricPolytope(SQUARE + [[1, 1]])

    def test_non_finite(self):
        with pytest.raises(InvalidPolytope):
            SymmetricPolytope([[np.inf, 0], [-np.inf, 0], [0, 1], [0, -1]])


class TestPolar:
    def test_square_to_cross(self):
        assert SymmetricPolytope(CROSS2).same_vertex_set(polar(SymmetricPolytope(SQUARE)))

    def test_cross3_to_cube3(self):
        cube = [[a, b, c] for a in (1, -1) for b in (1, -1) for c in (1, -1)]
        assert polar(SymmetricPolytope(CROSS3)).same_vertex_set(SymmetricPolytope(cube))

    def test_diamond_polar_contains_l1_plane(self):
        W = rows_as_set(polar(SymmetricPolytope(diamond_points(0.5), symmetrize=True)).vertices)
        for v in [(1.0, 0.0, 0.0), (-1.0, 0.0, 0.0), (0.0, 1.0, 0.0), (0.0, -1.0, 0.0)]:
            assert v in W

    @pytest.mark.parametrize("name", list(catalog_polytopes()))
    def test_bipolar(self, name):
        P = catalog_polytopes()[name]
        assert polar(polar(P)).same_vertex_set(P, tol=1e-9)


class TestGauge:
    @pytest.mark.parametrize("name", list(catalog_polytopes()))
    def test_facet_gauge_matches_vertex_lp(self, name, rng):
        P = catalog_polytopes()[name]
        X = rng.normal(size=(1000, P.dim)) * rng.uniform(0.1, 3, size=(1000, 1))
        fast = P.gauge(X)
        slow = np.array([lp_gauge(P.vertices, x) for x in X])
        assert np.max(np.abs(fast - slow)) <= 1e-8

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            SymmetricPolytope(SQUARE).gauge([1, 2, 3])


class TestLattice:
    def test_square_counts(self):
        L = face_lattice(SymmetricPolytope(SQUARE))
        assert len(L.of_dim(0)) == 4 and len(L.of_dim(1)) == 4

    def test_square_conjugates(self):
        P = SymmetricPolytope(SQUARE)
        L = P.lattice
        W = polar(P).vertices
        right = [i for i, v in enumerate(P.vertices) if v[0] == 1]
        conj = L.dual.faces[face_conjugate(L, L.index(right))]
        assert conj.dim == 0
        assert np.allclose(W[conj.vertices[0]], [1, 0])
        corner = next(i for i, v in enumerate(P.vertices) if tuple(v) == (1, 1))
        conj = L.dual.faces[face_conjugate(L, L.index([corner]))]
        assert conj.dim == 1
        assert rows_as_set(W[list(conj.vertices)]) == {(1.0, 0.0), (0.0, 1.0)}

    @pytest.mark.parametrize("name", list(catalog_polytopes()))
    def test_conjugacy_is_antitone_bijection(self, name):
        P = catalog_polytopes()[name]
        L = P.lattice
        W = polar(P).vertices
        images = [face_conjugate(L, i) for i in range(len(L.faces))]
        assert sorted(images) == list(range(len(L.dual.faces)))
        for i, face in enumerate(L.faces):
            conj = L.dual.faces[images[i]]
            assert face.dim + conj.dim == P.dim - 1
            assert conj.conjugate == i
            pair = W[list(conj.vertices)] @ P.vertices[list(face.vertices)].T
            assert np.allclose(pair, 1.0, atol=1e-9)
        for i, a in enumerate(L.faces):
            for j, b in enumerate(L.faces):
                if set(a.vertices) < set(b.vertices):
                    assert set(L.dual.faces[images[j]].vertices) < set(L.dual.faces[images[i]].vertices)

    def test_diamond_facet_through_a2(self):
        P = SymmetricPolytope(diamond_points(0.5), symmetrize=True)
        L = P.lattice
        a2 = int(np.flatnonzero(np.all(np.isclose(P.vertices, [0.5, 1, 0.25]), axis=1))[0])
        W = polar(P).vertices
        facets = [i for i in L.of_dim(2) if a2 in L.faces[i].vertices]
        assert facets
        for i in facets:
            conj = L.dual.faces[face_conjugate(L, i)]
            assert conj.dim == 0
            assert np.allclose(P.vertices[list(L.faces[i].vertices)] @ W[conj.vertices[0]], 1.0)

    def test_invalid_face(self):
        L = SymmetricPolytope(SQUARE).lattice
        with pytest.raises(InvalidFace):
            face_conjugate(L, 99)
        with pytest.raises(InvalidFace):
            L.index([0, 3])


class TestFaceDistance:
    def test_horizontal_gap(self):
        P = SymmetricPolytope(SQUARE)
        assert dist_to_face([0, 1], [[1, 1], [1, -1]], P) == pytest.approx(1.0, abs=1e-12)

    def test_vertex_gap(self):
        P = SymmetricPolytope(SQUARE)
        x = [1 - np.sqrt(2 * 0.5), 1]
        assert dist_to_face(x, [[-1, 1]], P) == pytest.approx(1.0, abs=1e-12)

    def test_zero_on_face(self):
        P = SymmetricPolytope(diamond_points(0.5), symmetrize=True)
        face = P.vertices[list(P.facets[0].vertex_indices)]
        x = face.mean(axis=0)
        assert dist_to_face(x, face, P) <= 1e-9

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            dist_to_face([0, 1], [[1, 1, 0]], SymmetricPolytope(SQUARE))

    @pytest.mark.parametrize("name", ["square", "hexagon", "cross3", "diamond-0.5", "diamond-0.25"])
    def test_table_matches_lp(self, name, rng):
        P = catalog_polytopes()[name]
        table = FaceDistanceTable(P, P.lattice)
        X = rng.normal(size=(40, P.dim)) * 1.5
        D = table.distances(X)
        for j, face in enumerate(P.lattice.faces):
            E = P.vertices[list(face.vertices)]
            lp = [nearest_on_face(x, E, P)[0] for x in X]
            assert np.max(np.abs(D[:, j] - lp)) <= 1e-8

    @pytest.mark.parametrize("name", ["square", "cross3", "diamond-0.6"])
    def test_box_sup_bounds_sampled_values(self, name, rng):
        polys = catalog_polytopes()
        P = polys[name] if name in polys else SymmetricPolytope(diamond_points(0.6), symmetrize=True)
        table = FaceDistanceTable(P, P.lattice)
        c = rng.normal(size=(1, P.dim))
        w = np.full((1, P.dim), 0.2)
        sup = table.box_sup(c, w)[0]
        corners = np.array(np.meshgrid(*[[-1, 1]] * P.dim)).reshape(P.dim, -1).T
        inside = c + w * rng.uniform(-1, 1, size=(500, P.dim))
        vals = table.distances(np.vstack([inside, c + w * corners]))
        assert np.all(vals <= sup + 1e-12)
        # the bound is attained at a corner for each face
        assert np.allclose(table.distances(c + w * corners).max(axis=0), sup, atol=1e-12)


coord = st.floats(-2, 2, allow_nan=False)


@settings(max_examples=60, deadline=None)
@given(st.lists(coord, min_size=6, max_size=6), st.integers(0, 40))
def test_face_distance_is_lipschitz(vals, k):
    P = SymmetricPolytope(diamond_points(0.5), symmetrize=True)
    face = P.lattice.faces[k % len(P.lattice.faces)]
    E = P.vertices[list(face.vertices)]
    x, y = np.array(vals[:3]), np.array(vals[3:])
    assert abs(dist_to_face(x, E, P) - dist_to_face(y, E, P)) <= P.gauge(x - y) + 1e-8
