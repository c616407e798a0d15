import random

import pytest
from mpmath import mpf, sqrt

from schmidtgames.geometry import gram_schmidt_extend
from schmidtgames.minors import (
    EMPTY_MINOR,
    GridMinorEvaluator,
    LinearFormsPoint,
    MinorIndex,
    all_minor_indices,
    det_cofactor,
    det_elimination,
    grad_minor,
    grad_minor_matrix,
    grad_norm,
    interaction_matrix,
    level_norm,
    minor_determinant,
    minor_table,
    sup_Mv_bound,
)
from schmidtgames.precision import to_real, vec

TOL = mpf(10) ** -40


def standard_basis(n_vectors: int, ambient: int):
    return tuple(
        tuple(mpf(1 if i == j else 0) for i in range(ambient))
        for j in range(n_vectors)
    )


def random_point(rng, m, n):
    return LinearFormsPoint(
        tuple(
            tuple(to_real(f"{rng.uniform(-2, 2):.12f}") for _ in range(n))
            for _ in range(m)
        )
    )


def random_orthonormal(rng, n_vectors, ambient):
    seeds = [
        [to_real(f"{rng.gauss(0, 1):.12f}") for _ in range(ambient)]
        for _ in range(n_vectors)
    ]
    return gram_schmidt_extend(seeds, n_vectors, ambient_dim=ambient)


class TestMinorIndex:
    def test_sorted_and_validated(self):
        w = MinorIndex((2, 0), (1, 3))
        assert w.I == (0, 2) and w.J == (1, 3) and w.v == 2
        with pytest.raises(ValueError):
            MinorIndex((0, 0), (1, 2))
        with pytest.raises(ValueError):
            MinorIndex((0,), (1, 2))

    def test_counts(self):
        assert len(all_minor_indices(3, 2)) == 9  # C(3,2)^2
        assert all_minor_indices(2, 0) == [EMPTY_MINOR]


class TestDeterminants:
    def test_known_value(self):
        mat = [[mpf(1), mpf(2)], [mpf(3), mpf(4)]]
        assert det_cofactor(mat) == mpf(-2)
        assert abs(det_elimination(mat) - mpf(-2)) < TOL

    def test_cofactor_matches_elimination(self):
        rng = random.Random(5)
        for _ in range(10):
            mat = [
                [to_real(f"{rng.uniform(-3, 3):.10f}") for _ in range(4)]
                for _ in range(4)
            ]
            assert abs(det_cofactor(mat) - det_elimination(mat)) < TOL


class TestMinorValues:
    def test_1x1_family_vector_geometry(self):
        A = LinearFormsPoint(((mpf("0.7"),),))
        assert A.col_vector(0) == (mpf("0.7"), mpf(1))
        assert A.row_vector(0) == (mpf("0.7"), mpf(1))
        w = MinorIndex((0,), (0,))
        assert minor_determinant(A, standard_basis(1, 2), w) == mpf("0.7")
        assert minor_determinant(A, ((mpf(0), mpf(1)),), w) == mpf(1)

    def test_2x2_top_minor_is_matrix_determinant(self):
        # with the first two standard basis vectors, the 2x2 interaction
        # matrix is A^T, so the top minor equals det(A)
        A = LinearFormsPoint(((1, 2), (3, 4)))
        basis = standard_basis(2, 4)
        w = MinorIndex((0, 1), (0, 1))
        mat = interaction_matrix(A, basis, w)
        assert mat == [[mpf(1), mpf(3)], [mpf(2), mpf(4)]]
        assert minor_determinant(A, basis, w) == mpf(-2)

    def test_minor_table_norms(self):
        A = LinearFormsPoint(((1, 2), (3, 4)))
        table = minor_table(A, standard_basis(2, 4))
        assert table.norm(0) == mpf(1)
        assert abs(table.norm(1) - sqrt(mpf(30))) < TOL  # 1+9+4+16
        assert abs(table.norm(2) - 2) < TOL

    def test_level_norm_matches_table(self):
        rng = random.Random(0)
        A = random_point(rng, 2, 2)
        basis = random_orthonormal(rng, 2, 4)
        table = minor_table(A, basis)
        for v in range(3):
            assert abs(level_norm(A, basis, v) - table.norm(v)) < TOL

    def test_rows_family_uses_transpose_geometry(self):
        A = LinearFormsPoint(((1, 2), (3, 4)))
        basis = standard_basis(2, 4)
        w = MinorIndex((0, 1), (0, 1))
        assert minor_determinant(A, basis, w, family="rows") == mpf(-2)


class TestGradMinor:
    def test_matches_central_differences(self):
        rng = random.Random(11)
        h = mpf(10) ** -30
        for _ in range(5):
            A = random_point(rng, 2, 2)
            basis = random_orthonormal(rng, 2, 4)
            w = MinorIndex((0, 1), (0, 1))
            direction = [
                [to_real(f"{rng.uniform(-1, 1):.10f}") for _ in range(2)]
                for _ in range(2)
            ]
            analytic = grad_minor(A, basis, w, direction)

            def value(scale):
                shifted = LinearFormsPoint(
                    tuple(
                        tuple(
                            A.entries[u][v] + scale * direction[u][v]
                            for v in range(2)
                        )
                        for u in range(2)
                    )
                )
                return minor_determinant(shifted, basis, w)

            numeric = (value(h) - value(-h)) / (2 * h)
            assert abs(numeric - analytic) < mpf(10) ** -25

    def test_empty_minor_gradient_is_zero(self):
        A = LinearFormsPoint(((1, 2), (3, 4)))
        g = grad_minor_matrix(A, standard_basis(2, 4), EMPTY_MINOR)
        assert all(x == 0 for row in g for x in row)

    def test_gradient_norm_bound(self):
        # operator norm of the differential is at most v * level_norm(v-1)
        rng = random.Random(23)
        for _ in range(50):
            A = random_point(rng, 2, 2)
            basis = random_orthonormal(rng, 2, 4)
            for v in (1, 2):
                bound = v * level_norm(A, basis, v - 1)
                for w in all_minor_indices(2, v):
                    g = grad_minor_matrix(A, basis, w)
                    assert grad_norm(g) <= bound + TOL


class TestSupBound:
    def test_dominates_sampled_sup(self):
        rng = random.Random(3)
        A = random_point(rng, 2, 2)
        basis = random_orthonormal(rng, 2, 4)
        radius = mpf("0.3")
        bound = sup_Mv_bound(A, radius, basis, 2)
        for _ in range(40):
            shift = [
                [rng.uniform(-0.15, 0.15) for _ in range(2)] for _ in range(2)
            ]
            B = LinearFormsPoint(
                tuple(
                    tuple(A.entries[u][v] + to_real(f"{shift[u][v]:.10f}")
                          for v in range(2))
                    for u in range(2)
                )
            )
            assert level_norm(B, basis, 2) <= bound + TOL


class TestGridMinorEvaluator:
    def test_matches_exact_norms(self):
        import numpy as np

        rng = random.Random(9)
        basis = random_orthonormal(rng, 2, 4)
        evaluator = GridMinorEvaluator(basis, 2, 2)
        points = [random_point(rng, 2, 2) for _ in range(6)]
        arr = np.array(
            [[[float(x) for x in row] for row in p.entries] for p in points]
        )
        for v in range(3):
            norms = evaluator.level_norms(arr, v)
            for i, p in enumerate(points):
                exact = float(level_norm(p, basis, v))
                assert norms[i] == pytest.approx(exact, rel=1e-9, abs=1e-12)
