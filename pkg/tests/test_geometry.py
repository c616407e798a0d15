import pytest
from mpmath import mpf, sqrt

from schmidtgames.geometry import (
    Ball,
    HyperplaneSlab,
    ball_avoids_slab,
    ball_grid_points,
    dist_point_hyperplane,
    gram_schmidt_extend,
    mat_t_vec,
    mat_vec,
    min_norm_preimage,
    solve_linear,
    top_singular,
    v_dist,
    v_dot,
    v_norm,
    v_unit,
)
from schmidtgames.precision import to_real, vec


class TestBall:
    def test_positive_radius_required(self):
        with pytest.raises(ValueError):
            Ball((0, 0), 0)

    def test_contains_point_boundary(self):
        b = Ball((0,), 1)
        assert b.contains_point((1,))
        assert not b.contains_point((1.001,))

    def test_contains_ball_nested_and_not(self):
        outer = Ball((0, 0), 1)
        assert outer.contains_ball(Ball((0.5, 0), 0.5))
        assert not outer.contains_ball(Ball((0.6, 0), 0.5))

    def test_dim(self):
        assert Ball((1, 2, 3), 1).dim == 3


class TestHyperplaneSlab:
    def test_normalization_preserves_set(self):
        # {x : |2x - 4| <= 1} equals {x : |x - 2| <= 1/2}
        s = HyperplaneSlab((2,), 4, 1)
        assert s.normal == (mpf(1),)
        assert s.offset == mpf(2)
        assert s.epsilon == mpf("0.5")

    def test_zero_normal_rejected(self):
        with pytest.raises(ValueError):
            HyperplaneSlab((0, 0), 1, 0.1)

    def test_distance(self):
        s = HyperplaneSlab((0, 1), 0, 0.1)
        assert dist_point_hyperplane((5, 2), s) == mpf(2)

    def test_ball_avoids_slab(self):
        s = HyperplaneSlab((1, 0), 0, mpf("0.1"))
        assert ball_avoids_slab(Ball((1, 0), 0.5), s)
        # tangent within tolerance counts as intersecting
        assert not ball_avoids_slab(Ball((0.6, 0), 0.5), s)
        assert not ball_avoids_slab(Ball((0.3, 0), 0.5), s)


class TestLinearAlgebra:
    def test_solve_linear_roundtrip(self):
        rows = [[mpf(2), mpf(1)], [mpf(1), mpf(3)]]
        x = solve_linear(rows, (mpf(5), mpf(10)))
        assert v_dist(mat_vec(rows, x), (5, 10)) < mpf(10) ** -40

    def test_mat_t_vec_is_transpose_action(self):
        rows = [[mpf(1), mpf(2), mpf(3)], [mpf(4), mpf(5), mpf(6)]]
        y = (mpf(1), mpf(-1))
        assert mat_t_vec(rows, y) == (mpf(-3), mpf(-3), mpf(-3))

    def test_top_singular_diagonal(self):
        t, v = top_singular([[mpf(3), mpf(0)], [mpf(0), mpf(1)]])
        assert abs(t - 3) < mpf(10) ** -30
        assert abs(abs(v[0]) - 1) < mpf(10) ** -30

    def test_min_norm_preimage(self):
        # 1x2 system: x + 2y = 5; minimal-norm solution is (1, 2)
        rows = [[mpf(1), mpf(2)]]
        x = min_norm_preimage(rows, (mpf(5),))
        assert v_dist(x, (1, 2)) < mpf(10) ** -40

    def test_v_unit(self):
        u = v_unit((3, 4))
        assert abs(v_norm(u) - 1) < mpf(10) ** -50
        assert abs(u[0] - mpf(3) / 5) < mpf(10) ** -50


class TestGramSchmidtExtend:
    def test_extends_to_full_basis(self):
        basis = gram_schmidt_extend([(1, 1, 0)], 3)
        assert len(basis) == 3
        for i in range(3):
            for j in range(i, 3):
                expect = 1 if i == j else 0
                assert abs(v_dot(basis[i], basis[j]) - expect) < mpf(10) ** -40

    def test_dependent_vector_skipped(self):
        basis = gram_schmidt_extend([(1, 0), (2, 0)], 2)
        assert len(basis) == 2
        assert abs(v_dot(basis[0], basis[1])) < mpf(10) ** -40

    def test_empty_input_needs_ambient_dim(self):
        basis = gram_schmidt_extend([], 2, ambient_dim=3)
        assert len(basis) == 2
        assert all(len(b) == 3 for b in basis)

    def test_span_contains_input(self):
        v0 = vec((1, 2, 2))
        basis = gram_schmidt_extend([v0], 3)
        # v0 must be expressible in the basis: residual after projection = 0
        residual = list(v0)
        for b in basis:
            c = v_dot(residual, b)
            residual = [r - c * bi for r, bi in zip(residual, b)]
        assert v_norm(residual) < mpf(10) ** -40


class TestBallGridPoints:
    def test_all_points_inside(self):
        b = Ball((to_real("0.3"), to_real("-0.2")), to_real("0.5"))
        pts = ball_grid_points(b, divisor=4)
        assert all(v_dist(p, b.center) <= b.radius for p in pts)

    def test_count_1d(self):
        # pitch r/2: offsets -2..2 -> 5 points
        assert len(ball_grid_points(Ball((0,), 1), divisor=2)) == 5

    def test_deterministic_order(self):
        b = Ball((0, 0), 1)
        assert ball_grid_points(b, 3) == ball_grid_points(b, 3)
