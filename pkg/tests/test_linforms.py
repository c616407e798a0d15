import pytest
from fractions import Fraction
from mpmath import mpf

from schmidtgames.geometry import Ball, DimensionExceeded
from schmidtgames.linforms import (
    Bad0Alice,
    CertificateWitness,
    ConstantsSchedule,
    EnumerationTooLarge,
    NoSolutionCertificate,
    StrategyPostconditionFailed,
    WindowParams,
    blocking_check,
    certificate_from_json,
    certify_no_solution,
    choose_R,
    enumerate_S,
    finite_minor_game,
    flatten_matrix,
    grid_points,
    integer_rank,
    point_from_flat,
    run_bad0,
    satisfies_list,
    window_params_from_opening,
)
from schmidtgames.minors import LinearFormsPoint
from schmidtgames.players import CenterShrinkBob, RandomBob


def w11(R=4):
    return WindowParams(m_rows=1, n_cols=1, R=R, beta="0.25", sigma=1, rho0="0.25")


ERR = mpf(10) ** -40


class TestWindowParams:
    def test_dimensions(self):
        W = w11()
        assert W.h_dim == 1
        assert W.l_dim == 2
        assert W.lam == Fraction(1, 2)

    def test_exact_window_constants(self):
        W = w11()
        assert abs(W.delta - mpf(4) ** -4) < ERR
        assert abs(W.delta_t - mpf(4) ** -4) < ERR
        assert abs(W.list1_bound(4) - 2) < ERR
        assert abs(W.list3_bound(4) - 4) < ERR
        assert abs(W.k_threshold(0) - mpf(4) ** -1) < ERR
        assert abs(W.h_threshold(0) - mpf(4) ** -2) < ERR
        assert abs(W.k_threshold(1) - mpf(4) ** -3) < ERR
        assert abs(W.observation_constant() - mpf(4) ** -10) < ERR

    def test_thresholds_interleave_strictly(self):
        W = w11()
        seq = []
        for i in range(5):
            seq.append(W.k_threshold(i))
            seq.append(W.h_threshold(i))
        assert all(a > b for a, b in zip(seq, seq[1:]))

    def test_r_must_exceed_one(self):
        with pytest.raises(ValueError):
            WindowParams(1, 1, R=1, beta="0.25", sigma=1, rho0="0.25")

    def test_from_opening(self):
        W = window_params_from_opening(1, 1, 4, "0.25", Ball((3,), "0.5"))
        assert abs(W.sigma - mpf("3.5")) < ERR
        assert W.rho0 == mpf("0.5")

    def test_part_two_gates_shape(self):
        gates = w11().part_two_gates(mpf(1) / 8192)
        assert set(gates) == {
            "R_pow_M_le_beta_nu_over_NsqrtN",
            "R_pow_M_le_rho0",
        }
        assert all(isinstance(v, bool) for v in gates.values())


class TestConstantsSchedule:
    def test_exact_values_dim1(self):
        s = ConstantsSchedule(dim=1, beta="0.25", sigma=1)
        assert s.eps1 == mpf("0.5")
        assert s.eps2 == mpf("0.25")
        assert abs(s.mu[0] - mpf(1) / 64) < ERR
        assert abs(s.nu[1] - mpf(1) / 8192) < ERR

    @pytest.mark.parametrize("dim", [1, 2, 3, 4])
    def test_interleaved_sequence_strictly_decreasing(self, dim):
        s = ConstantsSchedule(dim=dim, beta="0.25", sigma=1)
        seq = [s.nu[0]]
        for v in range(dim):
            seq.append(s.mu[v])
            seq.append(s.nu[v + 1])
        assert all(a > b for a, b in zip(seq, seq[1:]))
        assert all(x > 0 for x in seq)


class TestSatisfiesList:
    def setup_method(self):
        self.W = w11()
        self.A = point_from_flat((mpf("0.5"),), 1, 1)

    def test_norm_windows_are_strict(self):
        # list1 bound at i=4 is exactly 2: norm-2 vectors are outside.
        assert satisfies_list(self.A, self.W, 1, 4, (1, 0))
        assert not satisfies_list(self.A, self.W, 1, 4, (2, 0))
        assert not satisfies_list(self.A, self.W, 1, 4, (0, 7))  # zero part

    def test_image_windows(self):
        # |0.5·x + p| at (2, -1) is 0 < every bound.
        assert satisfies_list(self.A, self.W, 2, 0, (2, -1))
        assert not satisfies_list(self.A, self.W, 2, 0, (1, 0))
        assert satisfies_list(self.A, self.W, 4, 0, (2, -1))

    def test_rejects_bad_arguments(self):
        with pytest.raises(ValueError):
            satisfies_list(self.A, self.W, 5, 0, (1, 0))
        with pytest.raises(ValueError):
            satisfies_list(self.A, self.W, 1, 0, (1, 0, 0))


class TestCertify:
    def test_vacuous_certificate_when_window_empty(self):
        # At index 0 the norm window is below 1: nothing to enumerate.
        cert = certify_no_solution(Ball((mpf("0.3"),), "0.01"), w11(), "X", 0)
        assert isinstance(cert, NoSolutionCertificate)
        assert cert.checked_count == 0
        assert cert.margin is None

    def test_near_integer_point_yields_witness(self):
        # 1e-30 is almost a solution of |A·x + p| = 0 at (x, p) = (±1, 0).
        cert = certify_no_solution(Ball((mpf("1e-30"),), "1e-40"), w11(), "X", 4)
        assert isinstance(cert, CertificateWitness)
        assert abs(cert.vector[0]) == 1 and cert.vector[1] == 0
        assert cert.value_at_center < cert.bound

    def test_phase_validation(self):
        with pytest.raises(ValueError):
            certify_no_solution(Ball((mpf("0.3"),), "0.01"), w11(), "Z", 0)

    def test_json_roundtrip(self):
        ball = Ball((mpf("1e-30"),), "1e-40")
        for phase, index in [("X", 0), ("X", 4)]:
            cert = certify_no_solution(ball, w11(), phase, index)
            back = certificate_from_json(cert.to_json_dict())
            assert type(back) is type(cert)
            assert back.to_json_dict() == cert.to_json_dict()


class TestEnumerateS:
    def test_wide_ball_exceeds_span_limit(self):
        # With m=2, n=1 the X-side candidates live in Z^3 but may span at
        # most 2 dimensions; a huge ball admits everything.
        W = WindowParams(2, 1, R=4, beta="0.25", sigma=3, rho0=2)
        ball = Ball((mpf("0.3"), mpf("0.7")), 2)
        with pytest.raises(DimensionExceeded):
            enumerate_S(ball, W, 5, side="X")

    def test_small_ball_empty(self):
        W = WindowParams(2, 1, R=4, beta="0.25", sigma=1, rho0="0.25")
        ball = Ball((mpf("0.1415926"), mpf("0.218281")), "1e-6")
        assert enumerate_S(ball, W, 5, side="X") == []

    def test_budget_guard(self):
        W = WindowParams(2, 1, R=4, beta="0.25", sigma=3, rho0=2)
        ball = Ball((mpf("0.3"), mpf("0.7")), 2)
        with pytest.raises(EnumerationTooLarge):
            enumerate_S(ball, W, 9, side="X", budget=10)

    def test_side_validation(self):
        with pytest.raises(ValueError):
            enumerate_S(Ball((mpf(0),), 1), w11(), 0, side="Q")

    def test_integer_rank_exact(self):
        assert integer_rank([]) == 0
        assert integer_rank([(2, 4), (1, 2)]) == 1
        assert integer_rank([(1, 0, 3), (0, 1, 5), (1, 1, 8)]) == 2
        assert integer_rank([(1, 0, 0), (0, 1, 0), (0, 0, 1)]) == 3


class TestFiniteMinorGame:
    def test_completes_against_center_shrink(self):
        schedule = ConstantsSchedule(dim=2, beta="0.25", sigma=2)
        basis = [
            (mpf(1), mpf(0), mpf(0), mpf(0)),
            (mpf(0), mpf(1), mpf(0), mpf(0)),
        ]
        ball = Ball((mpf("0.31"), mpf("0.17"), mpf("0.53"), mpf("0.71")), "0.5")
        result = finite_minor_game(
            beta="0.25",
            bob=CenterShrinkBob(),
            ball=ball,
            basis=basis,
            schedule=schedule,
            mu_target="0.001",
            m_rows=2,
            n_cols=2,
        )
        assert result.completed
        assert result.transcript.outcome["kind"] == "Stopped"

    def test_rejects_large_opening(self):
        schedule = ConstantsSchedule(dim=1, beta="0.25", sigma=2)
        with pytest.raises(ValueError):
            finite_minor_game(
                beta="0.25",
                bob=CenterShrinkBob(),
                ball=Ball((mpf(0),), 1),
                basis=[(mpf(1), mpf(0))],
                schedule=schedule,
                mu_target="0.1",
                m_rows=1,
                n_cols=1,
            )


class TestBlockingCheck:
    def test_report_shape(self):
        basis = [(mpf(1), mpf(0)), (mpf(0), mpf(1))]
        report = blocking_check(
            Ball((mpf("0.4"), mpf("0.6")), "0.01"),
            basis,
            1,
            2,
            "cols",
            mpf("1e-9"),
            grid_divisor=4,
        )
        assert set(report) == {
            "samples",
            "blocked",
            "all_blocked",
            "min_det",
            "max_rhs",
        }
        assert report["samples"] > 0
        assert 0 <= report["blocked"] <= report["samples"]


class TestBad0Run:
    def test_full_run_produces_contiguous_certificates(self):
        opening = Ball((mpf("0.32"),), "0.25")
        result = run_bad0(1, 1, 4, "0.25", RandomBob(seed=7), opening)
        assert result.succeeded_through(4)
        assert not result.alice.witnesses()
        phases = [(c.phase, c.index) for c in result.alice.certificates]
        for i in range(5):
            assert ("X", i) in phases and ("Y", i) in phases

    def test_certificates_json_roundtrip(self):
        opening = Ball((mpf("0.32"),), "0.25")
        result = run_bad0(1, 1, 4, "0.25", RandomBob(seed=7), opening, max_phase_index=1)
        docs = result.certificates_json()
        rebuilt = [certificate_from_json(d) for d in docs]
        assert [c.to_json_dict() for c in rebuilt] == docs

    def test_same_seed_reproduces_run(self):
        opening = Ball((mpf("0.32"),), "0.25")
        a = run_bad0(1, 1, 4, "0.25", RandomBob(seed=11), opening, max_phase_index=2)
        b = run_bad0(1, 1, 4, "0.25", RandomBob(seed=11), opening, max_phase_index=2)
        assert a.transcript.to_json() == b.transcript.to_json()
        assert a.certificates_json() == b.certificates_json()

    def test_small_expansion_never_silently_passes(self):
        # An R too small to separate the windows must surface a witness or
        # an enumeration blow-up, not a silent success.
        opening = Ball((mpf("0.32"),), "0.25")
        try:
            result = run_bad0(
                1, 1, mpf("1.05"), "0.25", RandomBob(seed=3), opening, max_rounds=700
            )
        except (DimensionExceeded, EnumerationTooLarge):
            return
        assert not result.succeeded_through(4)
        assert result.alice.witnesses()

    def test_alice_requires_absolute_variant(self):
        from schmidtgames.engine import GameParams

        alice = Bad0Alice(1, 1, 4)
        params = GameParams(
            variant="hyperplane_percentage",
            dimension=1,
            beta="0.25",
            p="0.5",
            max_rounds=5,
        )
        with pytest.raises(ValueError):
            alice.reset(params)

    def test_window_params_recorded_from_opening(self):
        opening = Ball((mpf("0.32"),), "0.25")
        result = run_bad0(1, 1, 4, "0.25", RandomBob(seed=7), opening, max_phase_index=0)
        W = result.window_params
        assert W.rho0 == opening.radius
        assert abs(W.sigma - mpf("0.57")) < ERR


class TestChooseR:
    def test_finds_modest_power_of_two_scale(self):
        R = choose_R(1, 1, "0.25", seed=5, games=2)
        assert R >= 4
        assert R <= 4 * 2**10


class TestGridPoints:
    def test_points_lie_in_ball(self):
        ball = Ball((mpf("0.2"), mpf("0.8")), "0.1")
        pts = grid_points(ball, divisor=4)
        assert len(pts) > 1
        center = [float(c) for c in ball.center]
        for p in pts:
            d = sum((float(x) - c) ** 2 for x, c in zip(p, center)) ** 0.5
            assert d <= float(ball.radius) * (1 + 1e-9)
