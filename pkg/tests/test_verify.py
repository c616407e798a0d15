import math
from fractions import Fraction

import pytest
from mpmath import mpf

from schmidtgames.escape import LacunarySystem, LatticeTargets, PowerMatrices
from schmidtgames.geometry import Ball
from schmidtgames.linforms import (
    CertificateWitness,
    EnumerationTooLarge,
    NoSolutionCertificate,
    run_bad0,
    window_params_from_opening,
)
from schmidtgames.players import RandomBob
from schmidtgames.verify import (
    PrecisionExhausted,
    badness_inf,
    cf_badness_consistency,
    continued_fraction,
    convergents,
    crosscheck_certified_badness,
    escape_inf,
)

PHI = (1 + math.sqrt(5)) / 2
SQRT2 = math.sqrt(2)


class TestBadnessInf:
    def test_golden_ratio_infimum(self):
        report = badness_inf([[PHI]], q_max=100)
        assert report.infimum == pytest.approx((3 - math.sqrt(5)) / 2, abs=1e-12)
        assert report.argmin == (-1,)

    def test_sqrt2_infimum(self):
        report = badness_inf([[SQRT2]], q_max=100)
        assert report.infimum == pytest.approx(6 - 4 * SQRT2, abs=1e-12)
        assert abs(report.argmin[0]) == 2

    def test_rational_point_hits_zero(self):
        report = badness_inf([[1 / 3]], q_max=10)
        assert report.infimum == 0.0
        # Ties at every multiple of 3 break to the lexicographically least.
        assert report.argmin == (-9,)

    def test_monotone_in_search_range(self):
        values = [badness_inf([[PHI]], q_max=q).infimum for q in (10, 100, 1000)]
        assert values[0] >= values[1] >= values[2]

    def test_windows_partition_the_range(self):
        report = badness_inf([[PHI]], q_max=64)
        exps = [w.exponent for w in report.windows]
        assert exps == sorted(exps)
        assert exps[0] == 0
        assert all(w.minimum >= report.infimum for w in report.windows)
        assert report.infimum == min(w.minimum for w in report.windows)
        for w in report.windows:
            n = math.sqrt(sum(v * v for v in w.argmin))
            assert w.norm_lo <= n < w.norm_hi or n == pytest.approx(w.norm_lo)

    def test_shift_argument(self):
        report = badness_inf([[0.0]], shift=[0.5], q_max=5)
        assert report.infimum == pytest.approx(0.5)
        assert report.argmin == (-1,)
        with pytest.raises(ValueError):
            badness_inf([[0.0]], shift=[0.5, 0.5], q_max=5)

    def test_budget_guard(self):
        with pytest.raises(EnumerationTooLarge):
            badness_inf([[PHI, SQRT2], [0.1, 0.7]], q_max=10_000)

    def test_q_max_validation(self):
        with pytest.raises(ValueError):
            badness_inf([[PHI]], q_max=0)

    def test_two_column_form(self):
        report = badness_inf([[PHI, SQRT2]], q_max=20)
        assert report.infimum > 0
        assert len(report.argmin) == 2
        in_disk = sum(
            1
            for a in range(-20, 21)
            for b in range(-20, 21)
            if 0 < a * a + b * b <= 400
        )
        assert report.searched == in_disk

    def test_json_and_csv_shapes(self):
        report = badness_inf([[PHI]], q_max=16)
        doc = report.to_json_dict()
        assert {"matrix", "infimum", "argmin", "windows", "searched"} <= set(doc)
        rows = report.csv_rows()
        assert rows[0][0] == "window_exponent"
        assert len(rows) == len(report.windows) + 1


class TestContinuedFraction:
    def test_exact_rational(self):
        assert continued_fraction(Fraction(355, 113), 10) == [3, 7, 16]
        assert continued_fraction(7, 5) == [7]

    def test_golden_ratio_all_ones(self):
        phi = (1 + mpf(5) ** mpf("0.5")) / 2
        assert continued_fraction(phi, 12) == [1] * 12

    def test_pi_convergents(self):
        qs = continued_fraction(Fraction(3141592653589793, 10**15), 5)
        assert qs[:4] == [3, 7, 15, 1]
        assert convergents(qs)[:4] == [(3, 1), (22, 7), (333, 106), (355, 113)]

    def test_convergents_approximate_quadratically(self):
        phi = (1 + mpf(5) ** mpf("0.5")) / 2
        qs = continued_fraction(phi, 20)
        for p, q in convergents(qs)[1:]:
            assert abs(phi - mpf(p) / q) < mpf(1) / (q * q)

    def test_precision_exhausted(self):
        phi = (1 + mpf(5) ** mpf("0.5")) / 2
        with pytest.raises(PrecisionExhausted):
            continued_fraction(phi, 400)

    def test_depth_validation(self):
        with pytest.raises(ValueError):
            continued_fraction(Fraction(1, 2), 0)


class TestCfBadnessConsistency:
    def test_golden_ratio_consistent(self):
        phi = (1 + mpf(5) ** mpf("0.5")) / 2
        report = cf_badness_consistency(phi, depth=30, q_max=1000)
        assert report["ok"]
        assert report["max_partial_quotient"] == 1
        assert report["bound"] == pytest.approx(1 / report["c_observed"] + 2)

    def test_rational_is_vacuous(self):
        report = cf_badness_consistency(mpf("0.5"), depth=10, q_max=100)
        assert report["ok"]
        assert report["c_observed"] == 0.0

    def test_drops_quotients_past_search_range(self):
        # 1/10001 has a huge first quotient but its convergent denominator
        # already exceeds q_max, so the diagnostic must not flag it.
        report = cf_badness_consistency(Fraction(1, 10001), depth=5, q_max=100)
        assert report["quotients"] == [0]
        assert report["ok"]


class TestEscapeInf:
    def setup_method(self):
        self.system = LacunarySystem(PowerMatrices(3), LatticeTargets((0,)), 1, 1)

    def test_half_is_always_half(self):
        scan = escape_inf([mpf("0.5")], self.system, 6)
        assert scan.value == pytest.approx(0.5)
        assert scan.argmin_k == 0
        assert len(scan.rows) == 6
        assert all(d == pytest.approx(0.5) for _, d in scan.rows)

    def test_tenth_cycles(self):
        scan = escape_inf([mpf("0.1")], self.system, 5)
        dists = [d for _, d in scan.rows]
        assert dists == pytest.approx([0.1, 0.3, 0.1, 0.3, 0.1])

    def test_k_validation(self):
        with pytest.raises(ValueError):
            escape_inf([mpf("0.5")], self.system, 0)


def _run_certificates(seed=7, max_phase_index=4):
    opening = Ball((mpf("0.32"),), "0.25")
    result = run_bad0(1, 1, 4, "0.25", RandomBob(seed=seed), opening,
                      max_phase_index=max_phase_index)
    W = window_params_from_opening(1, 1, 4, "0.25", opening)
    final = result.transcript.final_ball
    return result, W, float(final.radius), [float(c) for c in final.center]


class TestCrosscheck:
    def test_full_run_passes(self):
        result, W, rho_f, center = _run_certificates()
        report = crosscheck_certified_badness(
            [center], W, 4, result.alice.certificates, rho_f
        )
        assert report.passed
        assert report.reason == "verified"
        assert report.coverage == pytest.approx(2.0)
        assert report.bound == pytest.approx(4.0**-10)
        assert report.min_value > report.bound

    def test_dropped_certificate_detected(self):
        result, W, rho_f, center = _run_certificates()
        kept = [
            c
            for c in result.alice.certificates
            if not (c.phase == "X" and c.index == 2)
        ]
        report = crosscheck_certified_badness([center], W, 4, kept, rho_f)
        assert not report.passed
        assert report.missing == ("X@2",)
        assert "contiguous" in report.reason

    def test_witness_fails_the_chain(self):
        result, W, rho_f, center = _run_certificates()
        bad = list(result.alice.certificates) + [
            CertificateWitness(
                phase="X",
                index=1,
                vector=(1, 0),
                value_at_center=mpf("1e-9"),
                slack=mpf("1e-9"),
                bound=mpf("1e-6"),
            )
        ]
        report = crosscheck_certified_badness([center], W, 4, bad, rho_f)
        assert not report.passed
        assert report.violating_q == (1, 0)

    def test_vacuous_below_unit_coverage(self):
        result, W, rho_f, center = _run_certificates(max_phase_index=0)
        report = crosscheck_certified_badness(
            [center], W, 0, result.alice.certificates, rho_f
        )
        assert report.passed
        assert "vacuous" in report.reason
        assert report.min_value is None

    def test_floor_violation_reports_the_vector(self):
        W = window_params_from_opening(1, 1, 4, "0.25", Ball((mpf("0.32"),), "0.25"))
        fake = [
            NoSolutionCertificate(
                phase="X",
                index=i,
                ball_center=(mpf("1e-9"),),
                ball_radius=mpf("1e-12"),
                enumeration_bound=mpf(2),
                margin=None,
                checked_count=0,
            )
            for i in range(5)
        ]
        report = crosscheck_certified_badness([[1e-9]], W, 4, fake, 0.0)
        assert not report.passed
        assert report.reason == "badness floor violated"
        assert abs(report.violating_q[0]) == 1

    def test_json_shape(self):
        result, W, rho_f, center = _run_certificates()
        doc = crosscheck_certified_badness(
            [center], W, 4, result.alice.certificates, rho_f
        ).to_json_dict()
        assert {"passed", "coverage", "bound", "slack", "min_value"} <= set(doc)
