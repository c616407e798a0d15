"""Independent brute-force oracles for the strategies' quantitative claims.

Nothing here reuses strategy bookkeeping: badness infima come from exhaustive
lattice enumeration, continued fractions from the Euclidean algorithm, and
the certified-badness crosscheck recombines per-window certificates with a
fresh enumeration.  Oracles run in double precision on inputs truncated from
the high-precision game output, with explicit slack terms covering the
truncation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence, Union

import numpy as np
from mpmath import floor as mp_floor
from mpmath import mp, mpf

from .linforms import (
    CertificateWitness,
    EnumerationTooLarge,
    NoSolutionCertificate,
    WindowParams,
)
from .precision import Number, to_real


class PrecisionExhausted(RuntimeError):
    """Continued-fraction denominators outgrew the precision budget."""


# ---------------------------------------------------------------------------
# Badness infimum by exhaustive search


@dataclass(frozen=True)
class WindowMinimum:
    """Per-dyadic-window minimum of the badness quantity."""

    exponent: int  # window is 2^exponent <= ||q|| < 2^(exponent+1)
    norm_lo: float
    norm_hi: float
    minimum: float
    argmin: tuple[int, ...]

    def to_json_dict(self) -> dict:
        return {
            "exponent": self.exponent,
            "norm_range": [self.norm_lo, self.norm_hi],
            "minimum": self.minimum,
            "argmin": list(self.argmin),
        }


@dataclass(frozen=True)
class BadnessReport:
    matrix: tuple[tuple[float, ...], ...]
    shift: tuple[float, ...]
    q_max: int
    infimum: float
    argmin: tuple[int, ...]
    windows: tuple[WindowMinimum, ...]
    searched: int

    def to_json_dict(self) -> dict:
        return {
            "matrix": [list(row) for row in self.matrix],
            "shift": list(self.shift),
            "q_max": self.q_max,
            "infimum": self.infimum,
            "argmin": list(self.argmin),
            "windows": [w.to_json_dict() for w in self.windows],
            "searched": self.searched,
        }

    def csv_rows(self) -> list[list]:
        rows = [["window_exponent", "norm_lo", "norm_hi", "minimum", "argmin"]]
        for w in self.windows:
            rows.append(
                [w.exponent, w.norm_lo, w.norm_hi, w.minimum, " ".join(map(str, w.argmin))]
            )
        return rows


def _integer_grid(q_max: int, dim: int, budget: int) -> np.ndarray:
    count = (2 * q_max + 1) ** dim
    if count > budget:
        raise EnumerationTooLarge(
            f"lattice grid of size {count} exceeds budget {budget}"
        )
    axis = np.arange(-q_max, q_max + 1)
    mesh = np.array(np.meshgrid(*([axis] * dim), indexing="ij"))
    return mesh.reshape(dim, -1).T


def badness_inf(
    matrix: Sequence[Sequence[float]],
    shift: Optional[Sequence[float]] = None,
    q_max: int = 10_000,
    budget: int = 20_000_000,
) -> BadnessReport:
    """Exhaustive ‖q‖^{N/M}·dist(A·q − shift, Z^M) over 0 < ‖q‖ ≤ q_max.

    The lattice distance uses per-coordinate nearest-integer rounding, exact
    for the product lattice Z^M.  Ties on the minimum break toward the
    lexicographically smallest q, making the reduction order-independent.
    """
    if q_max < 1:
        raise ValueError("q_max must be at least 1")
    a = np.atleast_2d(np.array(matrix, dtype=float))
    m_rows, n_cols = a.shape
    x = (
        np.zeros(m_rows)
        if shift is None
        else np.array([float(v) for v in shift], dtype=float)
    )
    if x.shape != (m_rows,):
        raise ValueError("shift must be an M-vector")

    grid = _integer_grid(q_max, n_cols, budget)
    norms_sq = (grid * grid).sum(axis=1)
    keep = (norms_sq > 0) & (norms_sq <= q_max * q_max)
    grid = grid[keep]
    norms = np.sqrt(norms_sq[keep].astype(float))

    residual = grid @ a.T - x
    dist = np.abs(residual - np.rint(residual))
    dist_norm = np.sqrt((dist * dist).sum(axis=1))
    values = norms ** (n_cols / m_rows) * dist_norm

    def lex_argmin(idx: np.ndarray) -> int:
        return min(idx, key=lambda i: tuple(grid[i]))

    best = int(lex_argmin(np.flatnonzero(values == values.min())))
    windows = []
    exps = np.floor(np.log2(norms)).astype(int)
    for e in range(0, int(math.floor(math.log2(q_max))) + 1):
        sel = np.flatnonzero(exps == e)
        if len(sel) == 0:
            continue
        wvals = values[sel]
        wbest = int(lex_argmin(sel[np.flatnonzero(wvals == wvals.min())]))
        windows.append(
            WindowMinimum(
                exponent=e,
                norm_lo=float(2**e),
                norm_hi=float(2 ** (e + 1)),
                minimum=float(values[wbest]),
                argmin=tuple(int(v) for v in grid[wbest]),
            )
        )
    return BadnessReport(
        matrix=tuple(tuple(float(v) for v in row) for row in a),
        shift=tuple(float(v) for v in x),
        q_max=q_max,
        infimum=float(values[best]),
        argmin=tuple(int(v) for v in grid[best]),
        windows=tuple(windows),
        searched=int(len(grid)),
    )


# ---------------------------------------------------------------------------
# Continued fractions


def continued_fraction(alpha: Union[Number, Fraction], depth: int) -> list[int]:
    """Partial quotients [a0; a1, …] by the Euclidean algorithm.

    Fractions are expanded exactly; real inputs run at working precision and
    raise PrecisionExhausted once convergent denominators outgrow what the
    mantissa can support (q² past 2^(prec−10)).
    """
    if depth < 1:
        raise ValueError("depth must be at least 1")
    if isinstance(alpha, Fraction) or isinstance(alpha, int):
        return _cf_exact(Fraction(alpha), depth)
    value = to_real(alpha)
    quotients: list[int] = []
    q_prev, q_cur = 1, 0  # denominators two and one steps back
    limit_sq = mpf(2) ** (mp.prec - 10)
    for _ in range(depth):
        a = int(mp_floor(value))
        quotients.append(a)
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        if mpf(q_cur) * q_cur > limit_sq:
            raise PrecisionExhausted(
                f"convergent denominator {q_cur} exceeds the precision budget"
            )
        frac = value - a
        if frac == 0:
            break
        value = 1 / frac
    return quotients


def _cf_exact(value: Fraction, depth: int) -> list[int]:
    quotients = []
    num, den = value.numerator, value.denominator
    for _ in range(depth):
        a, rem = divmod(num, den)
        quotients.append(int(a))
        if rem == 0:
            break
        num, den = den, rem
    return quotients


def convergents(quotients: Sequence[int]) -> list[tuple[int, int]]:
    """Convergent fractions p_n/q_n of a partial-quotient list."""
    out = []
    p_prev, p_cur = 1, quotients[0]
    q_prev, q_cur = 0, 1
    out.append((p_cur, q_cur))
    for a in quotients[1:]:
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        out.append((p_cur, q_cur))
    return out


def _cf_within(alpha: Union[Number, Fraction], depth: int, q_cap: int) -> list[int]:
    """Partial quotients whose convergent denominators stay within q_cap.

    Unlike continued_fraction this never raises PrecisionExhausted: the
    expansion simply stops before the first convergent past the cap, which
    also cuts off the garbage tail a truncated input develops once the
    quotients describe the truncation instead of the number.
    """
    if isinstance(alpha, (Fraction, int)):
        quotients = _cf_exact(Fraction(alpha), depth)
        convs = convergents(quotients)
        return [a for a, (_, q) in zip(quotients, convs) if q <= q_cap]
    value = to_real(alpha)
    out: list[int] = []
    q_prev, q_cur = 1, 0
    for _ in range(depth):
        a = int(mp_floor(value))
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        if q_cur > q_cap:
            break
        out.append(a)
        frac = value - a
        if frac == 0:
            break
        value = 1 / frac
    return out


def cf_badness_consistency(
    alpha: Number, depth: int, q_max: int = 10_000
) -> dict:
    """Cross-diagnostic: partial quotients vs the measured badness constant.

    For a 1-D point, max(a_1..a_n) ≤ 1/c + 2 must hold, where c is the
    brute-force badness infimum searched up to q_max.  Quotients whose
    convergent denominators exceed q_max are dropped: past that scale they
    describe digits the search cannot see (and, for a truncated input, the
    truncation rather than the underlying number).
    """
    kept = _cf_within(alpha, depth, q_max)
    report = badness_inf([[float(to_real(alpha))]], q_max=q_max)
    c_observed = report.infimum
    max_pq = max(kept[1:]) if len(kept) > 1 else 0
    bound = (1 / c_observed + 2) if c_observed > 0 else math.inf
    return {
        "quotients": kept,
        "max_partial_quotient": max_pq,
        "c_observed": c_observed,
        "bound": bound,
        "ok": max_pq <= bound,
        "q_max": report.q_max,
    }


# ---------------------------------------------------------------------------
# Escaping-set oracle


@dataclass(frozen=True)
class EscapeScan:
    value: float
    argmin_k: int
    rows: tuple[tuple[int, float], ...]

    def to_json_dict(self) -> dict:
        return {
            "value": self.value,
            "argmin_k": self.argmin_k,
            "rows": [[k, d] for k, d in self.rows],
        }


def escape_inf(x: Sequence[Number], system, K: int) -> EscapeScan:
    """min over k < K of dist(M_k·x, Z_k), straight from the system data."""
    if K < 1:
        raise ValueError("K must be at least 1")
    from .geometry import mat_vec
    from .precision import vec

    point = vec(x)
    rows = []
    for k in range(K):
        image = mat_vec(system.matrix(k), point)
        d = float(system.targets.min_dist(k, image))
        rows.append((k, d))
    best = min(rows, key=lambda r: (r[1], r[0]))
    return EscapeScan(value=best[1], argmin_k=best[0], rows=tuple(rows))


# ---------------------------------------------------------------------------
# Certified-badness crosscheck


@dataclass(frozen=True)
class CrosscheckReport:
    passed: bool
    reason: str
    coverage: float
    bound: float
    slack: float
    min_value: Optional[float]
    violating_q: Optional[tuple[int, ...]]
    missing: tuple[str, ...]

    def to_json_dict(self) -> dict:
        return {
            "passed": self.passed,
            "reason": self.reason,
            "coverage": self.coverage,
            "bound": self.bound,
            "slack": self.slack,
            "min_value": self.min_value,
            "violating_q": None if self.violating_q is None else list(self.violating_q),
            "missing": list(self.missing),
        }


def crosscheck_certified_badness(
    matrix: Sequence[Sequence[float]],
    W: WindowParams,
    i_max: int,
    certificates: Sequence[Union[NoSolutionCertificate, CertificateWitness]],
    rho_final: float,
    budget: int = 20_000_000,
) -> CrosscheckReport:
    """Verify the badness floor implied by a contiguous certificate chain.

    Certificates for phases X@0..i_max (and no witnesses anywhere) imply
    ‖q‖^{N/M}·dist(A·q, Z^M) ≥ δ^L·R^{−ML} for all 0 < ‖q‖ below the
    i_max-th window bound; this recomputes the left side by brute force at
    the truncated final point and compares against the floor minus an
    explicit slack for the final-ball radius and float truncation.
    """
    have = {
        (c.phase, c.index) for c in certificates
        if isinstance(c, NoSolutionCertificate)
    }
    witnessed = [c for c in certificates if isinstance(c, CertificateWitness)]
    missing = [f"X@{i}" for i in range(i_max + 1) if ("X", i) not in have]
    coverage = float(W.list1_bound(i_max))
    bound = float(W.observation_constant())
    if witnessed:
        w = witnessed[0]
        return CrosscheckReport(
            passed=False,
            reason=f"certificate witness at {w.phase}@{w.index}: {w.vector}",
            coverage=coverage,
            bound=bound,
            slack=0.0,
            min_value=None,
            violating_q=tuple(w.vector),
            missing=tuple(missing),
        )
    if missing:
        return CrosscheckReport(
            passed=False,
            reason="certificate chain is not contiguous",
            coverage=coverage,
            bound=bound,
            slack=0.0,
            min_value=None,
            violating_q=None,
            missing=tuple(missing),
        )

    a = np.atleast_2d(np.array(matrix, dtype=float))
    m_rows, n_cols = a.shape
    scale = max(1.0, float(np.abs(a).max()))
    slack = (
        math.sqrt(m_rows)
        * coverage ** (n_cols / m_rows + 1)
        * (float(rho_final) + scale * 2.0**-48)
    )
    if coverage <= 1.0:
        return CrosscheckReport(
            passed=True,
            reason="coverage below 1: no integer vector in range (vacuous)",
            coverage=coverage,
            bound=bound,
            slack=slack,
            min_value=None,
            violating_q=None,
            missing=(),
        )
    q_cap = int(math.ceil(coverage))
    grid = _integer_grid(q_cap, n_cols, budget)
    norms_sq = (grid * grid).sum(axis=1)
    keep = (norms_sq > 0) & (norms_sq < coverage * coverage)
    grid = grid[keep]
    norms = np.sqrt(norms_sq[keep].astype(float))
    residual = grid @ a.T
    dist = np.abs(residual - np.rint(residual))
    dist_norm = np.sqrt((dist * dist).sum(axis=1))
    values = norms ** (n_cols / m_rows) * dist_norm
    worst = int(np.argmin(values))
    min_value = float(values[worst])
    ok = min_value >= bound - slack
    return CrosscheckReport(
        passed=ok,
        reason="verified" if ok else "badness floor violated",
        coverage=coverage,
        bound=bound,
        slack=slack,
        min_value=min_value,
        violating_q=None if ok else tuple(int(v) for v in grid[worst]),
        missing=(),
    )
