"""Alice's strategy keeping a matrix of linear forms badly approximable.

The game point is an M×N matrix A ∈ R^H (H = MN, flattened row-major into the
game's ball space).  Alice's goal: no integer vector ever satisfies the paired
"small norm / small image" inequality windows, so that the final point has
‖x‖^{N/M}·dist(A·x, Z^M) bounded below by an explicit constant.

Play alternates between primal phases (blocking column-family solutions
Y = (y, q) with A^T y + q small) and dual phases (blocking row-family
solutions X = (x, p) with A x + p small).  Each phase:

  1. enumerates the integer vectors that could still become solutions,
  2. extends them to an orthonormal basis of a subspace of R^L (L = M+N),
  3. plays a finite minor game driving the minors of the interaction matrix
     up, which by a Cramer bound blocks every candidate, and
  4. on the phase-closing ball emits a NoSolutionCertificate produced by an
     independent conservative enumeration (the ground truth for callers).

Certificate enumeration never trusts the strategy: a vector that cannot be
excluded conservatively is returned as a witness (typically meaning the
expansion ratio R is too small for the claimed window).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import product
from typing import Optional, Sequence, Union

import numpy as np
from mpmath import mpf, sqrt

from .engine import (
    AliceMove,
    GameParams,
    GameTranscript,
    play,
)
from .geometry import (
    Ball,
    DimensionExceeded,
    HyperplaneSlab,
    gram_schmidt_extend,
    v_norm,
    v_scale,
)
from .minors import (
    GridMinorEvaluator,
    LinearFormsPoint,
    MinorIndex,
    all_minor_indices,
    grad_minor_matrix,
    grad_norm,
    minor_determinant,
    sup_Mv_bound,
)
from .players import dummy_slab
from .precision import Number, real_to_str, tau, to_real


class EnumerationTooLarge(RuntimeError):
    """An integer enumeration exceeded its configured budget."""


class CaseSelectionAmbiguous(RuntimeError):
    """The grid minimum of M_v/M_{v−1} lies within tolerance of the split."""


class StrategyPostconditionFailed(RuntimeError):
    """A minor-norm induction postcondition failed on the sampled grid."""


# ---------------------------------------------------------------------------
# Window parameters


@dataclass(frozen=True)
class WindowParams:
    """All window exponents and list bounds for one Bad₀(M,N) run."""

    m_rows: int
    n_cols: int
    R: mpf
    beta: mpf
    sigma: mpf
    rho0: mpf

    def __post_init__(self):
        object.__setattr__(self, "R", to_real(self.R))
        object.__setattr__(self, "beta", to_real(self.beta))
        object.__setattr__(self, "sigma", to_real(self.sigma))
        object.__setattr__(self, "rho0", to_real(self.rho0))
        if not self.R > 1:
            raise ValueError("R must exceed 1")

    @property
    def h_dim(self) -> int:
        return self.m_rows * self.n_cols

    @property
    def l_dim(self) -> int:
        return self.m_rows + self.n_cols

    @property
    def lam(self) -> Fraction:
        return Fraction(self.n_cols, self.l_dim)

    def _rpow(self, exponent: Fraction | int) -> mpf:
        f = Fraction(exponent)
        return self.R ** (to_real(f.numerator) / f.denominator)

    @property
    def delta(self) -> mpf:
        return self._rpow(-self.n_cols * self.l_dim**2)

    @property
    def delta_t(self) -> mpf:
        return self._rpow(-self.m_rows * self.l_dim**2)

    # List bounds (all strict inequalities).
    def list1_bound(self, i: int) -> mpf:
        return self.delta * self._rpow(self.m_rows * (self.lam + i))

    def list2_bound(self, i: int) -> mpf:
        return self.delta * self._rpow(-self.n_cols * (self.lam + i) - self.m_rows)

    def list3_bound(self, j: int) -> mpf:
        return self.delta_t * self._rpow(self.n_cols * (1 + j))

    def list4_bound(self, j: int) -> mpf:
        return self.delta_t * self._rpow(-self.m_rows * (1 + j) - self.n_cols)

    # Stage thresholds on the ball radius.
    def k_threshold(self, i: int) -> mpf:
        return self._rpow(-self.l_dim * (self.lam + i))

    def h_threshold(self, j: int) -> mpf:
        return self._rpow(-self.l_dim * (1 + j))

    def observation_constant(self) -> mpf:
        """δ^L·R^{−ML}: the badness floor guaranteed by the certificates."""
        return self.delta**self.l_dim * self._rpow(-self.m_rows * self.l_dim)

    def part_two_gates(self, nu_top: Number) -> dict:
        """Advisory sufficiency gates for the paper-scale schedule."""
        n = self.n_cols
        r_pow = self._rpow(-self.m_rows)
        gate_nu = bool(
            r_pow <= self.beta * to_real(nu_top) / (n * sqrt(to_real(n)))
        )
        gate_rho = bool(r_pow <= self.rho0)
        return {
            "R_pow_M_le_beta_nu_over_NsqrtN": gate_nu,
            "R_pow_M_le_rho0": gate_rho,
        }


def window_params_from_opening(
    m_rows: int, n_cols: int, R: Number, beta: Number, opening: Ball
) -> WindowParams:
    """σ and ρ0 recomputed from Bob's first ball: σ = ‖center‖ + radius."""
    return WindowParams(
        m_rows=m_rows,
        n_cols=n_cols,
        R=to_real(R),
        beta=to_real(beta),
        sigma=v_norm(opening.center) + opening.radius,
        rho0=opening.radius,
    )


# ---------------------------------------------------------------------------
# Flattened point <-> matrix helpers


def point_from_flat(flat: Sequence[mpf], m_rows: int, n_cols: int) -> LinearFormsPoint:
    return LinearFormsPoint(
        tuple(
            tuple(flat[u * n_cols + v] for v in range(n_cols))
            for u in range(m_rows)
        )
    )


def flatten_matrix(rows: Sequence[Sequence[mpf]]) -> tuple[mpf, ...]:
    return tuple(x for row in rows for x in row)


# ---------------------------------------------------------------------------
# List inequalities and certificates


def satisfies_list(
    A: LinearFormsPoint,
    W: WindowParams,
    which: int,
    index: int,
    XY: Sequence[int],
) -> bool:
    """Evaluate one of the four strict window inequalities at an integer vector."""
    vec_i = tuple(int(x) for x in XY)
    if len(vec_i) != W.l_dim:
        raise ValueError("expected an integer L-vector")
    if which == 1:
        x = vec_i[: W.n_cols]
        norm = _int_norm(x)
        return 0 < norm and norm < W.list1_bound(index)
    if which == 2:
        image = A.apply_rows(vec_i)
        return v_norm(image) < W.list2_bound(index)
    if which == 3:
        y = vec_i[: W.m_rows]
        norm = _int_norm(y)
        return 0 < norm and norm < W.list3_bound(index)
    if which == 4:
        image = A.apply_cols(vec_i)
        return v_norm(image) < W.list4_bound(index)
    raise ValueError("which must be one of 1, 2, 3, 4")


def _int_norm(xs: Sequence[int]) -> mpf:
    return sqrt(to_real(sum(x * x for x in xs)))


@dataclass(frozen=True)
class NoSolutionCertificate:
    phase: str  # "X" | "Y"
    index: int
    ball_center: tuple[mpf, ...]
    ball_radius: mpf
    enumeration_bound: mpf
    margin: Optional[mpf]  # min conservative excess; None if nothing enumerated
    checked_count: int

    def to_json_dict(self) -> dict:
        return {
            "phase": self.phase,
            "index": self.index,
            "ball": {
                "center": [real_to_str(x) for x in self.ball_center],
                "radius": real_to_str(self.ball_radius),
            },
            "enumeration_bound": real_to_str(self.enumeration_bound),
            "margin": None if self.margin is None else real_to_str(self.margin),
            "checked_count": self.checked_count,
        }


@dataclass(frozen=True)
class CertificateWitness:
    phase: str
    index: int
    vector: tuple[int, ...]
    value_at_center: mpf
    slack: mpf
    bound: mpf

    def to_json_dict(self) -> dict:
        return {
            "phase": self.phase,
            "index": self.index,
            "witness_vector": list(self.vector),
            "value_at_center": real_to_str(self.value_at_center),
            "slack": real_to_str(self.slack),
            "bound": real_to_str(self.bound),
        }


CertifyResult = Union[NoSolutionCertificate, CertificateWitness]


def certificate_from_json(d: dict) -> CertifyResult:
    """Rebuild a certificate or witness from its to_json_dict output."""
    if "witness_vector" in d:
        return CertificateWitness(
            phase=d["phase"],
            index=int(d["index"]),
            vector=tuple(int(v) for v in d["witness_vector"]),
            value_at_center=mpf(d["value_at_center"]),
            slack=mpf(d["slack"]),
            bound=mpf(d["bound"]),
        )
    ball = d["ball"]
    return NoSolutionCertificate(
        phase=d["phase"],
        index=int(d["index"]),
        ball_center=tuple(mpf(x) for x in ball["center"]),
        ball_radius=mpf(ball["radius"]),
        enumeration_bound=mpf(d["enumeration_bound"]),
        margin=None if d.get("margin") is None else mpf(d["margin"]),
        checked_count=int(d["checked_count"]),
    )


def _integer_box(bound: mpf, dim: int, budget: int) -> list[tuple[int, ...]]:
    """All nonzero integer vectors with Euclidean norm ≤ bound (+tolerance)."""
    import math

    limit = int(math.floor(float(bound) * (1 + 1e-15))) if bound > 0 else -1
    if limit < 0:
        return []
    count = (2 * limit + 1) ** dim
    if count > budget:
        raise EnumerationTooLarge(
            f"integer box of size {count} exceeds budget {budget}"
        )
    # Strict comparison: the lattice norm is exact, so a vector sitting
    # exactly on the bound is genuinely outside the open window and must
    # not be enumerated (it could otherwise surface as a false witness).
    bound_sq = bound * bound
    out = []
    for tup in product(range(-limit, limit + 1), repeat=dim):
        if any(tup) and to_real(sum(t * t for t in tup)) < bound_sq:
            out.append(tup)
    # Smallest-norm vectors first, so a returned witness is the most
    # meaningful one available.
    out.sort(key=lambda t: (sum(x * x for x in t), t))
    return out


def _nearest_int_box(center: Sequence[mpf], width: mpf) -> list[tuple[int, ...]]:
    """Integer vectors within width (per coordinate) of a real center."""
    import math

    ranges = []
    for c in center:
        lo = int(math.ceil(float(c - width) - 1e-12))
        hi = int(math.floor(float(c + width) + 1e-12))
        ranges.append(range(lo, hi + 1))
    return [tuple(t) for t in product(*ranges)]


def certify_no_solution(
    ball: Ball,
    W: WindowParams,
    phase: str,
    index: int,
    budget: int = 500_000,
) -> CertifyResult:
    """Exclude every integer vector in the phase window, or return a witness.

    Conservative: the image norm at the ball center, minus a Lipschitz slack
    √dim·‖lattice part‖·ρ(ball), must clear the image bound strictly.  A
    vector the test cannot exclude is returned as the witness (this does not
    prove a solution exists — only that this ball cannot certify).
    """
    if phase not in ("X", "Y"):
        raise ValueError("phase must be 'X' or 'Y'")
    center = point_from_flat(ball.center, W.m_rows, W.n_cols)
    if phase == "X":
        lattice_dim = W.n_cols
        image_dim = W.m_rows
        norm_bound = W.list1_bound(index)
        image_bound = W.list2_bound(index)

        def image_at(x: tuple[int, ...]) -> tuple[mpf, ...]:
            return tuple(
                sum(
                    (center.entries[u][j] * x[j] for j in range(W.n_cols)),
                    mpf(0),
                )
                for u in range(W.m_rows)
            )

    else:
        lattice_dim = W.m_rows
        image_dim = W.n_cols
        norm_bound = W.list3_bound(index)
        image_bound = W.list4_bound(index)

        def image_at(y: tuple[int, ...]) -> tuple[mpf, ...]:
            return tuple(
                sum(
                    (center.entries[u][v] * y[u] for u in range(W.m_rows)),
                    mpf(0),
                )
                for v in range(W.n_cols)
            )

    sqrt_dim = sqrt(to_real(image_dim))
    margin: Optional[mpf] = None
    checked = 0
    for lattice_vec in _integer_box(norm_bound, lattice_dim, budget):
        base_image = image_at(lattice_vec)
        slack = sqrt_dim * _int_norm(lattice_vec) * ball.radius
        width = image_bound + slack
        for appended in _nearest_int_box(
            tuple(-x for x in base_image), width + tau()
        ):
            checked += 1
            value = v_norm(
                tuple(b + a for b, a in zip(base_image, appended))
            )
            excess = value - slack - image_bound
            if excess <= 0:
                return CertificateWitness(
                    phase=phase,
                    index=index,
                    vector=tuple(lattice_vec) + tuple(appended),
                    value_at_center=value,
                    slack=slack,
                    bound=image_bound,
                )
            if margin is None or excess < margin:
                margin = excess
    return NoSolutionCertificate(
        phase=phase,
        index=index,
        ball_center=ball.center,
        ball_radius=ball.radius,
        enumeration_bound=norm_bound,
        margin=margin,
        checked_count=checked,
    )


def enumerate_S(
    ball: Ball,
    W: WindowParams,
    index: int,
    side: str = "Y",
    budget: int = 500_000,
) -> list[tuple[int, ...]]:
    """Integer L-vectors that could still become solutions over the ball.

    side="Y": vectors (y, q) with 0 < ‖y‖ < list3 bound at j=index and,
    conservatively for some A in the ball, ‖A^T y + q‖ < list4 bound.
    side="X": the dual family (x, p) against list1/list2 at i=index.

    Raises DimensionExceeded (via the exact integer rank check) if the result
    spans more than N (side Y) resp. M (side X) dimensions.
    """
    center = point_from_flat(ball.center, W.m_rows, W.n_cols)
    if side == "Y":
        lattice_dim, image_dim = W.m_rows, W.n_cols
        norm_bound = W.list3_bound(index)
        image_bound = W.list4_bound(index)
        span_limit = W.n_cols

        def image_at(y):
            return tuple(
                sum((center.entries[u][v] * y[u] for u in range(W.m_rows)), mpf(0))
                for v in range(W.n_cols)
            )

    elif side == "X":
        lattice_dim, image_dim = W.n_cols, W.m_rows
        norm_bound = W.list1_bound(index)
        image_bound = W.list2_bound(index)
        span_limit = W.m_rows

        def image_at(x):
            return tuple(
                sum((center.entries[u][j] * x[j] for j in range(W.n_cols)), mpf(0))
                for u in range(W.m_rows)
            )

    else:
        raise ValueError("side must be 'Y' or 'X'")

    sqrt_dim = sqrt(to_real(image_dim))
    out: list[tuple[int, ...]] = []
    for lattice_vec in _integer_box(norm_bound, lattice_dim, budget):
        base_image = image_at(lattice_vec)
        slack = sqrt_dim * _int_norm(lattice_vec) * ball.radius
        width = image_bound + slack
        for appended in _nearest_int_box(
            tuple(-x for x in base_image), width + tau()
        ):
            value = v_norm(tuple(b + a for b, a in zip(base_image, appended)))
            if value - slack < image_bound:
                out.append(tuple(lattice_vec) + tuple(appended))
    rank = integer_rank(out)
    if rank > span_limit:
        raise DimensionExceeded(
            f"candidate solutions span {rank} > {span_limit} dimensions"
        )
    return out


def integer_rank(vectors: Sequence[Sequence[int]]) -> int:
    """Exact rank of a set of integer vectors (fraction-free elimination)."""
    rows = [list(map(Fraction, v)) for v in vectors]
    if not rows:
        return 0
    cols = len(rows[0])
    rank = 0
    pivot_col = 0
    while rank < len(rows) and pivot_col < cols:
        pivot = next(
            (r for r in range(rank, len(rows)) if rows[r][pivot_col] != 0), None
        )
        if pivot is None:
            pivot_col += 1
            continue
        rows[rank], rows[pivot] = rows[pivot], rows[rank]
        lead = rows[rank][pivot_col]
        for r in range(rank + 1, len(rows)):
            if rows[r][pivot_col] != 0:
                factor = rows[r][pivot_col] / lead
                for c in range(pivot_col, cols):
                    rows[r][c] -= factor * rows[rank][c]
        rank += 1
        pivot_col += 1
    return rank


# ---------------------------------------------------------------------------
# Constants schedule


@dataclass(frozen=True)
class ConstantsSchedule:
    """ε₁, ε₂ and the interleaved ν/μ thresholds for one minor game."""

    dim: int
    beta: mpf
    sigma: mpf
    eps1: mpf = field(init=False)
    eps2: mpf = field(init=False)
    nu: tuple[mpf, ...] = field(init=False)
    mu: tuple[mpf, ...] = field(init=False)

    def __post_init__(self):
        object.__setattr__(self, "beta", to_real(self.beta))
        object.__setattr__(self, "sigma", to_real(self.sigma))
        dim = self.dim
        sqrt_dim = sqrt(to_real(dim))
        eps1 = 1 / (2 * sqrt_dim)
        eps2 = 1 / (2 * (1 + sqrt_dim * self.sigma))
        b2e2 = self.beta**2 * eps2
        nu = [mpf(1)]
        mu = []
        for v in range(1, dim + 1):
            mu_prev = b2e2 * nu[v - 1] / (v * v)
            mu.append(mu_prev)
            nu.append(min(b2e2 * mu_prev / (2 * v), eps1 / (v * self.sigma)))
        object.__setattr__(self, "eps1", eps1)
        object.__setattr__(self, "eps2", eps2)
        object.__setattr__(self, "nu", tuple(nu))
        object.__setattr__(self, "mu", tuple(mu))


# ---------------------------------------------------------------------------
# The finite minor game


_GRID_CACHE: dict[tuple[int, int], np.ndarray] = {}


def _grid_offsets(dim: int, divisor: int) -> np.ndarray:
    """Integer lattice offsets of norm ≤ divisor in Z^dim, cached."""
    key = (dim, divisor)
    if key not in _GRID_CACHE:
        axis = np.arange(-divisor, divisor + 1)
        mesh = np.array(list(product(axis, repeat=dim)))
        keep = (mesh * mesh).sum(axis=1) <= divisor * divisor
        _GRID_CACHE[key] = mesh[keep]
    return _GRID_CACHE[key]


def grid_points(ball: Ball, divisor: int = 8) -> np.ndarray:
    """Float64 sample grid of the ball at pitch radius/divisor, (P, dim)."""
    offsets = _grid_offsets(ball.dim, divisor)
    center = np.array([float(x) for x in ball.center])
    pitch = float(ball.radius) / divisor
    return center[None, :] + pitch * offsets


@dataclass
class LevelReport:
    level: int
    case: Optional[str] = None  # "1" | "2" | "2(ambiguous)"
    grid_min_ratio: Optional[float] = None
    threshold: Optional[float] = None
    postcondition_ok: Optional[bool] = None
    postcondition_margin: Optional[float] = None
    claim73_ok: Optional[bool] = None
    slab: Optional[HyperplaneSlab] = None
    arrival_radius: Optional[mpf] = None

    def to_json_dict(self) -> dict:
        return {
            "level": self.level,
            "case": self.case,
            "grid_min_ratio": self.grid_min_ratio,
            "threshold": self.threshold,
            "postcondition_ok": self.postcondition_ok,
            "postcondition_margin": self.postcondition_margin,
            "claim73_ok": self.claim73_ok,
            "arrival_radius": (
                None if self.arrival_radius is None else real_to_str(self.arrival_radius)
            ),
        }


class MinorGamePlan:
    """Per-phase minor-game driver: case splits, deletions, postconditions.

    ``decide(ball)`` is called on every Bob ball and returns the slab to
    delete (or None for a dummy move).  ``done`` flips once the final radius
    target is reached and the last postcondition has been checked.
    """

    AMBIGUITY_MARGIN = 1e-9

    def __init__(
        self,
        basis: Sequence[Sequence[mpf]],
        m_rows: int,
        n_cols: int,
        family: str,
        schedule: ConstantsSchedule,
        mu_target: mpf,
        rho_anchor: mpf,
        grid_divisor: int = 8,
        strict_postconditions: bool = False,
    ):
        self.basis = tuple(tuple(to_real(x) for x in b) for b in basis)
        self.m_rows = m_rows
        self.n_cols = n_cols
        self.family = family
        self.schedule = schedule
        self.mu_target = to_real(mu_target)
        self.rho_anchor = to_real(rho_anchor)
        self.grid_divisor = grid_divisor
        self.strict = strict_postconditions
        self.dim = schedule.dim
        self.mode = (
            "paper"
            if self.mu_target <= schedule.nu[self.dim] * (1 + tau())
            else "compressed"
        )
        self.thresholds = self._compute_thresholds()
        self.next_level = 1
        self.done = False
        self.levels: list[LevelReport] = []
        self._evaluator = GridMinorEvaluator(self.basis, m_rows, n_cols, family)

    def _compute_thresholds(self) -> list[mpf]:
        if self.mode == "paper":
            return [self.schedule.mu[v] for v in range(self.dim)]
        # Compressed fallback: spread the forced final target evenly in
        # log-scale so every level still gets its case split and deletion.
        total = self.mu_target
        return [
            total ** (to_real(v + 1) / (self.dim + 1)) for v in range(self.dim)
        ]

    # -- grid machinery ------------------------------------------------------

    def _points_as_matrices(self, ball: Ball) -> np.ndarray:
        pts = grid_points(ball, self.grid_divisor)
        return pts.reshape(len(pts), self.m_rows, self.n_cols)

    def _ratio_scan(self, ball: Ball, v: int) -> tuple[float, np.ndarray]:
        """Min over the grid of M_v/M_{v−1} and the argmin matrix."""
        points = self._points_as_matrices(ball)
        num = self._evaluator.level_norms(points, v)
        den = self._evaluator.level_norms(points, v - 1)
        with np.errstate(divide="ignore", invalid="ignore"):
            ratios = np.where(den > 0, num / np.where(den > 0, den, 1), np.inf)
        idx = int(np.argmin(ratios))
        return float(ratios[idx]), points[idx]

    def _postcondition(self, ball: Ball, v: int) -> tuple[bool, float]:
        """Grid check of M_v > ν_v·ρ_anchor·S_{v−1}(ball)."""
        center = point_from_flat(ball.center, self.m_rows, self.n_cols)
        s_bound = sup_Mv_bound(center, ball.radius, self.basis, v - 1, self.family)
        floor = float(self.schedule.nu[v] * self.rho_anchor * s_bound)
        points = self._points_as_matrices(ball)
        norms = self._evaluator.level_norms(points, v)
        min_norm = float(norms.min())
        return min_norm > floor, min_norm - floor

    def _claim73(self, ball: Ball, v: int) -> Optional[bool]:
        """Sampled sup of M_{v−1} over the ball ≤ v·(its sampled min)."""
        if v < 2:
            return True
        points = self._points_as_matrices(ball)
        norms = self._evaluator.level_norms(points, v - 1)
        lo = float(norms.min())
        hi = float(norms.max())
        if lo <= 0:
            return False
        return hi <= v * lo * (1 + 1e-12)

    # -- the decision function -------------------------------------------------

    def decide(self, ball: Ball) -> Optional[HyperplaneSlab]:
        if self.done:
            return None
        rho_rel = ball.radius / self.rho_anchor
        if self.next_level <= self.dim:
            arrival = self.thresholds[self.next_level - 1]
            if rho_rel < arrival:
                return self._handle_arrival(ball)
            return None
        if rho_rel < self.mu_target:
            report = LevelReport(level=self.dim, arrival_radius=ball.radius)
            ok, margin = self._postcondition(ball, self.dim)
            report.postcondition_ok = ok
            report.postcondition_margin = margin
            self.levels.append(report)
            self.done = True
            if self.strict and not ok:
                raise StrategyPostconditionFailed(
                    f"final level {self.dim} postcondition failed by {-margin}"
                )
            return None
        return None

    def _handle_arrival(self, ball: Ball) -> Optional[HyperplaneSlab]:
        v = self.next_level
        w = v - 1  # this ball is B_{v-1}
        report = LevelReport(level=v, arrival_radius=ball.radius)

        if w >= 1:
            ok, margin = self._postcondition(ball, w)
            report.postcondition_ok = ok
            report.postcondition_margin = margin
            if self.strict and not ok:
                raise StrategyPostconditionFailed(
                    f"level {w} postcondition failed by {-margin}"
                )
        report.claim73_ok = self._claim73(ball, v)

        min_ratio, argmin_matrix = self._ratio_scan(ball, v)
        eps1 = float(self.schedule.eps1)
        report.grid_min_ratio = min_ratio
        report.threshold = eps1

        ambiguous = abs(min_ratio - eps1) <= self.AMBIGUITY_MARGIN
        if min_ratio > eps1 and not ambiguous:
            report.case = "1"
            slab = None
        else:
            # Case 2 (also played under ambiguity: the deletion is sound in
            # either branch, since case 1's conclusion needs no move at all).
            report.case = "2(ambiguous)" if ambiguous else "2"
            slab = self._deletion_slab(ball, argmin_matrix, v)
            report.slab = slab
        self.levels.append(report)
        self.next_level += 1
        return slab

    def _deletion_slab(
        self, ball: Ball, argmin_matrix: np.ndarray, v: int
    ) -> Optional[HyperplaneSlab]:
        """Slab around the zero set of the linearization of the top minor."""
        a_star = LinearFormsPoint(
            tuple(tuple(to_real(float(x)) for x in row) for row in argmin_matrix)
        )
        best_omega: Optional[MinorIndex] = None
        best_norm = mpf(-1)
        for omega in all_minor_indices(self.dim, v):
            g = grad_minor_matrix(a_star, self.basis, omega, self.family)
            gn = grad_norm(g)
            if gn > best_norm:
                best_norm = gn
                best_omega = omega
        if best_omega is None or best_norm <= 0:
            return None
        g = grad_minor_matrix(a_star, self.basis, best_omega, self.family)
        d_val = minor_determinant(a_star, self.basis, best_omega, self.family)
        g_flat = flatten_matrix(g)
        a_flat = flatten_matrix(a_star.entries)
        offset = sum(
            (gx * ax for gx, ax in zip(g_flat, a_flat)), mpf(0)
        ) - d_val
        # Normalize before constructing so epsilon is the geometric
        # thickness beta*rho, not beta*rho scaled by the gradient size.
        unit = v_scale(1 / best_norm, g_flat)
        epsilon = self.schedule.beta * ball.radius
        return HyperplaneSlab(unit, offset / best_norm, epsilon)

    def report_json(self) -> dict:
        return {
            "mode": self.mode,
            "family": self.family,
            "dim": self.dim,
            "mu_target": real_to_str(self.mu_target),
            "levels": [lv.to_json_dict() for lv in self.levels],
            "done": self.done,
        }


class MinorGameAlice:
    """Strategy adapter running one MinorGamePlan as a full Alice."""

    def __init__(self, plan: MinorGamePlan):
        self.plan = plan

    def reset(self, params: GameParams) -> None:
        pass

    def move(self, params: GameParams, transcript: GameTranscript) -> AliceMove:
        ball = transcript.current_ball()
        slab = self.plan.decide(ball)
        if slab is None:
            return AliceMove(slabs=(dummy_slab(ball, 0),))
        return AliceMove(slabs=(slab,))


class _OpeningBob:
    """Forces a prescribed opening ball, then delegates to the inner Bob."""

    def __init__(self, opening: Ball, inner):
        self.opening = opening
        self.inner = inner

    def reset(self, params: GameParams) -> None:
        reset = getattr(self.inner, "reset", None)
        if reset is not None:
            reset(params)

    def move(self, params: GameParams, transcript: GameTranscript):
        if transcript.current_ball() is None:
            return self.opening
        return self.inner.move(params, transcript)


@dataclass
class MinorGameResult:
    transcript: GameTranscript
    plan: MinorGamePlan

    @property
    def completed(self) -> bool:
        return self.plan.done


def finite_minor_game(
    beta: Number,
    bob,
    ball: Ball,
    basis: Sequence[Sequence[mpf]],
    schedule: ConstantsSchedule,
    mu_target: Number,
    m_rows: int,
    n_cols: int,
    family: str = "cols",
    max_rounds: int = 500,
    strict_postconditions: bool = True,
    grid_divisor: int = 8,
) -> MinorGameResult:
    """Run one finite minor game from the given ball against the given Bob.

    Plays the absolute variant (one deletion per turn).  The returned plan
    carries per-level case decisions and postcondition results.
    """
    if not ball.radius < 1:
        raise ValueError("the game ball must have radius below 1")
    plan = MinorGamePlan(
        basis=basis,
        m_rows=m_rows,
        n_cols=n_cols,
        family=family,
        schedule=schedule,
        mu_target=to_real(mu_target),
        rho_anchor=ball.radius,
        grid_divisor=grid_divisor,
        strict_postconditions=strict_postconditions,
    )
    params = GameParams(
        variant="hyperplane_absolute",
        dimension=m_rows * n_cols,
        beta=to_real(beta),
        max_rounds=max_rounds,
    )
    transcript = play(
        params,
        MinorGameAlice(plan),
        _OpeningBob(ball, bob),
        stop_when=lambda t: plan.done,
    )
    return MinorGameResult(transcript=transcript, plan=plan)


# ---------------------------------------------------------------------------
# Blocking inequality diagnostics


def blocking_check(
    ball: Ball,
    basis: Sequence[Sequence[mpf]],
    m_rows: int,
    n_cols: int,
    family: str,
    stage_bound: mpf,
    grid_divisor: int = 8,
) -> dict:
    """Grid check that |D| > dim^{3/2}·stage_bound·max|cofactor| everywhere.

    D is the full interaction determinant; the inequality failing nowhere on
    the sampled grid is the blocked-solutions diagnostic for a closing phase.
    """
    dim = n_cols if family == "cols" else m_rows
    evaluator = GridMinorEvaluator(basis, m_rows, n_cols, family)
    points = grid_points(ball, grid_divisor).reshape(-1, m_rows, n_cols)
    c = evaluator.interaction(points)
    if dim == 1:
        dets = np.abs(c[:, 0, 0])
        cof = np.ones(len(points))
    else:
        dets = np.abs(np.linalg.det(c))
        cof = np.zeros(len(points))
        idx = list(range(dim))
        for u in range(dim):
            for v in range(dim):
                rows = [r for r in idx if r != u]
                cols = [col for col in idx if col != v]
                sub = c[:, rows, :][:, :, cols]
                sub_det = (
                    np.abs(sub[:, 0, 0])
                    if dim - 1 == 1
                    else np.abs(np.linalg.det(sub))
                )
                cof = np.maximum(cof, sub_det)
    rhs = float(dim ** 1.5 * float(stage_bound)) * cof
    blocked = dets > rhs
    return {
        "samples": int(len(points)),
        "blocked": int(blocked.sum()),
        "all_blocked": bool(blocked.all()),
        "min_det": float(dets.min()),
        "max_rhs": float(rhs.max()),
    }


# ---------------------------------------------------------------------------
# The full Bad₀ strategy


@dataclass
class PhaseReport:
    kind: str  # "primal" | "dual"
    index: int
    start_radius: mpf
    mu_forced: mpf
    candidate_count: int
    basis_size: int
    plan: Optional[MinorGamePlan] = None
    blocking: Optional[dict] = None

    def to_json_dict(self) -> dict:
        return {
            "kind": self.kind,
            "index": self.index,
            "start_radius": real_to_str(self.start_radius),
            "mu_forced": real_to_str(self.mu_forced),
            "candidate_count": self.candidate_count,
            "basis_size": self.basis_size,
            "plan": None if self.plan is None else self.plan.report_json(),
            "blocking": self.blocking,
        }


class Bad0Alice:
    """Phase-alternating Alice for the full badly-approximable run.

    Plays the absolute game on R^H.  Crossings of the interleaved radius
    thresholds trigger certificate emission and phase turnover; within a
    phase the embedded minor-game plan drives deletions.  A certificate
    witness marks the run failed (diagnostics preserved) and the strategy
    plays dummies from then on — witnesses are surfaced, never swallowed.
    """

    def __init__(
        self,
        m_rows: int,
        n_cols: int,
        R: Number,
        max_phase_index: int = 4,
        budget: int = 500_000,
        grid_divisor: int = 8,
    ):
        self.m_rows = m_rows
        self.n_cols = n_cols
        self.R = to_real(R)
        self.max_phase_index = max_phase_index
        self.budget = budget
        self.grid_divisor = grid_divisor
        self._clear()

    def _clear(self) -> None:
        self.W: Optional[WindowParams] = None
        self.gates: Optional[dict] = None
        self.next_k = 0
        self.next_h = 0
        self.phase: Optional[tuple[str, int, MinorGamePlan]] = None
        self.certificates: list[CertifyResult] = []
        self.phase_reports: list[PhaseReport] = []
        self.failed = False
        self.schedule_primal: Optional[ConstantsSchedule] = None
        self.schedule_dual: Optional[ConstantsSchedule] = None

    def reset(self, params: GameParams) -> None:
        if params.variant != "hyperplane_absolute":
            raise ValueError("the Bad₀ strategy plays the absolute variant")
        self._clear()

    # -- bookkeeping helpers ---------------------------------------------------

    def witnesses(self) -> list[CertificateWitness]:
        return [c for c in self.certificates if isinstance(c, CertificateWitness)]

    def finished_through(self, i: int) -> bool:
        return self.next_h > i or self.failed

    def _ensure_window_params(self, params: GameParams, ball: Ball) -> None:
        if self.W is not None:
            return
        self.W = window_params_from_opening(
            self.m_rows, self.n_cols, self.R, params.beta, ball
        )
        self.schedule_primal = ConstantsSchedule(
            dim=self.n_cols, beta=params.beta, sigma=self.W.sigma
        )
        self.schedule_dual = ConstantsSchedule(
            dim=self.m_rows, beta=params.beta, sigma=self.W.sigma
        )
        self.gates = self.W.part_two_gates(self.schedule_primal.nu[self.n_cols])

    # -- phase machinery ---------------------------------------------------------

    def _open_phase(
        self, kind: str, index: int, ball: Ball, params: GameParams
    ) -> None:
        if kind == "primal":
            side, family = "Y", "cols"
            dim_limit = self.n_cols
            schedule = self.schedule_primal
            end_threshold = self.W.h_threshold(index)
        else:
            side, family = "X", "rows"
            dim_limit = self.m_rows
            schedule = self.schedule_dual
            end_threshold = self.W.k_threshold(index + 1)
        candidates = enumerate_S(
            ball, self.W, index if kind == "primal" else index + 1,
            side=side, budget=self.budget,
        )
        basis = gram_schmidt_extend(candidates, dim_limit, ambient_dim=self.W.l_dim)
        mu_forced = end_threshold / ball.radius
        plan = MinorGamePlan(
            basis=basis,
            m_rows=self.m_rows,
            n_cols=self.n_cols,
            family=family,
            schedule=schedule,
            mu_target=mu_forced,
            rho_anchor=ball.radius,
            grid_divisor=self.grid_divisor,
            strict_postconditions=False,
        )
        self.phase = (kind, index, plan)
        self.phase_reports.append(
            PhaseReport(
                kind=kind,
                index=index,
                start_radius=ball.radius,
                mu_forced=mu_forced,
                candidate_count=len(candidates),
                basis_size=len(basis),
                plan=plan,
            )
        )

    def _close_phase(self, ball: Ball) -> None:
        if self.phase is None:
            return
        kind, index, plan = self.phase
        if kind == "primal":
            stage_bound = self.W.h_threshold(index)
        else:
            stage_bound = self.W.k_threshold(index + 1)
        report = self.phase_reports[-1]
        report.blocking = blocking_check(
            ball,
            plan.basis,
            self.m_rows,
            self.n_cols,
            plan.family,
            stage_bound,
            self.grid_divisor,
        )
        self.phase = None

    # -- the move function ---------------------------------------------------------

    def move(self, params: GameParams, transcript: GameTranscript) -> AliceMove:
        ball = transcript.current_ball()
        self._ensure_window_params(params, ball)
        if self.failed:
            return AliceMove(slabs=(dummy_slab(ball, 0),))

        # Threshold crossings, processed at most one per turn, larger first.
        if (
            self.next_k <= self.max_phase_index + 1
            and (self.next_k <= self.next_h)
            and ball.radius < self.W.k_threshold(self.next_k)
        ):
            i = self.next_k
            self.next_k += 1
            cert = certify_no_solution(ball, self.W, "X", i, self.budget)
            self.certificates.append(cert)
            if isinstance(cert, CertificateWitness):
                self.failed = True
                return AliceMove(slabs=(dummy_slab(ball, 0),))
            self._close_phase(ball)
            if i <= self.max_phase_index:
                self._open_phase("primal", i, ball, params)
                return self._phase_move(ball)
            return AliceMove(slabs=(dummy_slab(ball, 0),))

        if (
            self.next_h <= self.max_phase_index
            and ball.radius < self.W.h_threshold(self.next_h)
        ):
            j = self.next_h
            self.next_h += 1
            cert = certify_no_solution(ball, self.W, "Y", j, self.budget)
            self.certificates.append(cert)
            if isinstance(cert, CertificateWitness):
                self.failed = True
                return AliceMove(slabs=(dummy_slab(ball, 0),))
            self._close_phase(ball)
            # The dual phase at h_j prepares the X-block certified at the
            # next k-crossing; after the last requested phase none is needed.
            if j < self.max_phase_index:
                self._open_phase("dual", j, ball, params)
                return self._phase_move(ball)
            return AliceMove(slabs=(dummy_slab(ball, 0),))

        return self._phase_move(ball)

    def _phase_move(self, ball: Ball) -> AliceMove:
        if self.phase is None:
            return AliceMove(slabs=(dummy_slab(ball, 0),))
        slab = self.phase[2].decide(ball)
        if slab is None:
            return AliceMove(slabs=(dummy_slab(ball, 0),))
        return AliceMove(slabs=(slab,))


@dataclass
class Bad0RunResult:
    transcript: GameTranscript
    alice: Bad0Alice

    @property
    def window_params(self) -> WindowParams:
        return self.alice.W

    def certificates_json(self) -> list[dict]:
        return [c.to_json_dict() for c in self.alice.certificates]

    def succeeded_through(self, i: int) -> bool:
        have = {
            (c.phase, c.index)
            for c in self.alice.certificates
            if isinstance(c, NoSolutionCertificate)
        }
        return all(("X", k) in have for k in range(i + 1)) and all(
            ("Y", k) in have for k in range(i + 1)
        ) and not self.alice.witnesses()


def run_bad0(
    m_rows: int,
    n_cols: int,
    R: Number,
    beta: Number,
    bob,
    opening: Ball,
    max_phase_index: int = 4,
    budget: int = 500_000,
    max_rounds: int = 500,
) -> Bad0RunResult:
    """Play a full Bad₀ run through phase max_phase_index against one Bob."""
    alice = Bad0Alice(
        m_rows=m_rows,
        n_cols=n_cols,
        R=to_real(R),
        max_phase_index=max_phase_index,
        budget=budget,
    )
    params = GameParams(
        variant="hyperplane_absolute",
        dimension=m_rows * n_cols,
        beta=to_real(beta),
        max_rounds=max_rounds,
    )
    transcript = play(
        params,
        alice,
        _OpeningBob(opening, bob),
        stop_when=lambda t: alice.finished_through(max_phase_index),
    )
    return Bad0RunResult(transcript=transcript, alice=alice)


def choose_R(
    m_rows: int,
    n_cols: int,
    beta: Number,
    seed: int,
    opening: Optional[Ball] = None,
    games: int = 4,
    max_doublings: int = 10,
) -> mpf:
    """Smallest power-of-two-scaled R whose short runs produce no witnesses.

    Doubling search realizing the existence assertion for the expansion
    constant: R is doubled until `games` seeded random runs each complete
    phase 0 with certificates only.
    """
    from .players import RandomBob

    h_dim = m_rows * n_cols
    if opening is None:
        opening = Ball(tuple(mpf(0) for _ in range(h_dim)), mpf("0.3"))
    R = mpf(4)
    for _ in range(max_doublings):
        ok = True
        for g in range(games):
            result = run_bad0(
                m_rows,
                n_cols,
                R,
                beta,
                RandomBob(seed + g),
                opening,
                max_phase_index=0,
                max_rounds=120,
            )
            if result.alice.witnesses():
                ok = False
                break
        if ok:
            return R
        R = R * 2
    raise RuntimeError(f"no witness-free R found up to {R}")
