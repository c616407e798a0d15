"""Alice's winning strategy for escaping expanding-image target sets.

Setting: a sequence of M×N matrices with operator norms t_k growing
lacunarily (ratios ≥ Q > 1), and for each k a uniformly discrete target set
Z_k in R^M (pairwise separation ≥ δ_sep).  Alice plays the hyperplane
percentage game with p = 1/2 and steers the game point x so that every value
dist(M_k·x, Z_k) stays above an explicit constant.

The play is organized in windows of matrix indices (grouped by the size of
t_k) and stages of the game (grouped by ball radius).  During stage j Alice
deletes one slab per index k in window j — the slab of points whose image
under M_k lands near the unique reachable target — and re-submits the slabs
that still touch Bob's ball for up to r−1 follow-up turns.  Each Bob move
halves the surviving count, and β^{-r} ≤ Q^n makes the window fit the stage.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from mpmath import mp, mpf, nint

from fractions import Fraction

from .engine import AliceMove, GameParams, GameTranscript, play
from .geometry import (
    Ball,
    HyperplaneSlab,
    ball_avoids_slab,
    mat_t_vec,
    mat_vec,
    min_norm_preimage,
    top_singular,
    v_dist,
    v_dot,
    v_norm,
)
from .players import dummy_slab
from .precision import Number, real_to_str, tau, to_real, vec


class NonLacunary(RuntimeError):
    """Norm ratio at some index fell at or below the declared threshold."""

    def __init__(self, index: int, ratio: mpf):
        super().__init__(f"norm ratio {ratio} at index {index} is not lacunary")
        self.index = index
        self.ratio = ratio


class NotDiscrete(RuntimeError):
    """Two target points at some index are closer than the declared floor."""

    def __init__(self, index: int, pair: tuple, dist: mpf):
        super().__init__(
            f"target points {pair[0]} and {pair[1]} at index {index} "
            f"are only {dist} apart"
        )
        self.index = index
        self.pair = pair
        self.dist = dist


class MultipleTargets(RuntimeError):
    """Two target points are reachable from one stage ball.

    Signals that the first-ball gate was not actually satisfied for this
    system (the ball is too large relative to the target separation).
    """

    def __init__(self, k: int, candidates: list):
        super().__init__(
            f"index {k}: {len(candidates)} reachable target points, expected 1"
        )
        self.k = k
        self.candidates = candidates


class StrategyInvariantError(RuntimeError):
    """Internal bookkeeping contradiction (impossible against a legal referee)."""


# ---------------------------------------------------------------------------
# Systems: matrix sequences and enumerable target sets


class PowerMatrices:
    """1×1 matrices (base^k), k = 0, 1, 2, ..."""

    def __init__(self, base: Number):
        self.base = to_real(base)

    def matrix(self, k: int) -> tuple[tuple[mpf, ...], ...]:
        return ((self.base**k,),)


class ExplicitMatrices:
    """A finite explicit list of M×N matrices."""

    def __init__(self, matrices: Sequence[Sequence[Sequence[Number]]]):
        self.matrices = [tuple(vec(row) for row in m) for m in matrices]

    def __len__(self) -> int:
        return len(self.matrices)

    def matrix(self, k: int) -> tuple[tuple[mpf, ...], ...]:
        return self.matrices[k]


@dataclass(frozen=True)
class LatticeTargets:
    """Z_k = shift + Z^M for every k."""

    shift: tuple[mpf, ...]

    def __post_init__(self):
        object.__setattr__(self, "shift", vec(self.shift))

    def points_in_ball(
        self, k: int, center: Sequence[mpf], radius: mpf
    ) -> list[tuple[mpf, ...]]:
        m = len(self.shift)
        ranges: list[list[int]] = []
        for i in range(m):
            lo = int(mp.floor(center[i] - self.shift[i] - radius))
            hi = int(mp.ceil(center[i] - self.shift[i] + radius))
            ranges.append(list(range(lo, hi + 1)))
        out: list[tuple[mpf, ...]] = []

        def rec(prefix: list[int]) -> None:
            if len(prefix) == m:
                point = tuple(
                    self.shift[i] + prefix[i] for i in range(m)
                )
                if v_dist(point, center) <= radius:
                    out.append(point)
                return
            for z in ranges[len(prefix)]:
                rec(prefix + [z])

        rec([])
        return out

    def min_dist(self, k: int, point: Sequence[mpf]) -> mpf:
        diffs = tuple(x - s for x, s in zip(point, self.shift))
        return v_norm(tuple(d - nint(d) for d in diffs))


class ScaledLatticeTargets:
    """Z_k = (scale^k)·Z^M — separation shrinks with k when scale < 1."""

    def __init__(self, scale: Number, dim: int = 1):
        self.scale = to_real(scale)
        self.dim = dim

    def points_in_ball(self, k, center, radius):
        s = self.scale**k
        m = self.dim
        ranges = []
        for i in range(m):
            lo = int(mp.floor((center[i] - radius) / s))
            hi = int(mp.ceil((center[i] + radius) / s))
            ranges.append(range(lo, hi + 1))
        out = []

        def rec(prefix):
            if len(prefix) == m:
                point = tuple(s * z for z in prefix)
                if v_dist(point, center) <= radius:
                    out.append(point)
                return
            for z in ranges[len(prefix)]:
                rec(prefix + [z])

        rec([])
        return out

    def min_dist(self, k, point):
        s = self.scale**k
        return v_norm(tuple(x - s * nint(x / s) for x in point))


class LacunarySystem:
    """Matrix sequence plus enumerable targets, with cached norm data."""

    def __init__(self, matrices, targets, m_rows: int, n_cols: int):
        self.matrices = matrices
        self.targets = targets
        self.m_rows = m_rows
        self.n_cols = n_cols
        self._pairs: dict[int, tuple[mpf, tuple[mpf, ...]]] = {}

    def matrix(self, k: int) -> tuple[tuple[mpf, ...], ...]:
        return self.matrices.matrix(k)

    def singular_pair(self, k: int) -> tuple[mpf, tuple[mpf, ...]]:
        if k not in self._pairs:
            self._pairs[k] = top_singular(self.matrix(k))
        return self._pairs[k]

    def t(self, k: int) -> mpf:
        return self.singular_pair(k)[0]

    def max_index(self) -> Optional[int]:
        try:
            return len(self.matrices) - 1
        except TypeError:
            return None


def system_from_json(spec: dict) -> tuple[LacunarySystem, mpf]:
    """Build a system from {"matrices": ..., "targets": ..., "beta": ...}."""
    mspec = spec["matrices"]
    if mspec["kind"] == "power":
        matrices = PowerMatrices(mpf(str(mspec["base"])))
        m_rows = n_cols = 1
    elif mspec["kind"] == "explicit":
        matrices = ExplicitMatrices(
            [[[mpf(str(x)) for x in row] for row in mat] for mat in mspec["list"]]
        )
        m_rows = len(matrices.matrix(0))
        n_cols = len(matrices.matrix(0)[0])
    else:
        raise ValueError(f"unknown matrices kind {mspec['kind']!r}")
    tspec = spec["targets"]
    if tspec["kind"] != "lattice":
        raise ValueError(f"unknown targets kind {tspec['kind']!r}")
    shift = tuple(mpf(str(x)) for x in tspec["shift"])
    if len(shift) != m_rows:
        raise ValueError("target shift dimension must match matrix rows")
    system = LacunarySystem(matrices, LatticeTargets(shift), m_rows, n_cols)
    return system, mpf(str(spec["beta"]))


# ---------------------------------------------------------------------------
# Checks and schedule arithmetic


def check_lacunary(system: LacunarySystem, K: int, q_min: Number = 1) -> mpf:
    """Min norm ratio t_{k+1}/t_k over k < K; raises if any ratio ≤ q_min."""
    if K < 2:
        raise ValueError("need at least two indices to check ratios")
    floor_q = to_real(q_min)
    best: Optional[mpf] = None
    prev = system.t(0)
    for k in range(1, K):
        cur = system.t(k)
        if prev == 0:
            raise NonLacunary(k - 1, mpf(0))
        ratio = cur / prev
        if ratio <= floor_q:
            raise NonLacunary(k - 1, ratio)
        if best is None or ratio < best:
            best = ratio
        prev = cur
    return best


def check_uniformly_discrete(
    system: LacunarySystem,
    K: int,
    probe: Ball,
    delta_min: Number = 0,
) -> mpf:
    """Min pairwise distance among enumerated target points, over k < K.

    Raises NotDiscrete with the offending pair if any distance falls at or
    below delta_min.
    """
    floor_d = to_real(delta_min)
    best: Optional[mpf] = None
    for k in range(K):
        points = system.targets.points_in_ball(k, probe.center, probe.radius)
        for i in range(len(points)):
            for j in range(i + 1, len(points)):
                d = v_dist(points[i], points[j])
                if d <= floor_d:
                    raise NotDiscrete(k, (points[i], points[j]), d)
                if best is None or d < best:
                    best = d
    if best is None:
        raise ValueError("probe ball contained fewer than two target points")
    return best


def compute_n_r(beta: Number, Q: Number) -> tuple[int, int]:
    """Minimal n with β^{-r(n)} ≤ Q^n, where r(n) = ⌊log₂ n⌋ + 1."""
    b = to_real(beta)
    q = to_real(Q)
    if not 0 < b < 1 or not q > 1:
        raise ValueError("need 0 < beta < 1 and Q > 1")
    slack = 1 + tau()
    n = 0
    while True:
        n += 1
        r = n.bit_length()
        if (1 / b) ** r <= (q**n) * slack:
            return n, r
        if n > 10**6:
            raise RuntimeError("compute_n_r failed to terminate")


@dataclass(frozen=True)
class WindowSchedule:
    """Window partition of [t1, ∞): window j is [β^{-r(j-1)}·t1, β^{-r·j}·t1)."""

    beta: mpf
    n: int
    r: int
    t1: mpf

    def __post_init__(self):
        object.__setattr__(self, "beta", to_real(self.beta))
        object.__setattr__(self, "t1", to_real(self.t1))

    def window_upper(self, j: int) -> mpf:
        return self.t1 * (1 / self.beta) ** (self.r * j)

    def window_of(self, t: Number) -> int:
        """The unique j with β^{-r(j-1)}·t1 ≤ t < β^{-r·j}·t1 (left-closed)."""
        tv = to_real(t)
        slack = tau() * max(mpf(1), tv)
        if tv < self.t1 - slack:
            raise ValueError(f"t = {tv} is below the first window start {self.t1}")
        j = 1
        while tv >= self.window_upper(j) - slack:
            j += 1
        return j


def first_ball_gate(
    schedule: WindowSchedule, delta_sep: Number, rho1: Number
) -> bool:
    """Accept iff ρ1 < β^r·δ_sep·t1/4 (conservative: ties rejected)."""
    gate = gate_radius(schedule, delta_sep)
    r1 = to_real(rho1)
    return r1 < gate * (1 - tau())


def gate_radius(schedule: WindowSchedule, delta_sep: Number) -> mpf:
    return (schedule.beta**schedule.r) * to_real(delta_sep) * schedule.t1 / 4


def theoretical_c(
    schedule: WindowSchedule, rho1: Number, t1: Number, delta_sep: Number
) -> mpf:
    """The protected distance constant: min(β^{r+1}·ρ1·t1, δ_sep/4)."""
    a = schedule.beta ** (schedule.r + 1) * to_real(rho1) * to_real(t1)
    return min(a, to_real(delta_sep) / 4)


# ---------------------------------------------------------------------------
# Stage move construction


@dataclass
class StageSlab:
    k: int
    t_k: mpf
    slab: HyperplaneSlab
    target: tuple[mpf, ...]


def window_indices(
    system: LacunarySystem, schedule: WindowSchedule, j: int
) -> list[int]:
    """All matrix indices whose norm lies in window j (at most n of them)."""
    upper = schedule.window_upper(j)
    out: list[int] = []
    k = 0
    max_k = system.max_index()
    while True:
        if max_k is not None and k > max_k:
            break
        t_k = system.t(k)
        if t_k >= upper:
            break
        if schedule.window_of(t_k) == j:
            out.append(k)
        k += 1
        if k > 10**6:
            raise RuntimeError("window scan failed to terminate")
    return out


def stage_slabs(
    system: LacunarySystem,
    schedule: WindowSchedule,
    ball: Ball,
    j: int,
    delta_sep: Number,
    zeta: Number,
) -> list[StageSlab]:
    """One slab per index k in window j whose target set is reachable.

    For each such k: find the unique y ∈ Z_k with
    ball ∩ M_k^{-1}(B(y, δ_sep/4)) ≠ ∅ (checked conservatively through the
    ball center), and delete the slab around the plane through a preimage of
    y perpendicular to M_k^T M_k v_k, thickened to ζ.

    Raises MultipleTargets(k) when two targets are reachable — the signal
    that the first-ball gate was violated.
    """
    delta = to_real(delta_sep)
    zeta_v = to_real(zeta)
    out: list[StageSlab] = []
    for k in window_indices(system, schedule, j):
        matrix = system.matrix(k)
        t_k, v_k = system.singular_pair(k)
        image = mat_vec(matrix, ball.center)
        reach = t_k * ball.radius + delta / 4
        margin = tau() * max(mpf(1), reach)
        candidates = [
            y
            for y in system.targets.points_in_ball(k, image, reach + margin)
            if v_dist(image, y) <= reach + margin
        ]
        if len(candidates) > 1:
            raise MultipleTargets(k, candidates)
        if not candidates:
            continue
        y = candidates[0]
        x0 = min_norm_preimage(matrix, y)
        normal = mat_t_vec(matrix, mat_vec(matrix, v_k))  # M^T M v_k
        slab = HyperplaneSlab(normal, v_dot(normal, x0), zeta_v)
        out.append(StageSlab(k=k, t_k=t_k, slab=slab, target=y))
    return out


def halving_followup(
    pending: Sequence[StageSlab], bob_ball: Ball
) -> list[StageSlab]:
    """The slabs still touching Bob's latest ball (to be re-submitted)."""
    return [s for s in pending if not ball_avoids_slab(bob_ball, s.slab)]


# ---------------------------------------------------------------------------
# The full Alice strategy


@dataclass
class StageCertificate:
    """Stage j completed: every index k in window j is protected."""

    stage: int
    ks: list[int]
    t_values: list[mpf]
    closing_radius: mpf


class EscapeAlice:
    """Stateful Alice for the percentage game with p = 1/2.

    Construction needs the verified lacunarity constant Q and separation
    δ_sep (from check_lacunary / check_uniformly_discrete or declared
    knowledge of the system).
    """

    def __init__(self, system: LacunarySystem, Q: Number, delta_sep: Number):
        self.system = system
        self.Q = to_real(Q)
        self.delta_sep = to_real(delta_sep)
        self.schedule: Optional[WindowSchedule] = None
        self._reset_state()

    def _reset_state(self) -> None:
        self.mode = "gate"
        self.rho1: Optional[mpf] = None
        self.stage = 0
        self.pending: list[StageSlab] = []
        self.submissions_in_stage = 0
        self.certificates: list[StageCertificate] = []
        self.stage_ks: list[int] = []
        self.stage_ts: list[mpf] = []

    def reset(self, params: GameParams) -> None:
        if params.variant != "hyperplane_percentage":
            raise ValueError("the escape strategy plays the percentage variant")
        if params.p is None or params.p * 2 != 1:
            raise ValueError("the escape strategy requires p = 1/2")
        beta = params.beta
        n, r = compute_n_r(beta, self.Q)
        t1 = self.system.t(0)
        self.schedule = WindowSchedule(beta=beta, n=n, r=r, t1=t1)
        self._reset_state()

    # -- helpers ------------------------------------------------------------

    def gate(self) -> mpf:
        return gate_radius(self.schedule, self.delta_sep)

    def stage_threshold(self, j: int) -> mpf:
        """Radius at or below which stage j+1 begins: β^{r·j}·ρ1."""
        return self.rho1 * self.schedule.beta ** (self.schedule.r * j)

    def c_value(self) -> Optional[mpf]:
        if self.rho1 is None:
            return None
        return theoretical_c(
            self.schedule, self.rho1, self.schedule.t1, self.delta_sep
        )

    def completed_stages(self) -> int:
        return len(self.certificates)

    # -- the move function ----------------------------------------------------

    def move(self, params: GameParams, transcript: GameTranscript) -> AliceMove:
        ball = transcript.current_ball()
        if self.mode == "gate":
            if first_ball_gate(self.schedule, self.delta_sep, ball.radius):
                self.rho1 = ball.radius
                self.mode = "stage"
                self.stage = 1
                return self._enter_stage(ball)
            return AliceMove(slabs=(dummy_slab(ball, 0),))

        # Stage mode: possibly close the current stage first.
        if ball.radius <= self.stage_threshold(self.stage) * (1 + tau()):
            self._close_stage(ball)
            self.stage += 1
            return self._enter_stage(ball)

        # Mid-stage follow-up.
        self.pending = halving_followup(self.pending, ball)
        if self.pending and self.submissions_in_stage < self.schedule.r:
            self.submissions_in_stage += 1
            return AliceMove(slabs=tuple(s.slab for s in self.pending))
        return AliceMove(slabs=(dummy_slab(ball, 0),))

    def _enter_stage(self, ball: Ball) -> AliceMove:
        # ζ = β^r times the actual entry radius: legal to re-submit for the
        # whole stage, since after s ≤ r−1 follow-ups ρ ≥ β^s · ρ(entry).
        zeta = self.schedule.beta**self.schedule.r * ball.radius
        slabs = stage_slabs(
            self.system, self.schedule, ball, self.stage, self.delta_sep, zeta
        )
        self.pending = slabs
        self.stage_ks = [s.k for s in slabs]
        self.stage_ts = [s.t_k for s in slabs]
        self.submissions_in_stage = 1 if slabs else 0
        if not slabs:
            return AliceMove(slabs=(dummy_slab(ball, 0),))
        return AliceMove(slabs=tuple(s.slab for s in slabs))

    def _close_stage(self, ball: Ball) -> None:
        survivors = halving_followup(self.pending, ball)
        if survivors:
            raise StrategyInvariantError(
                f"stage {self.stage} closed with {len(survivors)} surviving "
                f"slabs; the halving bookkeeping has been violated"
            )
        self.certificates.append(
            StageCertificate(
                stage=self.stage,
                ks=list(self.stage_ks),
                t_values=list(self.stage_ts),
                closing_radius=ball.radius,
            )
        )
        self.pending = []


def verify_escape_certificates(
    system: LacunarySystem,
    alice: EscapeAlice,
    final_ball: Ball,
) -> list[dict]:
    """Check dist(M_k·x, Z_k) ≥ c − t_k·ρ_f for every certified index k.

    x is the final ball center, ρ_f the final radius.  Returns one row per
    certified index with the measured distance and the bound.
    """
    rows: list[dict] = []
    c = alice.c_value()
    x = final_ball.center
    rho_f = final_ball.radius
    for cert in alice.certificates:
        for k, t_k in zip(cert.ks, cert.t_values):
            image = mat_vec(system.matrix(k), x)
            measured = system.targets.min_dist(k, image)
            bound = c - t_k * rho_f
            rows.append(
                {
                    "stage": cert.stage,
                    "k": k,
                    "distance": measured,
                    "bound": bound,
                    "ok": bool(measured >= bound - tau() * max(mpf(1), bound)),
                }
            )
    return rows


# ---------------------------------------------------------------------------
# Reduction helpers


def best_approximations(
    matrix: Sequence[Sequence[Number]], q_bound: int
) -> list[tuple[tuple[int, ...], float]]:
    """Successive minima of dist(A·q, Z^M) over integer q with 0 < ‖q‖ ≤ bound.

    Brute force: scan q in order of increasing Euclidean norm (ties broken
    lexicographically) and keep each q that strictly improves the distance.
    Terminates early if the distance hits zero (rational case).
    """
    rows = [[float(x) for x in row] for row in matrix]
    n = len(rows[0])

    candidates: list[tuple[float, tuple[int, ...]]] = []

    def build(prefix: list[int]) -> None:
        if len(prefix) == n:
            if any(prefix):
                q = tuple(prefix)
                norm = sum(x * x for x in q) ** 0.5
                if norm <= q_bound:
                    candidates.append((norm, q))
            return
        for z in range(-q_bound, q_bound + 1):
            build(prefix + [z])

    build([])
    candidates.sort()

    out: list[tuple[tuple[int, ...], float]] = []
    best = float("inf")
    for _, q in candidates:
        image = [sum(r[i] * q[i] for i in range(n)) for r in rows]
        err = sum((x - round(x)) ** 2 for x in image) ** 0.5
        if err < best:
            out.append((q, err))
            best = err
            if err == 0.0:
                break
    return out


def lacunary_subsequence(values: Sequence[float], q_min: float) -> list[int]:
    """Greedy index subsequence with consecutive ratios ≥ q_min.

    Keeps the first value, then each next value ≥ q_min times the last kept.
    """
    out: list[int] = []
    last: Optional[float] = None
    for i, v in enumerate(values):
        if last is None:
            out.append(i)
            last = v
        elif v >= q_min * last:
            out.append(i)
            last = v
    return out


# ---------------------------------------------------------------------------
# End-to-end orchestration


@dataclass
class EscapeRunResult:
    """A finished escape game plus the data needed to verify it."""

    transcript: GameTranscript
    alice: EscapeAlice
    system: LacunarySystem
    q_ratio: mpf
    delta_sep: mpf

    def completed_stages(self) -> int:
        return self.alice.completed_stages()

    def verification_rows(self) -> list[dict]:
        return verify_escape_certificates(
            self.system, self.alice, self.transcript.final_ball
        )

    def certificates_json(self) -> list[dict]:
        return [
            {
                "stage": c.stage,
                "ks": list(c.ks),
                "t_values": [real_to_str(t) for t in c.t_values],
                "closing_radius": real_to_str(c.closing_radius),
            }
            for c in self.alice.certificates
        ]


def run_escape(
    system: LacunarySystem,
    beta: Number,
    bob,
    target_stages: int = 6,
    max_rounds: int = 400,
    check_depth: int = 40,
    q_min: Number = 1,
    probe: Optional[Ball] = None,
) -> EscapeRunResult:
    """Measure the system's constants, then play until enough stages close.

    The lacunarity ratio and the target separation are measured from the
    system itself over ``check_depth`` indices rather than trusted from the
    caller; the game stops once ``target_stages`` stage certificates exist
    (or on the engine's usual termination conditions).
    """
    q_ratio = check_lacunary(system, check_depth, q_min=q_min)
    if probe is None:
        probe = Ball(vec([0] * system.m_rows), to_real(2))
    delta_sep = check_uniformly_discrete(system, check_depth, probe)
    alice = EscapeAlice(system, q_ratio, delta_sep)
    params = GameParams(
        variant="hyperplane_percentage",
        dimension=system.n_cols,
        beta=beta,
        p=Fraction(1, 2),
        max_rounds=max_rounds,
    )
    transcript = play(
        params,
        alice,
        bob,
        stop_when=lambda t: alice.completed_stages() >= target_stages,
    )
    return EscapeRunResult(
        transcript=transcript,
        alice=alice,
        system=system,
        q_ratio=q_ratio,
        delta_sep=delta_sep,
    )
