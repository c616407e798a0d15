"""Stock strategies: seeded random and adversarial Bobs, simple Alices.

Every strategy is a deterministic function of its construction arguments
(seed included) and the transcript it is shown, so finished games replay
byte-identically.
"""

from __future__ import annotations

import random
from typing import Optional, Sequence

from mpmath import mpf

from .engine import (
    AliceMove,
    GameParams,
    GameTranscript,
    validate_bob_move,
)
from .geometry import Ball, HyperplaneSlab, v_dist, dist_point_hyperplane
from .precision import to_real


def dummy_slab(current: Ball, epsilon: mpf | float = 0) -> HyperplaneSlab:
    """A slab so far from the current ball that it constrains nothing.

    Its central plane sits at distance 4·(ρ + βρ-cap) from the ball center,
    comfortably beyond the reach ρ + ε of any legal sub-ball.
    """
    d = current.dim
    normal = tuple(mpf(1 if i == 0 else 0) for i in range(d))
    clearance = 4 * (current.radius + to_real(epsilon) + current.radius)
    offset = current.center[0] + clearance
    return HyperplaneSlab(normal, offset, to_real(epsilon))


def _unit_ball(dimension: int) -> Ball:
    return Ball(tuple(mpf(0) for _ in range(dimension)), mpf(1))


class DummyAlice:
    """Deletes only far-away slabs; the baseline do-nothing opponent."""

    def __init__(self, n_slabs: int = 1):
        self.n_slabs = n_slabs

    def reset(self, params: GameParams) -> None:
        pass

    def move(self, params: GameParams, transcript: GameTranscript) -> AliceMove:
        current = transcript.current_ball()
        n = 1 if params.variant == "hyperplane_absolute" else self.n_slabs
        return AliceMove(slabs=tuple(dummy_slab(current) for _ in range(n)))


class CenterShrinkAlice:
    """Schmidt-variant Alice: concentric ball of radius α·ρ."""

    def reset(self, params: GameParams) -> None:
        pass

    def move(self, params: GameParams, transcript: GameTranscript) -> AliceMove:
        current = transcript.current_ball()
        return AliceMove(ball=Ball(current.center, params.alpha * current.radius))


class CenterShrinkBob:
    """Keeps the center and shrinks by the exact legal factor each turn."""

    def __init__(self, opening: Optional[Ball] = None):
        self.opening = opening

    def reset(self, params: GameParams) -> None:
        pass

    def move(
        self, params: GameParams, transcript: GameTranscript
    ) -> Optional[Ball]:
        current = transcript.current_ball()
        if current is None:
            return self.opening or _unit_ball(params.dimension)
        if params.variant == "schmidt":
            anchor = transcript.last_alice_move().ball
            return Ball(anchor.center, params.beta * anchor.radius)
        return Ball(current.center, params.beta * current.radius)


def _sample_in_ball(rng: random.Random, dim: int, reach: float) -> list[float]:
    """Uniform draw from the ball of the given radius (float coordinates)."""
    while True:
        gauss = [rng.gauss(0.0, 1.0) for _ in range(dim)]
        norm = sum(g * g for g in gauss) ** 0.5
        if norm > 0:
            break
    u = rng.random() ** (1.0 / dim)
    scale = reach * u / norm
    return [g * scale for g in gauss]


class RandomBob:
    """Seeded random legal play: random shrink factor, random center.

    Candidates are rejection-sampled against the full referee check; if none
    of ``max_tries`` random candidates is legal the strategy falls back to a
    deterministic lattice scan, and resigns only when that scan also fails.
    """

    def __init__(
        self,
        seed: int,
        opening: Optional[Ball] = None,
        shrink_range: tuple[float, float] = (1.0, 2.0),
        max_tries: int = 200,
    ):
        self.seed = seed
        self.opening = opening
        self.shrink_range = shrink_range
        self.max_tries = max_tries
        self._rng = random.Random(seed)

    def reset(self, params: GameParams) -> None:
        self._rng = random.Random(self.seed)

    def _radius_factor(self, params: GameParams) -> mpf:
        lo, hi = self.shrink_range
        mult = self._rng.uniform(lo, hi)
        factor = params.beta * to_real(mult)
        return factor if factor < 1 else (1 + params.beta) / 2

    def move(
        self, params: GameParams, transcript: GameTranscript
    ) -> Optional[Ball]:
        current = transcript.current_ball()
        if current is None:
            return self.opening or _unit_ball(params.dimension)
        if params.variant == "schmidt":
            anchor = transcript.last_alice_move().ball
            return Ball(anchor.center, params.beta * anchor.radius)
        for _ in range(self.max_tries):
            r_new = current.radius * self._radius_factor(params)
            reach = current.radius - r_new
            offset = _sample_in_ball(self._rng, params.dimension, float(reach))
            center = tuple(
                c + to_real(o) for c, o in zip(current.center, offset)
            )
            candidate = Ball(center, r_new)
            if validate_bob_move(params, transcript, candidate) == "legal":
                return candidate
        return _lattice_fallback(params, transcript, current)


def _lattice_fallback(
    params: GameParams, transcript: GameTranscript, current: Ball
) -> Optional[Ball]:
    """Deterministic scan matching the referee's no-legal-move lattice."""
    r_new = params.beta * current.radius
    pitch = r_new / 4
    reach = current.radius - r_new
    steps = int(reach / pitch) + 1
    d = params.dimension

    def rec(prefix: list[int]) -> Optional[Ball]:
        if len(prefix) == d:
            center = tuple(current.center[i] + pitch * prefix[i] for i in range(d))
            if v_dist(center, current.center) > reach:
                return None
            candidate = Ball(center, r_new)
            if validate_bob_move(params, transcript, candidate) == "legal":
                return candidate
            return None
        for m in range(-steps, steps + 1):
            found = rec(prefix + [m])
            if found is not None:
                return found
        return None

    return rec([])


class GreedyThreatBob:
    """Adversarial Bob: picks the legal candidate most hostile to Alice.

    mode="hug_planes": stays as close as possible to the nearest deleted
    plane, probing the strategy's separation margins.
    mode="max_intersect": keeps intersecting as many slabs as legality
    allows, stressing the re-submission bookkeeping.  Both shrink by the
    exact factor β to maximize game depth per turn.
    """

    def __init__(
        self,
        seed: int,
        mode: str = "hug_planes",
        opening: Optional[Ball] = None,
        samples: int = 60,
    ):
        if mode not in ("hug_planes", "max_intersect"):
            raise ValueError(f"unknown mode {mode!r}")
        self.seed = seed
        self.mode = mode
        self.opening = opening
        self.samples = samples
        self._rng = random.Random(seed)

    def reset(self, params: GameParams) -> None:
        self._rng = random.Random(self.seed)

    def move(
        self, params: GameParams, transcript: GameTranscript
    ) -> Optional[Ball]:
        current = transcript.current_ball()
        if current is None:
            return self.opening or _unit_ball(params.dimension)
        if params.variant == "schmidt":
            anchor = transcript.last_alice_move().ball
            return Ball(anchor.center, params.beta * anchor.radius)
        slabs = transcript.last_alice_move().slabs
        r_new = params.beta * current.radius
        reach = current.radius - r_new
        best: Optional[tuple] = None
        best_ball: Optional[Ball] = None
        for _ in range(self.samples):
            offset = _sample_in_ball(self._rng, params.dimension, float(reach))
            center = tuple(c + to_real(o) for c, o in zip(current.center, offset))
            candidate = Ball(center, r_new)
            if validate_bob_move(params, transcript, candidate) != "legal":
                continue
            if self.mode == "hug_planes":
                score = min(
                    (dist_point_hyperplane(center, s) for s in slabs),
                    default=mpf(0),
                )
            else:
                intersected = sum(
                    1
                    for s in slabs
                    if dist_point_hyperplane(center, s) <= s.epsilon + r_new
                )
                score = -mpf(intersected)
            key = (score, tuple(center))
            if best is None or key < best:
                best = key
                best_ball = candidate
        if best_ball is not None:
            return best_ball
        return _lattice_fallback(params, transcript, current)


class RecordedBob:
    """Replays a fixed sequence of balls (for revalidation and fuzz tests)."""

    def __init__(self, balls: Sequence[Ball]):
        self.balls = list(balls)
        self._i = 0

    def reset(self, params: GameParams) -> None:
        self._i = 0

    def move(
        self, params: GameParams, transcript: GameTranscript
    ) -> Optional[Ball]:
        if self._i >= len(self.balls):
            return None
        ball = self.balls[self._i]
        self._i += 1
        return ball


class SplitRoundsAliceAdapter:
    """Drives a coarse-game Alice through a finer percentage game.

    The inner strategy thinks it plays with rule parameters (β, p) where
    β = (β′)^m; the adapter re-submits her current slab list in each of the m
    consecutive fine rounds and shows her only every m-th ball.  A ball that
    avoids a fraction p′ of the re-submitted slabs in each fine round avoids a
    fraction 1 − (1 − p′)^m ≥ p of the originals by nesting.
    """

    def __init__(self, inner, m: int, coarse_params: GameParams):
        self.inner = inner
        self.m = m
        self.coarse_params = coarse_params
        self._coarse: Optional[GameTranscript] = None
        self._cached: Optional[AliceMove] = None
        self._fine_round = 0

    def reset(self, params: GameParams) -> None:
        reset = getattr(self.inner, "reset", None)
        if reset is not None:
            reset(self.coarse_params)
        self._coarse = GameTranscript(self.coarse_params)
        self._cached = None
        self._fine_round = 0

    def move(self, params: GameParams, transcript: GameTranscript) -> AliceMove:
        from .engine import TurnRecord

        if self._fine_round % self.m == 0:
            # Show the inner strategy the latest ball and ask for fresh slabs.
            ball = transcript.current_ball()
            self._coarse.append(TurnRecord(player="bob", verdict="legal", ball=ball))
            inner_move = self.inner.move(self.coarse_params, self._coarse)
            self._coarse.append(
                TurnRecord(
                    player="alice",
                    verdict="legal",
                    ball=inner_move.ball,
                    slabs=inner_move.slabs,
                )
            )
            self._cached = inner_move
        self._fine_round += 1
        return AliceMove(slabs=self._cached.slabs)
