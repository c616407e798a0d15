"""Referee, move legality, transcripts, and strategy interfaces.

Three game variants are refereed on balls in R^d:

  * ``schmidt``: Alice picks a ball A_i ⊆ B_i with ρ(A_i) = α·ρ(B_i); Bob
    answers with B_{i+1} ⊆ A_i, ρ(B_{i+1}) = β·ρ(A_i).  Exact ratios.
  * ``hyperplane_absolute``: Alice deletes one thickened hyperplane per turn;
    Bob's next ball must avoid it, stay inside B_i, and keep ρ ≥ β·ρ(B_i).
  * ``hyperplane_percentage``: Alice deletes a finite list of N_i slabs; Bob
    must avoid at least p·N_i of them (count compared exactly as rationals).

The referee sets every submitted slab's thickness to β·ρ(current ball) — the
canonical choice, harmless to Alice and uniform for Bob.  A game instance is
strictly sequential; distinct instances share nothing.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from math import ceil
from typing import Callable, Optional, Protocol, Sequence, Union

from mpmath import mpf

from .geometry import (
    Ball,
    HyperplaneSlab,
    ball_avoids_slab,
    v_dist,
)
from .precision import real_to_str, tau, to_real

VARIANTS = ("schmidt", "hyperplane_absolute", "hyperplane_percentage")


def _as_fraction(x: Union[int, float, str, Fraction]) -> Fraction:
    if isinstance(x, str) and "/" in x:
        num, den = x.split("/")
        return Fraction(int(num), int(den))
    return Fraction(x)


@dataclass(frozen=True)
class GameParams:
    """Variant, dimension, ratios, and stop condition for one game."""

    variant: str
    dimension: int
    beta: mpf
    alpha: Optional[mpf] = None
    p: Optional[Fraction] = None
    max_rounds: int = 500
    stop_radius: Optional[mpf] = None

    def __post_init__(self):
        if self.variant not in VARIANTS:
            raise ValueError(f"unknown variant {self.variant!r}")
        object.__setattr__(self, "beta", to_real(self.beta))
        if not 0 < self.beta < 1:
            raise ValueError("beta must lie in (0, 1)")
        if self.variant == "schmidt":
            if self.alpha is None:
                raise ValueError("schmidt variant requires alpha")
            object.__setattr__(self, "alpha", to_real(self.alpha))
            if not 0 < self.alpha < 1:
                raise ValueError("alpha must lie in (0, 1)")
        else:
            if not self.beta < to_real(1) / 3:
                raise ValueError("hyperplane variants require beta < 1/3")
        if self.variant == "hyperplane_percentage":
            p = _as_fraction(self.p if self.p is not None else Fraction(1, 2))
            object.__setattr__(self, "p", p)
            if not 0 < p < 1:
                raise ValueError("p must lie in (0, 1)")
        if self.dimension < 1:
            raise ValueError("dimension must be positive")
        if self.stop_radius is not None:
            object.__setattr__(self, "stop_radius", to_real(self.stop_radius))

    def to_json_dict(self) -> dict:
        out: dict = {
            "variant": self.variant,
            "dimension": self.dimension,
            "beta": real_to_str(self.beta),
        }
        if self.alpha is not None:
            out["alpha"] = real_to_str(self.alpha)
        if self.p is not None:
            out["p"] = f"{self.p.numerator}/{self.p.denominator}"
        out["max_rounds"] = self.max_rounds
        out["stop_radius"] = (
            None if self.stop_radius is None else real_to_str(self.stop_radius)
        )
        return out

    @classmethod
    def from_json_dict(cls, d: dict) -> "GameParams":
        return cls(
            variant=d["variant"],
            dimension=int(d["dimension"]),
            beta=mpf(d["beta"]),
            alpha=mpf(d["alpha"]) if d.get("alpha") is not None else None,
            p=_as_fraction(d["p"]) if d.get("p") is not None else None,
            max_rounds=int(d.get("max_rounds", 500)),
            stop_radius=(
                mpf(d["stop_radius"]) if d.get("stop_radius") is not None else None
            ),
        )


@dataclass(frozen=True)
class AliceMove:
    """Either a ball (schmidt) or a nonempty list of slabs (hyperplane)."""

    ball: Optional[Ball] = None
    slabs: tuple[HyperplaneSlab, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, "slabs", tuple(self.slabs))


@dataclass(frozen=True)
class TurnRecord:
    player: str  # "alice" | "bob"
    verdict: str  # "legal" | "illegal: <reason>"
    ball: Optional[Ball] = None
    slabs: tuple[HyperplaneSlab, ...] = ()

    def to_json_dict(self) -> dict:
        out: dict = {"player": self.player}
        if self.slabs:
            out["slabs"] = [slab_to_json(s) for s in self.slabs]
        else:
            out["ball"] = ball_to_json(self.ball)
        out["verdict"] = self.verdict
        return out


def ball_to_json(b: Optional[Ball]) -> Optional[dict]:
    if b is None:
        return None
    return {
        "center": [real_to_str(x) for x in b.center],
        "radius": real_to_str(b.radius),
    }


def ball_from_json(d: dict) -> Ball:
    return Ball(tuple(mpf(x) for x in d["center"]), mpf(d["radius"]))


def slab_to_json(s: HyperplaneSlab) -> dict:
    return {
        "normal": [real_to_str(x) for x in s.normal],
        "offset": real_to_str(s.offset),
        "epsilon": real_to_str(s.epsilon),
    }


def slab_from_json(d: dict) -> HyperplaneSlab:
    return HyperplaneSlab(
        tuple(mpf(x) for x in d["normal"]), mpf(d["offset"]), mpf(d["epsilon"])
    )


class GameTranscript:
    """Ordered turn records plus the outcome and final ball."""

    def __init__(self, params: GameParams):
        self.params = params
        self.turns: list[TurnRecord] = []
        self.outcome: Optional[dict] = None
        self.final_ball: Optional[Ball] = None

    def append(self, record: TurnRecord) -> None:
        self.turns.append(record)

    def current_ball(self) -> Optional[Ball]:
        for rec in reversed(self.turns):
            if rec.player == "bob" and rec.verdict == "legal":
                return rec.ball
        return None

    def last_alice_move(self) -> Optional[TurnRecord]:
        for rec in reversed(self.turns):
            if rec.player == "alice" and rec.verdict == "legal":
                return rec
        return None

    def bob_round_count(self) -> int:
        return sum(
            1 for rec in self.turns if rec.player == "bob" and rec.verdict == "legal"
        )

    def to_json_dict(self) -> dict:
        return {
            "params": self.params.to_json_dict(),
            "turns": [t.to_json_dict() for t in self.turns],
            "outcome": self.outcome,
            "final_ball": ball_to_json(self.final_ball),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)

    @classmethod
    def from_json_dict(cls, d: dict) -> "GameTranscript":
        t = cls(GameParams.from_json_dict(d["params"]))
        for turn in d["turns"]:
            ball = turn.get("ball")
            slabs = turn.get("slabs")
            t.append(
                TurnRecord(
                    player=turn["player"],
                    verdict=turn["verdict"],
                    ball=ball_from_json(ball) if ball is not None else None,
                    slabs=(
                        tuple(slab_from_json(s) for s in slabs)
                        if slabs is not None
                        else ()
                    ),
                )
            )
        t.outcome = d.get("outcome")
        fb = d.get("final_ball")
        t.final_ball = ball_from_json(fb) if fb is not None else None
        return t

    @classmethod
    def from_json(cls, text: str) -> "GameTranscript":
        return cls.from_json_dict(json.loads(text))


class AliceStrategy(Protocol):
    def reset(self, params: GameParams) -> None: ...

    def move(self, params: GameParams, transcript: GameTranscript) -> AliceMove: ...


class BobStrategy(Protocol):
    def reset(self, params: GameParams) -> None: ...

    def move(
        self, params: GameParams, transcript: GameTranscript
    ) -> Optional[Ball]: ...


def referee_epsilon(params: GameParams, current: Ball) -> mpf:
    return params.beta * current.radius


def effective_alice_move(
    params: GameParams, current: Ball, move: AliceMove
) -> AliceMove:
    """Apply the referee's canonical slab thickness β·ρ(current ball)."""
    if params.variant == "schmidt":
        return move
    eps = referee_epsilon(params, current)
    return AliceMove(slabs=tuple(s.with_epsilon(eps) for s in move.slabs))


def count_avoided(ball: Ball, slabs: Sequence[HyperplaneSlab]) -> int:
    return sum(1 for s in slabs if ball_avoids_slab(ball, s))


def required_avoid_count(params: GameParams, n_slabs: int) -> int:
    if params.variant == "hyperplane_absolute":
        return 1
    target = params.p * n_slabs
    return ceil(target) if target.denominator != 1 else int(target)


def validate_alice_move(
    params: GameParams, transcript: GameTranscript, move: AliceMove
) -> tuple[str, AliceMove]:
    """Verdict plus the move as the referee will record it."""
    current = transcript.current_ball()
    if current is None:
        return "illegal: alice cannot move before bob's first ball", move
    if params.variant == "schmidt":
        if move.ball is None:
            return "illegal: schmidt variant requires a ball move", move
        a, b = move.ball, current
        tol = tau() * max(mpf(1), b.radius)
        if abs(a.radius - params.alpha * b.radius) > tol:
            return "illegal: radius (must be alpha times the current radius)", move
        if not b.contains_ball(a):
            return "illegal: containment", move
        return "legal", move
    if not move.slabs:
        return "illegal: hyperplane variants require at least one slab", move
    if params.variant == "hyperplane_absolute" and len(move.slabs) != 1:
        return "illegal: absolute variant forces exactly one slab per turn", move
    for s in move.slabs:
        if s.dim != params.dimension:
            return "illegal: slab dimension mismatch", move
    return "legal", effective_alice_move(params, current, move)


def validate_bob_move(
    params: GameParams, transcript: GameTranscript, ball: Ball
) -> str:
    if ball.dim != params.dimension:
        return "illegal: ball dimension mismatch"
    current = transcript.current_ball()
    if current is None:
        return "legal"  # opening ball: any ball in R^d
    last_alice = transcript.last_alice_move()
    if last_alice is None:
        return "illegal: bob moved twice in a row"
    tol = tau() * max(mpf(1), current.radius)
    if params.variant == "schmidt":
        anchor = last_alice.ball
        if abs(ball.radius - params.beta * anchor.radius) > tol:
            return "illegal: radius (must be beta times alice's radius)"
        if not anchor.contains_ball(ball):
            return "illegal: containment"
        return "legal"
    if ball.radius < params.beta * current.radius - tol:
        return "illegal: radius (below beta times the current radius)"
    if not current.contains_ball(ball):
        return "illegal: containment"
    avoided = count_avoided(ball, last_alice.slabs)
    needed = required_avoid_count(params, len(last_alice.slabs))
    if avoided < needed:
        return f"illegal: avoidance (avoided {avoided} of {len(last_alice.slabs)}, need {needed})"
    return "legal"


def has_legal_bob_move(params: GameParams, transcript: GameTranscript) -> bool:
    """Deterministic lattice search for any legal Bob reply.

    Candidates: radius β·ρ(B), centers on a lattice of pitch β·ρ(B)/4 inside
    B.  The scan realizes the existence argument at desk scale and is only
    invoked when a no-legal-move verdict must actually be decided.
    """
    current = transcript.current_ball()
    if current is None:
        return True
    if params.variant == "schmidt":
        last_alice = transcript.last_alice_move()
        anchor = last_alice.ball if last_alice is not None else current
        return Ball(anchor.center, params.beta * anchor.radius).dim == params.dimension
    r_new = params.beta * current.radius
    pitch = r_new / 4
    reach = current.radius - r_new
    steps = int(reach / pitch) + 1
    d = params.dimension

    def rec(prefix: list[int]) -> bool:
        if len(prefix) == d:
            center = tuple(
                current.center[i] + pitch * prefix[i] for i in range(d)
            )
            if v_dist(center, current.center) > reach:
                return False
            candidate = Ball(center, r_new)
            return validate_bob_move(params, transcript, candidate) == "legal"
        for m in range(-steps, steps + 1):
            if rec(prefix + [m]):
                return True
        return False

    return rec([])


def play(
    params: GameParams,
    alice: AliceStrategy,
    bob: BobStrategy,
    stop_when: Optional[Callable[[GameTranscript], bool]] = None,
) -> GameTranscript:
    """Alternate validated moves until a stop condition or a verdict ends play.

    The returned transcript's final ball stands in for the intersection point
    of the nested sequence, with error at most the final radius.
    """
    transcript = GameTranscript(params)
    for strategy in (alice, bob):
        reset = getattr(strategy, "reset", None)
        if reset is not None:
            reset(params)

    def finish(outcome: dict) -> GameTranscript:
        transcript.outcome = outcome
        transcript.final_ball = transcript.current_ball()
        return transcript

    opening = bob.move(params, transcript)
    if opening is None:
        return finish({"kind": "Stopped", "reason": "bob_resigned_at_open"})
    verdict = validate_bob_move(params, transcript, opening)
    transcript.append(TurnRecord(player="bob", verdict=verdict, ball=opening))
    if verdict != "legal":
        return finish({"kind": "IllegalMove", "player": "bob", "turn": 0})

    while True:
        move = alice.move(params, transcript)
        verdict, effective = validate_alice_move(params, transcript, move)
        transcript.append(
            TurnRecord(
                player="alice",
                verdict=verdict,
                ball=effective.ball,
                slabs=effective.slabs,
            )
        )
        if verdict != "legal":
            return finish(
                {
                    "kind": "IllegalMove",
                    "player": "alice",
                    "turn": len(transcript.turns) - 1,
                }
            )

        reply = bob.move(params, transcript)
        if reply is None:
            if not has_legal_bob_move(params, transcript):
                return finish({"kind": "AliceWins_NoLegalMove"})
            return finish({"kind": "Stopped", "reason": "bob_resigned"})
        verdict = validate_bob_move(params, transcript, reply)
        transcript.append(TurnRecord(player="bob", verdict=verdict, ball=reply))
        if verdict != "legal":
            return finish(
                {
                    "kind": "IllegalMove",
                    "player": "bob",
                    "turn": len(transcript.turns) - 1,
                }
            )

        if transcript.bob_round_count() - 1 >= params.max_rounds:
            return finish({"kind": "Stopped", "reason": "max_rounds"})
        if (
            params.stop_radius is not None
            and reply.radius <= params.stop_radius
        ):
            return finish({"kind": "Stopped", "reason": "stop_radius"})
        if stop_when is not None and stop_when(transcript):
            return finish({"kind": "Stopped", "reason": "stop_condition"})


def revalidate(transcript: GameTranscript) -> list[str]:
    """Re-run the referee over a finished transcript; return discrepancies."""
    params = transcript.params
    shadow = GameTranscript(params)
    problems: list[str] = []
    for idx, rec in enumerate(transcript.turns):
        if rec.player == "bob":
            verdict = validate_bob_move(params, shadow, rec.ball)
        else:
            move = AliceMove(ball=rec.ball, slabs=rec.slabs)
            verdict, _ = validate_alice_move(params, shadow, move)
        if verdict != rec.verdict:
            problems.append(
                f"turn {idx}: recorded {rec.verdict!r}, recomputed {verdict!r}"
            )
        shadow.append(rec)
    return problems


def split_rounds(p: Union[int, float, str, Fraction],
                 p_prime: Union[int, float, str, Fraction]) -> int:
    """Minimal m with (1−p′)^m ≤ 1−p, computed exactly on rationals."""
    pf = _as_fraction(p)
    qf = _as_fraction(p_prime)
    if not (0 < pf < 1 and 0 < qf < 1):
        raise ValueError("both percentages must lie strictly between 0 and 1")
    target = 1 - pf
    acc = Fraction(1)
    step = 1 - qf
    m = 0
    while True:
        m += 1
        acc *= step
        if acc <= target:
            return m
        if m > 10**6:
            raise RuntimeError("split_rounds failed to terminate in 10^6 steps")
